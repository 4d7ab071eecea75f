//! Seeded multi-start search with deflation and orbit-aware deduplication.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::align::align_time_shift;
use super::continuation::{continue_converged, ContinuationSchedule, SeedDescriptor, SolutionRecord};
use super::newton::{newton, Deflation, SolveError};
use crate::error::{Error, Result};
use crate::lattice::{FourierField, ModeIndex};
use crate::model::{Galerkin, Nonlinearity};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiStartOptions {
    pub l_max: u32,
    pub starts_per_level: usize,
    /// Seed amplitude at level 1.
    pub rho: f64,
    pub rng_seed: u64,
}

impl Default for MultiStartOptions {
    fn default() -> Self {
        Self {
            l_max: 3,
            starts_per_level: 6,
            rho: 1.0,
            rng_seed: 0,
        }
    }
}

/// Relative threshold under which two branches count as one orbit.
pub const DEDUP_THRESHOLD: f64 = 1e-3;

/// `theta(s) = (s - 1) / s`, the Sobolev index embedding `E^theta` into `L^{s+1}`.
pub fn theta(s: f64) -> f64 {
    (s - 1.0) / s
}

/// Amplitude at level `l`: `rho l^{(1 - theta)(s + 1)/(s - 1)}`.
pub fn level_amplitude(rho: f64, s: f64, level: u32) -> f64 {
    rho * (level as f64).powf((1.0 - theta(s)) * (s + 1.0) / (s - 1.0))
}

/// Canonical modes with radius in `(2(l - 1), 2l]`, in lexicographic order.
pub fn level_pool(level: u32, radius: usize) -> Vec<ModeIndex> {
    let (lo, hi) = (2 * (level as u64 - 1), 2 * level as u64);
    let half = radius as i64 / 2;
    let mut out = Vec::new();
    for j in 0..=half {
        for k in -(radius as i64)..=(radius as i64) {
            let m = ModeIndex::new(j, k);
            let r = m.radius();
            if m.is_canonical() && r > lo && r <= hi && r <= radius as u64 {
                out.push(m);
            }
        }
    }
    out
}

fn substream(rng_seed: u64, level: u32, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(((level as u64) << 32) | index as u64);
    rng
}

/// The seeds of one level; amplitudes grow by half a level amplitude each
/// time the pool wraps around.
pub fn level_seeds(nl_s: f64, opts: &MultiStartOptions, level: u32, radius: usize) -> Vec<SeedDescriptor> {
    let pool = level_pool(level, radius);
    if pool.is_empty() {
        return Vec::new();
    }
    let base = level_amplitude(opts.rho, nl_s, level);
    (0..opts.starts_per_level)
        .map(|i| {
            let mut rng = substream(opts.rng_seed, level, i);
            SeedDescriptor {
                level,
                index: i,
                mode: Some(pool[i % pool.len()]),
                amplitude: base * (1.0 + 0.5 * (i / pool.len()) as f64),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            }
        })
        .collect()
}

/// Family norms below this count as this, so that round-off copies of the
/// zero solution merge.
const NORM_FLOOR: f64 = 1e-6;

/// Aligned distance within `DEDUP_THRESHOLD` times the family's largest norm.
fn same_orbit<T: Real>(a: &FourierField<T>, b: &FourierField<T>, family_max: f64) -> bool {
    align_time_shift(a, b).distance <= DEDUP_THRESHOLD * family_max.max(NORM_FLOOR)
}

/// Searches for distinct branches from seeds of levels `1..=l_max`.
///
/// Each level is solved at `beta0` in parallel, deflated against the
/// solutions of earlier levels; new solutions are continued to `beta_min`.
/// Completed branches are deduplicated modulo time shifts and returned
/// sorted by `I_beta`.
pub fn multi_start<T: Real>(
    nl: &Nonlinearity<T>,
    sched: &ContinuationSchedule,
    opts: &MultiStartOptions,
) -> Result<Vec<SolutionRecord<T>>> {
    sched.validate()?;
    if opts.l_max < 1 {
        return Err(Error::domain("l_max", "must be at least 1"));
    }
    let sys = Galerkin::new(nl, sched.m);
    let beta0 = T::lit(sched.beta0);
    let newton_opts = sched.newton_options();
    let mut deflation = Deflation::none();
    let mut found: Vec<FourierField<T>> = Vec::new();
    let mut records: Vec<SolutionRecord<T>> = Vec::new();

    for level in 1..=opts.l_max {
        let seeds = level_seeds(nl.s().as_f64(), opts, level, sched.m);
        let solved: Vec<_> = seeds
            .par_iter()
            .map(|seed| {
                let u0 = seed.field::<T>(sched.m);
                match newton(&sys, &u0, beta0, &newton_opts, &deflation) {
                    Ok(rep) => Ok(Some((seed.clone(), rep))),
                    Err(SolveError::NonConvergence { .. }) => Ok(None),
                    Err(SolveError::Core(e)) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let mut fresh = Vec::new();
        for (seed, rep) in solved.into_iter().flatten() {
            let scale = found.iter().chain([&rep.u]).map(|u| u.l2_norm().as_f64()).fold(0.0, f64::max);
            if found.iter().any(|k| same_orbit(k, &rep.u, scale)) {
                continue;
            }
            found.push(rep.u.clone());
            deflation.push(rep.u.clone());
            fresh.push((seed, rep));
        }
        let continued: Vec<_> = fresh
            .into_par_iter()
            .map(|(seed, rep)| continue_converged(&sys, rep.u, rep.iterations, sched, seed))
            .collect::<Result<_>>()?;
        records.extend(continued.into_iter().filter(|r| r.converged()));
    }

    let scale = records.iter().map(|r| r.field().l2_norm().as_f64()).fold(0.0, f64::max);
    let mut unique: Vec<SolutionRecord<T>> = Vec::new();
    for r in records {
        let u = r.field();
        if !unique.iter().any(|k| same_orbit(&k.field(), &u, scale)) {
            unique.push(r);
        }
    }
    unique.sort_by(|a, b| a.i_value.total_cmp(&b.i_value));
    Ok(unique)
}
