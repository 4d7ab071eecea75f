//! Geometric continuation of a branch in the penalty `beta`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::newton::{newton, Deflation, NewtonOptions, SolveError};
use crate::error::{Error, Result};
use crate::lattice::{sup_norm, Decomposition, FourierField, ModeIndex};
use crate::model::{Galerkin, Nonlinearity};
use crate::norms::{hs_norm, NormParams, NormReport};
use crate::scalar::Real;

/// Penalty path and Newton budget for one continuation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationSchedule {
    pub beta0: f64,
    pub beta_min: f64,
    pub factor: f64,
    pub max_newton: usize,
    pub tol_residual: f64,
    pub m: usize,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self {
            beta0: 1.0,
            beta_min: 1e-4,
            factor: 0.5,
            max_newton: 50,
            tol_residual: 1e-10,
            m: 16,
        }
    }
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |q: &'static str, why: String| Err(Error::domain(q, why));
        if !(self.beta_min > 0.0 && self.beta_min <= self.beta0 && self.beta0.is_finite()) {
            return bad("beta0/beta_min", format!("need 0 < beta_min <= beta0, got {} and {}", self.beta_min, self.beta0));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return bad("factor", format!("need 0 < factor < 1, got {}", self.factor));
        }
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual", format!("must be positive, got {}", self.tol_residual));
        }
        if self.max_newton == 0 {
            return bad("max_newton", "must be at least 1".into());
        }
        if self.m < 2 {
            return bad("m", format!("truncation radius must be at least 2, got {}", self.m));
        }
        Ok(())
    }

    /// `beta0, beta0 factor, ...`, ending exactly at `beta_min`.
    pub fn betas(&self) -> Vec<f64> {
        let mut out = vec![self.beta0];
        let mut b = self.beta0;
        while b > self.beta_min {
            b = (b * self.factor).max(self.beta_min);
            if b > self.beta_min * (1.0 + 1e-12) {
                out.push(b);
            } else {
                out.push(self.beta_min);
                break;
            }
        }
        out
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            max_iter: self.max_newton,
            tol: self.tol_residual,
            ..NewtonOptions::default()
        }
    }
}

/// Where a branch started.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedDescriptor {
    pub level: u32,
    pub index: usize,
    pub mode: Option<ModeIndex>,
    /// Real amplitude of the seed, `u = amplitude cos(2 j x + k t + phase)`.
    pub amplitude: f64,
    pub phase: f64,
}

impl SeedDescriptor {
    pub fn custom() -> Self {
        Self {
            level: 0,
            index: 0,
            mode: None,
            amplitude: 0.0,
            phase: 0.0,
        }
    }

    pub fn field<T: Real>(&self, radius: usize) -> FourierField<T> {
        let mut u = FourierField::zeros(radius);
        if let Some(m) = self.mode {
            let c = Complex::from_polar(T::lit(self.amplitude / 2.0), T::lit(self.phase));
            let c = if m.j == 0 && m.k == 0 { Complex::new(T::lit(self.amplitude), T::zero()) } else { c };
            u.set_pair(m.j, m.k, c).expect("seed mode inside ball");
        }
        u
    }
}

/// Tracked quantities at one penalty value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub beta: f64,
    pub residual_norm: f64,
    pub range_residual: f64,
    pub i_value: f64,
    pub v_c0: f64,
    pub v_t_l2: f64,
    pub v_tt_l2: f64,
    pub w_h1: f64,
    pub w_h2: f64,
    pub newton_iterations: usize,
}

impl PathPoint {
    const TRACKED: [&'static str; 5] = ["v_c0", "v_t_l2", "v_tt_l2", "w_h1", "w_h2"];

    fn tracked(&self) -> [f64; 5] {
        [self.v_c0, self.v_t_l2, self.v_tt_l2, self.w_h1, self.w_h2]
    }
}

/// A branch continued in `beta`, with its history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SolutionRecord<T: Real> {
    pub d: Decomposition<T>,
    pub beta_final: f64,
    pub residual_norm: f64,
    /// Coefficient `l^2` norm of `(k^2 - 4j^2) w - P_E f` at `beta_final`.
    pub range_residual: f64,
    pub i_value: f64,
    /// `a1 ||u||^{s+1}_{L^{s+1}} - a2 |Q|`; absent when no finite bound exists.
    pub energy_lower_bound: Option<f64>,
    pub norm_report: NormReport,
    pub v_c0_history: Vec<f64>,
    pub path: Vec<PathPoint>,
    /// The converged field at every recorded `beta`.
    pub snapshots: Vec<FourierField<T>>,
    pub seed: SeedDescriptor,
    /// Set when the path stopped before `beta_min`.
    pub failure: Option<String>,
}

impl<T: Real> SolutionRecord<T> {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }

    pub fn field(&self) -> FourierField<T> {
        self.d.to_field()
    }
}

pub(crate) fn time_derivative<T: Real>(u: &FourierField<T>, order: u32) -> FourierField<T> {
    let i = Complex::new(T::zero(), T::one());
    u.map_modes(|m, c| c * (i * T::from_int(m.k)).powu(order))
}

fn path_point<T: Real>(sys: &Galerkin<T>, u: &FourierField<T>, beta: T, iterations: usize) -> Result<PathPoint> {
    let res = sys.residual(u, beta)?;
    let v = u.filter(ModeIndex::is_kernel);
    let w = u.filter(|m| !m.is_kernel());
    Ok(PathPoint {
        beta: beta.as_f64(),
        residual_norm: res.l2_norm().as_f64(),
        range_residual: res.range_norm().as_f64(),
        i_value: sys.functional(u, beta)?.as_f64(),
        v_c0: sup_norm(&v).as_f64(),
        v_t_l2: time_derivative(&v, 1).l2_norm().as_f64(),
        v_tt_l2: time_derivative(&v, 2).l2_norm().as_f64(),
        w_h1: hs_norm(&w, T::one()).as_f64(),
        w_h2: hs_norm(&w, T::lit(2.0)).as_f64(),
        newton_iterations: iterations,
    })
}

/// Growth allowed per step: `(beta_old / beta_new)^{1/4}`, with quantities
/// below `SENTINEL_FLOOR` counted as zero.
pub const SENTINEL_FLOOR: f64 = 1e-6;

fn sentinel(prev: &PathPoint, next: &PathPoint) -> Option<String> {
    let limit = (prev.beta / next.beta).powf(0.25);
    for (name, (a, b)) in PathPoint::TRACKED
        .iter()
        .zip(prev.tracked().into_iter().zip(next.tracked()))
    {
        let ratio = (b + SENTINEL_FLOOR) / (a + SENTINEL_FLOOR);
        if !b.is_finite() || ratio > limit {
            return Some(format!(
                "blow-up sentinel: {name} grew by {ratio:.3} (limit {limit:.3}) from beta = {:e} to {:e}",
                prev.beta, next.beta
            ));
        }
    }
    None
}

pub(crate) fn norm_params(beta: f64) -> NormParams {
    NormParams {
        beta,
        ..NormParams::default()
    }
}

/// Continues an already converged solution at `betas[0]` down the schedule.
pub(crate) fn continue_converged<T: Real>(
    sys: &Galerkin<T>,
    start: FourierField<T>,
    start_iterations: usize,
    sched: &ContinuationSchedule,
    seed: SeedDescriptor,
) -> Result<SolutionRecord<T>> {
    let betas = sched.betas();
    let opts = sched.newton_options();
    let mut path = vec![path_point(sys, &start, T::lit(betas[0]), start_iterations)?];
    let mut snapshots = vec![start];
    let mut failure = None;
    for &b in &betas[1..] {
        let beta = T::lit(b);
        let warm = snapshots.last().expect("nonempty");
        match newton(sys, warm, beta, &opts, &Deflation::none()) {
            Ok(rep) => {
                let point = path_point(sys, &rep.u, beta, rep.iterations)?;
                if let Some(why) = sentinel(path.last().expect("nonempty"), &point) {
                    failure = Some(why);
                    break;
                }
                path.push(point);
                snapshots.push(rep.u);
            }
            Err(SolveError::NonConvergence { residual_norm, .. }) => {
                failure = Some(format!("Newton failed at beta = {b:e} (best residual {residual_norm:e})"));
                break;
            }
            Err(SolveError::Core(e)) => return Err(e),
        }
    }
    finish(sys, path, snapshots, seed, failure)
}

fn finish<T: Real>(
    sys: &Galerkin<T>,
    path: Vec<PathPoint>,
    snapshots: Vec<FourierField<T>>,
    seed: SeedDescriptor,
    failure: Option<String>,
) -> Result<SolutionRecord<T>> {
    let last = path.last().expect("nonempty path");
    let u = snapshots.last().expect("nonempty path");
    Ok(SolutionRecord {
        d: Decomposition::from_field(u),
        beta_final: last.beta,
        residual_norm: last.residual_norm,
        range_residual: last.range_residual,
        i_value: last.i_value,
        energy_lower_bound: Some(sys.energy_lower_bound(u)?.as_f64()).filter(|b| b.is_finite()),
        norm_report: NormReport::compute(u, &norm_params(last.beta))?,
        v_c0_history: path.iter().map(|p| p.v_c0).collect(),
        path,
        snapshots,
        seed,
        failure,
    })
}

/// Solves at `beta0` from `seed`, then continues the branch to `beta_min`.
///
/// A failure at `beta0` yields a record holding the best iterate with its
/// residual and the failure annotation.
pub fn continue_beta<T: Real>(
    nl: &Nonlinearity<T>,
    seed: &Decomposition<T>,
    sched: &ContinuationSchedule,
) -> Result<SolutionRecord<T>> {
    sched.validate()?;
    let sys = Galerkin::new(nl, sched.m);
    let u0 = seed.to_field().resized(sched.m);
    continue_from(&sys, &u0, sched, &Deflation::none(), SeedDescriptor::custom())
}

pub(crate) fn continue_from<T: Real>(
    sys: &Galerkin<T>,
    u0: &FourierField<T>,
    sched: &ContinuationSchedule,
    deflation: &Deflation<T>,
    seed: SeedDescriptor,
) -> Result<SolutionRecord<T>> {
    let beta0 = T::lit(sched.beta0);
    match newton(sys, u0, beta0, &sched.newton_options(), deflation) {
        Ok(rep) => continue_converged(sys, rep.u, rep.iterations, sched, seed),
        Err(SolveError::NonConvergence { best, residual_norm, iterations }) => {
            let point = path_point(sys, &best, beta0, iterations)?;
            finish(
                sys,
                vec![point],
                vec![*best],
                seed,
                Some(format!("Newton failed at beta = {:e} (best residual {residual_norm:e})", sched.beta0)),
            )
        }
        Err(SolveError::Core(e)) => Err(e),
    }
}
