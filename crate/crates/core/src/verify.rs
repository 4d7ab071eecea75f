//! Executable checks of the nonlinear estimates on random fields, and the
//! regularity bootstrap on computed solutions.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxop::{box_invert, h1_bootstrap_check, holder_to_sobolev_check};
use crate::error::{Error, Result};
use crate::lattice::{kernel_profiles, refined_grid, sup_norm, FourierField, ModeIndex, Transform};
use crate::model::{f_eval, Galerkin, Nonlinearity};
use crate::norms::{block_sups, es_norm, holder_estimate, hs_norm, lp_norm, lp_norm_field, lq_coeff_norm};
use crate::scalar::Real;
use crate::solver::{time_derivative, SolutionRecord, SENTINEL_FLOOR};

/// Decay exponents of the two preset ensembles.
pub const ROUGH_DECAY: f64 = 0.75;
pub const SMOOTH_DECAY: f64 = 1.25;
/// Decay used for the embedding and interpolation sweeps, whose worst ratios
/// only settle under doubling for fast-decaying spectra.
pub const EMBEDDING_DECAY: f64 = 2.5;

/// Relative drift of a worst ratio under doubling the radius accepted by the sweeps.
pub const SWEEP_TOLERANCE: f64 = 0.05;

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random kernel-free fields with independent complex Gaussian amplitudes of
/// variance `(1 + 2|j| + |k|)^{-2 decay}`.
///
/// Every amplitude is drawn from its own stream keyed by `(seed, sample, j, k)`,
/// so the sample at radius `m` is the truncation of the sample at any larger radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub decay: f64,
    pub seed: u64,
}

impl Ensemble {
    pub fn new(decay: f64, seed: u64) -> Self {
        Self { decay, seed }
    }

    fn amplitude(&self, sample: u64, m: ModeIndex) -> Complex<f64> {
        let key = mix(mix(mix(self.seed) ^ sample) ^ (m.j as u64).wrapping_mul(0x1_0000_0001)) ^ (m.k as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(key));
        let sd = (1.0 + m.radius() as f64).powf(-self.decay) / std::f64::consts::SQRT_2;
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex::new(re * sd, im * sd)
    }

    pub fn sample<T: Real>(&self, index: u64, radius: usize) -> FourierField<T> {
        let mut u = FourierField::zeros(radius);
        let modes: Vec<ModeIndex> = u.modes().map(|(m, _)| m).filter(|m| m.is_canonical() && !m.is_kernel()).collect();
        for m in modes {
            let c = self.amplitude(index, m);
            u.set_pair(m.j, m.k, Complex::new(T::lit(c.re), T::lit(c.im)))
                .expect("mode inside ball");
        }
        u
    }

    /// A sample restricted to one dyadic block.
    pub fn block_sample<T: Real>(&self, index: u64, radius: usize, level: u32) -> FourierField<T> {
        self.sample::<T>(index, radius).filter(|m| m.dyadic_level() == level)
    }
}

/// One row of a per-sample table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: u64,
    pub ratio: f64,
}

/// Outcome of one estimate over an ensemble.
///
/// `pass` holds iff `envelope_lower <= worst_ratio <= envelope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub samples: usize,
    pub worst_ratio: f64,
    pub envelope: f64,
    pub envelope_lower: f64,
    pub pass: bool,
    pub table: Vec<SampleRow>,
    /// Named auxiliary measurements.
    pub details: BTreeMap<String, f64>,
}

impl EstimateReport {
    fn new(name: &str, table: Vec<SampleRow>, envelope_lower: f64, envelope: f64) -> Self {
        let worst = table.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        Self {
            name: name.to_owned(),
            samples: table.len(),
            worst_ratio: worst,
            envelope,
            envelope_lower,
            pass: worst.is_finite() && worst >= envelope_lower && worst <= envelope,
            table,
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_owned(), value);
        self
    }
}

/// Sweep parameters shared by the ensemble checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub ensemble: Ensemble,
    pub samples: usize,
    /// Radius of the reported table; the stability check doubles it.
    pub radius: usize,
}

fn ratios(sweep: &Sweep, radius: usize, ratio: impl Fn(&FourierField<f64>) -> Result<f64> + Sync) -> Result<Vec<SampleRow>> {
    (0..sweep.samples as u64)
        .into_par_iter()
        .map(|i| {
            let f = sweep.ensemble.sample::<f64>(i, radius);
            Ok(SampleRow { index: i, ratio: ratio(&f)? })
        })
        .collect()
}

/// Worst ratio at `radius` against the worst ratio at `2 radius`.
fn stability_report(
    name: &str,
    sweep: &Sweep,
    ratio: impl Fn(&FourierField<f64>) -> Result<f64> + Sync,
) -> Result<EstimateReport> {
    let coarse = ratios(sweep, sweep.radius, &ratio)?;
    let fine = ratios(sweep, 2 * sweep.radius, &ratio)?;
    let fine_worst = fine.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let report = EstimateReport::new(
        name,
        coarse,
        fine_worst * (1.0 - SWEEP_TOLERANCE),
        fine_worst * (1.0 + SWEEP_TOLERANCE),
    );
    let drift = (report.worst_ratio - fine_worst).abs() / fine_worst;
    Ok(report.detail("worst_ratio_doubled", fine_worst).detail("drift", drift))
}

/// Exponent pair `(s, p)` related by `p = (2 - s)/(1 - s)`, `s = (p - 2)/(p - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevExponent {
    FromS(f64),
    FromP(f64),
}

pub fn p_of_s(s: f64) -> f64 {
    (2.0 - s) / (1.0 - s)
}

pub fn s_of_p(p: f64) -> f64 {
    (p - 2.0) / (p - 1.0)
}

impl SobolevExponent {
    pub fn resolve(self) -> Result<(f64, f64)> {
        let (s, p) = match self {
            SobolevExponent::FromS(s) => (s, p_of_s(s)),
            SobolevExponent::FromP(p) => (s_of_p(p), p),
        };
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain("Sobolev exponent", format!("s = {s} outside (0, 1)")));
        }
        Ok((s, p))
    }
}

/// `||f||_{L^p} / ||f||_{E^s}`.
pub fn sobolev_ratio<T: Real>(f: &FourierField<T>, s: T, p: T) -> Result<T> {
    Ok(lp_norm_field(f, p)? / es_norm(f, s)?)
}

/// Embedding `E^s -> L^p`: worst ratio at the sweep radius, stable under
/// doubling. Details record the ratios of pure dyadic-block fields, which
/// decay with the level.
pub fn sobolev_check(sweep: &Sweep, exponent: SobolevExponent) -> Result<EstimateReport> {
    let (s, p) = exponent.resolve()?;
    let report = stability_report("sobolev", sweep, |f| sobolev_ratio(f, s, p))?
        .detail("s", s)
        .detail("p", p);
    let top = ModeIndex::new(0, sweep.radius as i64).dyadic_level();
    let mut report = report;
    for level in 2..=top {
        let block = sweep.ensemble.block_sample::<f64>(0, sweep.radius, level);
        report = report.detail(&format!("block_ratio.{level}"), sobolev_ratio(&block, s, p)?);
    }
    Ok(report)
}

/// `||u||_{L^p} / (||u||_{L^2}^{1-s} ||u||_{E^1}^s)` with `s = s(p)`.
pub fn gn_ratio<T: Real>(u: &FourierField<T>, p: T) -> Result<T> {
    let s = (p - T::lit(2.0)) / (p - T::one());
    let lp = lp_norm_field(u, p)?;
    let e1 = es_norm(u, T::one())?;
    Ok(lp / (u.l2_norm().powf(T::one() - s) * e1.powf(s)))
}

/// Gagliardo-Nirenberg interpolation: worst ratio stable under doubling;
/// `scale_defect` is the largest relative change of a ratio under `u -> 7.3 u`.
pub fn gn_check(sweep: &Sweep, p: f64) -> Result<EstimateReport> {
    if !(p > 2.0) {
        return Err(Error::domain("p", format!("Gagliardo-Nirenberg needs p > 2, got {p}")));
    }
    let report = stability_report("gagliardo_nirenberg", sweep, |u| gn_ratio(u, p))?;
    let defect = (0..sweep.samples.min(20) as u64)
        .map(|i| {
            let u = sweep.ensemble.sample::<f64>(i, sweep.radius);
            let a = gn_ratio(&u, p)?;
            let b = gn_ratio(&u.scaled(7.3), p)?;
            Ok((a - b).abs() / a)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(report.detail("p", p).detail("scale_defect", defect))
}

/// Quadrature nodes for the distribution-function integral.
pub const LAYER_CAKE_NODES: usize = 1 << 14;

/// Recomputes `||f||_{L^p}^p` as `p int_0^inf y^{p-1} w(y) dy`, with the
/// distribution function `w(y) = |{|f| > y}|` read off the 4x refined grid and
/// the integral taken by the composite midpoint rule. Returns the relative
/// disagreement with the direct quadrature.
pub fn layer_cake_oracle<T: Real>(f: &FourierField<T>, p: f64, s: f64) -> Result<f64> {
    if !(p > 2.0) || (s_of_p(p) - s).abs() > 1e-12 {
        return Err(Error::domain("layer cake", format!("need p > 2 and s = s(p), got p = {p}, s = {s}")));
    }
    let (nx, nt) = refined_grid(f.radius(), 4);
    let g = Transform::new(nx, nt)?.synthesize(f)?;
    let mut mags: Vec<f64> = g.values().iter().map(|v| v.abs().as_f64()).collect();
    mags.sort_by(f64::total_cmp);
    let top = *mags.last().unwrap_or(&0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    let area = f64::cell_area();
    let n = mags.len() as f64;
    let distribution = |y: f64| {
        let below = mags.partition_point(|&v| v <= y);
        area * (mags.len() - below) as f64 / n
    };
    let h = top / LAYER_CAKE_NODES as f64;
    let integral: f64 = (0..LAYER_CAKE_NODES)
        .map(|i| {
            let y = (i as f64 + 0.5) * h;
            y.powf(p - 1.0) * distribution(y)
        })
        .sum::<f64>()
        * h
        * p;
    let direct = lp_norm(&g, T::lit(p))?.as_f64().powf(p);
    Ok((integral - direct).abs() / direct)
}

/// Estimates runnable over an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    H1Bootstrap,
    HolderInversion,
    HausdorffYoung,
    Sobolev,
    GagliardoNirenberg,
    LayerCake,
    HolderToSobolev,
}

impl Estimate {
    pub const ALL: [Estimate; 7] = [
        Estimate::H1Bootstrap,
        Estimate::HolderInversion,
        Estimate::HausdorffYoung,
        Estimate::Sobolev,
        Estimate::GagliardoNirenberg,
        Estimate::LayerCake,
        Estimate::HolderToSobolev,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimate::H1Bootstrap => "h1_bootstrap",
            Estimate::HolderInversion => "holder_inversion",
            Estimate::HausdorffYoung => "hausdorff_young",
            Estimate::Sobolev => "sobolev",
            Estimate::GagliardoNirenberg => "gagliardo_nirenberg",
            Estimate::LayerCake => "layer_cake",
            Estimate::HolderToSobolev => "holder_to_sobolev",
        }
    }

    /// Spectral decay of the ensemble the estimate is swept over by default.
    pub fn default_decay(self) -> f64 {
        match self {
            Estimate::Sobolev | Estimate::GagliardoNirenberg => EMBEDDING_DECAY,
            _ => SMOOTH_DECAY,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// Exponents used by [`run_estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateParams {
    /// Sobolev index for the embedding check.
    pub s: f64,
    /// Integrability exponent for the interpolation and layer-cake checks.
    pub p: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self {
            s: 0.5,
            p: 4.0,
            gamma: 0.5,
            gamma_prime: 0.3,
        }
    }
}

/// Relative slack of the Hausdorff-Young comparison.
pub const HAUSDORFF_YOUNG_SLACK: f64 = 1e-10;

fn inequality_report(
    name: &str,
    sweep: &Sweep,
    slack: f64,
    cmp: impl Fn(&FourierField<f64>) -> Result<(f64, bool)> + Sync,
) -> Result<EstimateReport> {
    let rows: Vec<(SampleRow, bool)> = (0..sweep.samples as u64)
        .into_par_iter()
        .map(|i| {
            let f = sweep.ensemble.sample::<f64>(i, sweep.radius);
            let (ratio, pass) = cmp(&f)?;
            Ok((SampleRow { index: i, ratio }, pass))
        })
        .collect::<Result<_>>()?;
    let failures = rows.iter().filter(|(_, ok)| !ok).count();
    let mut report = EstimateReport::new(name, rows.into_iter().map(|(r, _)| r).collect(), 0.0, 1.0 + slack);
    report.pass &= failures == 0;
    Ok(report.detail("failures", failures as f64))
}

fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

/// `||u||_{l^q} / (|Q|^{-1/p} ||u||_{L^p})` for `p` in `{1, 4/3, 2}`, `q` conjugate.
pub fn hausdorff_young_ratio(u: &FourierField<f64>, p: f64) -> Result<f64> {
    let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let lhs = lq_coeff_norm(u, q)?;
    let rhs = f64::cell_area().powf(-1.0 / p) * lp_norm_field(u, p)?;
    Ok(ratio_of(lhs, rhs))
}

/// `holder_estimate(box_invert(f), gamma) / ||f||_{L^2}`.
pub fn holder_inversion_ratio(f: &FourierField<f64>, gamma: f64) -> Result<f64> {
    Ok(ratio_of(holder_estimate(&box_invert(f)?, gamma), f.l2_norm()))
}

/// Runs one estimate over the ensemble of `sweep`.
pub fn run_estimate(estimate: Estimate, sweep: &Sweep, params: &EstimateParams) -> Result<EstimateReport> {
    match estimate {
        Estimate::H1Bootstrap => inequality_report(estimate.name(), sweep, 8.0 * f64::EPSILON, |f| {
            let c = h1_bootstrap_check(f)?;
            Ok((ratio_of(c.lhs, c.rhs), c.pass))
        }),
        Estimate::HolderInversion => {
            let gamma = params.gamma.min(0.45);
            Ok(stability_report(estimate.name(), sweep, |f| holder_inversion_ratio(f, gamma))?.detail("gamma", gamma))
        }
        Estimate::HausdorffYoung => inequality_report(estimate.name(), sweep, HAUSDORFF_YOUNG_SLACK, |f| {
            let mut worst = 0.0f64;
            for p in [1.0, 4.0 / 3.0, 2.0] {
                worst = worst.max(hausdorff_young_ratio(f, p)?);
            }
            Ok((worst, worst <= 1.0 + HAUSDORFF_YOUNG_SLACK))
        }),
        Estimate::Sobolev => sobolev_check(sweep, SobolevExponent::FromS(params.s)),
        Estimate::GagliardoNirenberg => gn_check(sweep, params.p),
        Estimate::LayerCake => {
            let p = params.p;
            let s = s_of_p(p);
            inequality_report(estimate.name(), sweep, 0.0, |f| {
                let d = layer_cake_oracle(f, p, s)?;
                Ok((d * 1e3, d < 1e-3))
            })
            .map(|r| r.detail("p", p).detail("ratio_scale", 1e3))
        }
        Estimate::HolderToSobolev => {
            let (g, gp) = (params.gamma, params.gamma_prime);
            inequality_report(estimate.name(), sweep, 1e-12, |f| {
                let c = holder_to_sobolev_check(f, g, gp)?;
                let ratio = c
                    .quadrants
                    .iter()
                    .map(|(_, q)| ratio_of(q.lhs, q.rhs))
                    .fold(0.0, f64::max);
                Ok((ratio, c.pass))
            })
            .map(|r| r.detail("gamma", g).detail("gamma_prime", gp))
        }
    }
}

/// Which branch of the `C^0` dichotomy applies to a kernel component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Case {
    /// `||v||_{C^0} <= 8 ||v||_{L^2}`.
    Small,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct C0Diagnostic {
    pub case: C0Case,
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub m5: f64,
    pub pass: bool,
}

const PSI_XI_NODES: usize = 2001;
const PSI_X_NODES: usize = 64;

/// `psi(z) = min_{|xi| <= m5, x} f(x, z + xi) - f(x, xi)` by grid minimization.
pub fn psi<T: Real>(nl: &Nonlinearity<T>, z: f64, m5: f64) -> f64 {
    let xs: Vec<(f64, f64)> = (0..PSI_X_NODES)
        .map(|i| {
            let x = T::lit(std::f64::consts::PI * i as f64 / PSI_X_NODES as f64);
            (nl.a_at(x).as_f64(), nl.b_at(x).as_f64())
        })
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..PSI_XI_NODES {
        let xi = -m5 + 2.0 * m5 * i as f64 / (PSI_XI_NODES - 1) as f64;
        for &(a, b) in &xs {
            let f = |u: f64| nl.f_with(T::lit(a), T::lit(b), T::lit(u)).as_f64();
            best = best.min(f(z + xi) - f(xi));
        }
    }
    best
}

/// `nu(z) = min(psi(z), -psi(-z))`.
pub fn nu<T: Real>(nl: &Nonlinearity<T>, z: f64, m5: f64) -> f64 {
    psi(nl, z, m5).min(-psi(nl, -z, m5))
}

/// The `C^0` bound on the kernel component of a computed solution.
///
/// In the small case the report compares `||v||_{C^0}` with `8 ||v||_{L^2}`;
/// otherwise `nu(delta)` with `8 ||f(., w)||_{C^0}`, `delta` half the larger
/// of the two traveling-wave suprema. `m5` defaults to `||w||_{C^0}`.
pub fn c0_bound_diagnostic<T: Real>(
    nl: &Nonlinearity<T>,
    record: &SolutionRecord<T>,
    m5: Option<f64>,
) -> Result<C0Diagnostic> {
    let u = record.field();
    let v = u.filter(ModeIndex::is_kernel);
    let w = u.filter(|m| !m.is_kernel());
    let m5 = m5.unwrap_or_else(|| sup_norm(&w).as_f64());
    let v_c0 = sup_norm(&v).as_f64();
    let v_l2 = v.l2_norm().as_f64();
    if v_c0 <= 8.0 * v_l2 {
        return Ok(C0Diagnostic {
            case: C0Case::Small,
            lhs: v_c0,
            rhs: 8.0 * v_l2,
            delta: 0.0,
            m5,
            pass: true,
        });
    }
    let (p1, p2) = kernel_profiles(&v)?;
    let profile_sup = |p: &crate::lattice::KernelProfile<T>, sign: i64| {
        let mut f = FourierField::zeros(u.radius());
        for (j, c) in p.iter() {
            if sign > 0 && j == 0 {
                continue;
            }
            f.set(j, sign * 2 * j, c).expect("profile inside ball");
        }
        sup_norm(&f).as_f64()
    };
    let delta = 0.5 * profile_sup(&p1, 1).max(profile_sup(&p2, -1));
    let (nx, nt) = refined_grid(u.radius(), 4);
    let wg = Transform::new(nx, nt)?.synthesize(&w)?;
    let rhs = 8.0 * f_eval(nl, &wg).sup().as_f64();
    let lhs = nu(nl, delta, m5);
    Ok(C0Diagnostic {
        case: C0Case::Large,
        lhs,
        rhs,
        delta,
        m5,
        pass: lhs <= rhs,
    })
}

/// Bootstrap quantities at one penalty value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRow {
    pub beta: f64,
    pub w_h1: f64,
    pub w_h2: f64,
    pub w_h3: f64,
    pub v_t: f64,
    pub v_tt: f64,
    pub v_ttt: f64,
    /// `sup |u_tt - u_xx + f(x, u)|` on the 4x refined grid.
    pub pointwise_residual: f64,
    /// Negative least-squares slope of `log2 ||Delta_m w||_{C^0}` against `m`.
    pub holder_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub rows: Vec<BootstrapRow>,
    /// `(max + floor) / (min + floor)` over the path, floor `SENTINEL_FLOOR`.
    pub variation: BTreeMap<String, f64>,
    /// Quantities larger at the smallest `beta` than at the largest by over 10%.
    pub trending_up: Vec<String>,
    /// Lower bound `1 - s/(s+1)` expected of the Hölder exponent.
    pub holder_threshold: f64,
}

/// Least-squares decay slope of the dyadic block suprema over occupied
/// levels `>= 2` (falling back to `>= 1` when fewer than two remain).
pub fn holder_exponent<T: Real>(w: &FourierField<T>) -> Option<f64> {
    let sups: Vec<f64> = block_sups(w, 4).into_iter().map(|v| v.as_f64()).collect();
    let peak = sups.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return None;
    }
    let occupied = |from: usize| -> Vec<(f64, f64)> {
        sups.iter()
            .enumerate()
            .skip(from)
            .filter(|(_, &s)| s > 1e-300 && s > peak * f64::EPSILON)
            .map(|(m, &s)| (m as f64, s.log2()))
            .collect()
    };
    let mut pts = occupied(2);
    if pts.len() < 2 {
        pts = occupied(1);
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Some(-sxy / sxx)
}

/// `sup |u_tt - u_xx + f(x, u)|` on the 4x refined grid.
pub fn pointwise_residual<T: Real>(nl: &Nonlinearity<T>, u: &FourierField<T>) -> Result<f64> {
    let (nx, nt) = refined_grid(u.radius(), 4);
    let tr = Transform::new(nx, nt)?;
    let ug = tr.synthesize(u)?;
    let wave = tr.synthesize(&u.map_modes(|m, c| c * T::from_int(m.symbol())))?;
    Ok(wave.zip_map(&f_eval(nl, &ug), |a, b| a + b).sup().as_f64())
}

pub fn bootstrap_report<T: Real>(nl: &Nonlinearity<T>, record: &SolutionRecord<T>) -> Result<BootstrapReport> {
    let radius = record.d.radius();
    let sys = Galerkin::new(nl, radius);
    let rows = record
        .path
        .iter()
        .zip(&record.snapshots)
        .map(|(point, u)| {
            let f_hat = sys.f_field(u)?;
            let w = box_invert(&f_hat.filter(|m| !m.is_kernel()).scaled(-T::one()))?;
            let v = u.filter(ModeIndex::is_kernel);
            let l2 = |n: u32| time_derivative(&v, n).l2_norm().as_f64();
            Ok(BootstrapRow {
                beta: point.beta,
                w_h1: hs_norm(&w, T::one()).as_f64(),
                w_h2: hs_norm(&w, T::lit(2.0)).as_f64(),
                w_h3: hs_norm(&w, T::lit(3.0)).as_f64(),
                v_t: l2(1),
                v_tt: l2(2),
                v_ttt: l2(3),
                pointwise_residual: pointwise_residual(nl, u)?,
                holder_exponent: holder_exponent(&u.filter(|m| !m.is_kernel())),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let v_c0: Vec<f64> = record.v_c0_history.clone();
    let series: Vec<(&str, Vec<f64>)> = vec![
        ("v_c0", v_c0),
        ("v_t", rows.iter().map(|r| r.v_t).collect()),
        ("v_tt", rows.iter().map(|r| r.v_tt).collect()),
        ("v_ttt", rows.iter().map(|r| r.v_ttt).collect()),
        ("w_h1", rows.iter().map(|r| r.w_h1).collect()),
        ("w_h2", rows.iter().map(|r| r.w_h2).collect()),
        ("w_h3", rows.iter().map(|r| r.w_h3).collect()),
    ];
    let mut variation = BTreeMap::new();
    let mut trending_up = Vec::new();
    for (name, values) in &series {
        if values.is_empty() {
            continue;
        }
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        variation.insert((*name).to_owned(), (hi + SENTINEL_FLOOR) / (lo + SENTINEL_FLOOR));
        let (first, last) = (values[0], values[values.len() - 1]);
        if last > 1.1 * first + SENTINEL_FLOOR {
            trending_up.push((*name).to_owned());
        }
    }
    let s = nl.s().as_f64();
    Ok(BootstrapReport {
        rows,
        variation,
        trending_up,
        holder_threshold: 1.0 - s / (s + 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Decomposition, Part};
    use crate::solver::{continue_beta, ContinuationSchedule};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ensemble_is_kernel_free_real_and_nested() {
        let ens = Ensemble::new(SMOOTH_DECAY, 42);
        let a = ens.sample::<f64>(3, 16);
        let b = ens.sample::<f64>(3, 32);
        assert!(a.project(Part::Kernel).is_zero() && a.get(0, 0) == Complex::new(0.0, 0.0));
        assert!(a.realness_defect() == 0.0);
        assert_eq!(b.resized(16), a);
        assert_ne!(ens.sample::<f64>(4, 16), a);
        assert_eq!(Ensemble::new(SMOOTH_DECAY, 42).sample::<f64>(3, 16), a);
    }

    #[test]
    fn exponent_maps_invert() {
        assert_relative_eq!(p_of_s(0.5), 3.0);
        assert_relative_eq!(s_of_p(3.0), 0.5);
        assert!(SobolevExponent::FromS(1.0).resolve().is_err());
        assert_eq!(SobolevExponent::FromP(3.0).resolve().unwrap(), (0.5, 3.0));
    }

    #[test]
    fn single_mode_sobolev_ratio() {
        // cos(2x + 3t), lambda = -5: ||.||_{L^3} = (|Q| mean |cos|^3)^{1/3}, E^s = (2 (1/2)^2 5^s)^{1/2}
        let mut f = FourierField::<f64>::zeros(8);
        f.set_pair(1, 3, Complex::new(0.5, 0.0)).unwrap();
        let mean_cos3 = 4.0 / (3.0 * PI);
        let lp = (2.0 * PI * PI * mean_cos3).powf(1.0 / 3.0);
        let es = (0.5f64 * 5f64.sqrt()).sqrt();
        assert_relative_eq!(sobolev_ratio(&f, 0.5, 3.0).unwrap(), lp / es, max_relative = 1e-6);
    }

    #[test]
    fn gn_single_mode_and_scaling() {
        let mut f = FourierField::<f64>::zeros(8);
        f.set_pair(0, 1, Complex::new(0.5, 0.0)).unwrap();
        // cos t: L^4 = (|Q| 3/8)^{1/4}, L^2 = (|Q|/2)^{1/2}, E^1 = (1/2)^{1/2}, s(4) = 2/3
        let q = 2.0 * PI * PI;
        let expected = (q * 3.0 / 8.0).powf(0.25) / ((q / 2.0).sqrt().powf(1.0 / 3.0) * 0.5f64.sqrt().powf(2.0 / 3.0));
        assert_relative_eq!(gn_ratio(&f, 4.0).unwrap(), expected, max_relative = 1e-12);
        let u = Ensemble::new(SMOOTH_DECAY, 1).sample::<f64>(0, 16);
        let (a, b) = (gn_ratio(&u, 4.0).unwrap(), gn_ratio(&u.scaled(7.3), 4.0).unwrap());
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn layer_cake_examples() {
        let mut f = FourierField::<f64>::zeros(8);
        f.set_pair(1, 1, Complex::new(0.5, 0.0)).unwrap();
        assert!(layer_cake_oracle(&f, 3.0, 0.5).unwrap() < 1e-3);
        assert_eq!(layer_cake_oracle(&FourierField::<f64>::zeros(8), 3.0, 0.5).unwrap(), 0.0);
        assert!(layer_cake_oracle(&f, 3.0, 0.4).is_err());
        for i in 0..5 {
            let g = Ensemble::new(ROUGH_DECAY, 9).sample::<f64>(i, 16);
            assert!(layer_cake_oracle(&g, 3.0, 0.5).unwrap() < 1e-3);
        }
    }

    #[test]
    fn single_cosine_distribution_function() {
        // |cos| > y on a fraction 1 - (2/pi) arcsin y of Q
        let mut f = FourierField::<f64>::zeros(64);
        f.set_pair(1, 1, Complex::new(0.5, 0.0)).unwrap();
        let (nx, nt) = refined_grid(64, 4);
        let g = Transform::new(nx, nt).unwrap().synthesize(&f).unwrap();
        let n = g.values().len() as f64;
        for y in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let measured = g.values().iter().filter(|v| v.abs() > y).count() as f64 / n;
            let exact = 1.0 - 2.0 / PI * f64::asin(y);
            assert!((measured - exact).abs() < 0.01, "y = {y}: {measured} vs {exact}");
        }
    }

    #[test]
    fn psi_oracle() {
        let nl = Nonlinearity::power(3.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(psi(&nl, 2.0, 1.0), 4.0, max_relative = 1e-9);
        let zs: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let vals: Vec<f64> = zs.iter().map(|&z| psi(&nl, z, 1.0)).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_solution_reports() {
        let nl = Nonlinearity::power(3.0, 1.0, 0.5).unwrap();
        let sched = ContinuationSchedule {
            m: 8,
            beta_min: 0.25,
            ..ContinuationSchedule::default()
        };
        let rec = continue_beta(&nl, &Decomposition::zeros(8), &sched).unwrap();
        let c0 = c0_bound_diagnostic(&nl, &rec, None).unwrap();
        assert_eq!(c0.case, C0Case::Small);
        assert_eq!(c0.lhs, 0.0);
        let b = bootstrap_report(&nl, &rec).unwrap();
        assert!(b.rows.iter().all(|r| r.w_h1 == 0.0 && r.v_t == 0.0 && r.pointwise_residual == 0.0));
        assert!(b.rows.iter().all(|r| r.holder_exponent.is_none()));
        assert!(b.variation.values().all(|&v| v == 1.0));
    }

    #[test]
    fn bootstrap_norms_are_ordered() {
        let nl = Nonlinearity::power(3.0, 1.0, 0.5).unwrap();
        let sched = ContinuationSchedule {
            m: 12,
            beta_min: 0.25,
            ..ContinuationSchedule::default()
        };
        let mut seed = FourierField::<f64>::zeros(12);
        seed.set_pair(0, 1, Complex::new(0.4, 0.0)).unwrap();
        let rec = continue_beta(&nl, &Decomposition::from_field(&seed), &sched).unwrap();
        assert!(rec.converged());
        let b = bootstrap_report(&nl, &rec).unwrap();
        for r in &b.rows {
            assert!(r.w_h1 <= r.w_h2 && r.w_h2 <= r.w_h3);
            assert!(r.pointwise_residual < 1e-6);
            assert!(r.holder_exponent.unwrap() > b.holder_threshold);
        }
    }

    #[test]
    fn linear_bootstrap_matches_direct_solve() {
        // a = 0, alpha = 0.5, b = 0.3 cos 2x: w solves (k^2 - 4j^2) w = 0.5 w + b on (1, 0)
        let nl = Nonlinearity::linear(0.5, vec![0.0, 0.3]).unwrap();
        let sched = ContinuationSchedule {
            m: 8,
            beta_min: 0.5,
            ..ContinuationSchedule::default()
        };
        let rec = continue_beta(&nl, &Decomposition::zeros(8), &sched).unwrap();
        let w10 = 0.15 / (-4.0 - 0.5);
        assert_relative_eq!(rec.field().get(1, 0).re, w10, max_relative = 1e-10);
        let b = bootstrap_report(&nl, &rec).unwrap();
        let h1 = (2.0 * w10 * w10 * 9.0f64).sqrt();
        assert_relative_eq!(b.rows[0].w_h1, h1, max_relative = 1e-9);
    }
}
