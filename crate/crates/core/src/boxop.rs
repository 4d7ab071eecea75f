//! The periodic d'Alembertian `u_tt - u_xx`, diagonal on the Fourier basis
//! with symbol `4 j^2 - k^2`, and the linear estimates built on it.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{refined_grid, FourierField, ModeIndex, Quadrant, Transform};
use crate::norms::{holder_estimate, hs_norm_bare, lp_norm_field};
use crate::scalar::Real;

/// Amplitudes on characteristic modes below this fraction of the largest
/// amplitude are treated as round-off and dropped by [`box_invert`].
pub const CHARACTERISTIC_TOLERANCE: f64 = 1e-14;

/// Symbol of the d'Alembertian on `exp(i (2 j x + k t))`.
pub fn symbol(mode: ModeIndex) -> i64 {
    mode.symbol()
}

/// Modewise multiplication by `4 j^2 - k^2`; characteristic modes map to zero.
pub fn box_apply<T: Real>(u: &FourierField<T>) -> FourierField<T> {
    u.map_modes(|m, c| c * T::from_int(m.symbol()))
}

/// Modewise division by `4 j^2 - k^2` on a kernel-free right-hand side.
pub fn box_invert<T: Real>(f: &FourierField<T>) -> Result<FourierField<T>> {
    check_kernel_free(f)?;
    Ok(f.map_modes(|m, c| {
        let lam = m.symbol();
        if lam == 0 {
            Complex::zero()
        } else {
            c / T::from_int(lam)
        }
    }))
}

fn check_kernel_free<T: Real>(f: &FourierField<T>) -> Result<()> {
    let tol = T::lit(CHARACTERISTIC_TOLERANCE) * f.max_abs();
    match f.modes().find(|(m, c)| m.is_kernel() && c.norm() > tol) {
        Some((m, c)) => Err(Error::CharacteristicData {
            j: m.j,
            k: m.k,
            amplitude: c.norm().as_f64(),
        }),
        None => Ok(()),
    }
}

/// Two sides of a measured inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Wave-weighted `H^1` bound for `w = box_invert(f)`:
/// `sum (4j^2 + k^2) / lambda^2 |f|^2 <= sum |f|^2`.
pub fn h1_bootstrap_check<T: Real>(f: &FourierField<T>) -> Result<Comparison> {
    check_kernel_free(f)?;
    let (mut lhs, mut rhs) = (T::zero(), T::zero());
    for (m, c) in f.modes().filter(|(m, _)| !m.is_kernel()) {
        let lam = T::from_int(m.symbol());
        lhs = lhs + T::from_int(4 * m.j * m.j + m.k * m.k) / (lam * lam) * c.norm_sqr();
        rhs = rhs + c.norm_sqr();
    }
    let slack = T::lit(8.0) * T::epsilon() * rhs;
    Ok(Comparison {
        lhs: lhs.as_f64(),
        rhs: rhs.as_f64(),
        pass: lhs <= rhs + slack,
    })
}

/// Outcome of the Hölder-inversion stability check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderInversion {
    /// `holder_estimate(box_invert(f), gamma)`.
    pub lhs: f64,
    /// `ratio * ||f||_{L^p}`.
    pub rhs: f64,
    /// Measured envelope constant `lhs / ||f||_{L^p}`.
    pub ratio: f64,
    /// Same ratio for `f` truncated to half the radius.
    pub ratio_half: f64,
    pub pass: bool,
}

/// Relative drift of the envelope constant under a doubling of the radius
/// accepted by [`holder_inversion_check`].
pub const HOLDER_STABILITY: f64 = 0.05;

/// Dyadic Hölder estimate of `box_invert(f)` against `||f||_{L^p}`, with
/// `1 < p <= 2` and `gamma < 1 - 1/p`.
///
/// The envelope constant is measured, not assumed; the check passes when it
/// moves by less than 5% between `f` truncated to half its radius and `f`.
pub fn holder_inversion_check<T: Real>(f: &FourierField<T>, p: T, gamma: T) -> Result<HolderInversion> {
    if !(p > T::one() && p <= T::lit(2.0)) {
        return Err(Error::domain("Hölder inversion", format!("p = {p} outside (1, 2]")));
    }
    if !(gamma > T::zero() && gamma < T::one() - p.recip()) {
        return Err(Error::domain(
            "Hölder inversion",
            format!("gamma = {gamma} not in (0, 1 - 1/p) = (0, {})", T::one() - p.recip()),
        ));
    }
    let ratio = |g: &FourierField<T>| -> Result<T> {
        let norm = lp_norm_field(g, p)?;
        if norm == T::zero() {
            return Ok(T::zero());
        }
        Ok(holder_estimate(&box_invert(g)?, gamma) / norm)
    };
    let full = ratio(f)?;
    let half = ratio(&f.resized(f.radius() / 2).resized(f.radius()))?;
    let lhs = holder_estimate(&box_invert(f)?, gamma);
    Ok(HolderInversion {
        lhs: lhs.as_f64(),
        rhs: (full * lp_norm_field(f, p)?).as_f64(),
        ratio: full.as_f64(),
        ratio_half: half.as_f64(),
        pass: (full - half).abs() <= T::lit(HOLDER_STABILITY) * full,
    })
}

/// Per-quadrant comparison of the bare `H^{gamma'}` seminorm with the
/// translation-difference bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderToSobolev {
    /// In the order of [`Quadrant::ALL`].
    pub quadrants: Vec<(Quadrant, Comparison)>,
    /// `sum_q lhs_q`.
    pub total_lhs: f64,
    /// `||u||^2` in the bare `H^{gamma'}` weight, computed without splitting.
    pub total_direct: f64,
    pub pass: bool,
}

/// Shift length `h(m) = (2 pi / 3) 2^{-m}` paired with dyadic level `m`.
pub fn level_shift<T: Real>(level: u32) -> T {
    T::lit(2.0) * T::PI() / T::lit(3.0) * T::lit(2.0).powi(-(level as i32))
}

/// For each sign quadrant `q`: `||u^q||^2_{H^{gamma'}}` (bare weight) against
/// `sum_m 2^{(m+1) gamma'} sup |u^q(. + sigma h(m)) - u^q|^2`.
pub fn holder_to_sobolev_check<T: Real>(u: &FourierField<T>, gamma: T, gamma_prime: T) -> Result<HolderToSobolev> {
    if !(T::zero() < gamma_prime && gamma_prime < gamma && gamma < T::one()) {
        return Err(Error::domain(
            "Hölder-to-Sobolev",
            format!("need 0 < gamma' < gamma < 1, got gamma = {gamma}, gamma' = {gamma_prime}"),
        ));
    }
    let (nx, nt) = refined_grid(u.radius(), 4);
    let tr = Transform::new(nx, nt)?;
    let top = crate::lattice::dyadic_level_of(u.radius() as u64);
    let two = T::lit(2.0);
    let mut quadrants = Vec::with_capacity(4);
    let mut total_lhs = T::zero();
    let mut pass = true;
    for q in Quadrant::ALL {
        let uq = u.quadrant(q);
        let lhs = hs_norm_bare(&uq, gamma_prime).powi(2);
        let mut rhs = T::zero();
        if !uq.is_zero() {
            let (sx, st) = q.shift_signs();
            for level in 0..=top {
                let h = level_shift::<T>(level);
                let shifted = uq.translate(T::from_int(sx as i64) * h, T::from_int(st as i64) * h);
                let sup = tr.sup_abs(&(&shifted - &uq))?;
                rhs = rhs + two.powf(T::from_u32(level + 1).unwrap() * gamma_prime) * sup * sup;
            }
        }
        let ok = lhs <= rhs + T::lit(1e-12) * (T::one() + rhs);
        pass &= ok;
        total_lhs = total_lhs + lhs;
        quadrants.push((
            q,
            Comparison {
                lhs: lhs.as_f64(),
                rhs: rhs.as_f64(),
                pass: ok,
            },
        ));
    }
    let total_direct = hs_norm_bare(u, gamma_prime).powi(2);
    pass &= (total_lhs - total_direct).abs() <= T::lit(1e-12) * (T::one() + total_direct);
    Ok(HolderToSobolev {
        quadrants,
        total_lhs: total_lhs.as_f64(),
        total_direct: total_direct.as_f64(),
        pass,
    })
}
