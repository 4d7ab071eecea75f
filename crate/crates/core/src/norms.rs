//! Norms and seminorms on truncated fields, including the dyadic
//! (Littlewood-Paley) Hölder estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{refined_grid, Decomposition, FourierField, GridField, ModeIndex, Transform};
use crate::scalar::Real;

/// `||u||_E`: `(|Q|/4) |k^2 - 4j^2|` off the characteristic set, `4 j^2` on it,
/// plus `|c(0,0)|^2`.
pub fn e_norm<T: Real>(u: &FourierField<T>) -> T {
    let quarter_area = T::cell_area() / T::lit(4.0);
    u.modes()
        .map(|(m, c)| {
            let w = if m.is_kernel() {
                T::from_int(4 * m.j * m.j) + if m.j == 0 && m.k == 0 { T::one() } else { T::zero() }
            } else {
                quarter_area * T::from_int(m.symbol().abs())
            };
            w * c.norm_sqr()
        })
        .sum::<T>()
        .sqrt()
}

/// `||u||_{E^s} = (sum |c|^2 |k^2 - 4j^2|^s)^{1/2}` for kernel-free `u`, `0 < s <= 1`.
pub fn es_norm<T: Real>(u: &FourierField<T>, s: T) -> Result<T> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::domain("E^s exponent", format!("s = {s} outside (0, 1]")));
    }
    if let Some((m, c)) = u.modes().find(|(m, c)| m.is_kernel() && c.norm() > T::zero()) {
        return Err(Error::CharacteristicData {
            j: m.j,
            k: m.k,
            amplitude: c.norm().as_f64(),
        });
    }
    Ok(u.modes()
        .filter(|(m, _)| !m.is_kernel())
        .map(|(m, c)| T::from_int(m.symbol().abs()).powf(s) * c.norm_sqr())
        .sum::<T>()
        .sqrt())
}

/// `H^s` norm with weight `(1 + 2|j| + |k|)^{2s}`.
pub fn hs_norm<T: Real>(u: &FourierField<T>, s: T) -> T {
    weighted_l2(u, |m| (T::one() + T::from_u64(m.radius()).unwrap()).powf(T::lit(2.0) * s))
}

/// `H^s` seminorm with the bare weight `(2|j| + |k|)^{2s}`; `(0,0)` carries weight zero.
pub fn hs_norm_bare<T: Real>(u: &FourierField<T>, s: T) -> T {
    weighted_l2(u, |m| {
        if m.radius() == 0 {
            T::zero()
        } else {
            T::from_u64(m.radius()).unwrap().powf(T::lit(2.0) * s)
        }
    })
}

/// `H^1` norm with the wave weight `4 j^2 + k^2`.
pub fn h1_wave_norm<T: Real>(u: &FourierField<T>) -> T {
    weighted_l2(u, |m| T::from_int(4 * m.j * m.j + m.k * m.k))
}

fn weighted_l2<T: Real>(u: &FourierField<T>, weight: impl Fn(ModeIndex) -> T) -> T {
    u.modes().map(|(m, c)| weight(m) * c.norm_sqr()).sum::<T>().sqrt()
}

/// Quadrature `L^p(Q)` norm of grid samples; `p = inf` returns the grid maximum.
pub fn lp_norm<T: Real>(g: &GridField<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::domain("L^p exponent", format!("p = {p} < 1")));
    }
    if p.is_infinite() {
        return Ok(g.sup());
    }
    let cell = T::cell_area() / T::from_usize(g.values().len()).unwrap();
    let sum: T = g.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * cell).powf(p.recip()))
}

/// `L^p(Q)` norm of a real field, by quadrature on the grid refined 4x.
pub fn lp_norm_field<T: Real>(u: &FourierField<T>, p: T) -> Result<T> {
    let (nx, nt) = refined_grid(u.radius(), 4);
    lp_norm(&Transform::new(nx, nt)?.synthesize(u)?, p)
}

/// Coefficient `l^q` norm; `q = inf` returns the largest amplitude.
pub fn lq_coeff_norm<T: Real>(u: &FourierField<T>, q: T) -> Result<T> {
    if !(q >= T::one()) {
        return Err(Error::domain("l^q exponent", format!("q = {q} < 1")));
    }
    if q.is_infinite() {
        return Ok(u.max_abs());
    }
    Ok(u.modes()
        .map(|(_, c)| c.norm().powf(q))
        .sum::<T>()
        .powf(q.recip()))
}

/// Splits `u` into dyadic blocks; entry `m` holds the modes of level `m`
/// (level 0 is the ball `2|j| + |k| <= 2`, including the mean).
pub fn dyadic_blocks<T: Real>(u: &FourierField<T>) -> Vec<FourierField<T>> {
    let top = ModeIndex::new(0, u.radius() as i64).dyadic_level() as usize;
    (0..=top)
        .map(|level| u.filter(|m| m.dyadic_level() as usize == level))
        .collect()
}

/// Grid suprema of the dyadic blocks on the grid refined `refine` times.
pub fn block_sups<T: Real>(u: &FourierField<T>, refine: usize) -> Vec<T> {
    let (nx, nt) = refined_grid(u.radius(), refine);
    let tr = Transform::new(nx, nt).expect("refined grid admissible");
    dyadic_blocks(u)
        .iter()
        .map(|b| {
            if b.is_zero() {
                T::zero()
            } else {
                tr.sup_abs(b).expect("refined grid admissible")
            }
        })
        .collect()
}

/// Dyadic Hölder estimator `max_m 2^{gamma m} ||Delta_m u||_{C^0} + ||u||_{C^0}`,
/// with suprema taken on the 4x refined grid.
pub fn holder_estimate<T: Real>(u: &FourierField<T>, gamma: T) -> T {
    holder_estimate_refined(u, gamma, 4)
}

/// [`holder_estimate`] with an explicit grid refinement factor.
pub fn holder_estimate_refined<T: Real>(u: &FourierField<T>, gamma: T, refine: usize) -> T {
    if u.is_zero() {
        return T::zero();
    }
    let (nx, nt) = refined_grid(u.radius(), refine);
    let tr = Transform::new(nx, nt).expect("refined grid admissible");
    let two = T::lit(2.0);
    let blocks = block_sups(u, refine)
        .into_iter()
        .enumerate()
        .map(|(m, s)| two.powf(gamma * T::from_usize(m).unwrap()) * s)
        .fold(T::zero(), T::max);
    blocks + tr.sup_abs(u).expect("refined grid admissible")
}

/// `L^2` norms of `v` and `v_t` squared, by Parseval.
fn kernel_energy<T: Real>(v: &FourierField<T>) -> T {
    T::cell_area()
        * v.modes()
            .map(|(m, c)| (T::one() + T::from_int(m.k * m.k)) * c.norm_sqr())
            .sum::<T>()
}

/// `||u||_{beta,E}^2 = ||w+||_E^2 + ||w-||_E^2 + beta (||v||_{L^2}^2 + ||v_t||_{L^2}^2)`.
pub fn beta_norm<T: Real>(d: &Decomposition<T>, beta: T) -> Result<T> {
    if !(beta > T::zero()) {
        return Err(Error::domain("beta", format!("beta = {beta} must be positive")));
    }
    let ep = e_norm(&d.w_plus);
    let em = e_norm(&d.w_minus);
    Ok((ep * ep + em * em + beta * kernel_energy(&d.kernel_field())).sqrt())
}

/// Parameters for a [`NormReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub hs: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            s: 0.5,
            hs: 1.0,
            p: 4.0,
            q: 2.0,
            gamma: 0.4,
            beta: 1.0,
        }
    }
}

/// Flat summary of every norm of one field. Serialized with fixed key names;
/// parameterized entries carry their parameter under `<name>.<param>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub e_norm: f64,
    /// `E^s` norm of the range (kernel-free) part.
    pub es_norm: f64,
    #[serde(rename = "es_norm.s")]
    pub es_s: f64,
    pub hs_norm: f64,
    #[serde(rename = "hs_norm.s")]
    pub hs_s: f64,
    pub lp: f64,
    #[serde(rename = "lp.p")]
    pub lp_p: f64,
    pub lq: f64,
    #[serde(rename = "lq.q")]
    pub lq_q: f64,
    pub holder: f64,
    #[serde(rename = "holder.gamma")]
    pub holder_gamma: f64,
    pub beta_norm: f64,
    #[serde(rename = "beta_norm.beta")]
    pub beta: f64,
}

impl NormReport {
    pub fn compute<T: Real>(u: &FourierField<T>, params: &NormParams) -> Result<Self> {
        let range = u.filter(|m| !m.is_kernel());
        let d = Decomposition::from_field(u);
        let f = |x: f64| T::lit(x);
        Ok(Self {
            e_norm: e_norm(u).as_f64(),
            es_norm: es_norm(&range, f(params.s))?.as_f64(),
            es_s: params.s,
            hs_norm: hs_norm(u, f(params.hs)).as_f64(),
            hs_s: params.hs,
            lp: lp_norm_field(u, f(params.p))?.as_f64(),
            lp_p: params.p,
            lq: lq_coeff_norm(u, f(params.q))?.as_f64(),
            lq_q: params.q,
            holder: holder_estimate(u, f(params.gamma)).as_f64(),
            holder_gamma: params.gamma,
            beta_norm: beta_norm(&d, f(params.beta))?.as_f64(),
            beta: params.beta,
        })
    }
}
