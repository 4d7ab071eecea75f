//! The nonlinearity family `f(x, u) = a(x)|u|^{s-1}u + alpha u + b(x)`, the
//! penalized action `I_beta`, and its Euler-Lagrange residual on the
//! truncated space.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{grid_for_radius, Decomposition, FourierField, GridField, ModeIndex, Transform};
use crate::scalar::Real;

/// Raw parameters of the nonlinearity, as they appear in a run config.
///
/// `a(x) = a_coeffs[0] + sum_{n >= 1} a_coeffs[n] cos(2 n x)`, likewise `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NonlinearityParams<T: Real> {
    pub s: T,
    pub alpha: T,
    pub a_coeffs: Vec<T>,
    #[serde(default)]
    pub b_coeffs: Vec<T>,
}

/// Two-sided power envelope
/// `c0_lower |u|^s + c1 <= sign(u) f(x, u) <= c0_upper |u|^s + c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c0_lower: f64,
    pub c0_upper: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Validated nonlinearity with its derived constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity<T: Real> {
    params: NonlinearityParams<T>,
    int_power: Option<i32>,
    a_min: T,
    a_max: T,
    b_sup: T,
}

fn cosine_series<T: Real>(coeffs: &[T], x: T) -> T {
    let two = T::lit(2.0);
    coeffs
        .iter()
        .enumerate()
        .map(|(n, &c)| if n == 0 { c } else { c * (two * T::from_usize(n).unwrap() * x).cos() })
        .sum()
}

fn series_range<T: Real>(coeffs: &[T]) -> (T, T) {
    if coeffs.len() <= 1 {
        let c = coeffs.first().copied().unwrap_or_else(T::zero);
        return (c, c);
    }
    let samples = 4096 * coeffs.len();
    (0..samples)
        .map(|i| cosine_series(coeffs, T::PI() * T::from_usize(i).unwrap() / T::from_usize(samples).unwrap()))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl<T: Real> Nonlinearity<T> {
    pub fn new(params: NonlinearityParams<T>) -> Result<Self> {
        let NonlinearityParams { s, alpha, a_coeffs, b_coeffs } = &params;
        let (s, alpha) = (*s, *alpha);
        if !(s.is_finite() && s > T::one()) {
            return Err(Error::domain("s", format!("growth exponent must exceed 1, got {s}")));
        }
        if !(alpha.is_finite() && alpha >= T::zero()) {
            return Err(Error::domain("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        if a_coeffs.iter().chain(b_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::domain("a_coeffs/b_coeffs", "coefficients must be finite"));
        }
        let (a_min, a_max) = series_range(a_coeffs);
        let linear = a_coeffs.iter().all(|c| c.is_zero());
        if linear {
            if alpha == T::zero() {
                return Err(Error::domain("alpha", "a linear nonlinearity (a = 0) needs alpha > 0"));
            }
        } else if !(a_min > T::zero() && a_min * (s + T::one()) > a_max) {
            return Err(Error::domain(
                "a_coeffs",
                format!("need min a > max a / (s + 1) > 0, got min a = {a_min}, max a = {a_max}, s = {s}"),
            ));
        }
        let (b_lo, b_hi) = series_range(b_coeffs);
        let rounded = s.round();
        let int_power = if (s - rounded).abs() <= T::epsilon() * s && rounded <= T::lit(64.0) {
            rounded.to_i32()
        } else {
            None
        };
        Ok(Self {
            int_power,
            a_min: if linear { T::zero() } else { a_min },
            a_max: if linear { T::zero() } else { a_max },
            b_sup: b_lo.abs().max(b_hi.abs()),
            params,
        })
    }

    /// `u^s + alpha u` with constant `a` and no forcing.
    pub fn power(s: T, a: T, alpha: T) -> Result<Self> {
        Self::new(NonlinearityParams {
            s,
            alpha,
            a_coeffs: vec![a],
            b_coeffs: vec![],
        })
    }

    /// Purely linear `alpha u + b(x)`.
    pub fn linear(alpha: T, b_coeffs: Vec<T>) -> Result<Self> {
        Self::new(NonlinearityParams {
            s: T::lit(3.0),
            alpha,
            a_coeffs: vec![],
            b_coeffs,
        })
    }

    pub fn params(&self) -> &NonlinearityParams<T> {
        &self.params
    }

    pub fn s(&self) -> T {
        self.params.s
    }

    pub fn alpha(&self) -> T {
        self.params.alpha
    }

    pub fn is_linear(&self) -> bool {
        self.params.a_coeffs.iter().all(|c| c.is_zero())
    }

    /// `a` and `b` are constant in `x`.
    pub fn is_homogeneous(&self) -> bool {
        self.params.a_coeffs.iter().skip(1).all(|c| c.is_zero())
            && self.params.b_coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn is_forced(&self) -> bool {
        self.params.b_coeffs.iter().any(|c| !c.is_zero())
    }

    /// Odd integer exponent: `f` is a polynomial in `u` and the padded grid
    /// de-aliases exactly.
    pub fn is_polynomial(&self) -> bool {
        matches!(self.int_power, Some(n) if n % 2 == 1) || self.is_linear()
    }

    pub fn a_at(&self, x: T) -> T {
        cosine_series(&self.params.a_coeffs, x)
    }

    pub fn b_at(&self, x: T) -> T {
        cosine_series(&self.params.b_coeffs, x)
    }

    pub fn a_min(&self) -> T {
        self.a_min
    }

    pub fn a_max(&self) -> T {
        self.a_max
    }

    pub fn envelope(&self) -> Envelope {
        Envelope {
            c0_lower: self.a_min.as_f64(),
            c0_upper: (self.a_max + self.alpha()).as_f64(),
            c1: -self.b_sup.as_f64(),
            c2: (self.alpha() + self.b_sup).as_f64(),
        }
    }

    /// Pointwise constants `(a1, a2)` with `u f / 2 - F >= a1 |u|^{s+1} - a2`.
    ///
    /// `a2` is infinite for a forced linear problem, where no such bound exists.
    pub fn energy_constants(&self) -> (T, T) {
        let s = self.s();
        let one = T::one();
        let a1 = self.a_min * (s - one) / (T::lit(4.0) * (s + one));
        let c = self.b_sup / T::lit(2.0);
        if c.is_zero() {
            return (a1, T::zero());
        }
        if a1.is_zero() {
            return (a1, T::infinity());
        }
        // max_r c r - a1 r^{s+1}
        let r = (c / (a1 * (s + one))).powf(s.recip());
        (a1, c * r * s / (s + one))
    }

    /// `|u|^{s-1} u`.
    #[inline]
    fn signed_power(&self, u: T) -> T {
        match self.int_power {
            Some(n) if n % 2 == 1 => u.powi(n),
            Some(n) => u.abs().powi(n - 1) * u,
            None => u.abs().powf(self.s() - T::one()) * u,
        }
    }

    #[inline]
    fn abs_power(&self, u: T, drop: i32) -> T {
        match self.int_power {
            Some(n) => u.abs().powi(n - drop),
            None => u.abs().powf(self.s() - T::from_int(drop as i64)),
        }
    }

    /// `f` given `a(x)`, `b(x)`.
    #[inline]
    pub fn f_with(&self, a: T, b: T, u: T) -> T {
        a * self.signed_power(u) + self.alpha() * u + b
    }

    #[inline]
    pub fn f_prime_with(&self, a: T, u: T) -> T {
        if a.is_zero() {
            return self.alpha();
        }
        self.s() * a * self.abs_power(u, 1) + self.alpha()
    }

    /// Zero at `u = 0`; unbounded there when `s < 2`.
    #[inline]
    pub fn f_second_with(&self, a: T, u: T) -> T {
        if a.is_zero() || u.is_zero() {
            return T::zero();
        }
        let s = self.s();
        s * (s - T::one()) * a * self.abs_power(u, 2) * u.signum()
    }

    #[inline]
    pub fn antiderivative_with(&self, a: T, b: T, u: T) -> T {
        let s1 = self.s() + T::one();
        a * self.abs_power(u, -1) / s1 + self.alpha() * u * u / T::lit(2.0) + b * u
    }

    pub fn f(&self, x: T, u: T) -> T {
        self.f_with(self.a_at(x), self.b_at(x), u)
    }

    pub fn f_prime(&self, x: T, u: T) -> T {
        self.f_prime_with(self.a_at(x), u)
    }

    pub fn antiderivative(&self, x: T, u: T) -> T {
        self.antiderivative_with(self.a_at(x), self.b_at(x), u)
    }

    /// Largest `|j|` carried by `a` and `b`.
    fn coefficient_band(&self) -> (usize, usize) {
        let band = |c: &[T]| c.iter().rposition(|v| !v.is_zero()).unwrap_or(0);
        (band(&self.params.a_coeffs), band(&self.params.b_coeffs))
    }

    /// Collocation grid for the nonlinear terms at truncation radius `m`.
    ///
    /// For polynomial `f` the grid is large enough that `f(u)`, `f_u(u) phi`
    /// and the quadrature of `F(u)` are alias-free on the ball; otherwise it
    /// is the minimal grid refined 4x.
    pub fn padded_grid(&self, m: usize) -> (usize, usize) {
        let (ja, jb) = self.coefficient_band();
        let half = m / 2;
        if self.is_polynomial() {
            let p = if self.is_linear() { 1 } else { self.int_power.unwrap() as usize };
            let jf = (p * half + ja).max(jb).max(half);
            let nx = (jf + half + 1).next_power_of_two();
            let nt = ((p + 1) * m + 1).next_power_of_two();
            let (nx0, nt0) = grid_for_radius(m);
            (nx.max(nx0), nt.max(nt0))
        } else {
            let (nx, nt) = grid_for_radius(m.max(2 * ja).max(2 * jb));
            (4 * nx, 4 * nt)
        }
    }

    fn rows(&self, nx: usize) -> (Vec<T>, Vec<T>) {
        (0..nx)
            .map(|a| {
                let x = crate::lattice::grid_x::<T>(a, nx);
                (self.a_at(x), self.b_at(x))
            })
            .unzip()
    }
}

fn pointwise<T: Real>(nl: &Nonlinearity<T>, u: &GridField<T>, f: impl Fn(T, T, T) -> T) -> GridField<T> {
    let (a, b) = nl.rows(u.nx());
    let nt = u.nt();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| f(a[i / nt], b[i / nt], v))
        .collect();
    GridField::new(u.nx(), nt, values).expect("same shape")
}

/// Pointwise `f(x, u)`.
pub fn f_eval<T: Real>(nl: &Nonlinearity<T>, u: &GridField<T>) -> GridField<T> {
    pointwise(nl, u, |a, b, v| nl.f_with(a, b, v))
}

/// Pointwise `f_u(x, u)`.
pub fn f_prime_eval<T: Real>(nl: &Nonlinearity<T>, u: &GridField<T>) -> GridField<T> {
    pointwise(nl, u, |a, _, v| nl.f_prime_with(a, v))
}

/// Pointwise `f_uu(x, u)`.
pub fn f_second_eval<T: Real>(nl: &Nonlinearity<T>, u: &GridField<T>) -> GridField<T> {
    pointwise(nl, u, |a, _, v| nl.f_second_with(a, v))
}

/// Pointwise `F(x, u) = a |u|^{s+1} / (s+1) + alpha u^2 / 2 + b u`.
pub fn antiderivative_eval<T: Real>(nl: &Nonlinearity<T>, u: &GridField<T>) -> GridField<T> {
    pointwise(nl, u, |a, b, v| nl.antiderivative_with(a, b, v))
}

/// Residual of the penalized Euler-Lagrange system, split by mode class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct PenalizedResidual<T: Real> {
    /// `(k^2 - 4 j^2) w - f` on off-characteristic modes.
    pub range_part: FourierField<T>,
    /// `beta (1 + k^2) v + f` on characteristic modes.
    pub kernel_part: FourierField<T>,
    pub beta: T,
}

impl<T: Real> PenalizedResidual<T> {
    /// Coefficient `l^2` norm of both parts.
    pub fn l2_norm(&self) -> T {
        self.range_part.coeff_l2().hypot(self.kernel_part.coeff_l2())
    }

    pub fn range_norm(&self) -> T {
        self.range_part.coeff_l2()
    }

    pub fn kernel_norm(&self) -> T {
        self.kernel_part.coeff_l2()
    }

    /// `<R, phi>` normalized so that `dI_beta(u)[phi] = -<R, phi>`.
    pub fn pairing(&self, phi: &FourierField<T>) -> T {
        let kernel = phi.filter(ModeIndex::is_kernel);
        let range = phi.filter(|m| !m.is_kernel());
        T::cell_area() * (self.kernel_part.inner(&kernel) - self.range_part.inner(&range))
    }

    /// Both parts in one table.
    pub fn to_field(&self) -> FourierField<T> {
        &self.range_part + &self.kernel_part
    }
}

/// `(lhs, rhs, gap)` of `I - I'(u)u / 2 = int (u f / 2 - F)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// The truncated problem at a fixed radius: the nonlinearity together with
/// planned transforms on its padded grid.
#[derive(Clone, Debug)]
pub struct Galerkin<T: Real> {
    nl: Nonlinearity<T>,
    radius: usize,
    transform: Transform<T>,
    a_row: Vec<T>,
    b_row: Vec<T>,
}

/// Samples of a state on the padded grid with the pointwise nonlinear terms.
#[derive(Clone, Debug)]
pub struct Collocation<T: Real> {
    pub u: GridField<T>,
    pub f: GridField<T>,
}

impl<T: Real> Galerkin<T> {
    pub fn new(nl: &Nonlinearity<T>, radius: usize) -> Self {
        let (nx, nt) = nl.padded_grid(radius);
        let (a_row, b_row) = nl.rows(nx);
        Self {
            nl: nl.clone(),
            radius,
            transform: Transform::new(nx, nt).expect("padded grid is a power of two"),
            a_row,
            b_row,
        }
    }

    pub fn nonlinearity(&self) -> &Nonlinearity<T> {
        &self.nl
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.transform.nx(), self.transform.nt())
    }

    fn check_radius(&self, u: &FourierField<T>) -> Result<()> {
        if u.radius() == self.radius {
            Ok(())
        } else {
            Err(Error::domain(
                "radius",
                format!("field radius {} differs from system radius {}", u.radius(), self.radius),
            ))
        }
    }

    fn map_grid(&self, u: &GridField<T>, f: impl Fn(T, T, T) -> T) -> GridField<T> {
        let nt = u.nt();
        let values = u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.a_row[i / nt], self.b_row[i / nt], v))
            .collect();
        GridField::new(u.nx(), nt, values).expect("same shape")
    }

    pub fn synthesize(&self, u: &FourierField<T>) -> Result<GridField<T>> {
        self.transform.synthesize(u)
    }

    pub fn analyze(&self, g: &GridField<T>) -> Result<FourierField<T>> {
        self.transform.analyze(g, self.radius)
    }

    pub fn collocate(&self, u: &FourierField<T>) -> Result<Collocation<T>> {
        self.check_radius(u)?;
        let ug = self.synthesize(u)?;
        let f = self.map_grid(&ug, |a, b, v| self.nl.f_with(a, b, v));
        Ok(Collocation { u: ug, f })
    }

    /// Coefficients of `f(x, u)` on the ball.
    pub fn f_field(&self, u: &FourierField<T>) -> Result<FourierField<T>> {
        self.analyze(&self.collocate(u)?.f)
    }

    /// Samples of `f_u(x, u)` on the padded grid.
    pub fn f_prime_grid(&self, ug: &GridField<T>) -> GridField<T> {
        self.map_grid(ug, |a, _, v| self.nl.f_prime_with(a, v))
    }

    /// Coefficients of `g phi` on the ball, for a sampled multiplier `g`.
    pub fn multiply(&self, g: &GridField<T>, phi: &FourierField<T>) -> Result<FourierField<T>> {
        let pg = self.synthesize(phi)?;
        self.analyze(&g.zip_map(&pg, |a, b| a * b))
    }

    /// `int_Q F(x, u)` by quadrature on the padded grid.
    pub fn potential(&self, ug: &GridField<T>) -> T {
        self.map_grid(ug, |a, b, v| self.nl.antiderivative_with(a, b, v)).integral()
    }

    /// Quadratic part of the action.
    pub fn quadratic(&self, u: &FourierField<T>, beta: T) -> T {
        let half = T::lit(0.5);
        let sum = u
            .modes()
            .map(|(m, c)| {
                if m.is_kernel() {
                    -beta * T::from_int(1 + m.k * m.k) * c.norm_sqr()
                } else {
                    T::from_int(-m.symbol()) * c.norm_sqr()
                }
            })
            .sum::<T>();
        half * T::cell_area() * sum
    }

    /// `I_beta(u)`.
    pub fn functional(&self, u: &FourierField<T>, beta: T) -> Result<T> {
        let col = self.collocate(u)?;
        Ok(self.quadratic(u, beta) - self.potential(&col.u))
    }

    /// Residual from precomputed `f` coefficients.
    pub fn residual_from(&self, u: &FourierField<T>, f_hat: &FourierField<T>, beta: T) -> PenalizedResidual<T> {
        let linear = u.map_modes(|m, c| {
            if m.is_kernel() {
                c * (beta * T::from_int(1 + m.k * m.k))
            } else {
                c * T::from_int(-m.symbol())
            }
        });
        let signed_f = f_hat.map_modes(|m, c| if m.is_kernel() { c } else { -c });
        let total = &linear + &signed_f;
        PenalizedResidual {
            range_part: total.filter(|m| !m.is_kernel()),
            kernel_part: total.filter(ModeIndex::is_kernel),
            beta,
        }
    }

    pub fn residual(&self, u: &FourierField<T>, beta: T) -> Result<PenalizedResidual<T>> {
        check_beta(beta)?;
        let f_hat = self.f_field(u)?;
        Ok(self.residual_from(u, &f_hat, beta))
    }

    pub fn energy_identity(&self, u: &FourierField<T>, beta: T) -> Result<EnergyIdentity> {
        check_beta(beta)?;
        let col = self.collocate(u)?;
        let f_hat = self.analyze(&col.f)?;
        let value = self.quadratic(u, beta) - self.potential(&col.u);
        let lhs = value + self.residual_from(u, &f_hat, beta).pairing(u) / T::lit(2.0);
        let half = T::lit(0.5);
        let rhs = col
            .u
            .values()
            .iter()
            .zip(col.f.values())
            .enumerate()
            .map(|(i, (&v, &fv))| {
                let a = i / col.u.nt();
                half * v * fv - self.nl.antiderivative_with(self.a_row[a], self.b_row[a], v)
            })
            .sum::<T>()
            / T::from_usize(col.u.values().len()).unwrap()
            * T::cell_area();
        Ok(EnergyIdentity {
            lhs: lhs.as_f64(),
            rhs: rhs.as_f64(),
            gap: (lhs - rhs).abs().as_f64(),
        })
    }

    /// `a1 ||u||^{s+1}_{L^{s+1}} - a2 |Q|`, a lower bound for `I_beta` at
    /// critical points.
    pub fn energy_lower_bound(&self, u: &FourierField<T>) -> Result<T> {
        let (a1, a2) = self.nl.energy_constants();
        let ug = self.synthesize(u)?;
        let s1 = self.nl.s() + T::one();
        let lp = ug.values().iter().map(|v| v.abs().powf(s1)).sum::<T>() / T::from_usize(ug.values().len()).unwrap()
            * T::cell_area();
        Ok(a1 * lp - a2 * T::cell_area())
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta > T::zero() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("beta", format!("penalty must be positive, got {beta}")))
    }
}

/// Pseudospectral `f(x, u)` on the ball of `u`, de-aliased by padding.
pub fn f_field<T: Real>(nl: &Nonlinearity<T>, u: &FourierField<T>) -> FourierField<T> {
    Galerkin::new(nl, u.radius()).f_field(u).expect("radius matches")
}

/// `I_beta` at a decomposed state.
pub fn functional_value<T: Real>(nl: &Nonlinearity<T>, d: &Decomposition<T>, beta: T) -> T {
    let u = d.to_field();
    Galerkin::new(nl, u.radius()).functional(&u, beta).expect("radius matches")
}

pub fn residual<T: Real>(nl: &Nonlinearity<T>, d: &Decomposition<T>, beta: T) -> Result<PenalizedResidual<T>> {
    let u = d.to_field();
    Galerkin::new(nl, u.radius()).residual(&u, beta)
}

pub fn energy_identity<T: Real>(nl: &Nonlinearity<T>, d: &Decomposition<T>, beta: T) -> Result<EnergyIdentity> {
    let u = d.to_field();
    Galerkin::new(nl, u.radius()).energy_identity(&u, beta)
}

/// Single-mode helper `c e^{i(2jx+kt)} + conj`.
pub fn mode_pair<T: Real>(radius: usize, j: i64, k: i64, c: Complex<T>) -> Result<FourierField<T>> {
    let mut u = FourierField::zeros(radius);
    u.set_pair(j, k, c)?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{synthesize, Part};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cubic(alpha: f64) -> Nonlinearity<f64> {
        Nonlinearity::power(3.0, 1.0, alpha).unwrap()
    }

    fn random_field(radius: usize, seed: u64, scale: f64) -> FourierField<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut u = FourierField::zeros(radius);
        let modes: Vec<_> = u.modes().map(|(m, _)| m).collect();
        for m in modes.into_iter().filter(|m| m.is_canonical()) {
            let d = scale / (1.0 + m.radius() as f64).powi(2);
            let c = if m.j == 0 && m.k == 0 { Complex::new(next() * d, 0.0) } else { Complex::new(next() * d, next() * d) };
            u.set_pair(m.j, m.k, c).unwrap();
        }
        u
    }

    #[test]
    fn validation() {
        assert!(Nonlinearity::power(1.0, 1.0, 0.5).is_err());
        assert!(Nonlinearity::power(3.0, 1.0, -0.5).is_err());
        assert!(Nonlinearity::power(3.0, -1.0, 0.5).is_err());
        assert!(Nonlinearity::linear(0.0, vec![]).is_err());
        // min a = 0.2, max a = 1.8: 0.2 * 4 < 1.8
        let wide = NonlinearityParams {
            s: 3.0,
            alpha: 0.0,
            a_coeffs: vec![1.0, 0.8],
            b_coeffs: vec![],
        };
        assert!(Nonlinearity::new(wide).is_err());
        let narrow = NonlinearityParams {
            s: 3.0,
            alpha: 0.0,
            a_coeffs: vec![1.0, 0.5],
            b_coeffs: vec![],
        };
        let nl = Nonlinearity::new(narrow).unwrap();
        assert_relative_eq!(nl.a_min(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(nl.a_max(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn pointwise_examples() {
        let nl = Nonlinearity::power(3.0, 1.0, 0.0).unwrap();
        let g = GridField::<f64>::from_fn(8, 16, |_, _| 2.0).unwrap();
        assert!(f_eval(&nl, &g).values().iter().all(|&v| v == 8.0));
        let z = GridField::<f64>::from_fn(8, 16, |_, _| 0.0).unwrap();
        assert!(f_eval(&cubic(0.5), &z).values().iter().all(|&v| v == 0.0));

        let nl = Nonlinearity::new(NonlinearityParams {
            s: 2.5,
            alpha: 0.3,
            a_coeffs: vec![1.0, 0.2],
            b_coeffs: vec![],
        })
        .unwrap();
        let g = GridField::<f64>::from_fn(8, 16, |x, t| (3.0 * x + t).sin() * 2.0 - 0.3).unwrap();
        let neg = GridField::<f64>::from_fn(8, 16, |x, t| -((3.0 * x + t).sin() * 2.0 - 0.3)).unwrap();
        let (fp, fm) = (f_eval(&nl, &g), f_eval(&nl, &neg));
        for (a, b) in fp.values().iter().zip(fm.values()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let nl = Nonlinearity::new(NonlinearityParams {
            s: 2.5,
            alpha: 0.3,
            a_coeffs: vec![1.0, 0.2],
            b_coeffs: vec![0.1, 0.4],
        })
        .unwrap();
        let h = 1e-5;
        for &(x, u) in &[(0.3, 1.2), (1.1, -0.7), (2.9, 2.5)] {
            let df = (nl.f(x, u + h) - nl.f(x, u - h)) / (2.0 * h);
            assert_relative_eq!(nl.f_prime(x, u), df, max_relative = 1e-8);
            let dff = (nl.f_prime(x, u + h) - nl.f_prime(x, u - h)) / (2.0 * h);
            assert_relative_eq!(nl.f_second_with(nl.a_at(x), u), dff, max_relative = 1e-7);
            let d_potential = (nl.antiderivative(x, u + h) - nl.antiderivative(x, u - h)) / (2.0 * h);
            assert_relative_eq!(nl.f(x, u), d_potential, max_relative = 1e-8);
        }
    }

    #[test]
    fn envelope_holds_on_samples() {
        let nl = Nonlinearity::new(NonlinearityParams {
            s: 3.0,
            alpha: 0.5,
            a_coeffs: vec![1.0, 0.3],
            b_coeffs: vec![0.2, -0.1],
        })
        .unwrap();
        let e = nl.envelope();
        for i in 0..200 {
            let x = PI * i as f64 / 200.0;
            for n in -300..=300 {
                let u = n as f64 / 30.0;
                let sf = u.signum() * nl.f(x, u);
                let p = u.abs().powi(3);
                assert!(e.c0_lower * p + e.c1 <= sf + 1e-12);
                assert!(sf <= e.c0_upper * p + e.c2 + 1e-12);
            }
        }
        let (a1, a2) = nl.energy_constants();
        for i in 0..50 {
            let x = PI * i as f64 / 50.0;
            for n in -300..=300 {
                let u = n as f64 / 30.0;
                let lhs = 0.5 * u * nl.f(x, u) - nl.antiderivative(x, u);
                assert!(lhs >= a1 * u.abs().powi(4) - a2 - 1e-12);
            }
        }
    }

    #[test]
    fn cubic_cosine_identity() {
        let alpha = 0.5;
        let u = mode_pair(8, 1, 0, Complex::new(0.5, 0.0)).unwrap();
        let f = f_field(&cubic(alpha), &u);
        assert_relative_eq!(f.get(1, 0).re, 3.0 / 8.0 + alpha / 2.0, max_relative = 1e-14);
        assert_relative_eq!(f.get(-1, 0).re, 3.0 / 8.0 + alpha / 2.0, max_relative = 1e-14);
        assert_relative_eq!(f.get(3, 0).re, 1.0 / 8.0, max_relative = 1e-14);
        let rest = f.filter(|m| !(m.k == 0 && (m.j.abs() == 1 || m.j.abs() == 3)));
        assert!(rest.max_abs() < 1e-15);
        assert!(f_field(&cubic(alpha), &FourierField::<f64>::zeros(8)).is_zero());
    }

    #[test]
    fn padding_is_alias_free_for_odd_powers() {
        for (nl, seed) in [
            (cubic(0.5), 1u64),
            (Nonlinearity::power(5.0, 0.7, 0.1).unwrap(), 2),
            (
                Nonlinearity::new(NonlinearityParams {
                    s: 3.0,
                    alpha: 0.2,
                    a_coeffs: vec![1.0, 0.2, 0.1],
                    b_coeffs: vec![0.0, 0.3, 0.0, 0.1],
                })
                .unwrap(),
                3,
            ),
        ] {
            let u = random_field(12, seed, 2.0);
            let g = Galerkin::new(&nl, 12);
            let base = g.f_field(&u).unwrap();
            let (nx, nt) = g.grid();
            let ug = synthesize(&u, 2 * nx, 2 * nt).unwrap();
            let fine = crate::lattice::analyze(&f_eval(&nl, &ug), 12).unwrap();
            assert!((&base - &fine).max_abs() < 1e-12 * (1.0 + fine.max_abs()));
        }
    }

    #[test]
    fn functional_examples() {
        let nl = cubic(0.5);
        let d = Decomposition::zeros(8);
        assert_eq!(functional_value(&nl, &d, 1.0), 0.0);

        // pure E+ mode (0,1) amplitude 0.3: quadratic part 1/2 |Q| * 2 * 0.09
        let u = mode_pair(8, 0, 1, Complex::new(0.3, 0.0)).unwrap();
        let q = 2.0 * PI * PI;
        // u = 0.6 cos t: int u^4/4 = |Q| 0.6^4 3/32, int alpha u^2 / 2 = |Q| alpha 0.36 / 4
        let potential = q * (0.6f64.powi(4) * 3.0 / 32.0 + 0.5 * 0.36 / 4.0);
        let value = functional_value(&nl, &Decomposition::from_field(&u), 1.0);
        assert_relative_eq!(value, 0.5 * q * 2.0 * 0.09 - potential, max_relative = 1e-13);

        let v = mode_pair(8, 1, 2, Complex::new(0.2, 0.1)).unwrap();
        let d = Decomposition::from_field(&(&u + &v));
        let values: Vec<f64> = [0.1, 0.5, 1.0, 2.0].iter().map(|&b| functional_value(&nl, &d, b)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn residual_examples() {
        let nl = cubic(0.5);
        let r = residual(&nl, &Decomposition::zeros(8), 1.0).unwrap();
        assert!(r.range_part.is_zero() && r.kernel_part.is_zero());
        assert!(residual(&nl, &Decomposition::zeros(8), 0.0).is_err());

        // linear alpha u on a single kernel mode: (beta (1 + k^2) + alpha) v, zero only at v = 0
        let lin = Nonlinearity::linear(0.5, vec![]).unwrap();
        let v = mode_pair(8, 1, 2, Complex::new(0.2, 0.0)).unwrap();
        let r = residual(&lin, &Decomposition::from_field(&v), 1.0).unwrap();
        assert_relative_eq!(r.kernel_part.get(1, 2).re, (5.0 + 0.5) * 0.2, max_relative = 1e-14);
        assert!(r.range_part.max_abs() < 1e-16);
    }

    #[test]
    fn cosine_energy_identity() {
        let nl = Nonlinearity::power(3.0, 1.0, 0.0).unwrap();
        let u = mode_pair(8, 1, 0, Complex::new(0.5, 0.0)).unwrap();
        let e = energy_identity(&nl, &Decomposition::from_field(&u), 1.0).unwrap();
        assert_relative_eq!(e.rhs, 3.0 * PI * PI / 16.0, max_relative = 1e-13);
        assert!(e.gap < 1e-13);
        let z = energy_identity(&nl, &Decomposition::zeros(8), 1.0).unwrap();
        assert_eq!((z.lhs, z.rhs, z.gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn energy_identity_random() {
        let nl = Nonlinearity::new(NonlinearityParams {
            s: 3.0,
            alpha: 0.5,
            a_coeffs: vec![1.0, 0.2],
            b_coeffs: vec![0.1, 0.2],
        })
        .unwrap();
        let frac = Nonlinearity::power(2.5, 1.0, 0.5).unwrap();
        for seed in 0..100 {
            let u = random_field(10, seed, 3.0);
            let beta = 0.01 + seed as f64 / 50.0;
            for n in [&nl, &frac] {
                let e = Galerkin::new(n, 10).energy_identity(&u, beta).unwrap();
                assert!(e.gap < 1e-10 * (1.0 + e.lhs.abs()), "seed {seed}: {e:?}");
            }
        }
    }

    #[test]
    fn gradient_matches_residual_pairing() {
        let nl = Nonlinearity::new(NonlinearityParams {
            s: 3.0,
            alpha: 0.5,
            a_coeffs: vec![1.0, 0.2],
            b_coeffs: vec![0.1],
        })
        .unwrap();
        let g = Galerkin::new(&nl, 8);
        let u = random_field(8, 7, 2.0);
        let phi = random_field(8, 8, 1.0);
        let beta = 0.3;
        let exact = -g.residual(&u, beta).unwrap().pairing(&phi);
        let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| {
                let up = g.functional(&u.axpy(h, &phi), beta).unwrap();
                let um = g.functional(&u.axpy(-h, &phi), beta).unwrap();
                ((up - um) / (2.0 * h) - exact).abs()
            })
            .collect();
        let slope = (errors[0] / errors[2]).log2() / 2.0;
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}, errors {errors:?}");
    }

    #[test]
    fn lower_bound_at_zero() {
        let g = Galerkin::new(&cubic(0.5), 8);
        assert_eq!(g.energy_lower_bound(&FourierField::<f64>::zeros(8)).unwrap(), 0.0);
    }

    #[test]
    fn spatial_shift_commutes_for_constant_coefficients() {
        let nl = cubic(0.5);
        let g = Galerkin::new(&nl, 10);
        let u = random_field(10, 11, 2.0);
        let a = g.f_field(&u.translate(0.37, 0.0)).unwrap();
        let b = g.f_field(&u).unwrap().translate(0.37, 0.0);
        assert!((&a - &b).max_abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn residual_is_time_equivariant(seed in 0u64..10_000, theta in 0.0f64..6.3) {
            let nl = Nonlinearity::new(NonlinearityParams {
                s: 3.0,
                alpha: 0.5,
                a_coeffs: vec![1.0, 0.2],
                b_coeffs: vec![0.1, 0.3],
            })
            .unwrap();
            let g = Galerkin::new(&nl, 10);
            let u = random_field(10, seed, 2.0);
            let a = g.residual(&u.translate(0.0, theta), 0.4).unwrap().to_field();
            let b = g.residual(&u, 0.4).unwrap().to_field().translate(0.0, theta);
            prop_assert!((&a - &b).max_abs() < 1e-12);
        }

        #[test]
        fn parts_are_disjoint(seed in 0u64..10_000) {
            let g = Galerkin::new(&cubic(0.5), 8);
            let r = g.residual(&random_field(8, seed, 2.0), 1.0).unwrap();
            prop_assert!(r.range_part.project(Part::Kernel).is_zero());
            prop_assert!(r.kernel_part.filter(|m| !m.is_kernel()).is_zero());
        }
    }
}
