//! Damped, optionally deflated, Newton-Krylov iteration for the penalized system.

use serde::{Deserialize, Serialize};

use super::align::align_time_shift;
use super::krylov::{gmres, GmresOptions};
use crate::error::Error;
use crate::lattice::{FourierField, GridField};
use crate::model::{Galerkin, PenalizedResidual};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Tolerance on the coefficient `l^2` norm of the residual.
    pub tol: f64,
    pub armijo: f64,
    pub min_damping: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-10,
            armijo: 1e-4,
            min_damping: 1.0 / 1024.0,
            gmres_restart: 80,
            gmres_max_iter: 800,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError<T: Real> {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("Newton stopped after {iterations} iterations with residual {residual_norm:e}")]
    NonConvergence {
        best: Box<FourierField<T>>,
        residual_norm: f64,
        iterations: usize,
    },
}

/// A converged Newton solve.
#[derive(Clone, Debug)]
pub struct NewtonReport<T: Real> {
    pub u: FourierField<T>,
    pub residual: PenalizedResidual<T>,
    pub iterations: usize,
}

/// Known solutions that repel the iteration through the factor
/// `prod_i (d_i^{-p} + shift)`, with `d_i` the time-aligned distance.
#[derive(Clone, Debug, Default)]
pub struct Deflation<T: Real> {
    known: Vec<FourierField<T>>,
    power: i32,
    shift: f64,
}

impl<T: Real> Deflation<T> {
    pub fn new(known: Vec<FourierField<T>>) -> Self {
        Self {
            known,
            power: 2,
            shift: 1.0,
        }
    }

    pub fn none() -> Self {
        Self::new(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn push(&mut self, u: FourierField<T>) {
        self.known.push(u);
    }

    fn aligned(&self, u: &FourierField<T>) -> Vec<(T, FourierField<T>, T)> {
        self.known
            .iter()
            .map(|k| {
                let a = align_time_shift(u, k);
                let theta = T::lit(a.theta);
                let diff = &u.translate(T::zero(), theta) - k;
                let d = diff.coeff_l2().max(T::min_positive_value());
                (theta, diff, d)
            })
            .collect()
    }

    fn factor_with(&self, aligned: &[(T, FourierField<T>, T)]) -> T {
        aligned
            .iter()
            .map(|(_, _, d)| d.powi(-self.power) + T::lit(self.shift))
            .fold(T::one(), |acc, v| acc * v)
    }

    pub fn factor(&self, u: &FourierField<T>) -> T {
        self.factor_with(&self.aligned(u))
    }

    /// Derivative of `log factor` at `u` along `delta`.
    fn log_derivative(&self, aligned: &[(T, FourierField<T>, T)], delta: &FourierField<T>) -> T {
        let p = T::from_int(self.power as i64);
        aligned
            .iter()
            .map(|(theta, diff, d)| {
                let dd = diff.inner(&delta.translate(T::zero(), *theta)) / *d;
                let dp = d.powi(-self.power);
                -p * dp / *d * dd / (dp + T::lit(self.shift))
            })
            .sum()
    }
}

/// Equilibrated residual: kernel rows divided by `beta`.
fn scaled<T: Real>(r: &PenalizedResidual<T>) -> FourierField<T> {
    r.range_part.axpy(r.beta.recip(), &r.kernel_part)
}

struct Linearization<'a, T: Real> {
    sys: &'a Galerkin<T>,
    fu: GridField<T>,
    fu_mean: T,
    beta: T,
}

impl<T: Real> Linearization<'_, T> {
    fn apply(&self, phi: &FourierField<T>) -> FourierField<T> {
        let coupled = self.sys.multiply(&self.fu, phi).expect("radius matches");
        let inv_beta = self.beta.recip();
        phi.map_modes(|m, c| {
            let g = coupled.at(m);
            if m.is_kernel() {
                c * T::from_int(1 + m.k * m.k) + g * inv_beta
            } else {
                c * T::from_int(-m.symbol()) - g
            }
        })
    }

    fn diagonal(&self, m: crate::lattice::ModeIndex) -> T {
        let d = if m.is_kernel() {
            T::from_int(1 + m.k * m.k) + self.fu_mean / self.beta
        } else {
            T::from_int(-m.symbol()) - self.fu_mean
        };
        let floor = T::lit(0.5);
        if d.abs() < floor {
            if d < T::zero() {
                -floor
            } else {
                floor
            }
        } else {
            d
        }
    }

    fn precondition(&self, r: &FourierField<T>) -> FourierField<T> {
        r.map_modes(|m, c| c / self.diagonal(m))
    }
}

/// Damped Newton on the penalized residual at fixed `beta`, from `u0`.
pub fn newton<T: Real>(
    sys: &Galerkin<T>,
    u0: &FourierField<T>,
    beta: T,
    opts: &NewtonOptions,
    deflation: &Deflation<T>,
) -> Result<NewtonReport<T>, SolveError<T>> {
    if !(beta > T::zero()) {
        return Err(Error::domain("beta", format!("penalty must be positive, got {beta}")).into());
    }
    let tol = T::lit(opts.tol);
    let mut u = u0.symmetrized();
    let mut best: Option<(T, FourierField<T>)> = None;
    let mut last_step = T::infinity();
    for it in 0..=opts.max_iter {
        let col = sys.collocate(&u)?;
        let f_hat = sys.analyze(&col.f)?;
        let res = sys.residual_from(&u, &f_hat, beta);
        let g = scaled(&res);
        let gnorm = g.coeff_l2();
        let raw = res.l2_norm();
        if best.as_ref().is_none_or(|(b, _)| raw < *b) {
            best = Some((raw, u.clone()));
        }
        let stalled = last_step <= T::lit(1e-13) * (T::one() + u.coeff_l2());
        if gnorm <= tol || (raw <= tol && stalled) {
            return Ok(NewtonReport {
                u,
                residual: res,
                iterations: it,
            });
        }
        if it == opts.max_iter || !gnorm.is_finite() {
            break;
        }

        let fu = sys.f_prime_grid(&col.u);
        let lin = Linearization {
            sys,
            fu_mean: fu.mean(),
            fu,
            beta,
        };
        let eta = gnorm.min(T::lit(1e-4)).max(T::lit(1e-12));
        let solve = gmres(
            |p| lin.apply(p),
            |r| lin.precondition(r),
            &g.scaled(-T::one()),
            GmresOptions {
                restart: opts.gmres_restart,
                max_iter: opts.gmres_max_iter,
                rel_tol: eta.as_f64(),
            },
        );
        let mut delta = solve.x.symmetrized();

        let aligned = deflation.aligned(&u);
        let merit_scale = deflation.factor_with(&aligned);
        if !deflation.is_empty() {
            let q = deflation.log_derivative(&aligned, &delta);
            let den = T::one() - q;
            if den.abs() > T::lit(1e-8) {
                delta = delta.scaled(den.recip());
            }
        }
        let merit0 = merit_scale * gnorm;

        let mut lambda = T::one();
        let min_damping = T::lit(opts.min_damping);
        let mut candidate = u.axpy(lambda, &delta);
        loop {
            let trial = sys.residual(&candidate, beta).map(|r| scaled(&r).coeff_l2());
            let merit = match trial {
                Ok(n) if n.is_finite() => n * deflation.factor(&candidate),
                _ => T::infinity(),
            };
            if merit <= (T::one() - T::lit(opts.armijo) * lambda) * merit0 || lambda <= min_damping {
                break;
            }
            lambda = lambda / T::lit(2.0);
            candidate = u.axpy(lambda, &delta);
        }
        last_step = (lambda * delta.coeff_l2()).abs();
        u = candidate;
    }
    let (residual_norm, best) = best.expect("at least one iterate");
    Err(SolveError::NonConvergence {
        best: Box::new(best),
        residual_norm: residual_norm.as_f64(),
        iterations: opts.max_iter,
    })
}
