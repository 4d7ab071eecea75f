//! Restarted GMRES with right preconditioning on coefficient tables.

use crate::lattice::FourierField;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    /// Stop once `||b - A x|| <= rel_tol ||b||`.
    pub rel_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            max_iter: 600,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome<T: Real> {
    pub x: FourierField<T>,
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

/// Solves `A x = b` from `x = 0`, iterating on `A M^{-1} y = b`, `x = M^{-1} y`.
pub fn gmres<T: Real>(
    apply: impl Fn(&FourierField<T>) -> FourierField<T>,
    precondition: impl Fn(&FourierField<T>) -> FourierField<T>,
    b: &FourierField<T>,
    opts: GmresOptions,
) -> GmresOutcome<T> {
    let bnorm = b.coeff_l2();
    let mut x = FourierField::zeros(b.radius());
    if bnorm == T::zero() {
        return GmresOutcome {
            x,
            iterations: 0,
            residual: T::zero(),
            converged: true,
        };
    }
    let target = T::lit(opts.rel_tol) * bnorm;
    let mut r = b.clone();
    let mut rnorm = bnorm;
    let mut iterations = 0;
    let restart = opts.restart.max(1);

    while iterations < opts.max_iter {
        let mut basis: Vec<FourierField<T>> = vec![r.scaled(rnorm.recip())];
        let mut hess: Vec<Vec<T>> = Vec::with_capacity(restart);
        let mut cs: Vec<(T, T)> = Vec::with_capacity(restart);
        let mut g = vec![rnorm];
        let mut inner_done = 0;

        for i in 0..restart {
            if iterations >= opts.max_iter {
                break;
            }
            iterations += 1;
            let mut w = apply(&precondition(&basis[i]));
            let mut h = vec![T::zero(); i + 2];
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (k, v) in basis.iter().enumerate() {
                    let c = w.inner(v);
                    h[k] = h[k] + c;
                    w = w.axpy(-c, v);
                }
            }
            h[i + 1] = w.coeff_l2();
            for (k, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (h[k], h[k + 1]);
                h[k] = c * a + s * bb;
                h[k + 1] = -s * a + c * bb;
            }
            let (a, bb) = (h[i], h[i + 1]);
            let den = a.hypot(bb);
            let (c, s) = if den == T::zero() { (T::one(), T::zero()) } else { (a / den, bb / den) };
            h[i] = den;
            h[i + 1] = T::zero();
            cs.push((c, s));
            g.push(-s * g[i]);
            g[i] = c * g[i];
            let breakdown = w.coeff_l2() <= T::epsilon() * bnorm;
            hess.push(h);
            inner_done = i + 1;
            if g[i + 1].abs() <= target || breakdown {
                break;
            }
            let norm = w.coeff_l2();
            basis.push(w.scaled(norm.recip()));
        }

        // back substitution on the triangular factor
        let n = inner_done;
        let mut y = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = g[i];
            for k in i + 1..n {
                acc = acc - hess[k][i] * y[k];
            }
            y[i] = if hess[i][i] == T::zero() { T::zero() } else { acc / hess[i][i] };
        }
        let mut z = FourierField::zeros(b.radius());
        for (k, &yk) in y.iter().enumerate() {
            z = z.axpy(yk, &basis[k]);
        }
        x = x.axpy(T::one(), &precondition(&z));
        r = b.axpy(-T::one(), &apply(&x));
        rnorm = r.coeff_l2();
        if rnorm <= target || n == 0 {
            break;
        }
    }
    GmresOutcome {
        converged: rnorm <= target,
        x,
        iterations,
        residual: rnorm,
    }
}
