//! Two-dimensional FFTs on the collocation grid.
//!
//! Layout is row-major with the x index outermost: `buf[a * nt + b]`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Planned forward/inverse transforms for one `nx x nt` grid.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    nx: usize,
    nt: usize,
    fwd_x: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    fwd_t: Arc<dyn Fft<T>>,
    inv_t: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.nx, self.nt)
    }
}

impl<T: Real> Fft2<T> {
    pub fn new(nx: usize, nt: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            nt,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_t: planner.plan_fft_forward(nt),
            inv_t: planner.plan_fft_inverse(nt),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.apply(buf, &self.fwd_x, &self.fwd_t);
    }

    /// Unnormalized inverse transform, in place.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.apply(buf, &self.inv_x, &self.inv_t);
    }

    fn apply(&self, buf: &mut [Complex<T>], along_x: &Arc<dyn Fft<T>>, along_t: &Arc<dyn Fft<T>>) {
        let (nx, nt) = (self.nx, self.nt);
        assert_eq!(buf.len(), nx * nt);
        // rows are contiguous in t
        along_t.process(buf);
        let mut transposed = vec![Complex::new(T::zero(), T::zero()); nx * nt];
        for a in 0..nx {
            for b in 0..nt {
                transposed[b * nx + a] = buf[a * nt + b];
            }
        }
        along_x.process(&mut transposed);
        for b in 0..nt {
            for a in 0..nx {
                buf[a * nt + b] = transposed[b * nx + a];
            }
        }
    }
}
