//! Critical points of the penalized action: Newton-Krylov solves,
//! continuation in the penalty, and a multi-start search for distinct branches.

mod align;
mod continuation;
mod krylov;
mod multistart;
mod newton;

pub use align::{align_time_shift, Alignment};
pub use continuation::{
    continue_beta, ContinuationSchedule, PathPoint, SeedDescriptor, SolutionRecord, SENTINEL_FLOOR,
};
pub use krylov::{gmres, GmresOptions, GmresOutcome};
pub use multistart::{
    level_amplitude, level_pool, level_seeds, multi_start, theta, MultiStartOptions, DEDUP_THRESHOLD,
};
pub use newton::{newton, Deflation, NewtonOptions, NewtonReport, SolveError};

pub(crate) use continuation::time_derivative;

use crate::lattice::Decomposition;
use crate::model::{Galerkin, Nonlinearity};
use crate::scalar::Real;

/// Newton solve at fixed `beta` on a decomposed state, with the schedule's
/// truncation and tolerances.
pub fn newton_solve<T: Real>(
    nl: &Nonlinearity<T>,
    d0: &Decomposition<T>,
    beta: T,
    sched: &ContinuationSchedule,
) -> Result<Decomposition<T>, SolveError<T>> {
    sched.validate()?;
    let sys = Galerkin::new(nl, sched.m);
    let u0 = d0.to_field().resized(sched.m);
    let rep = newton(&sys, &u0, beta, &sched.newton_options(), &Deflation::none())?;
    Ok(Decomposition::from_field(&rep.u))
}
