use boxtorus_core::boxop::{box_apply, box_invert};
use boxtorus_core::model::Nonlinearity;
use boxtorus_core::norms::{hs_norm, lp_norm_field};
use boxtorus_core::solver::{newton_solve, ContinuationSchedule};
use boxtorus_core::verify::Ensemble;
use boxtorus_core::{Decomposition, FourierField};
use num_complex::Complex;

#[test]
fn single_precision_tracks_double() {
    let u64f = Ensemble::new(1.25, 3).sample::<f64>(0, 16);
    let u32f: FourierField<f32> = u64f.cast();
    let back = box_apply(&box_invert(&u32f).unwrap());
    assert!((&back - &u32f).l2_norm() / u32f.l2_norm() < 1e-6);
    let rel = |a: f32, b: f64| ((a as f64) - b).abs() / b;
    assert!(rel(hs_norm(&u32f, 1.0), hs_norm(&u64f, 1.0)) < 1e-5);
    assert!(rel(lp_norm_field(&u32f, 4.0).unwrap(), lp_norm_field(&u64f, 4.0).unwrap()) < 1e-5);
}

#[test]
fn single_precision_newton() {
    let sched = ContinuationSchedule {
        m: 8,
        tol_residual: 1e-4,
        ..ContinuationSchedule::default()
    };
    let mut seed = FourierField::<f64>::zeros(8);
    seed.set_pair(0, 1, Complex::new(0.4, 0.0)).unwrap();
    let nl64 = Nonlinearity::power(3.0, 1.0, 0.5).unwrap();
    let nl32 = Nonlinearity::power(3.0f32, 1.0, 0.5).unwrap();
    let d64 = newton_solve(&nl64, &Decomposition::from_field(&seed), 1.0, &sched).unwrap();
    let d32 = newton_solve(&nl32, &Decomposition::from_field(&seed.cast()), 1.0, &sched).unwrap();
    let diff = (&d32.to_field().cast::<f64>() - &d64.to_field()).coeff_l2();
    assert!(diff < 1e-4 * d64.to_field().coeff_l2(), "difference {diff:e}");
}
