//! Distances modulo the time-translation group.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::lattice::FourierField;
use crate::scalar::Real;

/// Optimal time shift `theta` in `[0, 2 pi)` and the `L^2` distance it attains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub theta: f64,
    pub distance: f64,
}

/// `sum_j u1(j,k) conj(u2(j,k))`, indexed by `k + radius`.
fn cross_spectrum<T: Real>(u1: &FourierField<T>, u2: &FourierField<T>) -> Vec<Complex<T>> {
    let r = u1.radius().max(u2.radius());
    let mut c = vec![Complex::new(T::zero(), T::zero()); 2 * r + 1];
    for (m, a) in u1.modes() {
        let b = u2.at(m);
        c[(m.k + r as i64) as usize] = c[(m.k + r as i64) as usize] + a * b.conj();
    }
    c
}

/// `g(theta) = Re sum_k C_k e^{i k theta}` with its first two derivatives.
fn overlap<T: Real>(c: &[Complex<T>], theta: T) -> (T, T, T) {
    let r = (c.len() / 2) as i64;
    let (mut g, mut g1, mut g2) = (T::zero(), T::zero(), T::zero());
    for (i, ck) in c.iter().enumerate() {
        let k = i as i64 - r;
        if ck.re == T::zero() && ck.im == T::zero() {
            continue;
        }
        let kt = T::from_int(k);
        let e = *ck * Complex::from_polar(T::one(), kt * theta);
        g = g + e.re;
        g1 = g1 - kt * e.im;
        g2 = g2 - kt * kt * e.re;
    }
    (g, g1, g2)
}

/// Minimizes `||translate(u1, 0, theta) - u2||_{L^2}` over `theta`.
///
/// A uniform scan of the overlap is refined by a parabola through the best
/// sample and its neighbours, then polished by Newton steps on the overlap.
pub fn align_time_shift<T: Real>(u1: &FourierField<T>, u2: &FourierField<T>) -> Alignment {
    let c = cross_spectrum(u1, u2);
    let two_pi = T::lit(2.0) * T::PI();
    let samples = (16 * c.len()).max(256);
    let step = two_pi / T::from_usize(samples).unwrap();
    let g_at = |i: usize| overlap(&c, step * T::from_usize(i).unwrap()).0;
    let values: Vec<T> = (0..samples).map(g_at).collect();
    let best = (0..samples).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let (gm, g0, gp) = (
        values[(best + samples - 1) % samples],
        values[best],
        values[(best + 1) % samples],
    );
    let curvature = gm - T::lit(2.0) * g0 + gp;
    let mut theta = step * T::from_usize(best).unwrap();
    if curvature < T::zero() {
        theta = theta + step * (gm - gp) / (T::lit(2.0) * curvature);
    }
    for _ in 0..8 {
        let (g, g1, g2) = overlap(&c, theta);
        if g2 >= T::zero() {
            break;
        }
        let next = theta - g1 / g2;
        if (next - theta).abs() > step || overlap(&c, next).0 < g {
            break;
        }
        let done = (next - theta).abs() <= T::epsilon() * T::lit(16.0);
        theta = next;
        if done {
            break;
        }
    }
    theta = theta - two_pi * (theta / two_pi).floor();
    let distance = distance_at(u1, u2, theta);
    let zero_shift = distance_at(u1, u2, T::zero());
    let (theta, distance) = if zero_shift < distance { (T::zero(), zero_shift) } else { (theta, distance) };
    Alignment {
        theta: theta.as_f64(),
        distance: distance.as_f64(),
    }
}

fn distance_at<T: Real>(u1: &FourierField<T>, u2: &FourierField<T>, theta: T) -> T {
    let r = u1.radius().max(u2.radius());
    let a = u1.resized(r).translate(T::zero(), theta);
    (&a - &u2.resized(r)).l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(seed: u64) -> FourierField<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut u = FourierField::zeros(10);
        let modes: Vec<_> = u.modes().map(|(m, _)| m).filter(|m| m.is_canonical()).collect();
        for m in modes {
            let d = 1.0 / (1.0 + m.radius() as f64);
            u.set_pair(m.j, m.k, Complex::new(next() * d, next() * d)).unwrap();
        }
        u
    }

    #[test]
    fn recovers_exact_shift() {
        for seed in 0..20 {
            let u1 = field(seed);
            let u2 = u1.translate(0.0, 1.3);
            let a = align_time_shift(&u1, &u2);
            assert!((a.theta - 1.3).abs() < 1e-6, "{a:?}");
            assert!(a.distance < 1e-10);
        }
    }

    #[test]
    fn time_independent_fields() {
        let mut u1 = FourierField::<f64>::zeros(8);
        u1.set_pair(1, 0, Complex::new(0.5, 0.0)).unwrap();
        let mut u2 = FourierField::<f64>::zeros(8);
        u2.set_pair(2, 0, Complex::new(0.0, 0.3)).unwrap();
        let a = align_time_shift(&u1, &u2);
        for theta in [0.0, 0.7, 2.0, 5.5] {
            assert!((distance_at(&u1, &u2, theta) - a.distance).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn never_worse_than_identity(a in 0u64..5000, b in 0u64..5000) {
            let (u1, u2) = (field(a), field(b));
            let al = align_time_shift(&u1, &u2);
            prop_assert!(al.distance <= (&u1 - &u2).l2_norm() + 1e-14);
        }
    }
}
