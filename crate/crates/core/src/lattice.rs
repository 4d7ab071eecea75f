//! Fourier representation of real fields on the periodicity cell
//! `Q = [0, pi] x [0, 2 pi]`.
//!
//! A field is `u(x, t) = sum_{(j, k)} c(j, k) exp(i (2 j x + k t))` with the
//! mean convention `c(j, k) = |Q|^{-1} int_Q u exp(-i (2 j x + k t))`.
//! Truncation keeps the lattice ball `2|j| + |k| <= radius`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::scalar::Real;

/// Lattice point `(j, k)` carrying the basis function `exp(i (2 j x + k t))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub j: i64,
    pub k: i64,
}

/// Light-cone class of a lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeClass {
    /// `k = +-2j`, including `(0, 0)`.
    Kernel,
    /// `|k| > 2|j|`.
    Eplus,
    /// `|k| < 2|j|`.
    Eminus,
}

impl ModeIndex {
    pub const fn new(j: i64, k: i64) -> Self {
        Self { j, k }
    }

    pub fn class(self) -> ModeClass {
        let (aj, ak) = (2 * self.j.abs(), self.k.abs());
        if ak == aj {
            ModeClass::Kernel
        } else if ak > aj {
            ModeClass::Eplus
        } else {
            ModeClass::Eminus
        }
    }

    pub fn is_kernel(self) -> bool {
        self.class() == ModeClass::Kernel
    }

    /// `2|j| + |k|`, the lattice radius of the mode.
    pub fn radius(self) -> u64 {
        (2 * self.j.unsigned_abs()) + self.k.unsigned_abs()
    }

    /// Symbol `4 j^2 - k^2` of the d'Alembertian on this mode.
    pub fn symbol(self) -> i64 {
        4 * self.j * self.j - self.k * self.k
    }

    pub fn conj(self) -> Self {
        Self::new(-self.j, -self.k)
    }

    /// Representative of a conjugate pair: `j > 0`, or `j = 0` and `k > 0`.
    pub fn is_canonical(self) -> bool {
        self.j > 0 || (self.j == 0 && self.k > 0)
    }

    /// Dyadic level: `0` for radius `<= 2`, otherwise the `m` with
    /// `2^m < radius <= 2^{m+1}`.
    pub fn dyadic_level(self) -> u32 {
        dyadic_level_of(self.radius())
    }
}

pub(crate) fn dyadic_level_of(radius: u64) -> u32 {
    if radius <= 2 {
        0
    } else {
        // smallest p with 2^p >= radius, minus one
        (64 - (radius - 1).leading_zeros()) - 1
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// Projection targets; the four parts partition the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    /// Characteristic modes other than `(0, 0)`.
    Kernel,
    Eplus,
    Eminus,
    /// The `(0, 0)` mode.
    Mean,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::Kernel, Part::Eplus, Part::Eminus, Part::Mean];

    pub fn contains(self, mode: ModeIndex) -> bool {
        let is_mean = mode.j == 0 && mode.k == 0;
        match self {
            Part::Mean => is_mean,
            Part::Kernel => !is_mean && mode.is_kernel(),
            Part::Eplus => mode.class() == ModeClass::Eplus,
            Part::Eminus => mode.class() == ModeClass::Eminus,
        }
    }
}

/// Sign quadrants of the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    /// `j >= 0, k >= 0`
    PlusPlus,
    /// `j >= 0, k < 0`
    PlusMinus,
    /// `j < 0, k >= 0`
    MinusPlus,
    /// `j < 0, k < 0`
    MinusMinus,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::PlusPlus,
        Quadrant::PlusMinus,
        Quadrant::MinusPlus,
        Quadrant::MinusMinus,
    ];

    pub fn contains(self, mode: ModeIndex) -> bool {
        let (jp, kp) = (mode.j >= 0, mode.k >= 0);
        match self {
            Quadrant::PlusPlus => jp && kp,
            Quadrant::PlusMinus => jp && !kp,
            Quadrant::MinusPlus => !jp && kp,
            Quadrant::MinusMinus => !jp && !kp,
        }
    }

    /// Signs `(sigma_x, sigma_t)` such that the shift `(sigma_x h, sigma_t h)`
    /// multiplies every mode of the quadrant by `exp(i (2|j| + |k|) h)`.
    pub fn shift_signs(self) -> (i8, i8) {
        match self {
            Quadrant::PlusPlus => (1, 1),
            Quadrant::PlusMinus => (1, -1),
            Quadrant::MinusPlus => (-1, 1),
            Quadrant::MinusMinus => (-1, -1),
        }
    }
}

/// Finite table of complex amplitudes on the ball `2|j| + |k| <= radius`.
///
/// Storage is a dense `(2J+1) x (2 radius + 1)` rectangle, `J = radius / 2`;
/// entries outside the ball are kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField<T> {
    radius: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FourierField<T> {
    pub fn zeros(radius: usize) -> Self {
        let half = radius / 2;
        Self {
            radius,
            coeffs: vec![Complex::zero(); (2 * half + 1) * (2 * radius + 1)],
        }
    }

    /// Field with a single conjugate pair: `c` on `(j, k)` and `conj(c)` on `(-j, -k)`.
    pub fn single_mode(radius: usize, j: i64, k: i64, c: Complex<T>) -> Result<Self> {
        let mut u = Self::zeros(radius);
        u.set_pair(j, k, c)?;
        Ok(u)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn half_j(&self) -> i64 {
        (self.radius / 2) as i64
    }

    fn width(&self) -> usize {
        2 * self.radius + 1
    }

    #[inline]
    fn slot(&self, j: i64, k: i64) -> Option<usize> {
        if ModeIndex::new(j, k).radius() > self.radius as u64 {
            return None;
        }
        let h = self.half_j();
        let r = self.radius as i64;
        Some(((j + h) as usize) * self.width() + (k + r) as usize)
    }

    #[inline]
    fn unslot(&self, idx: usize) -> ModeIndex {
        let w = self.width();
        ModeIndex::new(
            (idx / w) as i64 - self.half_j(),
            (idx % w) as i64 - self.radius as i64,
        )
    }

    pub fn contains(&self, mode: ModeIndex) -> bool {
        mode.radius() <= self.radius as u64
    }

    /// Amplitude at `(j, k)`; zero outside the truncation ball.
    #[inline]
    pub fn get(&self, j: i64, k: i64) -> Complex<T> {
        self.slot(j, k).map_or(Complex::zero(), |i| self.coeffs[i])
    }

    pub fn at(&self, mode: ModeIndex) -> Complex<T> {
        self.get(mode.j, mode.k)
    }

    /// Sets one amplitude without touching its conjugate partner.
    pub fn set(&mut self, j: i64, k: i64, c: Complex<T>) -> Result<()> {
        let i = self.slot(j, k).ok_or(Error::OutsideTruncation {
            j,
            k,
            radius: self.radius,
        })?;
        self.coeffs[i] = c;
        Ok(())
    }

    /// Sets `(j, k)` to `c` and `(-j, -k)` to `conj(c)`; at `(0, 0)` only the
    /// real part is kept.
    pub fn set_pair(&mut self, j: i64, k: i64, c: Complex<T>) -> Result<()> {
        if j == 0 && k == 0 {
            return self.set(0, 0, Complex::new(c.re, T::zero()));
        }
        self.set(j, k, c)?;
        self.set(-j, -k, c.conj())
    }

    /// In-ball modes with their amplitudes, in lexicographic `(j, k)` order.
    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, Complex<T>)> + '_ {
        let radius = self.radius as u64;
        self.coeffs.iter().enumerate().filter_map(move |(i, &c)| {
            let mode = self.unslot(i);
            (mode.radius() <= radius).then_some((mode, c))
        })
    }

    /// Modewise transformation; entries outside the ball stay zero.
    pub fn map_modes(&self, mut f: impl FnMut(ModeIndex, Complex<T>) -> Complex<T>) -> Self {
        let radius = self.radius as u64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mode = self.unslot(i);
                if mode.radius() <= radius {
                    f(mode, c)
                } else {
                    Complex::zero()
                }
            })
            .collect();
        Self {
            radius: self.radius,
            coeffs,
        }
    }

    /// Keeps the modes accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(ModeIndex) -> bool) -> Self {
        self.map_modes(|m, c| if keep(m) { c } else { Complex::zero() })
    }

    /// Re-embeds in a ball of another radius, truncating or zero-padding.
    pub fn resized(&self, radius: usize) -> Self {
        let mut out = Self::zeros(radius);
        for (mode, c) in self.modes() {
            if let Some(i) = out.slot(mode.j, mode.k) {
                out.coeffs[i] = c;
            }
        }
        out
    }

    /// Real coefficient inner product `Re sum a(j,k) conj(b(j,k))`.
    pub fn inner(&self, other: &Self) -> T {
        if self.radius == other.radius {
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum()
        } else {
            self.modes()
                .map(|(m, a)| {
                    let b = other.at(m);
                    a.re * b.re + a.im * b.im
                })
                .sum()
        }
    }

    /// Coefficient l^2 norm `(sum |c|^2)^{1/2}`.
    pub fn coeff_l2(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest `|c(j,k) - conj(c(-j,-k))|`.
    pub fn realness_defect(&self) -> T {
        self.modes()
            .map(|(m, c)| (c - self.at(m.conj()).conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Projection onto the conjugate-symmetric (real) fields.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        self.map_modes(|m, c| (c + self.at(m.conj()).conj()) * half)
    }

    /// `self + alpha * other`, radii must agree.
    pub fn axpy(&self, alpha: T, other: &Self) -> Self {
        assert_eq!(self.radius, other.radius, "radius mismatch");
        Self {
            radius: self.radius,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b * alpha)
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            radius: self.radius,
            coeffs: self.coeffs.iter().map(|&c| c * alpha).collect(),
        }
    }

    /// Keeps exactly the modes of one part.
    pub fn project(&self, part: Part) -> Self {
        self.filter(|m| part.contains(m))
    }

    /// Restriction to a sign quadrant.
    pub fn quadrant(&self, q: Quadrant) -> Self {
        self.filter(|m| q.contains(m))
    }

    /// `u(x + h1, t + h2)`.
    pub fn translate(&self, h1: T, h2: T) -> Self {
        let two = T::lit(2.0);
        self.map_modes(|m, c| {
            let phase = two * T::from_int(m.j) * h1 + T::from_int(m.k) * h2;
            c * Complex::from_polar(T::one(), phase)
        })
    }

    /// Function-space `L^2(Q)` norm via Parseval.
    pub fn l2_norm(&self) -> T {
        (T::cell_area() * self.inner(self)).sqrt()
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> FourierField<U> {
        FourierField {
            radius: self.radius,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(U::lit(c.re.as_f64()), U::lit(c.im.as_f64())))
                .collect(),
        }
    }

    /// Coefficient dump: header `j,k,re,im`, one row per in-ball mode in
    /// lexicographic order, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["j", "k", "re", "im"]).expect("in-memory write");
        for (m, c) in self.modes() {
            w.write_record([
                m.j.to_string(),
                m.k.to_string(),
                format!("{:.16e}", c.re.as_f64()),
                format!("{:.16e}", c.im.as_f64()),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Parses a coefficient dump; the radius is the largest `2|j| + |k|` listed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, got {}", rec.len())));
            }
            let field = |i: usize| rec[i].trim().to_string();
            let j: i64 = field(0).parse().map_err(|e| Error::Parse(format!("j: {e}")))?;
            let k: i64 = field(1).parse().map_err(|e| Error::Parse(format!("k: {e}")))?;
            let re: f64 = field(2).parse().map_err(|e| Error::Parse(format!("re: {e}")))?;
            let im: f64 = field(3).parse().map_err(|e| Error::Parse(format!("im: {e}")))?;
            rows.push((ModeIndex::new(j, k), re, im));
        }
        let radius = rows.iter().map(|(m, _, _)| m.radius()).max().unwrap_or(0) as usize;
        let mut u = Self::zeros(radius);
        for (m, re, im) in rows {
            u.set(m.j, m.k, Complex::new(T::lit(re), T::lit(im)))?;
        }
        Ok(u)
    }
}

impl<T: Real> Add for &FourierField<T> {
    type Output = FourierField<T>;
    fn add(self, rhs: Self) -> FourierField<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Real> Sub for &FourierField<T> {
    type Output = FourierField<T>;
    fn sub(self, rhs: Self) -> FourierField<T> {
        self.axpy(-T::one(), rhs)
    }
}

impl<T: Real> Neg for &FourierField<T> {
    type Output = FourierField<T>;
    fn neg(self) -> FourierField<T> {
        self.scaled(-T::one())
    }
}

impl<T: Real> Mul<T> for &FourierField<T> {
    type Output = FourierField<T>;
    fn mul(self, rhs: T) -> FourierField<T> {
        self.scaled(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    radius: usize,
    /// `(j, k, re, im)` for every nonzero amplitude.
    modes: Vec<(i64, i64, f64, f64)>,
}

impl<T: Real> Serialize for FourierField<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            radius: self.radius,
            modes: self
                .modes()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m.j, m.k, c.re.as_f64(), c.im.as_f64()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for FourierField<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(d)?;
        let mut u = FourierField::zeros(repr.radius);
        for (j, k, re, im) in repr.modes {
            u.set(j, k, Complex::new(T::lit(re), T::lit(im)))
                .map_err(serde::de::Error::custom)?;
        }
        Ok(u)
    }
}

/// Real samples on the uniform grid `x_a = pi a / nx`, `t_b = 2 pi b / nt`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    nx: usize,
    nt: usize,
    /// `values[a * nt + b]`
    values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(nx: usize, nt: usize, values: Vec<T>) -> Result<Self> {
        check_pow2(nx, nt)?;
        if values.len() != nx * nt {
            return Err(Error::domain(
                "grid values",
                format!("expected {} samples, got {}", nx * nt, values.len()),
            ));
        }
        Ok(Self { nx, nt, values })
    }

    /// Samples `f(x, t)` on the grid.
    pub fn from_fn(nx: usize, nt: usize, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        check_pow2(nx, nt)?;
        let mut values = Vec::with_capacity(nx * nt);
        for a in 0..nx {
            let x = grid_x::<T>(a, nx);
            for b in 0..nt {
                values.push(f(x, grid_t::<T>(b, nt)));
            }
        }
        Ok(Self { nx, nt, values })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.values[a * self.nt + b]
    }

    pub fn x(&self, a: usize) -> T {
        grid_x(a, self.nx)
    }

    pub fn t(&self, b: usize) -> T {
        grid_t(b, self.nt)
    }

    /// Pointwise map that also sees the sample's `x` coordinate.
    pub fn map_with_x(&self, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for a in 0..self.nx {
            let x = self.x(a);
            for b in 0..self.nt {
                values.push(f(x, self.values[a * self.nt + b]));
            }
        }
        Self {
            nx: self.nx,
            nt: self.nt,
            values,
        }
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Self {
        assert_eq!((self.nx, self.nt), (other.nx, other.nt), "grid mismatch");
        Self {
            nx: self.nx,
            nt: self.nt,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Grid maximum of `|values|`.
    pub fn sup(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }

    /// Quadrature mean `(nx nt)^{-1} sum values`.
    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize(self.values.len()).unwrap()
    }

    /// Quadrature of `int_Q values dx dt`.
    pub fn integral(&self) -> T {
        self.mean() * T::cell_area()
    }
}

pub(crate) fn grid_x<T: Real>(a: usize, nx: usize) -> T {
    T::PI() * T::from_usize(a).unwrap() / T::from_usize(nx).unwrap()
}

pub(crate) fn grid_t<T: Real>(b: usize, nt: usize) -> T {
    T::lit(2.0) * T::PI() * T::from_usize(b).unwrap() / T::from_usize(nt).unwrap()
}

fn check_pow2(nx: usize, nt: usize) -> Result<()> {
    if nx.is_power_of_two() && nt.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::GridNotPowerOfTwo { nx, nt })
    }
}

/// Minimal `(nx, nt)` that represents the ball of the given radius exactly.
///
/// `j` ranges over `|j| <= radius/2` and `k` over `|k| <= radius`, so the
/// time direction needs `2 radius + 1` distinct frequencies.
pub fn grid_for_radius(radius: usize) -> (usize, usize) {
    let half = radius / 2;
    ((2 * half + 1).next_power_of_two(), (2 * radius + 1).next_power_of_two())
}

/// Grid refined by `factor` (a power of two) beyond [`grid_for_radius`].
pub fn refined_grid(radius: usize, factor: usize) -> (usize, usize) {
    let (nx, nt) = grid_for_radius(radius);
    (nx * factor, nt * factor)
}

fn check_grid(nx: usize, nt: usize, radius: usize) -> Result<()> {
    check_pow2(nx, nt)?;
    let need_nx = 2 * (radius / 2) + 1;
    let need_nt = 2 * radius + 1;
    if nx < need_nx || nt < need_nt {
        return Err(Error::GridTooSmall {
            nx,
            nt,
            radius,
            need_nx,
            need_nt,
        });
    }
    Ok(())
}

/// Planned transforms between a collocation grid and truncated coefficient tables.
#[derive(Clone, Debug)]
pub struct Transform<T: Real> {
    fft: Fft2<T>,
}

impl<T: Real> Transform<T> {
    pub fn new(nx: usize, nt: usize) -> Result<Self> {
        check_pow2(nx, nt)?;
        Ok(Self {
            fft: Fft2::new(nx, nt),
        })
    }

    pub fn nx(&self) -> usize {
        self.fft.nx()
    }

    pub fn nt(&self) -> usize {
        self.fft.nt()
    }

    /// Coefficients up to `radius` of the grid samples.
    pub fn analyze(&self, g: &GridField<T>, radius: usize) -> Result<FourierField<T>> {
        let (nx, nt) = (self.nx(), self.nt());
        if (g.nx, g.nt) != (nx, nt) {
            return Err(Error::domain(
                "analyze",
                format!("grid {}x{} does not match transform {nx}x{nt}", g.nx, g.nt),
            ));
        }
        check_grid(nx, nt, radius)?;
        let mut buf: Vec<Complex<T>> = g.values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft.forward(&mut buf);
        let norm = T::one() / T::from_usize(nx * nt).unwrap();
        let u = FourierField::zeros(radius).map_modes(|m, _| {
            let a = m.j.rem_euclid(nx as i64) as usize;
            let b = m.k.rem_euclid(nt as i64) as usize;
            buf[a * nt + b] * norm
        });
        // the transform of real data is conjugate-symmetric up to round-off
        Ok(u.symmetrized())
    }

    /// Complex samples of an arbitrary (not necessarily real) coefficient table.
    pub fn synthesize_complex(&self, u: &FourierField<T>) -> Result<Vec<Complex<T>>> {
        let (nx, nt) = (self.nx(), self.nt());
        check_grid(nx, nt, u.radius())?;
        let mut buf = vec![Complex::zero(); nx * nt];
        for (m, c) in u.modes() {
            let a = m.j.rem_euclid(nx as i64) as usize;
            let b = m.k.rem_euclid(nt as i64) as usize;
            buf[a * nt + b] = c;
        }
        self.fft.inverse(&mut buf);
        Ok(buf)
    }

    /// Real samples of a conjugate-symmetric coefficient table.
    pub fn synthesize(&self, u: &FourierField<T>) -> Result<GridField<T>> {
        let scale = u.max_abs();
        let defect = u.realness_defect();
        if defect > T::lit(1e-12) * scale.max(T::min_positive_value()) {
            return Err(Error::RealnessViolation {
                defect: defect.as_f64(),
            });
        }
        let buf = self.synthesize_complex(u)?;
        Ok(GridField {
            nx: self.nx(),
            nt: self.nt(),
            values: buf.into_iter().map(|c| c.re).collect(),
        })
    }

    /// Grid maximum of `|u|` for a possibly complex-valued coefficient table.
    pub fn sup_abs(&self, u: &FourierField<T>) -> Result<T> {
        Ok(self
            .synthesize_complex(u)?
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), T::max))
    }
}

/// Coefficients of grid samples up to the given truncation radius.
pub fn analyze<T: Real>(g: &GridField<T>, radius: usize) -> Result<FourierField<T>> {
    Transform::new(g.nx, g.nt)?.analyze(g, radius)
}

/// Samples of a real field on an `nx x nt` grid.
pub fn synthesize<T: Real>(u: &FourierField<T>, nx: usize, nt: usize) -> Result<GridField<T>> {
    Transform::new(nx, nt)?.synthesize(u)
}

/// Grid supremum of `|u|` on the grid refined 4x beyond the band limit.
/// A lower bound on the true supremum, spectrally accurate.
pub fn sup_norm<T: Real>(u: &FourierField<T>) -> T {
    let (nx, nt) = refined_grid(u.radius(), 4);
    Transform::new(nx, nt)
        .and_then(|tr| tr.sup_abs(u))
        .expect("refined grid always admissible")
}

/// Traveling-wave profile `p(s) = sum_j c(j) exp(2 i j s)`, `|j| <= half`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct KernelProfile<T: Real> {
    half: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> KernelProfile<T> {
    pub fn zeros(half: usize) -> Self {
        Self {
            half,
            coeffs: vec![Complex::zero(); 2 * half + 1],
        }
    }

    pub fn half(&self) -> usize {
        self.half
    }

    pub fn get(&self, j: i64) -> Complex<T> {
        if j.unsigned_abs() as usize > self.half {
            Complex::zero()
        } else {
            self.coeffs[(j + self.half as i64) as usize]
        }
    }

    fn set(&mut self, j: i64, c: Complex<T>) {
        let h = self.half as i64;
        self.coeffs[(j + h) as usize] = c;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let h = self.half as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - h, c))
    }
}

/// Kernel profiles `(p1, p2)` of a field supported on characteristic modes:
/// `p1(j) = c(j, 2j)` with `p1(0) = 0`, `p2(j) = c(j, -2j)` with `p2(0) = c(0, 0)`.
pub fn kernel_profiles<T: Real>(u: &FourierField<T>) -> Result<(KernelProfile<T>, KernelProfile<T>)> {
    let tol = T::lit(64.0) * T::epsilon() * u.max_abs();
    if let Some((m, c)) = u.modes().find(|(m, c)| !m.is_kernel() && c.norm() > tol) {
        return Err(Error::domain(
            "kernel profiles",
            format!("non-characteristic mode {m} carries amplitude {:e}", c.norm().as_f64()),
        ));
    }
    let half = u.radius() / 4;
    let (mut p1, mut p2) = (KernelProfile::zeros(half), KernelProfile::zeros(half));
    for j in -(half as i64)..=(half as i64) {
        if j != 0 {
            p1.set(j, u.get(j, 2 * j));
        }
        p2.set(j, u.get(j, -2 * j));
    }
    Ok((p1, p2))
}

/// A field split as `w_plus + w_minus + p1(x + t) + p2(x - t)`; the mean mode
/// lives in `p2(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Decomposition<T: Real> {
    pub w_plus: FourierField<T>,
    pub w_minus: FourierField<T>,
    pub p1: KernelProfile<T>,
    pub p2: KernelProfile<T>,
}

impl<T: Real> Decomposition<T> {
    pub fn from_field(u: &FourierField<T>) -> Self {
        let v = u.filter(ModeIndex::is_kernel);
        let (p1, p2) = kernel_profiles(&v).expect("kernel projection has only characteristic modes");
        Self {
            w_plus: u.project(Part::Eplus),
            w_minus: u.project(Part::Eminus),
            p1,
            p2,
        }
    }

    pub fn zeros(radius: usize) -> Self {
        Self::from_field(&FourierField::zeros(radius))
    }

    pub fn radius(&self) -> usize {
        self.w_plus.radius()
    }

    pub fn mean(&self) -> T {
        self.p2.get(0).re
    }

    /// Kernel component `v` rebuilt from the profiles.
    pub fn kernel_field(&self) -> FourierField<T> {
        let mut v = FourierField::zeros(self.radius());
        for (j, c) in self.p1.iter() {
            if j != 0 {
                v.set(j, 2 * j, c).expect("profile inside ball");
            }
        }
        for (j, c) in self.p2.iter() {
            v.set(j, -2 * j, c).expect("profile inside ball");
        }
        v
    }

    /// Range component `w = w_plus + w_minus`.
    pub fn range_field(&self) -> FourierField<T> {
        &self.w_plus + &self.w_minus
    }

    pub fn to_field(&self) -> FourierField<T> {
        &self.range_field() + &self.kernel_field()
    }
}
