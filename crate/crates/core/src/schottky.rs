//! Schottky double of the unit disk.
//!
//! The front face is the disk `|z| <= 1` with the flat metric; the back face
//! is its mirror image, reached through the Schwarz function `S(z) = 1/z`. In
//! the extended coordinate the metric density is `1` inside the unit circle
//! and `|S'(z)| = |z|^-2` outside; it is Lipschitz but not smooth across the
//! boundary, where the affine connection jumps from `0` to `S''/S' = -2/z`.

use num_complex::Complex;

use crate::connections::{bracket, HolomorphicMap, Mobius, Order};
use crate::error::{Result, VortexError};
use crate::scalar::Real;
use crate::surface::{Cell, ChartId, ChartPoint, Surface};

/// Width of the band `||z| - 1| <= BOUNDARY_BAND` treated as the boundary.
pub const BOUNDARY_BAND: f64 = 1e-12;

/// Singular curvature density carried by the unit circle (twice its curvature).
pub const BOUNDARY_CURVATURE_DENSITY: f64 = 2.0;

/// The registered Schwarz function of the unit circle.
pub fn schwarz<T: Real>() -> Mobius<T> {
    Mobius::inversion()
}

fn nonzero<T: Real>(z: Complex<T>) -> Result<()> {
    if z.norm() == T::zero() {
        Err(VortexError::InvalidArgument("the reflection is undefined at z = 0".into()))
    } else {
        Ok(())
    }
}

/// Anti-conformal reflection `conj(S(z)) = 1 / conj(z)`.
pub fn reflect<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    nonzero(z)?;
    Ok(schwarz().eval(z).conj())
}

/// Metric density in the extended coordinate.
pub fn double_metric<T: Real>(z: Complex<T>) -> T {
    let r2 = z.norm_sqr();
    if r2 <= T::one() {
        T::one()
    } else {
        T::one() / r2
    }
}

/// Which value of the connection to use on the boundary circle itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Arithmetic mean of the inside and outside limits.
    MeanValue,
    /// Inside limit (flat disk, `r = 0`).
    Inside,
    /// Outside limit.
    Outside,
}

/// Affine connection of the double metric, with the chosen boundary value.
pub fn double_connection_with<T: Real>(z: Complex<T>, rule: BoundaryRule) -> Result<Complex<T>> {
    nonzero(z)?;
    let outside = bracket(Order::One, &schwarz::<T>(), z)?;
    let zero = Complex::new(T::zero(), T::zero());
    let gap = z.norm() - T::one();
    Ok(if gap.abs() <= T::lit(BOUNDARY_BAND) {
        match rule {
            BoundaryRule::MeanValue => outside * T::lit(0.5),
            BoundaryRule::Inside => zero,
            BoundaryRule::Outside => outside,
        }
    } else if gap < T::zero() {
        zero
    } else {
        outside
    })
}

/// Affine connection of the double metric (mean value on the boundary).
pub fn double_connection<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    double_connection_with(z, BoundaryRule::MeanValue)
}

/// Unit tangent `T(z) = i z` of the boundary circle, counterclockwise.
pub fn boundary_tangent<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(-z.im, z.re)
}

/// `T'(z) = i`; purely imaginary as the curvature relation requires.
pub fn boundary_tangent_derivative<T: Real>(_z: Complex<T>) -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `max |d/dt arg z' + Im(r z')|` along the unit circle at `n` arc-length samples.
pub fn boundary_geodesic_residual_with<T: Real>(n: usize, rule: BoundaryRule) -> Result<T> {
    if n < 16 {
        return Err(VortexError::InvalidArgument("boundary residual needs at least 16 samples".into()));
    }
    let step = T::TAU() / T::from_usize(n).unwrap();
    let point = |j: usize| Complex::from_polar(T::one(), step * T::from_usize(j).unwrap());
    let mut worst = T::zero();
    for j in 0..n {
        let z = point(j);
        let ahead = boundary_tangent(point(j + 1));
        let behind = boundary_tangent(point(j + n - 1));
        let turn = crate::scalar::wrap_angle(ahead.arg() - behind.arg()) / (step * T::lit(2.0));
        let r = double_connection_with(z, rule)?;
        worst = worst.max((turn + (r * boundary_tangent(z)).im).abs());
    }
    Ok(worst)
}

/// Boundary residual with the mean-value connection.
pub fn boundary_geodesic_residual<T: Real>(n: usize) -> Result<T> {
    boundary_geodesic_residual_with(n, BoundaryRule::MeanValue)
}

/// Disk Green function extended oddly across the boundary:
/// `-(1/2 pi) log |(z - w) / (1 - z conj(w))|`.
pub fn double_green<T: Real>(z: Complex<T>, w: Complex<T>) -> Result<T> {
    let num = (z - w).norm();
    let den = (Complex::new(T::one(), T::zero()) - z * w.conj()).norm();
    let tiny = T::lit(crate::greens::COINCIDENCE);
    if num < tiny {
        return Err(VortexError::Coincident(num.as_f64()));
    }
    if den < tiny {
        return Err(VortexError::Coincident(den.as_f64()));
    }
    Ok(-(num / den).ln() / T::TAU())
}

/// The doubled disk as a genus-0 surface. Chart 0 is the extended
/// coordinate `z`, chart 1 is `1/z`; both carry the same density formula.
#[derive(Clone, Copy, Debug, Default)]
pub struct DiskDouble;

impl DiskDouble {
    /// Face (`true` for front) and disk coordinate of a point.
    fn face(p: &ChartPoint<f64>) -> (bool, Complex<f64>) {
        let z = p.z;
        let front_in_chart = z.norm_sqr() <= 1.0;
        let front = if p.chart.0 == 0 { front_in_chart } else { !front_in_chart };
        let disk = if front_in_chart { z } else { Complex::new(1.0, 0.0) / z.conj() };
        // chart 1 swaps the faces but the disk coordinate is the conjugate
        let disk = if p.chart.0 == 1 { disk.conj() } else { disk };
        (front, disk)
    }
}

fn pillow_distance(p: Complex<f64>, q: Complex<f64>) -> f64 {
    let f = |th: f64| {
        let b = Complex::from_polar(1.0, th);
        (p - b).norm() + (b - q).norm()
    };
    let n = 720;
    let (mut best, mut arg) = (f64::INFINITY, 0.0);
    for k in 0..n {
        let th = std::f64::consts::TAU * k as f64 / n as f64;
        let v = f(th);
        if v < best {
            best = v;
            arg = th;
        }
    }
    let (mut lo, mut hi) = (arg - std::f64::consts::TAU / n as f64, arg + std::f64::consts::TAU / n as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(f(0.5 * (lo + hi)))
}

impl<T: Real> Surface<T> for DiskDouble {
    fn name(&self) -> &'static str {
        "disk-double"
    }

    fn genus(&self) -> usize {
        0
    }

    fn density(&self, _chart: ChartId, z: Complex<T>) -> T {
        double_metric(z)
    }

    fn connection(&self, _chart: ChartId, z: Complex<T>) -> Complex<T> {
        double_connection(z).unwrap_or_else(|_| Complex::new(T::zero(), T::zero()))
    }

    fn volume(&self) -> T {
        T::TAU()
    }

    fn in_domain(&self, p: &ChartPoint<T>) -> bool {
        p.chart.0 < 2 && p.z.re.is_finite() && p.z.im.is_finite()
    }

    fn transition(&self, from: ChartId, to: ChartId) -> Option<Mobius<T>> {
        match (from.0, to.0) {
            (a, b) if a == b && a < 2 => Some(Mobius::identity()),
            (0, 1) | (1, 0) => Some(Mobius::inversion()),
            _ => None,
        }
    }

    fn normalize_with_map(&self, p: ChartPoint<T>) -> (ChartPoint<T>, Mobius<T>) {
        if p.z.norm() > T::lit(2.0) {
            let m = Mobius::inversion();
            (ChartPoint::new(ChartId(1 - p.chart.0.min(1)), m.eval(p.z)), m)
        } else {
            (p, Mobius::identity())
        }
    }

    fn in_safe_region(&self, p: &ChartPoint<T>) -> bool {
        p.z.norm() <= T::lit(2.0)
    }

    fn distance(&self, p: &ChartPoint<T>, q: &ChartPoint<T>) -> Result<T> {
        let cast = |x: &ChartPoint<T>| ChartPoint::new(x.chart, Complex::new(x.z.re.as_f64(), x.z.im.as_f64()));
        let (fp, dp) = Self::face(&cast(p));
        let (fq, dq) = Self::face(&cast(q));
        let d = if fp == fq { (dp - dq).norm() } else { pillow_distance(dp, dq) };
        Ok(T::lit(d))
    }

    fn cells(&self) -> Vec<Cell<T>> {
        vec![Cell::Disk { chart: ChartId(0), radius: T::one() }, Cell::Disk { chart: ChartId(1), radius: T::one() }]
    }
}
