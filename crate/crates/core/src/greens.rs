//! Green functions of the Laplace-Beltrami operator with uniform counter-vorticity.
//!
//! `G(z, w) = (-log|z - w| + H(z, w)) / (2 pi)` near the diagonal, with the
//! regular part expanded in the chart of `w` as
//! `H = h0 + Re(h1 d) + Re(h2 d^2) + h11 |d|^2 + O(|d|^3)`, `d = z - w`.
//! `G` is normalized to have zero mean against the area form.

use num_complex::Complex;

use crate::error::{Result, VortexError};
use crate::scalar::Real;
use crate::surface::{metric_density, ChartId, ChartPoint, FlatTorus, Sphere, Surface};
use crate::theta::Theta1;

/// Separation below which two points count as coincident.
pub const COINCIDENCE: f64 = 1e-12;

/// Taylor coefficients of the regular part at a base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularExpansion<T> {
    pub h0: T,
    pub h1: Complex<T>,
    pub h2: Complex<T>,
    pub h11: T,
}

/// Green function of a surface.
pub trait GreenModel<T: Real>: Send + Sync {
    fn surface(&self) -> &dyn Surface<T>;

    /// `G(z, w)`; callers go through [`green`] for the coincidence check.
    fn value(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> T;

    /// `dG/dz` in the chart of `z`.
    fn dz(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Complex<T>;

    /// Expansion coefficients at `w`, in the chart of `w`.
    fn coeffs(&self, w: &ChartPoint<T>) -> Result<RegularExpansion<T>>;
}

fn ensure_distinct<T: Real>(s: &dyn Surface<T>, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Result<()> {
    let sep = match s.relative(z, w) {
        Some(d) => d.norm(),
        None => return Ok(()),
    };
    if sep < T::lit(COINCIDENCE) {
        Err(VortexError::Coincident(sep.as_f64()))
    } else {
        Ok(())
    }
}

pub fn green<T: Real, M: GreenModel<T> + ?Sized>(m: &M, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Result<T> {
    ensure_distinct(m.surface(), z, w)?;
    Ok(m.value(z, w))
}

/// `dG(z, w)/dz`.
pub fn green_gradient<T: Real, M: GreenModel<T> + ?Sized>(
    m: &M,
    z: &ChartPoint<T>,
    w: &ChartPoint<T>,
) -> Result<Complex<T>> {
    ensure_distinct(m.surface(), z, w)?;
    Ok(m.dz(z, w))
}

pub fn regular_coeffs<T: Real, M: GreenModel<T> + ?Sized>(m: &M, w: &ChartPoint<T>) -> Result<RegularExpansion<T>> {
    metric_density(m.surface(), w)?;
    m.coeffs(w)
}

/// `H(z, w) = 2 pi G(z, w) + log|z - w|`, with `z - w` taken in the chart of `w`.
pub fn regular_part<T: Real, M: GreenModel<T> + ?Sized>(m: &M, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Result<T> {
    let d =
        m.surface().relative(z, w).ok_or_else(|| VortexError::InvalidArgument("points have no common chart".into()))?;
    Ok(T::TAU() * green(m, z, w)? + d.norm().ln())
}

/// Robin function `(h0(w) + log lambda(w)) / (2 pi)`.
pub fn robin_function<T: Real, M: GreenModel<T> + ?Sized>(m: &M, w: &ChartPoint<T>) -> Result<T> {
    let lam = metric_density(m.surface(), w)?;
    Ok((regular_coeffs(m, w)?.h0 + lam.ln()) / T::TAU())
}

/// Reads the expansion coefficients off samples of `H` on small circles.
///
/// `H` is sampled at `samples` points on circles of radius `rho`, `rho/2`,
/// `rho/4` around `w`; Fourier modes 0, 1 and 2 give `h0 + h11 rho^2 + ...`,
/// `h1 rho / 2 + ...` and `h2 rho^2 / 2 + ...`, and the even powers of `rho`
/// are eliminated across the three radii.
pub fn extract_regular_coeffs<T: Real, M: GreenModel<T> + ?Sized>(
    m: &M,
    w: &ChartPoint<T>,
    rho: T,
    samples: usize,
) -> Result<RegularExpansion<T>> {
    if samples < 8 || !(rho > T::zero()) {
        return Err(VortexError::InvalidArgument("extraction needs rho > 0 and at least 8 samples".into()));
    }
    let radii = [rho, rho / T::lit(2.0), rho / T::lit(4.0)];
    let n = T::from_usize(samples).unwrap();
    let mut modes = [[Complex::new(T::zero(), T::zero()); 3]; 3];
    for (ri, &r) in radii.iter().enumerate() {
        for k in 0..samples {
            let th = T::TAU() * T::from_usize(k).unwrap() / n;
            let z = ChartPoint::new(w.chart, w.z + Complex::from_polar(r, th));
            let h = T::TAU() * green(m, &z, w)? + r.ln();
            for (mi, mode) in modes[ri].iter_mut().enumerate() {
                *mode += Complex::from_polar(h / n, -th * T::from_usize(mi).unwrap());
            }
        }
    }
    for v in modes.iter().flatten() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(VortexError::NonConvergence { what: "regular part extraction" });
        }
    }
    // f(r) = c0 + c1 r^2 + c2 r^4 through three radii
    let fit = |vals: [Complex<T>; 3]| -> (Complex<T>, Complex<T>) {
        let x: Vec<T> = radii.iter().map(|r| *r * *r).collect();
        let l = |i: usize, j: usize, k: usize| vals[i] * (x[j] * x[k] / ((x[i] - x[j]) * (x[i] - x[k])));
        let c0 = l(0, 1, 2) + l(1, 0, 2) + l(2, 0, 1);
        // coefficient of r^2 in the Lagrange interpolant
        let s = |i: usize, j: usize, k: usize| vals[i] * (-(x[j] + x[k]) / ((x[i] - x[j]) * (x[i] - x[k])));
        (c0, s(0, 1, 2) + s(1, 0, 2) + s(2, 0, 1))
    };
    let two = T::lit(2.0);
    let (h0, h11) = fit([modes[0][0], modes[1][0], modes[2][0]]);
    let (h1, _) = fit([0, 1, 2].map(|i| modes[i][1] * two / radii[i]));
    let (h2, _) = fit([0, 1, 2].map(|i| modes[i][2] * two / (radii[i] * radii[i])));
    Ok(RegularExpansion { h0: h0.re, h1, h2, h11: h11.re })
}

/// Closed-form Green function of the unit sphere.
#[derive(Clone, Copy, Debug, Default)]
pub struct SphereGreen {
    surface: Sphere,
}

impl SphereGreen {
    pub fn new() -> Self {
        Self { surface: Sphere }
    }
}

impl<T: Real> GreenModel<T> for SphereGreen {
    fn surface(&self) -> &dyn Surface<T> {
        &self.surface
    }

    fn value(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> T {
        let c = Sphere::chordal_sq(z, w);
        -(c.ln() + T::one()) / (T::lit(4.0) * T::PI())
    }

    fn dz(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Complex<T> {
        let pole = if z.chart == w.chart {
            (z.z - w.z).inv()
        } else {
            // w sits at 1/zeta in the chart of z
            w.z / (z.z * w.z - T::one())
        };
        let back = z.z.conj() / (T::one() + z.z.norm_sqr());
        -(pole - back) / (T::lit(4.0) * T::PI())
    }

    fn coeffs(&self, w: &ChartPoint<T>) -> Result<RegularExpansion<T>> {
        let m = T::one() + w.z.norm_sqr();
        let wb = w.z.conj();
        Ok(RegularExpansion {
            h0: m.ln() - T::lit(0.5),
            h1: wb / m,
            h2: -(wb * wb) / (T::lit(2.0) * m * m),
            h11: T::lit(0.5) / (m * m),
        })
    }
}

/// Green function of a flat torus via `theta_1`.
///
/// `G = -(log|theta_1(d)| - log|eta| - pi (Im d)^2 / Im tau) / (2 pi)`; the
/// `log|eta|` term is the zero-mean constant.
#[derive(Clone, Debug)]
pub struct TorusGreen<T> {
    surface: FlatTorus<T>,
    theta: Theta1<T>,
    log_eta: T,
    expansion: RegularExpansion<T>,
}

impl<T: Real> TorusGreen<T> {
    pub fn new(surface: FlatTorus<T>) -> Result<Self> {
        let theta = Theta1::new(surface.tau());
        let log_eta = theta.log_abs_eta();
        let zero = Complex::new(T::zero(), T::zero());
        let mut model = Self {
            surface,
            theta,
            log_eta,
            expansion: RegularExpansion { h0: T::zero(), h1: zero, h2: zero, h11: T::zero() },
        };
        // translation invariance: one extraction serves every base point
        let origin = ChartPoint::new(ChartId(0), zero);
        model.expansion = extract_regular_coeffs(&model, &origin, T::lit(1e-2), 64)?;
        Ok(model)
    }

    pub fn torus(&self) -> &FlatTorus<T> {
        &self.surface
    }

    /// `log|eta(tau)|`, the cached normalization constant.
    pub fn normalization(&self) -> T {
        self.log_eta
    }

    fn reduced(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Complex<T> {
        self.theta.reduce(z.z - w.z)
    }
}

impl<T: Real> GreenModel<T> for TorusGreen<T> {
    fn surface(&self) -> &dyn Surface<T> {
        &self.surface
    }

    fn value(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> T {
        let d = self.reduced(z, w);
        let h = self.surface.tau().im;
        let th = self.theta.value(d).norm().ln();
        -(th - self.log_eta - T::PI() * d.im * d.im / h) / T::TAU()
    }

    fn dz(&self, z: &ChartPoint<T>, w: &ChartPoint<T>) -> Complex<T> {
        let d = self.reduced(z, w);
        let h = self.surface.tau().im;
        let (v, s) = self.theta.value_and_slope(d);
        let log_term = s / v / T::lit(2.0);
        let quad = Complex::new(T::zero(), T::PI() * d.im / h);
        -(log_term + quad) / T::TAU()
    }

    fn coeffs(&self, _w: &ChartPoint<T>) -> Result<RegularExpansion<T>> {
        Ok(self.expansion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type P = ChartPoint<f64>;

    #[test]
    fn sphere_reference_values() {
        let m = SphereGreen::new();
        let g = green(&m, &P::xy(0.0, 0.0), &P::xy(1.0, 0.0)).unwrap();
        assert!((g - (2f64.ln() - 1.0) / (4.0 * PI)).abs() < 1e-15);
        let d = green_gradient(&m, &P::xy(2.0, 0.0), &P::xy(0.0, 0.0)).unwrap();
        assert!((d.re + (0.5 - 0.4) / (4.0 * PI)).abs() < 1e-15 && d.im.abs() < 1e-15);
        let e: RegularExpansion<f64> = regular_coeffs(&m, &P::xy(0.0, 0.0)).unwrap();
        assert_eq!((e.h0, e.h1.norm(), e.h2.norm(), e.h11), (-0.5, 0.0, 0.0, 0.5));
        let e1: RegularExpansion<f64> = regular_coeffs(&m, &P::xy(1.0, 0.0)).unwrap();
        assert!((e1.h1.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_error() {
        let m = SphereGreen::new();
        let p = P::xy(0.3, 0.1);
        assert!(matches!(green(&m, &p, &p), Err(VortexError::Coincident(_))));
    }

    #[test]
    fn sphere_cross_chart_agrees() {
        let m = SphereGreen::new();
        let z = P::xy(0.4, -0.2);
        let w = P::xy(1.5, 0.9);
        let w1 = ChartPoint::new(ChartId(1), w.z.inv());
        assert!((m.value(&z, &w) - m.value(&z, &w1)).abs() < 1e-14);
        assert!((m.dz(&z, &w) - m.dz(&z, &w1)).norm() < 1e-14);
    }

    #[test]
    fn robin_is_constant_on_sphere() {
        let m = SphereGreen::new();
        let expected = (2f64.ln() - 0.5) / (2.0 * PI);
        for w in [P::xy(0.0, 0.0), P::xy(1.3, -0.4), ChartPoint::new(ChartId(1), Complex::new(0.2, 0.7))] {
            assert!((robin_function(&m, &w).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn extraction_recovers_sphere_closed_forms() {
        let m = SphereGreen::new();
        let w = P::xy(0.6, -0.3);
        let num = extract_regular_coeffs(&m, &w, 1e-2, 64).unwrap();
        let exact: RegularExpansion<f64> = regular_coeffs(&m, &w).unwrap();
        assert!((num.h0 - exact.h0).abs() < 1e-9);
        assert!((num.h1 - exact.h1).norm() < 1e-8);
        assert!((num.h2 - exact.h2).norm() < 1e-6);
        assert!((num.h11 - exact.h11).abs() < 1e-6);
    }

    #[test]
    fn torus_square_expansion() {
        let m = TorusGreen::new(FlatTorus::<f64>::square()).unwrap();
        let e = regular_coeffs(&m, &P::xy(0.2, 0.7)).unwrap();
        assert!(e.h1.norm() < 1e-9);
        assert!((e.h11 - PI / 2.0).abs() < 1e-6);
        assert!(e.h2.norm() < 1e-6);
        let z = P::xy(0.1, 0.3);
        let w = P::xy(0.6, 0.85);
        assert!((m.value(&z, &w) - m.value(&w, &z)).abs() < 1e-14);
        assert!((m.dz(&z, &w) + m.dz(&w, &z)).norm() < 1e-13);
    }

    #[test]
    fn torus_gradient_matches_differences() {
        let m = TorusGreen::new(FlatTorus::new(Complex::new(0.3, 1.1)).unwrap()).unwrap();
        let w = P::xy(0.2, 0.4);
        let z = Complex::new(0.65, 0.05);
        let fd = crate::diff::d_z(|u| Complex::new(m.value(&ChartPoint::front(u), &w), 0.0), z);
        assert!((fd - m.dz(&ChartPoint::front(z), &w)).norm() < 1e-9);
    }
}
