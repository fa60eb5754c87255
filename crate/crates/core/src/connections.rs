//! Bracket operators, affine and projective connections.
//!
//! For a local conformal change `w = phi(z)` the three brackets are
//!
//! * `{w, z}_0 = log phi'`
//! * `{w, z}_1 = phi'' / phi'`
//! * `{w, z}_2 = phi''' / phi' - 3/2 (phi'' / phi')^2` (the Schwarzian)
//!
//! An affine connection `r` obeys `r~ phi' = r - {w, z}_1` and a projective
//! connection `q` obeys `q~ phi'^2 = q - {w, z}_2`.

use std::sync::Arc;

use num_complex::Complex;

use crate::diff;
use crate::error::{Result, VortexError};
use crate::scalar::Real;

/// Below this modulus of `phi'` a map is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// A locally conformal map together with its first three derivatives.
pub trait HolomorphicMap<T: Real>: Send + Sync {
    fn eval(&self, z: Complex<T>) -> Complex<T>;

    fn d1(&self, z: Complex<T>) -> Complex<T> {
        diff::holomorphic(|w| self.eval(w), z, 1)
    }

    fn d2(&self, z: Complex<T>) -> Complex<T> {
        diff::holomorphic(|w| self.eval(w), z, 2)
    }

    fn d3(&self, z: Complex<T>) -> Complex<T> {
        diff::holomorphic(|w| self.eval(w), z, 3)
    }
}

/// Mobius transformation `(a z + b) / (c z + d)` with analytic derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> Mobius<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Result<Self> {
        let m = Self { a, b, c, d };
        if m.det().norm() < T::lit(SINGULAR_THRESHOLD) {
            return Err(VortexError::InvalidArgument("degenerate Mobius map".into()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self { a: l, b: o, c: o, d: l }
    }

    /// The chart swap `z -> 1/z`.
    pub fn inversion() -> Self {
        let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self { a: o, b: l, c: l, d: o }
    }

    pub fn det(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }
}

impl<T: Real> HolomorphicMap<T> for Mobius<T> {
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    fn d1(&self, z: Complex<T>) -> Complex<T> {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }

    fn d2(&self, z: Complex<T>) -> Complex<T> {
        let den = self.c * z + self.d;
        self.det() * self.c * T::lit(-2.0) / (den * den * den)
    }

    fn d3(&self, z: Complex<T>) -> Complex<T> {
        let den = self.c * z + self.d;
        self.det() * self.c * self.c * T::lit(6.0) / (den * den * den * den)
    }
}

/// Wraps a closure; derivatives come from finite differences.
pub struct FnMap<F>(pub F);

impl<T: Real, F> HolomorphicMap<T> for FnMap<F>
where
    F: Fn(Complex<T>) -> Complex<T> + Send + Sync,
{
    fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.0)(z)
    }
}

/// Order of a connection, or of the bracket that governs its defect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Zero,
    One,
    Two,
}

impl TryFrom<u8> for Order {
    type Error = VortexError;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            2 => Ok(Order::Two),
            _ => Err(VortexError::InvalidArgument(format!("no bracket of order {k}"))),
        }
    }
}

fn conformal_derivative<T: Real, M: HolomorphicMap<T> + ?Sized>(phi: &M, z: Complex<T>) -> Result<Complex<T>> {
    let d1 = phi.d1(z);
    if !(d1.norm() >= T::lit(SINGULAR_THRESHOLD)) {
        return Err(VortexError::SingularMap { re: z.re.as_f64(), im: z.im.as_f64(), modulus: d1.norm().as_f64() });
    }
    Ok(d1)
}

/// `{phi(z), z}_k`; order zero uses the principal branch of the logarithm.
pub fn bracket<T: Real, M: HolomorphicMap<T> + ?Sized>(k: Order, phi: &M, z: Complex<T>) -> Result<Complex<T>> {
    let d1 = conformal_derivative(phi, z)?;
    Ok(match k {
        Order::Zero => d1.ln(),
        Order::One => phi.d2(z) / d1,
        Order::Two => {
            let r = phi.d2(z) / d1;
            phi.d3(z) / d1 - r * r * T::lit(1.5)
        }
    })
}

/// Transports a connection coefficient from `w` to `phi(w)`.
///
/// Coefficients are in the normalization of the regular-part expansion:
/// `c0 + Re c1 dw + Re c2 dw^2`, so that
/// `c0~ = c0 + Re{w~, w}_0`, `c1~ phi' = c1 + {w~, w}_1 / 2`, and
/// `c2~ phi'^2 = c2 + {w~, w}_2 / 12`.
pub fn transform_connection<T: Real, M: HolomorphicMap<T> + ?Sized>(
    kind: Order,
    value: Complex<T>,
    phi: &M,
    w: Complex<T>,
) -> Result<Complex<T>> {
    let d1 = conformal_derivative(phi, w)?;
    let br = bracket(kind, phi, w)?;
    Ok(match kind {
        Order::Zero => value + Complex::new(br.re, T::zero()),
        Order::One => (value + br / T::lit(2.0)) / d1,
        Order::Two => (value + br / T::lit(12.0)) / (d1 * d1),
    })
}

type Field<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;

/// An affine connection `r(z)` on one chart.
#[derive(Clone)]
pub struct AffineConnection<T> {
    r: Field<T>,
    dr: Option<Field<T>>,
}

impl<T: Real> AffineConnection<T> {
    pub fn new(r: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static) -> Self {
        Self { r: Arc::new(r), dr: None }
    }

    /// Registers an analytic `d r / d z` alongside `r`.
    pub fn with_derivative(
        r: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
        dr: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        Self { r: Arc::new(r), dr: Some(Arc::new(dr)) }
    }

    pub fn zero() -> Self {
        Self::with_derivative(|_| Complex::new(T::zero(), T::zero()), |_| Complex::new(T::zero(), T::zero()))
    }

    /// Connection `2 d/dz log lambda` of a metric density, by finite differences.
    pub fn from_metric(lambda: impl Fn(Complex<T>) -> T + Send + Sync + 'static) -> Self {
        Self::new(move |z| diff::d_z(|w| Complex::new(lambda(w).ln(), T::zero()), z) * T::lit(2.0))
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.r)(z)
    }

    /// `d r / d z` (Wirtinger derivative; `r` need not be holomorphic).
    pub fn dz(&self, z: Complex<T>) -> Complex<T> {
        match &self.dr {
            Some(dr) => dr(z),
            None => diff::d_z(|w| (self.r)(w), z),
        }
    }

    /// Value of the transported connection at `phi(z)`: `(r - {phi, z}_1) / phi'`.
    pub fn transport<M: HolomorphicMap<T> + ?Sized>(&self, phi: &M, z: Complex<T>) -> Result<Complex<T>> {
        // r = -2 c1 relates the two normalizations
        let c1 = self.eval(z) / T::lit(-2.0);
        Ok(transform_connection(Order::One, c1, phi, z)? * T::lit(-2.0))
    }
}

/// A projective connection `q(z)` on one chart.
#[derive(Clone)]
pub struct ProjectiveConnection<T> {
    q: Field<T>,
}

impl<T: Real> ProjectiveConnection<T> {
    pub fn new(q: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static) -> Self {
        Self { q: Arc::new(q) }
    }

    /// The projective connection `dr/dz - r^2 / 2` induced by an affine one.
    pub fn from_affine(r: AffineConnection<T>) -> Self {
        Self::new(move |z| projective_from_affine(&r, z))
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.q)(z)
    }

    /// Value of the transported connection at `phi(z)`: `(q - {phi, z}_2) / phi'^2`.
    pub fn transport<M: HolomorphicMap<T> + ?Sized>(&self, phi: &M, z: Complex<T>) -> Result<Complex<T>> {
        let c2 = self.eval(z) / T::lit(-12.0);
        Ok(transform_connection(Order::Two, c2, phi, z)? * T::lit(-12.0))
    }
}

fn check_density<T: Real>(l: T) -> Result<()> {
    if l > T::zero() && l.is_finite() {
        Ok(())
    } else {
        Err(VortexError::InvalidMetric(l.as_f64()))
    }
}

/// `r(z) = 2 d/dz log lambda(z)` by central differences.
pub fn affine_from_metric<T: Real, F: Fn(Complex<T>) -> T>(lambda: F, z: Complex<T>) -> Result<Complex<T>> {
    check_density(lambda(z))?;
    Ok(diff::d_z(|w| Complex::new(lambda(w).ln(), T::zero()), z) * T::lit(2.0))
}

/// Gaussian curvature `-4 lambda^-2 d/dz d/dzbar log lambda`.
pub fn gaussian_curvature<T: Real, F: Fn(Complex<T>) -> T>(lambda: F, z: Complex<T>) -> Result<T> {
    let l = lambda(z);
    check_density(l)?;
    Ok(-diff::laplacian(|w| lambda(w).ln(), z) / (l * l))
}

/// `q(z) = dr/dz - r(z)^2 / 2`.
pub fn projective_from_affine<T: Real>(r: &AffineConnection<T>, z: Complex<T>) -> Complex<T> {
    let v = r.eval(z);
    r.dz(z) - v * v / T::lit(2.0)
}

/// Two-point form `(dr(z) + dr(w) - r(z) r(w)) / 2`.
pub fn projective_polarized<T: Real>(r: &AffineConnection<T>, z: Complex<T>, w: Complex<T>) -> Complex<T> {
    (r.dz(z) + r.dz(w) - r.eval(z) * r.eval(w)) / T::lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sphere_r() -> AffineConnection<f64> {
        AffineConnection::with_derivative(
            |z: Complex<f64>| -z.conj() * 2.0 / (1.0 + z.norm_sqr()),
            |z: Complex<f64>| z.conj() * z.conj() * 2.0 / (1.0 + z.norm_sqr()).powi(2),
        )
    }

    #[test]
    fn elementary_brackets() {
        let id = Mobius::<f64>::identity();
        let z = c(0.3, 0.4);
        assert_eq!(bracket(Order::One, &id, z).unwrap(), c(0.0, 0.0));
        let dbl = FnMap(|z: Complex<f64>| z * 2.0);
        assert!((bracket(Order::Zero, &dbl, z).unwrap() - c(2f64.ln(), 0.0)).norm() < 1e-10);
        let m = Mobius::new(c(1.0, 2.0), c(0.5, 0.0), c(0.0, 1.0), c(3.0, 0.0)).unwrap();
        assert!(bracket(Order::Two, &m, z).unwrap().norm() < 1e-12);
    }

    #[test]
    fn singular_map_is_rejected() {
        let sq = FnMap(|z: Complex<f64>| z * z);
        let err = bracket(Order::One, &sq, c(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, VortexError::SingularMap { .. }));
    }

    #[test]
    fn metric_connection_of_sphere() {
        let lam = |z: Complex<f64>| 2.0 / (1.0 + z.norm_sqr());
        let r = affine_from_metric(lam, c(1.0, 0.0)).unwrap();
        assert!((r - c(-1.0, 0.0)).norm() < 1e-9);
        assert!(affine_from_metric(|_| 1.0, c(0.2, 0.1)).unwrap().norm() < 1e-12);
        assert!(matches!(affine_from_metric(|_| -1.0, c(0.0, 0.0)), Err(VortexError::InvalidMetric(_))));
    }

    #[test]
    fn curvature_values() {
        let lam = |z: Complex<f64>| 2.0 / (1.0 + z.norm_sqr());
        for z in [c(0.0, 0.0), c(0.7, -0.2), c(-1.5, 1.0)] {
            assert!((gaussian_curvature(lam, z).unwrap() - 1.0).abs() < 1e-6);
            let k3 = gaussian_curvature(|w| 3.0 * lam(w), z).unwrap();
            assert!((k3 - 1.0 / 9.0).abs() < 1e-6);
        }
        assert!(gaussian_curvature(|_| 1.0, c(0.4, 0.4)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sphere_projective_vanishes() {
        let r = sphere_r();
        let fd = AffineConnection::new(|z: Complex<f64>| -z.conj() * 2.0 / (1.0 + z.norm_sqr()));
        for z in [c(0.0, 0.0), c(0.5, 0.5), c(1.2, -0.3)] {
            assert!(projective_from_affine(&r, z).norm() < 1e-14);
            assert!(projective_from_affine(&fd, z).norm() < 1e-8);
        }
        // independent evaluation of the polarized form at z = 0, w = 1
        let expected = (c(0.0, 0.0) + c(0.5, 0.0) - c(0.0, 0.0) * c(-1.0, 0.0)) / 2.0;
        assert!((projective_polarized(&r, c(0.0, 0.0), c(1.0, 0.0)) - expected).norm() < 1e-14);
        let z = c(0.3, -0.8);
        assert!((projective_polarized(&r, z, z) - projective_from_affine(&r, z)).norm() < 1e-14);
    }

    #[test]
    fn chart_swap_two_paths() {
        let r = sphere_r();
        let swap = Mobius::<f64>::inversion();
        let w = c(1.0, 0.0);
        let via_rule = r.transport(&swap, w).unwrap();
        let direct = r.eval(swap.eval(w));
        assert!((via_rule - direct).norm() < 1e-14);
        assert!((via_rule - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn transform_identity_and_scaling() {
        let id = Mobius::<f64>::identity();
        let v = c(0.7, -0.1);
        for k in [Order::Zero, Order::One, Order::Two] {
            assert!((transform_connection(k, v, &id, c(0.2, 0.2)).unwrap() - v).norm() < 1e-15);
        }
        let dbl = Mobius::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let t0 = transform_connection(Order::Zero, c(0.25, 0.0), &dbl, c(0.1, 0.0)).unwrap();
        assert!((t0.re - (0.25 + 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn f32_brackets() {
        let m = Mobius::new(
            crate::scalar::c::<f32>(1.0, 0.0),
            crate::scalar::c(1.0, 0.0),
            crate::scalar::c(1.0, 0.0),
            crate::scalar::c(2.0, 0.0),
        )
        .unwrap();
        let s = bracket(Order::Two, &m, crate::scalar::c(0.5, 0.5)).unwrap();
        assert!(s.norm() < 1e-4);
    }
}
