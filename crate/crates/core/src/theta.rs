//! Jacobi theta function `theta_1` and the Dedekind eta function.

use num_complex::Complex;

use crate::scalar::Real;

/// Odd Jacobi theta function for a fixed modulus `tau` (with `Im tau > 0`).
#[derive(Clone, Debug)]
pub struct Theta1<T> {
    tau: Complex<T>,
    /// `(-1)^n q^((n + 1/2)^2)` with `q = exp(i pi tau)`.
    weights: Vec<Complex<T>>,
}

impl<T: Real> Theta1<T> {
    pub fn new(tau: Complex<T>) -> Self {
        let pi = T::PI();
        let ipt = Complex::new(T::zero(), pi) * tau;
        let h = tau.im;
        let mut weights = Vec::new();
        for n in 0..4000u32 {
            let half = T::from_u32(n).unwrap() + T::lit(0.5);
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            weights.push((ipt * (half * half)).exp() * sign);
            // worst case on the reduced strip |Im z| <= h/2, third derivative
            let nn = T::from_u32(n).unwrap();
            let freq = (T::lit(2.0) * nn + T::lit(3.0)) * pi;
            let next = -pi * h * ((nn + T::one()) * (nn + T::one())) + freq.ln() * T::lit(3.0);
            if n > 0 && next < T::epsilon().ln() - T::lit(8.0) {
                break;
            }
        }
        Self { tau, weights }
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    /// Reduces `z` modulo the lattice `Z + tau Z` so that `|Im z| <= Im tau / 2`
    /// and `|Re z| <= 1/2` (the latter after the tau shift).
    pub fn reduce(&self, z: Complex<T>) -> Complex<T> {
        let h = self.tau.im;
        let n = (z.im / h).round();
        let z = z - self.tau * n;
        let m = z.re.round();
        Complex::new(z.re - m, z.im)
    }

    /// `k`-th derivative of `theta_1` at `z`, for `k` in `0..=3`.
    ///
    /// `z` should already be reduced.
    pub fn derivative(&self, z: Complex<T>, k: u32) -> Complex<T> {
        let pi = T::PI();
        let mut sum = Complex::new(T::zero(), T::zero());
        for (n, w) in self.weights.iter().enumerate() {
            let freq = T::from_usize(2 * n + 1).unwrap() * pi;
            let arg = z * freq;
            let trig = match k % 4 {
                0 => arg.sin(),
                1 => arg.cos(),
                2 => -arg.sin(),
                _ => -arg.cos(),
            };
            sum += *w * trig * freq.powi(k as i32);
        }
        sum * T::lit(2.0)
    }

    /// `(theta_1(z), theta_1'(z))` sharing one pass over the series.
    pub fn value_and_slope(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let pi = T::PI();
        let zero = Complex::new(T::zero(), T::zero());
        let (mut v, mut d) = (zero, zero);
        // sin and cos of (2n+1) pi z from exp(i (2n+1) pi z)
        let i = Complex::new(T::zero(), T::one());
        let e1 = (i * z * pi).exp();
        let e1_inv = (-i * z * pi).exp();
        let step = e1 * e1;
        let step_inv = e1_inv * e1_inv;
        let (mut ep, mut em) = (e1, e1_inv);
        for (n, w) in self.weights.iter().enumerate() {
            let freq = T::from_usize(2 * n + 1).unwrap() * pi;
            let sin = (ep - em) / (i * T::lit(2.0));
            let cos = (ep + em) / T::lit(2.0);
            v += *w * sin;
            d += *w * cos * freq;
            ep *= step;
            em *= step_inv;
        }
        (v * T::lit(2.0), d * T::lit(2.0))
    }

    pub fn value(&self, z: Complex<T>) -> Complex<T> {
        self.derivative(z, 0)
    }

    /// `log |eta(tau)|`.
    pub fn log_abs_eta(&self) -> T {
        let h = self.tau.im;
        let q2 = (Complex::new(T::zero(), T::TAU()) * self.tau).exp();
        let mut acc = -T::PI() * h / T::lit(12.0);
        let mut qn = q2;
        for _ in 0..10_000 {
            acc += (Complex::new(T::one(), T::zero()) - qn).norm().ln();
            if qn.norm() < T::epsilon() * T::lit(1e-3) {
                break;
            }
            qn *= q2;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Theta1<f64> {
        Theta1::new(Complex::new(0.0, 1.0))
    }

    #[test]
    fn jacobi_derivative_identity() {
        // theta_1'(0) = 2 pi eta^3
        for tau in [Complex::new(0.0, 1.0), Complex::new(0.3, 0.8), Complex::new(-0.5, 2.0)] {
            let th = Theta1::new(tau);
            let d = th.derivative(Complex::new(0.0, 0.0), 1);
            let expected = (std::f64::consts::TAU.ln() + 3.0 * th.log_abs_eta()).exp();
            assert!((d.norm() - expected).abs() < 1e-13 * expected, "{tau}");
        }
    }

    #[test]
    fn quasi_periodicity() {
        let th = square();
        let z = Complex::new(0.2, 0.1);
        let tau = th.tau();
        // theta_1(z + tau) = -exp(-i pi tau - 2 pi i z) theta_1(z)
        let lhs = th.value(z + tau);
        let factor =
            -(Complex::new(0.0, -std::f64::consts::PI) * tau - Complex::new(0.0, std::f64::consts::TAU) * z).exp();
        assert!((lhs - factor * th.value(z)).norm() < 1e-14);
        assert!((th.value(z + 1.0) + th.value(z)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_agree_with_differences() {
        let th = Theta1::new(Complex::new(0.1, 1.3));
        let z = Complex::new(0.17, -0.22);
        for k in 1..=3 {
            let fd = crate::diff::holomorphic(|w| th.derivative(w, k - 1), z, 1);
            assert!((fd - th.derivative(z, k)).norm() < 1e-8 * (1.0 + fd.norm()));
        }
    }

    #[test]
    fn fused_evaluation_matches() {
        let th = Theta1::new(Complex::new(0.25, 0.9));
        let z = Complex::new(-0.31, 0.4);
        let (v, d) = th.value_and_slope(z);
        assert!((v - th.value(z)).norm() < 1e-14);
        assert!((d - th.derivative(z, 1)).norm() < 1e-13);
    }

    #[test]
    fn reduce_lands_in_cell() {
        let th = Theta1::new(Complex::new(0.4f64, 1.1));
        let z = th.reduce(Complex::new(7.3, -5.2));
        assert!(z.im.abs() <= 0.55 + 1e-12 && z.re.abs() <= 0.5 + 1e-12);
    }
}
