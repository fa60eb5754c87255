//! Finite-difference derivatives.
//!
//! Every stencil is a fourth-order central difference followed by one
//! Richardson step (`h` and `h/2`), so the truncation error is sixth order.
//! The default first-derivative step is `1e-5 * max(1, |z|)` in `f64`
//! (`1.65 eps^(1/3)` in general); higher orders use `eps^(1/(k+4))`.

use num_complex::Complex;

use crate::scalar::Real;

/// Default step for a derivative of the given order around a point of size `scale`.
pub fn default_step<T: Real>(order: u32, scale: T) -> T {
    let base = if order <= 1 {
        T::epsilon().cbrt() * T::lit(1.65)
    } else {
        T::epsilon().powf(T::one() / T::from_u32(order + 4).unwrap())
    };
    base * scale.max(T::one())
}

fn stencil<T: Real, F>(g: &F, h: T, order: u32) -> Complex<T>
where
    F: Fn(T) -> Complex<T>,
{
    let two = T::lit(2.0);
    match order {
        1 => (g(-two * h) - g(two * h) + (g(h) - g(-h)) * T::lit(8.0)) / (T::lit(12.0) * h),
        2 => {
            (-g(two * h) - g(-two * h) + (g(h) + g(-h)) * T::lit(16.0) - g(T::zero()) * T::lit(30.0))
                / (T::lit(12.0) * h * h)
        }
        3 => {
            let three = T::lit(3.0);
            (g(-three * h) - g(three * h) + (g(two * h) - g(-two * h)) * T::lit(8.0) + (g(-h) - g(h)) * T::lit(13.0))
                / (T::lit(8.0) * h * h * h)
        }
        _ => panic!("derivative order {order} not supported"),
    }
}

/// `order`-th derivative of a curve `g(s)` at `s = 0`, using step `h`.
pub fn along<T: Real, F>(g: F, order: u32, h: T) -> Complex<T>
where
    F: Fn(T) -> Complex<T>,
{
    let coarse = stencil(&g, h, order);
    let fine = stencil(&g, h / T::lit(2.0), order);
    fine + (fine - coarse) / T::lit(15.0)
}

/// Complex derivative of a holomorphic function, taken along the real axis.
pub fn holomorphic<T: Real, F>(f: F, z: Complex<T>, order: u32) -> Complex<T>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let h = default_step(order, z.norm());
    along(|s| f(z + Complex::new(s, T::zero())), order, h)
}

/// Partial derivatives `(f_x, f_y)` of a (possibly complex valued) field.
pub fn gradient<T: Real, F>(f: F, z: Complex<T>) -> (Complex<T>, Complex<T>)
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let h = default_step(1, z.norm());
    let fx = along(|s| f(z + Complex::new(s, T::zero())), 1, h);
    let fy = along(|s| f(z + Complex::new(T::zero(), s)), 1, h);
    (fx, fy)
}

/// Wirtinger derivative `d/dz = (d/dx - i d/dy) / 2`.
pub fn d_z<T: Real, F>(f: F, z: Complex<T>) -> Complex<T>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let (fx, fy) = gradient(f, z);
    (fx - Complex::new(-fy.im, fy.re)) / T::lit(2.0)
}

/// Wirtinger derivative `d/dzbar = (d/dx + i d/dy) / 2`.
pub fn d_zbar<T: Real, F>(f: F, z: Complex<T>) -> Complex<T>
where
    F: Fn(Complex<T>) -> Complex<T>,
{
    let (fx, fy) = gradient(f, z);
    (fx + Complex::new(-fy.im, fy.re)) / T::lit(2.0)
}

/// Flat Laplacian `f_xx + f_yy` of a real field.
pub fn laplacian<T: Real, F>(f: F, z: Complex<T>) -> T
where
    F: Fn(Complex<T>) -> T,
{
    let h = default_step(2, z.norm());
    let fxx = along(|s| Complex::new(f(z + Complex::new(s, T::zero())), T::zero()), 2, h);
    let fyy = along(|s| Complex::new(f(z + Complex::new(T::zero(), s)), T::zero()), 2, h);
    fxx.re + fyy.re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivatives() {
        let z = Complex::new(0.3, -0.7);
        for k in 1..=3 {
            let d = holomorphic(|w: Complex<f64>| w.exp(), z, k);
            let tol = [0.0, 1e-10, 1e-8, 1e-6][k as usize];
            assert!((d - z.exp()).norm() < tol, "order {k}: {}", (d - z.exp()).norm());
        }
    }

    #[test]
    fn wirtinger_of_modulus_squared() {
        let z = Complex::new(1.5, 0.25);
        let f = |w: Complex<f64>| Complex::new(w.norm_sqr(), 0.0);
        assert!((d_z(f, z) - z.conj()).norm() < 1e-9);
        assert!((d_zbar(f, z) - z).norm() < 1e-9);
    }

    #[test]
    fn laplacian_of_log_density() {
        let z = Complex::new(0.4, 0.1);
        let l = laplacian(|w: Complex<f64>| (1.0 + w.norm_sqr()).ln(), z);
        let exact = 4.0 / (1.0 + z.norm_sqr()).powi(2);
        assert!((l - exact).abs() < 1e-7);
    }

    #[test]
    fn works_in_f32() {
        let z = Complex::new(0.5f32, 0.0);
        let d = holomorphic(|w: Complex<f32>| w * w, z, 1);
        assert!((d - Complex::new(1.0f32, 0.0)).norm() < 1e-3);
    }
}
