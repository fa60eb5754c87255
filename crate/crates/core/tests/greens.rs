use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use vortex_core::diff;
use vortex_core::greens::{
    extract_regular_coeffs, regular_coeffs, robin_function, GreenModel, SphereGreen, TorusGreen,
};
use vortex_core::surface::{ChartId, ChartPoint, FlatTorus, Sphere, Surface};

type P = ChartPoint<f64>;

/// Rectangular torus `C / (Z + i h Z)` by its Fourier series in `x`.
fn fourier_green(h: f64, x: f64, y: f64) -> f64 {
    let s = y / h;
    let b2 = s * s - s + 1.0 / 6.0;
    let mut sum = h / 2.0 * b2;
    for m in 1..400 {
        let mf = m as f64;
        let term = (PI * h * mf * (1.0 - 2.0 * s)).cosh() / (PI * h * mf).sinh();
        sum += 2.0 * (2.0 * PI * mf * x).cos() * PI / mf * term / (4.0 * PI * PI);
        if term < 1e-18 {
            break;
        }
    }
    sum
}

#[test]
fn torus_green_matches_fourier_series() {
    for h in [1.0, 0.7, 1.6] {
        let g = TorusGreen::new(FlatTorus::new(C::new(0.0, h)).unwrap()).unwrap();
        let w = P::xy(0.2, 0.1 * h);
        for (x, s) in [(0.1, 0.3), (0.45, 0.5), (0.8, 0.9), (0.33, 0.05)] {
            let z = P::front(w.z + C::new(x, s * h));
            let expected = fourier_green(h, x, s * h);
            assert!((g.value(&z, &w) - expected).abs() < 1e-10, "h = {h}, x = {x}, s = {s}");
        }
    }
}

#[test]
fn sphere_h1_is_derivative_of_h0() {
    let m = SphereGreen::new();
    for w in [C::new(0.3, -0.4), C::new(1.2, 0.5), C::new(-0.1, 0.05)] {
        let fd = diff::d_z(|u| C::new(regular_coeffs(&m, &P::front(u)).unwrap().h0, 0.0), w);
        let h1 = regular_coeffs(&m, &P::front(w)).unwrap().h1;
        assert!((fd - h1).norm() < 1e-8);
    }
}

#[test]
fn torus_extraction_is_translation_invariant() {
    let tau = C::new(0.3, 0.9);
    let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
    let base = extract_regular_coeffs(&g, &P::xy(0.0, 0.0), 1e-2, 64).unwrap();
    let moved = extract_regular_coeffs(&g, &P::front(0.6 + tau * 0.3), 1e-2, 64).unwrap();
    assert!((base.h0 - moved.h0).abs() < 1e-9);
    assert!((base.h2 - moved.h2).norm() < 1e-6);
    assert!(base.h1.norm() < 1e-8);
}

#[test]
fn extraction_rejects_bad_arguments() {
    let m = SphereGreen::new();
    assert!(extract_regular_coeffs::<f64, _>(&m, &P::xy(0.1, 0.0), 0.0, 64).is_err());
    assert!(extract_regular_coeffs::<f64, _>(&m, &P::xy(0.1, 0.0), 1e-2, 4).is_err());
}

#[test]
fn f32_torus_green_is_symmetric() {
    let g = TorusGreen::<f32>::new(FlatTorus::new(num_complex::Complex32::new(0.1, 1.1)).unwrap()).unwrap();
    let (z, w) = (ChartPoint::<f32>::xy(0.2, 0.3), ChartPoint::<f32>::xy(0.7, 0.9));
    assert!((g.value(&z, &w) - g.value(&w, &z)).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_green_symmetric_across_charts(x in -2.0..2.0f64, y in -2.0..2.0f64, u in -0.9..0.9f64, v in -0.9..0.9f64) {
        let m = SphereGreen::new();
        let z = P::front(C::new(x, y));
        let w = P::new(ChartId(1), C::new(u, v));
        prop_assume!(Sphere.distance(&z, &w).unwrap() > 1e-3);
        prop_assert!((m.value(&z, &w) - m.value(&w, &z)).abs() < 1e-12);
    }

    #[test]
    fn sphere_robin_is_chart_independent(x in -0.9..0.9f64, y in -0.9..0.9f64) {
        let m = SphereGreen::new();
        let z = C::new(x, y);
        prop_assume!(z.norm() > 0.05);
        let front = robin_function(&m, &P::front(z)).unwrap();
        let back = robin_function(&m, &P::new(ChartId(1), z.inv())).unwrap();
        prop_assert!((front - back).abs() < 1e-12);
    }

    #[test]
    fn torus_green_symmetric_and_periodic(re in -0.4..0.4f64, im in 0.6..1.8f64, s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let tau = C::new(re, im);
        let g = TorusGreen::new(FlatTorus::new(tau).unwrap()).unwrap();
        let w = P::xy(0.1, 0.2);
        let z = P::front(s + tau * t);
        prop_assume!(g.torus().distance(&z, &w).unwrap() > 1e-3);
        let base = g.value(&z, &w);
        prop_assert!((base - g.value(&w, &z)).abs() < 1e-10);
        prop_assert!((base - g.value(&P::front(z.z + 1.0), &w)).abs() < 1e-10);
        prop_assert!((base - g.value(&P::front(z.z - tau), &w)).abs() < 1e-10);
    }
}
