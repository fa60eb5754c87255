//! Adaptive Gauss-Kronrod and periodic trapezoid quadrature.

#![allow(clippy::excessive_precision)]

use num_complex::Complex;

use crate::error::{Result, VortexError};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += s * T::lit(WG[j / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

/// Globally adaptive 7/15 Gauss-Kronrod integral of `f` over `[a, b]`:
/// the interval with the largest error estimate is bisected until the total
/// estimate drops below `tol`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    let (value, err) = gk15(&f, a, b);
    let mut pieces = vec![Piece { a, b, value, err }];
    loop {
        let total: T = pieces.iter().fold(T::zero(), |s, p| s + p.value);
        let total_err: T = pieces.iter().fold(T::zero(), |s, p| s + p.err);
        if total_err <= tol.max(T::epsilon() * T::lit(50.0) * total.abs()) {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(VortexError::NonConvergence { what: "adaptive Gauss-Kronrod" });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = pieces.swap_remove(worst);
        let m = (p.a + p.b) / T::lit(2.0);
        if !(m > p.a && m < p.b) {
            return Err(VortexError::NonConvergence { what: "adaptive Gauss-Kronrod" });
        }
        let (lv, le) = gk15(&f, p.a, m);
        let (rv, re) = gk15(&f, m, p.b);
        pieces.push(Piece { a: p.a, b: m, value: lv, err: le });
        pieces.push(Piece { a: m, b: p.b, value: rv, err: re });
    }
}

/// Iterated adaptive integral over the rectangle `[a0, a1] x [b0, b1]`.
pub fn integrate_2d<T: Real, F: Fn(T, T) -> T>(f: F, a: (T, T), b: (T, T), tol: T) -> Result<T> {
    let width = (a.1 - a.0).abs().max(T::epsilon());
    let inner_tol = tol / (T::lit(4.0) * width);
    let failure = std::cell::Cell::new(false);
    let outer = integrate(
        |s| match integrate(|t| f(s, t), b.0, b.1, inner_tol) {
            Ok(v) => v,
            Err(_) => {
                failure.set(true);
                T::zero()
            }
        },
        a.0,
        a.1,
        tol / T::lit(2.0),
    )?;
    if failure.get() {
        return Err(VortexError::NonConvergence { what: "inner Gauss-Kronrod" });
    }
    Ok(outer)
}

/// Mean of a 1-periodic function by the trapezoid rule.
///
/// Starts from `initial` points and doubles, reusing previous samples, until
/// two successive estimates differ by less than `tol`.
pub fn periodic_mean<T: Real, F>(f: F, initial: usize, tol: T) -> Result<Complex<T>>
where
    F: Fn(T) -> Complex<T>,
{
    const MAX_POINTS: usize = 1 << 18;
    let mut n = initial.max(4);
    let mut sum: Complex<T> = (0..n)
        .map(|j| f(T::from_usize(j).unwrap() / T::from_usize(n).unwrap()))
        .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
    let mut prev = sum / T::from_usize(n).unwrap();
    loop {
        let fresh: Complex<T> = (0..n)
            .map(|j| f((T::from_usize(2 * j + 1).unwrap()) / T::from_usize(2 * n).unwrap()))
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
        sum += fresh;
        n *= 2;
        let next = sum / T::from_usize(n).unwrap();
        if (next - prev).norm() < tol {
            return Ok(next);
        }
        if n >= MAX_POINTS {
            return Err(VortexError::NonConvergence { what: "periodic trapezoid" });
        }
        prev = next;
    }
}
