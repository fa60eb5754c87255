//! Harmonic one-forms, homology cycles and period matrices.
//!
//! On a genus `g` surface the basis `dU_alpha_j`, `dU_beta_j` is normalized by
//! `oint_{alpha_k} -dU_beta_j = delta_kj`, `oint_{beta_k} dU_alpha_j = delta_kj`,
//! with all other periods zero. The blocks `P`, `Q`, `R` express the Hodge
//! star in this basis:
//! `*dU_alpha = R^T dU_alpha + Q dU_beta`, `*dU_beta = -P dU_alpha - R dU_beta`.

use num_complex::Complex;

use crate::error::{Result, VortexError};
use crate::greens::GreenModel;
use crate::quadrature::periodic_mean;
use crate::scalar::Real;
use crate::surface::{ChartPoint, Surface};

/// Minimum chart distance between a vortex and a cycle.
pub const MIN_CLEARANCE: f64 = 1e-3;
/// Convergence threshold of the contour trapezoid rule.
pub const CONTOUR_TOL: f64 = 1e-9;
const CONTOUR_POINTS: usize = 256;

/// Real one-form `p dx + q dy`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Covector<T> {
    pub p: T,
    pub q: T,
}

impl<T: Real> Covector<T> {
    pub fn new(p: T, q: T) -> Self {
        Self { p, q }
    }

    /// Hodge star: `*(p dx + q dy) = -q dx + p dy`.
    pub fn star(self) -> Self {
        Self { p: -self.q, q: self.p }
    }

    /// Pairing with a tangent vector `v = vx + i vy`.
    pub fn apply(self, v: Complex<T>) -> T {
        self.p * v.re + self.q * v.im
    }

    /// Coefficient of `dz`.
    pub fn dz(self) -> Complex<T> {
        Complex::new(self.p, -self.q) / T::lit(2.0)
    }

    /// Coefficient of `dzbar`.
    pub fn dzbar(self) -> Complex<T> {
        Complex::new(self.p, self.q) / T::lit(2.0)
    }

    /// Real form `2 Im(c dz)`.
    pub fn from_im_dz(c: Complex<T>) -> Self {
        Self { p: c.im * T::lit(2.0), q: c.re * T::lit(2.0) }
    }

    pub fn scale(self, k: T) -> Self {
        Self { p: self.p * k, q: self.q * k }
    }
}

impl<T: Real> std::ops::Add for Covector<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { p: self.p + o.p, q: self.q + o.q }
    }
}

impl<T: Real> std::ops::Sub for Covector<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self { p: self.p - o.p, q: self.q - o.q }
    }
}

/// Closed straight loop `s -> start + s span`, `s` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cycle<T> {
    pub start: ChartPoint<T>,
    pub span: Complex<T>,
}

impl<T: Real> Cycle<T> {
    pub fn point(&self, s: T) -> ChartPoint<T> {
        ChartPoint::new(self.start.chart, self.start.z + self.span * s)
    }
}

/// Integral of the one-form `form` around `cycle` by the nested trapezoid rule.
pub fn contour_integral<T: Real, F>(cycle: &Cycle<T>, form: F) -> Result<T>
where
    F: Fn(&ChartPoint<T>) -> Covector<T>,
{
    let m = periodic_mean(
        |s| Complex::new(form(&cycle.point(s)).apply(cycle.span), T::zero()),
        CONTOUR_POINTS,
        T::lit(CONTOUR_TOL),
    )?;
    Ok(m.re)
}

/// A record of one cycle representative being moved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleShift<T> {
    /// `true` for an alpha cycle, `false` for beta.
    pub alpha: bool,
    pub index: usize,
    pub old_offset: T,
    pub new_offset: T,
}

/// Harmonic basis with its registered cycles.
#[derive(Clone, Debug)]
pub struct HarmonicBasis<T> {
    tau: Option<Complex<T>>,
    alpha_forms: Vec<Covector<T>>,
    beta_forms: Vec<Covector<T>>,
    alpha: Vec<Cycle<T>>,
    beta: Vec<Cycle<T>>,
}

fn solve2<T: Real>(m: [[T; 2]; 2], rhs: [T; 2]) -> Result<[T; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < T::epsilon() {
        return Err(VortexError::InvalidArgument("degenerate cycle spans".into()));
    }
    Ok([(rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det, (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det])
}

/// Wraps a lattice fraction into `[-1/2, 1/2)`.
fn centered<T: Real>(x: T) -> T {
    x - (x + T::lit(0.5)).floor()
}

impl<T: Real> HarmonicBasis<T> {
    pub fn empty() -> Self {
        Self { tau: None, alpha_forms: vec![], beta_forms: vec![], alpha: vec![], beta: vec![] }
    }

    /// Constant-coefficient basis of the torus `C / (Z + tau Z)` with the
    /// alpha cycle at lattice height `alpha_offset` and the beta cycle at
    /// lattice abscissa `beta_offset`.
    pub fn torus(tau: Complex<T>, alpha_offset: T, beta_offset: T) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        let alpha = Cycle { start: ChartPoint::front(tau * alpha_offset), span: one };
        let beta = Cycle { start: ChartPoint::front(one * beta_offset), span: tau };
        let rows = [[alpha.span.re, alpha.span.im], [beta.span.re, beta.span.im]];
        let (z, o) = (T::zero(), T::one());
        let a = solve2(rows, [z, o])?;
        let b = solve2(rows, [-o, z])?;
        Ok(Self {
            tau: Some(tau),
            alpha_forms: vec![Covector::new(a[0], a[1])],
            beta_forms: vec![Covector::new(b[0], b[1])],
            alpha: vec![alpha],
            beta: vec![beta],
        })
    }

    pub fn genus(&self) -> usize {
        self.alpha_forms.len()
    }

    pub fn d_u_alpha(&self, j: usize, _p: &ChartPoint<T>) -> Covector<T> {
        self.alpha_forms[j]
    }

    pub fn d_u_beta(&self, j: usize, _p: &ChartPoint<T>) -> Covector<T> {
        self.beta_forms[j]
    }

    pub fn alpha(&self, j: usize) -> &Cycle<T> {
        &self.alpha[j]
    }

    pub fn beta(&self, j: usize) -> &Cycle<T> {
        &self.beta[j]
    }

    /// Lattice offsets `(alpha height, beta abscissa)` of the cycles.
    pub fn offsets(&self) -> Vec<(T, T)> {
        let Some(tau) = self.tau else { return vec![] };
        self.alpha.iter().zip(&self.beta).map(|(a, b)| (a.start.z.im / tau.im, b.start.z.re)).collect()
    }

    fn lattice_coords(&self, z: Complex<T>) -> (T, T) {
        let tau = self.tau.expect("lattice basis");
        let t = z.im / tau.im;
        (z.re - t * tau.re, t)
    }

    /// Signed lattice fractions from the `(alpha, beta)` cycles to `p`, in `[-1/2, 1/2)`.
    fn fractions(&self, p: &ChartPoint<T>) -> Option<(T, T)> {
        let (alpha_t, beta_s) = *self.offsets().first()?;
        let (s, t) = self.lattice_coords(p.z);
        Some((centered(t - alpha_t), centered(s - beta_s)))
    }

    /// Chart distance from `p` to the nearest cycle; infinite in genus 0.
    pub fn clearance(&self, p: &ChartPoint<T>) -> T {
        match (self.fractions(p), self.tau) {
            (Some((ft, fs)), Some(tau)) => (ft.abs() * tau.im).min(fs.abs() * tau.im / tau.norm()),
            _ => T::infinity(),
        }
    }

    /// Moves cycles that pass within `min_fraction` (lattice units) of any
    /// point to the middle of the widest gap between the points.
    pub fn reselected(&self, points: &[ChartPoint<T>], min_fraction: T) -> Option<(Self, Vec<CycleShift<T>>)> {
        let (alpha_t, beta_s) = *self.offsets().first()?;
        let mut ts = Vec::with_capacity(points.len());
        let mut ss = Vec::with_capacity(points.len());
        let mut need = (false, false);
        for p in points {
            let (ft, fs) = self.fractions(p)?;
            need.0 |= ft.abs() < min_fraction;
            need.1 |= fs.abs() < min_fraction;
            let (s, t) = self.lattice_coords(p.z);
            ts.push(t - t.floor());
            ss.push(s - s.floor());
        }
        if !need.0 && !need.1 {
            return None;
        }
        let widest_gap_mid = |mut xs: Vec<T>| -> T {
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let mut best = (T::zero(), T::zero());
            for i in 0..xs.len() {
                let lo = xs[i];
                let hi = if i + 1 < xs.len() { xs[i + 1] } else { xs[0] + T::one() };
                if hi - lo > best.0 {
                    best = (hi - lo, (lo + hi) / T::lit(2.0));
                }
            }
            best.1 - best.1.floor()
        };
        let new_t = if need.0 { widest_gap_mid(ts) } else { alpha_t };
        let new_s = if need.1 { widest_gap_mid(ss) } else { beta_s };
        let basis = Self::torus(self.tau?, new_t, new_s).ok()?;
        let mut shifts = Vec::new();
        if need.0 {
            shifts.push(CycleShift { alpha: true, index: 0, old_offset: alpha_t, new_offset: new_t });
        }
        if need.1 {
            shifts.push(CycleShift { alpha: false, index: 0, old_offset: beta_s, new_offset: new_s });
        }
        Some((basis, shifts))
    }
}

/// Basis for a surface with registered cycles (empty in genus 0).
pub fn harmonic_basis<T: Real, S: Surface<T> + ?Sized>(s: &S) -> Result<HarmonicBasis<T>> {
    match (s.genus(), s.period_lattice()) {
        (0, _) => Ok(HarmonicBasis::empty()),
        (1, Some(tau)) => HarmonicBasis::torus(tau, T::zero(), T::zero()),
        (g, _) => Err(VortexError::InvalidArgument(format!("no registered homology cycles for genus {g}"))),
    }
}

/// Square `g x g` blocks of the period matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodMatrix<T> {
    pub genus: usize,
    pub p: Vec<T>,
    pub q: Vec<T>,
    pub r: Vec<T>,
}

impl<T: Real> PeriodMatrix<T> {
    pub fn p(&self, i: usize, j: usize) -> T {
        self.p[i * self.genus + j]
    }

    pub fn q(&self, i: usize, j: usize) -> T {
        self.q[i * self.genus + j]
    }

    pub fn r(&self, i: usize, j: usize) -> T {
        self.r[i * self.genus + j]
    }

    /// The `2g x 2g` matrix `(P R; R^T Q)`.
    pub fn assembled(&self) -> Vec<Vec<T>> {
        let g = self.genus;
        let mut m = vec![vec![T::zero(); 2 * g]; 2 * g];
        for i in 0..g {
            for j in 0..g {
                m[i][j] = self.p(i, j);
                m[i][g + j] = self.r(i, j);
                m[g + i][j] = self.r(j, i);
                m[g + i][g + j] = self.q(i, j);
            }
        }
        m
    }

    /// Quadratic form `(A, B) (P R; R^T Q) (A, B)^T`.
    pub fn energy(&self, a: &[T], b: &[T]) -> T {
        let m = self.assembled();
        let v: Vec<T> = a.iter().chain(b).copied().collect();
        let mut acc = T::zero();
        for (i, row) in m.iter().enumerate() {
            for (j, mij) in row.iter().enumerate() {
                acc += v[i] * *mij * v[j];
            }
        }
        acc
    }

    /// Largest `|M_ij - M_ji|` of the assembled matrix.
    pub fn symmetry_defect(&self) -> T {
        let m = self.assembled();
        let mut d = T::zero();
        for i in 0..m.len() {
            for j in 0..m.len() {
                d = d.max((m[i][j] - m[j][i]).abs());
            }
        }
        d
    }

    /// Eigenvalues of the symmetrized assembled matrix (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut a = self.assembled();
        let n = a.len();
        for i in 0..n {
            for j in 0..i {
                let s = (a[i][j] + a[j][i]) / T::lit(2.0);
                a[i][j] = s;
                a[j][i] = s;
            }
        }
        for _ in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += a[i][j] * a[i][j];
                    }
                }
            }
            if off < T::epsilon() * T::epsilon() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q] == T::zero() {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }
}

/// Period blocks by contour quadrature of the starred basis:
/// `Q_jk = -oint_{alpha_k} *dU_alpha_j`, `P_jk = -oint_{beta_k} *dU_beta_j`,
/// `R_jk = oint_{alpha_k} *dU_beta_j`.
pub fn period_matrix<T: Real>(b: &HarmonicBasis<T>) -> Result<PeriodMatrix<T>> {
    let g = b.genus();
    if g == 0 {
        return Err(VortexError::InvalidArgument("period matrix needs genus >= 1".into()));
    }
    let mut pm =
        PeriodMatrix { genus: g, p: vec![T::zero(); g * g], q: vec![T::zero(); g * g], r: vec![T::zero(); g * g] };
    for j in 0..g {
        for k in 0..g {
            pm.q[j * g + k] = -contour_integral(b.alpha(k), |p| b.d_u_alpha(j, p).star())?;
            pm.p[j * g + k] = -contour_integral(b.beta(k), |p| b.d_u_beta(j, p).star())?;
            pm.r[j * g + k] = contour_integral(b.alpha(k), |p| b.d_u_beta(j, p).star())?;
        }
    }
    Ok(pm)
}

/// `(*dU_alpha, *dU_beta)` at `p` from the block relation.
pub fn star_basis_transform<T: Real>(
    b: &HarmonicBasis<T>,
    pm: &PeriodMatrix<T>,
    p: &ChartPoint<T>,
) -> (Vec<Covector<T>>, Vec<Covector<T>>) {
    let g = b.genus();
    let zero = Covector::default();
    let star_alpha = (0..g)
        .map(|j| {
            (0..g).fold(zero, |acc, l| acc + b.d_u_alpha(l, p).scale(pm.r(l, j)) + b.d_u_beta(l, p).scale(pm.q(j, l)))
        })
        .collect();
    let star_beta = (0..g)
        .map(|j| {
            (0..g).fold(zero, |acc, l| acc - b.d_u_alpha(l, p).scale(pm.p(j, l)) - b.d_u_beta(l, p).scale(pm.r(j, l)))
        })
        .collect();
    (star_alpha, star_beta)
}

/// `*dG^omega` at `z` for point vortices `(w_k, Gamma_k)`.
pub fn conjugate_green_form<T: Real, M: GreenModel<T> + ?Sized>(
    m: &M,
    vortices: &[(ChartPoint<T>, T)],
    z: &ChartPoint<T>,
) -> Covector<T> {
    let c = vortices.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (w, g)| acc + m.dz(z, w) * *g);
    Covector::from_im_dz(c)
}

/// `(oint_alpha *dG^omega, oint_beta *dG^omega)`.
pub fn conjugate_green_periods<T: Real, M: GreenModel<T> + ?Sized>(
    m: &M,
    b: &HarmonicBasis<T>,
    vortices: &[(ChartPoint<T>, T)],
) -> Result<(Vec<T>, Vec<T>)> {
    for (index, (w, _)) in vortices.iter().enumerate() {
        let clearance = b.clearance(w);
        if clearance < T::lit(MIN_CLEARANCE) {
            return Err(VortexError::VortexOnCycle { index, clearance: clearance.as_f64() });
        }
    }
    let g = b.genus();
    let mut pa = Vec::with_capacity(g);
    let mut pb = Vec::with_capacity(g);
    for j in 0..g {
        pa.push(contour_integral(b.alpha(j), |z| conjugate_green_form(m, vortices, z))?);
        pb.push(contour_integral(b.beta(j), |z| conjugate_green_form(m, vortices, z))?);
    }
    Ok((pa, pb))
}
