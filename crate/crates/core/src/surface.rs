//! Charted surfaces with a conformal metric `lambda |dz|`, and geodesics.

use num_complex::Complex;

use crate::connections::{HolomorphicMap, Mobius};
use crate::diff;
use crate::error::{Result, VortexError};
use crate::quadrature;
use crate::scalar::{wrap_angle, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChartId(pub u8);

/// A point given by its coordinate in one chart of the atlas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint<T> {
    pub chart: ChartId,
    pub z: Complex<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(chart: ChartId, z: Complex<T>) -> Self {
        Self { chart, z }
    }

    /// Point in chart 0.
    pub fn front(z: Complex<T>) -> Self {
        Self { chart: ChartId(0), z }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self::front(Complex::new(T::lit(x), T::lit(y)))
    }
}

/// Position and chart velocity of a parametrized curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicState<T> {
    pub position: ChartPoint<T>,
    pub velocity: Complex<T>,
}

/// Integration cell used for surface quadrature.
#[derive(Clone, Copy, Debug)]
pub enum Cell<T> {
    /// Disk `|z| <= radius` centred at the chart origin.
    Disk { chart: ChartId, radius: T },
    /// Parallelogram `origin + s e1 + t e2`, `s, t` in `[0, 1]`.
    Parallelogram { chart: ChartId, origin: Complex<T>, e1: Complex<T>, e2: Complex<T> },
}

/// A closed surface described by an atlas of conformal charts.
pub trait Surface<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    fn genus(&self) -> usize;

    /// Metric density in chart coordinates (no domain check).
    fn density(&self, chart: ChartId, z: Complex<T>) -> T;

    /// `2 d/dz log lambda`; finite differences unless overridden.
    fn connection(&self, chart: ChartId, z: Complex<T>) -> Complex<T> {
        diff::d_z(|w| Complex::new(self.density(chart, w).ln(), T::zero()), z) * T::lit(2.0)
    }

    /// Closed-form total area.
    fn volume(&self) -> T;

    fn in_domain(&self, p: &ChartPoint<T>) -> bool;

    /// Transition map carrying chart `from` coordinates into chart `to`.
    fn transition(&self, from: ChartId, to: ChartId) -> Option<Mobius<T>>;

    /// Moves `p` into its preferred chart, returning the map that was applied.
    fn normalize_with_map(&self, p: ChartPoint<T>) -> (ChartPoint<T>, Mobius<T>);

    fn normalize(&self, p: ChartPoint<T>) -> ChartPoint<T> {
        self.normalize_with_map(p).0
    }

    fn in_safe_region(&self, p: &ChartPoint<T>) -> bool;

    /// Coordinate of `p` in `chart`, if finite there.
    fn express_in(&self, p: &ChartPoint<T>, chart: ChartId) -> Option<Complex<T>> {
        if p.chart == chart {
            return Some(p.z);
        }
        let m = self.transition(p.chart, chart)?;
        let den = m.c * p.z + m.d;
        if den.norm() < T::lit(1e-150) {
            return None;
        }
        Some(m.eval(p.z))
    }

    /// Displacement `p - base` in the chart of `base`.
    fn relative(&self, p: &ChartPoint<T>, base: &ChartPoint<T>) -> Option<Complex<T>> {
        self.express_in(p, base.chart).map(|z| z - base.z)
    }

    /// Riemannian distance.
    fn distance(&self, p: &ChartPoint<T>, q: &ChartPoint<T>) -> Result<T>;

    /// Cells that tile the surface once.
    fn cells(&self) -> Vec<Cell<T>>;

    /// Lattice modulus `tau` for surfaces presented as `C / (Z + tau Z)`.
    fn period_lattice(&self) -> Option<Complex<T>> {
        None
    }
}

fn outside<T: Real>(p: &ChartPoint<T>) -> VortexError {
    VortexError::OutsideAtlas { chart: p.chart.0, re: p.z.re.as_f64(), im: p.z.im.as_f64() }
}

/// Metric density at `p`.
pub fn metric_density<T: Real, S: Surface<T> + ?Sized>(s: &S, p: &ChartPoint<T>) -> Result<T> {
    if !s.in_domain(p) {
        return Err(outside(p));
    }
    let l = s.density(p.chart, p.z);
    if l > T::zero() && l.is_finite() {
        Ok(l)
    } else {
        Err(VortexError::InvalidMetric(l.as_f64()))
    }
}

/// The metric connection `r = 2 d/dz log lambda` at `p`.
pub fn r_metric<T: Real, S: Surface<T> + ?Sized>(s: &S, p: &ChartPoint<T>) -> Result<Complex<T>> {
    metric_density(s, p)?;
    Ok(s.connection(p.chart, p.z))
}

/// Integral of `f lambda^2 dx dy` over the surface.
pub fn integrate_over<T: Real, S, F>(s: &S, f: F, tol: T) -> Result<T>
where
    S: Surface<T> + ?Sized,
    F: Fn(&ChartPoint<T>) -> T,
{
    let cells = s.cells();
    let cell_tol = tol / T::from_usize(cells.len().max(1)).unwrap();
    let mut total = T::zero();
    for cell in cells {
        total += match cell {
            Cell::Disk { chart, radius } => quadrature::integrate_2d(
                |r, th| {
                    let p = ChartPoint::new(chart, Complex::from_polar(r, th));
                    let l = s.density(chart, p.z);
                    f(&p) * l * l * r
                },
                (T::zero(), radius),
                (T::zero(), T::TAU()),
                cell_tol,
            )?,
            Cell::Parallelogram { chart, origin, e1, e2 } => {
                let jac = (e1.conj() * e2).im.abs();
                quadrature::integrate_2d(
                    |a, b| {
                        let p = ChartPoint::new(chart, origin + e1 * a + e2 * b);
                        let l = s.density(chart, p.z);
                        f(&p) * l * l * jac
                    },
                    (T::zero(), T::one()),
                    (T::zero(), T::one()),
                    cell_tol,
                )?
            }
        };
    }
    Ok(total)
}

/// Total area by adaptive quadrature over the registered cells.
pub fn volume_by_quadrature<T: Real, S: Surface<T> + ?Sized>(s: &S, tol: T) -> Result<T> {
    integrate_over(s, |_| T::one(), tol)
}

/// Unit sphere in stereographic charts `z` and `1/z`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sphere;

impl Sphere {
    /// Chordal-type invariant `|z - w|^2 / ((1 + |z|^2)(1 + |w|^2))`, valid across charts.
    pub fn chordal_sq<T: Real>(p: &ChartPoint<T>, q: &ChartPoint<T>) -> T {
        let one = T::one();
        if p.chart == q.chart {
            (p.z - q.z).norm_sqr() / ((one + p.z.norm_sqr()) * (one + q.z.norm_sqr()))
        } else {
            // q = 1/zeta in p's chart
            (p.z * q.z - one).norm_sqr() / ((one + p.z.norm_sqr()) * (one + q.z.norm_sqr()))
        }
    }
}

impl<T: Real> Surface<T> for Sphere {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn genus(&self) -> usize {
        0
    }

    fn density(&self, _chart: ChartId, z: Complex<T>) -> T {
        T::lit(2.0) / (T::one() + z.norm_sqr())
    }

    fn connection(&self, _chart: ChartId, z: Complex<T>) -> Complex<T> {
        -z.conj() * T::lit(2.0) / (T::one() + z.norm_sqr())
    }

    fn volume(&self) -> T {
        T::lit(4.0) * T::PI()
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
        if !self.in_domain(p) {
            return Err(outside(p));
        }
        if !self.in_domain(q) {
            return Err(outside(q));
        }
        // tan(d/2) = |z - w| / |1 + z conj(w)|
        let (num, den) = if p.chart == q.chart {
            ((p.z - q.z).norm(), (p.z * q.z.conj() + T::one()).norm())
        } else {
            ((p.z * q.z - T::one()).norm(), (p.z + q.z.conj()).norm())
        };
        Ok(T::lit(2.0) * num.atan2(den))
    }

    fn cells(&self) -> Vec<Cell<T>> {
        vec![Cell::Disk { chart: ChartId(0), radius: T::one() }, Cell::Disk { chart: ChartId(1), radius: T::one() }]
    }
}

/// Flat torus `C / (Z + tau Z)` with a single wrapped chart.
#[derive(Clone, Copy, Debug)]
pub struct FlatTorus<T> {
    tau: Complex<T>,
}

impl<T: Real> FlatTorus<T> {
    pub fn new(tau: Complex<T>) -> Result<Self> {
        if !(tau.im > T::zero()) || !tau.re.is_finite() {
            return Err(VortexError::InvalidArgument(format!("torus modulus must have Im tau > 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn square() -> Self {
        Self { tau: Complex::new(T::zero(), T::one()) }
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    /// Lattice coordinates `(s, t)` with `z = s + t tau`.
    pub fn lattice_coords(&self, z: Complex<T>) -> (T, T) {
        let t = z.im / self.tau.im;
        (z.re - t * self.tau.re, t)
    }

    /// Shortest lattice representative of `d`.
    pub fn minimal_image(&self, d: Complex<T>) -> Complex<T> {
        let n = (d.im / self.tau.im).round();
        let d = d - self.tau * n;
        let d = Complex::new(d.re - d.re.round(), d.im);
        let mut best = d;
        for (i, j) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            let cand = d + Complex::new(T::from_i32(i).unwrap(), T::zero()) + self.tau * T::from_i32(j).unwrap();
            if cand.norm_sqr() < best.norm_sqr() {
                best = cand;
            }
        }
        best
    }
}

impl<T: Real> Surface<T> for FlatTorus<T> {
    fn name(&self) -> &'static str {
        "torus"
    }

    fn genus(&self) -> usize {
        1
    }

    fn density(&self, _chart: ChartId, _z: Complex<T>) -> T {
        T::one()
    }

    fn connection(&self, _chart: ChartId, _z: Complex<T>) -> Complex<T> {
        Complex::new(T::zero(), T::zero())
    }

    fn volume(&self) -> T {
        self.tau.im
    }

    fn in_domain(&self, p: &ChartPoint<T>) -> bool {
        p.chart.0 == 0 && p.z.re.is_finite() && p.z.im.is_finite()
    }

    fn transition(&self, from: ChartId, to: ChartId) -> Option<Mobius<T>> {
        (from.0 == 0 && to.0 == 0).then(Mobius::identity)
    }

    fn normalize_with_map(&self, p: ChartPoint<T>) -> (ChartPoint<T>, Mobius<T>) {
        let (s, t) = self.lattice_coords(p.z);
        let (fs, ft) = (s.floor(), t.floor());
        if fs == T::zero() && ft == T::zero() {
            return (p, Mobius::identity());
        }
        let shift = -(Complex::new(fs, T::zero()) + self.tau * ft);
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let m = Mobius { a: one, b: shift, c: zero, d: one };
        (ChartPoint::new(p.chart, p.z + shift), m)
    }

    fn in_safe_region(&self, p: &ChartPoint<T>) -> bool {
        let (s, t) = self.lattice_coords(p.z);
        s >= T::zero() && s < T::one() && t >= T::zero() && t < T::one()
    }

    fn relative(&self, p: &ChartPoint<T>, base: &ChartPoint<T>) -> Option<Complex<T>> {
        (p.chart.0 == 0 && base.chart.0 == 0).then(|| self.minimal_image(p.z - base.z))
    }

    fn distance(&self, p: &ChartPoint<T>, q: &ChartPoint<T>) -> Result<T> {
        self.relative(p, q).map(|d| d.norm()).ok_or_else(|| outside(p))
    }

    fn cells(&self) -> Vec<Cell<T>> {
        vec![Cell::Parallelogram {
            chart: ChartId(0),
            origin: Complex::new(T::zero(), T::zero()),
            e1: Complex::new(T::one(), T::zero()),
            e2: self.tau,
        }]
    }

    fn period_lattice(&self) -> Option<Complex<T>> {
        Some(self.tau)
    }
}

/// One sample of an integrated geodesic.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicSample<T> {
    pub t: T,
    pub state: GeodesicState<T>,
    /// Metric speed `lambda |z'|`.
    pub speed: T,
}

fn accel<T: Real, S: Surface<T> + ?Sized>(s: &S, chart: ChartId, z: Complex<T>, v: Complex<T>) -> Result<Complex<T>> {
    let p = ChartPoint::new(chart, z);
    let r = r_metric(s, &p).map_err(|e| VortexError::StepFailure(e.to_string()))?;
    Ok(-r * v * v)
}

/// One classical Runge-Kutta step of `z'' = -r(z) z'^2` followed by a chart check.
pub fn geodesic_step<T: Real, S: Surface<T> + ?Sized>(s: &S, g: GeodesicState<T>, dt: T) -> Result<GeodesicState<T>> {
    let ch = g.position.chart;
    let (z, v) = (g.position.z, g.velocity);
    let half = dt / T::lit(2.0);
    let k1 = (v, accel(s, ch, z, v)?);
    let k2 = (v + k1.1 * half, accel(s, ch, z + k1.0 * half, v + k1.1 * half)?);
    let k3 = (v + k2.1 * half, accel(s, ch, z + k2.0 * half, v + k2.1 * half)?);
    let k4 = (v + k3.1 * dt, accel(s, ch, z + k3.0 * dt, v + k3.1 * dt)?);
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let z1 = z + (k1.0 + k2.0 * two + k3.0 * two + k4.0) * (dt / six);
    let v1 = v + (k1.1 + k2.1 * two + k3.1 * two + k4.1) * (dt / six);
    let p1 = ChartPoint::new(ch, z1);
    if !(z1.re.is_finite() && z1.im.is_finite() && v1.re.is_finite() && v1.im.is_finite()) {
        return Err(VortexError::StepFailure("non-finite geodesic state".into()));
    }
    if s.in_safe_region(&p1) {
        return Ok(GeodesicState { position: p1, velocity: v1 });
    }
    let (p2, m) = s.normalize_with_map(p1);
    if !s.in_domain(&p2) {
        return Err(VortexError::StepFailure(format!("no chart available at {z1}")));
    }
    Ok(GeodesicState { position: p2, velocity: m.d1(z1) * v1 })
}

/// Integrates the geodesic equation for time `t_end` with fixed step `dt`
/// (the last step is shortened to land on `t_end`).
pub fn geodesic_integrate<T: Real, S: Surface<T> + ?Sized>(
    s: &S,
    g0: GeodesicState<T>,
    t_end: T,
    dt: T,
) -> Result<Vec<GeodesicSample<T>>> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) {
        return Err(VortexError::InvalidArgument("geodesic integration needs dt > 0 and T >= 0".into()));
    }
    if g0.velocity.norm() == T::zero() {
        return Err(VortexError::InvalidArgument("initial velocity must be nonzero".into()));
    }
    let ratio = t_end / dt;
    let steps = (ratio - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let speed = |g: &GeodesicState<T>| -> Result<T> { Ok(metric_density(s, &g.position)? * g.velocity.norm()) };
    let mut g = GeodesicState { position: s.normalize(g0.position), ..g0 };
    if g.position != g0.position {
        let m = s.normalize_with_map(g0.position).1;
        g.velocity = m.d1(g0.position.z) * g0.velocity;
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(GeodesicSample { t: T::zero(), state: g, speed: speed(&g)? });
    for k in 1..=steps {
        let t = (dt * T::from_usize(k).unwrap()).min(t_end);
        let h = t - dt * T::from_usize(k - 1).unwrap();
        g = geodesic_step(s, g, h)?;
        out.push(GeodesicSample { t, state: g, speed: speed(&g)? });
    }
    Ok(out)
}

/// Integrates, halving `dt` until the residual of the result is below `tol`.
pub fn geodesic_integrate_to_tolerance<T: Real, S: Surface<T> + ?Sized>(
    s: &S,
    g0: GeodesicState<T>,
    t_end: T,
    mut dt: T,
    tol: T,
) -> Result<(Vec<GeodesicSample<T>>, T)> {
    for _ in 0..12 {
        let path = geodesic_integrate(s, g0, t_end, dt)?;
        let pts: Vec<_> = path.iter().map(|g| g.state.position).collect();
        if pts.len() < 5 || geodesic_residual(s, &pts, dt)? <= tol {
            return Ok((path, dt));
        }
        dt /= T::lit(2.0);
    }
    Err(VortexError::NonConvergence { what: "geodesic step halving" })
}

/// Largest value of `|d/dt arg z' + Im(r z')|` over interior samples of a
/// curve sampled at uniform parameter spacing `dt`.
pub fn geodesic_residual<T: Real, S: Surface<T> + ?Sized>(s: &S, path: &[ChartPoint<T>], dt: T) -> Result<T> {
    if path.len() < 5 {
        return Err(VortexError::InvalidArgument("geodesic residual needs at least 5 samples".into()));
    }
    let two_dt = dt * T::lit(2.0);
    let mut worst = T::zero();
    for i in 2..path.len() - 2 {
        let base = path[i];
        let mut local = [Complex::new(T::zero(), T::zero()); 5];
        for (slot, j) in (i - 2..=i + 2).enumerate() {
            let d = s.relative(&path[j], &base).ok_or_else(|| outside(&path[j]))?;
            local[slot] = base.z + d;
        }
        let vel = |c: usize| (local[c + 1] - local[c - 1]) / two_dt;
        let (vm, v0, vp) = (vel(1), vel(2), vel(3));
        let tiny = T::epsilon() * T::lit(1e3);
        if vm.norm() <= tiny || v0.norm() <= tiny || vp.norm() <= tiny {
            return Err(VortexError::VanishingVelocity(i));
        }
        let turn = wrap_angle(vp.arg() - vm.arg()) / two_dt;
        let r = r_metric(s, &base)?;
        worst = worst.max((turn + (r * v0).im).abs());
    }
    Ok(worst)
}
