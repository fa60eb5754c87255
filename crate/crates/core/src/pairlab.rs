//! Vortex pairs, the dipole limit, and the geodesic-deviation experiment.
//!
//! A pair `w1 = w + u`, `w2 = w - u` with strengths `+Gamma_1`, `-Gamma_1`
//! travels roughly perpendicular to `u` with speed `Gamma_1 / (4 pi |u| lambda)`.
//! As `|u| -> 0` the center `w` follows a geodesic; [`kimura_deviation`]
//! measures how far it strays for a sweep of separations.

use num_complex::Complex;
use rayon::prelude::*;

use crate::connections::HolomorphicMap;
use crate::diff;
use crate::dynamics::{integrate, vortex_velocities, IntegratorOptions, PhaseState, Trajectory, Vortex, VortexModel};
use crate::error::{Result, VortexError};
use crate::greens::{regular_coeffs, GreenModel, COINCIDENCE};
use crate::homology::Covector;
use crate::scalar::{wrap_angle, Real};
use crate::surface::{geodesic_integrate, geodesic_residual, metric_density, ChartPoint, GeodesicState, Surface};

/// Center `w = (w1 + w2) / 2` and arrow `u = (w1 - w2) / 2` in the chart of `w1`.
pub fn center_arrow<T: Real>(
    s: &dyn Surface<T>,
    w1: &ChartPoint<T>,
    w2: &ChartPoint<T>,
) -> Result<(ChartPoint<T>, Complex<T>)> {
    let d = s.relative(w2, w1).ok_or_else(|| VortexError::InvalidArgument("pair has no common chart".into()))?;
    let half = T::lit(0.5);
    Ok((ChartPoint::new(w1.chart, w1.z + d * half), -d * half))
}

/// Velocity `v` at `p`, re-expressed in the chart `target`.
fn velocity_in<T: Real>(
    s: &dyn Surface<T>,
    p: &ChartPoint<T>,
    v: Complex<T>,
    target: &ChartPoint<T>,
) -> Result<Complex<T>> {
    if p.chart == target.chart {
        return Ok(v);
    }
    let m = s
        .transition(p.chart, target.chart)
        .ok_or_else(|| VortexError::InvalidArgument("no transition between charts".into()))?;
    Ok(m.d1(p.z) * v)
}

/// One row of [`PairDiagnostics`].
#[derive(Clone, Copy, Debug)]
pub struct PairSample<T> {
    pub t: T,
    pub center: ChartPoint<T>,
    pub arrow: Complex<T>,
    /// `|u| lambda(w)`.
    pub arrow_metric: T,
    /// `arg u - arg dw/dt`, wrapped to `(-pi, pi]`.
    pub angle: T,
}

#[derive(Clone, Debug)]
pub struct PairDiagnostics<T> {
    pub samples: Vec<PairSample<T>>,
    /// Geodesic residual of the center path in the sampling parameter
    /// (`None` with fewer than five samples).
    pub center_residual: Option<T>,
}

impl<T: Real> PairDiagnostics<T> {
    /// `max |(|u| lambda)(t) / (|u| lambda)(0) - 1|`.
    pub fn arrow_metric_drift(&self) -> T {
        let Some(first) = self.samples.first() else { return T::zero() };
        self.samples.iter().fold(T::zero(), |m, s| m.max((s.arrow_metric / first.arrow_metric - T::one()).abs()))
    }

    /// `max |angle - sign(Gamma_1) pi / 2|`.
    pub fn angle_defect(&self, gamma1: T) -> T {
        let target = T::FRAC_PI_2() * gamma1.signum();
        self.samples.iter().fold(T::zero(), |m, s| m.max(wrap_angle(s.angle - target).abs()))
    }
}

fn pair_sample<T: Real>(sys: &VortexModel<'_, T>, st: &PhaseState<T>) -> Result<PairSample<T>> {
    let s = sys.surface();
    let (p1, p2) = (&st.vortices[0].position, &st.vortices[1].position);
    let (center, arrow) = center_arrow(s, p1, p2)?;
    let v = vortex_velocities(sys, st)?;
    let v2 = velocity_in(s, p2, v[1], p1)?;
    let dw = (v[0] + v2) * T::lit(0.5);
    if dw.norm() <= T::min_positive_value() {
        return Err(VortexError::VanishingVelocity(0));
    }
    Ok(PairSample {
        t: st.t,
        center,
        arrow,
        arrow_metric: arrow.norm() * metric_density(s, &center)?,
        angle: wrap_angle(arrow.arg() - dw.arg()),
    })
}

/// Pair invariants along a two-vortex trajectory with strengths `+-Gamma_1`.
pub fn pair_diagnostics<T: Real>(sys: &VortexModel<'_, T>, traj: &Trajectory<T>) -> Result<PairDiagnostics<T>> {
    let first = traj.samples.first().ok_or_else(|| VortexError::InvalidArgument("empty trajectory".into()))?;
    let v = &first.state.vortices;
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.strength.abs()));
    if v.len() != 2 || (v[0].strength + v[1].strength).abs() > T::epsilon() * T::lit(8.0) * scale {
        return Err(VortexError::InvalidArgument(
            "pair diagnostics need exactly two vortices of strengths +-Gamma_1".into(),
        ));
    }
    let mut samples = Vec::with_capacity(traj.samples.len());
    for smp in &traj.samples {
        let sys_here = VortexModel { green: sys.green, basis: basis_at(traj, smp, sys), periods: sys.periods.clone() };
        samples.push(pair_sample(&sys_here, &smp.state).map_err(|e| match e {
            VortexError::VanishingVelocity(_) => VortexError::VanishingVelocity(samples.len()),
            other => other,
        })?);
    }
    let centers: Vec<_> = samples.iter().map(|s| s.center).collect();
    let center_residual = if centers.len() >= 5 {
        let dt = (samples[1].t - samples[0].t).abs();
        Some(geodesic_residual(sys.surface(), &centers, dt)?)
    } else {
        None
    };
    Ok(PairDiagnostics { samples, center_residual })
}

fn basis_at<T: Real>(
    traj: &Trajectory<T>,
    smp: &crate::dynamics::Sample<T>,
    sys: &VortexModel<'_, T>,
) -> crate::homology::HarmonicBasis<T> {
    match (smp.cycle_offsets.first(), sys.surface().period_lattice()) {
        (Some(&(ta, sb)), Some(tau)) => {
            crate::homology::HarmonicBasis::torus(tau, ta, sb).unwrap_or_else(|_| traj.basis.clone())
        }
        _ => traj.basis.clone(),
    }
}

/// Setup of a separation sweep.
#[derive(Clone)]
pub struct PairRun<'a, T> {
    pub model: VortexModel<'a, T>,
    pub center: ChartPoint<T>,
    /// Unit direction of the arrow; magnitudes come from `epsilons`.
    pub direction: Complex<T>,
    pub gamma1: T,
    pub epsilons: Vec<T>,
    /// Step in the rescaled time `t' = t / epsilon`.
    pub dt: T,
    /// Metric length of the compared stretch of path.
    pub window: T,
    /// Arc-length step of the reference geodesic.
    pub geodesic_step: T,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<'a, T: Real> PairRun<'a, T> {
    pub fn new(
        model: VortexModel<'a, T>,
        center: ChartPoint<T>,
        direction: Complex<T>,
        gamma1: T,
        epsilons: Vec<T>,
    ) -> Self {
        let g = model.genus();
        Self {
            model,
            center,
            direction,
            gamma1,
            epsilons,
            dt: T::lit(1e-3),
            window: T::one(),
            geodesic_step: T::lit(1e-3),
            a: vec![T::zero(); g],
            b: vec![T::zero(); g],
        }
    }

    fn validate(&self) -> Result<()> {
        if (self.direction.norm() - T::one()).abs() > T::lit(1e-12) {
            return Err(VortexError::InvalidArgument("pair direction must be a unit vector".into()));
        }
        if self.gamma1 == T::zero() {
            return Err(VortexError::InvalidArgument("pair strength must be nonzero".into()));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > T::zero())) {
            return Err(VortexError::InvalidArgument("separations must be positive".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(VortexError::InvalidArgument("separations must be decreasing".into()));
        }
        Ok(())
    }

    /// Initial state for separation `eps`.
    pub fn initial_state(&self, eps: T) -> PhaseState<T> {
        let u = self.direction * eps;
        let w = self.center;
        PhaseState::new(
            vec![
                Vortex::new(ChartPoint::new(w.chart, w.z + u), self.gamma1),
                Vortex::new(ChartPoint::new(w.chart, w.z - u), -self.gamma1),
            ],
            self.a.clone(),
            self.b.clone(),
        )
    }
}

/// One line of the deviation table.
#[derive(Clone, Copy, Debug)]
pub struct KimuraRow<T> {
    pub epsilon: T,
    /// Largest metric distance between center path and geodesic at equal arc length.
    pub deviation: T,
    pub arrow_metric_drift: T,
    pub angle_defect: T,
    /// Geodesic residual of the center path in rescaled time.
    pub center_residual: T,
}

/// Position of `g` expressed near `base` (same chart, or via the transition map).
fn state_near<T: Real>(
    s: &dyn Surface<T>,
    g: &GeodesicState<T>,
    base: &ChartPoint<T>,
) -> Result<(Complex<T>, Complex<T>)> {
    if g.position.chart == base.chart {
        let d = s
            .relative(&g.position, base)
            .ok_or_else(|| VortexError::InvalidArgument("geodesic sample off chart".into()))?;
        return Ok((base.z + d, g.velocity));
    }
    let m = s
        .transition(g.position.chart, base.chart)
        .ok_or_else(|| VortexError::InvalidArgument("no transition between charts".into()))?;
    Ok((m.eval(g.position.z), m.d1(g.position.z) * g.velocity))
}

/// Cubic Hermite interpolation along the reference geodesic at arc length `sigma`.
fn geodesic_at<T: Real>(s: &dyn Surface<T>, path: &[GeodesicState<T>], ds: T, sigma: T) -> Result<ChartPoint<T>> {
    let x = sigma / ds;
    let j = x.floor().to_usize().unwrap_or(0).min(path.len() - 2);
    let tt = x - T::from_usize(j).unwrap();
    let base = path[j].position;
    let (z0, v0) = (base.z, path[j].velocity);
    let (z1, v1) = state_near(s, &path[j + 1], &base)?;
    let (t2, t3) = (tt * tt, tt * tt * tt);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + tt;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    let z = z0 * h00 + v0 * (h10 * ds) + z1 * h01 + v1 * (h11 * ds);
    Ok(ChartPoint::new(base.chart, z))
}

fn kimura_single<T: Real>(run: &PairRun<'_, T>, eps: T) -> Result<KimuraRow<T>> {
    let sys = &run.model;
    let s = sys.surface();
    let st0 = run.initial_state(eps);
    let start = pair_sample(sys, &st0)?;
    let v0 = vortex_velocities(sys, &st0)?;
    let dw0 = (v0[0] + v0[1]) * T::lit(0.5);
    let lam0 = metric_density(s, &run.center)?;
    let speed = dw0.norm() * lam0;
    // physical step and duration; the sweep runs in t' = t / eps
    let dt = run.dt * eps;
    let mut duration = run.window / speed * T::lit(1.25);
    let (traj, arcs) = loop {
        let opts = IntegratorOptions { stride: 1, ..IntegratorOptions::default() };
        let traj = integrate(sys, &st0, dt, duration, opts)?;
        let mut arcs = vec![T::zero()];
        let mut prev: Option<ChartPoint<T>> = None;
        for smp in &traj.samples {
            let c = center_arrow(s, &smp.state.vortices[0].position, &smp.state.vortices[1].position)?.0;
            if let Some(p) = prev {
                let last = *arcs.last().unwrap();
                arcs.push(last + s.distance(&p, &c)?);
            }
            prev = Some(c);
        }
        if *arcs.last().unwrap() >= run.window {
            break (traj, arcs);
        }
        duration *= T::lit(2.0);
    };
    let geo0 = GeodesicState { position: run.center, velocity: dw0 / (dw0.norm() * lam0) };
    let reach = run.window * T::lit(1.05) + run.geodesic_step * T::lit(2.0);
    let geo: Vec<GeodesicState<T>> =
        geodesic_integrate(s, geo0, reach, run.geodesic_step)?.into_iter().map(|g| g.state).collect();

    let mut deviation = T::zero();
    let mut samples = vec![start];
    let mut centers = vec![start.center];
    for (smp, &sigma) in traj.samples.iter().zip(&arcs).skip(1) {
        if sigma > run.window {
            break;
        }
        let basis = basis_at(&traj, smp, sys);
        let here = VortexModel { green: sys.green, basis, periods: sys.periods.clone() };
        let ps = pair_sample(&here, &smp.state)?;
        let g = geodesic_at(s, &geo, run.geodesic_step, sigma)?;
        deviation = deviation.max(s.distance(&ps.center, &g)?);
        centers.push(ps.center);
        samples.push(ps);
    }
    let diag = PairDiagnostics { samples, center_residual: None };
    let center_residual = if centers.len() >= 5 { geodesic_residual(s, &centers, run.dt)? } else { T::nan() };
    Ok(KimuraRow {
        epsilon: eps,
        deviation,
        arrow_metric_drift: diag.arrow_metric_drift(),
        angle_defect: diag.angle_defect(run.gamma1),
        center_residual,
    })
}

/// Deviation of the pair center from the geodesic with the same initial
/// point and direction, for every separation of the sweep.
///
/// Entries run in parallel and are returned in sweep order; the first
/// failing separation is reported with its error.
pub fn kimura_deviation<T: Real>(run: &PairRun<'_, T>) -> Result<Vec<KimuraRow<T>>> {
    run.validate()?;
    run.epsilons
        .par_iter()
        .map(|&eps| kimura_single(run, eps).map_err(|e| VortexError::StepFailure(format!("separation {eps}: {e}"))))
        .collect()
}

/// `q_robin(w) = -6 (d h1 / dw - 2 h2)`, with `d h1 / dw` by central
/// differences of step `1e-4`.
pub fn q_robin<T: Real, M: GreenModel<T> + ?Sized>(m: &M, w: &ChartPoint<T>) -> Result<Complex<T>> {
    let h = T::lit(1e-4);
    let h1 = |d: Complex<T>| regular_coeffs(m, &ChartPoint::new(w.chart, w.z + d)).map(|e| e.h1);
    for probe in [Complex::new(h, T::zero()), Complex::new(T::zero(), h)] {
        h1(probe)?;
        h1(-probe)?;
    }
    let dx = diff::along(|s| h1(Complex::new(s, T::zero())).unwrap_or_default(), 1, h);
    let dy = diff::along(|s| h1(Complex::new(T::zero(), s)).unwrap_or_default(), 1, h);
    let dh1 = (dx - Complex::new(-dy.im, dy.re)) / T::lit(2.0);
    let h2 = regular_coeffs(m, w)?.h2;
    Ok((dh1 - h2 * T::lit(2.0)) * T::lit(-6.0))
}

/// Singular dipole one-form `Im(m dz / (z - w)^2)` at `z`.
pub fn dipole_field<T: Real>(w: &ChartPoint<T>, m: Complex<T>, z: &ChartPoint<T>) -> Result<Covector<T>> {
    if w.chart != z.chart {
        return Err(VortexError::InvalidArgument("dipole and field point must share a chart".into()));
    }
    let d = z.z - w.z;
    if d.norm() < T::lit(COINCIDENCE) {
        return Err(VortexError::Coincident(d.norm().as_f64()));
    }
    Ok(Covector::from_im_dz(m / (d * d)).scale(T::lit(0.5)))
}
