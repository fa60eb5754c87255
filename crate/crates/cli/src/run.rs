//! One function per experiment kind.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vortex_core::dynamics::{hamiltonian, integrate};
use vortex_core::greens::regular_coeffs;
use vortex_core::pairlab::kimura_deviation;
use vortex_core::schottky::{boundary_geodesic_residual, boundary_geodesic_residual_with, BoundaryRule};
use vortex_core::surface::{geodesic_integrate, geodesic_residual, integrate_over, metric_density};
use vortex_core::{
    diff, ChartPoint, DiskDouble, FlatTorus, GeodesicState, GreenModel, IntegratorOptions, PairRun, PhaseState, Scheme,
    Sphere, SphereGreen, Surface, TorusGreen, Vortex, VortexModel,
};

use crate::config::{ExperimentConfig, ExperimentKind, SchemeName, SurfaceSpec};
use crate::emit::{self, Check, Summary};
use crate::CliError;

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub seed: Option<u64>,
}

enum Model {
    Sphere(SphereGreen),
    Torus(TorusGreen),
}

impl Model {
    fn build(spec: &SurfaceSpec, purpose: &str) -> Result<Self, CliError> {
        match spec {
            SurfaceSpec::Sphere => Ok(Model::Sphere(SphereGreen::new())),
            SurfaceSpec::Torus { .. } => {
                let tau = spec.tau().expect("torus has a modulus");
                let torus = FlatTorus::new(tau).map_err(|e| CliError::Config(e.to_string()))?;
                Ok(Model::Torus(TorusGreen::new(torus)?))
            }
            SurfaceSpec::DiskDouble => {
                Err(CliError::Config(format!("{purpose} needs a closed-surface Green function: use sphere or torus")))
            }
        }
    }

    fn green(&self) -> &dyn GreenModel<f64> {
        match self {
            Model::Sphere(m) => m,
            Model::Torus(m) => m,
        }
    }
}

fn surface_of(spec: &SurfaceSpec) -> Result<Box<dyn Surface<f64>>, CliError> {
    Ok(match spec {
        SurfaceSpec::Sphere => Box::new(Sphere),
        SurfaceSpec::Torus { .. } => Box::new(
            FlatTorus::new(spec.tau().expect("torus has a modulus")).map_err(|e| CliError::Config(e.to_string()))?,
        ),
        SurfaceSpec::DiskDouble => Box::new(DiskDouble),
    })
}

fn point(xy: [f64; 2]) -> ChartPoint {
    ChartPoint::xy(xy[0], xy[1])
}

fn coords(p: &ChartPoint) -> Value {
    json!([p.chart.0, p.z.re, p.z.im])
}

pub fn run(kind: &ExperimentKind, cfg: &ExperimentConfig, out: &Path, ov: Overrides) -> Result<Summary, CliError> {
    cfg.check_kind(kind)?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", out.display())))?;
    let summary = match kind {
        ExperimentKind::Simulate => simulate(cfg, out, ov)?,
        ExperimentKind::Kimura => kimura(cfg, out, ov)?,
        ExperimentKind::Geodesic => geodesic(cfg, out, ov)?,
        ExperimentKind::GreenCheck => green_check(cfg, out, ov)?,
        ExperimentKind::SchottkyCheck => schottky_check(cfg)?,
    };
    summary.write(out)?;
    Ok(summary)
}

fn simulate(cfg: &ExperimentConfig, out: &Path, ov: Overrides) -> Result<Summary, CliError> {
    let model = Model::build(&cfg.surface, "simulate")?;
    let it = cfg.integrator.clone().ok_or_else(|| CliError::Config("simulate needs an integrator section".into()))?;
    if cfg.vortices.is_empty() {
        return Err(CliError::Config("simulate needs at least one vortex".into()));
    }
    let dt = ov.dt.unwrap_or(it.dt);
    if !(dt > 0.0) {
        return Err(CliError::Config("dt must be positive".into()));
    }
    let sys = VortexModel::new(model.green())?;
    let st = PhaseState::new(
        cfg.vortices.iter().map(|v| Vortex::new(ChartPoint::xy(v[0], v[1]), v[2])).collect(),
        cfg.a(),
        cfg.b(),
    );
    hamiltonian(&sys, &st).map_err(|e| CliError::Config(format!("initial state rejected: {e}")))?;
    let scheme = match it.scheme {
        SchemeName::Rk4 => Scheme::Rk4,
        SchemeName::Midpoint => Scheme::Midpoint,
    };
    let opts = IntegratorOptions { scheme, stride: it.stride, ..IntegratorOptions::default() };
    let traj = integrate(&sys, &st, dt, it.t_end, opts)?;
    emit::trajectory_csv(&out.join("trajectory.csv"), &traj)?;

    let s = sys.surface();
    let mut position_drift = 0.0f64;
    let mut min_sep = f64::INFINITY;
    for smp in &traj.samples {
        min_sep = min_sep.min(smp.min_separation);
        for (v0, v) in st.vortices.iter().zip(&smp.state.vortices) {
            position_drift = position_drift.max(s.distance(&v0.position, &v.position)?);
        }
    }
    let drift = traj.hamiltonian_drift_rel();
    let last = traj.last();
    let mut checks = vec![Check::at_most("hamiltonian_drift_rel", drift, cfg.tolerance("hamiltonian_drift_rel", 1e-8))];
    if let Some(&tol) = cfg.experiment.tolerances.get("max_position_drift") {
        checks.push(Check::at_most("max_position_drift", position_drift, tol));
    }
    let metrics = BTreeMap::from([
        ("hamiltonian_drift_rel".to_string(), json!(drift)),
        ("hamiltonian_initial".into(), json!(traj.samples[0].hamiltonian)),
        ("hamiltonian_final".into(), json!(last.hamiltonian)),
        ("max_position_drift".into(), json!(position_drift)),
        ("min_separation".into(), if min_sep.is_finite() { json!(min_sep) } else { Value::Null }),
        ("dt".into(), json!(dt)),
        ("t_end".into(), json!(it.t_end)),
        ("samples".into(), json!(traj.samples.len())),
        ("cycle_events".into(), json!(traj.events.len())),
        ("final_positions".into(), Value::Array(last.state.vortices.iter().map(|v| coords(&v.position)).collect())),
        ("final_a".into(), json!(last.state.a)),
        ("final_b".into(), json!(last.state.b)),
        ("final_big_a".into(), json!(last.circulation.big_a)),
        ("final_big_b".into(), json!(last.circulation.big_b)),
    ]);
    Ok(Summary::new("simulate", cfg.surface.label(), checks, metrics))
}

/// Largest `next / previous` over consecutive entries, skipping entries
/// below `floor`.
fn worst_ratio(values: &[f64], floor: f64) -> f64 {
    values.windows(2).filter(|w| w[1] > floor).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

fn kimura(cfg: &ExperimentConfig, out: &Path, ov: Overrides) -> Result<Summary, CliError> {
    let model = Model::build(&cfg.surface, "kimura")?;
    let ex = &cfg.experiment;
    let sys = VortexModel::new(model.green())?;
    let epsilons = ex.epsilons.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025]);
    let direction = Complex64::from_polar(1.0, ex.direction.unwrap_or(0.0));
    let mut run =
        PairRun::new(sys, point(ex.center.unwrap_or([0.3, 0.2])), direction, ex.gamma.unwrap_or(2.0 * TAU), epsilons);
    run.a = cfg.a();
    run.b = cfg.b();
    if let Some(dt) = ov.dt.or(ex.dt) {
        run.dt = dt;
    }
    if let Some(w) = ex.window {
        run.window = w;
    }
    let rows = kimura_deviation(&run).map_err(|e| match e {
        vortex_core::VortexError::InvalidArgument(m) => CliError::Config(m),
        other => CliError::Numerical(other),
    })?;
    emit::kimura_csv(&out.join("kimura.csv"), &rows)?;

    let floor = cfg.tolerance("deviation_floor", 1e-9);
    let deviations: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    let angles: Vec<f64> = rows.iter().map(|r| r.angle_defect).collect();
    let drift = rows.iter().fold(0.0f64, |m, r| m.max(r.arrow_metric_drift));
    let angle_tol = cfg.tolerance("angle_defect_ratio", 1.0);
    let angle_ratio = worst_ratio(&angles, floor);
    let checks = vec![
        Check::at_most("deviation_ratio", worst_ratio(&deviations, floor), cfg.tolerance("deviation_ratio", 0.7)),
        Check::at_most("arrow_metric_drift", drift, cfg.tolerance("arrow_metric_drift", 0.05)),
        Check {
            name: "angle_defect_ratio".into(),
            value: angle_ratio,
            tolerance: angle_tol,
            pass: angle_ratio < angle_tol,
        },
    ];
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "epsilon": r.epsilon,
                "deviation": r.deviation,
                "arrow_metric_drift": r.arrow_metric_drift,
                "angle_defect": r.angle_defect,
                "center_residual": r.center_residual,
            })
        })
        .collect();
    let metrics = BTreeMap::from([
        ("rows".to_string(), Value::Array(table)),
        ("deviation_floor".into(), json!(floor)),
        ("rescaled_dt".into(), json!(run.dt)),
        ("window".into(), json!(run.window)),
        ("gamma".into(), json!(run.gamma1)),
    ]);
    let mut summary = Summary::new("kimura", cfg.surface.label(), checks, metrics);
    summary.tolerances.insert("deviation_floor".into(), floor);
    Ok(summary)
}

fn geodesic(cfg: &ExperimentConfig, out: &Path, ov: Overrides) -> Result<Summary, CliError> {
    let s = surface_of(&cfg.surface)?;
    let ex = &cfg.experiment;
    let start = s.normalize(point(ex.center.unwrap_or([0.3, 0.1])));
    if !s.in_domain(&start) {
        return Err(CliError::Config("geodesic start lies outside the atlas".into()));
    }
    let dt = ov.dt.or(ex.dt).unwrap_or(1e-3);
    let t_end = ex.t_end.unwrap_or(TAU);
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(CliError::Config("geodesic needs dt > 0 and t_end > 0".into()));
    }
    let lam = metric_density(s.as_ref(), &start)?;
    let g0 = GeodesicState { position: start, velocity: Complex64::from_polar(1.0 / lam, ex.direction.unwrap_or(0.0)) };
    let path = geodesic_integrate(s.as_ref(), g0, t_end, dt)?;
    emit::geodesic_csv(&out.join("geodesic.csv"), &path)?;

    let speed_drift = path.iter().fold(0.0f64, |m, g| m.max((g.speed - 1.0).abs()));
    // the residual stencil assumes uniform spacing, so the shortened last step is dropped
    let uniform = ((t_end / dt) + 1e-9).floor() as usize + 1;
    let pts: Vec<ChartPoint> = path.iter().take(uniform).map(|g| g.state.position).collect();
    let residual = if pts.len() >= 5 { geodesic_residual(s.as_ref(), &pts, dt)? } else { 0.0 };
    let end = path.last().expect("geodesic has samples").state.position;
    let closure = s.distance(&start, &end)?;
    let mut checks = vec![
        Check::at_most("speed_drift", speed_drift, cfg.tolerance("speed_drift", 1e-8)),
        Check::at_most("geodesic_residual", residual, cfg.tolerance("geodesic_residual", 1e-4)),
    ];
    if let Some(&tol) = ex.tolerances.get("closure") {
        checks.push(Check::at_most("closure", closure, tol));
    }
    let metrics = BTreeMap::from([
        ("speed_drift".to_string(), json!(speed_drift)),
        ("geodesic_residual".into(), json!(residual)),
        ("closure".into(), json!(closure)),
        ("start".into(), coords(&start)),
        ("end".into(), coords(&end)),
        ("dt".into(), json!(dt)),
        ("t_end".into(), json!(t_end)),
    ]);
    Ok(Summary::new("geodesic", cfg.surface.label(), checks, metrics))
}

fn sample_point(spec: &SurfaceSpec, rng: &mut ChaCha8Rng) -> ChartPoint {
    match spec.tau() {
        Some(tau) => ChartPoint::front(tau * rng.gen_range(0.0..1.0) + rng.gen_range(0.0..1.0)),
        None => {
            let u: f64 = rng.gen_range(-0.98..0.98);
            let z = Complex64::from_polar((1.0 - u * u).sqrt(), rng.gen_range(0.0..TAU)) / (1.0 - u);
            Sphere.normalize(ChartPoint::front(z))
        }
    }
}

fn green_check(cfg: &ExperimentConfig, out: &Path, ov: Overrides) -> Result<Summary, CliError> {
    let model = Model::build(&cfg.surface, "green-check")?;
    let m = model.green();
    let s = m.surface();
    let ex = &cfg.experiment;
    let seed = ov.seed.or(ex.seed).unwrap_or(0);
    let n = ex.samples.unwrap_or(20);
    if n == 0 {
        return Err(CliError::Config("green-check needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let (mut sym, mut lap, mut h11) = (0.0f64, 0.0f64, 0.0f64);
    while rows.len() < n {
        let (z, w) = (sample_point(&cfg.surface, &mut rng), sample_point(&cfg.surface, &mut rng));
        if s.distance(&z, &w)? < 0.2 {
            continue;
        }
        let d_sym = (m.value(&z, &w) - m.value(&w, &z)).abs();
        let lam = metric_density(s, &z)?;
        let flat = diff::laplacian(|u| m.value(&ChartPoint::new(z.chart, u), &w), z.z);
        let d_lap = (flat - lam * lam / s.volume()).abs();
        let lw = metric_density(s, &w)?;
        let d_h11 = (regular_coeffs(m, &w)?.h11 - PI * lw * lw / (2.0 * s.volume())).abs();
        sym = sym.max(d_sym);
        lap = lap.max(d_lap);
        h11 = h11.max(d_h11);
        rows.push(vec![z.z.re, z.z.im, w.z.re, w.z.im, d_sym, d_lap, d_h11]);
    }
    emit::table_csv(
        &out.join("green_check.csv"),
        &["z_x", "z_y", "w_x", "w_y", "symmetry_defect", "laplacian_defect", "h11_defect"],
        &rows,
    )?;
    let w = sample_point(&cfg.surface, &mut rng);
    let mean = integrate_over(s, |p| m.value(p, &w), 1e-9)?.abs();
    let checks = vec![
        Check::at_most("symmetry", sym, cfg.tolerance("symmetry", 1e-10)),
        Check::at_most("mean_zero", mean, cfg.tolerance("mean_zero", 1e-6)),
        Check::at_most("laplacian", lap, cfg.tolerance("laplacian", 1e-5)),
        Check::at_most("h11", h11, cfg.tolerance("h11", 1e-4)),
    ];
    let metrics = BTreeMap::from([("seed".to_string(), json!(seed)), ("samples".into(), json!(n))]);
    Ok(Summary::new("green-check", cfg.surface.label(), checks, metrics))
}

fn schottky_check(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    if !matches!(cfg.surface, SurfaceSpec::DiskDouble) {
        return Err(CliError::Config("schottky-check runs on the disk-double surface".into()));
    }
    let n = cfg.experiment.samples.unwrap_or(256);
    let mean = boundary_geodesic_residual::<f64>(n).map_err(|e| CliError::Config(e.to_string()))?;
    let inside = boundary_geodesic_residual_with::<f64>(n, BoundaryRule::Inside)?;
    let outside = boundary_geodesic_residual_with::<f64>(n, BoundaryRule::Outside)?;
    let control_tol = cfg.tolerance("one_sided_control", 1e-3);
    let checks = vec![
        Check::at_most("boundary_residual", mean, cfg.tolerance("boundary_residual", 1e-8)),
        Check::at_most("one_sided_control", (inside - 1.0).abs().max((outside - 1.0).abs()), control_tol),
    ];
    let metrics = BTreeMap::from([
        ("samples".to_string(), json!(n)),
        ("residual_mean_value".into(), json!(mean)),
        ("residual_inside".into(), json!(inside)),
        ("residual_outside".into(), json!(outside)),
    ]);
    Ok(Summary::new("schottky-check", cfg.surface.label(), checks, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_skips_values_below_floor() {
        assert_eq!(worst_ratio(&[1.0, 0.25, 0.5], 1e-9), 2.0);
        assert_eq!(worst_ratio(&[1e-14, 3e-14], 1e-9), 0.0);
        assert_eq!(worst_ratio(&[1.0], 1e-9), 0.0);
    }
}
