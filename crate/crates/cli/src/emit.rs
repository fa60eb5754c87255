//! CSV tables and the JSON summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use vortex_core::{GeodesicSample, KimuraRow, Trajectory};

use crate::CliError;

/// A number compared against a declared tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub experiment: String,
    pub surface: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(flatten)]
    pub metrics: BTreeMap<String, Value>,
}

impl Summary {
    pub fn new(experiment: &str, surface: String, checks: Vec<Check>, metrics: BTreeMap<String, Value>) -> Self {
        let tolerances = checks.iter().map(|c| (c.name.clone(), c.tolerance)).collect();
        Self {
            schema: "vortexlab-summary/1",
            experiment: experiment.into(),
            surface,
            pass: checks.iter().all(|c| c.pass),
            checks,
            tolerances,
            metrics,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut f = File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, self).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(f)?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let g = traj.basis.genus();
    let mut header: Vec<String> = ["t", "k", "chart", "x", "y"].map(String::from).to_vec();
    header.extend((1..=g).map(|j| format!("a_{j}")));
    header.extend((1..=g).map(|j| format!("b_{j}")));
    header.push("H".into());
    w.write_record(&header)?;
    for s in &traj.samples {
        for (k, v) in s.state.vortices.iter().enumerate() {
            let mut row = vec![
                num(s.state.t),
                k.to_string(),
                v.position.chart.0.to_string(),
                num(v.position.z.re),
                num(v.position.z.im),
            ];
            row.extend(s.state.a.iter().chain(&s.state.b).map(|x| num(*x)));
            row.push(num(s.hamiltonian));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn kimura_csv(path: &Path, rows: &[KimuraRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epsilon", "deviation", "arrow_metric_drift", "angle_defect"])?;
    for r in rows {
        w.write_record([r.epsilon, r.deviation, r.arrow_metric_drift, r.angle_defect].map(num))?;
    }
    w.flush()?;
    Ok(())
}

pub fn geodesic_csv(path: &Path, path_samples: &[GeodesicSample]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "chart", "x", "y", "speed"])?;
    for g in path_samples {
        let p = g.state.position;
        w.write_record([num(g.t), p.chart.0.to_string(), num(p.z.re), num(p.z.im), num(g.speed)])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of plain numbers under a fixed header.
pub fn table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|x| num(*x)))?;
    }
    w.flush()?;
    Ok(())
}
