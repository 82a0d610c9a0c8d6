//! Deterministic file outputs: CSVs, schedule JSON, and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files
//! are lossless and byte-stable for identical inputs.

use anyhow::{bail, Context, Result};
use qfi_control::dynamics::{PulseSchedule, PulseShape};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// CSV schema: t, f, f_over_t.
pub fn baseline_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("t,f,f_over_t\n");
    for (t, f, fot) in rows {
        writeln!(out, "{t},{f},{fot}").unwrap();
    }
    out
}

/// CSV schema: epoch, worker, f_over_t, wall_clock_s.
pub fn curve_csv(points: &[qfi_control::trainer::CurvePoint]) -> String {
    let mut out = String::from("epoch,worker,f_over_t,wall_clock_s\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.epoch, p.worker, p.f_over_t, p.wall_clock_s).unwrap();
    }
    out
}

/// CSV schema: iteration, f, f_over_t.
pub fn grape_history_csv(history: &[f64], total_time: f64) -> String {
    let mut out = String::from("iteration,f,f_over_t\n");
    for (i, f) in history.iter().enumerate() {
        writeln!(out, "{},{},{}", i, f, f / total_time).unwrap();
    }
    out
}

/// CSV schema: omega0, method, f_over_t.
pub fn sweep_csv(blocks: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::from("omega0,method,f_over_t\n");
    for (method, rows) in blocks {
        for (omega0, f_over_t) in rows {
            writeln!(out, "{omega0},{method},{f_over_t}").unwrap();
        }
    }
    out
}

/// Parse a sweep CSV back into per-method curves (first-appearance order).
pub fn parse_sweep_csv(text: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("omega0,method,f_over_t") => {}
        other => bail!("unexpected sweep CSV header: {other:?}"),
    }
    let mut blocks: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let omega0: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .with_context(|| format!("sweep CSV line {}: bad omega0", lineno + 2))?;
        let method = parts
            .next()
            .with_context(|| format!("sweep CSV line {}: missing method", lineno + 2))?
            .to_string();
        let f_over_t: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .with_context(|| format!("sweep CSV line {}: bad f_over_t", lineno + 2))?;
        match blocks.iter_mut().find(|(m, _)| *m == method) {
            Some((_, rows)) => rows.push((omega0, f_over_t)),
            None => blocks.push((method, vec![(omega0, f_over_t)])),
        }
    }
    Ok(blocks)
}

/// CSV schema: delta_omega, method, avg_f_over_t.
pub fn average_csv(rows: &[(f64, String, f64)]) -> String {
    let mut out = String::from("delta_omega,method,avg_f_over_t\n");
    for (dw, method, avg) in rows {
        writeln!(out, "{dw},{method},{avg}").unwrap();
    }
    out
}

// --- schedule JSON ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    dt: f64,
    shape: ShapeFile,
    amplitudes: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ShapeFile {
    Square,
    Gaussian { width: f64, substeps: usize },
}

pub fn schedule_to_json(schedule: &PulseSchedule) -> String {
    let shape = match schedule.shape {
        PulseShape::Square => ShapeFile::Square,
        PulseShape::Gaussian { width, substeps } => ShapeFile::Gaussian { width, substeps },
    };
    serde_json::to_string_pretty(&ScheduleFile {
        dt: schedule.dt,
        shape,
        amplitudes: schedule.amplitudes.clone(),
    })
    .expect("schedule serialization cannot fail")
}

pub fn schedule_from_json(text: &str) -> Result<PulseSchedule> {
    let file: ScheduleFile = serde_json::from_str(text).context("parsing schedule JSON")?;
    let shape = match file.shape {
        ShapeFile::Square => PulseShape::Square,
        ShapeFile::Gaussian { width, substeps } => PulseShape::Gaussian { width, substeps },
    };
    PulseSchedule::new(file.amplitudes, file.dt, shape)
        .map_err(|e| anyhow::anyhow!("invalid schedule: {e}"))
}

// --- run manifest -----------------------------------------------------------

/// Everything needed to reproduce one invocation, written beside its outputs.
pub struct Manifest {
    pub subcommand: &'static str,
    pub seed: u64,
    pub workers: Option<usize>,
    pub deterministic: bool,
    pub trials: Option<usize>,
    pub grid: Option<usize>,
    pub delta_omega: Option<Vec<f64>>,
    /// Fully resolved settings of the sections this subcommand used.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let doc = json!({
            "tool": "qfi-control",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "seed": self.seed,
            "workers": self.workers,
            "deterministic": self.deterministic,
            "trials": self.trials,
            "grid": self.grid,
            "delta_omega": self.delta_omega,
            "config": self.config,
            "outputs": self.outputs,
        });
        let path = out_dir.join("run_manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(path)
    }
}
