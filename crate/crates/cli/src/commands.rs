//! One driver function per subcommand.
//!
//! Every command reads a config file, writes its outputs plus a run manifest
//! into `--out`, and prints a one-line summary to stdout.

use crate::config::{self, FileConfig};
use crate::output::{self, Manifest};
use crate::sweep::{average_f_over_t, omega_grid, run_sweep, SweepMode, SweepResult, SweepSpec};
use anyhow::{bail, Context, Result};
use qfi_control::fisher::baseline;
use qfi_control::grape;
use qfi_control::trainer::{checkpoint_load, checkpoint_save, evaluate, train};
use serde_json::json;
use std::path::{Path, PathBuf};

/// Flags shared by all subcommands.
pub struct CommonArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub workers: Option<usize>,
    pub deterministic: bool,
    pub trials: Option<usize>,
    pub grid: Option<usize>,
    pub delta_omega: Vec<f64>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<FileConfig> {
        FileConfig::load(&self.config)
    }

    fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.out.join(name), contents)
            .with_context(|| format!("writing {name}"))
    }
}

fn scenario_section(config: &FileConfig) -> Result<&config::ScenarioSection> {
    config.scenario.as_ref().context("config needs a [scenario] section")
}

/// `baseline`: tabulate the no-control QFI per segment boundary.
pub fn baseline_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let (scenario, resolved) = config::resolve_scenario(scenario_section(&config)?)?;
    let table = baseline(&scenario)?;
    let rows: Vec<(f64, f64, f64)> = (1..=table.len())
        .map(|j| {
            let t = scenario.dt * j as f64;
            let f = table.at_step(j);
            (t, f, f / t)
        })
        .collect();
    args.prepare_out()?;
    args.write("baseline.csv", &output::baseline_csv(&rows))?;
    Manifest {
        subcommand: "baseline",
        seed: args.seed,
        workers: None,
        deterministic: args.deterministic,
        trials: None,
        grid: None,
        delta_omega: None,
        config: json!({ "scenario": resolved }),
        outputs: vec!["baseline.csv".into()],
    }
    .write(&args.out)?;
    println!("baseline: F0(T)/T = {} over {} steps", table.final_f_over_t(), table.len());
    Ok(())
}

/// `grape`: gradient ascent at the scenario's ω₀, writing the best schedule.
pub fn grape_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let (scenario, resolved) = config::resolve_scenario(scenario_section(&config)?)?;
    let grape_config = config::resolve_grape(&config.grape.clone().unwrap_or_default(), args.seed);
    let result = grape::optimize(&scenario, &grape_config)?;
    args.prepare_out()?;
    args.write(
        "grape_history.csv",
        &output::grape_history_csv(&result.qfi_history, scenario.total_time),
    )?;
    args.write("schedule.json", &output::schedule_to_json(&result.schedule))?;
    Manifest {
        subcommand: "grape",
        seed: args.seed,
        workers: None,
        deterministic: args.deterministic,
        trials: None,
        grid: None,
        delta_omega: None,
        config: json!({
            "scenario": resolved,
            "grape": {
                "learning_rate": grape_config.learning_rate,
                "iterations": grape_config.iterations,
                "fd_step": grape_config.fd_step,
                "init_scale": grape_config.init_scale,
            },
        }),
        outputs: vec!["grape_history.csv".into(), "schedule.json".into()],
    }
    .write(&args.out)?;
    println!(
        "grape: F(T)/T = {} after {} iterations",
        result.final_qfi.f_over_t(),
        grape_config.iterations
    );
    Ok(())
}

/// `train`: run the actor-critic trainer, writing curve + checkpoint.
pub fn train_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let (scenario, resolved_scenario) = config::resolve_scenario(scenario_section(&config)?)?;
    let (mut train_config, mut resolved_train) =
        config::resolve_train(scenario, &config.train.clone().unwrap_or_default(), args.seed)?;
    if let Some(workers) = args.workers {
        train_config.n_env = workers;
        resolved_train.n_env = workers;
    }
    if args.deterministic {
        train_config.deterministic = true;
        if args.workers.is_none() {
            train_config.n_env = 1;
            resolved_train.n_env = 1;
        }
    }
    let report = train(&train_config).map_err(|e| anyhow::anyhow!("training failed: {e}"))?;
    args.prepare_out()?;
    args.write("learning_curve.csv", &output::curve_csv(&report.learning_curve))?;
    checkpoint_save(
        &args.out.join("checkpoint.ckpt"),
        &report.best_params,
        None,
        report.epochs_run,
    )?;
    Manifest {
        subcommand: "train",
        seed: args.seed,
        workers: Some(train_config.n_env),
        deterministic: args.deterministic,
        trials: None,
        grid: None,
        delta_omega: None,
        config: json!({ "scenario": resolved_scenario, "train": resolved_train }),
        outputs: vec!["learning_curve.csv".into(), "checkpoint.ckpt".into()],
    }
    .write(&args.out)?;
    println!(
        "train: best F(T)/T = {} over {} epochs (no-control baseline {})",
        report.best_metric, report.epochs_run, report.baseline_f_over_t
    );
    Ok(())
}

/// `evaluate`: best-of-N stochastic rollouts from a checkpoint.
pub fn evaluate_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let (scenario, resolved_scenario) = config::resolve_scenario(scenario_section(&config)?)?;
    let section = config.evaluate.clone().unwrap_or_default();
    let ckpt_path = section
        .checkpoint
        .context("config needs [evaluate] checkpoint = \"...\"")?;
    let ckpt_path = resolve_relative(&args.config, &ckpt_path);
    let checkpoint =
        checkpoint_load(&ckpt_path).map_err(|e| anyhow::anyhow!("loading checkpoint: {e}"))?;
    let trials = args.trials.or(section.trials).unwrap_or(100);
    let (schedule, f_over_t) = evaluate(&checkpoint.params, &scenario, trials, args.seed)?;
    args.prepare_out()?;
    args.write("best_schedule.json", &output::schedule_to_json(&schedule))?;
    Manifest {
        subcommand: "evaluate",
        seed: args.seed,
        workers: None,
        deterministic: args.deterministic,
        trials: Some(trials),
        grid: None,
        delta_omega: None,
        config: json!({
            "scenario": resolved_scenario,
            "evaluate": { "checkpoint": ckpt_path.display().to_string(), "trials": trials },
        }),
        outputs: vec!["best_schedule.json".into()],
    }
    .write(&args.out)?;
    println!("evaluate: best F(T)/T = {f_over_t} over {trials} trials");
    Ok(())
}

/// Paths inside a config file are taken relative to the config's directory.
fn resolve_relative(config_path: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// `sweep`: F(T)/T versus ω₀ for each configured method.
pub fn sweep_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let (scenario, resolved_scenario) = config::resolve_scenario(scenario_section(&config)?)?;
    let section = config.sweep.clone().unwrap_or_default();
    let n_grid = args.grid.or(section.grid).unwrap_or(121);
    if n_grid < 2 {
        bail!("grid needs at least 2 points");
    }
    let trials = args.trials.or(section.trials).unwrap_or(100);
    let grid = omega_grid(scenario.total_time, n_grid);

    let mut blocks: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut run = |method: &str, mode: SweepMode| -> Result<()> {
        let spec = SweepSpec {
            omega_grid: grid.clone(),
            mode,
            scenario: scenario.clone(),
            seed: args.seed,
        };
        let SweepResult { rows } = run_sweep(&spec)?;
        blocks.push((method.to_string(), rows));
        Ok(())
    };

    if section.include_no_control.unwrap_or(true) {
        run("none", SweepMode::FixedPulse(scenario.zero_schedule()?))?;
    }
    if let Some(path) = &section.schedule {
        let text = std::fs::read_to_string(resolve_relative(&args.config, path))
            .with_context(|| format!("reading schedule {path}"))?;
        run("grape", SweepMode::FixedPulse(output::schedule_from_json(&text)?))?;
    }
    if let Some(path) = &section.checkpoint {
        let checkpoint = checkpoint_load(&resolve_relative(&args.config, path))
            .map_err(|e| anyhow::anyhow!("loading checkpoint: {e}"))?;
        run("policy", SweepMode::PolicyRollout { params: checkpoint.params, trials })?;
    }
    if blocks.is_empty() {
        bail!("sweep has nothing to do: no no-control curve, schedule, or checkpoint configured");
    }

    args.prepare_out()?;
    args.write("sweep.csv", &output::sweep_csv(&blocks))?;
    Manifest {
        subcommand: "sweep",
        seed: args.seed,
        workers: None,
        deterministic: args.deterministic,
        trials: Some(trials),
        grid: Some(n_grid),
        delta_omega: None,
        config: json!({
            "scenario": resolved_scenario,
            "sweep": {
                "schedule": section.schedule,
                "checkpoint": section.checkpoint,
                "include_no_control": section.include_no_control.unwrap_or(true),
                "trials": trials,
                "grid": n_grid,
            },
        }),
        outputs: vec!["sweep.csv".into()],
    }
    .write(&args.out)?;
    println!(
        "sweep: {} methods x {} grid points -> sweep.csv",
        blocks.len(),
        grid.len()
    );
    Ok(())
}

/// `average`: window-averaged F(T)/T per method from a sweep CSV.
pub fn average_cmd(args: &CommonArgs) -> Result<()> {
    let config = args.load_config()?;
    let section = config.average.clone().unwrap_or_default();
    let sweep_path = section.sweep.context("config needs [average] sweep = \"...\"")?;
    let text = std::fs::read_to_string(resolve_relative(&args.config, &sweep_path))
        .with_context(|| format!("reading sweep CSV {sweep_path}"))?;
    let blocks = output::parse_sweep_csv(&text)?;
    let windows = if !args.delta_omega.is_empty() {
        args.delta_omega.clone()
    } else {
        section.delta_omega.clone().unwrap_or_else(|| vec![0.4])
    };

    let mut rows = Vec::new();
    for &dw in &windows {
        for (method, curve) in &blocks {
            let avg = average_f_over_t(&SweepResult { rows: curve.clone() }, dw)?;
            rows.push((dw, method.clone(), avg));
        }
    }
    args.prepare_out()?;
    args.write("average.csv", &output::average_csv(&rows))?;
    Manifest {
        subcommand: "average",
        seed: args.seed,
        workers: None,
        deterministic: args.deterministic,
        trials: None,
        grid: None,
        delta_omega: Some(windows.clone()),
        config: json!({ "average": { "sweep": sweep_path, "delta_omega": windows } }),
        outputs: vec!["average.csv".into()],
    }
    .write(&args.out)?;
    println!("average: {} rows -> average.csv", rows.len());
    Ok(())
}
