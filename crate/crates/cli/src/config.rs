//! Config files (TOML) and their resolution into core types.
//!
//! A config names a scenario either by preset or by explicit fields (explicit
//! fields override the preset), plus optional per-subcommand sections. The
//! fully resolved settings are mirrored into serializable structs so the run
//! manifest can reproduce the invocation exactly.

use anyhow::{bail, Context, Result};
use qfi_control::dynamics::{NoiseModel, PulseShape, Scenario, DEFAULT_GAUSSIAN_SUBSTEPS};
use qfi_control::grape::GrapeConfig;
use qfi_control::mat2::{cr, CMat2};
use qfi_control::presets;
use qfi_control::trainer::{Algorithm, HyperParams, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Top-level config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<ScenarioSection>,
    pub train: Option<TrainSection>,
    pub grape: Option<GrapeSection>,
    pub evaluate: Option<EvaluateSection>,
    pub sweep: Option<SweepSection>,
    pub average: Option<AverageSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: Option<String>,
    pub omega0: Option<f64>,
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    /// Named probe state: "plus" (default), "zero", or "one".
    pub probe: Option<String>,
    pub noise: Option<NoiseSection>,
    pub pulse: Option<PulseSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: String,
    pub gamma: Option<f64>,
    pub vartheta: Option<f64>,
    pub phi: Option<f64>,
    pub gamma_plus: Option<f64>,
    pub gamma_minus: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub shape: String,
    pub width: Option<f64>,
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// "a3c" (default) or "a3c-ppo".
    pub algorithm: Option<String>,
    pub max_epochs: Option<usize>,
    pub n_env: Option<usize>,
    /// Apply the reduced coarse-grid settings on top of the defaults.
    pub dt1_tuning: Option<bool>,
    pub learning_rate: Option<f64>,
    pub alpha: Option<f64>,
    pub entropy_weight: Option<f64>,
    pub max_grad_norm: Option<f64>,
    pub eta: Option<f64>,
    pub c: Option<f64>,
    pub u_max: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_ppo_max: Option<usize>,
    pub hidden: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrapeSection {
    pub learning_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub fd_step: Option<f64>,
    pub init_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub checkpoint: Option<String>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Fixed-pulse schedule JSON (method "grape").
    pub schedule: Option<String>,
    /// Policy checkpoint (method "policy").
    pub checkpoint: Option<String>,
    /// Emit the zero-control reference curve (method "none"). Default true.
    pub include_no_control: Option<bool>,
    pub trials: Option<usize>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageSection {
    /// Path of the sweep CSV to average.
    pub sweep: Option<String>,
    pub delta_omega: Option<Vec<f64>>,
}

// --- resolved, manifest-facing mirrors -------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedScenario {
    pub omega0: f64,
    pub total_time: f64,
    pub dt: f64,
    pub probe: String,
    pub noise: NoiseSection,
    pub pulse: PulseSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedTrain {
    pub algorithm: String,
    pub max_epochs: usize,
    pub n_env: usize,
    pub learning_rate: f64,
    pub alpha: f64,
    pub entropy_weight: f64,
    pub max_grad_norm: f64,
    pub eta: f64,
    pub c: f64,
    pub u_max: f64,
    pub epsilon: Option<f64>,
    pub n_ppo_max: Option<usize>,
    pub hidden: usize,
}

fn probe_by_name(name: &str) -> Result<CMat2> {
    Ok(match name {
        "plus" => presets::probe_plus(),
        "zero" => CMat2::new(cr(1.0), cr(0.0), cr(0.0), cr(0.0)),
        "one" => CMat2::new(cr(0.0), cr(0.0), cr(0.0), cr(1.0)),
        other => bail!("unknown probe '{other}' (expected plus, zero, or one)"),
    })
}

fn noise_from_section(section: &NoiseSection) -> Result<NoiseModel> {
    match section.kind.as_str() {
        "dephasing" => Ok(NoiseModel::Dephasing {
            gamma: section.gamma.unwrap_or(0.1),
            vartheta: section.vartheta.unwrap_or(0.0),
            phi: section.phi.unwrap_or(0.0),
        }),
        "emission" => Ok(NoiseModel::SpontaneousEmission {
            gamma_plus: section.gamma_plus.unwrap_or(0.1),
            gamma_minus: section.gamma_minus.unwrap_or(0.0),
        }),
        other => bail!("unknown noise kind '{other}' (expected dephasing or emission)"),
    }
}

fn noise_to_section(noise: &NoiseModel) -> NoiseSection {
    match *noise {
        NoiseModel::Dephasing { gamma, vartheta, phi } => NoiseSection {
            kind: "dephasing".into(),
            gamma: Some(gamma),
            vartheta: Some(vartheta),
            phi: Some(phi),
            gamma_plus: None,
            gamma_minus: None,
        },
        NoiseModel::SpontaneousEmission { gamma_plus, gamma_minus } => NoiseSection {
            kind: "emission".into(),
            gamma: None,
            vartheta: None,
            phi: None,
            gamma_plus: Some(gamma_plus),
            gamma_minus: Some(gamma_minus),
        },
    }
}

fn pulse_from_section(section: &PulseSection, dt: f64) -> Result<PulseShape> {
    match section.shape.as_str() {
        "square" => Ok(PulseShape::Square),
        "gaussian" => Ok(PulseShape::Gaussian {
            width: section.width.unwrap_or(dt / 4.0),
            substeps: section.substeps.unwrap_or(DEFAULT_GAUSSIAN_SUBSTEPS),
        }),
        other => bail!("unknown pulse shape '{other}' (expected square or gaussian)"),
    }
}

fn pulse_to_section(shape: &PulseShape) -> PulseSection {
    match *shape {
        PulseShape::Square => PulseSection { shape: "square".into(), width: None, substeps: None },
        PulseShape::Gaussian { width, substeps } => PulseSection {
            shape: "gaussian".into(),
            width: Some(width),
            substeps: Some(substeps),
        },
    }
}

/// Build the scenario from a config section: preset first, explicit fields on
/// top.
pub fn resolve_scenario(section: &ScenarioSection) -> Result<(Scenario, ResolvedScenario)> {
    let mut scenario = match &section.preset {
        Some(name) => presets::by_name(name).with_context(|| {
            format!("unknown preset '{name}' (known: {})", presets::PRESET_NAMES.join(", "))
        })?,
        None => {
            let noise = section
                .noise
                .as_ref()
                .context("scenario needs either a preset or an explicit [scenario.noise]")?;
            let dt = section.dt.context("scenario.dt required without a preset")?;
            let total_time =
                section.total_time.context("scenario.total_time required without a preset")?;
            Scenario {
                omega0: 1.0,
                noise: noise_from_section(noise)?,
                probe: presets::probe_plus(),
                total_time,
                dt,
                shape: PulseShape::Square,
            }
        }
    };
    if let Some(w) = section.omega0 {
        scenario.omega0 = w;
    }
    if let Some(t) = section.total_time {
        scenario.total_time = t;
    }
    if let Some(dt) = section.dt {
        scenario.dt = dt;
    }
    let probe_name = section.probe.clone().unwrap_or_else(|| "plus".into());
    scenario.probe = probe_by_name(&probe_name)?;
    if let Some(noise) = &section.noise {
        scenario.noise = noise_from_section(noise)?;
    }
    if let Some(pulse) = &section.pulse {
        scenario.shape = pulse_from_section(pulse, scenario.dt)?;
    }
    scenario.validate().map_err(|e| anyhow::anyhow!("invalid scenario: {e}"))?;

    let resolved = ResolvedScenario {
        omega0: scenario.omega0,
        total_time: scenario.total_time,
        dt: scenario.dt,
        probe: probe_name,
        noise: noise_to_section(&scenario.noise),
        pulse: pulse_to_section(&scenario.shape),
    };
    Ok((scenario, resolved))
}

/// Build the train config: algorithm defaults, optional coarse-grid tuning,
/// explicit overrides, then CLI flags (handled by the caller).
pub fn resolve_train(
    scenario: Scenario,
    section: &TrainSection,
    seed: u64,
) -> Result<(TrainConfig, ResolvedTrain)> {
    let algo_name = section.algorithm.clone().unwrap_or_else(|| "a3c".into());
    let mut algorithm = match algo_name.as_str() {
        "a3c" => Algorithm::PlainA3C,
        "a3c-ppo" => TrainConfig::ppo_default_algorithm(),
        other => bail!("unknown algorithm '{other}' (expected a3c or a3c-ppo)"),
    };
    let mut hyper = match algorithm {
        Algorithm::PlainA3C => HyperParams::a3c_defaults(),
        Algorithm::A3cPpo { .. } => HyperParams::ppo_defaults(),
    };
    if section.dt1_tuning.unwrap_or(false) {
        hyper = hyper.dt1_reduced();
        if let Algorithm::A3cPpo { ref mut n_ppo_max, .. } = algorithm {
            *n_ppo_max = 5;
        }
    }
    if let Some(v) = section.learning_rate {
        hyper.learning_rate = v;
    }
    if let Some(v) = section.alpha {
        hyper.alpha = v;
    }
    if let Some(v) = section.entropy_weight {
        hyper.entropy_weight = v;
    }
    if let Some(v) = section.max_grad_norm {
        hyper.max_grad_norm = v;
    }
    if let Some(v) = section.eta {
        hyper.reward.eta = v;
    }
    if let Some(v) = section.c {
        hyper.reward.c = v;
    }
    if let Some(v) = section.u_max {
        hyper.u_max = v;
    }
    if let Algorithm::A3cPpo { ref mut epsilon, ref mut n_ppo_max } = algorithm {
        if let Some(v) = section.epsilon {
            *epsilon = v;
        }
        if let Some(v) = section.n_ppo_max {
            *n_ppo_max = v;
        }
    }

    let mut config = TrainConfig::new(scenario, algorithm);
    config.hyper = hyper;
    config.seed = seed;
    if let Some(v) = section.max_epochs {
        config.max_epochs = v;
    }
    if let Some(v) = section.n_env {
        config.n_env = v;
    }
    if let Some(v) = section.hidden {
        config.net.hidden = v;
    }

    let (epsilon, n_ppo_max) = match config.algorithm {
        Algorithm::PlainA3C => (None, None),
        Algorithm::A3cPpo { epsilon, n_ppo_max } => (Some(epsilon), Some(n_ppo_max)),
    };
    let resolved = ResolvedTrain {
        algorithm: algo_name,
        max_epochs: config.max_epochs,
        n_env: config.n_env,
        learning_rate: config.hyper.learning_rate,
        alpha: config.hyper.alpha,
        entropy_weight: config.hyper.entropy_weight,
        max_grad_norm: config.hyper.max_grad_norm,
        eta: config.hyper.reward.eta,
        c: config.hyper.reward.c,
        u_max: config.hyper.u_max,
        epsilon,
        n_ppo_max,
        hidden: config.net.hidden,
    };
    Ok((config, resolved))
}

/// Build the GRAPE config from its section plus the seed flag.
pub fn resolve_grape(section: &GrapeSection, seed: u64) -> GrapeConfig {
    let mut config = GrapeConfig { seed, ..GrapeConfig::default() };
    if let Some(v) = section.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = section.iterations {
        config.iterations = v;
    }
    if let Some(v) = section.fd_step {
        config.fd_step = v;
    }
    if let Some(v) = section.init_scale {
        config.init_scale = v;
    }
    config
}
