//! The estimation scenarios studied with this workbench.
//!
//! All presets share the probe (|0⟩+|1⟩)/√2, ω₀ = 1, and a dephasing rate of
//! 0.1 (or emission rates γ₊ = 0.1, γ₋ = 0). The Gaussian presets fix the
//! envelope width at ΔT/4 with 20 substeps per segment.

use crate::dynamics::{NoiseModel, PulseShape, Scenario, DEFAULT_GAUSSIAN_SUBSTEPS};
use crate::mat2::{cr, CMat2};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// The probe state (|0⟩+|1⟩)/√2 used throughout.
pub fn probe_plus() -> CMat2 {
    CMat2::new(cr(0.5), cr(0.5), cr(0.5), cr(0.5))
}

/// Dephasing scenario at rate 0.1 along the axis (ϑ, φ = 0).
pub fn dephasing_scenario(vartheta: f64, dt: f64, total_time: f64) -> Scenario {
    Scenario {
        omega0: 1.0,
        noise: NoiseModel::Dephasing { gamma: 0.1, vartheta, phi: 0.0 },
        probe: probe_plus(),
        total_time,
        dt,
        shape: PulseShape::Square,
    }
}

/// Spontaneous-emission scenario with γ₊ = 0.1, γ₋ = 0.
pub fn emission_scenario(dt: f64, total_time: f64) -> Scenario {
    Scenario {
        omega0: 1.0,
        noise: NoiseModel::SpontaneousEmission { gamma_plus: 0.1, gamma_minus: 0.0 },
        probe: probe_plus(),
        total_time,
        dt,
        shape: PulseShape::Square,
    }
}

fn gaussian(mut scenario: Scenario) -> Scenario {
    scenario.shape = PulseShape::Gaussian {
        width: scenario.dt / 4.0,
        substeps: DEFAULT_GAUSSIAN_SUBSTEPS,
    };
    scenario
}

/// Names accepted by [`by_name`].
pub const PRESET_NAMES: &[&str] = &[
    "dephasing-dt01",
    "dephasing-dt1",
    "parallel-dephasing-dt01",
    "parallel-dephasing-dt1",
    "transverse-dephasing-dt01",
    "transverse-dephasing-dt1",
    "emission-dt01",
    "emission-dt1",
    "gaussian-dephasing-dt1",
    "gaussian-emission-dt1",
];

/// Look up a scenario preset.
///
/// Dephasing presets use ϑ = π/4 ("dephasing"), ϑ = 0 ("parallel") or
/// ϑ = π/2 ("transverse") with (ΔT = 0.1, T = 5) or (ΔT = 1, T = 10);
/// emission presets use (ΔT = 0.1, T = 10) or (ΔT = 1, T = 20); the Gaussian
/// presets run at ΔT = 1, T = 10.
pub fn by_name(name: &str) -> Option<Scenario> {
    let sc = match name {
        "dephasing-dt01" => dephasing_scenario(FRAC_PI_4, 0.1, 5.0),
        "dephasing-dt1" => dephasing_scenario(FRAC_PI_4, 1.0, 10.0),
        "parallel-dephasing-dt01" => dephasing_scenario(0.0, 0.1, 5.0),
        "parallel-dephasing-dt1" => dephasing_scenario(0.0, 1.0, 10.0),
        "transverse-dephasing-dt01" => dephasing_scenario(FRAC_PI_2, 0.1, 5.0),
        "transverse-dephasing-dt1" => dephasing_scenario(FRAC_PI_2, 1.0, 10.0),
        "emission-dt01" => emission_scenario(0.1, 10.0),
        "emission-dt1" => emission_scenario(1.0, 20.0),
        "gaussian-dephasing-dt1" => gaussian(dephasing_scenario(FRAC_PI_4, 1.0, 10.0)),
        "gaussian-emission-dt1" => gaussian(emission_scenario(1.0, 10.0)),
        _ => return None,
    };
    Some(sc)
}
