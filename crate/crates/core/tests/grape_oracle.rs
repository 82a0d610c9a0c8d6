//! Higher-order finite-difference oracle for the GRAPE gradient.

use qfi_control::dynamics::{propagate, PulseSchedule, PulseShape, Scenario};
use qfi_control::fisher::{qfi, EIGEN_CUTOFF};
use qfi_control::grape::{optimize, qfi_gradient, GrapeConfig};
use qfi_control::presets::dephasing_scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// F(T) by full propagation — independent of the suffix-product machinery
/// inside `qfi_gradient`.
fn final_qfi(scenario: &Scenario, schedule: &PulseSchedule) -> f64 {
    let trajectory = propagate(scenario, schedule).unwrap();
    let last = trajectory.last().unwrap();
    qfi(&last.rho, &last.drho, EIGEN_CUTOFF).unwrap()
}

/// 4th-order five-point stencil derivative in one amplitude.
fn stencil_derivative(scenario: &Scenario, schedule: &PulseSchedule, j: usize, k: usize) -> f64 {
    let h = 1e-3;
    let eval = |steps: f64| {
        let mut s = schedule.clone();
        s.amplitudes[j][k] += steps * h;
        final_qfi(scenario, &s)
    };
    (-eval(2.0) + 8.0 * eval(1.0) - 8.0 * eval(-1.0) + eval(-2.0)) / (12.0 * h)
}

#[test]
fn gradient_matches_five_point_stencil() {
    let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 0.5, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let amplitudes = (0..6)
        .map(|_| {
            [
                rng.random_range(-2.0..=2.0),
                rng.random_range(-2.0..=2.0),
                rng.random_range(-2.0..=2.0),
            ]
        })
        .collect();
    let schedule = PulseSchedule::new(amplitudes, 0.5, PulseShape::Square).unwrap();

    let grad = qfi_gradient(&scenario, &schedule, 1e-5).unwrap();
    let scale = grad
        .iter()
        .flat_map(|row| row.iter().map(|g| g.abs()))
        .fold(0.0, f64::max);
    for j in 0..6 {
        for k in 0..3 {
            let oracle = stencil_derivative(&scenario, &schedule, j, k);
            let rel = (grad[j][k] - oracle).abs() / oracle.abs().max(1e-4 * scale);
            assert!(
                rel < 1e-4,
                "segment {j} control {k}: grad {:.8e} vs stencil {oracle:.8e}",
                grad[j][k]
            );
        }
    }
}

#[test]
fn gradient_is_small_at_a_converged_optimum() {
    // short horizon, generous iterations: the ascent should stall at an
    // interior stationary point where the gradient nearly vanishes
    let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 0.5, 1.5);
    let config = GrapeConfig { iterations: 400, learning_rate: 0.1, ..GrapeConfig::default() };
    let result = optimize(&scenario, &config).unwrap();
    let grad = qfi_gradient(&scenario, &result.schedule, 1e-5).unwrap();
    let interior_norm: f64 = grad
        .iter()
        .zip(&result.schedule.amplitudes)
        .flat_map(|(g, u)| {
            g.iter().zip(u).filter_map(|(gi, ui)| {
                // amplitudes pinned at the clip bound are allowed to keep a
                // positive ascent direction
                (ui.abs() < 3.999).then(|| gi * gi)
            })
        })
        .sum::<f64>()
        .sqrt();
    assert!(
        interior_norm < 0.05,
        "interior gradient norm {interior_norm:.3e} after {} iterations",
        config.iterations
    );
}
