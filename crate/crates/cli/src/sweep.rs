//! Transferability sweeps and the window-averaged figure of merit.
//!
//! A sweep fixes a control strategy and scans the assumed frequency over a
//! grid covering one period 2π/T around the training point: fixed pulses are
//! simply re-propagated at each ω₀, while a policy regenerates its sequence
//! from the trained network inside each ω₀'s environment and keeps the best
//! of `trials` rollouts.

use anyhow::{bail, Result};
use qfi_control::dynamics::{propagate, PulseSchedule, Scenario};
use qfi_control::fisher::{qfi, EIGEN_CUTOFF};
use qfi_control::neural::NetParams;
use qfi_control::trainer::evaluate;
use rayon::prelude::*;

/// How the sequence under test is produced at each grid point.
pub enum SweepMode {
    /// Re-propagate one fixed schedule (designed at ω₀ = 1).
    FixedPulse(PulseSchedule),
    /// Best of `trials` stochastic rollouts from a trained network.
    PolicyRollout { params: NetParams, trials: usize },
}

pub struct SweepSpec {
    /// Strictly increasing, non-empty frequency grid.
    pub omega_grid: Vec<f64>,
    pub mode: SweepMode,
    /// Template scenario; each grid point evaluates `with_omega0`.
    pub scenario: Scenario,
    pub seed: u64,
}

/// One (ω₀, F(T)/T) row per grid point.
pub struct SweepResult {
    pub rows: Vec<(f64, f64)>,
}

/// Default grid: `n` evenly spaced points spanning [1 − π/T, 1 + π/T].
pub fn omega_grid(total_time: f64, n: usize) -> Vec<f64> {
    let span = std::f64::consts::PI / total_time;
    (0..n)
        .map(|i| 1.0 - span + 2.0 * span * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

fn fixed_pulse_f_over_t(scenario: &Scenario, schedule: &PulseSchedule) -> Result<f64> {
    let trajectory = propagate(scenario, schedule)?;
    let last = trajectory.last().unwrap();
    Ok(qfi(&last.rho, &last.drho, EIGEN_CUTOFF)? / scenario.total_time)
}

/// Evaluate F(T)/T across the grid.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.omega_grid.is_empty() {
        bail!("empty frequency grid");
    }
    if !spec.omega_grid.windows(2).all(|w| w[1] > w[0]) {
        bail!("frequency grid must be strictly increasing");
    }
    let rows: Result<Vec<(f64, f64)>> = spec
        .omega_grid
        .par_iter()
        .enumerate()
        .map(|(i, &omega0)| {
            let scenario = spec.scenario.with_omega0(omega0);
            let f_over_t = match &spec.mode {
                SweepMode::FixedPulse(schedule) => fixed_pulse_f_over_t(&scenario, schedule)?,
                SweepMode::PolicyRollout { params, trials } => {
                    // decorrelated, grid-stable seed per point
                    let seed = spec.seed.wrapping_add((i as u64).wrapping_mul(0x9E3779B97F4A7C15));
                    evaluate(params, &scenario, *trials, seed)?.1
                }
            };
            Ok((omega0, f_over_t))
        })
        .collect();
    Ok(SweepResult { rows: rows? })
}

/// Average F(T)/T over ω₀ ∈ [1 − Δω, 1 + Δω] by the trapezoidal rule, with
/// linear interpolation at the window edges.
pub fn average_f_over_t(result: &SweepResult, delta_omega: f64) -> Result<f64> {
    if !(delta_omega > 0.0) {
        bail!("delta_omega must be > 0");
    }
    let lo = 1.0 - delta_omega;
    let hi = 1.0 + delta_omega;
    let rows = &result.rows;
    if rows.is_empty() {
        bail!("empty sweep result");
    }
    let (first, last) = (rows[0].0, rows[rows.len() - 1].0);
    if lo < first - 1e-12 || hi > last + 1e-12 {
        bail!("window [{lo}, {hi}] exceeds the grid span [{first}, {last}]");
    }

    let value_at = |x: f64| -> f64 {
        // first knot at or above x
        let i = rows.partition_point(|(w, _)| *w < x).clamp(1, rows.len() - 1);
        let (x0, y0) = rows[i - 1];
        let (x1, y1) = rows[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };

    let mut knots = vec![(lo, value_at(lo))];
    knots.extend(rows.iter().copied().filter(|(w, _)| *w > lo && *w < hi));
    knots.push((hi, value_at(hi)));

    let integral: f64 =
        knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    Ok(integral / (2.0 * delta_omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qfi_control::fisher::baseline;
    use qfi_control::presets::by_name;

    #[test]
    fn grid_spans_one_period() {
        let grid = omega_grid(5.0, 121);
        assert_eq!(grid.len(), 121);
        let span = std::f64::consts::PI / 5.0;
        assert!((grid[0] - (1.0 - span)).abs() < 1e-12);
        assert!((grid[120] - (1.0 + span)).abs() < 1e-12);
        assert!((grid[60] - 1.0).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_schedule_sweep_reproduces_no_control_curve() {
        let scenario = by_name("dephasing-dt1").unwrap();
        let spec = SweepSpec {
            omega_grid: omega_grid(10.0, 9),
            mode: SweepMode::FixedPulse(scenario.zero_schedule().unwrap()),
            scenario: scenario.clone(),
            seed: 0,
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 9);
        for &(omega0, f_over_t) in &result.rows {
            let table = baseline(&scenario.with_omega0(omega0)).unwrap();
            assert!((f_over_t - table.final_f_over_t()).abs() < 1e-12);
        }
    }

    #[test]
    fn design_point_is_self_consistent() {
        // the grid point at the schedule's design ω₀ reproduces a direct
        // evaluation exactly
        let scenario = by_name("dephasing-dt1").unwrap();
        let schedule = PulseSchedule::new(
            vec![[1.0, -0.5, 0.3]; 10],
            1.0,
            qfi_control::dynamics::PulseShape::Square,
        )
        .unwrap();
        let direct = fixed_pulse_f_over_t(&scenario, &schedule).unwrap();
        let spec = SweepSpec {
            omega_grid: vec![0.8, 1.0, 1.2],
            mode: SweepMode::FixedPulse(schedule),
            scenario,
            seed: 0,
        };
        let result = run_sweep(&spec).unwrap();
        assert!((result.rows[1].1 - direct).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let scenario = by_name("dephasing-dt1").unwrap();
        let mode = SweepMode::FixedPulse(scenario.zero_schedule().unwrap());
        let spec = SweepSpec { omega_grid: vec![], mode, scenario: scenario.clone(), seed: 0 };
        assert!(run_sweep(&spec).is_err());
        let mode = SweepMode::FixedPulse(scenario.zero_schedule().unwrap());
        let spec =
            SweepSpec { omega_grid: vec![1.0, 0.9], mode, scenario: scenario.clone(), seed: 0 };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn average_of_constant_curve_is_constant() {
        let rows: Vec<(f64, f64)> = omega_grid(5.0, 21).into_iter().map(|w| (w, 3.5)).collect();
        let result = SweepResult { rows };
        for dw in [0.05, 0.2, 0.4, 0.6] {
            let avg = average_f_over_t(&result, dw).unwrap();
            assert!((avg - 3.5).abs() < 1e-12);
        }
    }

    #[test]
    fn average_of_linear_curve_cancels_odd_part() {
        // symmetric window around 1: linear-in-ω parts integrate away
        let rows: Vec<(f64, f64)> =
            omega_grid(5.0, 41).into_iter().map(|w| (w, 2.0 + 5.0 * (w - 1.0))).collect();
        let result = SweepResult { rows };
        let avg = average_f_over_t(&result, 0.4).unwrap();
        assert!((avg - 2.0).abs() < 1e-12);
    }

    #[test]
    fn average_degenerate_window_converges_to_center_value() {
        let rows: Vec<(f64, f64)> =
            omega_grid(5.0, 121).into_iter().map(|w| (w, (3.0 * w).sin() + 2.0)).collect();
        let result = SweepResult { rows };
        let center = (3.0f64).sin() + 2.0;
        let avg = average_f_over_t(&result, 0.005).unwrap();
        assert!((avg - center).abs() < 1e-4);
    }

    #[test]
    fn average_is_monotone_under_pointwise_domination() {
        let grid = omega_grid(5.0, 31);
        let low: Vec<(f64, f64)> = grid.iter().map(|&w| (w, 1.0 + (7.0 * w).cos().abs())).collect();
        let high: Vec<(f64, f64)> = low.iter().map(|&(w, v)| (w, v + 0.3)).collect();
        for dw in [0.1, 0.3, 0.5] {
            let a = average_f_over_t(&SweepResult { rows: high.clone() }, dw).unwrap();
            let b = average_f_over_t(&SweepResult { rows: low.clone() }, dw).unwrap();
            assert!(a > b);
        }
    }

    #[test]
    fn average_rejects_window_beyond_grid() {
        let rows: Vec<(f64, f64)> = omega_grid(5.0, 11).into_iter().map(|w| (w, 1.0)).collect();
        let result = SweepResult { rows };
        assert!(average_f_over_t(&result, 0.7).is_err());
    }
}
