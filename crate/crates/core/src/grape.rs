//! Gradient-ascent pulse engineering over square pulses.
//!
//! The figure of merit is the final-time QFI. Gradients are central finite
//! differences of F(T) with respect to every segment amplitude; each
//! perturbed evaluation reuses the unperturbed prefix trajectory and cached
//! suffix propagators, so one gradient costs 6N matrix exponentials instead
//! of 6N full propagations.

use crate::dynamics::{
    augmented_generator, propagate, DensityState, PulseSchedule, PulseShape, Scenario, U_MAX,
};
use crate::fisher::{qfi, QfiValue, EIGEN_CUTOFF};
use crate::mat2::{cr, unvectorize, CMat8, CVec8};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Ascent settings. The paper-facing physics fixes nothing here; these are
/// artifact defaults chosen to separate clearly from the no-control baseline
/// in minutes at desk scale.
#[derive(Debug, Clone)]
pub struct GrapeConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Central-difference step for the gradient.
    pub fd_step: f64,
    pub seed: u64,
    /// Initial amplitudes are uniform in ±init_scale.
    pub init_scale: f64,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        GrapeConfig {
            learning_rate: 0.05,
            iterations: 500,
            fd_step: 1e-5,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(self.fd_step > 0.0) || !self.fd_step.is_finite() {
            return Err(Error::InvalidConfig("fd_step must be > 0".into()));
        }
        if !(self.init_scale >= 0.0) || self.init_scale > U_MAX {
            return Err(Error::InvalidConfig("init_scale must lie in [0, u_max]".into()));
        }
        Ok(())
    }
}

/// Outcome of one ascent run.
#[derive(Debug, Clone)]
pub struct GrapeResult {
    /// Best schedule seen across all iterates.
    pub schedule: PulseSchedule,
    /// Best-so-far F(T) after each iteration; entry 0 is the initial value.
    pub qfi_history: Vec<f64>,
    /// F(T) of the returned schedule; equals the last history entry.
    pub final_qfi: QfiValue,
}

fn final_qfi_of(scenario: &Scenario, schedule: &PulseSchedule) -> Result<f64> {
    let trajectory = propagate(scenario, schedule)?;
    let last = trajectory.last().unwrap();
    qfi(&last.rho, &last.drho, EIGEN_CUTOFF)
}

/// Central finite-difference gradient of F(T) with respect to every
/// amplitude, (F(u + h·e) − F(u − h·e))/2h as an N×3 array.
pub fn qfi_gradient(
    scenario: &Scenario,
    schedule: &PulseSchedule,
    h: f64,
) -> Result<Vec<[f64; 3]>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig("finite-difference step must be > 0".into()));
    }
    if schedule.shape != PulseShape::Square || scenario.shape != PulseShape::Square {
        return Err(Error::ScheduleMismatch(
            "the QFI gradient is defined for square pulses".into(),
        ));
    }
    scenario.validate()?;
    let n = scenario.n_steps();
    if schedule.n_segments() != n {
        return Err(Error::ScheduleMismatch(format!(
            "schedule has {} segments, scenario needs {n}",
            schedule.n_segments()
        )));
    }
    let dt = scenario.dt;

    // unperturbed per-segment propagators and trajectory
    let exps: Vec<CMat8> = schedule
        .amplitudes
        .par_iter()
        .map(|&u| (augmented_generator(scenario, u) * cr(dt)).exp())
        .collect();
    let mut states: Vec<CVec8> = Vec::with_capacity(n + 1);
    states.push(stack_probe(scenario));
    for e in &exps {
        let next = e * states.last().unwrap();
        states.push(next);
    }
    // suffix[j] = E_{N-1}···E_j, so a perturbation at segment j finishes as
    // suffix[j+1]·E'_j·states[j]
    let mut suffix = vec![CMat8::identity(); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] * exps[j];
    }

    let grad: Result<Vec<[f64; 3]>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = [0.0; 3];
            for k in 0..3 {
                let mut f_pm = [0.0; 2];
                for (s, sign) in [1.0, -1.0].into_iter().enumerate() {
                    let mut u = schedule.amplitudes[j];
                    u[k] += sign * h;
                    let e = (augmented_generator(scenario, u) * cr(dt)).exp();
                    let fin = suffix[j + 1] * (e * states[j]);
                    f_pm[s] = qfi_of_stacked(&fin)?;
                }
                row[k] = (f_pm[0] - f_pm[1]) / (2.0 * h);
            }
            Ok(row)
        })
        .collect();
    grad
}

fn stack_probe(scenario: &Scenario) -> CVec8 {
    let s = DensityState::from_probe(&scenario.probe);
    let r = crate::mat2::vectorize(&s.rho);
    let d = crate::mat2::vectorize(&s.drho);
    CVec8::from([r[0], r[1], r[2], r[3], d[0], d[1], d[2], d[3]])
}

fn qfi_of_stacked(v: &CVec8) -> Result<f64> {
    let rho = unvectorize(&v.fixed_rows::<4>(0).into_owned());
    let drho = unvectorize(&v.fixed_rows::<4>(4).into_owned());
    qfi(&rho, &drho, EIGEN_CUTOFF)
}

/// Fixed-step ascent with amplitude clipping and best-iterate tracking.
pub fn optimize(scenario: &Scenario, config: &GrapeConfig) -> Result<GrapeResult> {
    config.validate()?;
    scenario.validate()?;
    if scenario.shape != PulseShape::Square {
        return Err(Error::ScheduleMismatch("GRAPE treats square pulses only".into()));
    }
    let n = scenario.n_steps();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let mut row = [0.0; 3];
            for a in &mut row {
                *a = rng.random_range(-config.init_scale..=config.init_scale);
            }
            row
        })
        .collect();
    let mut current = PulseSchedule::new(init, scenario.dt, PulseShape::Square)?;

    let mut best_f = final_qfi_of(scenario, &current)?;
    let mut best_schedule = current.clone();
    let mut history = Vec::with_capacity(config.iterations + 1);
    history.push(best_f);

    for _ in 0..config.iterations {
        let grad = qfi_gradient(scenario, &current, config.fd_step)?;
        for (row, g) in current.amplitudes.iter_mut().zip(&grad) {
            for k in 0..3 {
                row[k] = (row[k] + config.learning_rate * g[k]).clamp(-U_MAX, U_MAX);
            }
        }
        let f = final_qfi_of(scenario, &current)?;
        if f > best_f {
            best_f = f;
            best_schedule = current.clone();
        }
        history.push(best_f);
    }

    Ok(GrapeResult {
        schedule: best_schedule,
        qfi_history: history,
        final_qfi: QfiValue { f: best_f, t: scenario.total_time },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::dephasing_scenario;

    fn tiny_scenario() -> Scenario {
        // small N keeps gradient tests cheap
        dephasing_scenario(std::f64::consts::FRAC_PI_4, 0.5, 2.5)
    }

    #[test]
    fn gradient_rejects_bad_inputs() {
        let sc = tiny_scenario();
        let schedule = sc.zero_schedule().unwrap();
        assert!(qfi_gradient(&sc, &schedule, 0.0).is_err());
        let mut gauss = sc.clone();
        gauss.shape = PulseShape::Gaussian { width: 0.125, substeps: 4 };
        let gs = gauss.zero_schedule().unwrap();
        assert!(qfi_gradient(&gauss, &gs, 1e-5).is_err());
    }

    #[test]
    fn gradient_u3_vanishes_without_noise() {
        // γ = 0: a σ₃ control commutes with the generator of the ω₀
        // dependence, so F = t² regardless of u₃
        let mut sc = tiny_scenario();
        sc.noise = crate::dynamics::NoiseModel::Dephasing { gamma: 0.0, vartheta: 0.0, phi: 0.0 };
        let schedule = sc.zero_schedule().unwrap();
        let grad = qfi_gradient(&sc, &schedule, 1e-5).unwrap();
        for row in &grad {
            assert!(row[2].abs() < 1e-6, "u3 gradient {}", row[2]);
        }
    }

    #[test]
    fn optimize_zero_iterations_is_noop() {
        let sc = tiny_scenario();
        let config = GrapeConfig { iterations: 0, ..GrapeConfig::default() };
        let result = optimize(&sc, &config).unwrap();
        assert_eq!(result.qfi_history.len(), 1);
        assert_eq!(result.final_qfi.f, result.qfi_history[0]);
        let f = final_qfi_of(&sc, &result.schedule).unwrap();
        assert!((f - result.final_qfi.f).abs() < 1e-12);
    }

    #[test]
    fn optimize_contracts() {
        let sc = tiny_scenario();
        let config = GrapeConfig { iterations: 10, ..GrapeConfig::default() };
        let result = optimize(&sc, &config).unwrap();
        assert_eq!(result.qfi_history.len(), 11);
        // best-so-far history is non-decreasing and ends at the reported QFI
        for w in result.qfi_history.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(*result.qfi_history.last().unwrap(), result.final_qfi.f);
        assert!(result.final_qfi.f >= result.qfi_history[0]);
        // clipping keeps every amplitude in bounds
        for row in &result.schedule.amplitudes {
            for &u in row {
                assert!(u.abs() <= U_MAX);
            }
        }
    }

    #[test]
    fn vanishing_learning_rate_freezes_schedule() {
        let sc = tiny_scenario();
        let lr = 1e-14;
        let config = GrapeConfig { iterations: 3, learning_rate: lr, ..GrapeConfig::default() };
        let baseline = optimize(&sc, &GrapeConfig { iterations: 0, ..config.clone() }).unwrap();
        let result = optimize(&sc, &config).unwrap();
        for (a, b) in result.schedule.amplitudes.iter().zip(&baseline.schedule.amplitudes) {
            for k in 0..3 {
                // per-step drift is bounded by lr · |gradient|
                assert!((a[k] - b[k]).abs() < lr * 1e3);
            }
        }
    }
}
