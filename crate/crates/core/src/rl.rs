//! Environment semantics and loss functions for the control agent.
//!
//! A state is the flattened density matrix, an action is the 3-component
//! control field for one segment, and the per-step reward compares the
//! controlled QFI against the no-control baseline:
//! r_{j+1} = (F(j+1) − η·F₀(j+1))/F₀(j+1), scaled by C on the final step.
//! Returns are full-episode discounted sums with terminal bootstrap zero,
//! advantages subtract the value-head baseline, and the two loss functions
//! implement the plain actor-critic objective and its PPO clipped surrogate.

use crate::dynamics::{advance_segment, DensityState, PulseSchedule, Scenario};
use crate::fisher::{qfi, BaselineTable, EIGEN_CUTOFF};
use crate::mat2::CMat2;
use crate::neural::{
    backward, forward, forward_tape, gaussian_entropy, gaussian_logpdf, Gradients, HeadGrads,
    NetParams, N_ACTIONS,
};
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::io::Write;

/// Density-matrix encoding fed to the network:
/// (Re ρ₀₀, Im ρ₀₀, Re ρ₁₀, Im ρ₁₀, Re ρ₀₁, Im ρ₀₁, Re ρ₁₁, Im ρ₁₁).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlState(pub [f64; 8]);

/// Flatten a density matrix into the network input order.
pub fn encode_state(rho: &CMat2) -> RlState {
    let e = |z: num_complex::Complex64| (z.re, z.im);
    let (r00, i00) = e(rho[(0, 0)]);
    let (r10, i10) = e(rho[(1, 0)]);
    let (r01, i01) = e(rho[(0, 1)]);
    let (r11, i11) = e(rho[(1, 1)]);
    RlState([r00, i00, r10, i10, r01, i01, r11, i11])
}

/// Rebuild the density matrix from an encoded state.
pub fn decode_state(s: &RlState) -> CMat2 {
    let v = &s.0;
    CMat2::new(
        num_complex::Complex64::new(v[0], v[1]),
        num_complex::Complex64::new(v[4], v[5]),
        num_complex::Complex64::new(v[2], v[3]),
        num_complex::Complex64::new(v[6], v[7]),
    )
}

/// Reward constants: η keeps the zero-control reward non-zero, C weights the
/// final step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub eta: f64,
    pub c: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams { eta: 1.001, c: 10.0 }
    }
}

/// Single-step reward from the controlled and uncontrolled QFI at step j+1.
pub fn reward(f: f64, f0: f64, j_plus_1: usize, n_steps: usize, params: &RewardParams) -> f64 {
    let base = (f - params.eta * f0) / f0;
    if j_plus_1 == n_steps {
        base * params.c
    } else {
        base
    }
}

/// Full-episode discounted returns: R_j = r_{j+1} + α·R_{j+1} with R_N = 0.
pub fn returns(rewards: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for j in (0..rewards.len()).rev() {
        acc = rewards[j] + alpha * acc;
        out[j] = acc;
    }
    out
}

/// A_j = R_j − V(s_j).
pub fn advantages(returns: &[f64], values: &[f64]) -> Vec<f64> {
    returns.iter().zip(values).map(|(r, v)| r - v).collect()
}

/// One complete rollout.
#[derive(Debug, Clone)]
pub struct Episode {
    /// Encoded states s_0..s_N.
    pub states: Vec<RlState>,
    /// Sampled actions a_0..a_{N−1} (pre-clip; the environment clips on
    /// application so the stored log-densities stay consistent).
    pub actions: Vec<[f64; N_ACTIONS]>,
    pub rewards: Vec<f64>,
    /// Controlled QFI after each step, F(1)..F(N).
    pub qfi_per_step: Vec<f64>,
    /// log π(a_j|s_j) under the rollout policy at sampling time.
    pub log_pdfs_at_sampling: Vec<f64>,
    pub terminal: bool,
}

#[derive(Serialize)]
struct EpisodeRow<'a> {
    step: usize,
    state: &'a [f64],
    action: &'a [f64],
    reward: f64,
    qfi: f64,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// F(T)/T of the episode.
    pub fn final_f_over_t(&self, total_time: f64) -> f64 {
        self.qfi_per_step.last().unwrap() / total_time
    }

    /// Clip the sampled actions into a playable schedule.
    pub fn to_schedule(&self, scenario: &Scenario, u_max: f64) -> Result<PulseSchedule> {
        let amplitudes = self
            .actions
            .iter()
            .map(|a| [clip(a[0], u_max), clip(a[1], u_max), clip(a[2], u_max)])
            .collect();
        PulseSchedule::new(amplitudes, scenario.dt, scenario.shape.clone())
    }

    /// Dump as JSON lines (step, state, action, reward, qfi), one row per
    /// step, with `state` the pre-action state s_j.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for j in 0..self.len() {
            let row = EpisodeRow {
                step: j,
                state: &self.states[j].0,
                action: &self.actions[j],
                reward: self.rewards[j],
                qfi: self.qfi_per_step[j],
            };
            let line = serde_json::to_string(&row)
                .map_err(|e| crate::Error::InvalidConfig(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn clip(x: f64, bound: f64) -> f64 {
    x.clamp(-bound, bound)
}

/// Run one episode under the policy.
///
/// Actions are sampled from N(μ, σ) per component (or taken as μ when
/// `deterministic`), clipped to ±u_max before being applied to the dynamics.
pub fn rollout<R: Rng>(
    scenario: &Scenario,
    baseline: &BaselineTable,
    params: &NetParams,
    reward_params: &RewardParams,
    u_max: f64,
    rng: &mut R,
    deterministic: bool,
) -> Result<Episode> {
    let n = scenario.n_steps();
    let mut state = DensityState::from_probe(&scenario.probe);
    let mut episode = Episode {
        states: Vec::with_capacity(n + 1),
        actions: Vec::with_capacity(n),
        rewards: Vec::with_capacity(n),
        qfi_per_step: Vec::with_capacity(n),
        log_pdfs_at_sampling: Vec::with_capacity(n),
        terminal: false,
    };
    episode.states.push(encode_state(&state.rho));

    for j in 0..n {
        let out = forward(params, &episode.states[j].0);
        let mut action = [0.0; N_ACTIONS];
        for k in 0..N_ACTIONS {
            action[k] = if deterministic {
                out.mu[k]
            } else {
                let z: f64 = rng.sample(StandardNormal);
                out.mu[k] + out.sigma[k] * z
            };
        }
        let log_pdf = gaussian_logpdf(&action, &out.mu, &out.sigma);
        let applied = [clip(action[0], u_max), clip(action[1], u_max), clip(action[2], u_max)];

        state = advance_segment(&state, scenario, applied)?;
        let f = qfi(&state.rho, &state.drho, EIGEN_CUTOFF)?;
        let r = reward(f, baseline.guarded_at(j + 1), j + 1, n, reward_params);

        episode.states.push(encode_state(&state.rho));
        episode.actions.push(action);
        episode.rewards.push(r);
        episode.qfi_per_step.push(f);
        episode.log_pdfs_at_sampling.push(log_pdf);
    }
    episode.terminal = true;
    Ok(episode)
}

/// Head seeds for −coeff·log π(a|μ,σ) − entropy_weight·H(σ).
fn policy_seed(
    action: &[f64; N_ACTIONS],
    mu: &[f64; N_ACTIONS],
    sigma: &[f64; N_ACTIONS],
    coeff: f64,
    entropy_weight: f64,
) -> ([f64; N_ACTIONS], [f64; N_ACTIONS]) {
    let mut d_mu = [0.0; N_ACTIONS];
    let mut d_sigma = [0.0; N_ACTIONS];
    for k in 0..N_ACTIONS {
        let s = sigma[k];
        let z = action[k] - mu[k];
        d_mu[k] = -coeff * z / (s * s);
        d_sigma[k] = -coeff * (z * z / (s * s * s) - 1.0 / s) - entropy_weight / s;
    }
    (d_mu, d_sigma)
}

/// Actor-critic loss over a full episode with its exact gradient.
///
/// The scalar is Σ_j [−log π(a_j|s_j)·A_j + A_j² − w·H(σ_j)] with the
/// advantage A_j = R_j − V(s_j) treated as a constant in the policy term;
/// gradients reach the value head (and the shared trunk) only through the
/// A_j² term and the entropy bonus.
pub fn a3c_loss(
    episode: &Episode,
    params: &NetParams,
    alpha: f64,
    entropy_weight: f64,
) -> (f64, Gradients) {
    let n = episode.len();
    let ret = returns(&episode.rewards, alpha);
    let mut grads = Gradients::zeros(params.config());
    let mut loss = 0.0;

    for j in 0..n {
        let (out, tape) = forward_tape(params, &episode.states[j].0);
        let adv = ret[j] - out.value;
        let log_pdf = gaussian_logpdf(&episode.actions[j], &out.mu, &out.sigma);
        loss += -log_pdf * adv + adv * adv - entropy_weight * gaussian_entropy(&out.sigma);

        let (d_mu, d_sigma) =
            policy_seed(&episode.actions[j], &out.mu, &out.sigma, adv, entropy_weight);
        let seed = HeadGrads { d_value: -2.0 * adv, d_mu, d_sigma };
        backward(params, &tape, &seed, &mut grads);
    }
    (loss, grads)
}

/// Probability ratio ν = π_new(a|s)/π_old(a|s).
pub fn ppo_ratio(
    theta_new: &NetParams,
    theta_old: &NetParams,
    state: &RlState,
    action: &[f64; N_ACTIONS],
) -> f64 {
    let new = forward(theta_new, &state.0);
    let old = forward(theta_old, &state.0);
    (gaussian_logpdf(action, &new.mu, &new.sigma) - gaussian_logpdf(action, &old.mu, &old.sigma))
        .exp()
}

/// min(ν·A, clip(ν, 1−ε, 1+ε)·A) and the coefficient of ∂logπ in its
/// gradient (ν·A on the unclipped branch, zero once the clip binds).
pub(crate) fn clipped_surrogate(nu: f64, adv: f64, epsilon: f64) -> (f64, f64) {
    let unclipped = nu * adv;
    let clipped = nu.clamp(1.0 - epsilon, 1.0 + epsilon) * adv;
    if unclipped <= clipped {
        (unclipped, nu * adv)
    } else {
        (clipped, 0.0)
    }
}

/// PPO loss over a full episode against a frozen rollout policy.
///
/// The policy term is −Σ_j min(ν_j·A_j, clip(ν_j, 1−ε, 1+ε)·A_j); value and
/// entropy terms match [`a3c_loss`]. Advantages use the current value head
/// and enter the policy term as constants.
pub fn ppo_loss(
    episode: &Episode,
    theta: &NetParams,
    theta_old: &NetParams,
    epsilon: f64,
    alpha: f64,
    entropy_weight: f64,
) -> (f64, Gradients) {
    let n = episode.len();
    let ret = returns(&episode.rewards, alpha);
    let mut grads = Gradients::zeros(theta.config());
    let mut loss = 0.0;

    for j in 0..n {
        let (out, tape) = forward_tape(theta, &episode.states[j].0);
        let old = forward(theta_old, &episode.states[j].0);
        let adv = ret[j] - out.value;

        let log_new = gaussian_logpdf(&episode.actions[j], &out.mu, &out.sigma);
        let log_old = gaussian_logpdf(&episode.actions[j], &old.mu, &old.sigma);
        let nu = (log_new - log_old).exp();
        let (surrogate, coeff) = clipped_surrogate(nu, adv, epsilon);
        loss += -surrogate + adv * adv - entropy_weight * gaussian_entropy(&out.sigma);

        let (d_mu, d_sigma) =
            policy_seed(&episode.actions[j], &out.mu, &out.sigma, coeff, entropy_weight);
        let seed = HeadGrads { d_value: -2.0 * adv, d_mu, d_sigma };
        backward(theta, &tape, &seed, &mut grads);
    }
    (loss, grads)
}
