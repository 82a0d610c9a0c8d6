//! Parallel training orchestration.
//!
//! A set of workers shares one global network. Each worker repeatedly
//! snapshots the global parameters, rolls out one episode, computes
//! full-episode gradients, clips them to the maximum global norm, and applies
//! them to the global parameters — asynchronously, with consistency only at
//! the granularity of one parameter block. Plain A3C applies a single update
//! per episode through shared RMSProp statistics; the PPO variant repeats
//! gradient/update cycles against the frozen rollout policy with
//! worker-private Adam moments.
//!
//! Stale-gradient application across workers is accepted behavior; a
//! single-worker deterministic mode exists for byte-reproducible runs.

use crate::dynamics::{PulseSchedule, Scenario, U_MAX};
use crate::fisher::baseline;
use crate::neural::{
    adam_step, clip_global_norm, rmsprop_step, Gradients, NetConfig, NetParams, OptimizerState,
    N_BLOCKS,
};
use crate::rl::{a3c_loss, ppo_loss, rollout, RewardParams};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Which update rule drives the workers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// One update per episode through shared RMSProp statistics.
    PlainA3C,
    /// `n_ppo_max` clipped-surrogate update cycles per episode with
    /// worker-private Adam moments.
    A3cPpo { epsilon: f64, n_ppo_max: usize },
}

/// Training hyper-parameters. Defaults follow the published table for each
/// algorithm; the ΔT = 1 variants halve the learning rate and entropy weight
/// and lower the gradient-norm ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub learning_rate: f64,
    /// Reward decay rate α ∈ (0, 1].
    pub alpha: f64,
    pub entropy_weight: f64,
    pub max_grad_norm: f64,
    pub reward: RewardParams,
    pub u_max: f64,
}

impl HyperParams {
    /// Plain A3C defaults: RMSProp at 1e-5, α = 0.99, entropy 1e-4.
    pub fn a3c_defaults() -> Self {
        HyperParams {
            learning_rate: 1e-5,
            alpha: 0.99,
            entropy_weight: 1e-4,
            max_grad_norm: 40.0,
            reward: RewardParams::default(),
            u_max: U_MAX,
        }
    }

    /// A3C+PPO defaults: Adam at 2e-4, α = 0.9, entropy 1e-3.
    pub fn ppo_defaults() -> Self {
        HyperParams {
            learning_rate: 2e-4,
            alpha: 0.9,
            entropy_weight: 1e-3,
            max_grad_norm: 40.0,
            reward: RewardParams::default(),
            u_max: U_MAX,
        }
    }

    /// Reduced settings for coarse grids (ΔT = 1): half the learning rate
    /// and entropy weight, gradient norm capped at 20.
    pub fn dt1_reduced(mut self) -> Self {
        self.learning_rate *= 0.5;
        self.entropy_weight *= 0.5;
        self.max_grad_norm = 20.0;
        self
    }
}

/// Everything one training run needs.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub scenario: Scenario,
    /// Number of parallel workers (environments).
    pub n_env: usize,
    pub max_epochs: usize,
    pub algorithm: Algorithm,
    pub hyper: HyperParams,
    pub seed: u64,
    pub net: NetConfig,
    /// Single-worker mode with zeroed wall clocks for byte-reproducible runs.
    pub deterministic: bool,
}

impl TrainConfig {
    pub fn new(scenario: Scenario, algorithm: Algorithm) -> Self {
        let hyper = match algorithm {
            Algorithm::PlainA3C => HyperParams::a3c_defaults(),
            Algorithm::A3cPpo { .. } => HyperParams::ppo_defaults(),
        };
        TrainConfig {
            scenario,
            n_env: 8,
            max_epochs: 5000,
            algorithm,
            hyper,
            seed: 0,
            net: NetConfig::default(),
            deterministic: false,
        }
    }

    /// PPO variant with the published clipping and cycle count.
    pub fn ppo_default_algorithm() -> Algorithm {
        Algorithm::A3cPpo { epsilon: 0.12, n_ppo_max: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_env < 1 {
            return Err(Error::InvalidConfig("n_env must be >= 1".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if self.deterministic && self.n_env != 1 {
            return Err(Error::InvalidConfig(
                "deterministic mode requires a single worker".into(),
            ));
        }
        let h = &self.hyper;
        if !(h.learning_rate > 0.0 && h.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(h.alpha > 0.0 && h.alpha <= 1.0) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1]".into()));
        }
        if h.entropy_weight < 0.0 || !(h.max_grad_norm > 0.0) {
            return Err(Error::InvalidConfig("entropy/grad-norm settings invalid".into()));
        }
        if h.reward.eta < 1.0 || h.reward.c < 1.0 {
            return Err(Error::InvalidConfig("reward params need eta >= 1, c >= 1".into()));
        }
        if !(h.u_max > 0.0 && h.u_max <= U_MAX) {
            return Err(Error::InvalidConfig(format!("u_max must lie in (0, {U_MAX}]")));
        }
        if let Algorithm::A3cPpo { epsilon, n_ppo_max } = self.algorithm {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Error::InvalidConfig("ppo epsilon must lie in (0, 1)".into()));
            }
            if n_ppo_max < 1 {
                return Err(Error::InvalidConfig("n_ppo_max must be >= 1".into()));
            }
        }
        if self.net.input_dim != 8 {
            return Err(Error::InvalidConfig("network input must be the 8-float state".into()));
        }
        Ok(())
    }
}

/// One learning-curve entry: the F(T)/T of the episode that finished as the
/// given global epoch.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub epoch: u64,
    pub worker: usize,
    pub f_over_t: f64,
    pub wall_clock_s: f64,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub learning_curve: Vec<CurvePoint>,
    /// Parameters that produced the best episode (the snapshot that rolled
    /// it out).
    pub best_params: NetParams,
    /// Global parameters at the end of the run.
    pub final_params: NetParams,
    pub best_metric: f64,
    pub epochs_run: u64,
    /// Global updates applied; for a single worker this is exactly
    /// epochs × cycles-per-episode.
    pub updates_applied: u64,
    /// No-control F₀(T)/T of the scenario, for convenience.
    pub baseline_f_over_t: f64,
}

struct SharedBlock {
    theta: Vec<f64>,
    /// RMSProp square averages, shared across workers like the parameters.
    sq_avg: Vec<f64>,
}

/// Global network: one mutex per parameter block. Snapshots see each block
/// atomically but not the whole network, matching asynchronous semantics.
struct SharedNet {
    config: NetConfig,
    blocks: Vec<Mutex<SharedBlock>>,
    updates: AtomicU64,
}

impl SharedNet {
    fn new(params: &NetParams, with_rms: bool) -> Self {
        let blocks = (0..N_BLOCKS)
            .map(|b| {
                let mut theta = vec![0.0; params.block_len(b)];
                params.copy_block_to(b, &mut theta);
                let sq_avg = if with_rms { vec![0.0; theta.len()] } else { Vec::new() };
                Mutex::new(SharedBlock { theta, sq_avg })
            })
            .collect();
        SharedNet { config: *params.config(), blocks, updates: AtomicU64::new(0) }
    }

    fn snapshot(&self) -> NetParams {
        let mut out = NetParams::zeros(self.config);
        for b in 0..N_BLOCKS {
            let block = self.blocks[b].lock().unwrap();
            out.set_block_from(b, &block.theta);
        }
        out
    }

    fn apply_rmsprop(&self, grads: &Gradients, lr: f64, decay: f64, epsilon: f64) {
        let mut buf = Vec::new();
        for b in 0..N_BLOCKS {
            buf.resize(grads.block_len(b), 0.0);
            grads.copy_block_to(b, &mut buf);
            let mut block = self.blocks[b].lock().unwrap();
            let SharedBlock { theta, sq_avg } = &mut *block;
            rmsprop_step(theta, sq_avg, &buf, lr, decay, epsilon);
        }
        self.updates.fetch_add(1, Ordering::Relaxed);
    }

    fn apply_adam(&self, grads: &Gradients, moments: &mut AdamMoments, lr: f64, epsilon: f64) {
        moments.t += 1;
        let mut gbuf = Vec::new();
        let mut mbuf = Vec::new();
        let mut vbuf = Vec::new();
        for b in 0..N_BLOCKS {
            let len = grads.block_len(b);
            gbuf.resize(len, 0.0);
            mbuf.resize(len, 0.0);
            vbuf.resize(len, 0.0);
            grads.copy_block_to(b, &mut gbuf);
            moments.m.copy_block_to(b, &mut mbuf);
            moments.v.copy_block_to(b, &mut vbuf);
            {
                let mut block = self.blocks[b].lock().unwrap();
                adam_step(&mut block.theta, &mut mbuf, &mut vbuf, &gbuf, moments.t, lr, 0.9, 0.999, epsilon);
            }
            moments.m.set_block_from(b, &mbuf);
            moments.v.set_block_from(b, &vbuf);
        }
        self.updates.fetch_add(1, Ordering::Relaxed);
    }
}

/// Worker-private Adam moments for the PPO variant.
struct AdamMoments {
    m: Gradients,
    v: Gradients,
    t: u64,
}

impl AdamMoments {
    fn new(config: &NetConfig) -> Self {
        AdamMoments { m: Gradients::zeros(config), v: Gradients::zeros(config), t: 0 }
    }
}

/// Run asynchronous training to `max_epochs` completed episodes.
pub fn train(config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    let table = baseline(&config.scenario)?;
    let baseline_f_over_t = table.final_f_over_t();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = NetParams::glorot(config.net, &mut init_rng);
    let shared = SharedNet::new(&initial, matches!(config.algorithm, Algorithm::PlainA3C));

    let epoch_counter = AtomicU64::new(0);
    let curve: Mutex<Vec<CurvePoint>> = Mutex::new(Vec::with_capacity(config.max_epochs));
    let best: Mutex<Option<(f64, NetParams)>> = Mutex::new(None);
    let start = Instant::now();
    let max_epochs = config.max_epochs as u64;

    std::thread::scope(|scope| {
        for worker in 0..config.n_env {
            let shared = &shared;
            let epoch_counter = &epoch_counter;
            let curve = &curve;
            let best = &best;
            let table = &table;
            scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(1 + worker as u64);
                let mut adam = AdamMoments::new(&config.net);
                loop {
                    if epoch_counter.load(Ordering::SeqCst) >= max_epochs {
                        break;
                    }
                    let local = shared.snapshot();
                    let episode = rollout(
                        &config.scenario,
                        table,
                        &local,
                        &config.hyper.reward,
                        config.hyper.u_max,
                        &mut rng,
                        false,
                    )
                    .expect("rollout failed");
                    let metric = episode.final_f_over_t(config.scenario.total_time);

                    match config.algorithm {
                        Algorithm::PlainA3C => {
                            let (_, mut grads) = a3c_loss(
                                &episode,
                                &local,
                                config.hyper.alpha,
                                config.hyper.entropy_weight,
                            );
                            clip_global_norm(&mut grads, config.hyper.max_grad_norm);
                            shared.apply_rmsprop(&grads, config.hyper.learning_rate, 0.99, 1e-8);
                        }
                        Algorithm::A3cPpo { epsilon, n_ppo_max } => {
                            let theta_old = local.clone();
                            let mut current = local.clone();
                            for _ in 0..n_ppo_max {
                                let (_, mut grads) = ppo_loss(
                                    &episode,
                                    &current,
                                    &theta_old,
                                    epsilon,
                                    config.hyper.alpha,
                                    config.hyper.entropy_weight,
                                );
                                clip_global_norm(&mut grads, config.hyper.max_grad_norm);
                                shared.apply_adam(
                                    &grads,
                                    &mut adam,
                                    config.hyper.learning_rate,
                                    1e-8,
                                );
                                current = shared.snapshot();
                            }
                        }
                    }

                    let prev = epoch_counter.fetch_add(1, Ordering::SeqCst);
                    if prev >= max_epochs {
                        break;
                    }
                    let wall = if config.deterministic {
                        0.0
                    } else {
                        start.elapsed().as_secs_f64()
                    };
                    curve.lock().unwrap().push(CurvePoint {
                        epoch: prev + 1,
                        worker,
                        f_over_t: metric,
                        wall_clock_s: wall,
                    });
                    let mut best = best.lock().unwrap();
                    let improved = best.as_ref().map_or(true, |(m, _)| metric > *m);
                    if improved {
                        *best = Some((metric, local));
                    }
                }
            });
        }
    });

    let mut learning_curve = curve.into_inner().unwrap();
    learning_curve.sort_by_key(|p| p.epoch);
    let (best_metric, best_params) = best.into_inner().unwrap().expect("no episodes completed");

    Ok(TrainReport {
        epochs_run: learning_curve.len() as u64,
        learning_curve,
        best_params,
        final_params: shared.snapshot(),
        best_metric,
        updates_applied: shared.updates.load(Ordering::SeqCst),
        baseline_f_over_t,
    })
}

/// Roll the policy out `trials` times and keep the best schedule by F(T)/T.
///
/// Trial t draws from an independent, trial-indexed random stream, so the
/// best over n trials is monotone in n for a fixed seed.
pub fn evaluate(
    params: &NetParams,
    scenario: &Scenario,
    trials: usize,
    seed: u64,
) -> Result<(PulseSchedule, f64)> {
    if trials < 1 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let table = baseline(scenario)?;
    let reward_params = RewardParams::default();

    let episodes: Result<Vec<(usize, f64, crate::rl::Episode)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let ep = rollout(scenario, &table, params, &reward_params, U_MAX, &mut rng, false)?;
            let f = ep.final_f_over_t(scenario.total_time);
            Ok((trial, f, ep))
        })
        .collect();
    let mut episodes = episodes?;
    episodes.sort_by_key(|(trial, _, _)| *trial);
    let (_, best_f, best_ep) = episodes
        .into_iter()
        .reduce(|acc, cand| if cand.1 > acc.1 { cand } else { acc })
        .unwrap();
    Ok((best_ep.to_schedule(scenario, U_MAX)?, best_f))
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Binary little-endian format, version 1:
//   magic "QFCK", version u32,
//   input_dim u32, hidden u32, epochs_run u64,
//   parameters (param_count f64, block order, weights row-major then bias),
//   optimizer tag u8: 0 none / 1 rmsprop / 2 adam,
//     rmsprop: lr, decay, epsilon (f64), square averages (param_count f64)
//     adam:    lr, beta1, beta2, epsilon (f64), t u64, m then v (f64 each)
// No trailing bytes. All f64 round-trip bit-exactly.
// ---------------------------------------------------------------------------

const CHECKPOINT_MAGIC: &[u8; 4] = b"QFCK";
const CHECKPOINT_VERSION: u32 = 1;

/// A loaded checkpoint.
#[derive(Debug)]
pub struct Checkpoint {
    pub params: NetParams,
    pub optimizer: Option<OptimizerState>,
    pub epochs_run: u64,
}

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn flat<T: FlatParams>(&mut self, data: &T) -> Result<()> {
        let mut buf = Vec::new();
        for b in 0..N_BLOCKS {
            buf.resize(data.block_len_of(b), 0.0);
            data.copy_block(b, &mut buf);
            for v in &buf {
                self.f64(*v)?;
            }
        }
        Ok(())
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.0
            .read_exact(&mut buf)
            .map_err(|_| Error::Checkpoint("file truncated".into()))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn flat<T: FlatParams>(&mut self, data: &mut T) -> Result<()> {
        let mut buf = Vec::new();
        for b in 0..N_BLOCKS {
            buf.resize(data.block_len_of(b), 0.0);
            for v in buf.iter_mut() {
                *v = self.f64()?;
            }
            data.set_block(b, &buf);
        }
        Ok(())
    }
}

/// Uniform flat-block access over parameter-shaped containers.
trait FlatParams {
    fn block_len_of(&self, block: usize) -> usize;
    fn copy_block(&self, block: usize, out: &mut [f64]);
    fn set_block(&mut self, block: usize, data: &[f64]);
}

macro_rules! impl_flat {
    ($ty:ty) => {
        impl FlatParams for $ty {
            fn block_len_of(&self, block: usize) -> usize {
                self.block_len(block)
            }
            fn copy_block(&self, block: usize, out: &mut [f64]) {
                self.copy_block_to(block, out)
            }
            fn set_block(&mut self, block: usize, data: &[f64]) {
                self.set_block_from(block, data)
            }
        }
    };
}

impl_flat!(NetParams);
impl_flat!(Gradients);

/// Serialize parameters, optional optimizer state, and counters.
pub fn checkpoint_save(
    path: &Path,
    params: &NetParams,
    optimizer: Option<&OptimizerState>,
    epochs_run: u64,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = Writer(BufWriter::new(file));
    w.0.write_all(CHECKPOINT_MAGIC)?;
    w.u32(CHECKPOINT_VERSION)?;
    w.u32(params.config().input_dim as u32)?;
    w.u32(params.config().hidden as u32)?;
    w.u64(epochs_run)?;
    w.flat(params)?;
    match optimizer {
        None => w.0.write_all(&[0u8])?,
        Some(OptimizerState::RmsProp { sq_avg, lr, decay, epsilon }) => {
            w.0.write_all(&[1u8])?;
            w.f64(*lr)?;
            w.f64(*decay)?;
            w.f64(*epsilon)?;
            w.flat(sq_avg)?;
        }
        Some(OptimizerState::Adam { m, v, t, lr, beta1, beta2, epsilon }) => {
            w.0.write_all(&[2u8])?;
            w.f64(*lr)?;
            w.f64(*beta1)?;
            w.f64(*beta2)?;
            w.f64(*epsilon)?;
            w.u64(*t)?;
            w.flat(m)?;
            w.flat(v)?;
        }
    }
    w.0.flush()?;
    Ok(())
}

/// Read a checkpoint back, verifying magic, version, and exact length.
pub fn checkpoint_load(path: &Path) -> Result<Checkpoint> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader(BufReader::new(file));
    let magic = r.bytes::<4>()?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic, not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )));
    }
    let input_dim = r.u32()? as usize;
    let hidden = r.u32()? as usize;
    let epochs_run = r.u64()?;
    let config = NetConfig { input_dim, hidden };
    let mut params = NetParams::zeros(config);
    r.flat(&mut params)?;
    let optimizer = match r.u8()? {
        0 => None,
        1 => {
            let lr = r.f64()?;
            let decay = r.f64()?;
            let epsilon = r.f64()?;
            let mut sq_avg = Gradients::zeros(&config);
            r.flat(&mut sq_avg)?;
            Some(OptimizerState::RmsProp { sq_avg, lr, decay, epsilon })
        }
        2 => {
            let lr = r.f64()?;
            let beta1 = r.f64()?;
            let beta2 = r.f64()?;
            let epsilon = r.f64()?;
            let t = r.u64()?;
            let mut m = Gradients::zeros(&config);
            let mut v = Gradients::zeros(&config);
            r.flat(&mut m)?;
            r.flat(&mut v)?;
            Some(OptimizerState::Adam { m, v, t, lr, beta1, beta2, epsilon })
        }
        tag => return Err(Error::Checkpoint(format!("unknown optimizer tag {tag}"))),
    };
    let mut rest = [0u8; 1];
    match r.0.read(&mut rest)? {
        0 => Ok(Checkpoint { params, optimizer, epochs_run }),
        _ => Err(Error::Checkpoint("trailing bytes after checkpoint payload".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::dephasing_scenario;
    use tempfile::tempdir;

    fn tiny_config(algorithm: Algorithm) -> TrainConfig {
        let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 1.0, 5.0);
        let mut config = TrainConfig::new(scenario, algorithm);
        config.n_env = 1;
        config.max_epochs = 12;
        config.net = NetConfig { input_dim: 8, hidden: 16 };
        config.deterministic = true;
        config
    }

    #[test]
    fn config_validation_catches_inconsistencies() {
        let mut config = tiny_config(Algorithm::PlainA3C);
        config.n_env = 0;
        assert!(config.validate().is_err());

        let mut config = tiny_config(Algorithm::PlainA3C);
        config.deterministic = true;
        config.n_env = 2;
        assert!(config.validate().is_err());

        let mut config = tiny_config(TrainConfig::ppo_default_algorithm());
        if let Algorithm::A3cPpo { ref mut epsilon, .. } = config.algorithm {
            *epsilon = 1.5;
        }
        assert!(config.validate().is_err());

        let mut config = tiny_config(Algorithm::PlainA3C);
        config.hyper.u_max = 9.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn single_worker_training_is_deterministic() {
        let config = tiny_config(Algorithm::PlainA3C);
        let a = train(&config).unwrap();
        let b = train(&config).unwrap();
        assert_eq!(a.epochs_run, 12);
        assert_eq!(a.learning_curve.len(), b.learning_curve.len());
        for (x, y) in a.learning_curve.iter().zip(&b.learning_curve) {
            assert_eq!(x.epoch, y.epoch);
            assert_eq!(x.f_over_t, y.f_over_t);
            assert_eq!(x.wall_clock_s, 0.0);
        }
        assert_eq!(a.best_metric, b.best_metric);
        assert_eq!(a.updates_applied, 12);
        // best metric is the running maximum of the curve
        let max = a.learning_curve.iter().map(|p| p.f_over_t).fold(f64::MIN, f64::max);
        assert_eq!(a.best_metric, max);
    }

    #[test]
    fn ppo_runs_exactly_n_ppo_cycles_per_episode() {
        let mut config = tiny_config(Algorithm::A3cPpo { epsilon: 0.12, n_ppo_max: 3 });
        config.max_epochs = 5;
        let report = train(&config).unwrap();
        assert_eq!(report.updates_applied, 15);
        assert_eq!(report.epochs_run, 5);
    }

    #[test]
    fn evaluate_contracts() {
        let scenario = dephasing_scenario(std::f64::consts::FRAC_PI_4, 1.0, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let params = NetParams::glorot(NetConfig { input_dim: 8, hidden: 16 }, &mut rng);

        let (schedule, f1) = evaluate(&params, &scenario, 1, 7).unwrap();
        let (schedule_again, f1_again) = evaluate(&params, &scenario, 1, 7).unwrap();
        assert_eq!(f1, f1_again);
        assert_eq!(schedule.amplitudes, schedule_again.amplitudes);

        let (_, f10) = evaluate(&params, &scenario, 10, 7).unwrap();
        let (_, f100) = evaluate(&params, &scenario, 100, 7).unwrap();
        assert!(f10 >= f1);
        assert!(f100 >= f10);

        assert_eq!(schedule.n_segments(), scenario.n_steps());
        for row in &schedule.amplitudes {
            for &u in row {
                assert!(u.abs() <= U_MAX);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let config = NetConfig { input_dim: 8, hidden: 12 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = NetParams::glorot(config, &mut rng);
        let mut opt = OptimizerState::adam(&config, 2e-4);
        // step it once so the moments are non-trivial
        let mut g = Gradients::zeros(&config);
        g.add_flat(3, 0.123456789);
        let mut p2 = params.clone();
        opt.apply(&mut p2, &g);

        checkpoint_save(&path, &p2, Some(&opt), 321).unwrap();
        let loaded = checkpoint_load(&path).unwrap();
        assert_eq!(loaded.epochs_run, 321);
        for i in 0..p2.param_count() {
            assert_eq!(loaded.params.get_flat(i), p2.get_flat(i));
        }
        // save → load → save yields identical bytes
        let path2 = dir.path().join("ckpt2.bin");
        checkpoint_save(&path2, &loaded.params, loaded.optimizer.as_ref(), loaded.epochs_run)
            .unwrap();
        let a = std::fs::read(&path).unwrap();
        let b = std::fs::read(&path2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_rejects_truncated_and_foreign_files() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let config = NetConfig { input_dim: 8, hidden: 8 };
        let params = NetParams::zeros(config);
        checkpoint_save(&path, &params, None, 5).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.bin");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(checkpoint_load(&cut), Err(Error::Checkpoint(_))));

        let junk = dir.path().join("junk.bin");
        std::fs::write(&junk, b"definitely not a checkpoint").unwrap();
        assert!(matches!(checkpoint_load(&junk), Err(Error::Checkpoint(_))));

        // trailing garbage is also rejected
        let mut extended = bytes.clone();
        extended.push(0);
        let long = dir.path().join("long.bin");
        std::fs::write(&long, &extended).unwrap();
        assert!(matches!(checkpoint_load(&long), Err(Error::Checkpoint(_))));
    }
}
