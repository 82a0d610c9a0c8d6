//! The policy/value network and its training machinery.
//!
//! Architecture: a shared trunk of 4 affine layers with ReLU units feeding
//! (a) a value head (one ReLU hidden layer, one linear output) and (b) a
//! policy head (one ReLU hidden layer and two linear outputs of width 3).
//! The first policy output passes through SoftShrink(0.25) to give the
//! Gaussian means μ_k, the second through SoftPlus (plus a small floor) to
//! give the standard deviations σ_k.
//!
//! Gradients are exact reverse-mode: [`forward_tape`] records the
//! activations, loss code turns its per-step terms into head seeds
//! ([`HeadGrads`]), and [`backward`] accumulates parameter gradients.
//! Everything is f64; the physics oracles downstream demand tight
//! tolerances and the network is small.

use crate::{Error, Result};
use ndarray::{Array1, Array2};
use rand::Rng;

/// Number of control amplitudes emitted per step.
pub const N_ACTIONS: usize = 3;

/// SoftShrink threshold applied to the policy means.
pub const SOFTSHRINK_LAMBDA: f64 = 0.25;

/// Floor added to the SoftPlus output so σ stays strictly positive.
pub const SIGMA_FLOOR: f64 = 1e-4;

const N_TRUNK: usize = 4;
/// Trunk layers 0..4, value hidden 4, value out 5, policy hidden 6,
/// policy μ out 7, policy σ out 8.
pub const N_BLOCKS: usize = 9;

/// Network shape. The input is the 8-component RL state; the hidden width is
/// 200 in production and can be shrunk for finite-difference tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { input_dim: 8, hidden: 200 }
    }
}

impl NetConfig {
    /// (out, in) shapes of the nine affine layers in block order.
    pub fn layer_dims(&self) -> [(usize, usize); N_BLOCKS] {
        let h = self.hidden;
        [
            (h, self.input_dim),
            (h, h),
            (h, h),
            (h, h),
            (h, h),
            (1, h),
            (h, h),
            (N_ACTIONS, h),
            (N_ACTIONS, h),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(o, i)| o * i + o).sum()
    }
}

/// One affine layer, weights (out × in) plus bias.
#[derive(Debug, Clone)]
pub struct Affine {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Affine {
    fn zeros(out: usize, inp: usize) -> Self {
        Affine { w: Array2::zeros((out, inp)), b: Array1::zeros(out) }
    }

    fn len(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

fn layers_zeros(config: &NetConfig) -> Vec<Affine> {
    config.layer_dims().iter().map(|&(o, i)| Affine::zeros(o, i)).collect()
}

/// All network parameters.
#[derive(Debug, Clone)]
pub struct NetParams {
    config: NetConfig,
    layers: Vec<Affine>,
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone)]
pub struct Gradients {
    layers: Vec<Affine>,
}

macro_rules! flat_access {
    ($ty:ident) => {
        impl $ty {
            pub fn layers(&self) -> &[Affine] {
                &self.layers
            }

            pub fn block_len(&self, block: usize) -> usize {
                self.layers[block].len()
            }

            /// Copy one block (weights row-major, then bias) into `out`.
            pub fn copy_block_to(&self, block: usize, out: &mut [f64]) {
                let l = &self.layers[block];
                let nw = l.w.len();
                out[..nw].copy_from_slice(l.w.as_slice().unwrap());
                out[nw..nw + l.b.len()].copy_from_slice(l.b.as_slice().unwrap());
            }

            /// Overwrite one block from a flat slice.
            pub fn set_block_from(&mut self, block: usize, data: &[f64]) {
                let l = &mut self.layers[block];
                let nw = l.w.len();
                let nb = l.b.len();
                l.w.as_slice_mut().unwrap().copy_from_slice(&data[..nw]);
                l.b.as_slice_mut().unwrap().copy_from_slice(&data[nw..nw + nb]);
            }

            pub fn param_count(&self) -> usize {
                self.layers.iter().map(Affine::len).sum()
            }

            /// Read the parameter at a flat index spanning all blocks.
            pub fn get_flat(&self, mut idx: usize) -> f64 {
                for l in &self.layers {
                    if idx < l.w.len() {
                        return l.w.as_slice().unwrap()[idx];
                    }
                    idx -= l.w.len();
                    if idx < l.b.len() {
                        return l.b[idx];
                    }
                    idx -= l.b.len();
                }
                panic!("flat index out of range");
            }

            /// Add `delta` to the parameter at a flat index.
            pub fn add_flat(&mut self, mut idx: usize, delta: f64) {
                for l in &mut self.layers {
                    if idx < l.w.len() {
                        l.w.as_slice_mut().unwrap()[idx] += delta;
                        return;
                    }
                    idx -= l.w.len();
                    if idx < l.b.len() {
                        l.b[idx] += delta;
                        return;
                    }
                    idx -= l.b.len();
                }
                panic!("flat index out of range");
            }
        }
    };
}

flat_access!(NetParams);
flat_access!(Gradients);

impl NetParams {
    pub fn zeros(config: NetConfig) -> Self {
        NetParams { config, layers: layers_zeros(&config) }
    }

    /// Uniform init in ±√(6/(fan_in + fan_out)) per layer, zero biases.
    ///
    /// This keeps the initial σ head near softplus(0) and the μ head inside
    /// the SoftShrink dead zone.
    pub fn glorot<R: Rng>(config: NetConfig, rng: &mut R) -> Self {
        let mut net = Self::zeros(config);
        for l in &mut net.layers {
            let (out, inp) = (l.w.nrows(), l.w.ncols());
            let bound = (6.0 / (out + inp) as f64).sqrt();
            for v in l.w.as_slice_mut().unwrap() {
                *v = rng.random_range(-bound..=bound);
            }
        }
        net
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }
}

impl Gradients {
    pub fn zeros(config: &NetConfig) -> Self {
        Gradients { layers: layers_zeros(config) }
    }

    pub fn global_norm(&self) -> f64 {
        let mut sq = 0.0;
        for l in &self.layers {
            sq += l.w.iter().map(|g| g * g).sum::<f64>();
            sq += l.b.iter().map(|g| g * g).sum::<f64>();
        }
        sq.sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.w.mapv_inplace(|g| g * factor);
            l.b.mapv_inplace(|g| g * factor);
        }
    }
}

/// x − λ above the threshold, x + λ below −λ, zero in between.
pub fn softshrink(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// log(1 + eˣ) without overflow; strictly positive.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Value and Gaussian policy parameters for one state.
#[derive(Debug, Clone, Copy)]
pub struct PolicyOutput {
    pub value: f64,
    pub mu: [f64; N_ACTIONS],
    pub sigma: [f64; N_ACTIONS],
}

/// Activations recorded by [`forward_tape`], consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardTape {
    input: Array1<f64>,
    trunk: Vec<Array1<f64>>,
    value_hidden: Array1<f64>,
    policy_hidden: Array1<f64>,
    mu_pre: Array1<f64>,
    sigma_pre: Array1<f64>,
}

fn affine_forward(layer: &Affine, x: &Array1<f64>) -> Array1<f64> {
    layer.w.dot(x) + &layer.b
}

fn relu_inplace(x: &mut Array1<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

/// Forward pass recording the tape.
pub fn forward_tape(params: &NetParams, state: &[f64]) -> (PolicyOutput, ForwardTape) {
    assert_eq!(state.len(), params.config.input_dim, "state width mismatch");
    let input = Array1::from_iter(state.iter().copied());

    let mut trunk = Vec::with_capacity(N_TRUNK);
    let mut x = input.clone();
    for l in 0..N_TRUNK {
        let mut h = affine_forward(&params.layers[l], &x);
        relu_inplace(&mut h);
        trunk.push(h.clone());
        x = h;
    }

    let mut value_hidden = affine_forward(&params.layers[4], &x);
    relu_inplace(&mut value_hidden);
    let value = affine_forward(&params.layers[5], &value_hidden)[0];

    let mut policy_hidden = affine_forward(&params.layers[6], &x);
    relu_inplace(&mut policy_hidden);
    let mu_pre = affine_forward(&params.layers[7], &policy_hidden);
    let sigma_pre = affine_forward(&params.layers[8], &policy_hidden);

    let mut mu = [0.0; N_ACTIONS];
    let mut sigma = [0.0; N_ACTIONS];
    for k in 0..N_ACTIONS {
        mu[k] = softshrink(mu_pre[k], SOFTSHRINK_LAMBDA);
        sigma[k] = softplus(sigma_pre[k]) + SIGMA_FLOOR;
    }

    (
        PolicyOutput { value, mu, sigma },
        ForwardTape { input, trunk, value_hidden, policy_hidden, mu_pre, sigma_pre },
    )
}

/// Forward pass without the tape.
pub fn forward(params: &NetParams, state: &[f64]) -> PolicyOutput {
    forward_tape(params, state).0
}

/// Sum over components of log N(a_k | μ_k, σ_k).
pub fn gaussian_logpdf(a: &[f64; N_ACTIONS], mu: &[f64; N_ACTIONS], sigma: &[f64; N_ACTIONS]) -> f64 {
    let mut lp = 0.0;
    for k in 0..N_ACTIONS {
        let z = (a[k] - mu[k]) / sigma[k];
        lp += -0.5 * (2.0 * std::f64::consts::PI * sigma[k] * sigma[k]).ln() - 0.5 * z * z;
    }
    lp
}

/// Σ_k ½(log(2πσ_k²) + 1), the differential entropy of the Gaussian policy.
pub fn gaussian_entropy(sigma: &[f64; N_ACTIONS]) -> f64 {
    sigma
        .iter()
        .map(|s| 0.5 * ((2.0 * std::f64::consts::PI * s * s).ln() + 1.0))
        .sum()
}

/// Loss gradients with respect to the network outputs for one state: the
/// scalar value, the post-activation means, and the post-activation sigmas.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeadGrads {
    pub d_value: f64,
    pub d_mu: [f64; N_ACTIONS],
    pub d_sigma: [f64; N_ACTIONS],
}

/// Accumulate dW += d_pre ⊗ input, db += d_pre and return the input gradient.
fn affine_backward(
    layer: &Affine,
    input: &Array1<f64>,
    d_pre: &Array1<f64>,
    grad: &mut Affine,
) -> Array1<f64> {
    let ncols = layer.w.ncols();
    let gw = grad.w.as_slice_mut().unwrap();
    let xs = input.as_slice().unwrap();
    for (i, &d) in d_pre.iter().enumerate() {
        grad.b[i] += d;
        if d != 0.0 {
            let row = &mut gw[i * ncols..(i + 1) * ncols];
            for (r, &x) in row.iter_mut().zip(xs) {
                *r += d * x;
            }
        }
    }
    layer.w.t().dot(d_pre)
}

fn relu_mask(d: &mut Array1<f64>, activation: &Array1<f64>) {
    for (g, &a) in d.iter_mut().zip(activation.iter()) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Reverse-mode gradient accumulation for one recorded forward pass.
pub fn backward(params: &NetParams, tape: &ForwardTape, seed: &HeadGrads, grads: &mut Gradients) {
    // σ head: σ = softplus(s̃) + floor, dσ/ds̃ = sigmoid(s̃)
    let d_sigma_pre = Array1::from_iter(
        (0..N_ACTIONS).map(|k| seed.d_sigma[k] * sigmoid(tape.sigma_pre[k])),
    );
    // μ head: the SoftShrink derivative is 1 outside the dead zone, else 0
    let d_mu_pre = Array1::from_iter((0..N_ACTIONS).map(|k| {
        if tape.mu_pre[k].abs() > SOFTSHRINK_LAMBDA {
            seed.d_mu[k]
        } else {
            0.0
        }
    }));

    let trunk_out = &tape.trunk[N_TRUNK - 1];

    // policy head
    let d_hp_mu = affine_backward(&params.layers[7], &tape.policy_hidden, &d_mu_pre, &mut grads.layers[7]);
    let d_hp_sig = affine_backward(&params.layers[8], &tape.policy_hidden, &d_sigma_pre, &mut grads.layers[8]);
    let mut d_policy_hidden = d_hp_mu + d_hp_sig;
    relu_mask(&mut d_policy_hidden, &tape.policy_hidden);
    let d_trunk_pol =
        affine_backward(&params.layers[6], trunk_out, &d_policy_hidden, &mut grads.layers[6]);

    // value head
    let d_value = Array1::from_elem(1, seed.d_value);
    let mut d_value_hidden =
        affine_backward(&params.layers[5], &tape.value_hidden, &d_value, &mut grads.layers[5]);
    relu_mask(&mut d_value_hidden, &tape.value_hidden);
    let d_trunk_val =
        affine_backward(&params.layers[4], trunk_out, &d_value_hidden, &mut grads.layers[4]);

    // shared trunk
    let mut d_h = d_trunk_pol + d_trunk_val;
    for l in (0..N_TRUNK).rev() {
        relu_mask(&mut d_h, &tape.trunk[l]);
        let input = if l == 0 { &tape.input } else { &tape.trunk[l - 1] };
        d_h = affine_backward(&params.layers[l], input, &d_h, &mut grads.layers[l]);
    }
}

/// Scale all gradients by max_norm/‖g‖ when the global L2 norm exceeds
/// max_norm. Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut Gradients, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm {
        grads.scale(max_norm / norm);
    }
    norm
}

/// Per-parameter square-average update (shared across workers) or
/// bias-corrected Adam moments (worker private).
#[derive(Debug, Clone)]
pub enum OptimizerState {
    RmsProp { sq_avg: Gradients, lr: f64, decay: f64, epsilon: f64 },
    Adam { m: Gradients, v: Gradients, t: u64, lr: f64, beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerState {
    pub fn rmsprop(config: &NetConfig, lr: f64) -> Self {
        OptimizerState::RmsProp { sq_avg: Gradients::zeros(config), lr, decay: 0.99, epsilon: 1e-8 }
    }

    pub fn adam(config: &NetConfig, lr: f64) -> Self {
        OptimizerState::Adam {
            m: Gradients::zeros(config),
            v: Gradients::zeros(config),
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One optimizer step over the full parameter set.
    pub fn apply(&mut self, params: &mut NetParams, grads: &Gradients) {
        match self {
            OptimizerState::RmsProp { sq_avg, lr, decay, epsilon } => {
                for (block, (pl, gl)) in params.layers.iter_mut().zip(&grads.layers).enumerate() {
                    let sl = &mut sq_avg.layers[block];
                    rmsprop_step(
                        pl.w.as_slice_mut().unwrap(),
                        sl.w.as_slice_mut().unwrap(),
                        gl.w.as_slice().unwrap(),
                        *lr,
                        *decay,
                        *epsilon,
                    );
                    rmsprop_step(
                        pl.b.as_slice_mut().unwrap(),
                        sl.b.as_slice_mut().unwrap(),
                        gl.b.as_slice().unwrap(),
                        *lr,
                        *decay,
                        *epsilon,
                    );
                }
            }
            OptimizerState::Adam { m, v, t, lr, beta1, beta2, epsilon } => {
                *t += 1;
                for (block, (pl, gl)) in params.layers.iter_mut().zip(&grads.layers).enumerate() {
                    let ml = &mut m.layers[block];
                    let vl = &mut v.layers[block];
                    adam_step(
                        pl.w.as_slice_mut().unwrap(),
                        ml.w.as_slice_mut().unwrap(),
                        vl.w.as_slice_mut().unwrap(),
                        gl.w.as_slice().unwrap(),
                        *t,
                        *lr,
                        *beta1,
                        *beta2,
                        *epsilon,
                    );
                    adam_step(
                        pl.b.as_slice_mut().unwrap(),
                        ml.b.as_slice_mut().unwrap(),
                        vl.b.as_slice_mut().unwrap(),
                        gl.b.as_slice().unwrap(),
                        *t,
                        *lr,
                        *beta1,
                        *beta2,
                        *epsilon,
                    );
                }
            }
        }
    }
}

/// s ← decay·s + (1−decay)·g², θ ← θ − lr·g/(√s + ε).
pub(crate) fn rmsprop_step(
    theta: &mut [f64],
    sq_avg: &mut [f64],
    g: &[f64],
    lr: f64,
    decay: f64,
    epsilon: f64,
) {
    for ((th, s), &gi) in theta.iter_mut().zip(sq_avg.iter_mut()).zip(g) {
        *s = decay * *s + (1.0 - decay) * gi * gi;
        *th -= lr * gi / (s.sqrt() + epsilon);
    }
}

/// Bias-corrected Adam update at step `t` (1-based).
#[allow(clippy::too_many_arguments)]
pub(crate) fn adam_step(
    theta: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for (((th, mi), vi), &gi) in theta.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g) {
        *mi = beta1 * *mi + (1.0 - beta1) * gi;
        *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *th -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// Validate optimizer/parameter shape congruence before training.
pub fn check_shapes(params: &NetParams, opt: &OptimizerState) -> Result<()> {
    let congruent = |g: &Gradients| {
        g.layers.len() == params.layers.len()
            && g.layers.iter().zip(&params.layers).all(|(a, b)| a.w.dim() == b.w.dim())
    };
    let ok = match opt {
        OptimizerState::RmsProp { sq_avg, .. } => congruent(sq_avg),
        OptimizerState::Adam { m, v, .. } => congruent(m) && congruent(v),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig("optimizer state shape mismatch".into()))
    }
}
