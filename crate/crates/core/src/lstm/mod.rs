//! Single-layer LSTM with a linear output head, trained one step ahead by
//! backpropagation through time and rolled out in closed loop.
//!
//! ```text
//! f = sig(W_f x + U_f h + b_f)      i = sig(W_i x + U_i h + b_i)
//! o = sig(W_o x + U_o h + b_o)      g = tanh(W_c x + U_c h + b_c)
//! c' = f * c + i * g                h' = o * tanh(c')
//! y  = W_head h_L + b_head
//! ```

mod params;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{within_bound, Forecast, DIVERGENCE_BOUND};
use crate::trajectory::Trajectory;

pub use params::{Gate, LstmParams};

/// Step of the central differences in [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmConfig {
    pub input_dim: usize,
    pub hidden_size: usize,
    pub epochs: usize,
    pub window_length: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Global gradient norm above which gradients are rescaled.
    pub clip_norm: f64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            input_dim: 3,
            hidden_size: 16,
            epochs: 300,
            window_length: 16,
            learning_rate: 1e-3,
            batch_size: 32,
            seed: 42,
            clip_norm: 5.0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if self.input_dim == 0 || self.hidden_size == 0 {
            return bad("input_dim and hidden_size must be positive");
        }
        if self.window_length == 0 || self.batch_size == 0 {
            return bad("window_length and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        Ok(())
    }
}

/// Activations of one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCache {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    pub candidate: Vec<f64>,
    pub cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One cell update. `gates` receives the activated `[f, i, o, g]` blocks.
fn cell_step(
    p: &LstmParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    c: &mut [f64],
    tanh_c: &mut [f64],
    h: &mut [f64],
) {
    let (d, hs) = (p.input_dim(), p.hidden_size());
    let w = p.input_weights();
    let u = p.recurrent_weights();
    let b = p.biases();
    for r in 0..4 * hs {
        let a = b[r] + dot(&w[r * d..(r + 1) * d], x) + dot(&u[r * hs..(r + 1) * hs], h_prev);
        gates[r] = if r < 3 * hs { sigmoid(a) } else { libm::tanh(a) };
    }
    debug_assert!(gates[..3 * hs].iter().all(|v| (0.0..=1.0).contains(v)));
    debug_assert!(gates[3 * hs..].iter().all(|v| (-1.0..=1.0).contains(v)));
    let (f, rest) = gates.split_at(hs);
    let (i, rest) = rest.split_at(hs);
    let (o, g) = rest.split_at(hs);
    for j in 0..hs {
        c[j] = f[j] * c_prev[j] + i[j] * g[j];
        tanh_c[j] = libm::tanh(c[j]);
        h[j] = o[j] * tanh_c[j];
    }
}

fn check_dims(p: &LstmParams, x: usize, h: usize, c: usize) -> Result<()> {
    let pairs = [(p.input_dim(), x), (p.hidden_size(), h), (p.hidden_size(), c)];
    for (expected, got) in pairs {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// One step of the cell equations from `(h_prev, c_prev)`.
pub fn forward_cell(p: &LstmParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<CellCache> {
    check_dims(p, x.len(), h_prev.len(), c_prev.len())?;
    let hs = p.hidden_size();
    let mut gates = vec![0.0; 4 * hs];
    let mut cell = vec![0.0; hs];
    let mut tanh_c = vec![0.0; hs];
    let mut hidden = vec![0.0; hs];
    cell_step(p, x, h_prev, c_prev, &mut gates, &mut cell, &mut tanh_c, &mut hidden);
    let block = |k: usize| gates[k * hs..(k + 1) * hs].to_vec();
    Ok(CellCache { forget: block(0), input: block(1), output: block(2), candidate: block(3), cell, hidden })
}

/// Activations of a whole window, kept for the backward pass.
struct Tape {
    steps: usize,
    gates: Vec<f64>,
    /// `steps + 1` rows, row 0 is the zero initial state.
    c: Vec<f64>,
    h: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl Tape {
    fn new(p: &LstmParams, steps: usize) -> Self {
        let hs = p.hidden_size();
        Self {
            steps,
            gates: vec![0.0; steps * 4 * hs],
            c: vec![0.0; (steps + 1) * hs],
            h: vec![0.0; (steps + 1) * hs],
            tanh_c: vec![0.0; steps * hs],
        }
    }

    fn run(&mut self, p: &LstmParams, window: &[f64]) {
        let (d, hs) = (p.input_dim(), p.hidden_size());
        for t in 0..self.steps {
            let (h_prev, h_next) = self.h.split_at_mut((t + 1) * hs);
            let (c_prev, c_next) = self.c.split_at_mut((t + 1) * hs);
            cell_step(
                p,
                &window[t * d..(t + 1) * d],
                &h_prev[t * hs..],
                &c_prev[t * hs..],
                &mut self.gates[t * 4 * hs..(t + 1) * 4 * hs],
                &mut c_next[..hs],
                &mut self.tanh_c[t * hs..(t + 1) * hs],
                &mut h_next[..hs],
            );
        }
    }

    fn last_hidden(&self, hs: usize) -> &[f64] {
        &self.h[self.steps * hs..]
    }

    fn predict_into(&self, p: &LstmParams, out: &mut [f64]) {
        let hs = p.hidden_size();
        let h = self.last_hidden(hs);
        let w = p.head_weights();
        for (k, (y, b)) in out.iter_mut().zip(p.head_bias()).enumerate() {
            *y = b + dot(&w[k * hs..(k + 1) * hs], h);
        }
    }
}

/// Scratch vectors for [`backward`].
struct Adjoint {
    dh: Vec<f64>,
    dh_next: Vec<f64>,
    dc: Vec<f64>,
    da: Vec<f64>,
}

impl Adjoint {
    fn new(hs: usize) -> Self {
        Self { dh: vec![0.0; hs], dh_next: vec![0.0; hs], dc: vec![0.0; hs], da: vec![0.0; 4 * hs] }
    }
}

/// Adds the gradient of `dy . y` (with `y` the head output) to `grad`.
fn backward(p: &LstmParams, tape: &Tape, window: &[f64], dy: &[f64], grad: &mut [f64], adj: &mut Adjoint) {
    let (d, hs) = (p.input_dim(), p.hidden_size());
    let (u_off, b_off, wh_off, bh_off) = (p.u_offset(), p.b_offset(), p.w_head_offset(), p.b_head_offset());
    let w_head = p.head_weights();
    let u = p.recurrent_weights();

    let h_last = tape.last_hidden(hs);
    adj.dh.iter_mut().for_each(|v| *v = 0.0);
    adj.dc.iter_mut().for_each(|v| *v = 0.0);
    for (k, &dyk) in dy.iter().enumerate() {
        grad[bh_off + k] += dyk;
        let row = &mut grad[wh_off + k * hs..wh_off + (k + 1) * hs];
        for (g, h) in row.iter_mut().zip(h_last) {
            *g += dyk * h;
        }
        for (dh, w) in adj.dh.iter_mut().zip(&w_head[k * hs..(k + 1) * hs]) {
            *dh += dyk * w;
        }
    }

    for t in (0..tape.steps).rev() {
        let gates = &tape.gates[t * 4 * hs..(t + 1) * 4 * hs];
        let c_prev = &tape.c[t * hs..(t + 1) * hs];
        let h_prev = &tape.h[t * hs..(t + 1) * hs];
        let tanh_c = &tape.tanh_c[t * hs..(t + 1) * hs];
        let x = &window[t * d..(t + 1) * d];
        for j in 0..hs {
            let (f, i, o, g) = (gates[j], gates[hs + j], gates[2 * hs + j], gates[3 * hs + j]);
            let tc = tanh_c[j];
            let dc = adj.dc[j] + adj.dh[j] * o * (1.0 - tc * tc);
            adj.da[j] = dc * c_prev[j] * f * (1.0 - f);
            adj.da[hs + j] = dc * g * i * (1.0 - i);
            adj.da[2 * hs + j] = adj.dh[j] * tc * o * (1.0 - o);
            adj.da[3 * hs + j] = dc * i * (1.0 - g * g);
            adj.dc[j] = dc * f;
        }
        adj.dh_next.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..4 * hs {
            let a = adj.da[r];
            grad[b_off + r] += a;
            for (g, xv) in grad[r * d..(r + 1) * d].iter_mut().zip(x) {
                *g += a * xv;
            }
            let u_row = &u[r * hs..(r + 1) * hs];
            let g_row = &mut grad[u_off + r * hs..u_off + (r + 1) * hs];
            for ((g, hv), (dn, uv)) in g_row.iter_mut().zip(h_prev).zip(adj.dh_next.iter_mut().zip(u_row)) {
                *g += a * hv;
                *dn += a * uv;
            }
        }
        core::mem::swap(&mut adj.dh, &mut adj.dh_next);
    }
}

fn check_window(p: &LstmParams, window: &[f64], window_length: usize) -> Result<()> {
    let expected = window_length * p.input_dim();
    if window_length == 0 || window.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: window.len() });
    }
    Ok(())
}

/// Runs the cell over a row-major `window_length x d` window from zero state
/// and applies the head.
pub fn forward_sequence(p: &LstmParams, window: &[f64], window_length: usize) -> Result<Vec<f64>> {
    check_window(p, window, window_length)?;
    let mut tape = Tape::new(p, window_length);
    tape.run(p, window);
    let mut out = vec![0.0; p.input_dim()];
    tape.predict_into(p, &mut out);
    Ok(out)
}

/// Mean squared error of one window's prediction and its analytic gradient.
pub fn loss_and_gradient(p: &LstmParams, window: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = p.input_dim();
    if target.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: target.len() });
    }
    if window.is_empty() || window.len() % d != 0 {
        return Err(Error::DimensionMismatch { expected: d, got: window.len() % d });
    }
    let steps = window.len() / d;
    let mut tape = Tape::new(p, steps);
    tape.run(p, window);
    let mut pred = vec![0.0; d];
    tape.predict_into(p, &mut pred);
    let dy: Vec<f64> = pred.iter().zip(target).map(|(y, t)| 2.0 * (y - t) / d as f64).collect();
    let loss = pred.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / d as f64;
    let mut grad = vec![0.0; p.len()];
    backward(p, &tape, window, &dy, &mut grad, &mut Adjoint::new(p.hidden_size()));
    Ok((loss, grad))
}

/// Largest relative disagreement between the analytic gradient and central
/// differences, over every parameter.
///
/// Each error is `|a - n| / max(|a|, |n|, floor)`; the floor keeps parameters
/// with vanishing gradient from dividing round-off by zero.
pub fn gradient_check(p: &LstmParams, window: &[f64], target: &[f64], floor: f64) -> Result<f64> {
    let (_, analytic) = loss_and_gradient(p, window, target)?;
    let mut probe = p.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = p.values()[k];
        probe.values_mut()[k] = orig + FD_STEP;
        let (up, _) = loss_and_gradient(&probe, window, target)?;
        probe.values_mut()[k] = orig - FD_STEP;
        let (down, _) = loss_and_gradient(&probe, window, target)?;
        probe.values_mut()[k] = orig;
        let n = (up - down) / (2.0 * FD_STEP);
        let err = (a - n).abs() / a.abs().max(n.abs()).max(floor);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(Self::BETA1, self.t as f64);
        let c2 = 1.0 - libm::pow(Self::BETA2, self.t as f64);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / (libm::sqrt(*v / c2) + Self::EPS);
        }
    }
}

/// Result of [`train`]: final parameters and the per-epoch training MSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmTraining {
    pub params: LstmParams,
    pub loss_curve: Vec<f64>,
    /// Optimizer steps whose gradient was rescaled by clipping.
    pub clip_events: usize,
}

/// Number of `(window, next row)` samples in a series.
fn sample_count(series: &Trajectory, window_length: usize) -> Result<usize> {
    if series.len() < window_length + 2 {
        return Err(Error::InsufficientData { needed: window_length + 2, got: series.len() });
    }
    Ok(series.len() - window_length)
}

/// Fits a freshly initialized network to predict each row from the
/// `window_length` rows before it.
pub fn train(series: &Trajectory, config: &LstmConfig) -> Result<LstmTraining> {
    config.validate()?;
    let params = LstmParams::init(config.input_dim, config.hidden_size, config.seed)?;
    train_from(params, series, config)
}

/// Mini-batch Adam on the one-step MSE, starting from `params`.
pub fn train_from(mut params: LstmParams, series: &Trajectory, config: &LstmConfig) -> Result<LstmTraining> {
    config.validate()?;
    let (d, hs, l) = (params.input_dim(), params.hidden_size(), config.window_length);
    if series.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: series.dim() });
    }
    let n_samples = sample_count(series, l)?;
    let data = series.as_slice();
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9));
    let mut adam = Adam::new(params.len());
    let mut grad = vec![0.0; params.len()];
    let mut tape = Tape::new(&params, l);
    let mut adj = Adjoint::new(hs);
    let mut pred = vec![0.0; d];
    let mut dy = vec![0.0; d];
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut clip_events = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sq_err = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / (batch.len() * d) as f64;
            for &s in batch {
                let window = &data[s * d..(s + l) * d];
                let target = &data[(s + l) * d..(s + l + 1) * d];
                tape.run(&params, window);
                tape.predict_into(&params, &mut pred);
                for k in 0..d {
                    let r = pred[k] - target[k];
                    sq_err += r * r;
                    dy[k] = scale * r;
                }
                backward(&params, &tape, window, &dy, &mut grad, &mut adj);
            }
            let norm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
            if !norm.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            if norm > config.clip_norm {
                let s = config.clip_norm / norm;
                grad.iter_mut().for_each(|g| *g *= s);
                clip_events += 1;
            }
            adam.step(params.values_mut(), &grad, config.learning_rate);
            if !params.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
        }
        let loss = sq_err / (n_samples * d) as f64;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        loss_curve.push(loss);
    }
    Ok(LstmTraining { params, loss_curve, clip_events })
}

/// Teacher-forced one-step MSE over every window of `series`.
pub fn one_step_mse(p: &LstmParams, series: &Trajectory, window_length: usize) -> Result<f64> {
    let d = p.input_dim();
    if series.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: series.dim() });
    }
    let n_samples = sample_count(series, window_length)?;
    let data = series.as_slice();
    let mut tape = Tape::new(p, window_length);
    let mut pred = vec![0.0; d];
    let mut sq_err = 0.0;
    for s in 0..n_samples {
        tape.run(p, &data[s * d..(s + window_length) * d]);
        tape.predict_into(p, &mut pred);
        let target = &data[(s + window_length) * d..(s + window_length + 1) * d];
        sq_err += pred.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    }
    Ok(sq_err / (n_samples * d) as f64)
}

/// Closed-loop rollout seeded with the last `window_length` rows of `history`.
pub fn forecast(p: &LstmParams, history: &Trajectory, window_length: usize, n_steps: usize) -> Result<Forecast> {
    forecast_bounded(p, history, window_length, n_steps, DIVERGENCE_BOUND)
}

pub fn forecast_bounded(
    p: &LstmParams,
    history: &Trajectory,
    window_length: usize,
    n_steps: usize,
    bound: f64,
) -> Result<Forecast> {
    let d = p.input_dim();
    if history.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: history.dim() });
    }
    if window_length == 0 || history.len() < window_length {
        return Err(Error::InsufficientData { needed: window_length.max(1), got: history.len() });
    }
    let mut window = history.slice(history.len() - window_length..history.len())?.into_data();
    let mut tape = Tape::new(p, window_length);
    let mut pred = vec![0.0; d];
    let mut out = Trajectory::empty(history.dt(), history.time(history.len()), d);
    let mut diverged_at = None;
    for step in 0..n_steps {
        tape.run(p, &window);
        tape.predict_into(p, &mut pred);
        if !within_bound(&pred, bound) {
            diverged_at = Some(step);
            break;
        }
        out.push_row(&pred)?;
        window.drain(..d);
        window.extend_from_slice(&pred);
    }
    Ok(Forecast { trajectory: out, diverged_at })
}
