//! Echo state network: a fixed random leaky-tanh reservoir with a ridge-trained
//! linear readout, run open loop for training and closed loop for forecasting.
//!
//! State update, with leak rate `g`:
//!
//! ```text
//! x(t+1) = (1 - g) x(t) + g tanh(W x(t) + W_in u(t) + b)
//! y(t)   = W_out x(t)
//! ```

mod sparse;
mod spectral;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{within_bound, Forecast, DIVERGENCE_BOUND};
use crate::numerics::ridge_solve;
use crate::trajectory::Trajectory;

pub use sparse::CsrMatrix;
pub use spectral::{spectral_radius, PowerIteration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsnConfig {
    pub n_units: usize,
    pub leak_rate: f64,
    pub spectral_radius: f64,
    pub connectivity: f64,
    pub regularization: f64,
    /// Half-width of the uniform distribution for the dense input weights.
    pub input_scaling: f64,
    /// Half-width of the uniform bias distribution; 0 disables the bias.
    pub bias_scaling: f64,
    pub seed: u64,
}

impl EsnConfig {
    /// Reservoir size used for the published comparison (4000 units).
    pub fn paper() -> Self {
        Self { n_units: 4000, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if self.n_units == 0 {
            return bad("n_units must be positive");
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return bad("leak_rate must lie in (0, 1]");
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return bad("spectral_radius must be positive");
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return bad("connectivity must lie in (0, 1]");
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return bad("regularization must be non-negative");
        }
        if !(self.input_scaling.is_finite() && self.bias_scaling.is_finite()) {
            return bad("input and bias scaling must be finite");
        }
        Ok(())
    }
}

impl Default for EsnConfig {
    /// 1000 units, otherwise the published hyperparameters.
    fn default() -> Self {
        Self {
            n_units: 1000,
            leak_rate: 0.3,
            spectral_radius: 1.25,
            connectivity: 0.1,
            regularization: 1e-8,
            input_scaling: 1.0,
            bias_scaling: 0.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Clock {
    dt: f64,
    next_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnModel {
    config: EsnConfig,
    dim: usize,
    #[serde(with = "crate::matrix_serde")]
    w_in: DMatrix<f64>,
    w: CsrMatrix,
    bias: Vec<f64>,
    #[serde(with = "crate::matrix_serde::option")]
    w_out: Option<DMatrix<f64>>,
    state: Vec<f64>,
    clock: Option<Clock>,
}

impl EsnModel {
    /// Draws the fixed reservoir for `dim`-dimensional inputs.
    ///
    /// Draw order from the seeded stream: input weights row by row, then the
    /// recurrent mask and values row by row, then the bias. The recurrent
    /// matrix is rescaled to the configured spectral radius.
    pub fn new(config: EsnConfig, dim: usize) -> Result<Self> {
        Self::with_power_iteration(config, dim, &PowerIteration::default())
    }

    pub fn with_power_iteration(config: EsnConfig, dim: usize, power: &PowerIteration) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::InvalidInput("input dimension must be positive".into()));
        }
        let n = config.n_units;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let s_in = config.input_scaling;
        let mut w_in = DMatrix::zeros(n, dim);
        for r in 0..n {
            for c in 0..dim {
                w_in[(r, c)] = if s_in == 0.0 { 0.0 } else { rng.random_range(-s_in..=s_in) };
            }
        }

        let mut triplets = Vec::with_capacity((config.connectivity * (n * n) as f64) as usize + n);
        for r in 0..n {
            for c in 0..n {
                if rng.random::<f64>() < config.connectivity {
                    triplets.push((r, c, rng.random_range(-1.0..=1.0)));
                }
            }
        }
        let mut w = CsrMatrix::from_sorted_triplets(n, triplets);

        let s_b = config.bias_scaling;
        let bias = (0..n).map(|_| if s_b == 0.0 { 0.0 } else { rng.random_range(-s_b..=s_b) }).collect();

        let measured = spectral_radius(&w, config.seed ^ 0x5eed_5eed, power)?;
        if measured == 0.0 {
            return Err(Error::InvalidInput("recurrent matrix is nilpotent; cannot rescale spectral radius".into()));
        }
        w.scale(config.spectral_radius / measured);

        Ok(Self { config, dim, w_in, w, bias, w_out: None, state: vec![0.0; n], clock: None })
    }

    /// Assembles a model from explicit weights. The recurrent matrix is used as given.
    pub fn from_parts(config: EsnConfig, w_in: DMatrix<f64>, w: CsrMatrix, bias: Vec<f64>) -> Result<Self> {
        let n = w.size();
        if w_in.nrows() != n || bias.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: w_in.nrows().min(bias.len()) });
        }
        if !(config.leak_rate > 0.0 && config.leak_rate <= 1.0) {
            return Err(Error::InvalidInput("leak_rate must lie in (0, 1]".into()));
        }
        let dim = w_in.ncols();
        Ok(Self { config: EsnConfig { n_units: n, ..config }, dim, w_in, w, bias, w_out: None, state: vec![0.0; n], clock: None })
    }

    pub fn config(&self) -> &EsnConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_units(&self) -> usize {
        self.state.len()
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.w_in
    }

    pub fn recurrent_weights(&self) -> &CsrMatrix {
        &self.w
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn readout(&self) -> Option<&DMatrix<f64>> {
        self.w_out.as_ref()
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn set_state(&mut self, state: &[f64]) -> Result<()> {
        if state.len() != self.state.len() {
            return Err(Error::DimensionMismatch { expected: self.state.len(), got: state.len() });
        }
        self.state.copy_from_slice(state);
        Ok(())
    }

    pub fn reset_state(&mut self) {
        self.state.iter_mut().for_each(|v| *v = 0.0);
    }

    /// One leaky update with input `u`, using `scratch` for the recurrent product.
    fn step(&mut self, u: &[f64], scratch: &mut [f64]) {
        self.w.mul_vec_into(&self.state, scratch);
        let g = self.config.leak_rate;
        for (r, x) in self.state.iter_mut().enumerate() {
            let mut pre = scratch[r] + self.bias[r];
            for (c, uc) in u.iter().enumerate() {
                pre += self.w_in[(r, c)] * uc;
            }
            *x = (1.0 - g) * *x + g * libm::tanh(pre);
        }
    }

    /// Teacher-forced pass: one update per input row starting from the current
    /// state. Returns every post-update state (`rows x n_units`).
    pub fn drive(&mut self, inputs: &Trajectory) -> Result<DMatrix<f64>> {
        if inputs.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: inputs.dim() });
        }
        let n = self.n_units();
        let mut states = DMatrix::zeros(inputs.len(), n);
        let mut scratch = vec![0.0; n];
        for (i, u) in inputs.rows().enumerate() {
            self.step(u, &mut scratch);
            if self.state.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { step: i });
            }
            for (j, v) in self.state.iter().enumerate() {
                states[(i, j)] = *v;
            }
        }
        self.clock = Some(Clock { dt: inputs.dt(), next_t: inputs.time(inputs.len()) });
        Ok(states)
    }

    /// Fits the readout on `series`.
    ///
    /// The reservoir is reset and driven over every row. The state reached
    /// after row `i - 1` is regressed onto row `i` for each `i` in
    /// `warmup..len`, so exactly `len - warmup` rows enter the ridge problem.
    /// On return the reservoir holds the state after the final row, ready to
    /// forecast the row that follows the series.
    pub fn train_readout(&mut self, series: &Trajectory, warmup: usize) -> Result<()> {
        if warmup == 0 {
            return Err(Error::InvalidInput("reservoir warm-up must be at least one row".into()));
        }
        if series.len() < warmup + 2 {
            return Err(Error::InsufficientData { needed: warmup + 2, got: series.len() });
        }
        self.reset_state();
        let states = self.drive(series)?;
        let rows = series.len() - warmup;
        let features = states.rows(warmup - 1, rows).into_owned();
        let mut targets = DMatrix::zeros(rows, self.dim);
        for (k, i) in (warmup..series.len()).enumerate() {
            for (j, v) in series.row(i).iter().enumerate() {
                targets[(k, j)] = *v;
            }
        }
        let weights = ridge_solve(&features, &targets, self.config.regularization)?;
        self.w_out = Some(weights.transpose());
        Ok(())
    }

    /// Current readout output `W_out x`.
    pub fn output(&self) -> Result<Vec<f64>> {
        let w_out = self.w_out.as_ref().ok_or(Error::Untrained)?;
        Ok((0..self.dim)
            .map(|i| w_out.row(i).iter().zip(&self.state).map(|(w, x)| w * x).sum())
            .collect())
    }

    /// Closed-loop rollout: emit the readout, feed it back as the next input.
    pub fn forecast(&mut self, n_steps: usize) -> Result<Forecast> {
        self.forecast_bounded(n_steps, DIVERGENCE_BOUND)
    }

    pub fn forecast_bounded(&mut self, n_steps: usize, bound: f64) -> Result<Forecast> {
        if self.w_out.is_none() {
            return Err(Error::Untrained);
        }
        let (dt, t0) = self.clock.as_ref().map(|c| (c.dt, c.next_t)).unwrap_or((1.0, 0.0));
        let mut out = Trajectory::empty(dt, t0, self.dim);
        let mut scratch = vec![0.0; self.n_units()];
        let mut diverged_at = None;
        for step in 0..n_steps {
            let y = self.output()?;
            if !within_bound(&y, bound) {
                diverged_at = Some(step);
                break;
            }
            out.push_row(&y)?;
            self.step(&y, &mut scratch);
        }
        if let Some(c) = self.clock.as_mut() {
            c.next_t += out.len() as f64 * c.dt;
        }
        Ok(Forecast { trajectory: out, diverged_at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, make_benchmark, SystemId};
    use crate::numerics::MinMaxScaler;

    fn small(n_units: usize, seed: u64) -> EsnConfig {
        EsnConfig { n_units, seed, ..EsnConfig::default() }
    }

    fn dense_radius(m: &CsrMatrix) -> f64 {
        m.to_dense().complex_eigenvalues().iter().fold(0.0f64, |a, z| a.max(libm::hypot(z.re, z.im)))
    }

    #[test]
    fn spectral_radius_is_rescaled() {
        for n in [50, 100, 500] {
            let m = EsnModel::new(small(n, 3), 3).unwrap();
            let r = dense_radius(m.recurrent_weights());
            assert!((r - 1.25).abs() <= 1e-6 * 1.25, "n={n}: {r}");
        }
    }

    #[test]
    fn connectivity_matches_binomial_band() {
        for (n, p) in [(100usize, 0.1f64), (300, 0.05)] {
            let m = EsnModel::new(EsnConfig { connectivity: p, ..small(n, 8) }, 3).unwrap();
            let trials = (n * n) as f64;
            let sd = libm::sqrt(trials * p * (1.0 - p));
            assert!((m.recurrent_weights().nnz() as f64 - trials * p).abs() <= 3.0 * sd);
        }
        let full = EsnModel::new(EsnConfig { connectivity: 1.0, ..small(10, 1) }, 2).unwrap();
        assert_eq!(full.recurrent_weights().nnz(), 100);
        assert!(full.recurrent_weights().values().iter().all(|v| *v != 0.0));
    }

    #[test]
    fn construction_is_seed_deterministic() {
        let a = EsnModel::new(small(80, 5), 3).unwrap();
        let b = EsnModel::new(small(80, 5), 3).unwrap();
        assert_eq!(a, b);
        let c = EsnModel::new(small(80, 6), 3).unwrap();
        assert_ne!(a.input_weights(), c.input_weights());
    }

    #[test]
    fn zero_weights_give_zero_states() {
        let cfg = EsnConfig { leak_rate: 1.0, ..small(4, 0) };
        let mut m = EsnModel::from_parts(cfg, DMatrix::zeros(4, 2), CsrMatrix::zeros(4), vec![0.0; 4]).unwrap();
        let u = Trajectory::from_rows(0.1, 0.0, &[[3.0, -1.0], [0.5, 2.0]]).unwrap();
        let s = m.drive(&u).unwrap();
        assert!(s.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn leak_only_decay() {
        let cfg = EsnConfig { leak_rate: 0.3, ..small(3, 0) };
        let mut m = EsnModel::from_parts(cfg, DMatrix::zeros(3, 1), CsrMatrix::zeros(3), vec![0.0; 3]).unwrap();
        m.set_state(&[1.0, -2.0, 0.5]).unwrap();
        let s = m.drive(&Trajectory::from_rows(1.0, 0.0, &[[0.0]]).unwrap()).unwrap();
        assert_eq!(s.row(0).iter().copied().collect::<Vec<_>>(), vec![0.7, -1.4, 0.7 * 0.5]);
    }

    #[test]
    fn recurrence_has_memory() {
        let mut m = EsnModel::new(small(50, 2), 1).unwrap();
        let s = m.drive(&Trajectory::from_rows(1.0, 0.0, &[[0.4], [0.4]]).unwrap()).unwrap();
        assert_ne!(s.row(0), s.row(1));
    }

    #[test]
    fn echo_state_contraction() {
        let cfg = EsnConfig { spectral_radius: 0.9, ..small(200, 12) };
        let mut a = EsnModel::new(cfg.clone(), 1).unwrap();
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rows: Vec<[f64; 1]> = (0..500).map(|_| [rng.random_range(0.0..1.0)]).collect();
        let u = Trajectory::from_rows(1.0, 0.0, &rows).unwrap();
        let init: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        b.set_state(&init).unwrap();
        a.drive(&u).unwrap();
        b.drive(&u).unwrap();
        let gap = a.state().iter().zip(b.state()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(gap <= 1e-6, "{gap}");
    }

    fn lorenz_scaled(rows: usize) -> Trajectory {
        let (spec, x0) = make_benchmark(SystemId::Lorenz);
        let t = integrate(&spec, x0, 0.01, rows, None).unwrap();
        MinMaxScaler::fit(&t).unwrap().transform(&t).unwrap()
    }

    #[test]
    fn readout_solves_normal_equations() {
        let data = lorenz_scaled(600);
        let mut m = EsnModel::new(EsnConfig { regularization: 1e-6, ..small(120, 4) }, 3).unwrap();
        m.train_readout(&data, 100).unwrap();
        let mut probe = m.clone();
        probe.reset_state();
        let states = probe.drive(&data).unwrap();
        let x = states.rows(99, 500).into_owned();
        let z = DMatrix::from_fn(500, 3, |r, c| data.row(r + 100)[c]);
        let w = m.readout().unwrap().transpose();
        let xtz = x.transpose() * &z;
        let residual = (x.transpose() * &x + DMatrix::identity(120, 120) * 1e-6) * w - &xtz;
        assert!(residual.amax() <= 1e-8 * (1.0 + z.amax()), "{}", residual.amax());
    }

    #[test]
    fn training_needs_enough_rows() {
        let data = lorenz_scaled(50);
        let mut m = EsnModel::new(small(30, 1), 3).unwrap();
        assert!(matches!(m.train_readout(&data, 49), Err(Error::InsufficientData { .. })));
        assert!(m.train_readout(&data, 0).is_err());
        assert!(m.train_readout(&data, 48).is_ok());
    }

    #[test]
    fn forecast_requires_training_and_is_deterministic() {
        let data = lorenz_scaled(800);
        let mut m = EsnModel::new(small(100, 9), 3).unwrap();
        assert_eq!(m.forecast(5), Err(Error::Untrained));
        m.train_readout(&data, 100).unwrap();
        assert!(m.forecast(0).unwrap().is_empty());
        let mut a = m.clone();
        let mut b = m.clone();
        let fa = a.forecast(200).unwrap();
        assert_eq!(fa, b.forecast(200).unwrap());
        assert_eq!(fa.trajectory.t0(), data.time(800));
    }
}
