//! Next-generation reservoir computing (nonlinear vector autoregression).
//!
//! The "reservoir" is an explicit feature vector built from a few delayed
//! observations and their polynomial monomials; only a linear readout is
//! trained, by ridge regression.

mod features;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{within_bound, Forecast, DIVERGENCE_BOUND};
use crate::numerics::{ridge_solve, MinMaxScaler};
use crate::trajectory::Trajectory;

pub use features::FeatureLayout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgrcConfig {
    /// Number of delay taps `k`.
    #[serde(alias = "k")]
    pub delay_taps: usize,
    /// Spacing `s` between taps, in samples.
    #[serde(alias = "s")]
    pub stride: usize,
    /// Polynomial order `p` of the nonlinear block.
    #[serde(alias = "p")]
    pub order: usize,
    pub regularization: f64,
    pub constant_feature: f64,
    /// Regress the one-step increment instead of the next state.
    pub predict_increment: bool,
    /// Min-max scale inputs (fitted on the training series) before building
    /// features. With raw Lorenz-scale data the quadratic features reach
    /// the thousands and a penalty of 2.5e-6 no longer stabilizes the
    /// closed loop.
    pub scale_inputs: bool,
}

impl Default for NgrcConfig {
    fn default() -> Self {
        Self {
            delay_taps: 2,
            stride: 1,
            order: 2,
            regularization: 2.5e-6,
            constant_feature: 1.0,
            predict_increment: true,
            scale_inputs: true,
        }
    }
}

impl NgrcConfig {
    /// Smallest accepted warm-up: `s * k` rows.
    pub fn min_warmup(&self) -> usize {
        self.stride * self.delay_taps
    }
}

/// Readout weights with feature and output labels, one row per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub features: Vec<String>,
    pub outputs: Vec<String>,
    /// `features.len() x outputs.len()`
    pub weights: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgrcModel {
    config: NgrcConfig,
    layout: FeatureLayout,
    #[serde(with = "crate::matrix_serde::option")]
    w_out: Option<DMatrix<f64>>,
    scaler: Option<MinMaxScaler>,
}

impl NgrcModel {
    pub fn new(config: NgrcConfig, dim: usize) -> Result<Self> {
        if !(config.regularization >= 0.0 && config.regularization.is_finite()) {
            return Err(Error::InvalidInput("regularization must be non-negative".into()));
        }
        let layout = FeatureLayout::new(dim, config.delay_taps, config.stride, config.order)?;
        Ok(Self { config, layout, w_out: None, scaler: None })
    }

    /// Builds and fits a model in one go.
    pub fn train(series: &Trajectory, config: NgrcConfig, warmup: usize) -> Result<Self> {
        let mut model = Self::new(config, series.dim())?;
        model.fit(series, warmup)?;
        Ok(model)
    }

    pub fn config(&self) -> &NgrcConfig {
        &self.config
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    /// `dim x n_total`, present after training.
    pub fn readout(&self) -> Option<&DMatrix<f64>> {
        self.w_out.as_ref()
    }

    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    /// Feature matrix (one row per regression target) and targets for `series`.
    ///
    /// Row `i` of `series` for `i` in `warmup..len` is a target; its features
    /// come from the window ending at row `i - 1`.
    pub fn design(&self, series: &Trajectory, warmup: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let d = self.layout.dim();
        if series.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: series.dim() });
        }
        let min_warmup = self.config.min_warmup();
        if warmup < min_warmup {
            return Err(Error::InvalidInput(alloc::format!(
                "warm-up of {warmup} rows is shorter than s*k = {min_warmup}"
            )));
        }
        if series.len() < warmup + 2 {
            return Err(Error::InsufficientData { needed: warmup + 2, got: series.len() });
        }
        let hist = self.layout.history_len();
        let rows = series.len() - warmup;
        let n_total = self.layout.n_total();
        let mut features = DMatrix::zeros(rows, n_total);
        let mut targets = DMatrix::zeros(rows, d);
        let mut buf = vec![0.0; n_total];
        let data = series.as_slice();
        for (r, i) in (warmup..series.len()).enumerate() {
            let window = &data[(i - hist) * d..i * d];
            self.layout.build_into(window, self.config.constant_feature, &mut buf)?;
            for (c, v) in buf.iter().enumerate() {
                features[(r, c)] = *v;
            }
            let next = series.row(i);
            let last = series.row(i - 1);
            for j in 0..d {
                targets[(r, j)] = if self.config.predict_increment { next[j] - last[j] } else { next[j] };
            }
        }
        Ok((features, targets))
    }

    /// Fits the readout; exactly `series.len() - warmup` rows are regressed.
    pub fn fit(&mut self, series: &Trajectory, warmup: usize) -> Result<()> {
        let scaled;
        let series = if self.config.scale_inputs {
            let scaler = MinMaxScaler::fit(series)?;
            scaled = scaler.transform(series)?;
            self.scaler = Some(scaler);
            &scaled
        } else {
            self.scaler = None;
            series
        };
        let (features, targets) = self.design(series, warmup)?;
        let weights = ridge_solve(&features, &targets, self.config.regularization)?;
        self.w_out = Some(weights.transpose());
        Ok(())
    }

    /// Closed-loop rollout seeded with the last `(k - 1) s + 1` rows of `history`.
    pub fn forecast(&self, history: &Trajectory, n_steps: usize) -> Result<Forecast> {
        self.forecast_bounded(history, n_steps, DIVERGENCE_BOUND)
    }

    pub fn forecast_bounded(&self, history: &Trajectory, n_steps: usize, bound: f64) -> Result<Forecast> {
        let w_out = self.w_out.as_ref().ok_or(Error::Untrained)?;
        let d = self.layout.dim();
        if history.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: history.dim() });
        }
        let hist = self.layout.history_len();
        if history.len() < hist {
            return Err(Error::InsufficientData { needed: hist, got: history.len() });
        }
        let mut window = history.slice(history.len() - hist..history.len())?.into_data();
        if let Some(s) = &self.scaler {
            for row in window.chunks_exact_mut(d) {
                s.transform_row(row)?;
            }
        }
        let mut out = Trajectory::empty(history.dt(), history.time(history.len()), d);
        let mut feats = vec![0.0; self.layout.n_total()];
        let mut next = vec![0.0; d];
        let mut diverged_at = None;
        for step in 0..n_steps {
            self.layout.build_into(&window, self.config.constant_feature, &mut feats)?;
            let last = &window[window.len() - d..];
            for (j, v) in next.iter_mut().enumerate() {
                let y: f64 = w_out.row(j).iter().zip(&feats).map(|(w, f)| w * f).sum();
                *v = if self.config.predict_increment { last[j] + y } else { y };
            }
            let mut emitted = next.clone();
            if let Some(s) = &self.scaler {
                s.inverse_transform_row(&mut emitted)?;
            }
            if !within_bound(&emitted, bound) {
                diverged_at = Some(step);
                break;
            }
            out.push_row(&emitted)?;
            window.drain(..d);
            window.extend_from_slice(&next);
        }
        Ok(Forecast { trajectory: out, diverged_at })
    }

    /// Labeled readout weights, one row per feature column.
    pub fn weights(&self) -> Result<WeightTable> {
        let w_out = self.w_out.as_ref().ok_or(Error::Untrained)?;
        Ok(WeightTable {
            features: self.layout.labels(),
            outputs: self.layout.dim_names(),
            weights: w_out.transpose(),
        })
    }
}
