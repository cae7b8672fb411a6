//! Forecast quality measures: error norms, valid prediction horizon and a
//! coarse attractor-shape summary (bounding box plus lobe switches).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Forecast;
use crate::trajectory::Trajectory;

/// Default normalized-error threshold for [`valid_time`].
pub const DEFAULT_VALID_THRESHOLD: f64 = 0.4;

fn check_pair(pred: &Trajectory, truth: &Trajectory) -> Result<()> {
    if pred.dim() != truth.dim() {
        return Err(Error::DimensionMismatch { expected: truth.dim(), got: pred.dim() });
    }
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: pred.len() });
    }
    if truth.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn rmse(pred: &Trajectory, truth: &Trajectory) -> Result<Vec<f64>> {
    check_pair(pred, truth)?;
    let mut acc = vec![0.0; truth.dim()];
    for (p, t) in pred.rows().zip(truth.rows()) {
        for j in 0..acc.len() {
            let e = p[j] - t[j];
            acc[j] += e * e;
        }
    }
    let n = truth.len() as f64;
    Ok(acc.into_iter().map(|s| libm::sqrt(s / n)).collect())
}

/// Population standard deviation of every column.
pub fn column_std(traj: &Trajectory) -> Vec<f64> {
    let n = traj.len() as f64;
    (0..traj.dim())
        .map(|j| {
            let mean = traj.column(j).sum::<f64>() / n;
            libm::sqrt(traj.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
        })
        .collect()
}

fn nonzero_std(truth: &Trajectory) -> Result<Vec<f64>> {
    let std = column_std(truth);
    if let Some(j) = std.iter().position(|s| *s == 0.0) {
        return Err(Error::InvalidInput(alloc::format!("truth dimension {j} has zero variance")));
    }
    Ok(std)
}

/// Mean over dimensions of `rmse / std(truth)`.
pub fn nrmse(pred: &Trajectory, truth: &Trajectory) -> Result<f64> {
    let r = rmse(pred, truth)?;
    let std = nonzero_std(truth)?;
    Ok(r.iter().zip(&std).map(|(e, s)| e / s).sum::<f64>() / r.len() as f64)
}

/// Number of leading steps whose normalized error stays at or below `threshold`.
///
/// The error at step `t` is the root mean square over dimensions of
/// `(pred - truth) / std`, with `std` the per-dimension standard deviation of
/// the whole truth segment. Returns the forecast length when the threshold is
/// never crossed.
pub fn valid_time(pred: &Trajectory, truth: &Trajectory, threshold: f64) -> Result<usize> {
    check_pair(pred, truth)?;
    if !(threshold > 0.0) {
        return Err(Error::InvalidInput("valid-time threshold must be positive".into()));
    }
    let std = nonzero_std(truth)?;
    Ok(valid_prefix(pred, truth, &std, threshold))
}

fn valid_prefix(pred: &Trajectory, truth: &Trajectory, std: &[f64], threshold: f64) -> usize {
    let d = std.len() as f64;
    for (i, (p, t)) in pred.rows().zip(truth.rows()).enumerate() {
        let mut acc = 0.0;
        for j in 0..std.len() {
            let e = (p[j] - t[j]) / std[j];
            acc += e * e;
        }
        if !(libm::sqrt(acc / d) <= threshold) {
            return i;
        }
    }
    pred.len()
}

/// Axis-aligned extent of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    /// Box grown on every side by `margin` times its extent along that axis.
    pub fn expanded(&self, margin: f64) -> Self {
        let (min, max) = self
            .min
            .iter()
            .zip(&self.max)
            .map(|(lo, hi)| {
                let pad = margin * (hi - lo);
                (lo - pad, hi + pad)
            })
            .unzip();
        Self { min, max }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.min.len() && p.iter().enumerate().all(|(j, v)| *v >= self.min[j] && *v <= self.max[j])
    }

    pub fn contains(&self, traj: &Trajectory) -> bool {
        traj.rows().all(|r| self.contains_point(r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub bounds: BoundingBox,
    /// Sign flips of the first coordinate; zeros carry the previous sign.
    pub lobe_sign_changes: usize,
}

pub fn attractor_box_and_lobes(traj: &Trajectory) -> Result<AttractorSummary> {
    if traj.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut min = traj.row(0).to_vec();
    let mut max = min.clone();
    for r in traj.rows() {
        for j in 0..r.len() {
            min[j] = min[j].min(r[j]);
            max[j] = max[j].max(r[j]);
        }
    }
    Ok(AttractorSummary { bounds: BoundingBox { min, max }, lobe_sign_changes: sign_changes(traj.column(0)) })
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last: Option<bool> = None;
    let mut count = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        let positive = v > 0.0;
        if last.is_some_and(|l| l != positive) {
            count += 1;
        }
        last = Some(positive);
    }
    count
}

/// Thresholds used when scoring a forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub valid_threshold: f64,
    /// Fractional padding of the truth bounding box for the containment check.
    pub box_margin: f64,
    /// Minimum lobe switches for a forecast to count as visiting both wings.
    pub min_lobe_changes: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { valid_threshold: DEFAULT_VALID_THRESHOLD, box_margin: 0.2, min_lobe_changes: 5 }
    }
}

/// Accuracy and shape scores of one closed-loop forecast against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub forecast_steps: usize,
    pub rmse_per_dim: Vec<f64>,
    pub nrmse: Option<f64>,
    pub valid_time_steps: usize,
    pub valid_time_seconds: f64,
    pub lobe_sign_changes: usize,
    pub truth_lobe_sign_changes: usize,
    pub bounded: bool,
    pub diverged_at: Option<usize>,
    pub in_box: bool,
    pub train_wall_time_s: f64,
}

impl ForecastReport {
    /// Scores `forecast` against `truth` (same dimension, at least as long).
    ///
    /// The containment check uses the padded bounding box of `reference`,
    /// normally the full generated series. A truncated forecast is scored on
    /// its surviving prefix and is never bounded or in-box.
    pub fn evaluate(
        forecast: &Forecast,
        truth: &Trajectory,
        reference: &Trajectory,
        opts: &EvalOptions,
        train_wall_time_s: f64,
    ) -> Result<Self> {
        let pred = &forecast.trajectory;
        if pred.dim() != truth.dim() {
            return Err(Error::DimensionMismatch { expected: truth.dim(), got: pred.dim() });
        }
        if pred.len() > truth.len() {
            return Err(Error::DimensionMismatch { expected: truth.len(), got: pred.len() });
        }
        let truth_summary = attractor_box_and_lobes(truth)?;
        let reference_box = attractor_box_and_lobes(reference)?.bounds.expanded(opts.box_margin);
        let std = column_std(truth);
        let prefix = truth.slice(0..pred.len())?;
        let (rmse_per_dim, nrmse, valid) = if pred.is_empty() {
            (Vec::new(), None, 0)
        } else {
            let r = rmse(pred, &prefix)?;
            let nrmse = if std.iter().all(|s| *s > 0.0) {
                Some(r.iter().zip(&std).map(|(e, s)| e / s).sum::<f64>() / r.len() as f64)
            } else {
                None
            };
            let valid = if std.iter().all(|s| *s > 0.0) { valid_prefix(pred, &prefix, &std, opts.valid_threshold) } else { 0 };
            (r, nrmse, valid)
        };
        let bounded = forecast.is_bounded() && pred.is_finite();
        let (lobes, in_box) = if pred.is_empty() {
            (0, bounded)
        } else {
            let s = attractor_box_and_lobes(pred)?;
            (s.lobe_sign_changes, bounded && reference_box.contains(pred))
        };
        Ok(Self {
            forecast_steps: pred.len(),
            rmse_per_dim,
            nrmse,
            valid_time_steps: valid,
            valid_time_seconds: valid as f64 * truth.dt(),
            lobe_sign_changes: lobes,
            truth_lobe_sign_changes: truth_summary.lobe_sign_changes,
            bounded,
            diverged_at: forecast.diverged_at,
            in_box,
            train_wall_time_s,
        })
    }

    /// Bounded, inside the padded truth box, and switching lobes often enough.
    pub fn passes_shape_checks(&self, opts: &EvalOptions) -> bool {
        self.bounded && self.in_box && self.lobe_sign_changes >= opts.min_lobe_changes
    }
}
