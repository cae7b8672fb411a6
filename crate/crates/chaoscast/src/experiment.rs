//! One experiment end to end: generate, split, scale, train, forecast, score,
//! write artifacts.

use std::fs;
use std::path::Path;
use std::time::Instant;

use chaoscast_core::dynamics::{integrate, make_benchmark, NoiseConfig};
use chaoscast_core::esn::EsnModel;
use chaoscast_core::lstm::{self, LstmConfig, LstmParams};
use chaoscast_core::metrics::{EvalOptions, ForecastReport};
use chaoscast_core::ngrc::NgrcModel;
use chaoscast_core::numerics::MinMaxScaler;
use chaoscast_core::{Forecast, Trajectory};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method};
use crate::csv;
use crate::error::{Error, Result};

/// Runs `f` and returns its result with the elapsed wall time in seconds.
pub fn time_training<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// The series the model sees and the noise-free run from the same start.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub series: Trajectory,
    pub clean: Trajectory,
}

pub fn generate(config: &ExperimentConfig) -> Result<Dataset> {
    let (spec, x0) = make_benchmark(config.system);
    let clean = integrate(&spec, x0, config.dt, config.total_points, None)?;
    let series = if config.noise_magnitude > 0.0 {
        let noise = NoiseConfig { magnitude: config.noise_magnitude, seed: config.seed };
        integrate(&spec, x0, config.dt, config.total_points, Some(&noise))?
    } else {
        clean.clone()
    };
    Ok(Dataset { series, clean })
}

/// A trained model together with the scaling it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SavedModel {
    Ngrc {
        model: NgrcModel,
    },
    Rc {
        scaler: MinMaxScaler,
        model: EsnModel,
    },
    Lstm {
        scaler: MinMaxScaler,
        config: LstmConfig,
        params: LstmParams,
        loss_curve: Vec<f64>,
        clip_events: usize,
    },
}

impl SavedModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })
    }
}

/// Model, forecast in data units, and training cost.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub model: SavedModel,
    pub forecast: Forecast,
    pub train_wall_time_s: f64,
    pub regression_rows: usize,
}

fn unscale(forecast: Forecast, scaler: &MinMaxScaler) -> Result<Forecast> {
    Ok(Forecast { trajectory: scaler.inverse_transform(&forecast.trajectory)?, diverged_at: forecast.diverged_at })
}

/// Trains on the warm-up and training rows of `series` and forecasts the
/// test horizon. Test rows are never read.
pub fn fit_and_forecast(config: &ExperimentConfig, series: &Trajectory) -> Result<FitOutput> {
    let split = config.split;
    let fit = series.slice(0..split.fit_rows())?;
    match config.method {
        Method::Ngrc => {
            let (model, secs) = time_training(|| NgrcModel::train(&fit, config.ngrc(), split.warmup));
            let model = model?;
            let forecast = model.forecast(&fit, split.test)?;
            Ok(FitOutput {
                model: SavedModel::Ngrc { model },
                forecast,
                train_wall_time_s: secs,
                regression_rows: split.train,
            })
        }
        Method::Rc => {
            let (trained, secs) = time_training(|| -> chaoscast_core::Result<_> {
                let scaler = MinMaxScaler::fit(&fit)?;
                let scaled = scaler.transform(&fit)?;
                let mut model = EsnModel::new(config.rc(), series.dim())?;
                model.train_readout(&scaled, split.warmup)?;
                Ok((scaler, model))
            });
            let (scaler, model) = trained?;
            let forecast = unscale(model.clone().forecast(split.test)?, &scaler)?;
            Ok(FitOutput {
                model: SavedModel::Rc { scaler, model },
                forecast,
                train_wall_time_s: secs,
                regression_rows: split.train,
            })
        }
        Method::Lstm => {
            let cfg = LstmConfig { input_dim: series.dim(), ..config.lstm() };
            let (trained, secs) = time_training(|| -> chaoscast_core::Result<_> {
                let scaler = MinMaxScaler::fit(&fit)?;
                let scaled = scaler.transform(&fit)?;
                let training = lstm::train(&scaled.slice(split.warmup..split.fit_rows())?, &cfg)?;
                Ok((scaler, scaled, training))
            });
            let (scaler, scaled, training) = trained?;
            let forecast = lstm::forecast(&training.params, &scaled, cfg.window_length, split.test)?;
            let forecast = unscale(forecast, &scaler)?;
            Ok(FitOutput {
                regression_rows: split.train.saturating_sub(cfg.window_length),
                model: SavedModel::Lstm {
                    scaler,
                    config: cfg,
                    params: training.params,
                    loss_curve: training.loss_curve,
                    clip_events: training.clip_events,
                },
                forecast,
                train_wall_time_s: secs,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmSummary {
    pub epochs: usize,
    pub final_train_mse: Option<f64>,
    pub clip_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    /// Method hyperparameters exactly as run.
    pub hyperparameters: serde_json::Value,
    pub regression_rows: usize,
    /// Scores against the noise-free trajectory.
    pub metrics: ForecastReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lstm: Option<LstmSummary>,
    /// Files written to the output directory.
    pub files: Vec<String>,
}

impl ExperimentReport {
    pub fn passes_shape_checks(&self) -> bool {
        self.metrics.passes_shape_checks(&EvalOptions::default())
    }
}

fn hyperparameters(config: &ExperimentConfig, model: &SavedModel) -> Result<serde_json::Value> {
    Ok(match model {
        SavedModel::Ngrc { model } => serde_json::to_value(model.config())?,
        SavedModel::Rc { .. } => serde_json::to_value(config.rc())?,
        SavedModel::Lstm { config, .. } => serde_json::to_value(config)?,
    })
}

/// Runs one experiment and writes its artifacts into `out_dir`.
///
/// If a step fails after the directory was created, `failed.txt` records
/// the error next to whatever was already written.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    let result = run_inner(config, out_dir);
    if let Err(e) = &result {
        if out_dir.is_dir() {
            let _ = fs::write(out_dir.join("failed.txt"), format!("{e}\n"));
        }
    }
    result
}

fn run_inner(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let with_context = |source| Error::Experiment { experiment_id: config.experiment_id.clone(), source };
    let data = generate(config).map_err(|e| match e {
        Error::Core(c) => with_context(c),
        other => other,
    })?;
    let fit = fit_and_forecast(config, &data.series).map_err(|e| match e {
        Error::Core(c) => with_context(c),
        other => other,
    })?;
    let split = config.split;
    let truth = data.clean.slice(split.fit_rows()..split.total()).map_err(with_context)?;
    let metrics = ForecastReport::evaluate(&fit.forecast, &truth, &data.clean, &EvalOptions::default(), fit.train_wall_time_s)
        .map_err(with_context)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let _ = fs::remove_file(out_dir.join("failed.txt"));
    let mut files = Vec::new();
    let mut emit = |name: &str, contents: &str| -> Result<()> {
        csv::write(&out_dir.join(name), contents)?;
        files.push(name.to_string());
        Ok(())
    };
    emit("data.csv", &csv::trajectory_csv(&data.series))?;
    emit("truth.csv", &csv::trajectory_csv(&truth))?;
    emit("prediction.csv", &csv::trajectory_csv(&fit.forecast.trajectory))?;
    let mut lstm_summary = None;
    match &fit.model {
        SavedModel::Ngrc { model } => emit("weights.csv", &csv::weights_csv(&model.weights()?))?,
        SavedModel::Lstm { config, loss_curve, clip_events, .. } => {
            emit("loss.csv", &csv::loss_csv(loss_curve))?;
            lstm_summary = Some(LstmSummary {
                epochs: config.epochs,
                final_train_mse: loss_curve.last().copied(),
                clip_events: *clip_events,
            });
        }
        SavedModel::Rc { .. } => {}
    }
    emit("model.json", &serde_json::to_string(&fit.model)?)?;
    files.push("report.json".into());

    let report = ExperimentReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        hyperparameters: hyperparameters(config, &fit.model)?,
        regression_rows: fit.regression_rows,
        metrics,
        lstm: lstm_summary,
        files,
    };
    csv::write(&out_dir.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MethodOverrides, Split};
    use chaoscast_core::dynamics::SystemId;
    use chaoscast_core::esn::EsnConfig;

    fn small(method: Method) -> ExperimentConfig {
        let mut c = crate::presets::task1(SystemId::Lorenz, method);
        c.total_points = 800;
        c.split = Split { warmup: if method == Method::Lstm { 0 } else { 20 }, train: 580, test: 200 };
        c.method_overrides = match method {
            Method::Rc => MethodOverrides { rc: Some(EsnConfig { n_units: 60, ..EsnConfig::default() }), ..Default::default() },
            Method::Lstm => MethodOverrides {
                lstm: Some(LstmConfig { epochs: 2, hidden_size: 4, window_length: 8, ..LstmConfig::default() }),
                ..Default::default()
            },
            Method::Ngrc => MethodOverrides::default(),
        };
        c
    }

    #[test]
    fn noise_free_dataset_has_identical_series() {
        let d = generate(&small(Method::Ngrc)).unwrap();
        assert_eq!(d.series, d.clean);
        let mut noisy = small(Method::Ngrc);
        noisy.noise_magnitude = 1.0;
        let d = generate(&noisy).unwrap();
        assert_ne!(d.series, d.clean);
        assert_eq!(d.series.row(0), d.clean.row(0));
    }

    #[test]
    fn every_method_forecasts_the_test_horizon() {
        for method in Method::ALL {
            let c = small(method);
            let d = generate(&c).unwrap();
            let out = fit_and_forecast(&c, &d.series).unwrap();
            assert!(out.forecast.len() == 200 || out.forecast.diverged_at.is_some(), "{method}");
            assert!(out.train_wall_time_s >= 0.0);
        }
    }

    #[test]
    fn regression_rows_follow_the_split() {
        let c = small(Method::Ngrc);
        let d = generate(&c).unwrap();
        assert_eq!(fit_and_forecast(&c, &d.series).unwrap().regression_rows, 580);
        if let SavedModel::Ngrc { model } = fit_and_forecast(&c, &d.series).unwrap().model {
            let fit = d.series.slice(0..600).unwrap();
            let scaled = model.scaler().unwrap().transform(&fit).unwrap();
            assert_eq!(model.design(&scaled, 20).unwrap().0.nrows(), 580);
        } else {
            unreachable!();
        }
    }

    #[test]
    fn saved_model_reloads_bit_exact() {
        let c = small(Method::Ngrc);
        let dir = std::env::temp_dir().join(format!("chaoscast-reload-{}", std::process::id()));
        run_experiment(&c, &dir).unwrap();
        let saved = SavedModel::load(&dir.join("model.json")).unwrap();
        let fit = fit_and_forecast(&c, &generate(&c).unwrap().series).unwrap();
        assert_eq!(saved, fit.model);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn timing_helper() {
        let (v, secs) = time_training(|| 3);
        assert_eq!(v, 3);
        assert!(secs >= 0.0);
    }
}
