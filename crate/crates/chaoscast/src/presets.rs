//! Ready-made experiments for every benchmark protocol.

use chaoscast_core::dynamics::SystemId;

use crate::config::{ExperimentConfig, Method, MethodOverrides, Split, Suite};

/// Noise levels swept by the noisy-Lorenz experiments.
pub const NOISE_LEVELS: [f64; 4] = [0.1, 1.0, 5.0, 10.0];

fn experiment(id: String, system: SystemId, method: Method, total_points: usize, split: Split) -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: id,
        system,
        method,
        total_points,
        split,
        dt: 0.01,
        noise_magnitude: 0.0,
        seed: 42,
        method_overrides: MethodOverrides::default(),
        output_dir: None,
    }
}

/// 8:2 split of 5000 rows. The 4000 fitting rows include the method's warm-up.
pub fn task1(system: SystemId, method: Method) -> ExperimentConfig {
    let warmup = match method {
        Method::Ngrc => chaoscast_core::ngrc::NgrcConfig::default().min_warmup(),
        Method::Rc => 250,
        Method::Lstm => 0,
    };
    let split = Split { warmup, train: 4000 - warmup, test: 1000 };
    experiment(format!("task1-{system}-{method}"), system, method, 5000, split)
}

/// Small training sets: Lorenz 250+500, Rössler 250+750, Chen and Qi 100+150;
/// the rest of 5000 rows is forecast.
pub fn small_data(system: SystemId, method: Method) -> ExperimentConfig {
    let (warmup, train) = match system {
        SystemId::Lorenz => (250, 500),
        SystemId::Rossler => (250, 750),
        SystemId::Chen | SystemId::Qi => (100, 150),
    };
    let split = Split { warmup, train, test: 5000 - warmup - train };
    experiment(format!("task1small-{system}-{method}"), system, method, 5000, split)
}

/// Chen, 10000 rows split 2000/3000/5000.
pub fn long_horizon(method: Method) -> ExperimentConfig {
    let split = Split { warmup: 2000, train: 3000, test: 5000 };
    experiment(format!("longhorizon-chen-{method}"), SystemId::Chen, method, 10_000, split)
}

/// Noisy Lorenz, 250/3750/1000.
pub fn task2_noise(sigma: f64, method: Method) -> ExperimentConfig {
    let split = Split { warmup: 250, train: 3750, test: 1000 };
    let mut e = experiment(format!("task2-lorenz-noise{sigma}-{method}"), SystemId::Lorenz, method, 5000, split);
    e.noise_magnitude = sigma;
    e
}

/// Every benchmark experiment.
pub fn paper_suite() -> Suite {
    let mut experiments = Vec::new();
    for system in SystemId::ALL {
        for method in Method::ALL {
            experiments.push(task1(system, method));
        }
    }
    for system in SystemId::ALL {
        for method in [Method::Ngrc, Method::Rc] {
            experiments.push(small_data(system, method));
        }
    }
    experiments.push(long_horizon(Method::Ngrc));
    for sigma in NOISE_LEVELS {
        for method in [Method::Ngrc, Method::Rc] {
            experiments.push(task2_noise(sigma, method));
        }
    }
    Suite { output_dir: None, experiments }
}

/// Looks up a preset by experiment id.
pub fn find(id: &str) -> Option<ExperimentConfig> {
    paper_suite().experiments.into_iter().find(|e| e.experiment_id == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use std::path::Path;

    #[test]
    fn all_presets_are_valid_and_unique() {
        let suite = paper_suite();
        assert_eq!(suite.experiments.len(), 12 + 8 + 1 + 8);
        let ids: BTreeSet<_> = suite.experiments.iter().map(|e| e.experiment_id.clone()).collect();
        assert_eq!(ids.len(), suite.experiments.len());
        for e in &suite.experiments {
            e.validate().unwrap();
        }
        assert_eq!(Suite::from_toml(&suite.to_toml(), Path::new("p")).unwrap(), suite);
    }

    #[test]
    fn task1_splits() {
        let n = task1(SystemId::Lorenz, Method::Ngrc);
        assert_eq!(n.experiment_id, "task1-lorenz-ngrc");
        assert_eq!((n.split.warmup, n.split.train, n.split.test), (2, 3998, 1000));
        let r = task1(SystemId::Lorenz, Method::Rc);
        assert_eq!((r.split.warmup, r.split.train), (250, 3750));
        assert_eq!(task1(SystemId::Qi, Method::Lstm).split.fit_rows(), 4000);
        assert_eq!(small_data(SystemId::Lorenz, Method::Rc).split.test, 4250);
        assert_eq!(find("task2-lorenz-noise5-rc").unwrap().noise_magnitude, 5.0);
    }
}
