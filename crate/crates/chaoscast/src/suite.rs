//! Runs a list of experiments, isolating failures, and writes a summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chaoscast_core::dynamics::SystemId;
use serde::{Deserialize, Serialize};

use crate::config::{Method, Suite};
use crate::csv;
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub experiment_id: String,
    pub system: SystemId,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ExperimentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteEntry {
    pub fn succeeded(&self) -> bool {
        self.report.is_some()
    }
}

/// Runs every experiment in order; a failing experiment becomes an entry
/// with `error` set and the rest still run.
pub fn run_suite(suite: &Suite, root: &Path) -> Result<Vec<SuiteEntry>> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut entries = Vec::with_capacity(suite.experiments.len());
    for config in &suite.experiments {
        let dir = match &config.output_dir {
            Some(d) => root.join(d),
            None => root.join(&config.experiment_id),
        };
        let result = run_experiment(config, &dir);
        entries.push(SuiteEntry {
            experiment_id: config.experiment_id.clone(),
            system: config.system,
            method: config.method,
            error: result.as_ref().err().map(|e| e.to_string()),
            report: result.ok(),
        });
    }
    csv::write(&root.join("summary.csv"), &summary_csv(&entries))?;
    csv::write(&root.join("summary.json"), &serde_json::to_string_pretty(&entries)?)?;
    Ok(entries)
}

/// One row per experiment: method x system x headline metrics.
pub fn summary_csv(entries: &[SuiteEntry]) -> String {
    let mut out = String::from(
        "experiment_id,system,method,status,valid_time_steps,valid_time_s,lobe_sign_changes,bounded,in_box,shape_ok,train_wall_time_s,error\n",
    );
    for e in entries {
        write!(out, "{},{},{},", e.experiment_id, e.system, e.method).unwrap();
        match &e.report {
            Some(r) => {
                let m = &r.metrics;
                writeln!(
                    out,
                    "ok,{},{},{},{},{},{},{:.6},",
                    m.valid_time_steps,
                    m.valid_time_seconds,
                    m.lobe_sign_changes,
                    m.bounded,
                    m.in_box,
                    r.passes_shape_checks(),
                    m.train_wall_time_s
                )
                .unwrap();
            }
            None => {
                let msg = e.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
                writeln!(out, "failed,,,,,,,,\"{msg}\"").unwrap();
            }
        }
    }
    out
}
