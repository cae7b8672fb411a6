//! Plain CSV writers. Floats use `{:.16e}` so every value round-trips.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chaoscast_core::ngrc::WeightTable;
use chaoscast_core::Trajectory;

use crate::error::{Error, Result};

/// Column names for a trajectory of dimension `dim`.
pub fn state_names(dim: usize) -> Vec<String> {
    if dim == 3 {
        vec!["x".into(), "y".into(), "z".into()]
    } else {
        (0..dim).map(|i| format!("u{i}")).collect()
    }
}

/// `t,x,y,z` with one row per sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in state_names(traj.dim()) {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (i, row) in traj.rows().enumerate() {
        write!(out, "{:.16e}", traj.time(i)).unwrap();
        for v in row {
            write!(out, ",{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `feature,dim_x,dim_y,dim_z`, one row per feature column.
pub fn weights_csv(table: &WeightTable) -> String {
    let mut out = String::from("feature");
    for name in &table.outputs {
        write!(out, ",dim_{name}").unwrap();
    }
    out.push('\n');
    for (r, label) in table.features.iter().enumerate() {
        out.push_str(label);
        for c in 0..table.outputs.len() {
            write!(out, ",{:.16e}", table.weights[(r, c)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `epoch,train_mse`, epochs counted from 1.
pub fn loss_csv(curve: &[f64]) -> String {
    let mut out = String::from("epoch,train_mse\n");
    for (i, v) in curve.iter().enumerate() {
        writeln!(out, "{},{v:.16e}", i + 1).unwrap();
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trips_through_text() {
        let t = Trajectory::from_rows(0.01, 0.0, &[[1.0 / 3.0, -2.5e-300, 1e10], [0.1, 0.2, 0.3]]).unwrap();
        let text = trajectory_csv(&t);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,y,z"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.0 / 3.0, -2.5e-300, 1e10]);
        let second: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(second[0], 0.01);
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn loss_header() {
        assert_eq!(loss_csv(&[0.5]), "epoch,train_mse\n1,5.0000000000000000e-1\n");
    }
}
