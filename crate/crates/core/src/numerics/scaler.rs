use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Per-dimension affine map of `[min, max]` onto `[0, 1]`.
///
/// Constant dimensions (`max == min`) map to 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub per_dim_min: Vec<f64>,
    pub per_dim_max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(traj: &Trajectory) -> Result<Self> {
        if traj.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let d = traj.dim();
        let mut lo = traj.row(0).to_vec();
        let mut hi = lo.clone();
        for row in traj.rows() {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        Ok(Self { per_dim_min: lo, per_dim_max: hi })
    }

    pub fn dim(&self) -> usize {
        self.per_dim_min.len()
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: d });
        }
        Ok(())
    }

    pub fn transform_row(&self, row: &mut [f64]) -> Result<()> {
        self.check(row.len())?;
        for (j, v) in row.iter_mut().enumerate() {
            let (lo, hi) = (self.per_dim_min[j], self.per_dim_max[j]);
            *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.5 };
        }
        Ok(())
    }

    pub fn inverse_transform_row(&self, row: &mut [f64]) -> Result<()> {
        self.check(row.len())?;
        for (j, v) in row.iter_mut().enumerate() {
            let (lo, hi) = (self.per_dim_min[j], self.per_dim_max[j]);
            *v = if hi > lo { lo + *v * (hi - lo) } else { lo };
        }
        Ok(())
    }

    pub fn transform(&self, traj: &Trajectory) -> Result<Trajectory> {
        self.check(traj.dim())?;
        Ok(traj.map_rows(|r| {
            let _ = self.transform_row(r);
        }))
    }

    pub fn inverse_transform(&self, traj: &Trajectory) -> Result<Trajectory> {
        self.check(traj.dim())?;
        Ok(traj.map_rows(|r| {
            let _ = self.inverse_transform_row(r);
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn column_extrema() {
        let t = Trajectory::from_rows(1.0, 0.0, &[[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]).unwrap();
        let s = MinMaxScaler::fit(&t).unwrap();
        assert_eq!(s.per_dim_min, vec![0.0, 3.0]);
        assert_eq!(s.per_dim_max, vec![10.0, 3.0]);
        let mut p = [5.0, 3.0];
        s.transform_row(&mut p).unwrap();
        assert_eq!(p, [0.5, 0.5]);
    }

    #[test]
    fn single_row_is_degenerate() {
        let t = Trajectory::from_rows(1.0, 0.0, &[[2.0, -1.0]]).unwrap();
        let s = MinMaxScaler::fit(&t).unwrap();
        assert_eq!(s.per_dim_min, s.per_dim_max);
        let scaled = s.transform(&t).unwrap();
        assert_eq!(scaled.row(0), &[0.5, 0.5]);
        assert_eq!(s.inverse_transform(&scaled).unwrap(), t);
    }

    #[test]
    fn fitting_data_spans_unit_box() {
        let t = Trajectory::from_rows(1.0, 0.0, &[[1.0, -4.0], [3.0, 6.0], [2.0, 0.0]]).unwrap();
        let s = MinMaxScaler::fit(&t).unwrap();
        let u = s.transform(&t).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = u.column(j).collect();
            assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(col.contains(&0.0) && col.contains(&1.0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = Trajectory::from_rows(1.0, 0.0, &[[1.0, 2.0]]).unwrap();
        let s = MinMaxScaler::fit(&t).unwrap();
        assert!(s.transform_row(&mut [1.0, 2.0, 3.0]).is_err());
        assert!(MinMaxScaler::fit(&Trajectory::empty(1.0, 0.0, 2)).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            fit in proptest::collection::vec((-100.0f64..100.0, -1e3f64..1e3), 2..40),
            probe in proptest::collection::vec((-200.0f64..200.0, -2e3f64..2e3), 1..20),
        ) {
            let rows: Vec<[f64; 2]> = fit.iter().map(|(a, b)| [*a, *b]).collect();
            let s = MinMaxScaler::fit(&Trajectory::from_rows(1.0, 0.0, &rows).unwrap()).unwrap();
            prop_assume!(s.per_dim_max.iter().zip(&s.per_dim_min).all(|(h, l)| h > l));
            for (a, b) in probe {
                let mut p = [a, b];
                s.transform_row(&mut p).unwrap();
                s.inverse_transform_row(&mut p).unwrap();
                prop_assert!((p[0] - a).abs() <= 1e-12 * a.abs().max(s.per_dim_max[0].abs()).max(1.0));
                prop_assert!((p[1] - b).abs() <= 1e-12 * b.abs().max(s.per_dim_max[1].abs()).max(1.0));
            }
        }
    }
}
