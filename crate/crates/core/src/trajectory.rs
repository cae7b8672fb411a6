use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled multivariate time series, stored row-major.
///
/// Row `i` is the state at time `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    dt: f64,
    t0: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(dt: f64, t0: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("trajectory dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * (data.len() / dim + 1),
                got: data.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidInput("dt must be positive and t0 finite".into()));
        }
        Ok(Self { dt, t0, dim, data })
    }

    /// Empty trajectory ready to receive rows.
    pub fn empty(dt: f64, t0: f64, dim: usize) -> Self {
        Self { dt, t0, dim, data: Vec::new() }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dt: f64, t0: f64, rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(dt, t0, dim.max(1), data)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Time stamp of row `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn last_row(&self) -> Option<&[f64]> {
        self.len().checked_sub(1).map(|i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.dim).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: row.len() });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Copy of rows `range`; the time origin moves with the first row.
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.start > range.end || range.end > self.len() {
            return Err(Error::InsufficientData { needed: range.end, got: self.len() });
        }
        Ok(Self {
            dt: self.dt,
            t0: self.time(range.start),
            dim: self.dim,
            data: self.data[range.start * self.dim..range.end * self.dim].to_vec(),
        })
    }

    /// Same samples with every row mapped through `f`.
    pub fn map_rows<F: FnMut(&mut [f64])>(&self, mut f: F) -> Self {
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            f(row);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn time_stamps_are_exact_multiples() {
        let t = Trajectory::new(0.01, 2.0, 1, vec![0.0; 5]).unwrap();
        assert_eq!(t.time(3), 2.0 + 3.0 * 0.01);
        let s = t.slice(2..5).unwrap();
        assert_eq!(s.t0(), t.time(2));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn rejects_ragged_data() {
        assert!(Trajectory::new(0.1, 0.0, 3, vec![0.0; 4]).is_err());
        assert!(Trajectory::from_rows(0.1, 0.0, &[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn columns_and_rows() {
        let t = Trajectory::from_rows(1.0, 0.0, &[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(t.column(1).collect::<Vec<_>>(), vec![2.0, 4.0]);
        assert_eq!(t.last_row(), Some(&[3.0, 4.0][..]));
        assert_eq!(t.rows().count(), 2);
    }
}
