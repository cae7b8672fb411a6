use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column layout of the NVAR feature vector `[c, linear, nonlinear]`.
///
/// The linear block holds the current state followed by the states `s`,
/// `2s`, ..., `(k-1)s` steps back. The nonlinear block holds every distinct
/// degree-`p` monomial of the linear block, as index multisets in
/// lexicographic order. With `p = 1` the nonlinear block is empty because
/// its monomials coincide with the linear block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    dim: usize,
    taps: usize,
    stride: usize,
    order: usize,
    monomials: Vec<Vec<usize>>,
}

impl FeatureLayout {
    pub fn new(dim: usize, taps: usize, stride: usize, order: usize) -> Result<Self> {
        if dim == 0 || taps == 0 || stride == 0 || order == 0 {
            return Err(Error::InvalidInput("dim, delay taps, stride and order must all be >= 1".into()));
        }
        let n_lin = dim * taps;
        let monomials = if order == 1 { Vec::new() } else { multisets(n_lin, order) };
        Ok(Self { dim, taps, stride, order, monomials })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_lin(&self) -> usize {
        self.dim * self.taps
    }

    pub fn n_nonlin(&self) -> usize {
        self.monomials.len()
    }

    pub fn n_total(&self) -> usize {
        1 + self.n_lin() + self.n_nonlin()
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    /// Rows of history a feature vector reads: `(k - 1) s + 1`.
    pub fn history_len(&self) -> usize {
        (self.taps - 1) * self.stride + 1
    }

    /// Fills `out` from `window`, a row-major block of states ordered oldest
    /// to newest whose last row is the current step.
    pub fn build_into(&self, window: &[f64], constant: f64, out: &mut [f64]) -> Result<()> {
        let d = self.dim;
        if window.len() % d != 0 {
            return Err(Error::DimensionMismatch { expected: d, got: window.len() % d });
        }
        let rows = window.len() / d;
        if rows < self.history_len() {
            return Err(Error::InsufficientData { needed: self.history_len(), got: rows });
        }
        if out.len() != self.n_total() {
            return Err(Error::DimensionMismatch { expected: self.n_total(), got: out.len() });
        }
        out[0] = constant;
        let lin = &mut out[1..1 + self.n_lin()];
        for tap in 0..self.taps {
            let row = rows - 1 - tap * self.stride;
            lin[tap * d..(tap + 1) * d].copy_from_slice(&window[row * d..(row + 1) * d]);
        }
        let (head, nonlin) = out.split_at_mut(1 + self.n_lin());
        let lin = &head[1..];
        for (slot, m) in nonlin.iter_mut().zip(&self.monomials) {
            *slot = m.iter().map(|&i| lin[i]).product();
        }
        Ok(())
    }

    pub fn build(&self, window: &[f64], constant: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_total()];
        self.build_into(window, constant, &mut out)?;
        Ok(out)
    }

    /// Names of the input dimensions: `x, y, z` for three, `u0, u1, ...` otherwise.
    pub fn dim_names(&self) -> Vec<String> {
        if self.dim == 3 {
            ["x", "y", "z"].iter().map(|s| String::from(*s)).collect()
        } else {
            (0..self.dim).map(|i| format!("u{i}")).collect()
        }
    }

    fn linear_label(&self, idx: usize, names: &[String]) -> String {
        let (tap, j) = (idx / self.dim, idx % self.dim);
        match tap * self.stride {
            0 => format!("{}[t]", names[j]),
            lag => format!("{}[t-{lag}]", names[j]),
        }
    }

    /// Human-readable label of every feature column, e.g. `x[t]*z[t-1]`.
    pub fn labels(&self) -> Vec<String> {
        let names = self.dim_names();
        let mut out = Vec::with_capacity(self.n_total());
        out.push(String::from("const"));
        out.extend((0..self.n_lin()).map(|i| self.linear_label(i, &names)));
        for m in &self.monomials {
            let mut parts: Vec<String> = Vec::new();
            let mut k = 0;
            while k < m.len() {
                let run = m[k..].iter().take_while(|&&v| v == m[k]).count();
                let base = self.linear_label(m[k], &names);
                parts.push(if run == 1 { base } else { format!("{base}^{run}") });
                k += run;
            }
            out.push(parts.join("*"));
        }
        out
    }
}

/// Non-decreasing index tuples of length `order` over `0..n`, lexicographic.
fn multisets(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; order];
    loop {
        out.push(cur.clone());
        // Rightmost position that can still grow.
        let Some(pos) = (0..order).rev().find(|&i| cur[i] + 1 < n) else {
            return out;
        };
        let v = cur[pos] + 1;
        cur[pos..].iter_mut().for_each(|c| *c = v);
    }
}
