use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four gate blocks, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Forget,
    Input,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Forget, Gate::Input, Gate::Output, Gate::Candidate];

    fn index(self) -> usize {
        self as usize
    }
}

/// All LSTM weights in one flat buffer.
///
/// Layout: `W` (4h x d), `U` (4h x h), `b` (4h), `W_head` (d x h), `b_head`
/// (d). Matrices are row-major and the gate blocks within `W`, `U` and `b`
/// follow [`Gate::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    input_dim: usize,
    hidden: usize,
    values: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::InvalidInput("input_dim and hidden_size must be positive".into()));
        }
        let len = Self::len_for(input_dim, hidden);
        Ok(Self { input_dim, hidden, values: vec![0.0; len] })
    }

    /// Uniform(-1/sqrt(h), 1/sqrt(h)) matrices, zero biases and a forget-gate
    /// bias of one.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(input_dim, hidden)?;
        let a = 1.0 / libm::sqrt(hidden as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = hidden;
        let b_off = p.b_offset();
        let head_end = p.b_head_offset();
        for (i, v) in p.values.iter_mut().enumerate() {
            let is_matrix = i < b_off || (b_off + 4 * h..head_end).contains(&i);
            if is_matrix {
                *v = rng.random_range(-a..a);
            }
        }
        p.gate_bias_mut(Gate::Forget).iter_mut().for_each(|v| *v = 1.0);
        Ok(p)
    }

    pub fn from_values(input_dim: usize, hidden: usize, values: Vec<f64>) -> Result<Self> {
        let expected = Self::len_for(input_dim, hidden);
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { input_dim, hidden, values })
    }

    fn len_for(d: usize, h: usize) -> usize {
        4 * h * d + 4 * h * h + 4 * h + d * h + d
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn u_offset(&self) -> usize {
        4 * self.hidden * self.input_dim
    }

    pub(crate) fn b_offset(&self) -> usize {
        self.u_offset() + 4 * self.hidden * self.hidden
    }

    pub(crate) fn w_head_offset(&self) -> usize {
        self.b_offset() + 4 * self.hidden
    }

    pub(crate) fn b_head_offset(&self) -> usize {
        self.w_head_offset() + self.input_dim * self.hidden
    }

    /// `W` for all gates, 4h x d.
    pub fn input_weights(&self) -> &[f64] {
        &self.values[..self.u_offset()]
    }

    /// `U` for all gates, 4h x h.
    pub fn recurrent_weights(&self) -> &[f64] {
        &self.values[self.u_offset()..self.b_offset()]
    }

    pub fn biases(&self) -> &[f64] {
        &self.values[self.b_offset()..self.w_head_offset()]
    }

    /// Output head, d x h.
    pub fn head_weights(&self) -> &[f64] {
        &self.values[self.w_head_offset()..self.b_head_offset()]
    }

    pub fn head_bias(&self) -> &[f64] {
        &self.values[self.b_head_offset()..]
    }

    pub fn head_bias_mut(&mut self) -> &mut [f64] {
        let off = self.b_head_offset();
        &mut self.values[off..]
    }

    /// `W_g`, h x d.
    pub fn gate_input_weights(&self, g: Gate) -> &[f64] {
        let n = self.hidden * self.input_dim;
        &self.values[g.index() * n..(g.index() + 1) * n]
    }

    /// `U_g`, h x h.
    pub fn gate_recurrent_weights(&self, g: Gate) -> &[f64] {
        let n = self.hidden * self.hidden;
        let off = self.u_offset() + g.index() * n;
        &self.values[off..off + n]
    }

    pub fn gate_bias(&self, g: Gate) -> &[f64] {
        let off = self.b_offset() + g.index() * self.hidden;
        &self.values[off..off + self.hidden]
    }

    pub fn gate_bias_mut(&mut self, g: Gate) -> &mut [f64] {
        let off = self.b_offset() + g.index() * self.hidden;
        &mut self.values[off..off + self.hidden]
    }
}
