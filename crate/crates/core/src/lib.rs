//! Chaotic ODE benchmarks and three closed-loop forecasters: an echo state
//! network, a nonlinear vector autoregression (next-generation reservoir
//! computer) and a single-layer LSTM.
//!
//! The crate is `no_std` and only needs `alloc`. Timing, file formats and the
//! experiment runner live in the `chaoscast` companion crate.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod esn;
pub mod forecast;
pub mod lstm;
mod matrix_serde;
pub mod metrics;
pub mod ngrc;
pub mod numerics;
pub mod trajectory;

pub use error::{Error, Result};
pub use forecast::{Forecast, DIVERGENCE_BOUND};
pub use trajectory::Trajectory;
