//! Global (whole-interval) integration of the time-dependent Schrodinger
//! equation through the time-dependent wave operator.
//!
//! The crate is organised bottom-up:
//!
//! - [`signal`]: time grids, sampled complex signals and the unitary DFT.
//! - [`fftint`]: FFT-based cumulative integration and its Simpson oracle.
//! - [`molecular`]: the two-surface vibrational model driven by laser pulses.
//! - [`waveop`]: the iterative wave-operator solver.
//! - [`refprop`]: step-by-step reference propagators used as oracles.

pub mod error;
pub mod fftint;
pub(crate) mod linalg;
pub mod molecular;
pub mod refprop;
pub mod signal;
pub mod waveop;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
