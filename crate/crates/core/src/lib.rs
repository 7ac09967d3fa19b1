//! Learning bosonic random displacement channels.
//!
//! A random displacement channel applies `D(α)` with probability density
//! `p(α)`; its characteristic function `λ(β)` is the Fourier transform of `p`.
//! This crate samples measurement outcomes of entanglement-assisted
//! (two-mode squeezed vacuum plus Bell measurement) and entanglement-free
//! (vacuum plus heterodyne) learning schemes, estimates `λ(β)` from those
//! outcomes, and evaluates the sample-complexity bounds and noise envelopes
//! that compare the two.
//!
//! Monte Carlo work is split into fixed-size chunks keyed by counter-based
//! random substreams, so results are bit-identical for every thread count.
//! With the default `parallel` feature chunks run on rayon; without it the
//! same chunks run sequentially.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod export;
pub mod game;
pub mod measurement;
pub mod noise;
pub mod numerics;

pub use channels::{ChannelSpec, DisplacementSample, Peak};
pub use error::{Error, Result};
pub use estimation::EstimateResult;
pub use exec::Exec;
pub use measurement::{OutcomeSamples, SamplingOptions, SchemeConfig};
pub use num_complex::Complex64;
pub use numerics::{ComplexVec, RandomStream};
