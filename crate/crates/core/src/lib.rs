//! Physics-informed Kolmogorov-Arnold networks (PIKAN).
//!
//! The crate trains KANs whose edges are either B-spline activations with a
//! `sin` base term or learnable wavelets, against residual, initial/boundary
//! condition and optional data losses for a registry of ODE and PDE
//! benchmarks. Every trained result can be compared with an independent
//! reference solution (closed forms, RK4, or a method-of-lines solver).
//!
//! Module map:
//! - [`diffengine`]: second-order input jets and exact parameter gradients.
//! - [`kan`]: spline and wavelet edge layers, network assembly, checkpoints.
//! - [`problems`]: benchmark registry, collocation and loss assembly.
//! - [`oracle`]: reference solvers, data sampling and error metrics.
//! - [`train`]: Adam/AdamW, step-decay schedules, the training loop.
//! - [`benchmarks`]: per-table run configurations and reproduction thresholds.
//! - [`verify`]: deterministic self-checks shared by the CLI and test suites.

pub mod benchmarks;
pub mod csv;
pub mod diffengine;
pub mod error;
pub mod kan;
pub mod oracle;
pub mod problems;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
