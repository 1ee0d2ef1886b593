//! Reliability growth modeling and release decision support.
//!
//! The crate bundles the quantitative machinery a test organization needs to
//! decide when a software version is ready to ship:
//!
//! * [`nhpp`]: non-homogeneous Poisson process fault models (exponential,
//!   delayed S-shaped, logarithmic), maximum likelihood fitting on grouped
//!   fault counts, and an exact thinning simulator.
//! * [`release`]: expected release cost, the closed-form optimal release
//!   time for the exponential model, a multi-version cost extension, and a
//!   derivative-free numeric optimizer for everything else.
//! * [`metrics`]: static and historical module metrics (complexity,
//!   coupling, layout appropriateness, maturity) and the normalized feature
//!   vectors built from them.
//! * [`network`]: a small feedforward network trained by batch gradient
//!   descent that turns module features into importance weights.
//! * [`decision`]: priority categories, deviation measures against the
//!   optimal policy, and the release/continue/reject recommendation rule.
//!
//! All randomized routines take explicit seeds and are deterministic for a
//! fixed seed. Nothing here spawns threads; every type is plain data and
//! safe to share across them.

pub mod decision;
pub mod error;
pub mod metrics;
pub mod network;
pub mod nhpp;
pub mod numfmt;
mod optim;
pub mod release;

pub use error::{Error, Result};
