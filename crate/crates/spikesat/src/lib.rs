//! Toolkit for comparing conventional and neuromorphic implementations of
//! three satellite-communication workloads — payload resource classification,
//! interference detection, and sparse receive beamforming — under a shared
//! event-count energy model.
//!
//! The crate is organized in three tiers:
//!
//! * numerics and simulation primitives: [`seed`], [`dsp`], [`snn`],
//!   [`raster`], [`codec`], [`lasso`], [`ann`];
//! * the three workload pipelines: [`rrm`], [`interference`], [`beam`];
//! * energy/delay benchmarking over both implementations: [`bench`].
//!
//! Everything is deterministic given explicit seeds: identical inputs produce
//! byte-identical outputs regardless of thread count.

pub mod ann;
pub mod beam;
pub mod bench;
pub mod codec;
pub mod dsp;
pub mod error;
pub mod interference;
pub mod lasso;
pub mod raster;
pub mod rrm;
pub mod seed;
pub mod snn;

pub use error::{Error, Result};
