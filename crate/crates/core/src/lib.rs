//! Link-level simulation of OTFS with media-based modulation (OTFS-MBM)
//! and its plain-OTFS and OTFS spatial-modulation baselines.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod config;
pub mod detectors;
pub mod error;
pub mod mapping;
pub mod metrics;
pub mod montecarlo;
pub mod numerics;
pub mod output;
pub mod presets;
pub mod selftest;
pub mod transform;

pub use error::{Error, Result};
pub use mapping::{Constellation, FrameParams, GridChoice, Normalization, Scheme};
pub use numerics::{Complex, ComplexMatrix, RngStream};
