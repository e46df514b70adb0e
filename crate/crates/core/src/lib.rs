//! Divergence frontiers and frontier integrals between discrete
//! distributions, with the estimators, quantizers and error bounds needed to
//! evaluate them from samples.
//!
//! The crate is organized bottom-up:
//!
//! * [`distribution`], [`family`], [`divergence`]: pmfs, f-divergence
//!   generators and the frontier quantities built on them;
//! * [`estimators`]: empirical, add-constant, Braess–Sauer and Good-Turing
//!   estimates from histograms;
//! * [`bounds`]: closed-form statistical, quantization and total error bounds;
//! * [`quantize`]: discrete partitions and 2-D k-means;
//! * [`synth`]: synthetic distributions, seeded samplers, 2-D densities;
//! * [`harness`]: Monte Carlo experiment runner and report writer;
//! * [`io`]: CSV/JSON readers and writers shared with the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod estimators;
pub mod family;
pub mod harness;
pub mod io;
pub mod quadrature;
pub mod quantize;
pub mod synth;

pub use distribution::DiscreteDistribution;
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, Histogram};
pub use family::{GeneratorFamily, RegularityConstants};
pub use quantize::{CentroidModel, Partition};
