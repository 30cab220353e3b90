//! Delay-minimizing resource allocation for digital-twin assisted federated
//! learning over a jammed NOMA uplink, plus a seeded round simulator for the
//! cluster/blockchain protocol around it.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `dtfl-cli` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod fedsim;
pub mod instances;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod scoring;

pub use error::{Error, Result};
pub use model::{BldProfile, GldProfile, Solution, SystemParams};
