//! Column subset selection for entrywise low-rank approximation under
//! general loss functions.
//!
//! The library provides:
//!
//! - dense column-major matrices with cheap column subsetting ([`matrix`]),
//! - a registry of entrywise loss functions with their structural
//!   constants ([`loss`]),
//! - approximate multiple-response regression solvers ([`regression`]),
//! - the iterative column selection algorithm and the final low-rank
//!   fit ([`selector`]),
//! - seeded generators for synthetic and adversarial instances
//!   ([`instances`]),
//! - brute-force reference computations used to validate structural
//!   claims at small scale ([`oracle`]),
//! - end-to-end experiment and hardness-measurement drivers
//!   ([`experiment`]).

pub mod error;
pub mod experiment;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod loss;
pub mod matrix;
pub mod oracle;
pub mod regression;
pub mod rng;
pub mod selector;

pub use error::{Error, Result};
pub use matrix::{ColumnSet, DenseMatrix};
pub use rng::RngState;
