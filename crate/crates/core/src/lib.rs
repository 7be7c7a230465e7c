//! Analysis toolkit for wafer-scale superconducting qubit packages.
//!
//! The crate covers the box-mode spectrum of the package cavity, loss
//! budgets from participation ratios and seam admittances, readout error
//! budgets from IQ shots, coherence statistics over large qubit cohorts and
//! cryostat heat loads. Every module is a plain library; the `qpack-lab`
//! binary wraps them behind subcommands.

pub mod cavity;
pub mod cli;
pub mod coherence;
pub mod error;
pub mod field;
pub mod loss;
pub mod readout;
pub mod thermal;
pub mod units;

pub use error::{Error, Result};
