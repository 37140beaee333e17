//! Functional compression with decoder side information via characteristic
//! graphs: traditional and fractional (b-fold) coloring, exact covering LPs,
//! minimum-entropy colorings, prefix codes and zero-error decoding.

pub mod budget;
pub mod chargraph;
pub mod cli;
pub mod codec;
pub mod coloring;
pub mod error;
pub mod exec;
pub mod graphs;
pub mod instance;
pub mod lp;
pub mod probability;
pub mod rates;
pub mod results;

pub use budget::Budget;
pub use error::{Error, Result};
