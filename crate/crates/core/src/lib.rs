//! Multi-level distributed string sorting on a deterministic simulated machine.
//!
//! The crate is organised bottom-up:
//!
//! * [`strcore`]: sequential string primitives (arenas, LCP arrays, multikey
//!   quicksort, the LCP loser tree, LCP compression).
//! * [`corpus`]: synthetic D/N-ratio inputs, corpus files, ground-truth sorting.
//! * [`simnet`]: the bulk-synchronous machine with its communication ledger.
//! * [`partition`], [`rquick`], [`msort`]: sampling, splitters, assignment,
//!   hypercube quicksort and the multi-level merge sort driver.
//! * [`bloom`], [`pdms`]: distributed duplicate detection and the
//!   prefix-doubling merge sort built on top of it.
//! * [`report`]: run reports, the benchmark grid, and verification used by the CLI.

pub mod bloom;
pub mod codec;
pub mod corpus;
pub mod error;
pub mod msort;
pub mod partition;
pub mod pdms;
pub mod report;
pub mod rquick;
pub mod simnet;
pub mod strcore;

pub use error::{Error, Result};
