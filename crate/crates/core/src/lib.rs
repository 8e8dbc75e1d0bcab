//! Bitmap join index selection for star schemas.
//!
//! The pipeline: parse a SQL workload ([`sqlparse`]), project it onto a binary
//! query-attribute matrix, mine frequent closed itemsets ([`closeminer`]),
//! turn itemsets into candidate bitmap join indexes ([`candidates`]), price
//! them with analytic I/O cost models ([`costmodel`]), and greedily pick a
//! configuration under an objective and optional storage budget ([`selector`]).
//!
//! Everything here is pure in-memory computation over [`catalog`] statistics;
//! file formats and the command line live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod bits;
#[cfg(test)]
pub(crate) mod testfix;

pub mod candidates;
pub mod catalog;
pub mod closeminer;
pub mod costmodel;
pub mod selector;
pub mod sqlparse;
#[cfg(feature = "testgen")]
pub mod testgen;
