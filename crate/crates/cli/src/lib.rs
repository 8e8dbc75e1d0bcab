//! Library half of the `bji` binary: file formats, pipeline orchestration,
//! report/DDL emitters, the synthetic fixture generator, and sweep drivers.
//! All index math lives in `bji-core`; this crate owns everything that
//! touches files, JSON, or process concerns.

pub mod catalog_io;
pub mod ddl;
pub mod pipeline;
pub mod report;
pub mod sweep;
pub mod synth;

#[cfg(test)]
pub(crate) mod fixtures;
