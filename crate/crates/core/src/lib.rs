//! Soft-input soft-output (SISO) single tree-search sphere decoding for
//! iterative MIMO detection.
//!
//! The crate provides the building blocks of an iterative
//! detection-and-decoding receiver and a simulation harness tying them
//! together:
//!
//! * [`constellation`] — square QAM constellations with Gray labeling,
//!   nearest-symbol slicing and masked zig-zag enumeration;
//! * [`mimo`] — flat-fading channel model, (sorted) QR decomposition and
//!   receiver preprocessing;
//! * [`apriori`] — per-antenna a-priori bit-metric tables;
//! * [`enumerate`] — hybrid channel/a-priori node enumeration;
//! * [`detector`] — the depth-first single tree-search detector producing
//!   the max-log MAP hypothesis and extrinsic LLRs in one traversal;
//! * [`oracle`] — an exhaustive max-log MAP reference detector;
//! * [`bicm`] — convolutional code, max-log BCJR decoder, S-random
//!   interleaver and frame packing;
//! * [`sim`] — Monte-Carlo link simulation, node-count statistics and the
//!   throughput model;
//! * [`golden`] — regression-vector export/import;
//! * [`cli`] — the command-line front end.

pub mod apriori;
pub mod bicm;
pub mod cli;
pub mod constellation;
pub mod detector;
pub mod enumerate;
pub mod golden;
pub mod llr;
pub mod mimo;
pub mod oracle;
pub mod sim;

pub use constellation::Constellation;
pub use detector::{DetectionResult, DetectorConfig, EnumMode};
pub use llr::LlrFrame;

/// Errors reported by fallible operations of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Modulation order is not one of the supported square QAM sizes.
    #[error("unsupported bits per symbol {0}; supported: 2 (QPSK), 4 (16-QAM), 6 (64-QAM)")]
    UnsupportedModulation(usize),
    /// A custom symbol mapping is not a bijection or disagrees with the grid.
    #[error("invalid symbol mapping: {0}")]
    InvalidMapping(String),
    /// Matrix is (numerically) rank deficient and cannot be QR-factorized.
    #[error("rank-deficient channel matrix (pivot {0:.3e} below tolerance)")]
    RankDeficient(f64),
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Malformed golden-vector or mapping file.
    #[error("parse error: {0}")]
    Parse(String),
    /// Golden-vector comparison failed.
    #[error("golden mismatch in record `{record}`: {detail}")]
    GoldenMismatch { record: String, detail: String },
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
