//! Golden-Hadamard precoding codebooks for MISO Alamouti transmission.
//!
//! The crate builds limited-feedback codebooks (DFT, Hadamard, diagonal and
//! two Golden-Hadamard variants), scores them by chordal distance and
//! minimum determinant, and measures their bit-error rate by Monte-Carlo
//! simulation over Rayleigh block fading.
//!
//! ```
//! use ghcb::codebook::{build_codebook, CodebookFamily, CodebookSpec};
//! use ghcb::metrics::min_chordal_distance;
//!
//! let cb = build_codebook(&CodebookSpec::new(CodebookFamily::GhcReal, 4, 2, 6)).unwrap();
//! let mcd = min_chordal_distance(&cb).unwrap();
//! assert!((mcd.value - 1.0).abs() < 1e-9);
//! ```

pub mod channel;
pub mod cli;
pub mod codebook;
pub mod config;
mod error;
pub mod matrix;
pub mod metrics;
pub mod sim;
pub mod special;
pub mod stbc;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, ComplexScalar};
