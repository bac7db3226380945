//! Joint source-channel coding toolkit for generic-protograph LDPC codes.
//!
//! The pipeline, bottom to top:
//!
//! * [`protomatrix`] — the protomatrix data model: role-partitioned columns
//!   (source, punctured, transmitted), rate and entropy helpers, Es/N0
//!   conversions, text-format parsing.
//! * [`exit`] — mutual-information transfer analysis: channel thresholds by
//!   scanning Es/N0, source thresholds by scanning the source bias, and
//!   EXIT-chart curve export with a tunnel probe.
//! * [`lifting`] — progressive-edge-growth expansion of a protomatrix into a
//!   full sparse parity-check matrix with girth measurement.
//! * [`codec`] — systematic GF(2) encoder and flooding sum-product decoder
//!   with source-prior LLR initialization.
//! * [`sim`] — reproducible Monte Carlo error-rate measurement over BI-AWGN
//!   with a biased Bernoulli source.
//! * [`optimize`] — two-stage protomatrix search (source threshold first,
//!   then channel threshold) by pruned brute force or differential
//!   evolution.

pub mod codec;
pub mod exit;
pub mod lifting;
pub mod optimize;
pub mod protomatrix;
pub mod sim;

pub use protomatrix::{Protomatrix, Role, SourceModel, SubProtomatrix};
