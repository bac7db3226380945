//! Mutual-information transfer machinery and decoding-threshold analysis.
//!
//! Two fixed-point analyses share the J-function toolbox in [`jfun`]:
//!
//! * the channel analysis ([`pexit`]) iterates MI updates over the full
//!   protomatrix at a fixed noise level and scans Es/N0 for the smallest
//!   value at which decoding converges;
//! * the source analysis ([`sgp`]) iterates over the untransmitted
//!   sub-protomatrix alone and scans the source bias p1 for the largest
//!   value at which the source part resolves.
//!
//! Both report a [`ThresholdResult`] carrying the scan trace, and both treat
//! zero-multiplicity protograph positions as hard zeros throughout (the
//! indicator gate on every update).

mod jfun;
mod pexit;
mod sgp;

pub use jfun::{j_bsc, j_fun, j_fun_quadrature, j_inv, JBscTable, SIGMA_SAT};
pub use pexit::{channel_threshold, pexit_iterate, shannon_limit, ExitState};
pub use sgp::{
    export_exit_chart, sgp_inner_curve, sgp_outer_curve, sgp_tunnel, source_threshold,
    TunnelReport,
};

use std::fmt;

/// Error raised by threshold scans.
#[derive(Debug, Clone, PartialEq)]
pub enum ExitError {
    /// The scan hit its limit without finding a convergent operating point.
    NoThreshold {
        /// Scan origin actually used (dB or probability).
        start: f64,
        /// Scan limit actually used.
        limit: f64,
    },
}

impl fmt::Display for ExitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitError::NoThreshold { start, limit } => {
                write!(f, "no threshold found in scan range [{start}, {limit}]")
            }
        }
    }
}

impl std::error::Error for ExitError {}

/// Shared configuration for both threshold scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    /// Scan increment: dB for the channel scan, probability for the source
    /// scan. Must be positive.
    pub step: f64,
    /// Fixed-point iteration cap per operating point.
    pub max_iters: usize,
    /// Convergence tolerance on Σ(1 − I_APP).
    pub tol: f64,
    /// Scan origin. `None` lets the channel scan start 1 dB below the
    /// theoretical limit for the operating point; the source scan defaults
    /// to 0.499.
    pub scan_start: Option<f64>,
    /// Scan terminus: a dB ceiling for the channel scan (the scan moves up),
    /// a probability floor for the source scan (the scan moves down).
    pub scan_limit: f64,
}

impl ThresholdConfig {
    /// Defaults for the channel scan: 0.001 dB step, 200 iterations, 1e-6
    /// tolerance, auto start, +10 dB ceiling.
    pub fn channel() -> Self {
        ThresholdConfig {
            step: 1e-3,
            max_iters: 200,
            tol: 1e-6,
            scan_start: None,
            scan_limit: 10.0,
        }
    }

    /// Defaults for the source scan: 0.001 step, 200 iterations, 1e-6
    /// tolerance, start 0.499, floor 0.001.
    pub fn source() -> Self {
        ThresholdConfig {
            step: 1e-3,
            max_iters: 200,
            tol: 1e-6,
            scan_start: Some(0.499),
            scan_limit: 1e-3,
        }
    }

    fn validate(&self) {
        assert!(self.step > 0.0, "step must be positive");
        assert!(self.max_iters >= 1, "max_iters must be at least 1");
        assert!(self.tol > 0.0, "tol must be positive");
    }
}

/// One probed operating point of a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Operating point: Es/N0 in dB, or p1.
    pub point: f64,
    /// Whether the fixed-point iteration converged there.
    pub converged: bool,
    /// Iterations consumed at that point.
    pub iters: usize,
}

/// Outcome of a threshold scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// The threshold: first converged point in scan direction (lowest
    /// convergent Es/N0, or largest convergent p1).
    pub value: f64,
    /// Every probed point, sorted in scan direction.
    pub scan_points: Vec<ScanPoint>,
}

/// Once convergence starts along the scan direction it must persist; a probe
/// pattern violating that would invalidate the bracketed search, so it is a
/// hard error. `points` must already be sorted in scan direction.
fn assert_scan_monotone(points: &[ScanPoint]) {
    let mut seen_converged = false;
    for p in points {
        if p.converged {
            seen_converged = true;
        } else {
            assert!(
                !seen_converged,
                "scan anomaly: non-convergence at {} after a converged point",
                p.point
            );
        }
    }
}
