//! Channel-threshold analysis over the full protomatrix.
//!
//! At a fixed noise level the decoder's message densities are tracked in the
//! mutual-information domain: variable-node and check-node updates alternate
//! on the protograph, each edge position carrying its own MI, gated by the
//! edge multiplicity (zero-multiplicity positions never move). Decoding is
//! declared successful when the a-posteriori MI of every column is within
//! tolerance of 1. The channel threshold is the lowest Es/N0 on a fixed dB
//! grid at which that happens; the scan brackets coarsely upward, then
//! bisects on the grid, which is exact because convergence is monotone in
//! Es/N0 (asserted on every trace).

use super::jfun::{j_fun, j_fun_quadrature, j_inv_total, JBscTable};
use super::{assert_scan_monotone, ExitError, ScanPoint, ThresholdConfig, ThresholdResult};
use crate::protomatrix::{source_entropy, Protomatrix, Role};

/// Message-MI state of one fixed-point run, indexed `[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitState {
    /// VN→CN extrinsic MI.
    pub i_ev: Vec<Vec<f64>>,
    /// CN→VN a-priori MI (input to the VN update).
    pub i_ac: Vec<Vec<f64>>,
    /// CN→VN extrinsic MI.
    pub i_ec: Vec<Vec<f64>>,
    /// VN→CN a-priori MI (input to the CN update).
    pub i_av: Vec<Vec<f64>>,
    /// Per-column a-posteriori MI.
    pub i_app: Vec<f64>,
}

impl ExitState {
    fn zeros(rows: usize, cols: usize) -> Self {
        ExitState {
            i_ev: vec![vec![0.0; cols]; rows],
            i_ac: vec![vec![0.0; cols]; rows],
            i_ec: vec![vec![0.0; cols]; rows],
            i_av: vec![vec![0.0; cols]; rows],
            i_app: vec![0.0; cols],
        }
    }
}

/// Iteration-by-iteration changes below this are treated as a stalled fixed
/// point and the run is cut short as non-converged; the exit is
/// result-neutral because a stalled Σ(1 − I_APP) can no longer cross the
/// convergence tolerance.
const STALL_EPS: f64 = 1e-13;

/// Runs the MI fixed point for `b` at source bias `p1` and noise level
/// `sigma`, using a prebuilt J table for the source columns.
fn pexit_run(
    b: &Protomatrix,
    tab: &JBscTable,
    sigma: f64,
    cfg: &ThresholdConfig,
) -> (bool, usize, ExitState) {
    let (m, n) = (b.rows(), b.cols());
    let mut st = ExitState::zeros(m, n);
    // Channel-observation variance per column: 4/σ² on transmitted columns,
    // 0 on source and punctured columns.
    let sigma_ch2: Vec<f64> = (0..n)
        .map(|j| match b.role(j) {
            Role::Transmitted => 4.0 / (sigma * sigma),
            _ => 0.0,
        })
        .collect();

    let mut sq = vec![vec![0.0; n]; m];
    let mut prev_total: Option<f64> = None;
    for t in 1..=cfg.max_iters {
        // VN update: each edge combines the other edges of its column plus
        // the (e−1) parallel copies of itself, plus the channel term.
        for i in 0..m {
            for j in 0..n {
                if b.e(i, j) > 0 {
                    let s = j_inv_total(st.i_ac[i][j]);
                    sq[i][j] = s * s;
                }
            }
        }
        for j in 0..n {
            let colsum: f64 = (0..m).map(|i| f64::from(b.e(i, j)) * sq[i][j]).sum();
            for i in 0..m {
                let e = f64::from(b.e(i, j));
                if b.e(i, j) == 0 {
                    continue;
                }
                let arg = colsum - e * sq[i][j] + (e - 1.0) * sq[i][j];
                st.i_ev[i][j] = if b.role(j) == Role::Source {
                    tab.eval(arg / 2.0)
                } else {
                    j_fun((arg + sigma_ch2[j]).sqrt())
                };
            }
        }
        for i in 0..m {
            st.i_av[i].copy_from_slice(&st.i_ev[i]);
        }
        // CN update.
        for i in 0..m {
            for j in 0..n {
                if b.e(i, j) > 0 {
                    let s = j_inv_total(1.0 - st.i_av[i][j]);
                    sq[i][j] = s * s;
                }
            }
        }
        for i in 0..m {
            let rowsum: f64 = (0..n).map(|j| f64::from(b.e(i, j)) * sq[i][j]).sum();
            for j in 0..n {
                let e = f64::from(b.e(i, j));
                if b.e(i, j) == 0 {
                    continue;
                }
                let arg = rowsum - e * sq[i][j] + (e - 1.0) * sq[i][j];
                st.i_ec[i][j] = 1.0 - j_fun(arg.sqrt());
            }
        }
        for i in 0..m {
            st.i_ac[i].copy_from_slice(&st.i_ec[i]);
        }
        // APP update and convergence test over all columns.
        let mut total = 0.0;
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..m {
                if b.e(i, j) > 0 {
                    let sg = j_inv_total(st.i_ac[i][j]);
                    s += f64::from(b.e(i, j)) * sg * sg;
                }
            }
            st.i_app[j] = if b.role(j) == Role::Source {
                tab.eval(s / 2.0)
            } else {
                j_fun((s + sigma_ch2[j]).sqrt())
            };
            total += 1.0 - st.i_app[j];
        }
        if total < cfg.tol {
            return (true, t, st);
        }
        if let Some(prev) = prev_total {
            if (prev - total).abs() < STALL_EPS {
                return (false, t, st);
            }
        }
        prev_total = Some(total);
    }
    (false, cfg.max_iters, st)
}

/// Runs the channel-analysis fixed point for one operating point.
///
/// # Arguments
/// * `b` - full protomatrix.
/// * `p1` - source one-probability in (0, 1), ≠ 0.5.
/// * `sigma` - channel noise standard deviation, > 0.
/// * `cfg` - supplies the iteration cap and tolerance.
///
/// # Returns
/// `(converged, iterations used, final state)`.
///
/// # Panics
/// On domain violations.
pub fn pexit_iterate(
    b: &Protomatrix,
    p1: f64,
    sigma: f64,
    cfg: &ThresholdConfig,
) -> (bool, usize, ExitState) {
    assert!(sigma > 0.0, "sigma must be positive, got {sigma}");
    cfg.validate();
    let tab = JBscTable::new(p1);
    pexit_run(b, &tab, sigma, cfg)
}

/// Es/N0 (dB) at which the binary-input AWGN channel capacity equals the
/// source-entropy rate R·h₂(p1): the information-theoretic floor for the
/// channel threshold.
///
/// # Panics
/// On non-positive `rate` or `p1` outside (0, 1).
pub fn shannon_limit(p1: f64, rate: f64) -> f64 {
    assert!(rate > 0.0, "rate must be positive, got {rate}");
    let target = rate * source_entropy(p1).expect("p1 in (0,1)");
    assert!(target < 1.0, "rate·entropy must be below channel capacity 1");
    // Capacity at noise σ is the exact-quadrature J at 2/σ, strictly
    // decreasing in σ; the closed-form fit is not used here so the limit is
    // accurate to the integration tolerance.
    let (mut lo, mut hi) = (0.05, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j_fun_quadrature(2.0 / mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    10.0 * (1.0 / (2.0 * sigma * sigma * rate)).log10()
}

/// Scans Es/N0 upward on a fixed dB grid for the lowest operating point at
/// which the fixed point converges.
///
/// The grid is anchored at integer multiples of `cfg.step`; the scan start
/// defaults to 1 dB below the theoretical limit for `(p1, rate)`. A coarse
/// upward sweep brackets the onset and grid bisection pins it down, exact
/// under the monotonicity asserted on the probe trace.
///
/// # Errors
/// [`ExitError::NoThreshold`] when nothing converges up to `cfg.scan_limit`.
///
/// # Panics
/// On domain violations in `p1` or a malformed `cfg`.
pub fn channel_threshold(
    b: &Protomatrix,
    p1: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdResult, ExitError> {
    cfg.validate();
    let tab = JBscTable::new(p1);
    let rate = b.code_rate();
    let start = cfg
        .scan_start
        .unwrap_or_else(|| shannon_limit(p1, rate) - 1.0);
    let k_lo = (start / cfg.step).floor() as i64;
    let k_hi = (cfg.scan_limit / cfg.step).ceil() as i64;
    if k_hi < k_lo {
        return Err(ExitError::NoThreshold { start, limit: cfg.scan_limit });
    }
    let point = |k: i64| k as f64 * cfg.step;
    let mut trace: Vec<ScanPoint> = Vec::new();
    let probe = |k: i64, trace: &mut Vec<ScanPoint>| -> bool {
        let db = point(k);
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(db / 10.0))).sqrt();
        let (converged, iters, _) = pexit_run(b, &tab, sigma, cfg);
        trace.push(ScanPoint { point: db, converged, iters });
        converged
    };

    // Coarse upward sweep in 256-step strides to bracket the onset.
    const STRIDE: i64 = 256;
    let mut below: Option<i64> = None;
    let mut above: Option<i64> = None;
    let mut k = k_lo;
    while k <= k_hi {
        if probe(k, &mut trace) {
            above = Some(k);
            break;
        }
        below = Some(k);
        k += STRIDE;
    }
    let Some(mut hi) = above else {
        return Err(ExitError::NoThreshold { start, limit: cfg.scan_limit });
    };
    // Grid bisection between the last failing and first converging probes.
    let mut lo = below.unwrap_or(k_lo - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut trace) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    trace.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap());
    trace.dedup_by(|a, b| a.point == b.point);
    assert_scan_monotone(&trace);
    Ok(ThresholdResult { value: point(hi), scan_points: trace })
}
