//! Source-threshold analysis over the untransmitted sub-protomatrix.
//!
//! The untransmitted columns (source + punctured) form their own fixed-point
//! system: transmitted edges are assumed fully informative at the check
//! nodes, which removes them from the update entirely, so iteration runs on
//! the sub-protomatrix alone. The source columns self-ignite — a
//! zero-information message still carries the source prior 1 − h₂(p1) — so
//! iteration starts from exact zeros. The source threshold is the largest p1
//! on a fixed grid at which the system converges, found by scanning
//! downward from 0.499 with coarse bracketing plus grid bisection.
//!
//! The chart view of the same machinery exposes the two transfer curves
//! (variable-node "inner", check-node "outer") on a uniform a-priori grid,
//! and a tunnel probe that classifies whether the true iteration trajectory
//! passes between them or stalls where they touch.

use super::jfun::{j_fun, j_inv_total, JBscTable};
use super::{assert_scan_monotone, ExitError, ScanPoint, ThresholdConfig, ThresholdResult};
use crate::protomatrix::SubProtomatrix;

const STALL_EPS: f64 = 1e-13;

struct SgpRun {
    converged: bool,
    iters: usize,
    /// Edge-multiplicity-weighted mean VN extrinsic MI after each iteration.
    trace: Vec<f64>,
}

/// One VN update from a full a-priori matrix; returns the extrinsic matrix.
fn vn_update(bp: &SubProtomatrix, tab: &JBscTable, i_ac: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = (bp.rows(), bp.cols());
    let mut sq = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            if bp.e(i, j) > 0 {
                let s = j_inv_total(i_ac[i][j]);
                sq[i][j] = s * s;
            }
        }
    }
    let mut i_ev = vec![vec![0.0; n]; m];
    for j in 0..n {
        let colsum: f64 = (0..m).map(|i| f64::from(bp.e(i, j)) * sq[i][j]).sum();
        for i in 0..m {
            if bp.e(i, j) == 0 {
                continue;
            }
            let e = f64::from(bp.e(i, j));
            let arg = colsum - e * sq[i][j] + (e - 1.0) * sq[i][j];
            i_ev[i][j] = if bp.is_source_col(j) {
                tab.eval(arg / 2.0)
            } else {
                j_fun(arg.sqrt())
            };
        }
    }
    i_ev
}

/// One CN update from a full a-priori matrix; returns the extrinsic matrix.
/// Transmitted edges are transparent here by construction: the matrix has
/// only untransmitted columns.
fn cn_update(bp: &SubProtomatrix, i_av: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, n) = (bp.rows(), bp.cols());
    let mut sqc = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            if bp.e(i, j) > 0 {
                let s = j_inv_total(1.0 - i_av[i][j]);
                sqc[i][j] = s * s;
            }
        }
    }
    let mut i_ec = vec![vec![0.0; n]; m];
    for i in 0..m {
        let rowsum: f64 = (0..n).map(|j| f64::from(bp.e(i, j)) * sqc[i][j]).sum();
        for j in 0..n {
            if bp.e(i, j) == 0 {
                continue;
            }
            let e = f64::from(bp.e(i, j));
            let arg = rowsum - e * sqc[i][j] + (e - 1.0) * sqc[i][j];
            i_ec[i][j] = 1.0 - j_fun(arg.sqrt());
        }
    }
    i_ec
}

fn edge_avg(bp: &SubProtomatrix, mat: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..bp.rows() {
        for j in 0..bp.cols() {
            let e = f64::from(bp.e(i, j));
            num += e * mat[i][j];
            den += e;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sgp_run(bp: &SubProtomatrix, tab: &JBscTable, cfg: &ThresholdConfig) -> SgpRun {
    let (m, n) = (bp.rows(), bp.cols());
    let mut i_ac = vec![vec![0.0; n]; m];
    let mut trace = Vec::new();
    let mut prev_total: Option<f64> = None;
    for l in 1..=cfg.max_iters {
        let i_ev = vn_update(bp, tab, &i_ac);
        trace.push(edge_avg(bp, &i_ev));
        let i_ec = cn_update(bp, &i_ev);
        i_ac = i_ec;
        // APP over the untransmitted columns only.
        let mut total = 0.0;
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..m {
                if bp.e(i, j) > 0 {
                    let sg = j_inv_total(i_ac[i][j]);
                    s += f64::from(bp.e(i, j)) * sg * sg;
                }
            }
            let i_app = if bp.is_source_col(j) {
                tab.eval(s / 2.0)
            } else {
                j_fun(s.sqrt())
            };
            total += 1.0 - i_app;
        }
        if total < cfg.tol {
            return SgpRun { converged: true, iters: l, trace };
        }
        if let Some(prev) = prev_total {
            if (prev - total).abs() < STALL_EPS {
                return SgpRun { converged: false, iters: l, trace };
            }
        }
        prev_total = Some(total);
    }
    SgpRun { converged: false, iters: cfg.max_iters, trace }
}

/// Scans p1 downward on a fixed grid for the largest source bias at which
/// the untransmitted system converges.
///
/// # Errors
/// [`ExitError::NoThreshold`] when nothing converges down to the floor
/// `cfg.scan_limit`.
///
/// # Panics
/// On a malformed `cfg`.
pub fn source_threshold(
    bp: &SubProtomatrix,
    cfg: &ThresholdConfig,
) -> Result<ThresholdResult, ExitError> {
    cfg.validate();
    let start = cfg.scan_start.unwrap_or(0.499);
    let floor = cfg.scan_limit;
    assert!(
        start > floor && floor > 0.0 && start < 0.5,
        "source scan needs 0 < floor < start < 0.5"
    );
    let k_start = (start / cfg.step).round() as i64;
    let steps = ((start - floor) / cfg.step).round() as i64;
    let point = |k: i64| (k_start - k) as f64 * cfg.step;
    let mut trace: Vec<ScanPoint> = Vec::new();
    let probe = |k: i64, trace: &mut Vec<ScanPoint>| -> bool {
        let p1 = point(k);
        let tab = JBscTable::new(p1);
        let run = sgp_run(bp, &tab, cfg);
        trace.push(ScanPoint { point: p1, converged: run.converged, iters: run.iters });
        run.converged
    };

    const STRIDE: i64 = 64;
    let mut before: Option<i64> = None; // largest probed k that failed
    let mut found: Option<i64> = None; // first converging k
    let mut k = 0;
    while k <= steps {
        if probe(k, &mut trace) {
            found = Some(k);
            break;
        }
        before = Some(k);
        k += STRIDE;
    }
    let Some(mut hi) = found else {
        return Err(ExitError::NoThreshold { start, limit: floor });
    };
    let mut lo = before.unwrap_or(-1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut trace) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Scan direction is downward in p1: sort descending.
    trace.sort_by(|a, b| b.point.partial_cmp(&a.point).unwrap());
    trace.dedup_by(|a, b| a.point == b.point);
    assert_scan_monotone(&trace);
    Ok(ThresholdResult { value: point(hi), scan_points: trace })
}

/// Variable-node transfer curve: for each a-priori value applied uniformly
/// to every edge, the edge-multiplicity-weighted mean extrinsic MI out of
/// the variable nodes.
///
/// # Panics
/// On `p1` domain violations or grid values outside [0, 1].
pub fn sgp_inner_curve(bp: &SubProtomatrix, p1: f64, grid: &[f64]) -> Vec<f64> {
    let tab = JBscTable::new(p1);
    let (m, n) = (bp.rows(), bp.cols());
    grid.iter()
        .map(|&x| {
            assert!((0.0..=1.0).contains(&x), "grid value {x} outside [0,1]");
            let mut i_ac = vec![vec![0.0; n]; m];
            for i in 0..m {
                for j in 0..n {
                    if bp.e(i, j) > 0 {
                        i_ac[i][j] = x;
                    }
                }
            }
            edge_avg(bp, &vn_update(bp, &tab, &i_ac))
        })
        .collect()
}

/// Check-node transfer curve: for each a-priori value applied uniformly to
/// every edge, the edge-multiplicity-weighted mean extrinsic MI out of the
/// check nodes. Independent of the source bias.
///
/// # Panics
/// On grid values outside [0, 1].
pub fn sgp_outer_curve(bp: &SubProtomatrix, grid: &[f64]) -> Vec<f64> {
    let (m, n) = (bp.rows(), bp.cols());
    grid.iter()
        .map(|&x| {
            assert!((0.0..=1.0).contains(&x), "grid value {x} outside [0,1]");
            let mut i_av = vec![vec![0.0; n]; m];
            for i in 0..m {
                for j in 0..n {
                    if bp.e(i, j) > 0 {
                        i_av[i][j] = x;
                    }
                }
            }
            edge_avg(bp, &cn_update(bp, &i_av))
        })
        .collect()
}

/// Renders both transfer curves as CSV with columns `p1,i_a,inner,outer`:
/// one row per (p1, grid value), the outer curve repeated per family since
/// it does not depend on p1.
pub fn export_exit_chart(bp: &SubProtomatrix, p1_list: &[f64], grid: &[f64]) -> String {
    let mut out = String::from("p1,i_a,inner,outer\n");
    if p1_list.is_empty() {
        return out;
    }
    let outer = sgp_outer_curve(bp, grid);
    for &p1 in p1_list {
        let inner = sgp_inner_curve(bp, p1, grid);
        for (k, &x) in grid.iter().enumerate() {
            out.push_str(&format!("{p1},{x},{:.6},{:.6}\n", inner[k], outer[k]));
        }
    }
    out
}

/// Outcome of a tunnel probe at one source bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelReport {
    /// True when the iteration trajectory passes cleanly between the two
    /// transfer curves: every iteration strictly increases the mean VN
    /// extrinsic MI and the fixed point converges.
    pub open: bool,
    /// Whether the fixed point converged.
    pub converged: bool,
    /// Smallest per-iteration gain in mean VN extrinsic MI (negative or ~0
    /// when the trajectory stalls where the curves touch).
    pub min_gain: f64,
    /// Iterations used.
    pub iters: usize,
}

/// Probes whether the decoding tunnel between the variable-node and
/// check-node transfer curves is open at source bias `p1`, by running the
/// true iteration trajectory and checking it for monotone progress to
/// convergence. This is exact with respect to the per-edge dynamics, unlike
/// comparing the two edge-averaged curves pointwise.
pub fn sgp_tunnel(bp: &SubProtomatrix, p1: f64, cfg: &ThresholdConfig) -> TunnelReport {
    cfg.validate();
    let tab = JBscTable::new(p1);
    let run = sgp_run(bp, &tab, cfg);
    let min_gain = run
        .trace
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let min_gain = if run.trace.len() < 2 { f64::INFINITY } else { min_gain };
    TunnelReport {
        open: run.converged && min_gain > 0.0,
        converged: run.converged,
        min_gain,
        iters: run.iters,
    }
}
