//! Encoder and belief-propagation decoder for lifted codes.
//!
//! Encoding treats the parity-check system directly: the source bits occupy
//! the leftmost `n_r·z` codeword positions, and the remaining positions are
//! the unique GF(2) solution of `H·vᵀ = 0` given those source bits.  The
//! non-source column block is square for every shipped family (`m = n − n_r`),
//! so a one-time Gauss–Jordan inversion over bit-packed rows amortizes the
//! per-frame solve into AND/popcount sweeps.
//!
//! Decoding is the flooding-schedule sum-product algorithm with the
//! three-branch LLR initialization: the source prior `ln((1−p1)/p1)` on
//! source positions, zero on punctured positions, and `2y/σ²` on transmitted
//! positions (BPSK maps bit 1 to −1).  Check updates use the exact
//! tanh/arctanh rule with messages clamped to ±50, which keeps every output
//! finite even when partial products saturate to ±1.

use crate::lifting::LiftedCode;
use std::fmt;

/// Magnitude bound applied to every LLR and message.
const LLR_CLAMP: f64 = 50.0;

/// Errors from [`build_encoder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    /// The non-source column block of this particular lift is singular over
    /// GF(2); re-lift with a different seed and try again.
    UnencodableLift,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::UnencodableLift => write!(
                f,
                "non-source block of the lifted matrix is singular; re-lift with a new seed"
            ),
        }
    }
}

impl std::error::Error for CodecError {}

/// Precomputed GF(2) solver mapping source bits to full codewords.
#[derive(Debug, Clone)]
pub struct Encoder {
    n_source: usize,
    mz: usize,
    words: usize,
    /// Inverse of the non-source block, bit-packed row-major.
    inv: Vec<u64>,
    /// Check rows adjacent to each source column (sparse columns of the
    /// source block).
    source_cols: Vec<Vec<u32>>,
}

/// Hard-decision output of [`bp_decode`].
#[derive(Debug, Clone)]
pub struct DecodeResult {
    /// Hard decisions for all `n·z` codeword positions.
    pub bits: Vec<u8>,
    /// True iff the syndrome reached zero within the iteration budget.
    pub converged: bool,
    /// Check-update rounds actually executed.
    pub iterations: usize,
}

/// Builds the per-code encoder by inverting the non-source column block.
///
/// # Arguments
/// * `code` - lifted code whose non-source block is square
///   (`rows == cols − source columns`).
///
/// # Returns
/// The encoder, or [`CodecError::UnencodableLift`] when this lift's
/// non-source block has no GF(2) inverse (the caller should re-lift with a
/// fresh seed).
///
/// # Panics
/// Panics if the non-source block is not square.
pub fn build_encoder(code: &LiftedCode) -> Result<Encoder, CodecError> {
    let mz = code.rows();
    let n_source = code.source_cols();
    assert_eq!(
        mz,
        code.cols() - n_source,
        "non-source block must be square"
    );
    let words = mz.div_ceil(64);
    let mut a = vec![0u64; mz * words];
    let mut inv = vec![0u64; mz * words];
    for c in 0..mz {
        for &r in code.col_rows(n_source + c) {
            a[r as usize * words + c / 64] |= 1 << (c % 64);
        }
        inv[c * words + c / 64] |= 1 << (c % 64);
    }

    let mut pivot_a = vec![0u64; words];
    let mut pivot_inv = vec![0u64; words];
    for c in 0..mz {
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (c..mz).find(|&r| a[r * words + w] & bit != 0) else {
            return Err(CodecError::UnencodableLift);
        };
        if p != c {
            for k in 0..words {
                a.swap(p * words + k, c * words + k);
                inv.swap(p * words + k, c * words + k);
            }
        }
        pivot_a.copy_from_slice(&a[c * words..(c + 1) * words]);
        pivot_inv.copy_from_slice(&inv[c * words..(c + 1) * words]);
        for r in 0..mz {
            if r != c && a[r * words + w] & bit != 0 {
                for k in 0..words {
                    a[r * words + k] ^= pivot_a[k];
                    inv[r * words + k] ^= pivot_inv[k];
                }
            }
        }
    }

    let source_cols = (0..n_source).map(|j| code.col_rows(j).to_vec()).collect();
    Ok(Encoder {
        n_source,
        mz,
        words,
        inv,
        source_cols,
    })
}

impl Encoder {
    /// Number of source bits per frame.
    pub fn source_len(&self) -> usize {
        self.n_source
    }

    /// Codeword length.
    pub fn codeword_len(&self) -> usize {
        self.n_source + self.mz
    }

    /// Encodes one frame: the output codeword starts with `source` verbatim
    /// and continues with the unique parity completion satisfying every
    /// check.
    ///
    /// # Arguments
    /// * `source` - source bits (0/1), length [`Encoder::source_len`].
    ///
    /// # Returns
    /// Codeword of length [`Encoder::codeword_len`].
    ///
    /// # Panics
    /// Panics on length mismatch or a bit outside {0, 1}.
    pub fn encode(&self, source: &[u8]) -> Vec<u8> {
        assert_eq!(source.len(), self.n_source, "source length mismatch");
        let mut b = vec![0u64; self.words];
        for (j, &s) in source.iter().enumerate() {
            assert!(s <= 1, "source bit {j} is not binary");
            if s == 1 {
                for &r in &self.source_cols[j] {
                    b[r as usize / 64] ^= 1 << (r % 64);
                }
            }
        }
        let mut v = Vec::with_capacity(self.codeword_len());
        v.extend_from_slice(source);
        for r in 0..self.mz {
            let row = &self.inv[r * self.words..(r + 1) * self.words];
            let parity: u32 = row
                .iter()
                .zip(&b)
                .map(|(&x, &y)| (x & y).count_ones())
                .sum();
            v.push((parity & 1) as u8);
        }
        v
    }
}

/// Number of unsatisfied checks for a hard-decision vector, computed straight
/// from the sparse adjacency (independent of any decoder state).
///
/// # Panics
/// Panics if `bits` does not cover every column.
pub fn syndrome_weight(code: &LiftedCode, bits: &[u8]) -> usize {
    assert_eq!(bits.len(), code.cols(), "bit vector length mismatch");
    (0..code.rows())
        .filter(|&i| {
            code.row_cols(i)
                .iter()
                .fold(0u8, |acc, &j| acc ^ (bits[j as usize] & 1))
                == 1
        })
        .count()
}

/// Builds the initial LLR vector for one received frame.
///
/// Positions take one of three values by column role: source positions get
/// the prior `ln((1−p1)/p1)`, punctured positions get 0 (nothing was sent),
/// and transmitted positions get the AWGN channel LLR `2y/σ²` where the BPSK
/// map sends bit 1 to −1 and bit 0 to +1.
///
/// # Arguments
/// * `code` - lifted code supplying lengths and column roles.
/// * `received` - channel observations for the transmitted positions, in
///   column order.
/// * `p1` - source one-probability, in (0, 1).
/// * `sigma` - channel noise standard deviation, positive.
///
/// # Returns
/// LLR vector covering all columns.
///
/// # Panics
/// Panics if `received` does not match the transmitted-column count, `p1` is
/// outside (0, 1), or `sigma` is not positive.
pub fn init_llrs(code: &LiftedCode, received: &[f64], p1: f64, sigma: f64) -> Vec<f64> {
    let n_t = code.cols() - code.source_cols() - code.punctured_cols();
    assert_eq!(received.len(), n_t, "received length mismatch");
    assert!(p1 > 0.0 && p1 < 1.0, "p1 must lie in (0, 1)");
    assert!(sigma > 0.0, "sigma must be positive");
    let llr_s = ((1.0 - p1) / p1).ln();
    let scale = 2.0 / (sigma * sigma);
    let mut llrs = Vec::with_capacity(code.cols());
    llrs.extend(std::iter::repeat(llr_s).take(code.source_cols()));
    llrs.extend(std::iter::repeat(0.0).take(code.punctured_cols()));
    llrs.extend(received.iter().map(|&y| scale * y));
    llrs
}

/// Flooding-schedule sum-product decoder.
///
/// Each round updates every check node with the exact tanh/arctanh rule,
/// then every variable node, takes hard decisions from the a-posteriori
/// LLRs, and stops as soon as the syndrome is zero.
///
/// # Arguments
/// * `code` - lifted code to decode on.
/// * `llrs` - initial per-column LLRs (see [`init_llrs`]).
/// * `i_max` - iteration budget, at least 1.
///
/// # Returns
/// Hard decisions with the convergence flag and rounds used; non-convergence
/// is an ordinary result, not an error.
///
/// # Panics
/// Panics if `llrs` does not cover every column or `i_max` is 0.
pub fn bp_decode(code: &LiftedCode, llrs: &[f64], i_max: usize) -> DecodeResult {
    bp_decode_impl(code, llrs, i_max, None)
}

/// [`bp_decode`] variant that also records the mean a-posteriori |LLR| after
/// each round (a cheap convergence diagnostic for debug output).
pub fn bp_decode_traced(
    code: &LiftedCode,
    llrs: &[f64],
    i_max: usize,
    trace: &mut Vec<f64>,
) -> DecodeResult {
    bp_decode_impl(code, llrs, i_max, Some(trace))
}

fn bp_decode_impl(
    code: &LiftedCode,
    llrs: &[f64],
    i_max: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> DecodeResult {
    let n = code.cols();
    let m = code.rows();
    assert_eq!(llrs.len(), n, "LLR length mismatch");
    assert!(i_max >= 1, "iteration budget must be at least 1");

    // Edge arrays in check-major order plus a variable-major index into them.
    let mut cn_start = Vec::with_capacity(m + 1);
    cn_start.push(0usize);
    for i in 0..m {
        cn_start.push(cn_start[i] + code.row_cols(i).len());
    }
    let e_total = cn_start[m];
    let mut edge_vn = Vec::with_capacity(e_total);
    for i in 0..m {
        edge_vn.extend_from_slice(code.row_cols(i));
    }
    let mut vn_start = vec![0usize; n + 1];
    for &j in &edge_vn {
        vn_start[j as usize + 1] += 1;
    }
    for j in 0..n {
        vn_start[j + 1] += vn_start[j];
    }
    let mut vn_edges = vec![0u32; e_total];
    let mut fill = vn_start.clone();
    for (e, &j) in edge_vn.iter().enumerate() {
        vn_edges[fill[j as usize]] = e as u32;
        fill[j as usize] += 1;
    }

    let mut v_msg: Vec<f64> = (0..e_total)
        .map(|e| llrs[edge_vn[e] as usize].clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect();
    let mut c_msg = vec![0.0f64; e_total];
    let max_deg = (0..m).map(|i| cn_start[i + 1] - cn_start[i]).max().unwrap_or(0);
    let mut fwd = vec![0.0f64; max_deg + 1];
    let mut bits = vec![0u8; n];

    for iter in 1..=i_max {
        // Check-node pass: for each edge, the product of tanh(v/2) over the
        // other edges of its check, via forward/backward partial products.
        for i in 0..m {
            let lo = cn_start[i];
            let hi = cn_start[i + 1];
            let d = hi - lo;
            fwd[0] = 1.0;
            for k in 0..d {
                fwd[k + 1] = fwd[k] * (v_msg[lo + k] / 2.0).tanh();
            }
            let mut bwd = 1.0;
            for k in (0..d).rev() {
                let p = fwd[k] * bwd;
                // 2·artanh(p) written via ln_1p so p = ±1 gives ±∞, which the
                // clamp turns into a finite saturated message.
                c_msg[lo + k] = ((p).ln_1p() - (-p).ln_1p()).clamp(-LLR_CLAMP, LLR_CLAMP);
                bwd *= (v_msg[lo + k] / 2.0).tanh();
            }
        }

        // Variable-node pass, a-posteriori totals, and hard decisions.
        let mut abs_sum = 0.0;
        for j in 0..n {
            let mut total = llrs[j];
            for &e in &vn_edges[vn_start[j]..vn_start[j + 1]] {
                total += c_msg[e as usize];
            }
            for &e in &vn_edges[vn_start[j]..vn_start[j + 1]] {
                v_msg[e as usize] =
                    (total - c_msg[e as usize]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
            bits[j] = u8::from(total < 0.0);
            abs_sum += total.abs();
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(abs_sum / n as f64);
        }

        // Stopping rule: zero syndrome.
        let clean = (0..m).all(|i| {
            edge_vn[cn_start[i]..cn_start[i + 1]]
                .iter()
                .fold(0u8, |acc, &j| acc ^ bits[j as usize])
                == 0
        });
        if clean {
            return DecodeResult {
                bits,
                converged: true,
                iterations: iter,
            };
        }
    }
    DecodeResult {
        bits,
        converged: false,
        iterations: i_max,
    }
}
