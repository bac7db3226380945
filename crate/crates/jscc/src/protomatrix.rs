//! Core data model for generic joint source-channel coding protomatrices.
//!
//! A protomatrix is a small matrix of non-negative integers giving the edge
//! multiplicities between check nodes (rows) and variable nodes (columns) of a
//! protograph. For the joint source-channel construction the columns carry
//! roles in a fixed order: the leftmost `n_r` columns are source-symbol
//! variable nodes, the next `n_p` are punctured variable nodes, and the
//! remaining columns are transmitted over the channel. The overall symbol
//! rate, the source entropy, and the Es/N0 <-> noise-sigma conversion that the
//! rest of the toolkit relies on are all defined here.

use std::fmt;

/// Column role of a lifted or protograph variable node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Carries a source symbol; receives the source-prior LLR.
    Source,
    /// Not transmitted; receives no channel observation.
    Punctured,
    /// BPSK-modulated and sent over the BI-AWGN channel.
    Transmitted,
}

/// Error raised by protomatrix parsing and the scalar helpers.
#[derive(Debug, Clone, PartialEq)]
pub enum ProtomatrixError {
    /// The header line is missing or does not contain four integers.
    MalformedHeader(String),
    /// A matrix row has the wrong number of entries.
    RaggedRow { row: usize, expected: usize, found: usize },
    /// An entry failed to parse as a non-negative integer.
    BadEntry { row: usize, text: String },
    /// Fewer matrix rows than the header promised.
    MissingRows { expected: usize, found: usize },
    /// The role counts violate the type invariants.
    BadRoles(String),
    /// A scalar argument was outside its domain.
    Domain(String),
}

impl fmt::Display for ProtomatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtomatrixError::MalformedHeader(line) => {
                write!(f, "malformed header line (want `m n n_r n_p`): {line:?}")
            }
            ProtomatrixError::RaggedRow { row, expected, found } => {
                write!(f, "row {row} has {found} entries, expected {expected}")
            }
            ProtomatrixError::BadEntry { row, text } => {
                write!(f, "row {row}: entry {text:?} is not a non-negative integer")
            }
            ProtomatrixError::MissingRows { expected, found } => {
                write!(f, "expected {expected} matrix rows, found {found}")
            }
            ProtomatrixError::BadRoles(msg) => write!(f, "invalid role counts: {msg}"),
            ProtomatrixError::Domain(msg) => write!(f, "domain violation: {msg}"),
        }
    }
}

impl std::error::Error for ProtomatrixError {}

/// Generic protomatrix with its column-role partition.
///
/// Invariants (enforced at construction): all entries are non-negative,
/// `m >= 1`, `n >= 1`, `n_r >= 1`, `n_p >= 0`, and `n_r + n_p < n` so at least
/// one column is transmitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protomatrix {
    rows: usize,
    cols: usize,
    n_r: usize,
    n_p: usize,
    /// Row-major edge multiplicities.
    data: Vec<u32>,
}

/// Bare sub-protomatrix of the untransmitted columns together with its source
/// count. Source-threshold analysis operates on this type alone, so it also
/// serves as the carrier for codes that consist entirely of untransmitted
/// columns (where a full [`Protomatrix`] would be rejected).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubProtomatrix {
    rows: usize,
    cols: usize,
    n_r: usize,
    data: Vec<u32>,
}

/// Result of splitting a protomatrix into untransmitted and transmitted parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubSplit {
    /// Columns `0 .. n_r + n_p`: the untransmitted variable nodes.
    pub b_p: SubProtomatrix,
    /// Columns `n_r + n_p .. n` as a bare row-major matrix.
    pub b_t: Vec<Vec<u32>>,
}

/// Biased binary source with its derived prior log-likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    /// Probability that a source symbol equals 1. Excludes 0.5 exactly.
    pub p1: f64,
    /// `ln((1 - p1) / p1)`; positive when p1 < 0.5.
    pub llr_s: f64,
}

impl SourceModel {
    /// Builds a source model, validating the probability domain.
    ///
    /// # Errors
    /// `Domain` if `p1` is outside (0, 1) or equals 0.5.
    pub fn new(p1: f64) -> Result<Self, ProtomatrixError> {
        if !(p1 > 0.0 && p1 < 1.0) || p1 == 0.5 {
            return Err(ProtomatrixError::Domain(format!(
                "p1 must lie in (0,1) and differ from 0.5, got {p1}"
            )));
        }
        Ok(SourceModel { p1, llr_s: ((1.0 - p1) / p1).ln() })
    }
}

impl Protomatrix {
    /// Builds a protomatrix from row-major entries and role counts.
    ///
    /// # Errors
    /// `BadRoles` when the role partition violates the invariants listed on
    /// the type.
    pub fn new(
        entries: Vec<Vec<u32>>,
        n_r: usize,
        n_p: usize,
    ) -> Result<Self, ProtomatrixError> {
        let rows = entries.len();
        if rows == 0 {
            return Err(ProtomatrixError::BadRoles("matrix has no rows".into()));
        }
        let cols = entries[0].len();
        if cols == 0 {
            return Err(ProtomatrixError::BadRoles("matrix has no columns".into()));
        }
        for (i, r) in entries.iter().enumerate() {
            if r.len() != cols {
                return Err(ProtomatrixError::RaggedRow {
                    row: i + 1,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        if n_r < 1 {
            return Err(ProtomatrixError::BadRoles("n_r must be at least 1".into()));
        }
        if n_r + n_p >= cols {
            return Err(ProtomatrixError::BadRoles(format!(
                "n_r + n_p = {} leaves no transmitted column (n = {})",
                n_r + n_p,
                cols
            )));
        }
        let data = entries.into_iter().flatten().collect();
        Ok(Protomatrix { rows, cols, n_r, n_p, data })
    }

    /// Parses the plain-text format: a header line `m n n_r n_p` followed by
    /// `m` lines of `n` space-separated non-negative integers. Blank lines and
    /// `#` comments (full-line or trailing) are ignored.
    ///
    /// # Errors
    /// Any of the parse variants of [`ProtomatrixError`].
    pub fn parse(text: &str) -> Result<Self, ProtomatrixError> {
        let (rows, cols, n_r, n_p, entries) = parse_matrix_text(text)?;
        if n_r + n_p >= cols {
            return Err(ProtomatrixError::BadRoles(format!(
                "n_r + n_p = {} leaves no transmitted column (n = {})",
                n_r + n_p,
                cols
            )));
        }
        let _ = rows;
        Protomatrix::new(entries, n_r, n_p)
    }

    /// Number of check-node rows `m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of variable-node columns `n`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Count of source-symbol columns `n_r`.
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Count of punctured columns `n_p`.
    pub fn n_p(&self) -> usize {
        self.n_p
    }

    /// Count of transmitted columns `n - n_r - n_p`.
    pub fn n_t(&self) -> usize {
        self.cols - self.n_r - self.n_p
    }

    /// Edge multiplicity `e_{i,j}`.
    pub fn e(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    /// Role of column `j`.
    pub fn role(&self, j: usize) -> Role {
        if j < self.n_r {
            Role::Source
        } else if j < self.n_r + self.n_p {
            Role::Punctured
        } else {
            Role::Transmitted
        }
    }

    /// Overall symbol code rate `n_r / (n - n_r - n_p)`.
    pub fn code_rate(&self) -> f64 {
        self.n_r as f64 / self.n_t() as f64
    }

    /// Splits into the untransmitted sub-protomatrix and the transmitted rest.
    pub fn split_sub(&self) -> SubSplit {
        let np_cols = self.n_r + self.n_p;
        let mut bp = Vec::with_capacity(self.rows);
        let mut bt = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            bp.push((0..np_cols).map(|j| self.e(i, j)).collect::<Vec<_>>());
            bt.push((np_cols..self.cols).map(|j| self.e(i, j)).collect::<Vec<_>>());
        }
        let b_p = SubProtomatrix::new(bp, self.n_r).expect("split preserves invariants");
        SubSplit { b_p, b_t: bt }
    }

    /// Serializes back to the plain-text file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.rows, self.cols, self.n_r, self.n_p);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.e(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl SubProtomatrix {
    /// Builds an untransmitted sub-protomatrix (`n_r` source columns followed
    /// by punctured columns).
    ///
    /// # Errors
    /// `BadRoles` when shapes or counts are inconsistent.
    pub fn new(entries: Vec<Vec<u32>>, n_r: usize) -> Result<Self, ProtomatrixError> {
        let rows = entries.len();
        if rows == 0 {
            return Err(ProtomatrixError::BadRoles("matrix has no rows".into()));
        }
        let cols = entries[0].len();
        if cols == 0 {
            return Err(ProtomatrixError::BadRoles("matrix has no columns".into()));
        }
        for (i, r) in entries.iter().enumerate() {
            if r.len() != cols {
                return Err(ProtomatrixError::RaggedRow {
                    row: i + 1,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        if n_r < 1 || n_r > cols {
            return Err(ProtomatrixError::BadRoles(format!(
                "n_r = {n_r} outside 1..={cols}"
            )));
        }
        let data = entries.into_iter().flatten().collect();
        Ok(SubProtomatrix { rows, cols, n_r, data })
    }

    /// Parses the same text format as [`Protomatrix::parse`] but allows
    /// `n_r + n_p = n` (no transmitted columns), as needed for codes analyzed
    /// purely on their untransmitted part.
    ///
    /// # Errors
    /// Any of the parse variants of [`ProtomatrixError`].
    pub fn parse(text: &str) -> Result<Self, ProtomatrixError> {
        let (_, cols, n_r, n_p, entries) = parse_matrix_text(text)?;
        if n_r + n_p > cols {
            return Err(ProtomatrixError::BadRoles(format!(
                "n_r + n_p = {} exceeds n = {}",
                n_r + n_p,
                cols
            )));
        }
        // Only the untransmitted columns participate; drop any transmitted ones.
        let keep = n_r + n_p;
        let trimmed: Vec<Vec<u32>> =
            entries.into_iter().map(|r| r.into_iter().take(keep).collect()).collect();
        SubProtomatrix::new(trimmed, n_r)
    }

    /// Number of check-node rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of untransmitted columns (`n_r + n_p`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Count of source columns.
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Edge multiplicity `e_{i,j}`.
    pub fn e(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    /// True when column `j` is a source column.
    pub fn is_source_col(&self, j: usize) -> bool {
        j < self.n_r
    }

    /// Total number of protograph edges (sum of multiplicities).
    pub fn edge_count(&self) -> u32 {
        self.data.iter().sum()
    }
}

fn parse_matrix_text(
    text: &str,
) -> Result<(usize, usize, usize, usize, Vec<Vec<u32>>), ProtomatrixError> {
    let mut lines = text.lines().filter_map(|l| {
        let stripped = match l.find('#') {
            Some(pos) => &l[..pos],
            None => l,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some(trimmed)
        }
    });
    let header = lines
        .next()
        .ok_or_else(|| ProtomatrixError::MalformedHeader("<empty input>".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 {
        return Err(ProtomatrixError::MalformedHeader(header.into()));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ProtomatrixError::MalformedHeader(header.into()))
    };
    let rows = parse_usize(head[0])?;
    let cols = parse_usize(head[1])?;
    let n_r = parse_usize(head[2])?;
    let n_p = parse_usize(head[3])?;
    if rows == 0 || cols == 0 {
        return Err(ProtomatrixError::BadRoles("m and n must be positive".into()));
    }
    let mut entries = Vec::with_capacity(rows);
    for (idx, line) in lines.enumerate() {
        if idx >= rows {
            break;
        }
        let mut row = Vec::with_capacity(cols);
        for tok in line.split_whitespace() {
            let v = tok.parse::<u32>().map_err(|_| ProtomatrixError::BadEntry {
                row: idx + 1,
                text: tok.into(),
            })?;
            row.push(v);
        }
        if row.len() != cols {
            return Err(ProtomatrixError::RaggedRow {
                row: idx + 1,
                expected: cols,
                found: row.len(),
            });
        }
        entries.push(row);
    }
    if entries.len() != rows {
        return Err(ProtomatrixError::MissingRows { expected: rows, found: entries.len() });
    }
    Ok((rows, cols, n_r, n_p, entries))
}

/// Binary entropy of a Bernoulli(`p1`) source in bits per symbol.
///
/// # Errors
/// `Domain` when `p1` is outside (0, 1).
pub fn source_entropy(p1: f64) -> Result<f64, ProtomatrixError> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(ProtomatrixError::Domain(format!("p1 must lie in (0,1), got {p1}")));
    }
    Ok(-p1 * p1.log2() - (1.0 - p1) * (1.0 - p1).log2())
}

/// Noise standard deviation for a given Es/N0 in dB at symbol rate `rate`,
/// from `Es/N0 = 10 log10(1 / (2 sigma^2 R))`.
///
/// # Errors
/// `Domain` for non-positive rate.
pub fn es_n0_to_sigma(es_n0_db: f64, rate: f64) -> Result<f64, ProtomatrixError> {
    if rate <= 0.0 {
        return Err(ProtomatrixError::Domain(format!("rate must be positive, got {rate}")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(es_n0_db / 10.0))).sqrt())
}

/// Inverse of [`es_n0_to_sigma`]: the Es/N0 in dB at which the channel noise
/// has standard deviation `sigma`.
///
/// # Errors
/// `Domain` for non-positive sigma or rate.
pub fn sigma_to_es_n0(sigma: f64, rate: f64) -> Result<f64, ProtomatrixError> {
    if sigma <= 0.0 || rate <= 0.0 {
        return Err(ProtomatrixError::Domain(format!(
            "sigma and rate must be positive, got sigma={sigma}, rate={rate}"
        )));
    }
    Ok(10.0 * (1.0 / (2.0 * sigma * sigma * rate)).log10())
}
