//! Dense nonnegative square matrices, Sinkhorn scaling, support analysis,
//! and the named matrix families used throughout the crate.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ingestion clamp: entries in `[-NEG_TOL, 0)` are rounded up to zero,
/// anything more negative is rejected.
pub const NEG_TOL: f64 = 1e-9;

/// Default tolerance for doubly-stochastic checks.
pub const DS_TOL: f64 = 1e-9;

/// Default Sinkhorn iteration cap.
pub const SINKHORN_MAX_ITER: usize = 10_000;

/// Dense `n × n` nonnegative matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    entries: Vec<f64>,
}

/// Diagonal scaling pair: `scaled = Diag(row_factors) · M · Diag(col_factors)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochScale {
    pub row_factors: Vec<f64>,
    pub col_factors: Vec<f64>,
}

/// Positivity mask of a matrix plus its maximum bipartite matching size.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPattern {
    pub n: usize,
    pub mask: Vec<bool>,
    pub max_matching: usize,
}

impl SupportPattern {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    /// True iff a permutation fits inside the support (per > 0 for
    /// strictly positive weights on the mask).
    pub fn has_perfect_matching(&self) -> bool {
        self.max_matching == self.n
    }
}

impl Matrix {
    /// Build from rows, validating shape and nonnegativity.
    ///
    /// Entries in `[-1e-9, 0)` are clamped to 0; anything lower is an error.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::RaggedRows("no rows".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRows(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at ({i}, {j})")));
                }
                if v < -NEG_TOL {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                entries.push(v.max(0.0));
            }
        }
        Ok(Matrix { n, entries })
    }

    /// Build from a flat row-major buffer of length `n*n` (validated).
    pub fn from_flat(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::BadDimensions(format!(
                "flat buffer of length {} for n = {}",
                entries.len(),
                n
            )));
        }
        let rows = entries.chunks(n).map(|c| c.to_vec()).collect();
        Matrix::from_rows(rows)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        Matrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// The uniform doubly stochastic matrix `(1/n) J_n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1);
        Matrix {
            n,
            entries: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                sums[j] += self.get(i, j);
            }
        }
        sums
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Entrywise map, preserving shape.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            n: self.n,
            entries: self.entries.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `Diag(a) · M · Diag(b)`.
    pub fn scaled(&self, row_factors: &[f64], col_factors: &[f64]) -> Matrix {
        assert_eq!(row_factors.len(), self.n);
        assert_eq!(col_factors.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i * self.n + j] *= row_factors[i] * col_factors[j];
            }
        }
        out
    }

    /// True iff all entries lie in `[0, 1 + tol]` and every row and column
    /// sum is within `tol` of 1.
    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        if self.entries.iter().any(|&v| v > 1.0 + tol) {
            return false;
        }
        self.row_sums().iter().all(|&s| (s - 1.0).abs() <= tol)
            && self.col_sums().iter().all(|&s| (s - 1.0).abs() <= tol)
    }

    /// All entries in {0, 1}?
    pub fn is_boolean(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Positivity mask with its exact maximum bipartite matching size.
    pub fn support_pattern(&self) -> SupportPattern {
        let n = self.n;
        let mask: Vec<bool> = self.entries.iter().map(|&v| v > 0.0).collect();
        let max_matching = max_bipartite_matching(n, &mask);
        SupportPattern {
            n,
            mask,
            max_matching,
        }
    }

    /// Cells of the support that lie on at least one perfect matching.
    ///
    /// A doubly stochastic matrix supported inside `supp(M)` can only put
    /// mass on these cells (Birkhoff decomposition), so they are the true
    /// feasible support for Birkhoff-polytope optimization. Returns `None`
    /// when the support has no perfect matching at all.
    pub fn matchable_core(&self) -> Option<Vec<bool>> {
        let n = self.n;
        let pattern = self.support_pattern();
        if !pattern.has_perfect_matching() {
            return None;
        }
        let mut core = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if !pattern.mask[i * n + j] {
                    continue;
                }
                // Force (i, j): a perfect matching through it exists iff the
                // minor with row i and column j deleted still matches fully.
                let mut reduced = vec![false; n * n];
                for r in 0..n {
                    for c in 0..n {
                        reduced[r * n + c] = r != i && c != j && pattern.mask[r * n + c];
                    }
                }
                if max_bipartite_matching(n, &reduced) == n - 1 {
                    core[i * n + j] = true;
                }
            }
        }
        Some(core)
    }

    /// Sinkhorn scaling: alternate row and column normalization until the
    /// scaled matrix is doubly stochastic within `tol`.
    ///
    /// Requires a perfect matching in the support (otherwise no scaling
    /// exists and the iteration diverges). Matrices with support but
    /// without total support converge too slowly for any finite budget and
    /// surface as `NotConverged`.
    pub fn sinkhorn_scale(&self, tol: f64, max_iter: usize) -> Result<(Matrix, StochScale)> {
        let n = self.n;
        if tol <= 0.0 || max_iter == 0 {
            return Err(Error::Domain(
                "sinkhorn: tol and max_iter must be positive".into(),
            ));
        }
        let pattern = self.support_pattern();
        if !pattern.has_perfect_matching() {
            return Err(Error::NoPerfectMatching {
                max_matching: pattern.max_matching,
                n,
            });
        }
        let mut a = vec![1.0f64; n];
        let mut b = vec![1.0f64; n];
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            // Row pass.
            for i in 0..n {
                let s: f64 = (0..n).map(|j| self.get(i, j) * b[j]).sum();
                a[i] = 1.0 / s;
            }
            // Column pass.
            for j in 0..n {
                let s: f64 = (0..n).map(|i| a[i] * self.get(i, j)).sum();
                b[j] = 1.0 / s;
            }
            // After the column pass all column sums are exactly 1; the row
            // residual is the convergence measure.
            residual = 0.0f64;
            for i in 0..n {
                let s: f64 = (0..n).map(|j| a[i] * self.get(i, j) * b[j]).sum();
                residual = residual.max((s - 1.0).abs());
            }
            if residual <= tol {
                let scaled = self.scaled(&a, &b);
                return Ok((
                    scaled,
                    StochScale {
                        row_factors: a,
                        col_factors: b,
                    },
                ));
            }
        }
        Err(Error::NotConverged {
            what: "sinkhorn",
            max_iter,
            residual,
        })
    }
}

/// Maximum bipartite matching on an `n × n` boolean mask
/// (Kuhn's augmenting paths; plenty at desk scale).
pub fn max_bipartite_matching(n: usize, mask: &[bool]) -> usize {
    let mut match_col = vec![usize::MAX; n]; // column -> row
    let mut size = 0;
    let mut visited = vec![false; n];
    for row in 0..n {
        visited.iter_mut().for_each(|v| *v = false);
        if augment(n, mask, row, &mut visited, &mut match_col) {
            size += 1;
        }
    }
    size
}

fn augment(
    n: usize,
    mask: &[bool],
    row: usize,
    visited: &mut [bool],
    match_col: &mut [usize],
) -> bool {
    for col in 0..n {
        if mask[row * n + col] && !visited[col] {
            visited[col] = true;
            if match_col[col] == usize::MAX || augment(n, mask, match_col[col], visited, match_col)
            {
                match_col[col] = row;
                return true;
            }
        }
    }
    false
}

/// Named matrix families.
pub mod families {
    use super::Matrix;
    use crate::{Error, Result};

    /// `a·J_n + b·I_n`.
    pub fn aj_plus_bi(n: usize, a: f64, b: f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, if i == j { a + b } else { a });
            }
        }
        m
    }

    /// Doubly stochastic matrix with diagonal 1/2 and off-diagonal
    /// `1/(2(n-1))`; the `per/F` ratio on this family grows like
    /// `(e/2)^{n/2}`. Requires `n >= 2`.
    pub fn half_diagonal(n: usize) -> Result<Matrix> {
        if n < 2 {
            return Err(Error::Domain("half_diagonal requires n >= 2".into()));
        }
        let a = 1.0 / (2.0 * (n as f64 - 1.0));
        let b = 0.5 - a;
        Ok(aj_plus_bi(n, a, b))
    }

    /// Direct sum of `blocks` copies of `(1/2) J_2`; achieves
    /// `per/F = 2^blocks` exactly.
    pub fn pair_blocks(blocks: usize) -> Result<Matrix> {
        if blocks == 0 {
            return Err(Error::Domain("pair_blocks requires blocks >= 1".into()));
        }
        let n = 2 * blocks;
        let mut m = Matrix::zeros(n);
        for b in 0..blocks {
            for i in 0..2 {
                for j in 0..2 {
                    m.set(2 * b + i, 2 * b + j, 0.5);
                }
            }
        }
        Ok(m)
    }

    /// Bordered matrix
    /// `[[a·A, b·J_{n,n-m}], [b·J_{n-m,n}, 0]]` of size `(2n-m) × (2n-m)`.
    ///
    /// For `A` with all row and column sums `r`, choosing `a = (m/n)/r` and
    /// `b = 1/n` makes the result doubly stochastic, and
    /// `per_m(A) = per(K) / (a^m b^{2(n-m)} ((n-m)!)^2)` lifts subpermanent
    /// sums to plain permanents.
    pub fn bordered(mat: &Matrix, m: usize, a: f64, b: f64) -> Result<Matrix> {
        let n = mat.n();
        if m > n {
            return Err(Error::BadDimensions(format!("bordered: m = {m} > n = {n}")));
        }
        let q = n - m;
        let size = 2 * n - m;
        let mut k = Matrix::zeros(size);
        for i in 0..n {
            for j in 0..n {
                k.set(i, j, a * mat.get(i, j));
            }
        }
        for i in 0..n {
            for j in 0..q {
                k.set(i, n + j, b);
                k.set(n + j, i, b);
            }
        }
        Ok(k)
    }

    /// The `(3n/2) × (3n/2)` doubly stochastic family
    /// `[[I_n/2, J_{n,n/2}/n], [J_{n/2,n}/n, 0]]` (n even) on which the
    /// LMS and SD products eventually exceed the permanent.
    pub fn lms_counterexample(n: usize) -> Result<Matrix> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::OddN(n));
        }
        let ident = Matrix::identity(n);
        bordered(&ident, n / 2, 0.5, 1.0 / n as f64)
    }

    /// Boolean circulant with ones on shifts `0..r`; an r-regular bipartite
    /// adjacency matrix, handy as an exactly-computable "regular" family.
    pub fn circulant_regular(r: usize, n: usize) -> Result<Matrix> {
        if r == 0 || r > n {
            return Err(Error::Domain(format!(
                "circulant_regular needs 1 <= r <= n, got r = {r}, n = {n}"
            )));
        }
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for s in 0..r {
                m.set(i, (i + s) % n, 1.0);
            }
        }
        Ok(m)
    }
}

/// CSV / JSON matrix input.
pub mod io {
    use super::Matrix;
    use crate::{Error, Result};
    use serde::Deserialize;
    use std::path::Path;

    #[derive(Deserialize)]
    struct JsonMatrix {
        n: usize,
        entries: Vec<Vec<f64>>,
    }

    /// Parse a matrix from CSV text: one row per line, comma-separated
    /// decimal entries, dimension inferred.
    pub fn read_csv_str(text: &str) -> Result<Matrix> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect();
            match row {
                Ok(r) => rows.push(r),
                Err(e) => {
                    return Err(Error::Parse(format!("line {}: {e}", lineno + 1)));
                }
            }
        }
        Matrix::from_rows(rows)
    }

    /// Parse a matrix from JSON text of the form
    /// `{"n": 3, "entries": [[...], [...], [...]]}`.
    pub fn read_json_str(text: &str) -> Result<Matrix> {
        let parsed: JsonMatrix =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if parsed.entries.len() != parsed.n {
            return Err(Error::RaggedRows(format!(
                "declared n = {} but {} rows given",
                parsed.n,
                parsed.entries.len()
            )));
        }
        Matrix::from_rows(parsed.entries)
    }

    /// Read a matrix file, dispatching on the `.json` extension
    /// (anything else is treated as CSV).
    pub fn read_file(path: impl AsRef<Path>) -> Result<Matrix> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().map(|e| e == "json").unwrap_or(false) {
            read_json_str(&text)
        } else {
            read_csv_str(&text)
        }
    }

    /// CSV text for a matrix (full f64 precision).
    pub fn to_csv_string(m: &Matrix) -> String {
        let mut out = String::new();
        for i in 0..m.n() {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON text for a matrix in the `{"n": ..., "entries": [[...]]}` form.
    pub fn to_json_string(m: &Matrix) -> String {
        let rows: Vec<Vec<f64>> = (0..m.n()).map(|i| m.row(i).to_vec()).collect();
        serde_json::json!({"n": m.n(), "entries": rows}).to_string()
    }
}
