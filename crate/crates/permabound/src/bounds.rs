//! Entrywise bound functionals, all in natural-log domain.
//!
//! Boundary conventions are fixed globally and documented per function:
//! `0 ln 0 = 0` and `(1-1) ln(1-1) = 0` (the `0^0 = 1` convention), so
//! every functional is continuous up to the boundary of its domain.

use crate::curves::log_g;
use crate::numeric::{ln_factorial, xlnx};
use crate::{Error, Matrix, Result};

/// Slack allowed when requiring entries in `[0, 1]`.
const ENTRY_TOL: f64 = 1e-7;

fn require_substochastic_entries(m: &Matrix) -> Result<()> {
    for i in 0..m.n() {
        for j in 0..m.n() {
            let v = m.get(i, j);
            if v > 1.0 + ENTRY_TOL {
                return Err(Error::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

#[inline]
fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `ln F(P) = Σ (1 - P(i,j)) ln(1 - P(i,j))`.
///
/// For doubly stochastic `P` this is an explicit lower bound on `ln per(P)`
/// that depends on the entries, not just the support. Entries at 1
/// contribute 0 by the `0^0` convention.
pub fn log_f(p: &Matrix) -> Result<f64> {
    require_substochastic_entries(p)?;
    let mut total = 0.0;
    for &v in p.entries() {
        total += xlnx(1.0 - clamp01(v));
    }
    Ok(total)
}

/// The Bethe functional
/// `Σ (1 - Q(i,j)) ln(1 - Q(i,j)) - Σ Q(i,j) ln(Q(i,j) / P(i,j))`.
///
/// Finite whenever `supp(Q) ⊆ supp(P)`; `-inf` otherwise (the KL term
/// blows up). Its maximum over doubly stochastic `Q` lower-bounds
/// `ln per(P)`, and at `Q = P` (doubly stochastic) it collapses to
/// [`log_f`].
pub fn bethe_value(p: &Matrix, q: &Matrix) -> Result<f64> {
    if p.n() != q.n() {
        return Err(Error::BadDimensions(format!(
            "bethe_value: {} vs {}",
            p.n(),
            q.n()
        )));
    }
    require_substochastic_entries(q)?;
    let mut total = 0.0;
    for i in 0..p.n() {
        for j in 0..p.n() {
            let qv = clamp01(q.get(i, j));
            if qv == 0.0 {
                continue; // both terms vanish
            }
            let pv = p.get(i, j);
            if pv == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += xlnx(1.0 - qv) - qv * (qv / pv).ln();
        }
    }
    Ok(total)
}

/// Entrywise partial derivatives of the Bethe functional in `Q`:
/// `-2 - ln(1 - Q(i,j)) - ln Q(i,j) + ln P(i,j)` on `supp(P)`.
///
/// Cells off `supp(P)` are flagged unusable with `NaN`. The derivative is
/// unbounded where `Q` touches {0, 1} on the support, which is an error.
pub fn bethe_gradient(p: &Matrix, q: &Matrix) -> Result<Vec<f64>> {
    if p.n() != q.n() {
        return Err(Error::BadDimensions(format!(
            "bethe_gradient: {} vs {}",
            p.n(),
            q.n()
        )));
    }
    let n = p.n();
    let mut grad = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in 0..n {
            let pv = p.get(i, j);
            if pv == 0.0 {
                continue;
            }
            let qv = q.get(i, j);
            if qv <= 0.0 || qv >= 1.0 {
                return Err(Error::BoundaryPoint {
                    row: i,
                    col: j,
                    value: qv,
                });
            }
            grad[i * n + j] = -2.0 - (1.0 - qv).ln() - qv.ln() + pv.ln();
        }
    }
    Ok(grad)
}

/// Entrywise `A(i,j) (1 - A(i,j))`, the matrix whose permanent dominates
/// `Π (1 - A(i,j))` for doubly stochastic `A` (Schrijver's inequality).
pub fn schrijver_tilde(a: &Matrix) -> Result<Matrix> {
    require_substochastic_entries(a)?;
    Ok(a.map(|v| {
        let v = clamp01(v);
        v * (1.0 - v)
    }))
}

/// `ln Π (1 - A(i,j))`: the right-hand side of Schrijver's inequality,
/// `-inf` if some entry is 1.
pub fn log_complement_product(a: &Matrix) -> Result<f64> {
    require_substochastic_entries(a)?;
    let mut total = 0.0;
    for &v in a.entries() {
        let c = 1.0 - clamp01(v);
        if c == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += c.ln();
    }
    Ok(total)
}

/// Column product `ln CPR_j(P) = Σ_i (1 - P(i,j)) ln(1 - P(i,j))`
/// (0-based column index).
pub fn log_cpr(p: &Matrix, col: usize) -> Result<f64> {
    require_substochastic_entries(p)?;
    if col >= p.n() {
        return Err(Error::Domain(format!("column {col} out of range")));
    }
    let mut total = 0.0;
    for i in 0..p.n() {
        total += xlnx(1.0 - clamp01(p.get(i, col)));
    }
    Ok(total)
}

/// `Σ_j ln CPR_j(P) = ln F(P)`: the product of all column bounds.
pub fn log_cpr_product(p: &Matrix) -> Result<f64> {
    log_f(p)
}

/// `ln Π_j G(min(j, C_j))` where `C_j` counts nonzeros in column `j` and
/// `j` runs 1-based in ascending order; a support-sensitive lower bound on
/// `ln per` of a doubly stochastic matrix.
pub fn log_gurvits_bound(p: &Matrix) -> Result<f64> {
    require_substochastic_entries(p)?;
    let n = p.n();
    let mut total = 0.0;
    for j in 0..n {
        let nonzeros = (0..n).filter(|&i| p.get(i, j) > 0.0).count();
        if nonzeros == 0 {
            return Ok(f64::NEG_INFINITY); // zero column: per = 0
        }
        let x = nonzeros.min(j + 1);
        total += log_g(x as f64)?;
    }
    Ok(total)
}

/// Bregman's upper bound `ln Π (r_i!)^{1/r_i}` for a 0/1 matrix with row
/// sums `r_i >= 1`.
pub fn log_bregman_upper(a: &Matrix) -> Result<f64> {
    let n = a.n();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            if v != 0.0 && v != 1.0 {
                return Err(Error::NotBoolean {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let mut total = 0.0;
    for i in 0..n {
        let r: f64 = a.row(i).iter().sum();
        if r < 1.0 {
            return Err(Error::Domain(format!(
                "log_bregman_upper: row {i} is empty (permanent is 0)"
            )));
        }
        total += ln_factorial(r as u64) / r;
    }
    Ok(total)
}

/// Which reading of the row-wise Hölder upper bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderVariant {
    /// `(A(i,i)² + (Σ_{j≠i} A(i,j))²)^{1/2}`: the reading that yields the
    /// `√2` factor on diagonally dominant matrices.
    RowSumSquared,
    /// `(A(i,i)² + Σ_{j≠i} A(i,j)²)^{1/2}`: the sum-of-squares variant,
    /// exposed for comparison (not an upper bound in general).
    SumOfSquares,
}

/// Row-wise Hölder upper bound
/// `ln Π_i (A(i,i)² + (Σ_{j≠i} A(i,j))²)^{1/2}` for nonnegative `A`.
///
/// On diagonally dominant matrices each factor is at most `√2 · A(i,i)`,
/// which is where the `√2` approximation factor comes from.
pub fn log_holder_upper(a: &Matrix, variant: HolderVariant) -> Result<f64> {
    let n = a.n();
    let mut total = 0.0;
    for i in 0..n {
        let diag = a.get(i, i);
        let off = match variant {
            HolderVariant::RowSumSquared => {
                let s: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j)).sum();
                s * s
            }
            HolderVariant::SumOfSquares => (0..n)
                .filter(|&j| j != i)
                .map(|j| a.get(i, j) * a.get(i, j))
                .sum(),
        };
        let factor = (diag * diag + off).sqrt();
        if factor == 0.0 {
            return Ok(f64::NEG_INFINITY); // zero row
        }
        total += factor.ln();
    }
    Ok(total)
}

/// Per-cell no-collision weight
/// `W(i,j) = A(i,j) Π_{k≠i} (1 - A(k,j))`: the probability that row i
/// picks column j and no other row collides there.
fn no_collision_weights(a: &Matrix) -> Result<Vec<f64>> {
    require_substochastic_entries(a)?;
    let n = a.n();
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let aij = clamp01(a.get(i, j));
            if aij == 0.0 {
                continue;
            }
            let mut prod = aij;
            for k in 0..n {
                if k != i {
                    prod *= 1.0 - clamp01(a.get(k, j));
                }
            }
            w[i * n + j] = prod;
        }
    }
    Ok(w)
}

/// `ln LMS(A) = Σ_i ln Σ_j A(i,j) Π_{k≠i} (1 - A(k,j))`: the product of
/// per-row no-collision probabilities. Equals `ln F(A)` when `A` is
/// `1/r` times a 0/1 matrix with constant row and column sums.
pub fn log_lms(a: &Matrix) -> Result<f64> {
    let n = a.n();
    let w = no_collision_weights(a)?;
    let mut total = 0.0;
    for i in 0..n {
        let row_sum: f64 = (0..n).map(|j| w[i * n + j]).sum();
        if row_sum <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += row_sum.ln();
    }
    Ok(total)
}

/// `ln SD(A) = Σ_j ln Σ_i A(i,j) Π_{k≠i} (1 - A(k,j))`: the column
/// transpose of [`log_lms`]; each factor is `q_(j)` evaluated at the
/// all-ones point.
pub fn log_sd(a: &Matrix) -> Result<f64> {
    let n = a.n();
    let w = no_collision_weights(a)?;
    let mut total = 0.0;
    for j in 0..n {
        let col_sum: f64 = (0..n).map(|i| w[i * n + j]).sum();
        if col_sum <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        total += col_sum.ln();
    }
    Ok(total)
}

/// Lower bound on `ln per_m(P)` for doubly stochastic `P`:
///
/// `per_m(P) >= Π (1 - tP(i,j))^{1 - tP(i,j)} · G(n)^{2(n-m)}
///              / ( t^m n^{-2(n-m)} ((n-m)!)² )`,  `t = m/n`.
///
/// At `m = n` this collapses to `F(P)`.
pub fn log_subperm_lower_ds(p: &Matrix, m: usize) -> Result<f64> {
    let n = p.n();
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "log_subperm_lower_ds needs 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    require_substochastic_entries(p)?;
    let nf = n as f64;
    let t = m as f64 / nf;
    let q = (n - m) as u64;
    let mut entry_term = 0.0;
    for &v in p.entries() {
        entry_term += xlnx(1.0 - t * clamp01(v));
    }
    let g_term = 2.0 * q as f64 * log_g(nf)?;
    let log_denom = m as f64 * t.ln() - 2.0 * q as f64 * nf.ln() + 2.0 * ln_factorial(q);
    Ok(entry_term + g_term - log_denom)
}
