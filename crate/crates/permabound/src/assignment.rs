//! Exact linear assignment with forbidden cells.
//!
//! The vertices of the Birkhoff polytope are permutation matrices, so the
//! linear minimization oracle used by Frank-Wolfe is an assignment
//! problem. Solved with shortest augmenting paths (Jonker-Volgenant
//! style, O(n³)); forbidden cells are skipped outright, so infeasibility
//! is detected exactly rather than through big-M costs.
//!
//! Ties are broken deterministically: after solving, the optimal dual
//! potentials identify the tight subgraph, and the lexicographically
//! smallest perfect matching inside it is returned.

use crate::matrix::max_bipartite_matching;
use crate::{Error, Result};

/// Minimize `Σ_i cost(i, π(i))` over permutations avoiding forbidden
/// cells. `cost` is row-major `n × n`; `allowed[i*n+j] = false` forbids
/// the cell. Returns the lexicographically smallest optimal permutation.
pub fn assignment_solve(n: usize, cost: &[f64], allowed: &[bool]) -> Result<Vec<usize>> {
    assert_eq!(cost.len(), n * n);
    assert_eq!(allowed.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    for (idx, &c) in cost.iter().enumerate() {
        if allowed[idx] && !c.is_finite() {
            return Err(Error::Domain(format!(
                "assignment cost at cell {idx} is not finite"
            )));
        }
    }

    let (u, v, _assignment) = solve_dual(n, cost, allowed)?;

    // Tight subgraph: cells where the reduced cost vanishes (up to float
    // noise). Every optimal permutation lives inside it.
    let scale = cost
        .iter()
        .zip(allowed)
        .filter(|(_, &a)| a)
        .map(|(c, _)| c.abs())
        .fold(1.0f64, f64::max);
    let tie_eps = 1e-9 * scale;
    let mut tight = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if allowed[i * n + j] && cost[i * n + j] - u[i] - v[j] <= tie_eps {
                tight[i * n + j] = true;
            }
        }
    }
    lexicographic_matching(n, &tight).ok_or(Error::Infeasible)
}

/// Shortest-augmenting-path assignment. Returns dual potentials and the
/// column-to-row matching.
fn solve_dual(
    n: usize,
    cost: &[f64],
    allowed: &[bool],
) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    const UNSET: usize = usize::MAX;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    // way[j]: previous column on the alternating path; p[j]: row matched to column j.
    let mut p = vec![UNSET; n + 1];
    let mut way = vec![UNSET; n + 1];

    for i in 0..n {
        // Virtual column n holds the currently unassigned row i.
        p[n] = i;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            // Relax along the current row's allowed cells...
            for j in 0..n {
                if used[j] || !allowed[i0 * n + j] {
                    continue;
                }
                let cur = cost[i0 * n + j] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
            }
            // ...but pick the next column among everything the tree can
            // reach, including columns relaxed by earlier rows.
            let mut delta = f64::INFINITY;
            let mut j1 = UNSET;
            for (j, &mv) in minv.iter().enumerate().take(n) {
                if !used[j] && mv < delta {
                    delta = mv;
                    j1 = j;
                }
            }
            if j1 == UNSET {
                // No reachable column: some row cannot be assigned.
                return Err(Error::Infeasible);
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == UNSET {
                break;
            }
        }
        // Unwind the alternating path.
        while j0 != n {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }
    let matching = p[..n].to_vec();
    Ok((u[..n].to_vec(), v[..n].to_vec(), matching))
}

/// Lexicographically smallest perfect matching inside a boolean mask:
/// fix rows in order, always taking the smallest column that keeps the
/// remainder matchable.
fn lexicographic_matching(n: usize, mask: &[bool]) -> Option<Vec<usize>> {
    if max_bipartite_matching(n, mask) < n {
        return None;
    }
    let mut work = mask.to_vec();
    let mut perm = vec![0usize; n];
    for i in 0..n {
        let mut placed = false;
        for j in 0..n {
            if !work[i * n + j] {
                continue;
            }
            // Tentatively commit (i, j): wipe row i and column j.
            let saved = work.clone();
            for c in 0..n {
                work[i * n + c] = false;
            }
            for r in 0..n {
                work[r * n + j] = false;
            }
            // Remaining rows i+1.. must still match fully. Rows 0..=i are
            // cleared, so a full matching has size n - i - 1.
            if max_bipartite_matching(n, &work) == n - i - 1 {
                perm[i] = j;
                placed = true;
                break;
            }
            work = saved;
        }
        if !placed {
            return None;
        }
    }
    Some(perm)
}
