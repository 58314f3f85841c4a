//! Random models for r-regular bipartite multigraphs and seeded Monte
//! Carlo estimators.
//!
//! Two generators produce matrices in `RI(r, n)` (nonnegative integers,
//! all row and column sums `r`):
//!
//! - the pairing model: a single uniform permutation of length `r·n`, its
//!   permutation matrix cut into `r²` blocks of size `n × n` and summed;
//! - the independent-permutations model: the sum of `r` independent
//!   uniform `n × n` permutation matrices.
//!
//! Estimators fan out over a fixed number of batches, each with its own
//! counter-derived RNG stream, and reduce in batch order, so results are
//! bit-identical for a given seed regardless of thread count.

use crate::exact::{permanent_ryser, subperm_sum_dp, RYSER_CAP, SUBPERM_CAP};
use crate::{Error, Matrix, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which random model to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// Pairing model (single permutation of length `r·n`).
    Bm,
    /// Sum of `r` independent permutation matrices.
    Hw,
}

/// A seeded Monte Carlo estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub samples: usize,
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(samples)`.
    pub std_error: f64,
    /// Whether `mean` is a log-domain quantity.
    pub log_domain: bool,
    pub seed: u64,
}

impl McEstimate {
    fn from_values(values: &[f64], seed: u64, log_domain: bool) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        McEstimate {
            samples: n,
            mean,
            std_error: (var / n as f64).sqrt(),
            log_domain,
            seed,
        }
    }
}

/// Uniform permutation of `0..len` (Fisher-Yates via `shuffle`).
fn random_permutation(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(rng);
    perm
}

/// One pairing-model draw from `RI(r, n)`.
pub fn sample_bm(r: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    assert!(r >= 1 && n >= 1);
    let perm = random_permutation(r * n, rng);
    let mut m = Matrix::zeros(n);
    for (p, &q) in perm.iter().enumerate() {
        let i = p % n;
        let j = q % n;
        m.set(i, j, m.get(i, j) + 1.0);
    }
    m
}

/// One independent-permutations draw from `RI(r, n)`.
pub fn sample_hw(r: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    assert!(r >= 1 && n >= 1);
    let mut m = Matrix::zeros(n);
    for _ in 0..r {
        let perm = random_permutation(n, rng);
        for (i, &j) in perm.iter().enumerate() {
            m.set(i, j, m.get(i, j) + 1.0);
        }
    }
    m
}

/// Pairing-model draw conditioned on being boolean (in `RB(r, n)`), by
/// plain rejection. The acceptance rate decays like `exp(-(r-1)²/2)`, so
/// this is only viable for small `r`.
pub fn sample_cbm(r: usize, n: usize, rng: &mut ChaCha8Rng, max_rejects: usize) -> Result<Matrix> {
    for _ in 0..=max_rejects {
        let m = sample_bm(r, n, rng);
        if m.is_boolean() {
            return Ok(m);
        }
    }
    Err(Error::RejectionBudgetExceeded {
        budget: max_rejects,
    })
}

fn draw(model: Model, r: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    match model {
        Model::Bm => sample_bm(r, n, rng),
        Model::Hw => sample_hw(r, n, rng),
    }
}

/// Deterministic parallel Monte Carlo: `samples` draws split into
/// counter-seeded batches, mapped with `f`, reduced in batch order.
fn parallel_mc(
    model: Model,
    r: usize,
    n: usize,
    samples: usize,
    seed: u64,
    f: impl Fn(&Matrix) -> f64 + Sync,
) -> Vec<f64> {
    const BATCH: usize = 256;
    let batches = samples.div_ceil(BATCH);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let count = BATCH.min(samples - b * BATCH);
            (0..count)
                .map(|_| f(&draw(model, r, n, &mut rng)))
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Monte Carlo mean of `per` over model draws (linear-domain mean; the
/// permanent distribution is heavy-tailed, so the standard error matters).
pub fn estimate_expected_perm(
    model: Model,
    r: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n > SUBPERM_CAP.min(RYSER_CAP) {
        return Err(Error::TooLarge {
            what: "estimate_expected_perm",
            n,
            cap: SUBPERM_CAP,
        });
    }
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let values = parallel_mc(model, r, n, samples, seed, |m| {
        permanent_ryser(m).expect("n checked above").value()
    });
    Ok(McEstimate::from_values(&values, seed, false))
}

/// Fraction of draws that land in `RB(r, n)` (no multi-edges).
pub fn estimate_prob_boolean(
    model: Model,
    r: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let values = parallel_mc(model, r, n, samples, seed, |m| {
        if m.is_boolean() {
            1.0
        } else {
            0.0
        }
    });
    Ok(McEstimate::from_values(&values, seed, false))
}

/// Monte Carlo mean of `per_m` over model draws.
pub fn estimate_expected_subperm(
    model: Model,
    r: usize,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n > 20 {
        return Err(Error::TooLarge {
            what: "estimate_expected_subperm",
            n,
            cap: 20,
        });
    }
    if m > n {
        return Err(Error::Domain(format!("m = {m} exceeds n = {n}")));
    }
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let values = parallel_mc(model, r, n, samples, seed, |mat| {
        subperm_sum_dp(mat, m).expect("n checked above")
    });
    Ok(McEstimate::from_values(&values, seed, false))
}

/// Per-sample values (for raw CSV dumps); same stream discipline as the
/// estimators.
pub fn sample_values(
    model: Model,
    r: usize,
    n: usize,
    samples: usize,
    seed: u64,
    f: impl Fn(&Matrix) -> f64 + Sync,
) -> Vec<f64> {
    parallel_mc(model, r, n, samples, seed, f)
}

/// Exhaustively enumerate `RI(r, n)`, nonnegative integer matrices with
/// every row and column sum equal to `r`. Errors out once more than `cap`
/// matrices exist.
pub fn enumerate_ri(r: usize, n: usize, cap: usize) -> Result<Vec<Matrix>> {
    let mut out = Vec::new();
    let mut col_rem = vec![r as i64; n];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    enumerate_rows(r, n, cap, &mut col_rem, &mut rows, &mut out)?;
    Ok(out)
}

fn enumerate_rows(
    r: usize,
    n: usize,
    cap: usize,
    col_rem: &mut Vec<i64>,
    rows: &mut Vec<Vec<f64>>,
    out: &mut Vec<Matrix>,
) -> Result<()> {
    if rows.len() == n {
        debug_assert!(col_rem.iter().all(|&c| c == 0));
        if out.len() >= cap {
            return Err(Error::CapExceeded { cap });
        }
        out.push(Matrix::from_rows(rows.clone())?);
        return Ok(());
    }
    let remaining_rows = (n - rows.len()) as i64;
    // Feasibility: each leftover column demand must fit in the rows left.
    if col_rem.iter().any(|&c| c > remaining_rows * r as i64) {
        return Ok(());
    }
    let mut row = vec![0i64; n];
    enumerate_cells(r as i64, 0, r, n, cap, &mut row, col_rem, rows, out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_cells(
    left: i64,
    col: usize,
    r: usize,
    n: usize,
    cap: usize,
    row: &mut Vec<i64>,
    col_rem: &mut Vec<i64>,
    rows: &mut Vec<Vec<f64>>,
    out: &mut Vec<Matrix>,
) -> Result<()> {
    if col == n {
        if left != 0 {
            return Ok(());
        }
        rows.push(row.iter().map(|&v| v as f64).collect());
        let res = enumerate_rows(r, n, cap, col_rem, rows, out);
        rows.pop();
        return res;
    }
    // Entries after this column can absorb at most the sum of their
    // remaining column capacity.
    let tail_capacity: i64 = col_rem[col + 1..].iter().map(|&c| c.min(r as i64)).sum();
    let lo = (left - tail_capacity).max(0);
    let hi = left.min(col_rem[col]);
    for v in lo..=hi {
        row[col] = v;
        col_rem[col] -= v;
        enumerate_cells(left - v, col + 1, r, n, cap, row, col_rem, rows, out)?;
        col_rem[col] += v;
    }
    row[col] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn in_ri(m: &Matrix, r: usize) -> bool {
        let rf = r as f64;
        m.entries().iter().all(|&v| v >= 0.0 && v.fract() == 0.0)
            && m.row_sums().iter().all(|&s| (s - rf).abs() < 1e-12)
            && m.col_sums().iter().all(|&s| (s - rf).abs() < 1e-12)
    }

    #[test]
    fn samplers_land_in_ri() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (r, n) in [(1usize, 4usize), (2, 5), (3, 6)] {
            for _ in 0..50 {
                assert!(in_ri(&sample_bm(r, n, &mut rng), r));
                assert!(in_ri(&sample_hw(r, n, &mut rng), r));
            }
        }
    }

    #[test]
    fn r1_draws_are_permutation_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let m = sample_bm(1, 5, &mut rng);
            assert!(m.is_boolean() && in_ri(&m, 1));
            let m = sample_hw(1, 5, &mut rng);
            assert!(m.is_boolean() && in_ri(&m, 1));
        }
    }

    #[test]
    fn hw_entries_can_exceed_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen_multi = false;
        for _ in 0..200 {
            let m = sample_hw(2, 4, &mut rng);
            if m.entries().iter().any(|&v| v > 1.0) {
                seen_multi = true;
                break;
            }
        }
        assert!(seen_multi, "multi-edges must occur for r >= 2");
    }

    #[test]
    fn bm_entries_bounded_by_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let m = sample_bm(3, 4, &mut rng);
            assert!(m.entries().iter().all(|&v| v <= 3.0));
        }
    }

    #[test]
    fn cbm_outputs_boolean_regular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = sample_cbm(2, 6, &mut rng, 10_000).unwrap();
            assert!(m.is_boolean() && in_ri(&m, 2));
        }
        // r = 1 never rejects.
        let m = sample_cbm(1, 5, &mut rng, 0).unwrap();
        assert!(m.is_boolean());
    }

    #[test]
    fn estimates_are_seed_reproducible() {
        let a = estimate_expected_perm(Model::Bm, 2, 6, 500, 42).unwrap();
        let b = estimate_expected_perm(Model::Bm, 2, 6, 500, 42).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = estimate_expected_perm(Model::Bm, 2, 6, 500, 43).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn r1_permanent_is_exactly_one() {
        let e = estimate_expected_perm(Model::Hw, 1, 6, 100, 0).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn subperm_estimator_deterministic_orders() {
        // m = 0 is exactly 1; m = 1 is exactly r·n (entry sum is fixed).
        let e0 = estimate_expected_subperm(Model::Bm, 2, 5, 0, 50, 7).unwrap();
        assert_eq!(e0.mean, 1.0);
        let e1 = estimate_expected_subperm(Model::Hw, 2, 5, 1, 50, 7).unwrap();
        assert!((e1.mean - 10.0).abs() < 1e-12);
        assert!(e1.std_error < 1e-12);
    }

    #[test]
    fn enumerate_ri_small_counts() {
        // r = 1: the n! permutation matrices.
        let perms = enumerate_ri(1, 3, 100).unwrap();
        assert_eq!(perms.len(), 6);
        // r = 2, n = 2: three matrices.
        let list = enumerate_ri(2, 2, 100).unwrap();
        assert_eq!(list.len(), 3);
        for m in &list {
            assert!(in_ri(m, 2));
        }
        // Known counts for row/column sum 2: n = 3 gives 21, n = 4 gives 282.
        assert_eq!(enumerate_ri(2, 3, 1000).unwrap().len(), 21);
        assert_eq!(enumerate_ri(2, 4, 1000).unwrap().len(), 282);
        // r = 3, n = 3: 55 matrices.
        assert_eq!(enumerate_ri(3, 3, 1000).unwrap().len(), 55);
        assert!(matches!(
            enumerate_ri(2, 4, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn bm_and_hw_agree_for_r1() {
        // Both reduce to a uniform permutation; chi-square on n = 4
        // permutation frequencies over 10^5 draws.
        let n = 4;
        let samples = 100_000;
        let mut counts_bm: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut counts_hw: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..samples {
            let key = |m: &Matrix| -> Vec<usize> {
                (0..n)
                    .map(|i| (0..n).find(|&j| m.get(i, j) > 0.5).unwrap())
                    .collect()
            };
            *counts_bm
                .entry(key(&sample_bm(1, n, &mut rng)))
                .or_default() += 1;
            *counts_hw
                .entry(key(&sample_hw(1, n, &mut rng)))
                .or_default() += 1;
        }
        let expected = samples as f64 / 24.0;
        for counts in [&counts_bm, &counts_hw] {
            assert_eq!(counts.len(), 24);
            let chi2: f64 = counts
                .values()
                .map(|&c| {
                    let d = c as f64 - expected;
                    d * d / expected
                })
                .sum();
            // 23 dof: p > 0.001 corresponds to chi2 < 49.7.
            assert!(chi2 < 49.7, "chi2 = {chi2}");
        }
    }

    #[test]
    fn bordered_samples_are_doubly_stochastic() {
        use crate::matrix::families;
        // [[aA, bJ], [bJ^T, 0]] with a = (m/n)/r, b = 1/n is doubly
        // stochastic for every matrix with constant row/column sums r,
        // multi-edges included.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (r, n) in [(2usize, 5usize), (3, 6)] {
            for _ in 0..10 {
                let a_mat = sample_bm(r, n, &mut rng);
                for m in 1..=n {
                    let t = m as f64 / n as f64;
                    let k = families::bordered(&a_mat, m, t / r as f64, 1.0 / n as f64).unwrap();
                    assert!(k.is_doubly_stochastic(1e-12), "r={r} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn boolean_acceptance_approaches_its_limit() {
        // The pairing model's boolean probability climbs toward e^{-1/2}
        // from below as n grows (measured: 0.588, 0.599, 0.604).
        let target = (-0.5f64).exp();
        let probs: Vec<f64> = [10usize, 20, 40]
            .iter()
            .map(|&n| {
                estimate_prob_boolean(Model::Bm, 2, n, 100_000, 0)
                    .unwrap()
                    .mean
            })
            .collect();
        assert!(probs[0] < probs[1] && probs[1] < probs[2], "{probs:?}");
        let se = 0.0016; // Bernoulli SE at 1e5 samples
        assert!(probs[2] < target + 3.0 * se);
        assert!((probs[2] - target).abs() < (probs[0] - target).abs());
    }

    #[test]
    fn subperm_mean_converges_to_entropy_curve() {
        // ln(E per_{n/2})/n approaches g_2(1/2) = 0.9548 from below;
        // measured gaps 0.138 (n=8), 0.108 (n=12), 0.090 (n=16).
        let g = crate::curves::g_curve(2, 0.5).unwrap();
        let gaps: Vec<f64> = [(8usize, 1000usize), (12, 500), (16, 200)]
            .iter()
            .map(|&(n, samples)| {
                let est = estimate_expected_subperm(Model::Bm, 2, n, n / 2, samples, 0).unwrap();
                (est.mean.ln() / n as f64 - g).abs()
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 0.1, "gap at n=16 is {}", gaps[2]);
    }
}
