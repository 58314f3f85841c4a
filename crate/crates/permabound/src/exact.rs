//! Exact permanents and m-subpermanent sums, the ground-truth oracles for
//! every inequality in the crate, plus closed forms for special families.

use crate::matrix::families;
use crate::numeric::{ln_factorial, logsumexp, KahanSum, LogValue};
use crate::{Error, Matrix, Result};

/// Cap for the Ryser inclusion-exclusion (cost `2^n · n`).
pub const RYSER_CAP: usize = 30;
/// Cap for brute-force permutation enumeration.
pub const BRUTE_CAP: usize = 9;
/// Cap for the subset-DP subpermanent pass (cost `n^2 · 2^(n-1)`).
pub const SUBPERM_CAP: usize = 22;
/// Cap for the brute-force subpermanent enumeration.
pub const SUBPERM_BRUTE_CAP: usize = 7;

/// The vector `(per_0, per_1, ..., per_n)` of m-subpermanent sums:
/// `per_m(A) = Σ_{|S|=|T|=m} per(A_{S,T})`, the weighted count of
/// m-matchings in the bipartite graph of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubpermVector {
    pub n: usize,
    pub values: Vec<f64>,
}

impl SubpermVector {
    pub fn per_m(&self, m: usize) -> f64 {
        self.values[m]
    }
}

/// Exact permanent by Ryser's inclusion-exclusion with Gray-code column
/// updates and compensated summation, `O(2^n · n)`.
///
/// Partial sums alternate in sign and can cancel heavily, so the
/// accumulator is Kahan-compensated; results that round to `<= 0` are
/// reported as exact zero.
pub fn permanent_ryser(m: &Matrix) -> Result<LogValue> {
    let n = m.n();
    if n > RYSER_CAP {
        return Err(Error::TooLarge {
            what: "permanent_ryser",
            n,
            cap: RYSER_CAP,
        });
    }
    if n == 1 {
        return Ok(LogValue::from_value(m.get(0, 0)));
    }
    let mut row_sums = vec![0.0f64; n];
    let mut acc = KahanSum::default();
    let mut gray_prev: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let flipped = gray ^ gray_prev;
        let j = flipped.trailing_zeros() as usize;
        if gray & flipped != 0 {
            // Column j entered the subset.
            for i in 0..n {
                row_sums[i] += m.get(i, j);
            }
        } else {
            for i in 0..n {
                row_sums[i] -= m.get(i, j);
            }
        }
        gray_prev = gray;
        let mut prod = 1.0f64;
        for &s in &row_sums {
            prod *= s;
        }
        // Sign (-1)^{n - |S|}.
        let popcount = gray.count_ones() as usize;
        if (n - popcount).is_multiple_of(2) {
            acc.add(prod);
        } else {
            acc.add(-prod);
        }
    }
    Ok(LogValue::from_value(acc.value()))
}

/// Exact permanent by summation over all `n!` permutations; the
/// independent oracle for [`permanent_ryser`].
pub fn permanent_brute(m: &Matrix) -> Result<f64> {
    let n = m.n();
    if n > BRUTE_CAP {
        return Err(Error::TooLarge {
            what: "permanent_brute",
            n,
            cap: BRUTE_CAP,
        });
    }
    let mut used = vec![false; n];
    Ok(brute_rec(m, 0, &mut used, 1.0))
}

fn brute_rec(m: &Matrix, row: usize, used: &mut [bool], partial: f64) -> f64 {
    let n = m.n();
    if row == n {
        return partial;
    }
    if partial == 0.0 {
        // Every extension multiplies by something; prune.
        return 0.0;
    }
    let mut total = 0.0;
    for col in 0..n {
        if !used[col] {
            used[col] = true;
            total += brute_rec(m, row + 1, used, partial * m.get(row, col));
            used[col] = false;
        }
    }
    total
}

/// All m-subpermanent sums in one row-by-row pass over column subsets.
///
/// State `f[U]` is the total weight of partial matchings that use exactly
/// the column set `U`; each row is either skipped or matched to an unused
/// column. `O(n^2 · 2^(n-1))` time, one `f64` per subset.
pub fn subperm_vector(m: &Matrix) -> Result<SubpermVector> {
    let n = m.n();
    if n > SUBPERM_CAP {
        return Err(Error::TooLarge {
            what: "subperm_vector",
            n,
            cap: SUBPERM_CAP,
        });
    }
    let size = 1usize << n;
    let mut f = vec![0.0f64; size];
    f[0] = 1.0;
    for i in 0..n {
        let row = m.row(i);
        // Descending order keeps f[U \ {j}] un-updated while U is processed.
        for u in (1..size).rev() {
            let mut add = 0.0;
            let mut bits = u;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let w = row[j];
                if w != 0.0 {
                    add += f[u & !(1 << j)] * w;
                }
            }
            f[u] += add;
        }
    }
    let mut values = vec![0.0f64; n + 1];
    for (u, &w) in f.iter().enumerate() {
        values[u.count_ones() as usize] += w;
    }
    Ok(SubpermVector { n, values })
}

/// `per_m(A)` via the subset DP.
pub fn subperm_sum_dp(m: &Matrix, order: usize) -> Result<f64> {
    let n = m.n();
    if order > n {
        return Err(Error::Domain(format!(
            "subperm order {order} exceeds n = {n}"
        )));
    }
    Ok(subperm_vector(m)?.values[order])
}

/// `per_m(A)` by explicit enumeration over all `(S, T)` subset pairs with
/// a brute-force permanent on each; oracle for [`subperm_sum_dp`].
pub fn subperm_brute(m: &Matrix, order: usize) -> Result<f64> {
    let n = m.n();
    if n > SUBPERM_BRUTE_CAP {
        return Err(Error::TooLarge {
            what: "subperm_brute",
            n,
            cap: SUBPERM_BRUTE_CAP,
        });
    }
    if order > n {
        return Err(Error::Domain(format!(
            "subperm order {order} exceeds n = {n}"
        )));
    }
    if order == 0 {
        return Ok(1.0);
    }
    let subsets: Vec<Vec<usize>> = (0..(1usize << n))
        .filter(|u| u.count_ones() as usize == order)
        .map(|u| (0..n).filter(|j| u & (1 << j) != 0).collect())
        .collect();
    let mut total = 0.0;
    for rows in &subsets {
        for cols in &subsets {
            let sub = Matrix::from_rows(
                rows.iter()
                    .map(|&i| cols.iter().map(|&j| m.get(i, j)).collect())
                    .collect(),
            )?;
            total += permanent_brute(&sub)?;
        }
    }
    Ok(total)
}

/// `per_m(A)` computed through the bordered matrix:
/// `per_m(A) = per(K) / (a^m · b^{2(n-m)} · ((n-m)!)^2)` with
/// `K = [[aA, bJ], [bJ^T, 0]]`. The identity holds for every `a, b > 0`.
pub fn perm_via_border_identity(a_mat: &Matrix, m: usize, a: f64, b: f64) -> Result<f64> {
    let n = a_mat.n();
    if m > n {
        return Err(Error::BadDimensions(format!(
            "border identity: m = {m} > n = {n}"
        )));
    }
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain("border identity needs a, b > 0".into()));
    }
    let size = 2 * n - m;
    if size > SUBPERM_CAP {
        return Err(Error::TooLarge {
            what: "perm_via_border_identity",
            n: size,
            cap: SUBPERM_CAP,
        });
    }
    let k = families::bordered(a_mat, m, a, b)?;
    let per_k = permanent_ryser(&k)?;
    let q = (n - m) as u64;
    let log_denom = m as f64 * a.ln() + 2.0 * q as f64 * b.ln() + 2.0 * ln_factorial(q);
    if per_k.is_zero {
        return Ok(0.0);
    }
    Ok((per_k.ln() - log_denom).exp())
}

/// Closed-form `per(a·J_n + b·I_n) = n! a^n Σ_{i=0..n} (b/a)^i / i!`,
/// evaluated stably in log domain (fine for n in the thousands).
pub fn permanent_aj_plus_bi(n: usize, a: f64, b: f64) -> Result<LogValue> {
    if n == 0 || a <= 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "permanent_aj_plus_bi needs n >= 1, a > 0, b >= 0 (got n={n}, a={a}, b={b})"
        )));
    }
    if b == 0.0 {
        return Ok(LogValue::from_ln(
            ln_factorial(n as u64) + n as f64 * a.ln(),
        ));
    }
    let log_ratio = b.ln() - a.ln();
    let terms: Vec<f64> = (0..=n)
        .map(|i| i as f64 * log_ratio - ln_factorial(i as u64))
        .collect();
    Ok(LogValue::from_ln(
        ln_factorial(n as u64) + n as f64 * a.ln() + logsumexp(&terms),
    ))
}

/// `ln per` of the LMS counterexample family:
/// `per(K_n) = n!/n^n · 2^{-n/2}` for even n.
pub fn log_perm_counterexample(n: usize) -> Result<LogValue> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddN(n));
    }
    let nf = n as f64;
    Ok(LogValue::from_ln(
        ln_factorial(n as u64) - nf * nf.ln() - 0.5 * nf * 2f64.ln(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_rows(
            (0..n)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ryser_identity_and_uniform() {
        let per = permanent_ryser(&Matrix::identity(4)).unwrap();
        assert!((per.value() - 1.0).abs() < 1e-12);
        // per((1/3) J_3) = 3!/3^3 = 2/9.
        let per = permanent_ryser(&Matrix::uniform(3)).unwrap();
        assert!((per.value() - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn ryser_2x2_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(2, &mut rng);
            let expect = m.get(0, 0) * m.get(1, 1) + m.get(0, 1) * m.get(1, 0);
            assert!((permanent_ryser(&m).unwrap().value() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn ryser_agrees_with_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=7 {
            for _ in 0..10 {
                let m = random_matrix(n, &mut rng);
                let r = permanent_ryser(&m).unwrap().value();
                let b = permanent_brute(&m).unwrap();
                assert!(
                    (r - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "n = {n}: ryser {r} vs brute {b}"
                );
            }
        }
    }

    #[test]
    fn ryser_zero_permanent() {
        let m = Matrix::from_rows(vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(permanent_ryser(&m).unwrap().is_zero);
    }

    #[test]
    fn brute_small_cases() {
        assert!((permanent_brute(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let half = Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((permanent_brute(&half).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn subperm_frozen_values() {
        // per_0 = 1 always; I_3 at m = 2 counts the three S = T pairs;
        // J_3 at m = 2: C(3,2)^2 submatrices each with permanent 2.
        let id3 = Matrix::identity(3);
        assert_eq!(subperm_sum_dp(&id3, 0).unwrap(), 1.0);
        assert!((subperm_sum_dp(&id3, 2).unwrap() - 3.0).abs() < 1e-13);
        let j3 = Matrix::from_rows(vec![vec![1.0; 3]; 3]).unwrap();
        assert!((subperm_sum_dp(&j3, 2).unwrap() - 18.0).abs() < 1e-12);
        // Brute counterparts on trivial 2x2 cases.
        assert!((subperm_brute(&Matrix::identity(2), 1).unwrap() - 2.0).abs() < 1e-15);
        let j2 = Matrix::from_rows(vec![vec![1.0; 2]; 2]).unwrap();
        assert!((subperm_brute(&j2, 1).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn subperm_vector_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let m = random_matrix(n, &mut rng);
            let v = subperm_vector(&m).unwrap();
            assert_eq!(v.values[0], 1.0);
            let total = m.total();
            assert!((v.values[1] - total).abs() < 1e-12 * total.max(1.0));
            let per = permanent_brute(&m).unwrap();
            assert!((v.values[n] - per).abs() < 1e-11 * per.abs().max(1.0));
        }
    }

    #[test]
    fn subperm_dp_vs_brute_vs_border_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = random_matrix(4, &mut rng);
            for order in 0..=4usize {
                let dp = subperm_sum_dp(&m, order).unwrap();
                let br = subperm_brute(&m, order).unwrap();
                assert!((dp - br).abs() <= 1e-11 * br.abs().max(1.0));
                if order >= 1 {
                    let a = 0.25 + 0.75 * rng.random::<f64>();
                    let b = 0.25 + 0.75 * rng.random::<f64>();
                    let k = perm_via_border_identity(&m, order, a, b).unwrap();
                    assert!(
                        (k - br).abs() <= 1e-9 * br.abs().max(1.0),
                        "order {order}: border {k} vs brute {br}"
                    );
                }
            }
        }
    }

    #[test]
    fn border_identity_frozen_examples() {
        let i3 = Matrix::identity(3);
        let v = perm_via_border_identity(&i3, 2, 1.0, 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-10);
        let j2 = Matrix::from_rows(vec![vec![1.0; 2]; 2]).unwrap();
        let v = perm_via_border_identity(&j2, 1, 0.5, 0.5).unwrap();
        assert!((v - 4.0).abs() < 1e-10);
        // m = n: no border rows, identity reduces to a^{-n} per(aA).
        let v = perm_via_border_identity(&j2, 2, 0.5, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn aj_plus_bi_closed_form_vs_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=6 {
            for _ in 0..5 {
                let a = 0.1 + rng.random::<f64>();
                let b = rng.random::<f64>();
                let m = families::aj_plus_bi(n, a, b);
                let brute = permanent_brute(&m).unwrap();
                let closed = permanent_aj_plus_bi(n, a, b).unwrap().value();
                assert!(
                    (closed - brute).abs() <= 1e-10 * brute,
                    "n={n} a={a} b={b}: closed {closed} vs brute {brute}"
                );
            }
        }
        // b = 0 degenerates to n! a^n.
        let v = permanent_aj_plus_bi(4, 0.5, 0.0).unwrap().value();
        assert!((v - 24.0 * 0.5f64.powi(4)).abs() < 1e-12);
        // a -> 0 with b = 1 approaches the identity permanent.
        let v = permanent_aj_plus_bi(5, 1e-14, 1.0).unwrap().value();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn counterexample_permanent_closed_form() {
        // n = 2: per(K_2) = 2!/4 * 2^{-1} = 1/4.
        let v = log_perm_counterexample(2).unwrap();
        assert!((v.value() - 0.25).abs() < 1e-14);
        // n = 4: 24/256 * 1/4 = 3/128.
        let v = log_perm_counterexample(4).unwrap();
        assert!((v.value() - 3.0 / 128.0).abs() < 1e-14);
        // Cross-check against Ryser on the materialized 9x9 matrix (n = 6).
        let k6 = families::lms_counterexample(6).unwrap();
        let ryser = permanent_ryser(&k6).unwrap().ln();
        let closed = log_perm_counterexample(6).unwrap().ln();
        assert!((ryser - closed).abs() < 1e-10);
        assert!(log_perm_counterexample(5).is_err());
    }

    #[test]
    fn counterexample_closed_form_vs_ryser_grid() {
        for n in [2usize, 4, 6, 8, 10, 12] {
            let k = families::lms_counterexample(n).unwrap();
            let ryser = permanent_ryser(&k).unwrap().ln();
            let closed = log_perm_counterexample(n).unwrap().ln();
            assert!(
                (ryser - closed).abs() < 1e-9,
                "n = {n}: ryser {ryser} vs closed {closed}"
            );
        }
    }

    #[test]
    fn row_scaling_is_multilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let m = random_matrix(5, &mut rng);
            let c = 0.1 + 3.0 * rng.random::<f64>();
            let mut scaled = m.clone();
            for j in 0..5 {
                scaled.set(2, j, c * m.get(2, j));
            }
            let p0 = permanent_ryser(&m).unwrap().value();
            let p1 = permanent_ryser(&scaled).unwrap().value();
            assert!((p1 - c * p0).abs() <= 1e-10 * (c * p0).abs().max(1.0));
        }
    }
}
