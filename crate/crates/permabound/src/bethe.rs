//! Maximization of the Bethe functional over the Birkhoff polytope and
//! polynomial capacities.
//!
//! The maximizer exists whenever `per(P) > 0` and satisfies
//! `max_Q bethe_value(P, Q) <= ln per(P)`. Frank-Wolfe fits the geometry:
//! the linear oracle over the polytope is an exact assignment solve, and
//! restriction to the feasible support (cells on some perfect matching of
//! `supp(P)`) is free. The objective may attain its maximum on the
//! boundary, where the gradient blows up but the value stays continuous,
//! so line-search acceptance is decided by the objective and the loop
//! stops on value stalls as well as on the duality gap.

use crate::assignment::assignment_solve;
use crate::bounds::bethe_value;
use crate::matrix::DS_TOL;
use crate::{Error, Matrix, Result};
use serde::Serialize;

/// Step cap keeping iterates strictly inside the face.
const STEP_CAP: f64 = 1.0 - 1e-12;
/// Consecutive stalled iterations before stopping early.
const STALL_LIMIT: usize = 8;

/// Outcome of a Birkhoff-polytope maximization run.
#[derive(Debug, Clone)]
pub struct CwResult {
    /// Best iterate found (doubly stochastic, supported inside `supp(P)`).
    pub q_star: Matrix,
    /// Objective value at `q_star`.
    pub value: f64,
    /// Frank-Wolfe gap at `q_star` (upper bound on the suboptimality).
    pub duality_gap: f64,
    pub iterations: usize,
    /// True iff the gap at `q_star` is within the requested tolerance.
    pub converged: bool,
}

impl CwResult {
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.q_star.n();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| self.q_star.row(i).to_vec()).collect();
        serde_json::json!({
            "q_star": rows,
            "value": self.value,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "converged": self.converged,
        })
    }
}

/// One line of the optional per-iteration diagnostics trace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub gap: f64,
}

/// Maximize the Bethe functional over doubly stochastic matrices
/// supported inside `supp(P)`.
pub fn maximize_bethe(p: &Matrix, tol: f64, max_iter: usize) -> Result<CwResult> {
    maximize_bethe_traced(p, tol, max_iter, None)
}

/// Same as [`maximize_bethe`], optionally recording an iteration trace.
pub fn maximize_bethe_traced(
    p: &Matrix,
    tol: f64,
    max_iter: usize,
    trace: Option<&mut Vec<TraceRow>>,
) -> Result<CwResult> {
    let n = p.n();
    if tol <= 0.0 {
        return Err(Error::Domain("maximize_bethe: tol must be positive".into()));
    }
    let core = p.matchable_core().ok_or(Error::ZeroPermanent)?;

    // Interior starting point: Sinkhorn scaling of the core indicator.
    // The core has total support by construction, so this converges fast.
    let indicator = {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if core[i * n + j] {
                    m.set(i, j, 1.0);
                }
            }
        }
        m
    };
    let (mut q, _) = indicator.sinkhorn_scale(1e-10, 50_000)?;
    let mut value = bethe_value(p, &q)?;

    // When P itself is (nearly) doubly stochastic it is feasible, and its
    // value log F(P) must never be lost; start from the better point.
    if p.is_doubly_stochastic(DS_TOL.max(1e-8)) {
        let at_p = bethe_value(p, p)?;
        if at_p > value {
            q = p.clone();
            value = at_p;
        }
    }

    frank_wolfe_loop(p, &core, q, value, tol, max_iter, trace)
}

/// The ascent loop from an explicit feasible starting point.
fn frank_wolfe_loop(
    p: &Matrix,
    core: &[bool],
    mut q: Matrix,
    mut value: f64,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<CwResult> {
    let n = p.n();
    let mut best_q = q.clone();
    let mut best_value = value;
    let mut iterations = 0usize;
    let mut stalls = 0usize;
    let mut last_gap = f64::INFINITY;

    for iter in 0..max_iter {
        iterations = iter + 1;
        let grad = clamped_gradient(p, &q, core);
        // The oracle minimizes cost, so negate to maximize <grad, V>.
        let neg: Vec<f64> = grad.iter().map(|&g| -g).collect();
        let vertex = assignment_solve(n, &neg, core)?;

        let mut gap = 0.0;
        for (i, &j) in vertex.iter().enumerate() {
            gap += grad[i * n + j];
        }
        for i in 0..n {
            for j in 0..n {
                if core[i * n + j] {
                    gap -= grad[i * n + j] * q.get(i, j);
                }
            }
        }
        last_gap = gap;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceRow {
                iteration: iter,
                value,
                gap,
            });
        }
        if gap <= tol {
            break;
        }

        let step = line_search(p, &q, &vertex);
        if step > 0.0 {
            apply_step(&mut q, &vertex, step);
        }
        let new_value = bethe_value(p, &q)?;
        // Objective decides acceptance; the gradient may be enormous near
        // the boundary while the value has already converged.
        if new_value > best_value {
            if new_value - best_value < 1e-13 * (1.0 + best_value.abs()) {
                stalls += 1;
            } else {
                stalls = 0;
            }
            best_value = new_value;
            best_q = q.clone();
        } else {
            stalls += 1;
        }
        value = new_value;
        if stalls >= STALL_LIMIT {
            break;
        }
    }

    // Report the gap at the returned iterate.
    let final_gap = {
        let grad = clamped_gradient(p, &best_q, core);
        let neg: Vec<f64> = grad.iter().map(|&g| -g).collect();
        match assignment_solve(n, &neg, core) {
            Ok(vertex) => {
                let mut g = 0.0;
                for (i, &j) in vertex.iter().enumerate() {
                    g += grad[i * n + j];
                }
                for i in 0..n {
                    for j in 0..n {
                        if core[i * n + j] {
                            g -= grad[i * n + j] * best_q.get(i, j);
                        }
                    }
                }
                g
            }
            Err(_) => last_gap,
        }
    };

    Ok(CwResult {
        value: best_value,
        q_star: best_q,
        duality_gap: final_gap.max(0.0),
        iterations,
        converged: final_gap <= tol,
    })
}

/// Gradient restricted to the feasible core, with entries clamped away
/// from {0, 1} so late near-vertex iterates stay finite.
fn clamped_gradient(p: &Matrix, q: &Matrix, core: &[bool]) -> Vec<f64> {
    let n = p.n();
    let mut grad = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if !core[i * n + j] {
                continue;
            }
            let qv = q.get(i, j).clamp(1e-300, 1.0 - 1e-16);
            grad[i * n + j] = -2.0 - (1.0 - qv).ln() - qv.ln() + p.get(i, j).ln();
        }
    }
    grad
}

fn apply_step(q: &mut Matrix, vertex: &[usize], step: f64) {
    let n = q.n();
    for i in 0..n {
        for j in 0..n {
            let target = if vertex[i] == j { 1.0 } else { 0.0 };
            let v = q.get(i, j);
            q.set(i, j, v + step * (target - v));
        }
    }
}

/// Maximize the concave segment function
/// `φ(γ) = bethe_value(P, Q + γ (V - Q))` over `[0, STEP_CAP]` by
/// bisection on its derivative.
fn line_search(p: &Matrix, q: &Matrix, vertex: &[usize]) -> f64 {
    let n = p.n();
    // φ'(γ) = Σ D_ij F'(q_ij + γ d_ij) over supp(D), with
    // F'(x) = -2 - ln(1-x) - ln x + ln p.
    let phi_prime = |gamma: f64| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let qv = q.get(i, j);
                let target = if vertex[i] == j { 1.0 } else { 0.0 };
                let d = target - qv;
                if d == 0.0 {
                    continue;
                }
                let x = (qv + gamma * d).clamp(1e-300, 1.0 - 1e-16);
                let pv = p.get(i, j);
                if pv == 0.0 {
                    continue; // off-support cells never move (d = 0 there)
                }
                total += d * (-2.0 - (1.0 - x).ln() - x.ln() + pv.ln());
            }
        }
        total
    };

    let mut lo = 0.0f64;
    let mut hi = STEP_CAP;
    if phi_prime(lo + 1e-15) <= 0.0 {
        return 0.0;
    }
    if phi_prime(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if phi_prime(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outcome of a capacity minimization.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// `ln Cap`.
    pub value: f64,
    /// Minimizing point (positive, log-coordinates summing to 0).
    pub minimizer: Vec<f64>,
    /// Sup-norm of the projected gradient at termination.
    pub gradient_norm: f64,
}

impl CapacityResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "minimizer": self.minimizer,
            "gradient_norm": self.gradient_norm,
        })
    }
}

const CAPACITY_MAX_ITER: usize = 200_000;

/// Objective evaluation: value plus projected gradient at a point.
type ZeroSumEval<'a> = &'a dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)>;

/// Minimize a smooth convex function on the zero-log-sum subspace by
/// projected gradient with Barzilai-Borwein steps and an Armijo fallback.
/// `eval` returns `(f, projected gradient)`. Returns `(y, f, gnorm)`.
fn minimize_zero_sum(
    dim: usize,
    tol: f64,
    what: &'static str,
    eval: ZeroSumEval,
) -> Result<(Vec<f64>, f64, f64)> {
    let recenter = |y: &mut Vec<f64>| {
        let mean = y.iter().sum::<f64>() / dim as f64;
        y.iter_mut().for_each(|v| *v -= mean);
    };
    let mut y = vec![0.0f64; dim];
    let (mut f, mut g) = eval(&y)?;
    let mut gnorm = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut step = 1.0f64;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (y, g) of last accepted point
    for _ in 0..CAPACITY_MAX_ITER {
        if gnorm <= tol {
            return Ok((y, f, gnorm));
        }
        // Barzilai-Borwein step length from the last accepted move.
        if let Some((py, pg)) = &prev {
            let mut sy = 0.0;
            let mut ss = 0.0;
            for i in 0..dim {
                let s = y[i] - py[i];
                let d = g[i] - pg[i];
                sy += s * d;
                ss += s * s;
            }
            if sy > 0.0 && ss > 0.0 {
                step = (ss / sy).clamp(1e-12, 1e8);
            }
        }
        // Armijo backtracking from the BB guess.
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = y.iter().zip(&g).map(|(&yi, &gi)| yi - t * gi).collect();
            recenter(&mut trial);
            if let Ok((ft, gt)) = eval(&trial) {
                if ft <= f - 1e-4 * t * g2 {
                    prev = Some((y.clone(), g.clone()));
                    y = trial;
                    f = ft;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // Flat to machine precision in this direction.
            if gnorm <= tol {
                return Ok((y, f, gnorm));
            }
            return Err(Error::NotConverged {
                what,
                max_iter: CAPACITY_MAX_ITER,
                residual: gnorm,
            });
        }
        gnorm = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if y.iter().any(|&v| v.abs() > 700.0) {
            return Err(Error::Unbounded(
                "minimizer diverging; the infimum is not attained".into(),
            ));
        }
    }
    Err(Error::NotConverged {
        what,
        max_iter: CAPACITY_MAX_ITER,
        residual: gnorm,
    })
}

/// `ln Cap(Prod_P)` where `Prod_P(x) = Π_i Σ_j P(i,j) x_j` and
/// `Cap(p) = inf { p(x) : x > 0, Π x_i = 1 }`.
///
/// In log coordinates `y` (with `Σ y = 0`) the objective
/// `Σ_i ln Σ_j P(i,j) e^{y_j}` is convex; its projected gradient is
/// `colsums(M) - 1` for the row-normalized scaled matrix `M`, so the
/// minimum sits exactly at the Sinkhorn fixed point and equals 0 for
/// doubly stochastic `P`.
pub fn capacity_product(p: &Matrix, tol: f64) -> Result<CapacityResult> {
    let n = p.n();
    if tol <= 0.0 {
        return Err(Error::Domain(
            "capacity_product: tol must be positive".into(),
        ));
    }
    for i in 0..n {
        if p.row(i).iter().all(|&v| v == 0.0) {
            return Err(Error::Unbounded(format!("row {i} of P is zero")));
        }
    }
    for j in 0..n {
        if (0..n).all(|i| p.get(i, j) == 0.0) {
            return Err(Error::Unbounded(format!(
                "column {j} of P is zero; the infimum is 0"
            )));
        }
    }

    let eval = |y: &[f64]| -> Result<(f64, Vec<f64>)> {
        let mut f = 0.0f64;
        let mut g = vec![0.0f64; n];
        for i in 0..n {
            let s: f64 = (0..n).map(|j| p.get(i, j) * y[j].exp()).sum();
            f += s.ln();
            for j in 0..n {
                g[j] += p.get(i, j) * y[j].exp() / s;
            }
        }
        // Project onto Σ y = 0 directions; Σ g = n exactly.
        let mean = g.iter().sum::<f64>() / n as f64;
        g.iter_mut().for_each(|v| *v -= mean);
        Ok((f, g))
    };
    let (y, f, gnorm) = minimize_zero_sum(n, tol, "capacity_product", &eval)?;
    Ok(CapacityResult {
        value: f,
        minimizer: y.iter().map(|&v| v.exp()).collect(),
        gradient_norm: gnorm,
    })
}

/// `ln Cap(q_(j))` where
/// `q_(j)(x) = Σ_i P(i,j) Π_{k≠i} ( Σ_{l≠j} P(k,l) x_l )`
/// is the degree-(n-1) polynomial obtained by differentiating `Prod_P` in
/// `x_j` at `x_j = 0`. For doubly stochastic `P` it dominates the column
/// product: `Cap(q_(j)) >= CPR_j(P)`.
pub fn capacity_qj(p: &Matrix, col: usize, tol: f64) -> Result<CapacityResult> {
    let n = p.n();
    if col >= n {
        return Err(Error::Domain(format!(
            "capacity_qj: column {col} out of range"
        )));
    }
    if n < 2 {
        return Err(Error::Domain("capacity_qj needs n >= 2".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("capacity_qj: tol must be positive".into()));
    }
    if (0..n).all(|i| p.get(i, col) == 0.0) {
        return Err(Error::Unbounded(format!(
            "column {col} of P is zero, q_(j) vanishes identically"
        )));
    }
    let vars: Vec<usize> = (0..n).filter(|&l| l != col).collect();
    for &l in &vars {
        if (0..n).all(|i| p.get(i, l) == 0.0) {
            return Err(Error::Unbounded(format!(
                "column {l} of P is zero; the infimum is 0"
            )));
        }
    }

    // Evaluate ln q_(j)(e^y) and its gradient in y (length n-1).
    // Linear forms L_k = Σ_{l≠j} P(k,l) x_l; value V = Σ_i P(i,j) Π_{k≠i} L_k.
    let eval = |y: &[f64]| -> Result<(f64, Vec<f64>)> {
        let x: Vec<f64> = y.iter().map(|&v| v.exp()).collect();
        let mut lin = vec![0.0f64; n];
        for k in 0..n {
            lin[k] = vars
                .iter()
                .enumerate()
                .map(|(pos, &l)| p.get(k, l) * x[pos])
                .sum();
        }
        let mut value = 0.0f64;
        let mut dv = vec![0.0f64; vars.len()]; // ∂V/∂x_l
        for i in 0..n {
            let w = p.get(i, col);
            if w == 0.0 {
                continue;
            }
            let mut prod = 1.0f64;
            for (k, &lk) in lin.iter().enumerate() {
                if k != i {
                    prod *= lk;
                }
            }
            value += w * prod;
            for k in 0..n {
                if k == i {
                    continue;
                }
                // Π_{k'≠i,k} L_k'
                let mut rest = 1.0f64;
                for (k2, &lk2) in lin.iter().enumerate() {
                    if k2 != i && k2 != k {
                        rest *= lk2;
                    }
                }
                for (pos, &l) in vars.iter().enumerate() {
                    let c = p.get(k, l);
                    if c != 0.0 {
                        dv[pos] += w * c * rest;
                    }
                }
            }
        }
        if value <= 0.0 {
            return Err(Error::Unbounded(
                "q_(j) vanishes at an interior point; the infimum is 0".into(),
            ));
        }
        // ∂/∂y_l ln V = x_l ∂V/∂x_l / V, projected onto Σ y = 0.
        let mut g: Vec<f64> = dv.iter().zip(&x).map(|(&d, &xl)| xl * d / value).collect();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter_mut().for_each(|v| *v -= mean);
        Ok((value.ln(), g))
    };

    let (y, f, gnorm) = minimize_zero_sum(vars.len(), tol, "capacity_qj", &eval)?;
    Ok(CapacityResult {
        value: f,
        minimizer: y.iter().map(|&v| v.exp()).collect(),
        gradient_norm: gnorm,
    })
}
