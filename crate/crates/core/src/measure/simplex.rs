//! Active-set solver for least squares over the probability simplex:
//!
//! ```text
//! minimise ‖M w − b‖² + ridge·‖w‖²   subject to  w ≥ 0, Σ w = 1
//! ```
//!
//! Lawson–Hanson style: the passive set grows one index at a time (the one
//! with the most negative reduced gradient) and each subproblem is an
//! equality-constrained least-squares solve on the passive columns,
//! followed by a step back to the feasible region when a weight would go
//! negative.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const REFINEMENT_ROUNDS: usize = 4;

/// `Σ aᵢ bᵢ` accumulated with error-free transformations, so cancelling
/// sums keep their low-order digits.
#[derive(Clone, Copy)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn new(start: f64) -> Self {
        Compensated {
            sum: start,
            err: 0.0,
        }
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let p_err = a.mul_add(b, -p);
        let t = self.sum + p;
        let z = t - self.sum;
        self.err += (self.sum - (t - z)) + (p - z) + p_err;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.err
    }
}

/// Column-major dense problem data.
pub(crate) struct Problem<'a> {
    pub rows: usize,
    pub cols: usize,
    /// `cols` columns of length `rows`.
    pub columns: &'a [Vec<f64>],
    pub target: &'a [f64],
    pub ridge: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub weights: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl Problem<'_> {
    /// `M w − b`, accumulated in compensated arithmetic.
    ///
    /// Near the optimum each entry is a sum of O(1) terms cancelling to a
    /// tiny value; with plain summation the rounding error of the residual
    /// swamps the gradient once ‖Mw − b‖ reaches about √ε, and the active
    /// set stops improving there.
    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut acc: Vec<Compensated> = self.target.iter().map(|b| Compensated::new(-b)).collect();
        for (col, &wi) in self.columns.iter().zip(w) {
            if wi != 0.0 {
                for (a, &cj) in acc.iter_mut().zip(col) {
                    a.add_product(wi, cj);
                }
            }
        }
        acc.into_iter().map(Compensated::value).collect()
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let r = self.residual(w);
        r.iter().map(|v| v * v).sum::<f64>() + self.ridge * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Half the gradient: `Mᵀ(Mw − b) + ridge·w`.
    fn half_gradient(&self, w: &[f64]) -> Vec<f64> {
        let r = self.residual(w);
        self.columns
            .iter()
            .zip(w)
            .map(|(col, &wi)| col.iter().zip(&r).map(|(c, r)| c * r).sum::<f64>() + self.ridge * wi)
            .collect()
    }

    /// KKT residual of `w` with support `passive`.
    ///
    /// On the support the reduced gradient must be constant (the multiplier
    /// of `Σ w = 1`); off the support it may only be larger. The largest
    /// deviation from that pattern is divided by `1 + max_i ‖M_i‖ · ‖b‖`,
    /// the size of a single gradient entry at `w = 0`.
    fn kkt(&self, w: &[f64], passive: &[usize], scale: f64) -> (f64, Vec<f64>, f64) {
        let g = self.half_gradient(w);
        let level = passive.iter().map(|&i| w[i] * g[i]).sum::<f64>()
            / passive.iter().map(|&i| w[i]).sum::<f64>();
        let mut worst = 0.0f64;
        for (i, &gi) in g.iter().enumerate() {
            if passive.contains(&i) {
                worst = worst.max((gi - level).abs());
            } else {
                worst = worst.max(level - gi);
            }
        }
        (worst / scale, g, level)
    }

    /// `min ‖M_P z − b‖² + ridge‖z‖²` subject to `Σ z = 1`, by eliminating
    /// the coordinate `pivot`.
    fn solve_equality(&self, passive: &[usize], pivot: usize) -> Vec<f64> {
        let k = passive.len();
        if k == 1 {
            return vec![1.0];
        }
        let free: Vec<usize> = (0..k).filter(|&i| i != pivot).collect();
        let piv_col = &self.columns[passive[pivot]];
        let sr = self.ridge.sqrt();
        let extra = if self.ridge > 0.0 { k } else { 0 };
        let nrows = self.rows + extra;
        let mut a = DMatrix::<f64>::zeros(nrows, k - 1);
        let mut rhs = DVector::<f64>::zeros(nrows);
        for j in 0..self.rows {
            rhs[j] = self.target[j] - piv_col[j];
        }
        for (c, &fi) in free.iter().enumerate() {
            let col = &self.columns[passive[fi]];
            for j in 0..self.rows {
                a[(j, c)] = col[j] - piv_col[j];
            }
        }
        if extra > 0 {
            for c in 0..(k - 1) {
                a[(self.rows + c, c)] = sr;
                a[(self.rows + k - 1, c)] = -sr;
            }
            rhs[self.rows + k - 1] = -sr;
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let cutoff = smax * 1e-14;
        let mut y = svd
            .solve(&rhs, cutoff)
            .unwrap_or_else(|_| DVector::zeros(k - 1));
        // Iterative refinement against a compensated residual: each round
        // contracts the error by about cond·ε, so the support gradient ends
        // up flat far below what a single backward-stable solve achieves.
        for _ in 0..REFINEMENT_ROUNDS {
            let r = DVector::from_iterator(
                nrows,
                (0..nrows).map(|j| {
                    let mut acc = Compensated::new(rhs[j]);
                    for c in 0..(k - 1) {
                        acc.add_product(-a[(j, c)], y[c]);
                    }
                    acc.value()
                }),
            );
            match svd.solve(&r, cutoff) {
                Ok(dy) if dy.amax() > 0.0 => y += dy,
                _ => break,
            }
        }
        let mut z = vec![0.0; k];
        let mut rest = 1.0;
        for (c, &fi) in free.iter().enumerate() {
            z[fi] = y[c];
            rest -= y[c];
        }
        z[pivot] = rest;
        z
    }
}

/// Candidate iterate kept while the active set evolves.
struct Candidate {
    objective: f64,
    kkt: f64,
    weights: Vec<f64>,
}

/// Active-set state: current weights, their support, and columns that
/// entered without progress since the last successful step.
#[derive(Clone)]
struct State {
    w: Vec<f64>,
    passive: Vec<usize>,
    blocked: Vec<usize>,
}

enum Entered {
    /// The support changed and the weights moved.
    Moved,
    /// The entering column was dropped again at a zero-length step.
    Blocked,
    /// The iteration budget ran out.
    Exhausted,
}

impl State {
    /// Adds column `j` to the support and runs the inner loop: solve on
    /// the support, step back to feasibility, drop zero weights, repeat.
    fn enter(
        &mut self,
        problem: &Problem<'_>,
        j: usize,
        iterations: &mut usize,
        max_iter: usize,
    ) -> Entered {
        let State {
            w,
            passive,
            blocked,
        } = self;
        passive.push(j);
        loop {
            *iterations += 1;
            if *iterations > max_iter {
                return Entered::Exhausted;
            }
            let pivot = (0..passive.len())
                .max_by(|&a, &b| w[passive[a]].total_cmp(&w[passive[b]]))
                .expect("non-empty support");
            let z = problem.solve_equality(passive, pivot);
            if z.iter().all(|&v| v > 0.0) {
                for (&i, &v) in passive.iter().zip(&z) {
                    w[i] = v;
                }
                blocked.clear();
                return Entered::Moved;
            }
            // step from w towards z until the first weight hits zero
            let mut alpha = 1.0f64;
            for (&i, &zi) in passive.iter().zip(&z) {
                if zi <= 0.0 {
                    let denom = w[i] - zi;
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    }
                }
            }
            for (&i, &zi) in passive.iter().zip(&z) {
                w[i] += alpha * (zi - w[i]);
            }
            let before = passive.len();
            passive.retain(|&i| w[i] > 1e-300 && !(alpha == 0.0 && i == j));
            for (i, wi) in w.iter_mut().enumerate() {
                if !passive.contains(&i) {
                    *wi = 0.0;
                }
            }
            let stuck = alpha == 0.0 && passive.len() < before && !passive.contains(&j);
            if passive.is_empty() {
                w[j] = 1.0;
                passive.push(j);
            }
            let total: f64 = passive.iter().map(|&i| w[i]).sum();
            for &i in passive.iter() {
                w[i] /= total;
            }
            if stuck {
                blocked.push(j);
                return Entered::Blocked;
            }
        }
    }
}

/// Off-support columns tried by the exchange phase.
const EXCHANGE_CANDIDATES: usize = 16;

/// Solves `problem`, succeeding when some iterate has KKT residual at most
/// `kkt_tol`; among those the one with the smallest objective is returned.
///
/// Iteration does not stop at `kkt_tol`: on ill-conditioned problems a
/// small gradient can coexist with a residual that is still far from
/// optimal. The gradient phase adds the column with the most negative
/// reduced gradient while one stands out from rounding. Once none does, an
/// exchange phase tries the most promising off-support columns one at a
/// time and keeps a change only if the objective really drops; the weights
/// themselves are stored to one ulp, which bounds how flat the gradient on
/// the support can be, so below that level only objective values can tell
/// a better support from a worse one. The run ends when neither phase
/// improves, or after three consecutive non-improving active-set changes.
pub(crate) fn solve(problem: &Problem<'_>, kkt_tol: f64, max_iter: usize) -> Result<Solution> {
    let n = problem.cols;
    if n == 0 || problem.columns.len() != n {
        return Err(Error::Config(
            "simplex problem needs at least one column".into(),
        ));
    }
    let start = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            (i, problem.objective(&e))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("n > 0");
    let mut state = State {
        w: vec![0.0; n],
        passive: vec![start],
        blocked: Vec::new(),
    };
    state.w[start] = 1.0;
    let mut iterations = 0;
    let col_norm = problem
        .columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let b_norm = problem.target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = 1.0 + col_norm * b_norm;

    let mut accepted: Option<Candidate> = None;
    let mut lowest_kkt = f64::INFINITY;
    let mut lowest_objective = f64::INFINITY;
    let mut stall = 0;

    loop {
        let (kkt, g, level) = problem.kkt(&state.w, &state.passive, scale);
        let objective = problem.objective(&state.w);
        lowest_kkt = lowest_kkt.min(kkt);
        if kkt <= kkt_tol && !matches!(&accepted, Some(c) if objective >= c.objective) {
            accepted = Some(Candidate {
                objective,
                kkt,
                weights: state.w.clone(),
            });
        }
        if objective < lowest_objective * (1.0 - 1e-14) {
            lowest_objective = objective;
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= 3 || objective == 0.0 {
            break;
        }
        // gradient phase: most negative reduced gradient off the support,
        // ignoring differences at the rounding level of the gradient
        let noise = 1e-14 * g.iter().fold(level.abs(), |m, v| m.max(v.abs()));
        let mut off: Vec<usize> = (0..n)
            .filter(|i| !state.passive.contains(i) && !state.blocked.contains(i))
            .collect();
        off.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
        if let Some(&j) = off.first().filter(|&&j| g[j] < level - noise) {
            match state.enter(problem, j, &mut iterations, max_iter) {
                Entered::Exhausted => break,
                Entered::Moved | Entered::Blocked => continue,
            }
        }
        // exchange phase
        let mut improved = false;
        for &j in off.iter().take(EXCHANGE_CANDIDATES) {
            let mut trial = state.clone();
            let outcome = trial.enter(problem, j, &mut iterations, max_iter);
            if matches!(outcome, Entered::Exhausted) {
                break;
            }
            if problem.objective(&trial.w) < objective * (1.0 - 1e-12) {
                state = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }

    match accepted {
        Some(c) => Ok(Solution {
            weights: c.weights,
            kkt_residual: c.kkt,
            iterations,
        }),
        None => Err(Error::SolverNotConverged {
            iterations,
            kkt_residual: lowest_kkt,
        }),
    }
}
