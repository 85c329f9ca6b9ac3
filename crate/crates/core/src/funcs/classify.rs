//! PMI/PMD classification and the scalar inequalities around it.
//!
//! All comparisons are made between logarithms, with the tolerance relative
//! to `max(1, |log lhs|, |log rhs|)` so that both tails of a log-spaced grid
//! are judged on the same footing.

use serde::Serialize;

use super::{kernels, Grid, RepresentingFunction};
use crate::error::{Error, Result};

/// Default relative tolerance on log-values.
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Tolerance on the relative excess in [`ma_bound_check`].
pub const MA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PMI")]
    Pmi,
    #[serde(rename = "PMD")]
    Pmd,
    Boundary,
    Neither,
}

impl Verdict {
    /// PMI or Boundary.
    pub fn in_pmi(self) -> bool {
        matches!(self, Verdict::Pmi | Verdict::Boundary)
    }

    /// PMD or Boundary.
    pub fn in_pmd(self) -> bool {
        matches!(self, Verdict::Pmd | Verdict::Boundary)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pmi => "PMI",
            Verdict::Pmd => "PMD",
            Verdict::Boundary => "Boundary",
            Verdict::Neither => "Neither",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub weight: f64,
    /// Largest scaled amount by which `x^{f'(1)}` exceeds `f(x)`.
    pub max_violation_pmi: f64,
    /// Largest scaled amount by which `f(x)` exceeds `x^{f'(1)}`.
    pub max_violation_pmd: f64,
    /// Grid point of the worst PMI violation, when it exceeds the tolerance.
    pub witness_pmi_x: Option<f64>,
    /// Grid point of the worst PMD violation, when it exceeds the tolerance.
    pub witness_pmd_x: Option<f64>,
}

fn scaled_gap(lhs_log: f64, rhs_log: f64) -> f64 {
    (lhs_log - rhs_log) / 1f64.max(lhs_log.abs()).max(rhs_log.abs())
}

/// Compares `x^{f'(1)}` with `f(x)` on the grid.
///
/// Boundary is reported first (both directions hold within `tol`), then
/// PMI (`x^{f'(1)} ≤ f(x)`), then PMD (`x^{f'(1)} ≥ f(x)`), else Neither.
pub fn classify(f: &RepresentingFunction, grid: &Grid, tol: f64) -> Result<Classification> {
    let w = f.weight();
    let mut pmi = (0.0f64, None);
    let mut pmd = (0.0f64, None);
    for &x in grid.points() {
        let gap = scaled_gap(w * x.ln(), f.eval(x)?.ln());
        if gap > pmi.0 {
            pmi = (gap, Some(x));
        }
        if -gap > pmd.0 {
            pmd = (-gap, Some(x));
        }
    }
    let pmi_ok = pmi.0 <= tol;
    let pmd_ok = pmd.0 <= tol;
    let verdict = match (pmi_ok, pmd_ok) {
        (true, true) => Verdict::Boundary,
        (true, false) => Verdict::Pmi,
        (false, true) => Verdict::Pmd,
        (false, false) => Verdict::Neither,
    };
    Ok(Classification {
        verdict,
        weight: w,
        max_violation_pmi: pmi.0,
        max_violation_pmd: pmd.0,
        witness_pmi_x: if pmi_ok { None } else { pmi.1 },
        witness_pmd_x: if pmd_ok { None } else { pmd.1 },
    })
}

/// Membership in the cone `C_t`: `p_t(f'(1); x) ≤ f(x)` on the grid.
pub fn cone_membership(f: &RepresentingFunction, t: f64, grid: &Grid, tol: f64) -> Result<bool> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::param("t", t, "in [-1, 1]"));
    }
    let w = f.weight();
    for &x in grid.points() {
        let lower = kernels::power_mean(t, w, x).ln();
        if scaled_gap(lower, f.eval(x)?.ln()) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaBound {
    pub holds: bool,
    /// Largest relative excess `f(x) / (1 − f'(1) + f'(1)x) − 1`.
    pub max_excess: f64,
}

/// Arithmetic upper bound `f(x) ≤ 1 − f'(1) + f'(1)·x` on the grid.
pub fn ma_bound_check(f: &RepresentingFunction, grid: &Grid) -> Result<MaBound> {
    let w = f.weight();
    let mut worst = f64::NEG_INFINITY;
    for &x in grid.points() {
        let bound = 1.0 - w + w * x;
        worst = worst.max(f.eval(x)? / bound - 1.0);
    }
    Ok(MaBound {
        holds: worst <= MA_TOL,
        max_excess: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub verdict: Verdict,
    pub consistent: bool,
    /// First `(x, r)` whose sign of `f(x)^r − f(x^r)` contradicts the verdict.
    pub witness: Option<(f64, f64)>,
    /// Largest scaled `log f(x)^r − log f(x^r)` seen.
    pub max_gap: f64,
    /// Smallest scaled `log f(x)^r − log f(x^r)` seen.
    pub min_gap: f64,
}

/// Checks that the power form `f(x)^r ≤ f(x^r)` (PMI), `≥` (PMD) or `=`
/// (Boundary) agrees with the verdict of [`classify`] for every `r` and
/// grid point.
pub fn pmi_lemma_crosscheck(
    f: &RepresentingFunction,
    r_list: &[f64],
    grid: &Grid,
    tol: f64,
) -> Result<LemmaCheck> {
    if let Some(&r) = r_list.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
        return Err(Error::param("r", r, "finite and >= 1"));
    }
    let verdict = classify(f, grid, tol)?.verdict;
    if verdict == Verdict::Neither {
        return Err(Error::Config(format!(
            "{} is classified Neither; the power-form check needs PMI, PMD or Boundary",
            f.label()
        )));
    }
    let mut out = LemmaCheck {
        verdict,
        consistent: true,
        witness: None,
        max_gap: f64::NEG_INFINITY,
        min_gap: f64::INFINITY,
    };
    for &r in r_list {
        for &x in grid.points() {
            let gap = scaled_gap(r * f.eval(x)?.ln(), f.eval(x.powf(r))?.ln());
            out.max_gap = out.max_gap.max(gap);
            out.min_gap = out.min_gap.min(gap);
            let ok = match verdict {
                Verdict::Pmi => gap <= tol,
                Verdict::Pmd => gap >= -tol,
                _ => gap.abs() <= tol,
            };
            if !ok && out.consistent {
                out.consistent = false;
                out.witness = Some((x, r));
            }
        }
    }
    Ok(out)
}
