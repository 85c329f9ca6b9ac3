//! Representing functions of operator means.
//!
//! A [`RepresentingFunction`] is an operator monotone `f` on `(0, ∞)` with
//! `f(1) = 1`, carried together with its weight `f'(1) ∈ [0, 1]`. The
//! catalog covers the weighted power means (arithmetic, geometric,
//! harmonic and everything in between), the logarithmic and identric means,
//! the Heinz means and the power-difference family `F_{p,q}`. User
//! functions come in through [`crate::expr`] and fitted measures through
//! [`crate::measure`].

mod classify;
mod grid;
pub mod kernels;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use classify::{
    classify, cone_membership, ma_bound_check, pmi_lemma_crosscheck, Classification, LemmaCheck,
    MaBound, Verdict, CLASSIFY_TOL, MA_TOL,
};
pub use grid::Grid;

/// Step of the central difference used for numerical weights.
pub const WEIGHT_STEP: f64 = 1e-5;

type Evaluator = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Operator monotone function on `(0, ∞)` normalised by `f(1) = 1`.
///
/// Cheap to clone; evaluation is pure and may be shared across threads.
#[derive(Clone)]
pub struct RepresentingFunction {
    name: String,
    params: Vec<(String, f64)>,
    eval: Evaluator,
    weight: f64,
    weight_is_analytic: bool,
}

impl fmt::Debug for RepresentingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepresentingFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("weight", &self.weight)
            .field("weight_is_analytic", &self.weight_is_analytic)
            .finish()
    }
}

impl RepresentingFunction {
    /// Function with a known weight. Not validated; intended for closed
    /// forms whose properties are established analytically.
    pub fn with_analytic_weight(
        name: impl Into<String>,
        params: Vec<(String, f64)>,
        weight: f64,
        eval: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        RepresentingFunction {
            name: name.into(),
            params,
            eval: Arc::new(eval),
            weight,
            weight_is_analytic: true,
        }
    }

    /// Function whose weight is computed numerically. The result is checked
    /// against normalization, sampled monotonicity and `f'(1) ∈ [0, 1]`.
    pub fn from_evaluator(
        name: impl Into<String>,
        params: Vec<(String, f64)>,
        eval: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut f = RepresentingFunction {
            name: name.into(),
            params,
            eval: Arc::new(eval),
            weight: f64::NAN,
            weight_is_analytic: false,
        };
        f.weight = numerical_weight(&f)?;
        f.validate()?;
        Ok(f)
    }

    /// Like [`from_evaluator`](Self::from_evaluator) but without the
    /// normalization and monotonicity checks, for callers that apply their
    /// own admission rules.
    pub(crate) fn unvalidated_numeric(
        name: impl Into<String>,
        params: Vec<(String, f64)>,
        eval: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut f = RepresentingFunction {
            name: name.into(),
            params,
            eval: Arc::new(eval),
            weight: f64::NAN,
            weight_is_analytic: false,
        };
        f.weight = numerical_weight(&f)?;
        Ok(f)
    }

    pub(crate) fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// `f'(1)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn weight_is_analytic(&self) -> bool {
        self.weight_is_analytic
    }

    /// Human-readable label, e.g. `power(t=0.5, lambda=0.25)`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let ps: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}({})", self.name, ps.join(", "))
    }

    /// `f(x)` for `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Evaluation {
                x,
                reason: "argument must be positive and finite".into(),
            });
        }
        let v = (self.eval)(x)?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Evaluation {
                x,
                reason: format!("{} returned {v}", self.name),
            });
        }
        Ok(v)
    }

    /// Checks `f(1) = 1` (within 1e-10), monotonicity on the default grid
    /// and the weight range.
    pub fn validate(&self) -> Result<()> {
        let one = self.eval(1.0)?;
        if (one - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidFunction {
                rule: format!("normalization f(1) = {one}"),
                witness: 1.0,
            });
        }
        check_monotone(self, &Grid::default())?;
        check_weight_range(self.weight)?;
        Ok(())
    }
}

pub(crate) fn check_monotone(f: &RepresentingFunction, grid: &Grid) -> Result<()> {
    let mut prev: Option<f64> = None;
    for &x in grid.points() {
        let v = f.eval(x)?;
        if let Some(p) = prev {
            if p > v + 1e-12 * v.abs().max(1.0) {
                return Err(Error::InvalidFunction {
                    rule: format!("monotonicity: f decreases to {v} at this point"),
                    witness: x,
                });
            }
        }
        prev = Some(v);
    }
    Ok(())
}

fn check_weight_range(w: f64) -> Result<()> {
    if !(-1e-6..=1.0 + 1e-6).contains(&w) {
        return Err(Error::InvalidFunction {
            rule: format!("weight f'(1) = {w} outside [0, 1]"),
            witness: 1.0,
        });
    }
    Ok(())
}

/// `f'(1)` by a central difference with one Richardson step,
/// `(4·D(h) − D(2h)) / 3`, `h = 1e-5`, clipped to `[0, 1]`.
///
/// Fails if the raw estimate leaves `[−1e-6, 1 + 1e-6]`.
pub fn numerical_weight(f: &RepresentingFunction) -> Result<f64> {
    let diff = |h: f64| -> Result<f64> {
        let hi = 1.0 + h;
        let lo = 1.0 - h;
        Ok((f.eval(hi)? - f.eval(lo)?) / (hi - lo))
    };
    let d1 = diff(WEIGHT_STEP)?;
    let d2 = diff(2.0 * WEIGHT_STEP)?;
    let w = (4.0 * d1 - d2) / 3.0;
    check_weight_range(w)?;
    Ok(w.clamp(0.0, 1.0))
}

/// `f'(1)`: the analytic value when known, the stored numerical estimate
/// otherwise.
pub fn weight_at_one(f: &RepresentingFunction) -> f64 {
    f.weight
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::param(name, v, "in [0, 1]"));
    }
    Ok(())
}

fn check_signed_unit(name: &str, v: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(Error::param(name, v, "in [-1, 1]"));
    }
    Ok(())
}

fn p(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

/// Weighted power mean kernel `p_t(λ; x) = [1 − λ + λ x^t]^{1/t}`
/// (`x^λ` at `t = 0`). Its weight is exactly `λ`.
pub fn power_kernel(t: f64, lam: f64) -> Result<RepresentingFunction> {
    check_signed_unit("t", t)?;
    check_unit("lambda", lam)?;
    Ok(RepresentingFunction::with_analytic_weight(
        "power",
        vec![p("t", t), p("lambda", lam)],
        lam,
        move |x| Ok(kernels::power_mean(t, lam, x)),
    ))
}

/// Catalog lookup. Names and parameters:
/// `arithmetic(λ)`, `harmonic(λ)`, `geometric(λ)`, `power(t, λ)`, `log`,
/// `identric`, `heinz(t)`, `power_diff(p, q)`.
pub fn builtin(name: &str, params: &[f64]) -> Result<RepresentingFunction> {
    let arity = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::Config(format!(
                "`{name}` takes {n} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    let f = match name {
        "arithmetic" | "harmonic" | "geometric" => {
            arity(1)?;
            let lam = params[0];
            let t = match name {
                "arithmetic" => 1.0,
                "harmonic" => -1.0,
                _ => 0.0,
            };
            let mut f = power_kernel(t, lam)?;
            f.name = name.to_string();
            f.params = vec![p("lambda", lam)];
            f
        }
        "power" => {
            arity(2)?;
            power_kernel(params[0], params[1])?
        }
        "log" => {
            arity(0)?;
            RepresentingFunction::with_analytic_weight("log", vec![], 0.5, |x| {
                Ok(kernels::log_mean(x))
            })
        }
        "identric" => {
            arity(0)?;
            RepresentingFunction::with_analytic_weight("identric", vec![], 0.5, |x| {
                Ok(kernels::identric_mean(x))
            })
        }
        "heinz" => {
            arity(1)?;
            let t = params[0];
            check_unit("t", t)?;
            RepresentingFunction::with_analytic_weight("heinz", vec![p("t", t)], 0.5, move |x| {
                Ok(kernels::heinz_mean(t, x))
            })
        }
        "power_diff" => {
            arity(2)?;
            let (pp, q) = (params[0], params[1]);
            check_signed_unit("p", pp)?;
            check_signed_unit("q", q)?;
            RepresentingFunction::with_analytic_weight(
                "power_diff",
                vec![p("p", pp), p("q", q)],
                0.5,
                move |x| Ok(kernels::power_difference(pp, q, x)),
            )
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(f)
}

/// Adjoint `f*(x) = f(1/x)⁻¹`. The weight is recomputed numerically.
pub fn adjoint(f: &RepresentingFunction) -> Result<RepresentingFunction> {
    let inner = f.clone();
    RepresentingFunction::from_evaluator(
        format!("adjoint[{}]", f.label()),
        inner.params.clone(),
        move |x| Ok(1.0 / inner.eval(1.0 / x)?),
    )
}

/// Orthogonal transform `f⊥(x) = x / f(x)`. The weight is recomputed
/// numerically.
pub fn perp(f: &RepresentingFunction) -> Result<RepresentingFunction> {
    let inner = f.clone();
    RepresentingFunction::from_evaluator(
        format!("perp[{}]", f.label()),
        inner.params.clone(),
        move |x| Ok(x / inner.eval(x)?),
    )
}

/// Catalog instances used throughout the test suites and `--func all`.
pub fn standard_catalog() -> Vec<RepresentingFunction> {
    let mut out = Vec::new();
    for &lam in &[0.25, 0.5, 0.75] {
        out.push(builtin("arithmetic", &[lam]).expect("valid"));
        out.push(builtin("harmonic", &[lam]).expect("valid"));
        out.push(builtin("geometric", &[lam]).expect("valid"));
    }
    out.push(builtin("power", &[0.5, 0.5]).expect("valid"));
    out.push(builtin("power", &[-0.5, 0.5]).expect("valid"));
    out.push(builtin("log", &[]).expect("valid"));
    out.push(builtin("identric", &[]).expect("valid"));
    for &t in &[0.0, 0.25, 0.5] {
        out.push(builtin("heinz", &[t]).expect("valid"));
    }
    for &(pp, q) in &[(1.0, 1.0), (1.0, 0.0), (0.0, 0.0), (-0.5, 0.5), (0.5, -0.5)] {
        out.push(builtin("power_diff", &[pp, q]).expect("valid"));
    }
    out
}
