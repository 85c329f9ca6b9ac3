//! Discrete probability measures on `[0, 1]` integrated against the power
//! mean kernel, and recovery of such a measure from a representing function.

mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{cone_membership, kernels, Grid, RepresentingFunction, CLASSIFY_TOL};
use crate::quadrature;

/// Tolerance on `Σ w_i = 1`.
pub const MASS_TOL: f64 = 1e-12;

/// Scaled KKT residual the fitting solver must reach.
pub const KKT_TOL: f64 = 1e-10;

/// Absolute tolerance of the inner integral in [`power_diff_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms, raw.weights)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms,
            weights: m.weights,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::param("t", t, "in [-1, 1]"))
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Measure("no atoms".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::Measure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(a) = atoms.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Measure(format!("atom {a} outside [0, 1]")));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Measure("atoms must be strictly increasing".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Measure(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Measure(format!("total mass {mass} differs from 1")));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn point_mass(lambda: f64) -> Result<Self> {
        DiscreteMeasure::new(vec![lambda], vec![1.0])
    }

    /// Equal weights on `n ≥ 2` evenly spaced atoms `i/(n−1)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Measure(format!(
                "uniform measure needs n >= 2, got {n}"
            )));
        }
        let atoms = lattice(n);
        DiscreteMeasure::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total weight on atoms within `tol` of `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| **a >= lo && **a <= hi)
            .map(|(_, w)| w)
            .sum()
    }
}

/// `i/(n−1)` for `i = 0..n`.
pub fn lattice(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// `Σ w_i p_t(λ_i; x)`.
pub fn integrate_kernel(mu: &DiscreteMeasure, t: f64, x: f64) -> Result<f64> {
    check_t(t)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::param("x", x, "finite and > 0"));
    }
    Ok(mu
        .atoms
        .iter()
        .zip(&mu.weights)
        .map(|(&l, &w)| w * kernels::power_mean(t, l, x))
        .sum())
}

/// `Σ w_i λ_i`.
pub fn first_moment(mu: &DiscreteMeasure) -> f64 {
    mu.atoms.iter().zip(&mu.weights).map(|(a, w)| a * w).sum()
}

/// `x ↦ ∫ p_t(λ; x) dμ(λ)` as a representing function. Its derivative at 1
/// is the first moment of `μ`.
pub fn induced_function(mu: &DiscreteMeasure, t: f64) -> Result<RepresentingFunction> {
    check_t(t)?;
    let m = mu.clone();
    Ok(RepresentingFunction::with_analytic_weight(
        "measure",
        vec![("t".to_string(), t)],
        first_moment(mu),
        move |x| integrate_kernel(&m, t, x),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureFit {
    pub measure: DiscreteMeasure,
    pub t: f64,
    /// Sup relative error on the held-out grid.
    pub residual: f64,
    /// Sup relative error on the fitting grid.
    pub fit_residual: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Whether `f` passed the cone check for `t`; when false the fit is still
    /// computed but carries no guarantee.
    pub certified: bool,
}

/// Fits `f ≈ Σ w_i p_t(λ_i; ·)` with atoms `λ_i = i/(n_atoms−1)`.
///
/// Minimises `Σ_j ((K w)_j − f(x_j))² / f(x_j)² + ridge·‖w‖²` over the
/// probability simplex, then measures the sup relative error on the
/// log-midpoints of `x_grid`.
pub fn fit_measure(
    f: &RepresentingFunction,
    t: f64,
    n_atoms: usize,
    x_grid: &Grid,
    ridge: f64,
) -> Result<MeasureFit> {
    check_t(t)?;
    if n_atoms < 2 {
        return Err(Error::param("n_atoms", n_atoms as f64, ">= 2"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::param("ridge", ridge, "finite and >= 0"));
    }
    let certified = cone_membership(f, t, x_grid, CLASSIFY_TOL)?;
    let atoms = lattice(n_atoms);
    let xs = x_grid.points();
    let ys = xs.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let columns: Vec<Vec<f64>> = atoms
        .iter()
        .map(|&l| {
            xs.iter()
                .zip(&ys)
                .map(|(&x, &y)| kernels::power_mean(t, l, x) / y)
                .collect()
        })
        .collect();
    let target = vec![1.0; xs.len()];
    let problem = simplex::Problem {
        rows: xs.len(),
        cols: n_atoms,
        columns: &columns,
        target: &target,
        ridge,
    };
    let sol = simplex::solve(&problem, KKT_TOL, 50 * n_atoms)?;
    let measure = DiscreteMeasure::new(atoms, sol.weights)?;
    let fit_residual = sup_relative_error(&measure, t, f, x_grid)?;
    let residual = sup_relative_error(&measure, t, f, &x_grid.log_midpoints()?)?;
    Ok(MeasureFit {
        measure,
        t,
        residual,
        fit_residual,
        kkt_residual: sol.kkt_residual,
        iterations: sol.iterations,
        certified,
    })
}

/// `sup_x |∫p_t dμ − f(x)| / f(x)` over the grid.
pub fn sup_relative_error(
    mu: &DiscreteMeasure,
    t: f64,
    f: &RepresentingFunction,
    grid: &Grid,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in grid.points() {
        let y = f.eval(x)?;
        worst = worst.max((integrate_kernel(mu, t, x)? - y).abs() / y);
    }
    Ok(worst)
}

/// `F_{p,q}(x) = (∫₀¹ p_p(λ; x)^q dλ)^{1/q}` by adaptive quadrature, with the
/// geometric limit `exp ∫₀¹ ln p_p(λ; x) dλ` at `q = 0`.
pub fn power_diff_quadrature(p: f64, q: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::param("p", p, "in [-1, 1]"));
    }
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::param("q", q, "in [-1, 1]"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::param("x", x, "finite and > 0"));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if q.abs() < kernels::GUARD {
        let i = quadrature::integrate(
            |l| Ok(kernels::power_mean(p, l, x).ln()),
            0.0,
            1.0,
            QUADRATURE_TOL,
        )?;
        Ok(i.value.exp())
    } else {
        let i = quadrature::integrate(
            |l| Ok(kernels::power_mean(p, l, x).powf(q)),
            0.0,
            1.0,
            QUADRATURE_TOL,
        )?;
        Ok(i.value.powf(1.0 / q))
    }
}
