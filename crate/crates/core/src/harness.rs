//! Randomised verification of matrix inequalities: the Ando–Hiai
//! implication `σ(A,B) ≤ I ⟹ σ(A^r,B^r) ≤ I`, its dual with `≥`, and the
//! Kubo–Ando axioms.
//!
//! Every trial draws from its own generator seeded with `seed ^ trial`, so
//! results do not depend on how rayon schedules the trials. Per-trial
//! outcomes are collected in trial order and reduced sequentially.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::{classify, Grid, RepresentingFunction, Verdict, CLASSIFY_TOL};
use crate::means::MatrixMean;
use crate::spd::{
    congruence, loewner_excess, power, random_orthogonal, random_spd_with, HermitianMatrix, Matrix,
    SpdMatrix, LOEWNER_TOL, MAX_DIM,
};

/// Relative Frobenius gap allowed in the transformer equality for
/// invertible congruences.
pub const EQUALITY_TOL: f64 = 1e-8;

/// Allowed `max |σ(I, I) − I|`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub dims: Vec<usize>,
    pub r_values: Vec<f64>,
    pub seed: u64,
    pub loewner_tol: f64,
    /// Eigenvalues of the random inputs are `10^u`, `u` uniform in this range.
    pub eig_log_range: (f64, f64),
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            trials: 500,
            dims: vec![2, 3, 4, 5, 6],
            r_values: vec![1.5, 2.0, 3.0],
            seed: 0,
            loewner_tol: LOEWNER_TOL,
            eig_log_range: (-1.0, 1.0),
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Config("dims must not be empty".into()));
        }
        if let Some(d) = self.dims.iter().find(|d| !(1..=MAX_DIM).contains(*d)) {
            return Err(Error::Config(format!(
                "dimension {d} outside [1, {MAX_DIM}]"
            )));
        }
        if self.r_values.is_empty() {
            return Err(Error::Config("r_values must not be empty".into()));
        }
        if let Some(r) = self
            .r_values
            .iter()
            .find(|r| !(**r >= 1.0 && r.is_finite()))
        {
            return Err(Error::Config(format!("r = {r} must be finite and >= 1")));
        }
        if !(self.loewner_tol >= 0.0 && self.loewner_tol.is_finite()) {
            return Err(Error::Config(format!(
                "loewner_tol = {} invalid",
                self.loewner_tol
            )));
        }
        let (lo, hi) = self.eig_log_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("eig_log_range ({lo}, {hi}) invalid")));
        }
        Ok(())
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ trial)
    }

    fn dim(&self, trial: u64) -> usize {
        self.dims[(trial % self.dims.len() as u64) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    AndoHiai,
    Dual,
    Axioms,
}

/// Certification runs expect no violation; falsification runs go looking
/// for one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Certification,
    Falsification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case {
    /// Trial index; the trial's generator is seeded with `seed ^ trial`.
    pub trial: u64,
    pub dim: usize,
    pub r: f64,
}

/// Whether the excess at the largest `r` was at least the excess at the
/// smallest `r`, counted over trials. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RMonotonicity {
    pub r_low: f64,
    pub r_high: f64,
    pub trials_holding: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResult {
    pub axiom: &'static str,
    pub checks: u64,
    pub violations: u64,
    pub worst_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub function: String,
    pub check: Check,
    pub mode: Mode,
    pub verdict: Verdict,
    pub config: TrialConfig,
    pub total: u64,
    pub violations: u64,
    pub worst_excess: f64,
    pub worst_case: Option<Case>,
    pub first_violation: Option<Case>,
    /// Largest `|λ_max(σ(A, B)) − 1|` (resp. `λ_min`) after rescaling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_hypothesis_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_monotonicity: Option<RMonotonicity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axioms: Vec<AxiomResult>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TrialReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// The report with `elapsed` zeroed, for comparisons.
    pub fn without_timing(mut self) -> Self {
        self.elapsed = Duration::ZERO;
        self
    }
}

fn verdict_of(f: &RepresentingFunction) -> Result<Verdict> {
    Ok(classify(f, &Grid::default(), CLASSIFY_TOL)?.verdict)
}

/// Runs `body` for every trial in parallel, in trial order, turning the
/// first failure into an error naming the trial.
fn run_trials<T, F>(cfg: &TrialConfig, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng, usize) -> Result<T> + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<Result<T>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = cfg.rng(trial);
            body(trial, &mut rng, cfg.dim(trial)).map_err(|e| Error::Trial {
                trial,
                reason: e.to_string(),
            })
        })
        .collect();
    outcomes.into_iter().collect()
}

struct PowerTrial {
    dim: usize,
    hypothesis_gap: f64,
    /// Excess for each `r` in `cfg.r_values` order.
    excess: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Side {
    Upper,
    Lower,
}

fn power_trial(
    mean: &MatrixMean,
    cfg: &TrialConfig,
    rng: &mut ChaCha8Rng,
    dim: usize,
    side: Side,
) -> Result<PowerTrial> {
    let a = random_spd_with(rng, dim, cfg.eig_log_range)?;
    let b = random_spd_with(rng, dim, cfg.eig_log_range)?;
    let m = mean.mean(&a, &b)?;
    let s = match side {
        Side::Upper => m.max_eigenvalue(),
        Side::Lower => m.min_eigenvalue(),
    };
    // positive homogeneity: σ(A/s, B/s) = σ(A, B)/s touches I
    let (a, b) = (a.scale(1.0 / s)?, b.scale(1.0 / s)?);
    let m = mean.mean(&a, &b)?;
    let hypothesis_gap = match side {
        Side::Upper => (m.max_eigenvalue() - 1.0).abs(),
        Side::Lower => (m.min_eigenvalue() - 1.0).abs(),
    };
    let mut excess = Vec::with_capacity(cfg.r_values.len());
    for &r in &cfg.r_values {
        let mr = mean.mean(&power(&a, r)?, &power(&b, r)?)?;
        excess.push(match side {
            Side::Upper => mr.max_eigenvalue() - 1.0,
            Side::Lower => 1.0 - mr.min_eigenvalue(),
        });
    }
    Ok(PowerTrial {
        dim,
        hypothesis_gap,
        excess,
    })
}

fn power_report(
    f: &RepresentingFunction,
    cfg: &TrialConfig,
    check: Check,
    side: Side,
) -> Result<TrialReport> {
    let start = Instant::now();
    let verdict = verdict_of(f)?;
    let certifies = match side {
        Side::Upper => verdict.in_pmi(),
        Side::Lower => verdict.in_pmd(),
    };
    let mean = MatrixMean::new(f.clone());
    let trials = run_trials(cfg, |_, rng, dim| power_trial(&mean, cfg, rng, dim, side))?;

    let mut report = TrialReport {
        function: f.label(),
        check,
        mode: if certifies {
            Mode::Certification
        } else {
            Mode::Falsification
        },
        verdict,
        config: cfg.clone(),
        total: cfg.trials * cfg.r_values.len() as u64,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        worst_case: None,
        first_violation: None,
        max_hypothesis_gap: Some(0.0),
        r_monotonicity: None,
        axioms: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let r_low = cfg.r_values.iter().copied().fold(f64::INFINITY, f64::min);
    let r_high = cfg
        .r_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let i_low = cfg
        .r_values
        .iter()
        .position(|&r| r == r_low)
        .expect("non-empty");
    let i_high = cfg
        .r_values
        .iter()
        .position(|&r| r == r_high)
        .expect("non-empty");
    let mut holding = 0;
    for (trial, t) in trials.iter().enumerate() {
        let trial = trial as u64;
        report.max_hypothesis_gap = report.max_hypothesis_gap.map(|g| g.max(t.hypothesis_gap));
        for (&r, &e) in cfg.r_values.iter().zip(&t.excess) {
            let case = Case {
                trial,
                dim: t.dim,
                r,
            };
            if e > report.worst_excess {
                report.worst_excess = e;
                report.worst_case = Some(case);
            }
            if e > cfg.loewner_tol {
                report.violations += 1;
                report.first_violation.get_or_insert(case);
            }
        }
        if t.excess[i_high] >= t.excess[i_low] {
            holding += 1;
        }
    }
    if r_low < r_high {
        report.r_monotonicity = Some(RMonotonicity {
            r_low,
            r_high,
            trials_holding: holding,
            trials: cfg.trials,
        });
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Samples `σ(A, B) ≤ I` tightly (rescaling by `λ_max σ(A, B)`) and records
/// `λ_max σ(A^r, B^r) − 1` for every `r`.
///
/// Runs in certification mode when `f` classifies as PMI or Boundary and in
/// falsification mode otherwise; the statistics gathered are the same.
pub fn verify_ando_hiai(f: &RepresentingFunction, cfg: &TrialConfig) -> Result<TrialReport> {
    power_report(f, cfg, Check::AndoHiai, Side::Upper)
}

/// Mirror of [`verify_ando_hiai`]: rescales by `λ_min σ(A, B)` and records
/// `1 − λ_min σ(A^r, B^r)`.
pub fn verify_dual_ando_hiai(f: &RepresentingFunction, cfg: &TrialConfig) -> Result<TrialReport> {
    power_report(f, cfg, Check::Dual, Side::Lower)
}

const AXIOM_NAMES: [&str; 5] = [
    "monotonicity",
    "transformer-invertible",
    "transformer-singular",
    "semicontinuity",
    "normalization",
];

/// Worst excess per axiom for one trial, in [`AXIOM_NAMES`] order, paired
/// with whether it counts as a violation.
struct AxiomTrial {
    dim: usize,
    results: [(f64, bool); 5],
}

/// Positive semi-definite `G Gᵀ` of random rank in `[1, dim]`, scaled to
/// spectral norm at most `size`.
fn random_psd_increment(rng: &mut ChaCha8Rng, dim: usize, size: f64) -> Result<HermitianMatrix> {
    let rank = rng.random_range(1..=dim);
    let mut g = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..rank {
            g[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let p = HermitianMatrix::from_symmetrized(&g.matmul(&g.transpose()));
    let norm = p.spectral_norm()?;
    Ok(if norm > 0.0 { p.scale(size / norm) } else { p })
}

/// `Q₁ diag(s) Q₂ᵀ` with `s` log-uniform in `[10^-0.5, 10^0.5]`; the last
/// `zeros` singular values are set to 0.
fn random_square(rng: &mut ChaCha8Rng, dim: usize, zeros: usize) -> Matrix {
    let q1 = random_orthogonal(rng, dim);
    let q2 = random_orthogonal(rng, dim);
    let s: Vec<f64> = (0..dim)
        .map(|i| {
            let v = 10f64.powf(rng.random_range(-0.5..0.5));
            if i + zeros >= dim {
                0.0
            } else {
                v
            }
        })
        .collect();
    q1.matmul(&Matrix::from_diagonal(&s))
        .matmul(&q2.transpose())
}

fn axiom_trial(
    mean: &MatrixMean,
    cfg: &TrialConfig,
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> Result<AxiomTrial> {
    let tol = cfg.loewner_tol;
    let a = random_spd_with(rng, dim, cfg.eig_log_range)?;
    let b = random_spd_with(rng, dim, cfg.eig_log_range)?;
    let sigma = mean.mean(&a, &b)?;

    // (1) A ≤ C, B ≤ D ⟹ σ(A, B) ≤ σ(C, D)
    let size = rng.random_range(0.0..1.0) * a.max_eigenvalue();
    let c = SpdMatrix::new(a.hermitian().add(&random_psd_increment(rng, dim, size)?))?;
    let size = rng.random_range(0.0..1.0) * b.max_eigenvalue();
    let d = SpdMatrix::new(b.hermitian().add(&random_psd_increment(rng, dim, size)?))?;
    let mono = loewner_excess(sigma.hermitian(), mean.mean(&c, &d)?.hermitian())?;

    // (2) invertible X: Xᵀ σ(A, B) X = σ(XᵀAX, XᵀBX)
    let x = random_square(rng, dim, 0);
    let lhs = congruence(&x, sigma.hermitian())?;
    let rhs = mean.mean(
        &SpdMatrix::new(congruence(&x, a.hermitian())?)?,
        &SpdMatrix::new(congruence(&x, b.hermitian())?)?,
    )?;
    let eq_gap = lhs.matrix().sub(rhs.matrix()).frobenius_norm() / rhs.matrix().frobenius_norm();

    // (2) singular X: Xᵀ σ(A, B) X ≤ σ(XᵀAX, XᵀBX), the right side through
    // the ε-schedule; its Cauchy gap is granted as extra slack
    let zeros = if dim == 1 {
        1
    } else {
        rng.random_range(1..dim)
    };
    let x = random_square(rng, dim, zeros);
    let lhs = congruence(&x, sigma.hermitian())?;
    let psd = mean.mean_psd(
        &congruence(&x, a.hermitian())?,
        &congruence(&x, b.hermitian())?,
    );
    let (sing, semi) = match psd {
        Ok(r) => {
            let scale = 1.0 + lhs.spectral_norm()? + r.value.spectral_norm()?;
            let excess = loewner_excess(&lhs, &r.value)? - r.gap / scale;
            ((excess, excess > tol), (r.gap, false))
        }
        Err(Error::Regularization { gaps }) => {
            let last = gaps.last().copied().unwrap_or(f64::INFINITY);
            ((f64::NAN, false), (last, true))
        }
        Err(e) => return Err(e),
    };

    // (4) σ(I, I) = I
    let id = SpdMatrix::identity(dim);
    let norm = mean
        .mean(&id, &id)?
        .matrix()
        .sub(&Matrix::identity(dim))
        .max_abs();

    Ok(AxiomTrial {
        dim,
        results: [
            (mono, mono > tol),
            (eq_gap, eq_gap > EQUALITY_TOL),
            sing,
            semi,
            (norm, norm > NORMALIZATION_TOL),
        ],
    })
}

/// Per trial: monotonicity under random PSD increments, the transformer
/// equality for an invertible congruence, the transformer inequality for a
/// singular one, convergence of the ε-schedule on the resulting singular
/// pair (a finite-dimensional stand-in for upper semi-continuity), and
/// `σ(I, I) = I`.
pub fn verify_axioms(f: &RepresentingFunction, cfg: &TrialConfig) -> Result<TrialReport> {
    let start = Instant::now();
    let verdict = verdict_of(f)?;
    let mean = MatrixMean::new(f.clone());
    let trials = run_trials(cfg, |_, rng, dim| axiom_trial(&mean, cfg, rng, dim))?;

    let mut axioms: Vec<AxiomResult> = AXIOM_NAMES
        .iter()
        .map(|&axiom| AxiomResult {
            axiom,
            checks: cfg.trials,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
        })
        .collect();
    let mut report = TrialReport {
        function: f.label(),
        check: Check::Axioms,
        mode: Mode::Certification,
        verdict,
        config: cfg.clone(),
        total: cfg.trials * AXIOM_NAMES.len() as u64,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        worst_case: None,
        first_violation: None,
        max_hypothesis_gap: None,
        r_monotonicity: None,
        axioms: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for (trial, t) in trials.iter().enumerate() {
        let case = Case {
            trial: trial as u64,
            dim: t.dim,
            r: 1.0,
        };
        for (k, &(excess, violated)) in t.results.iter().enumerate() {
            let ax = &mut axioms[k];
            if excess > ax.worst_excess {
                ax.worst_excess = excess;
            }
            // the Loewner-type checks share a scale and feed the headline
            if k < 3 && excess > report.worst_excess {
                report.worst_excess = excess;
                report.worst_case = Some(case);
            }
            if violated {
                ax.violations += 1;
                report.violations += 1;
                report.first_violation.get_or_insert(case);
            }
        }
    }
    report.axioms = axioms;
    report.elapsed = start.elapsed();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub r: f64,
    /// `f(x)^r − f(x^r)`.
    pub gap: f64,
}

/// Signed gaps `f(x)^r − f(x^r)` for every `r` and grid point, `r` outer.
pub fn scalar_scan(f: &RepresentingFunction, r_list: &[f64], grid: &Grid) -> Result<Vec<ScanRow>> {
    if let Some(&r) = r_list.iter().find(|r| !r.is_finite()) {
        return Err(Error::param("r", r, "finite"));
    }
    let mut rows = Vec::with_capacity(r_list.len() * grid.len());
    for &r in r_list {
        for &x in grid.points() {
            rows.push(ScanRow {
                x,
                r,
                gap: f.eval(x)?.powf(r) - f.eval(x.powf(r))?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::builtin;

    fn small(trials: u64) -> TrialConfig {
        TrialConfig {
            trials,
            dims: vec![2, 3],
            ..TrialConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrialConfig::default().validate().is_ok());
        let bad = [
            TrialConfig {
                trials: 0,
                ..small(1)
            },
            TrialConfig {
                dims: vec![],
                ..small(1)
            },
            TrialConfig {
                dims: vec![65],
                ..small(1)
            },
            TrialConfig {
                r_values: vec![0.5],
                ..small(1)
            },
            TrialConfig {
                eig_log_range: (1.0, 0.0),
                ..small(1)
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn geometric_certifies() {
        let f = builtin("geometric", &[0.5]).unwrap();
        let r = verify_ando_hiai(&f, &small(40)).unwrap();
        assert_eq!(r.mode, Mode::Certification);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.total, 120);
        assert!(r.max_hypothesis_gap.unwrap() < 1e-10);
        let d = verify_dual_ando_hiai(&f, &small(40)).unwrap();
        assert!(d.passed(), "{d:?}");
    }

    #[test]
    fn r_one_is_tight() {
        let cfg = TrialConfig {
            r_values: vec![1.0],
            ..small(20)
        };
        for f in [
            builtin("log", &[]).unwrap(),
            builtin("harmonic", &[0.5]).unwrap(),
        ] {
            let r = verify_ando_hiai(&f, &cfg).unwrap();
            assert!(r.passed());
            assert!(r.worst_excess.abs() < 1e-10);
            assert!(r.r_monotonicity.is_none());
        }
    }

    #[test]
    fn deterministic_reports() {
        let f = builtin("log", &[]).unwrap();
        let a = verify_ando_hiai(&f, &small(30)).unwrap().without_timing();
        let b = verify_ando_hiai(&f, &small(30)).unwrap().without_timing();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool
            .install(|| verify_ando_hiai(&f, &small(30)))
            .unwrap()
            .without_timing();
        assert_eq!(a, c);
    }

    #[test]
    fn arithmetic_axioms() {
        let f = builtin("arithmetic", &[0.5]).unwrap();
        let r = verify_axioms(&f, &small(30)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.worst_excess <= 1e-10);
        assert_eq!(r.axioms.len(), 5);
    }

    #[test]
    fn scan_examples() {
        let grid = Grid::from_points(vec![4.0, 9.0]).unwrap();
        let rows = scalar_scan(&builtin("geometric", &[0.3]).unwrap(), &[2.0, 3.0], &grid).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.gap.abs() < 1e-12));

        let grid = Grid::from_points(vec![4.0, 5.0]).unwrap();
        let log = scalar_scan(&builtin("log", &[]).unwrap(), &[2.0], &grid).unwrap();
        assert!(log[0].gap < 0.0);
        let harm = scalar_scan(&builtin("harmonic", &[0.5]).unwrap(), &[2.0], &grid).unwrap();
        assert!((harm[0].gap - (2.56 - 32.0 / 17.0)).abs() < 1e-12);
    }
}
