//! `opmeans` — classify representing functions, compute matrix means, fit
//! power-mean measures and run the randomised Ando–Hiai harness.
//!
//! Exit codes: 0 when the command succeeds and every checked property
//! holds, 1 for a violation or a `Neither` classification, 2 for usage,
//! parse and validation errors.

use std::env;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use opmeans::io::{self, fmt_f64, parse_function};
use opmeans::spd::MAX_DIM;
use opmeans::{
    classify, fit_measure, integrate_kernel, scalar_scan, standard_catalog, verify_ando_hiai,
    verify_axioms, verify_dual_ando_hiai, Classification, Error, Grid, HermitianMatrix, MatrixMean,
    RepresentingFunction, SpdMatrix, TrialConfig, TrialReport, Verdict, CLASSIFY_TOL,
};

const SEED_VAR: &str = "OPMEANS_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "opmeans",
    version,
    about = "Kubo-Ando operator means and the Ando-Hiai inequality"
)]
struct Cli {
    /// Emit a single JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a representing function as PMI, PMD, Boundary or Neither.
    #[command(allow_negative_numbers = true)]
    Classify {
        #[command(flatten)]
        func: FuncArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Scaled tolerance of the comparison x^f'(1) vs f(x).
        #[arg(long, default_value_t = CLASSIFY_TOL)]
        tol: f64,
    },
    /// Evaluate a function, or the kernel integral of a measure file.
    #[command(allow_negative_numbers = true)]
    Eval {
        /// Function spec; not needed with --measure.
        #[arg(long, required_unless_present = "measure")]
        func: Option<String>,
        /// Points to evaluate at (comma separated).
        #[arg(long, required = true, value_delimiter = ',')]
        x: Vec<f64>,
        /// Measure file; evaluates ∫ p_t(λ; x) dμ(λ).
        #[arg(long, conflicts_with = "func", requires = "kernel_t")]
        measure: Option<PathBuf>,
        /// Power-mean kernel exponent t ∈ [-1, 1] for --measure.
        #[arg(long)]
        kernel_t: Option<f64>,
    },
    /// Matrix mean of two matrix files, written as matrix JSON.
    #[command(allow_negative_numbers = true)]
    Matmean {
        #[command(flatten)]
        func: FuncArg,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Randomised verification: ando-hiai, dual or axioms.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(value_enum)]
        check: CheckArg,
        #[command(flatten)]
        func: FuncArg,
        #[command(flatten)]
        trials: TrialArgs,
    },
    /// Kubo-Ando axioms on random inputs (same as `verify axioms`).
    #[command(allow_negative_numbers = true)]
    Axioms {
        #[command(flatten)]
        func: FuncArg,
        #[command(flatten)]
        trials: TrialArgs,
    },
    /// Fit f ≈ ∫ p_t(λ; ·) dμ(λ) with a discrete measure on a uniform lattice.
    #[command(allow_negative_numbers = true)]
    Fit {
        #[command(flatten)]
        func: FuncArg,
        /// Kernel exponent t ∈ [-1, 1].
        #[arg(long)]
        kernel_t: f64,
        /// Number of lattice atoms i/(n-1).
        #[arg(long, default_value_t = 64)]
        atoms: usize,
        /// Where to write the fitted measure.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Signed gaps f(x)^r − f(x^r) over a grid.
    #[command(allow_negative_numbers = true)]
    Scan {
        #[command(flatten)]
        func: FuncArg,
        /// Exponents (comma separated).
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 3.0])]
        r: Vec<f64>,
        /// Write CSV (x,r,gap) instead of a table; takes precedence over --json.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CheckArg {
    AndoHiai,
    Dual,
    Axioms,
}

#[derive(Debug, Args)]
struct FuncArg {
    /// `name[:p1,p2]`, `expr:"<text>"`, `measure:<file>,t=<t>`, or `all`
    /// for the standard catalog where a command supports it.
    #[arg(long)]
    func: String,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Number of log-uniform grid points.
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-6)]
    grid_lo: f64,
    #[arg(long, default_value_t = 1e6)]
    grid_hi: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, Error> {
        Grid::log_uniform(self.grid_points, self.grid_lo, self.grid_hi)
    }
}

#[derive(Debug, Args)]
struct TrialArgs {
    #[arg(long, default_value_t = 500)]
    trials: u64,
    /// Matrix dimensions, cycled over trials (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5, 6])]
    dims: Vec<usize>,
    /// Exponents r ≥ 1 (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.0, 3.0])]
    r: Vec<f64>,
    /// Base seed; the environment variable OPMEANS_SEED takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = opmeans::spd::LOEWNER_TOL)]
    loewner_tol: f64,
    /// Eigenvalues of random inputs are 10^u with u ∈ [eig_lo, eig_hi].
    #[arg(long, default_value_t = -1.0)]
    eig_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    eig_hi: f64,
}

impl TrialArgs {
    fn config(&self) -> Result<TrialConfig, Error> {
        let seed = match env::var(SEED_VAR) {
            Ok(text) => text.trim().parse().map_err(|_| {
                Error::Config(format!("{SEED_VAR}=`{text}` is not an unsigned integer"))
            })?,
            Err(_) => self.seed,
        };
        let cfg = TrialConfig {
            trials: self.trials,
            dims: self.dims.clone(),
            r_values: self.r.clone(),
            seed,
            loewner_tol: self.loewner_tol,
            eig_log_range: (self.eig_lo, self.eig_hi),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Functions named by a spec; `all` expands to the standard catalog.
fn functions(spec: &str) -> Result<Vec<RepresentingFunction>, Error> {
    if spec.trim() == "all" {
        Ok(standard_catalog())
    } else {
        Ok(vec![parse_function(spec)?])
    }
}

fn single(spec: &str) -> Result<RepresentingFunction, Error> {
    if spec.trim() == "all" {
        return Err(Error::Config(
            "`all` is not accepted by this command".into(),
        ));
    }
    parse_function(spec)
}

#[derive(Serialize)]
struct Classified<'a> {
    function: String,
    #[serde(flatten)]
    classification: &'a Classification,
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    function: String,
    x: &'a [f64],
    values: &'a [f64],
}

/// Output of a command plus whether every checked property held.
struct Outcome {
    stdout: String,
    ok: bool,
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let json = cli.json;
    match &cli.command {
        Command::Classify { func, grid, tol } => {
            let grid = grid.grid()?;
            let fs = functions(&func.func)?;
            let mut rows = Vec::with_capacity(fs.len());
            for f in &fs {
                rows.push((f.label(), classify(f, &grid, *tol)?));
            }
            let ok = rows.iter().all(|(_, c)| c.verdict != Verdict::Neither);
            // classification is structured data: JSON is the default output
            let docs: Vec<Classified> = rows
                .iter()
                .map(|(label, c)| Classified {
                    function: label.clone(),
                    classification: c,
                })
                .collect();
            let mut stdout = if docs.len() == 1 {
                io::to_json(&docs[0])?
            } else {
                io::to_json(&docs)?
            };
            stdout.push('\n');
            Ok(Outcome { stdout, ok })
        }
        Command::Eval {
            func,
            x,
            measure,
            kernel_t,
        } => {
            let (label, values) = match (measure, func) {
                (Some(path), _) => {
                    let t = kernel_t.expect("clap enforces --kernel-t with --measure");
                    let mu = io::read_measure(path)?;
                    let values = x
                        .iter()
                        .map(|&x| integrate_kernel(&mu, t, x))
                        .collect::<Result<Vec<_>, _>>()?;
                    (
                        format!("measure:{},t={}", path.display(), fmt_f64(t)),
                        values,
                    )
                }
                (None, Some(spec)) => {
                    let f = single(spec)?;
                    let values = x
                        .iter()
                        .map(|&x| f.eval(x))
                        .collect::<Result<Vec<_>, _>>()?;
                    (f.label(), values)
                }
                (None, None) => unreachable!("clap requires --func or --measure"),
            };
            let stdout = if json {
                let mut s = io::to_json(&EvalOutput {
                    function: label,
                    x,
                    values: &values,
                })?;
                s.push('\n');
                s
            } else {
                values.iter().map(|&v| fmt_f64(v) + "\n").collect()
            };
            Ok(Outcome { stdout, ok: true })
        }
        Command::Matmean { func, a, b } => {
            let mean = MatrixMean::new(single(&func.func)?);
            let a = io::read_matrix(a)?;
            let b = io::read_matrix(b)?;
            let value = matmean(&mean, a, b)?;
            let mut stdout = io::matrix_json(&value)?;
            stdout.push('\n');
            Ok(Outcome { stdout, ok: true })
        }
        Command::Verify {
            check,
            func,
            trials,
        } => verify(*check, &func.func, trials, json),
        Command::Axioms { func, trials } => verify(CheckArg::Axioms, &func.func, trials, json),
        Command::Fit {
            func,
            kernel_t,
            atoms,
            out,
            ridge,
            grid,
        } => {
            let f = single(&func.func)?;
            let fit = fit_measure(&f, *kernel_t, *atoms, &grid.grid()?, *ridge)?;
            if let Some(path) = out {
                io::write_measure(path, &fit.measure)?;
                eprintln!("measure written to {}", path.display());
            }
            if !fit.certified {
                eprintln!(
                    "warning: {} is not certified in the cone C_{} on this grid; the fit is approximate",
                    f.label(),
                    fmt_f64(*kernel_t)
                );
            }
            let stdout = if json {
                io::to_json(&fit)? + "\n"
            } else {
                let support = fit.measure.weights().iter().filter(|&&w| w > 0.0).count();
                format!(
                    "function      {}\nkernel t      {}\natoms         {} ({} in support)\nresidual      {}\nfit residual  {}\nkkt residual  {}\nfirst moment  {}\ncertified     {}\n",
                    f.label(),
                    fmt_f64(fit.t),
                    fit.measure.atoms().len(),
                    support,
                    fmt_f64(fit.residual),
                    fmt_f64(fit.fit_residual),
                    fmt_f64(fit.kkt_residual),
                    fmt_f64(opmeans::first_moment(&fit.measure)),
                    fit.certified,
                )
            };
            Ok(Outcome { stdout, ok: true })
        }
        Command::Scan { func, r, csv, grid } => {
            let f = single(&func.func)?;
            let rows = scalar_scan(&f, r, &grid.grid()?)?;
            let stdout = if *csv {
                io::scan_csv(&rows)
            } else if json {
                io::to_json(&rows)? + "\n"
            } else {
                let mut s = format!("{:>24} {:>24} {:>24}\n", "x", "r", "gap");
                for row in &rows {
                    s.push_str(&format!(
                        "{:>24} {:>24} {:>24}\n",
                        fmt_f64(row.x),
                        fmt_f64(row.r),
                        fmt_f64(row.gap)
                    ));
                }
                s
            };
            Ok(Outcome { stdout, ok: true })
        }
    }
}

/// SPD inputs go straight through the closed form; semi-definite ones
/// through the ε-regularised limit.
fn matmean(
    mean: &MatrixMean,
    a: HermitianMatrix,
    b: HermitianMatrix,
) -> Result<HermitianMatrix, Error> {
    if a.dim() > MAX_DIM {
        return Err(Error::Shape(format!(
            "dimension {} exceeds {MAX_DIM}",
            a.dim()
        )));
    }
    match (SpdMatrix::new(a.clone()), SpdMatrix::new(b.clone())) {
        (Ok(a), Ok(b)) => Ok(mean.mean(&a, &b)?.hermitian().clone()),
        _ => {
            let psd = mean.mean_psd(&a, &b)?;
            eprintln!(
                "inputs are singular: regularised limit, final gap {}",
                fmt_f64(psd.gap)
            );
            Ok(psd.value)
        }
    }
}

fn verify(check: CheckArg, spec: &str, args: &TrialArgs, json: bool) -> Result<Outcome, Error> {
    let cfg = args.config()?;
    let mut reports = Vec::new();
    for f in functions(spec)? {
        let started = Instant::now();
        let report = match check {
            CheckArg::AndoHiai => verify_ando_hiai(&f, &cfg)?,
            CheckArg::Dual => verify_dual_ando_hiai(&f, &cfg)?,
            CheckArg::Axioms => verify_axioms(&f, &cfg)?,
        };
        eprintln!(
            "{}: {} trials in {:.3} s",
            report.function,
            cfg.trials,
            started.elapsed().as_secs_f64()
        );
        reports.push(report);
    }
    let ok = reports.iter().all(TrialReport::passed);
    let stdout = if json {
        let text = if reports.len() == 1 {
            io::to_json(&reports[0])?
        } else {
            io::to_json(&reports)?
        };
        text + "\n"
    } else {
        reports.iter().map(describe).collect()
    };
    Ok(Outcome { stdout, ok })
}

fn describe(report: &TrialReport) -> String {
    let check = match report.check {
        opmeans::harness::Check::AndoHiai => "ando-hiai",
        opmeans::harness::Check::Dual => "dual",
        opmeans::harness::Check::Axioms => "axioms",
    };
    let mode = match report.mode {
        opmeans::Mode::Certification => "certification",
        opmeans::Mode::Falsification => "falsification",
    };
    let status = if report.passed() { "PASS" } else { "FAIL" };
    let mut s = format!(
        "{status} {check} {} [{} {mode}] violations {}/{} worst excess {}\n",
        report.function,
        report.verdict,
        report.violations,
        report.total,
        fmt_f64(report.worst_excess)
    );
    if let Some(c) = report.first_violation {
        s.push_str(&format!(
            "  counterexample: trial {} (rng seed {}), dim {}, r {}\n",
            c.trial,
            report.config.seed ^ c.trial,
            c.dim,
            fmt_f64(c.r)
        ));
    }
    if let Some(gap) = report.max_hypothesis_gap {
        s.push_str(&format!("  hypothesis gap {}\n", fmt_f64(gap)));
    }
    for a in &report.axioms {
        s.push_str(&format!(
            "  {:<24} violations {}/{} worst excess {}\n",
            a.axiom,
            a.violations,
            a.checks,
            fmt_f64(a.worst_excess)
        ));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
