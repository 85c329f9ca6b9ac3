//! Kubo–Ando operator means and the power-monotonicity of their
//! representing functions.
//!
//! * [`spd`] — dense symmetric matrices, a Jacobi eigensolver, functional
//!   calculus and the Loewner order.
//! * [`funcs`] — representing functions: the catalog, adjoint and perp
//!   transforms, and the PMI/PMD classifier.
//! * [`expr`] — a small expression language for user functions.
//! * [`measure`] — power-mean integral representations and measure fitting.
//! * [`means`] — matrix means `A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`.
//! * [`harness`] — randomised Ando–Hiai and axiom verification.
//! * [`io`] — number formatting, JSON/CSV output and function specs.
//!
//! ```
//! use opmeans::{builtin, classify, Grid, MatrixMean, SpdMatrix, Verdict, CLASSIFY_TOL};
//!
//! let log = builtin("log", &[]).unwrap();
//! let c = classify(&log, &Grid::default(), CLASSIFY_TOL).unwrap();
//! assert_eq!(c.verdict, Verdict::Pmi);
//!
//! let a = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
//! let b = SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
//! let g = MatrixMean::new(builtin("geometric", &[0.5]).unwrap()).mean(&a, &b).unwrap();
//! assert!((g.matrix()[(0, 0)] - 2.0).abs() < 1e-14);
//! ```

pub mod error;
pub mod expr;
pub mod funcs;
pub mod harness;
pub mod io;
pub mod means;
pub mod measure;
pub mod quadrature;
pub mod spd;

pub use error::{Error, Result};
pub use expr::{Ast, ParseError};
pub use funcs::{
    adjoint, builtin, classify, cone_membership, ma_bound_check, perp, pmi_lemma_crosscheck,
    power_kernel, standard_catalog, weight_at_one, Classification, Grid, RepresentingFunction,
    Verdict, CLASSIFY_TOL,
};
pub use harness::{
    scalar_scan, verify_ando_hiai, verify_axioms, verify_dual_ando_hiai, Mode, TrialConfig,
    TrialReport,
};
pub use means::{geometric_mean_matrix, heinz_mean_matrix, power_mean_matrix, MatrixMean, PsdMean};
pub use measure::{
    first_moment, fit_measure, integrate_kernel, power_diff_quadrature, DiscreteMeasure, MeasureFit,
};
pub use spd::{EigenDecomposition, HermitianMatrix, Matrix, SpdMatrix};
