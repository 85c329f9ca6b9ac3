//! Kubo–Ando means of positive matrices,
//! `σ(A, B) = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcs::{builtin, power_kernel, RepresentingFunction};
use crate::spd::{congruence, HermitianMatrix, Matrix, SpdMatrix, SPD_TOL};

/// Regularisation schedule used by [`MatrixMean::mean_psd`].
pub const EPSILON_SCHEDULE: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Absolute slack allowed when checking that the Cauchy gaps shrink.
const GAP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MatrixMean {
    f: RepresentingFunction,
    epsilon: f64,
}

/// Result of a semi-definite mean: the last iterate of the ε-schedule and
/// the Frobenius gaps between consecutive iterates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdMean {
    #[serde(skip)]
    pub value: HermitianMatrix,
    pub gap: f64,
    pub gaps: Vec<f64>,
}

impl MatrixMean {
    pub fn new(f: RepresentingFunction) -> Self {
        MatrixMean { f, epsilon: 0.0 }
    }

    /// A mean that always evaluates on `A + εI`, `B + εI`.
    pub fn with_epsilon(f: RepresentingFunction, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", epsilon, "finite and >= 0"));
        }
        Ok(MatrixMean { f, epsilon })
    }

    pub fn function(&self) -> &RepresentingFunction {
        &self.f
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `σ(A, B)`. Both square roots of `A` come from one eigendecomposition
    /// and the result is symmetrized before the positivity check.
    pub fn mean(&self, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        if self.epsilon > 0.0 {
            let a = SpdMatrix::new(a.hermitian().shifted(self.epsilon))?;
            let b = SpdMatrix::new(b.hermitian().shifted(self.epsilon))?;
            return kubo_ando(&self.f, &a, &b);
        }
        kubo_ando(&self.f, a, b)
    }

    /// `lim_{ε↘0} σ(A + εI, B + εI)` for positive semi-definite `A`, `B`,
    /// evaluated along [`EPSILON_SCHEDULE`].
    pub fn mean_psd(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<PsdMean> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        check_psd(a)?;
        check_psd(b)?;
        let mut iterates: Vec<Matrix> = Vec::with_capacity(EPSILON_SCHEDULE.len());
        for &eps in &EPSILON_SCHEDULE {
            let ae = SpdMatrix::new(a.shifted(eps))?;
            let be = SpdMatrix::new(b.shifted(eps))?;
            iterates.push(kubo_ando(&self.f, &ae, &be)?.matrix().clone());
        }
        let gaps: Vec<f64> = iterates
            .windows(2)
            .map(|w| w[0].sub(&w[1]).frobenius_norm())
            .collect();
        if gaps.windows(2).any(|g| g[1] > g[0] + GAP_SLACK) {
            return Err(Error::Regularization { gaps });
        }
        let last = iterates.pop().expect("non-empty schedule");
        Ok(PsdMean {
            value: HermitianMatrix::from_symmetrized(&last),
            gap: *gaps.last().expect("two or more iterates"),
            gaps,
        })
    }
}

fn check_psd(a: &HermitianMatrix) -> Result<()> {
    let lo = a.min_eigenvalue()?;
    let scale = 1.0 + a.spectral_norm()?;
    if lo < -SPD_TOL * scale {
        return Err(Error::NotPositiveSemiDefinite { min_eigenvalue: lo });
    }
    Ok(())
}

fn kubo_ando(f: &RepresentingFunction, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    let eig = a.eigen();
    let root = eig.reconstruct_with(|x| Ok(x.sqrt()))?;
    let inv_root = eig.reconstruct_with(|x| Ok(1.0 / x.sqrt()))?;
    // A^{-1/2} B A^{-1/2} is positive definite but may be far more
    // ill-conditioned than A or B, so only strict positivity is required.
    let inner = congruence(inv_root.matrix(), b.hermitian())?.eigh()?;
    if inner.eigenvalues[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: inner.eigenvalues[0],
        });
    }
    let fc = inner.reconstruct_with(|x| f.eval(x))?;
    SpdMatrix::new(congruence(root.matrix(), &fc)?)
}

/// `P_t(λ; A, B)`, the matrix power mean.
pub fn power_mean_matrix(t: f64, lam: f64, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    MatrixMean::new(power_kernel(t, lam)?).mean(a, b)
}

/// `A ♯_λ B`.
pub fn geometric_mean_matrix(lam: f64, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    MatrixMean::new(builtin("geometric", &[lam])?).mean(a, b)
}

/// `(A ♯_t B + A ♯_{1−t} B) / 2`.
pub fn heinz_mean_matrix(t: f64, a: &SpdMatrix, b: &SpdMatrix) -> Result<SpdMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param("t", t, "in [0, 1]"));
    }
    let g1 = geometric_mean_matrix(t, a, b)?;
    let g2 = geometric_mean_matrix(1.0 - t, a, b)?;
    SpdMatrix::new(HermitianMatrix::from_symmetrized(
        &g1.matrix().add(g2.matrix()).scale(0.5),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::random_spd;

    fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).frobenius_norm() / b.frobenius_norm()
    }

    fn diag(d: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn arithmetic_is_average() {
        let m = MatrixMean::new(builtin("arithmetic", &[0.5]).unwrap());
        for seed in 0..5 {
            let a = random_spd(4, (-1.0, 1.0), seed).unwrap();
            let b = random_spd(4, (-1.0, 1.0), seed + 100).unwrap();
            let s = m.mean(&a, &b).unwrap();
            let expect = a.matrix().add(b.matrix()).scale(0.5);
            assert!(rel_err(s.matrix(), &expect) < 1e-12);
        }
    }

    #[test]
    fn geometric_examples() {
        let g = geometric_mean_matrix(0.5, &diag(&[1.0, 4.0]), &diag(&[4.0, 1.0])).unwrap();
        assert!(rel_err(g.matrix(), &Matrix::from_diagonal(&[2.0, 2.0])) < 1e-14);

        let a = SpdMatrix::from_matrix(Matrix::from_rows([[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let g = geometric_mean_matrix(0.5, &a, &SpdMatrix::identity(2)).unwrap();
        let ev = g.eigen().eigenvalues.clone();
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3f64.sqrt()).abs() < 1e-13);

        let g = geometric_mean_matrix(0.5, &diag(&[4.0, 16.0]), &SpdMatrix::identity(2)).unwrap();
        assert!(rel_err(g.matrix(), &Matrix::from_diagonal(&[2.0, 4.0])) < 1e-14);
    }

    #[test]
    fn identity_is_fixed() {
        for f in crate::funcs::standard_catalog() {
            let m = MatrixMean::new(f);
            let s = m
                .mean(&SpdMatrix::identity(3), &SpdMatrix::identity(3))
                .unwrap();
            assert!(s.matrix().sub(&Matrix::identity(3)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = MatrixMean::new(builtin("geometric", &[0.5]).unwrap());
        assert!(matches!(
            m.mean(&SpdMatrix::identity(2), &SpdMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_mean_closed_forms() {
        let a = random_spd(5, (-1.0, 1.0), 7).unwrap();
        let b = random_spd(5, (-1.0, 1.0), 8).unwrap();
        let lam = 0.3;
        let p1 = power_mean_matrix(1.0, lam, &a, &b).unwrap();
        let expect = a.matrix().scale(1.0 - lam).add(&b.matrix().scale(lam));
        assert!(rel_err(p1.matrix(), &expect) < 1e-9);

        let pm1 = power_mean_matrix(-1.0, lam, &a, &b).unwrap();
        let inv = a
            .inverse()
            .unwrap()
            .matrix()
            .scale(1.0 - lam)
            .add(&b.inverse().unwrap().matrix().scale(lam));
        let expect = SpdMatrix::from_matrix(inv.symmetrized())
            .unwrap()
            .inverse()
            .unwrap();
        assert!(rel_err(pm1.matrix(), expect.matrix()) < 1e-9);

        let h = power_mean_matrix(-1.0, 0.5, &diag(&[1.0, 1.0]), &diag(&[3.0, 3.0])).unwrap();
        assert!(rel_err(h.matrix(), &Matrix::from_diagonal(&[1.5, 1.5])) < 1e-14);

        for &t in &[-1.0, -0.3, 0.0, 0.6, 1.0] {
            let s = power_mean_matrix(t, 0.4, &a, &a).unwrap();
            assert!(rel_err(s.matrix(), a.matrix()) < 1e-12);
        }
    }

    #[test]
    fn heinz_examples() {
        let h = heinz_mean_matrix(0.25, &diag(&[1.0, 1.0]), &diag(&[16.0, 16.0])).unwrap();
        assert!(rel_err(h.matrix(), &Matrix::from_diagonal(&[5.0, 5.0])) < 1e-14);
        let a = random_spd(3, (-1.0, 1.0), 1).unwrap();
        let b = random_spd(3, (-1.0, 1.0), 2).unwrap();
        let h = heinz_mean_matrix(0.5, &a, &b).unwrap();
        let g = geometric_mean_matrix(0.5, &a, &b).unwrap();
        assert!(rel_err(h.matrix(), g.matrix()) < 1e-14);
        let h1 = heinz_mean_matrix(0.2, &a, &b).unwrap();
        let h2 = heinz_mean_matrix(0.8, &a, &b).unwrap();
        assert!(rel_err(h1.matrix(), h2.matrix()) < 1e-14);
        assert!(rel_err(heinz_mean_matrix(0.3, &a, &a).unwrap().matrix(), a.matrix()) < 1e-12);
    }

    #[test]
    fn psd_examples() {
        let geo = MatrixMean::new(builtin("geometric", &[0.5]).unwrap());
        let e1 = HermitianMatrix::from_diagonal(&[1.0, 0.0]);
        let e2 = HermitianMatrix::from_diagonal(&[0.0, 1.0]);

        let r = geo.mean_psd(&e1, &e1).unwrap();
        assert!(r.value.matrix().sub(e1.matrix()).max_abs() < 1e-7);

        let r = geo.mean_psd(&e1, &e2).unwrap();
        assert!(r.value.matrix().frobenius_norm() <= r.gap);
        assert_eq!(r.gaps.len(), 2);

        let ari = MatrixMean::new(builtin("arithmetic", &[0.5]).unwrap());
        let r = ari.mean_psd(&e1, &HermitianMatrix::identity(2)).unwrap();
        let expect = Matrix::from_diagonal(&[1.0, 0.5]);
        assert!(r.value.matrix().sub(&expect).max_abs() < 1e-7);

        let neg = HermitianMatrix::from_diagonal(&[1.0, -0.1]);
        assert!(matches!(
            geo.mean_psd(&neg, &e1),
            Err(Error::NotPositiveSemiDefinite { .. })
        ));
    }

    #[test]
    fn fixed_epsilon_regularises() {
        let m = MatrixMean::with_epsilon(builtin("arithmetic", &[0.5]).unwrap(), 0.5).unwrap();
        let s = m
            .mean(&SpdMatrix::identity(2), &SpdMatrix::identity(2))
            .unwrap();
        assert!(s.matrix().sub(&Matrix::identity(2).scale(1.5)).max_abs() < 1e-14);
        assert!(MatrixMean::with_epsilon(builtin("log", &[]).unwrap(), -1.0).is_err());
    }
}
