//! Dense real symmetric linear algebra on small matrices.
//!
//! Everything here works on row-major `f64` storage. Symmetric matrices are
//! diagonalised with cyclic Jacobi rotations, which gives orthogonal
//! eigenvectors to working precision and is bit-for-bit deterministic.
//! Matrix functions, powers and the Loewner order are all built on top of
//! [`eigh`].

use std::ops::{Index, IndexMut};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// Relative tolerance used when checking symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative floor on the smallest eigenvalue of an [`SpdMatrix`].
pub const SPD_TOL: f64 = 1e-12;

/// Default relative tolerance of [`loewner_leq`].
pub const LOEWNER_TOL: f64 = 1e-9;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim,
                dim,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite entry {v}")));
        }
        Ok(Matrix { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Matrix {
            dim: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut t = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "sub dimension mismatch");
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        let n = self.dim;
        let mut s = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(Matrix);

impl HermitianMatrix {
    /// Validates symmetry at `1e-12 · (1 + max|entry|)`.
    pub fn new(m: Matrix) -> Result<Self> {
        let n = m.dim();
        let tol = SYMMETRY_TOL * (1.0 + m.max_abs());
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > tol {
                    return Err(Error::NotSymmetric { i, j, a, b });
                }
            }
        }
        Ok(HermitianMatrix(m))
    }

    /// Symmetrizes `m` instead of validating it.
    pub fn from_symmetrized(m: &Matrix) -> Self {
        HermitianMatrix(m.symmetrized())
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(Matrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        HermitianMatrix(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        eigh(self)
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(c))
    }

    /// Adds `eps` to the diagonal.
    pub fn shifted(&self, eps: f64) -> HermitianMatrix {
        let mut m = self.0.clone();
        for i in 0..m.dim() {
            m[(i, i)] += eps;
        }
        HermitianMatrix(m)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.eigenvalues[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigh()?.eigenvalues.last().expect("non-empty"))
    }

    /// Spectral norm `max |λ|`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let e = self.eigh()?;
        Ok(e.eigenvalues[0]
            .abs()
            .max(e.eigenvalues[e.eigenvalues.len() - 1].abs()))
    }

    /// Applies `phi` to the spectrum.
    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        self.eigh()?.reconstruct_with(|x| Ok(phi(x)))
    }
}

/// Symmetric positive definite matrix together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: HermitianMatrix,
    eig: EigenDecomposition,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl SpdMatrix {
    /// Rejects matrices with `λ_min ≤ 1e-12 · (1 + ‖A‖₂)`.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let eig = matrix.eigh()?;
        let lo = eig.eigenvalues[0];
        let norm = lo
            .abs()
            .max(eig.eigenvalues[eig.eigenvalues.len() - 1].abs());
        if lo <= SPD_TOL * (1.0 + norm) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
        }
        Ok(SpdMatrix { matrix, eig })
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &Matrix {
        self.matrix.matrix()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.eigenvalues[self.eig.eigenvalues.len() - 1]
    }

    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        apply_function(self, phi)
    }

    pub fn try_apply(&self, phi: impl Fn(f64) -> Result<f64>) -> Result<HermitianMatrix> {
        self.eig.reconstruct_with(phi)
    }

    /// `c · A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<SpdMatrix> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("scale", c, "positive and finite"));
        }
        Ok(SpdMatrix {
            matrix: self.matrix.scale(c),
            eig: EigenDecomposition {
                eigenvalues: self.eig.eigenvalues.iter().map(|v| v * c).collect(),
                basis: self.eig.basis.clone(),
            },
        })
    }

    /// `A⁻¹`.
    pub fn inverse(&self) -> Result<SpdMatrix> {
        SpdMatrix::new(self.try_apply(|x| Ok(1.0 / x))?)
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// stored as the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: Matrix,
}

impl EigenDecomposition {
    /// `Q · diag(φ(λ)) · Qᵀ`, symmetrized.
    pub fn reconstruct_with(&self, phi: impl Fn(f64) -> Result<f64>) -> Result<HermitianMatrix> {
        let n = self.basis.dim();
        let mut values = Vec::with_capacity(n);
        for &lam in &self.eigenvalues {
            let v = phi(lam)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteAtEigenvalue { eigenvalue: lam });
            }
            values.push(v);
        }
        let q = &self.basis;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[(i, k)] * values[k] * q[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        Ok(HermitianMatrix(out))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(Ok).expect("identity map is finite")
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm is at most
/// `1e-13 · ‖H‖_F`, with a cap of 100 sweeps.
pub fn eigh(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = Matrix::identity(n);
    let target = JACOBI_REL_TOL * a.frobenius_norm();

    let off_norm = |a: &Matrix| {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[(p, q)] * a[(p, q)];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                } else {
                    // |theta| overflowed: t ~ 1/(2 theta)
                    apq / (aqq - app)
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    a[(k, p)] = np;
                    a[(p, k)] = np;
                    a[(k, q)] = nq;
                    a[(q, k)] = nq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut basis = Matrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = v[(row, src)];
        }
    }
    Ok(EigenDecomposition { eigenvalues, basis })
}

/// `φ(A)` through the spectral decomposition of `A`.
pub fn apply_function(a: &SpdMatrix, phi: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    a.eig.reconstruct_with(|x| Ok(phi(x)))
}

/// `A^r` for `r ≥ 0`.
pub fn power(a: &SpdMatrix, r: f64) -> Result<SpdMatrix> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param("r", r, "finite and >= 0"));
    }
    if r == 1.0 {
        return Ok(a.clone());
    }
    if r == 0.0 {
        return Ok(SpdMatrix::identity(a.dim()));
    }
    SpdMatrix::new(apply_function(a, |x| x.powf(r))?)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Signed, scale-normalised violation of `A ≤ B`:
/// `λ_max(A − B) / (1 + ‖A‖₂ + ‖B‖₂)`. Non-positive iff `A ≤ B` exactly.
pub fn loewner_excess(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let scale = 1.0 + a.spectral_norm()? + b.spectral_norm()?;
    let diff = b.sub(a);
    Ok(-diff.min_eigenvalue()? / scale)
}

/// `A ≤ B` in the Loewner order: `λ_min(B − A) ≥ −tol · (1 + ‖A‖₂ + ‖B‖₂)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(loewner_excess(a, b)? <= tol)
}

/// `Xᵀ A X`.
pub fn congruence(x: &Matrix, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(x.dim(), a.dim())?;
    let m = x.transpose().matmul(a.matrix()).matmul(x);
    Ok(HermitianMatrix::from_symmetrized(&m))
}

/// Orthogonal matrix from Gram–Schmidt on a Gaussian matrix drawn from `rng`.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Matrix {
    loop {
        let cols: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        if let Some(q) = orthonormalize(cols) {
            return q;
        }
    }
}

// Modified Gram-Schmidt, two passes. Columns of the result are the
// orthonormalised inputs; None on numerical rank deficiency.
fn orthonormalize(mut cols: Vec<Vec<f64>>) -> Option<Matrix> {
    let n = cols.len();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let d: f64 = head[i].iter().zip(&tail[0]).map(|(a, b)| a * b).sum();
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= d * h;
                }
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        cols[j].iter_mut().for_each(|v| *v /= norm);
    }
    let mut q = Matrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q[(i, j)] = v;
        }
    }
    Some(q)
}

fn check_spd_request(dim: usize, range: (f64, f64)) -> Result<()> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::param("dim", dim as f64, "1 <= dim <= 64"));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::param(
            "log_eig_range",
            hi - lo,
            "finite with lo <= hi",
        ));
    }
    Ok(())
}

/// Random SPD matrix with eigenvalues log-uniform in `[10^lo, 10^hi]`,
/// drawing from an existing generator.
pub fn random_spd_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    log_eig_range: (f64, f64),
) -> Result<SpdMatrix> {
    check_spd_request(dim, log_eig_range)?;
    let (lo, hi) = log_eig_range;
    let q = random_orthogonal(rng, dim);
    let eigs: Vec<f64> = (0..dim)
        .map(|_| {
            let e = if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            };
            10f64.powf(e)
        })
        .collect();
    let mut m = Matrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let s: f64 = (0..dim).map(|k| q[(i, k)] * eigs[k] * q[(j, k)]).sum();
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    SpdMatrix::new(HermitianMatrix(m))
}

/// Deterministic random SPD matrix: same `(dim, range, seed)`, same matrix.
pub fn random_spd(dim: usize, log_eig_range: (f64, f64), seed: u64) -> Result<SpdMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_spd_with(&mut rng, dim, log_eig_range)
}

/// On-disk matrix format: `{"dim": n, "data": [n·n numbers, row-major]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    pub fn into_hermitian(self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(Matrix::from_row_major(self.dim, self.data)?)
    }
}

impl From<&HermitianMatrix> for MatrixFile {
    fn from(m: &HermitianMatrix) -> Self {
        MatrixFile {
            dim: m.dim(),
            data: m.matrix().as_slice().to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn eigh_diagonal_is_sorted_permutation() {
        let e = eigh(&HermitianMatrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        assert_eq!(e.basis, Matrix::from_rows([[0.0, 1.0], [1.0, 0.0]]));
    }

    #[test]
    fn eigh_identity() {
        let e = eigh(&HermitianMatrix::identity(4)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn eigh_two_by_two() {
        let h = HermitianMatrix::new(Matrix::from_rows([[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let e = eigh(&h).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!(close(e.reconstruct().matrix(), h.matrix(), 1e-14));
    }

    #[test]
    fn rejects_asymmetric_with_pair() {
        let err = HermitianMatrix::new(Matrix::from_rows([[1.0, 2.0], [2.5, 1.0]])).unwrap_err();
        assert_eq!(
            err,
            Error::NotSymmetric {
                i: 0,
                j: 1,
                a: 2.0,
                b: 2.5
            }
        );
    }

    #[test]
    fn apply_function_examples() {
        let a = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let r = a.apply(f64::sqrt).unwrap();
        assert!(close(
            r.matrix(),
            &Matrix::from_diagonal(&[1.0, 2.0]),
            1e-15
        ));

        let a = SpdMatrix::from_matrix(Matrix::from_rows([[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let sq = a.apply(|x| x * x).unwrap();
        let oracle = a.matrix().matmul(a.matrix());
        assert!(close(sq.matrix(), &oracle, 1e-13));
        assert!(close(a.apply(|x| x).unwrap().matrix(), a.matrix(), 1e-14));
    }

    #[test]
    fn apply_function_reports_eigenvalue() {
        let a = SpdMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let err = a.apply(|x| if x > 2.0 { f64::NAN } else { x }).unwrap_err();
        assert_eq!(err, Error::NonFiniteAtEigenvalue { eigenvalue: 4.0 });
    }

    #[test]
    fn power_examples() {
        let a = SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let h = power(&a, 0.5).unwrap();
        assert!(close(
            h.matrix(),
            &Matrix::from_diagonal(&[2.0, 3.0]),
            1e-15
        ));
        assert_eq!(power(&a, 1.0).unwrap(), a);
        assert_eq!(power(&a, 0.0).unwrap(), SpdMatrix::identity(2));
        let b = SpdMatrix::from_matrix(Matrix::from_rows([[2.0, 1.0], [1.0, 2.0]])).unwrap();
        let sq = power(&b, 2.0).unwrap();
        assert!(close(
            sq.matrix(),
            &Matrix::from_rows([[5.0, 4.0], [4.0, 5.0]]),
            1e-13
        ));
        assert!(power(&b, -1.0).is_err());
    }

    #[test]
    fn loewner_examples() {
        let i = HermitianMatrix::identity(2);
        let two = i.scale(2.0);
        assert!(loewner_leq(&i, &two, LOEWNER_TOL).unwrap());
        assert!(!loewner_leq(&two, &i, LOEWNER_TOL).unwrap());
        let a = HermitianMatrix::from_diagonal(&[1.0, 3.0]);
        let b = HermitianMatrix::from_diagonal(&[2.0, 2.0]);
        assert!(!loewner_leq(&a, &b, LOEWNER_TOL).unwrap());
        assert!(loewner_leq(&a, &a, LOEWNER_TOL).unwrap());
        assert!(matches!(
            loewner_leq(&a, &HermitianMatrix::identity(3), LOEWNER_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn congruence_examples() {
        let a = HermitianMatrix::new(Matrix::from_rows([[2.0, 1.0], [1.0, 3.0]])).unwrap();
        assert_eq!(congruence(&Matrix::identity(2), &a).unwrap(), a);
        let four = congruence(
            &Matrix::identity(2).scale(2.0),
            &HermitianMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(four.matrix(), &Matrix::identity(2).scale(4.0));
        let x = Matrix::from_rows([[1.0, 1.0], [0.0, 1.0]]);
        let c = congruence(&x, &HermitianMatrix::identity(2)).unwrap();
        assert_eq!(c.matrix(), &Matrix::from_rows([[1.0, 1.0], [1.0, 2.0]]));
    }

    #[test]
    fn random_spd_determinism_and_range() {
        let a = random_spd(3, (-3.0, 3.0), 42).unwrap();
        let b = random_spd(3, (-3.0, 3.0), 42).unwrap();
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
        let one = random_spd(1, (0.0, 0.0), 7).unwrap();
        assert_eq!(one.matrix().as_slice(), &[1.0]);
        for seed in 0..100 {
            let m = random_spd(6, (-3.0, 3.0), seed).unwrap();
            assert!(m.min_eigenvalue() >= 1e-3 * (1.0 - 1e-9), "seed {seed}");
            assert!(m.max_eigenvalue() <= 1e3 * (1.0 + 1e-9), "seed {seed}");
        }
        assert!(random_spd(0, (0.0, 1.0), 0).is_err());
        assert!(random_spd(65, (0.0, 1.0), 0).is_err());
        assert!(random_spd(2, (1.0, 0.0), 0).is_err());
    }

    #[test]
    fn spd_rejects_singular() {
        let err = SpdMatrix::from_diagonal(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn matrix_file_validation() {
        let f = MatrixFile {
            dim: 2,
            data: vec![1.0, 0.5, 0.5],
        };
        assert!(matches!(f.into_hermitian(), Err(Error::Shape(_))));
        let f: MatrixFile = serde_json::from_str(r#"{"dim":2,"data":[1,0.5,0.5,2]}"#).unwrap();
        let h = f.into_hermitian().unwrap();
        assert_eq!(h.matrix()[(1, 1)], 2.0);
    }
}
