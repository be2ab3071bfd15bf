use std::sync::OnceLock;

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Dense self-adjoint operator on `C^n`.
///
/// The stored matrix is always exactly Hermitian: construction accepts inputs
/// that are Hermitian up to rounding and keeps `(A + A*) / 2`. The spectral
/// decomposition is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: OnceLock<SpectralDecomposition>,
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > 1e-12 * (1.0 + matrix.max_abs()) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_hermitian_part(&matrix))
    }

    /// Keeps the Hermitian part of an arbitrary square matrix without checking
    /// how far the input was from self-adjoint.
    pub fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real(n, n, entries)?)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn zero(n: usize) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::identity(n))
    }

    /// `U diag(values) U*` for a unitary `U`.
    pub fn from_eigenpairs(values: &[f64], unitary: &ComplexMatrix) -> Self {
        Self::from_hermitian_part(&reconstruct(unitary, values))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Cached spectral decomposition.
    pub fn spectrum(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let decomposition = eig_hermitian(self)?;
        let _ = self.spectrum.set(decomposition);
        Ok(self.spectrum.get().expect("spectrum was just set"))
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.spectrum()?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("operators have positive dimension"))
    }

    pub fn check_same_dim(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_hermitian_part(&(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_hermitian_part(&(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_hermitian_part(&self.matrix.scale_real(c))
    }

    /// Real trace of `self * other` for Hermitian `other`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        self.matrix.trace_of_product(&other.matrix).re
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `u_k* W u_k`.
    pub fn expectation(&self, w: &ComplexMatrix, k: usize) -> f64 {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += w[(i, j)] * u[(j, k)];
            }
            acc += u[(i, k)].conj() * row;
        }
        acc.re
    }

    /// `U diag(values) U*`.
    pub fn reconstruct(&self, values: &[f64]) -> ComplexMatrix {
        reconstruct(&self.eigenvectors, values)
    }
}

fn reconstruct(u: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = u.rows();
    assert_eq!(values.len(), u.cols());
    ComplexMatrix::from_fn(n, n, |i, j| {
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, &v)| u[(i, k)] * u[(j, k)].conj() * v)
            .sum()
    })
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending. Each eigenvector is normalized so that its
/// first largest-modulus component is real and nonnegative, which makes the
/// output a deterministic function of the input bits.
pub fn eig_hermitian(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();

    let mut converged = scale == 0.0 || n == 1;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweep += 1;
        converged = off_diagonal_norm(&m) <= 4.0 * f64::EPSILON * scale;
    }
    if !converged {
        return Err(Error::EigenNoConvergence { dim: n, sweeps: sweep });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    for k in 0..n {
        fix_phase(&mut eigenvectors, k);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation annihilating `m[(p, q)]`, accumulated into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Phase-rotate the pair to a real symmetric 2x2 block, then apply the
    // classical real rotation.
    let phase = apq / abs;
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(app - t * abs, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * abs, 0.0);

    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

fn fix_phase(u: &mut ComplexMatrix, k: usize) {
    let n = u.rows();
    let mut best = 0;
    let mut best_mod = -1.0;
    for i in 0..n {
        let m = u[(i, k)].norm();
        if m > best_mod {
            best = i;
            best_mod = m;
        }
    }
    if best_mod <= 0.0 {
        return;
    }
    let rot = u[(best, k)].conj() / best_mod;
    for i in 0..n {
        u[(i, k)] *= rot;
    }
    u[(best, k)] = Complex64::new(u[(best, k)].norm(), 0.0);
}
