use num_complex::Complex64;

use super::{ComplexMatrix, HermitianOperator, RealInterval};
use crate::contour::Contour;
use crate::error::{Error, Result};

/// Orthogonal projection onto the eigenvectors of `a` whose eigenvalues lie in
/// `delta`. Membership is decided by exact comparison of computed eigenvalues.
pub fn spectral_projection(a: &HermitianOperator, delta: &RealInterval) -> Result<HermitianOperator> {
    let d = a.spectrum()?;
    let mask: Vec<f64> = d
        .eigenvalues
        .iter()
        .map(|&l| if delta.contains(l) { 1.0 } else { 0.0 })
        .collect();
    Ok(HermitianOperator::from_hermitian_part(&d.reconstruct(&mask)))
}

/// `tr(W E_A(Δ))` evaluated in the eigenbasis of `a`.
pub fn projected_trace(w: &HermitianOperator, a: &HermitianOperator, delta: &RealInterval) -> Result<f64> {
    w.check_same_dim(a, "projected trace")?;
    let d = a.spectrum()?;
    Ok(d.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| delta.contains(l))
        .map(|(k, _)| d.expectation(w.matrix(), k))
        .sum())
}

/// `φ(A) = U diag(φ(λ_k)) U*`.
pub fn apply_function(a: &HermitianOperator, phi: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let d = a.spectrum()?;
    let values = mapped_eigenvalues(&d.eigenvalues, phi)?;
    Ok(HermitianOperator::from_hermitian_part(&d.reconstruct(&values)))
}

/// `tr(W φ(A))` in the eigenbasis of `a`.
pub fn trace_weighted_function(
    w: &HermitianOperator,
    a: &HermitianOperator,
    phi: impl Fn(f64) -> f64,
) -> Result<f64> {
    w.check_same_dim(a, "weighted function trace")?;
    let d = a.spectrum()?;
    let values = mapped_eigenvalues(&d.eigenvalues, phi)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(k, &v)| v * d.expectation(w.matrix(), k))
        .sum())
}

/// `tr φ(A) = Σ φ(λ_k)`.
pub fn trace_function(a: &HermitianOperator, phi: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(mapped_eigenvalues(a.eigenvalues()?, phi)?.iter().sum())
}

fn mapped_eigenvalues(eigenvalues: &[f64], phi: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    eigenvalues
        .iter()
        .map(|&l| {
            let v = phi(l);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteFunctionValue { eigenvalue: l })
            }
        })
        .collect()
}

/// `(A - z)^{-1}` by LU factorization, independent of the eigensolver.
pub fn resolvent(a: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    a.shifted(z).inverse()
}

/// Riesz-integral functional calculus `(1/2πi) ∮_Γ φ(z) (A - z)^{-1} dz` over
/// the clockwise contour, Hermitized.
pub fn riesz_apply(
    a: &HermitianOperator,
    phi: impl Fn(Complex64) -> Complex64,
    contour: &Contour,
    n_points: usize,
) -> Result<HermitianOperator> {
    if n_points < 16 {
        return Err(Error::invalid("riesz_apply needs at least 16 quadrature points"));
    }
    for &l in a.eigenvalues()? {
        if !contour.encloses_real(l) {
            return Err(Error::OutsideContour { eigenvalue: l });
        }
        contour.check_clearance(l, n_points)?;
    }
    let n = a.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for node in contour.nodes(n_points) {
        let r = resolvent(a.matrix(), node.z)?;
        acc = &acc + &r.scale(phi(node.z) * node.w);
    }
    let acc = acc.scale(Complex64::new(0.0, -1.0 / std::f64::consts::TAU));
    Ok(HermitianOperator::from_hermitian_part(&acc))
}

/// Real part of the trace; the imaginary part of a Hermitian trace is rounding.
pub fn trace(a: &HermitianOperator) -> f64 {
    a.matrix().trace().re
}

/// Supported Schatten exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Four,
    Infinity,
}

/// Schatten norm from singular values, which are `|λ_k|` for Hermitian input.
pub fn schatten_norm(a: &HermitianOperator, p: SchattenP) -> Result<f64> {
    let sv = a.eigenvalues()?.iter().map(|l| l.abs());
    Ok(match p {
        SchattenP::One => sv.sum(),
        SchattenP::Two => sv.map(|s| s * s).sum::<f64>().sqrt(),
        SchattenP::Four => sv.map(|s| s.powi(4)).sum::<f64>().powf(0.25),
        SchattenP::Infinity => sv.fold(0.0, f64::max),
    })
}
