//! Seeded instance generators shared by the tests and the command line.
//!
//! Every generator draws from a caller-supplied [`SplitMix64`], so a seed fixes
//! the instance bit for bit.

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::flow::{FamilyKind, OperatorFamily};
use crate::herglotz::{OperatorHerglotz, RationalHerglotz};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::rng::SplitMix64;

/// Unperturbed operator: `(G + G*)/2` with standard normal entries.
pub fn unperturbed(rng: &mut SplitMix64, dim: usize) -> HermitianOperator {
    rng.hermitian(dim, 1.0)
}

/// `V(s) = s C1 + s^2 C2` with `C1 = (G + G*)/2 · scale` and
///
/// * `Linear`: no `C2`;
/// * `QuadraticConcave`: `C2 = -scale · B B* / dim`;
/// * `MatrixPolynomial`: `C2 = +scale · B B* / dim`, the convex negative control.
pub fn family(rng: &mut SplitMix64, kind: FamilyKind, dim: usize, scale: f64) -> Result<OperatorFamily> {
    if dim == 0 || !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("family needs dim >= 1 and finite scale >= 0, got {dim}, {scale}")));
    }
    let c1 = rng.hermitian(dim, scale);
    match kind {
        FamilyKind::Linear => Ok(OperatorFamily::linear(c1)),
        FamilyKind::QuadraticConcave => OperatorFamily::quadratic_concave(c1, rng.psd(dim, scale).scale(-1.0)),
        FamilyKind::MatrixPolynomial => OperatorFamily::polynomial(vec![c1, rng.psd(dim, scale)]),
    }
}

/// `(H0, V)` from one seed: `H0` is drawn first, then the family.
pub fn instance(seed: u64, kind: FamilyKind, dim: usize, scale: f64) -> Result<(HermitianOperator, OperatorFamily)> {
    let mut rng = SplitMix64::new(seed);
    let h0 = unperturbed(&mut rng, dim);
    Ok((h0, family(&mut rng, kind, dim, scale)?))
}

/// Two rational Herglotz functions and a contour around `[-1, 1]` (margin and
/// half-height `0.5`, so it encloses `[-1.5, 1.5]`).
#[derive(Debug, Clone)]
pub struct RationalPair {
    pub p: RationalHerglotz,
    pub q: RationalHerglotz,
    pub contour: Contour,
}

/// Poles are placed inside at `(-1.2, 1.2)` or outside at `(2, 5)`. When
/// `left_segment` is false, outside poles may also fall in `(-5, -2)`, so the
/// enclosed poles need not form a left segment.
pub fn rational_pair(rng: &mut SplitMix64, max_poles: usize, left_segment: bool) -> Result<RationalPair> {
    if max_poles == 0 {
        return Err(Error::invalid("rational_pair needs max_poles >= 1"));
    }
    let draw = |rng: &mut SplitMix64| -> Result<RationalHerglotz> {
        let count = rng.int_in(1, max_poles);
        let mut poles = Vec::with_capacity(count);
        while poles.len() < count {
            let p = match rng.int_in(0, 2) {
                0 => rng.uniform_in(-1.2, 1.2),
                1 => rng.uniform_in(2.0, 5.0),
                _ if left_segment => rng.uniform_in(2.0, 5.0),
                _ => rng.uniform_in(-5.0, -2.0),
            };
            if !poles.contains(&p) {
                poles.push(p);
            }
        }
        let weights = (0..count).map(|_| rng.uniform_in(0.1, 2.0)).collect();
        RationalHerglotz::new(poles, weights)
    };
    let p = draw(rng)?;
    let q = draw(rng)?;
    Ok(RationalPair {
        p,
        q,
        contour: Contour::new(-1.0, 1.0, 0.5, 0.5)?,
    })
}

/// `M_i(z) = K_i (L_i - z)^{-1} K_i*` with the contour `(a, b) = (0, 2)`,
/// margin `0.5`, half-height `1`.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub m1: OperatorHerglotz,
    pub m2: OperatorHerglotz,
    pub contour: Contour,
}

/// Each `L_i` has `inner_dim` eigenvalues, at least one in `(0.1, 1.9)` and
/// the others in `(0.1, 1.9)` or `(3, 6)`. `K_i` is `dim x inner_dim`
/// Gaussian times `scale`.
pub fn operator_pair(rng: &mut SplitMix64, dim: usize, inner_dim: usize, scale: f64) -> Result<OperatorPair> {
    if dim == 0 || inner_dim == 0 {
        return Err(Error::invalid("operator_pair needs positive dimensions"));
    }
    let draw = |rng: &mut SplitMix64| -> Result<OperatorHerglotz> {
        let eigenvalues: Vec<f64> = (0..inner_dim)
            .map(|i| {
                if i == 0 || rng.int_in(0, 1) == 0 {
                    rng.uniform_in(0.1, 1.9)
                } else {
                    rng.uniform_in(3.0, 6.0)
                }
            })
            .collect();
        let l = rng.with_spectrum(&eigenvalues);
        let k: ComplexMatrix = rng.complex_matrix(dim, inner_dim, scale);
        OperatorHerglotz::new(&k, &l)
    };
    let m1 = draw(rng)?;
    let m2 = draw(rng)?;
    Ok(OperatorPair {
        m1,
        m2,
        contour: Contour::new(0.0, 2.0, 1.0, 0.5)?,
    })
}

/// `H0 = [[A, εC], [εC*, D]]` with a `low_dim` Gaussian block `A`, a diagonal
/// `D = ±3·2^k` of `high_dim` widely spread modes and coupling `ε = 1e-4`.
/// The concave family acts on the low block only.
pub fn truncation_instance(
    rng: &mut SplitMix64,
    low_dim: usize,
    high_dim: usize,
    scale: f64,
) -> Result<(HermitianOperator, OperatorFamily)> {
    if low_dim == 0 {
        return Err(Error::invalid("truncation_instance needs low_dim >= 1"));
    }
    let n = low_dim + high_dim;
    let a = rng.hermitian(low_dim, 1.0);
    let c = rng.complex_matrix(low_dim, high_dim, 1e-4);
    let h0 = ComplexMatrix::from_fn(n, n, |r, k| match (r < low_dim, k < low_dim) {
        (true, true) => a.matrix()[(r, k)],
        (true, false) => c[(r, k - low_dim)],
        (false, true) => c[(k, r - low_dim)].conj(),
        (false, false) if r == k => {
            let j = r - low_dim;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (sign * 3.0 * 2f64.powi((j / 2) as i32)).into()
        }
        _ => 0.0.into(),
    });
    let embed = |m: &HermitianOperator| {
        HermitianOperator::from_hermitian_part(&ComplexMatrix::from_fn(n, n, |r, k| {
            if r < low_dim && k < low_dim {
                m.matrix()[(r, k)]
            } else {
                0.0.into()
            }
        }))
    };
    let low = family(rng, FamilyKind::QuadraticConcave, low_dim, scale)?;
    let coefficients: Vec<HermitianOperator> = low.coefficients().iter().map(embed).collect();
    let fam = OperatorFamily::quadratic_concave(coefficients[0].clone(), coefficients[1].clone())?;
    Ok((HermitianOperator::from_hermitian_part(&h0), fam))
}
