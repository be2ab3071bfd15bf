//! Rational and resolvent-type Herglotz functions, their clockwise contour
//! integrals, and the partition of `(a, b)` used to split such an integral into
//! manifestly nonnegative residue sums.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::function::SmoothFunction;
use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Distance below which `z` counts as sitting on a pole.
const POLE_GUARD: f64 = 1e-12;
/// Real poles closer than this to the contour are rejected outright.
const BOUNDARY_GUARD: f64 = 1e-10;

/// `P(z) = Σ_j A_j / (p_j - z)` with `A_j >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalHerglotz {
    poles: Vec<f64>,
    weights: Vec<f64>,
}

impl RationalHerglotz {
    pub fn new(poles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if poles.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                context: "rational Herglotz weights",
                expected: poles.len(),
                found: weights.len(),
            });
        }
        if poles.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::invalid("poles and weights must be finite"));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("Herglotz weights must be nonnegative"));
        }
        let mut sorted = poles.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("poles must be distinct"));
        }
        Ok(Self { poles, weights })
    }

    pub fn empty() -> Self {
        Self {
            poles: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .map(|(&p, &a)| a / (p - z))
            .sum()
    }
}

fn check_pole_boundary(contour: &Contour, poles: &[f64]) -> Result<()> {
    for &p in poles {
        let distance = contour.distance(Complex64::new(p, 0.0));
        if distance < BOUNDARY_GUARD {
            return Err(Error::ContourClearance {
                point: Complex64::new(p, 0.0),
                distance,
                required: BOUNDARY_GUARD,
            });
        }
    }
    Ok(())
}

/// Residue evaluation of `(1/2πi) ∮ P Q dz` over the clockwise contour:
/// `Σ_{j in, l out} A_j B_l / (q_l - p_j) + Σ_{j out, l in} A_j B_l / (p_j - q_l)`.
///
/// Valid for any pole configuration off the contour. No ordering hypothesis is
/// checked, so this also serves the negative control.
pub fn lemma21_closed_form(p: &RationalHerglotz, q: &RationalHerglotz, contour: &Contour) -> Result<f64> {
    check_pole_boundary(contour, &p.poles)?;
    check_pole_boundary(contour, &q.poles)?;
    let mut total = 0.0;
    for (&pj, &aj) in p.poles.iter().zip(&p.weights) {
        let pj_in = contour.encloses_real(pj);
        for (&ql, &bl) in q.poles.iter().zip(&q.weights) {
            match (pj_in, contour.encloses_real(ql)) {
                (true, false) => total += aj * bl / (ql - pj),
                (false, true) => total += aj * bl / (pj - ql),
                _ => {}
            }
        }
    }
    Ok(total)
}

/// [`lemma21_closed_form`] under the hypothesis that the contour encloses
/// poles "from the left": every enclosed pole of `P` or `Q` lies strictly
/// below every pole left outside. The result is then nonnegative.
pub fn lemma21_residue(p: &RationalHerglotz, q: &RationalHerglotz, contour: &Contour) -> Result<f64> {
    let all = p.poles.iter().chain(&q.poles).copied();
    let (inside, outside): (Vec<f64>, Vec<f64>) = all.partition(|&x| contour.encloses_real(x));
    let top_in = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom_out = outside.iter().copied().fold(f64::INFINITY, f64::min);
    if top_in >= bottom_out {
        return Err(Error::LeftSegmentViolated {
            interior: top_in,
            exterior: bottom_out,
        });
    }
    lemma21_closed_form(p, q, contour)
}

/// Sum over contour nodes in parallel, accumulated in node order.
fn ordered_contour_sum(
    contour: &Contour,
    n_points: usize,
    f: impl Fn(Complex64) -> Result<Complex64> + Sync,
) -> Result<Complex64> {
    let terms: Vec<Complex64> = contour
        .nodes(n_points)
        .par_iter()
        .map(|node| Ok(f(node.z)? * node.w))
        .collect::<Result<_>>()?;
    let sum: Complex64 = terms.iter().sum();
    Ok(sum / Complex64::new(0.0, std::f64::consts::TAU))
}

fn real_part(value: Complex64, tolerance: f64) -> Result<f64> {
    if value.im.abs() > tolerance {
        return Err(Error::ImaginaryResidual { value: value.im });
    }
    Ok(value.re)
}

/// `(1/2πi) ∮ P Q dz` by quadrature. Poles closer to the contour than
/// `1e-3 * perimeter / n_points` are rejected; increase `half_height` or
/// `margin` to clear them.
pub fn lemma21_quadrature(p: &RationalHerglotz, q: &RationalHerglotz, contour: &Contour, n_points: usize) -> Result<f64> {
    if n_points < 64 {
        return Err(Error::invalid("lemma21_quadrature needs n_points >= 64"));
    }
    for &x in p.poles.iter().chain(&q.poles) {
        contour.check_clearance(x, n_points)?;
    }
    let value = ordered_contour_sum(contour, n_points, |z| Ok(p.eval(z) * q.eval(z)))?;
    real_part(value, 1e-8)
}

/// `M(z) = K (L - z)^{-1} K*`, stored as poles `p_i` (eigenvalues of `L`) and
/// weight columns `w_i = K u_i`, so that `M(z) = Σ_i w_i w_i* / (p_i - z)`.
#[derive(Debug, Clone)]
pub struct OperatorHerglotz {
    poles: Vec<f64>,
    weights: ComplexMatrix,
}

impl OperatorHerglotz {
    pub fn new(k: &ComplexMatrix, l: &HermitianOperator) -> Result<Self> {
        if k.cols() != l.dim() {
            return Err(Error::DimensionMismatch {
                context: "K columns vs L dimension",
                expected: l.dim(),
                found: k.cols(),
            });
        }
        let d = l.spectrum()?;
        Ok(Self {
            poles: d.eigenvalues.clone(),
            weights: k * &d.eigenvectors,
        })
    }

    /// Output dimension `n` of the `n x n` values.
    pub fn dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    fn weight(&self, i: usize, r: usize) -> Complex64 {
        self.weights[(r, i)]
    }

    /// Keeps the poles for which `keep(index, pole)` returns a new location.
    fn remapped(&self, keep: impl Fn(usize, f64) -> Option<f64>) -> Self {
        let selected: Vec<(usize, f64)> = self
            .poles
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| keep(i, p).map(|q| (i, q)))
            .collect();
        let n = self.dim();
        let weights = ComplexMatrix::from_fn(n, selected.len(), |r, c| self.weight(selected[c].0, r));
        Self {
            poles: selected.iter().map(|s| s.1).collect(),
            weights,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        for &p in &self.poles {
            if (z - p).norm() < POLE_GUARD {
                return Err(Error::NearEigenvalue {
                    z,
                    eigenvalue: p,
                    distance: (z - p).norm(),
                });
            }
        }
        let n = self.dim();
        let inv: Vec<Complex64> = self.poles.iter().map(|&p| 1.0 / (p - z)).collect();
        Ok(ComplexMatrix::from_fn(n, n, |r, c| {
            inv.iter()
                .enumerate()
                .map(|(i, d)| self.weight(i, r) * self.weight(i, c).conj() * d)
                .sum()
        }))
    }

    /// `Σ_i w_i w_i* / (p_i - t)` over poles `p_i` at or above `b`, the part
    /// of the function carried by the spectral subspace of `[b, inf)`.
    pub fn upper_part_at(&self, t: f64, b: f64) -> Result<HermitianOperator> {
        let upper = self.remapped(|_, p| (p >= b).then_some(p));
        Ok(HermitianOperator::from_hermitian_part(&upper.eval(Complex64::new(t, 0.0))?))
    }
}

/// `(1/2πi) ∮ φ(z) tr(M1(z) M2(z)) dz` with no hypothesis checks.
pub fn contour_trace_unchecked(
    m1: &OperatorHerglotz,
    m2: &OperatorHerglotz,
    phi: impl Fn(Complex64) -> Complex64 + Sync,
    contour: &Contour,
    n_points: usize,
) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            context: "M1 and M2 output dimension",
            expected: m1.dim(),
            found: m2.dim(),
        });
    }
    let value = ordered_contour_sum(contour, n_points, |z| {
        Ok(phi(z) * m1.eval(z)?.trace_of_product(&m2.eval(z)?))
    })?;
    real_part(value, 1e-8 * (1.0 + value.re.abs()))
}

fn hypothesis(name: &'static str, detail: String) -> Error {
    Error::Hypothesis { name, detail }
}

/// Checks the spectral hypotheses of the positivity theorem for the pair on
/// `contour`: both spectra clear the contour, `a` lies below both spectra, and
/// every enclosed eigenvalue lies in `(a, b)`.
pub fn check_spectral_hypotheses(
    m1: &OperatorHerglotz,
    m2: &OperatorHerglotz,
    contour: &Contour,
    n_points: usize,
) -> Result<()> {
    for (label, m) in [("L1", m1), ("L2", m2)] {
        for &p in m.poles() {
            if contour.check_clearance(p, n_points).is_err() {
                return Err(hypothesis(
                    "spectrum_clears_contour",
                    format!("eigenvalue {p} of {label} is within the quadrature clearance of the contour"),
                ));
            }
        }
        if let Some(&lowest) = m.poles().first() {
            if !(contour.a < lowest) {
                return Err(hypothesis(
                    "a_below_spectrum",
                    format!("a = {} is not below min spec({label}) = {lowest}", contour.a),
                ));
            }
        }
        for &p in m.poles() {
            if contour.encloses_real(p) && !(p > contour.a && p < contour.b) {
                return Err(hypothesis(
                    "enclosed_spectrum_in_(a,b)",
                    format!("eigenvalue {p} of {label} is enclosed but outside ({}, {})", contour.a, contour.b),
                ));
            }
        }
    }
    Ok(())
}

/// `(1/2πi) ∮ φ(z) tr(M1(z) M2(z)) dz` after [`check_spectral_hypotheses`].
/// For `φ >= 0`, `φ' <= 0` on `(a, b)` the result is nonnegative.
pub fn contour_trace_integral(
    m1: &OperatorHerglotz,
    m2: &OperatorHerglotz,
    phi: impl Fn(Complex64) -> Complex64 + Sync,
    contour: &Contour,
    n_points: usize,
) -> Result<f64> {
    check_spectral_hypotheses(m1, m2, contour, n_points)?;
    contour_trace_unchecked(m1, m2, phi, contour, n_points)
}

/// Sampled check of `φ >= 0` and `φ' <= 0` on `(a, b)`.
pub fn phi_admissible(phi: &SmoothFunction, a: f64, b: f64) -> bool {
    (1..200).all(|i| {
        let x = a + (b - a) * i as f64 / 200.0;
        phi.value(x) >= 0.0 && phi.derivative(x) <= 0.0
    })
}

/// Location of a real point relative to the partition `a = t_0 < ... < t_n = b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    /// `λ <= a`.
    Below,
    /// `λ ∈ [t_{k-1}, t_k) ∩ (a, b)`, `k` in `1..=n`.
    Inside(usize),
    /// `λ >= b`.
    Above,
}

/// `t_k = a + k (b - a) / n`, with `t_n = b` exactly.
pub fn partition_point(a: f64, b: f64, n: usize, k: usize) -> f64 {
    if k == n {
        b
    } else {
        a + k as f64 * (b - a) / n as f64
    }
}

pub fn partition_cell(lambda: f64, a: f64, b: f64, n: usize) -> Cell {
    if lambda <= a {
        return Cell::Below;
    }
    if lambda >= b {
        return Cell::Above;
    }
    let mut k = (((lambda - a) / (b - a) * n as f64).floor() as usize + 1).clamp(1, n);
    while k > 1 && lambda < partition_point(a, b, n, k - 1) {
        k -= 1;
    }
    while k < n && lambda >= partition_point(a, b, n, k) {
        k += 1;
    }
    Cell::Inside(k)
}

/// `χ⁽ⁿ⁾` on `(a, b)`, identity elsewhere.
pub fn discretize_point(lambda: f64, a: f64, b: f64, n: usize) -> f64 {
    match partition_cell(lambda, a, b, n) {
        Cell::Inside(k) => partition_point(a, b, n, k),
        _ => lambda,
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub operator: HermitianOperator,
    /// Eigenvalues of `L` strictly below `a`, which the theorem excludes and
    /// which are kept unchanged.
    pub below_a: usize,
}

/// `L⁽ⁿ⁾`: eigenvalues in `(a, b)` moved to the right end of their partition
/// cell, all others kept.
pub fn discretize_l(l: &HermitianOperator, a: f64, b: f64, n: usize) -> Result<Discretization> {
    check_partition(a, b, n)?;
    let d = l.spectrum()?;
    let values: Vec<f64> = d.eigenvalues.iter().map(|&x| discretize_point(x, a, b, n)).collect();
    Ok(Discretization {
        operator: HermitianOperator::from_eigenpairs(&values, &d.eigenvectors),
        below_a: d.eigenvalues.iter().filter(|&&x| x < a).count(),
    })
}

fn check_partition(a: f64, b: f64, n: usize) -> Result<()> {
    if n == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("partition needs a < b and n >= 1, got ({a}, {b}), n = {n}")));
    }
    Ok(())
}

impl OperatorHerglotz {
    /// `K (L⁽ⁿ⁾ - z)^{-1} K*`.
    pub fn discretized(&self, a: f64, b: f64, n: usize) -> Result<Self> {
        check_partition(a, b, n)?;
        Ok(self.remapped(|_, p| Some(discretize_point(p, a, b, n))))
    }
}

/// `N(z) = Σ_k Q_k / (t_k - z)` with positive semidefinite `Q_k`.
#[derive(Debug, Clone)]
pub struct MatrixRationalHerglotz {
    pub poles: Vec<f64>,
    pub residues: Vec<HermitianOperator>,
}

impl MatrixRationalHerglotz {
    pub fn new(poles: Vec<f64>, residues: Vec<HermitianOperator>) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix rational residues",
                expected: poles.len(),
                found: residues.len(),
            });
        }
        if poles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("poles must be strictly ascending"));
        }
        for q in &residues {
            let low = q.min_eigenvalue()?;
            if low < -1e-10 {
                return Err(Error::invalid(format!("residue has negative eigenvalue {low}")));
            }
        }
        Ok(Self { poles, residues })
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let n = self.residues.first().map_or(0, |q| q.dim());
        let mut acc = ComplexMatrix::zeros(n, n);
        for (&t, q) in self.poles.iter().zip(&self.residues) {
            if (z - t).norm() < POLE_GUARD {
                return Err(Error::NearEigenvalue {
                    z,
                    eigenvalue: t,
                    distance: (z - t).norm(),
                });
            }
            acc = &acc + &q.matrix().scale(1.0 / (t - z));
        }
        Ok(acc)
    }
}

/// `Q_k = K E_L([t_{k-1}, t_k) ∩ (a, b)) K*` for `k = 1..=n`.
pub fn residue_blocks(m: &OperatorHerglotz, a: f64, b: f64, n: usize) -> Result<MatrixRationalHerglotz> {
    check_partition(a, b, n)?;
    let dim = m.dim();
    let mut blocks = vec![ComplexMatrix::zeros(dim, dim); n];
    for (i, &p) in m.poles.iter().enumerate() {
        if let Cell::Inside(k) = partition_cell(p, a, b, n) {
            let outer = ComplexMatrix::from_fn(dim, dim, |r, c| m.weight(i, r) * m.weight(i, c).conj());
            blocks[k - 1] = &blocks[k - 1] + &outer;
        }
    }
    MatrixRationalHerglotz::new(
        (1..=n).map(|k| partition_point(a, b, n, k)).collect(),
        blocks.iter().map(HermitianOperator::from_hermitian_part).collect(),
    )
}

/// The four-term split of the discretized contour integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JDecomposition {
    pub n: usize,
    pub j1: f64,
    pub j2: f64,
    pub j2_quadrature: f64,
    pub j3: f64,
    pub j4: f64,
    pub total: f64,
    pub quadrature_total: f64,
}

/// Residue evaluation of the split of `(1/2πi) ∮ φ tr(M1⁽ⁿ⁾ M2⁽ⁿ⁾)` into
/// the interior-interior (`J1`), exterior-exterior (`J2 = 0`) and mixed
/// (`J3`, `J4`) parts, together with quadrature of `J2` and of the whole
/// discretized integral. The partition uses the contour's `a` and `b`.
pub fn j_decomposition(
    m1: &OperatorHerglotz,
    m2: &OperatorHerglotz,
    phi: &SmoothFunction,
    contour: &Contour,
    n: usize,
    n_points: usize,
) -> Result<JDecomposition> {
    check_spectral_hypotheses(m1, m2, contour, n_points)?;
    let analytic = phi.analytic_extension()?;
    let (a, b) = (contour.a, contour.b);
    let q1 = residue_blocks(m1, a, b, n)?;
    let q2 = residue_blocks(m2, a, b, n)?;
    let t = &q1.poles;
    let occupied = |q: &MatrixRationalHerglotz| -> Vec<usize> {
        (0..n).filter(|&k| q.residues[k].matrix().max_abs() > 0.0).collect()
    };
    let (k1, k2) = (occupied(&q1), occupied(&q2));

    let mut j1 = 0.0;
    for &k in &k1 {
        for &m in &k2 {
            let overlap = q1.residues[k].trace_product(&q2.residues[m]);
            j1 += if k == m {
                -phi.derivative(t[k]) * overlap
            } else {
                -(phi.value(t[k]) - phi.value(t[m])) / (t[k] - t[m]) * overlap
            };
        }
    }
    let mixed = |upper: &OperatorHerglotz, blocks: &MatrixRationalHerglotz, ks: &[usize]| -> Result<f64> {
        let mut sum = 0.0;
        for &k in ks {
            let tilde = upper.upper_part_at(t[k], b)?;
            sum += phi.value(t[k]) * tilde.trace_product(&blocks.residues[k]);
        }
        Ok(sum)
    };
    let j3 = mixed(m1, &q2, &k2)?;
    let j4 = mixed(m2, &q1, &k1)?;

    let upper1 = m1.remapped(|_, p| (p >= b).then_some(p));
    let upper2 = m2.remapped(|_, p| (p >= b).then_some(p));
    let phi_z = |z: Complex64| analytic(z);
    let j2_quadrature = contour_trace_unchecked(&upper1, &upper2, phi_z, contour, n_points)?;
    let quadrature_total = contour_trace_unchecked(
        &m1.discretized(a, b, n)?,
        &m2.discretized(a, b, n)?,
        phi_z,
        contour,
        n_points,
    )?;
    Ok(JDecomposition {
        n,
        j1,
        j2: 0.0,
        j2_quadrature,
        j3,
        j4,
        total: j1 + j3 + j4,
        quadrature_total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_sequence: Vec<usize>,
    pub totals: Vec<f64>,
    /// Quadrature of the undiscretized integral.
    pub exact: f64,
    /// `|total_last - total_second_last|`, zero for a single entry.
    pub cauchy_gap: f64,
    /// `|total_last - exact|`.
    pub exact_gap: f64,
}

/// J-sum totals along `n_sequence` against the undiscretized integral.
pub fn convergence_check(
    m1: &OperatorHerglotz,
    m2: &OperatorHerglotz,
    phi: &SmoothFunction,
    contour: &Contour,
    n_sequence: &[usize],
    n_points: usize,
) -> Result<ConvergenceReport> {
    if n_sequence.is_empty() {
        return Err(Error::invalid("n_sequence must be nonempty"));
    }
    let analytic = phi.analytic_extension()?;
    let exact = contour_trace_integral(m1, m2, |z| analytic(z), contour, n_points)?;
    let totals = n_sequence
        .iter()
        .map(|&n| Ok(j_decomposition(m1, m2, phi, contour, n, n_points)?.total))
        .collect::<Result<Vec<f64>>>()?;
    let last = *totals.last().unwrap();
    let cauchy_gap = if totals.len() > 1 {
        (last - totals[totals.len() - 2]).abs()
    } else {
        0.0
    };
    Ok(ConvergenceReport {
        n_sequence: n_sequence.to_vec(),
        totals,
        exact,
        cauchy_gap,
        exact_gap: (last - exact).abs(),
    })
}
