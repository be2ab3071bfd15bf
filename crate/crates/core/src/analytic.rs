//! Derivative formula for `s -> tr(V'(s) φ(H(s)))`, the arctan regularization
//! of a spectral projection, finite truncations `P_n H0 P_n`, and trace
//! functionals of semibounded families.

use std::cell::RefCell;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::flow::{check_grid, midpoint_report, par_map, require_concave, OperatorFamily, ScanReport, Violation};
use crate::function::SmoothFunction;
use crate::herglotz::phi_admissible;
use crate::linalg::{apply_function, projected_trace, resolvent, trace_function, trace_weighted_function, HermitianOperator, RealInterval};
use crate::quad::adaptive_simpson;
use crate::shift::xi;

/// Central-difference step in `s`.
pub const FD_STEP: f64 = 1e-5;

fn hypothesis(name: &'static str, detail: String) -> Error {
    Error::Hypothesis { name, detail }
}

/// `φ_{μ,ε}(λ) = 1/2 - atan((λ - μ)/ε + 1/√ε)/π`, which tends to the indicator
/// of `(-inf, μ)` as `ε -> 0`. It carries no analytic extension: its complex
/// singularities come within `ε` of the real axis.
pub fn phi_mu_eps(mu: f64, eps: f64) -> Result<SmoothFunction> {
    if !(eps > 0.0 && eps.is_finite() && mu.is_finite()) {
        return Err(Error::invalid(format!("phi_mu_eps needs finite mu and eps > 0, got mu={mu}, eps={eps}")));
    }
    let shift = 1.0 / eps.sqrt();
    let arg = move |x: f64| (x - mu) / eps + shift;
    let value = move |x: f64| {
        let u = arg(x);
        // atan(1/u) keeps relative accuracy in the right tail.
        if u > 1.0 {
            (1.0 / u).atan() / std::f64::consts::PI
        } else {
            0.5 - u.atan() / std::f64::consts::PI
        }
    };
    let derivative = move |x: f64| {
        let u = arg(x);
        -1.0 / (std::f64::consts::PI * eps * (1.0 + u * u))
    };
    let second = move |x: f64| {
        let u = arg(x);
        let d = 1.0 + u * u;
        2.0 * u / (std::f64::consts::PI * eps * eps * d * d)
    };
    let check_range = if eps < 1e-2 { (mu + 1.0, mu + 5.0) } else { (mu - 3.0, mu + 3.0) };
    SmoothFunction::new(
        format!("phi_mu_eps(mu={mu}, eps={eps})"),
        Arc::new(value),
        Arc::new(derivative),
        Some(Arc::new(second)),
        None,
        check_range,
    )
}

/// `tr(W φ_{μ,ε}(H))` along an `ε` schedule next to its limit `tr(W E_H((-inf, μ)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizationCheck {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Distance from `μ` to the spectrum of `H`.
    pub spectral_gap: f64,
}

impl RegularizationCheck {
    pub fn final_gap(&self) -> f64 {
        self.values.last().map_or(0.0, |v| (v - self.limit).abs())
    }

    /// Whether the last `ε` is small enough, `ε <= 1e-8 gap^2`, for the
    /// `1e-6` convergence contract to apply.
    pub fn contract_applies(&self) -> bool {
        self.eps.last().is_some_and(|&e| e <= 1e-8 * self.spectral_gap * self.spectral_gap)
    }

    pub fn converged(&self) -> bool {
        self.final_gap() <= 1e-6
    }
}

pub fn regularization_limit_check(
    h: &HermitianOperator,
    w: &HermitianOperator,
    mu: f64,
    eps_sequence: &[f64],
) -> Result<RegularizationCheck> {
    w.check_same_dim(h, "regularization: W and H")?;
    let eigenvalues = h.eigenvalues()?;
    let nearest = eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| (a - mu).abs().total_cmp(&(b - mu).abs()));
    let spectral_gap = nearest.map_or(f64::INFINITY, |l| (l - mu).abs());
    if let Some(l) = nearest {
        if spectral_gap <= 1e-12 {
            return Err(Error::NearEigenvalue {
                z: Complex64::new(mu, 0.0),
                eigenvalue: l,
                distance: spectral_gap,
            });
        }
    }
    let limit = projected_trace(w, h, &RealInterval::below(mu))?;
    let values = eps_sequence
        .iter()
        .map(|&eps| {
            let phi = phi_mu_eps(mu, eps)?;
            trace_weighted_function(w, h, |x| phi.value(x))
        })
        .collect::<Result<_>>()?;
    Ok(RegularizationCheck {
        eps: eps_sequence.to_vec(),
        values,
        limit,
        spectral_gap,
    })
}

/// The two terms of the derivative formula at one `s`: `tr(V'' φ(H))` and the
/// contour integral `(1/2πi) ∮ φ(z) tr[V'(H - z)^{-1}]^2 dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTerms {
    pub curvature_term: f64,
    pub contour_term: f64,
}

impl DerivativeTerms {
    pub fn derivative(&self) -> f64 {
        self.curvature_term - self.contour_term
    }
}

fn require_enclosed(h: &HermitianOperator, contour: &Contour, n_points: usize) -> Result<()> {
    for &l in h.eigenvalues()? {
        if !contour.encloses_real(l) {
            return Err(Error::OutsideContour { eigenvalue: l });
        }
        contour.check_clearance(l, n_points)?;
    }
    Ok(())
}

fn derivative_terms(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    s: f64,
    phi: &SmoothFunction,
    contour: &Contour,
    n_points: usize,
) -> Result<DerivativeTerms> {
    let analytic = phi.analytic_extension()?;
    let fv = family.eval(s)?;
    let h = h0.add(&fv.v);
    require_enclosed(&h, contour, n_points)?;
    let curvature_term = trace_weighted_function(&fv.ddv, &h, |x| phi.value(x))?;
    let dv = fv.dv.matrix();
    let failure = RefCell::new(None);
    let value = contour.integrate(n_points, |z| match resolvent(h.matrix(), z) {
        Ok(r) => {
            let a = dv * &r;
            analytic(z) * a.trace_of_product(&a)
        }
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if value.im.abs() > 1e-8 * (1.0 + value.re.abs()) {
        return Err(Error::ImaginaryResidual { value: value.im });
    }
    Ok(DerivativeTerms {
        curvature_term,
        contour_term: value.re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub analytic: f64,
    pub finite_diff: f64,
    pub terms: DerivativeTerms,
}

impl DerivativeCheck {
    /// `|analytic - finite_diff| / (1 + |analytic|)`.
    pub fn relative_gap(&self) -> f64 {
        (self.analytic - self.finite_diff).abs() / (1.0 + self.analytic.abs())
    }
}

/// `d/ds tr(V'(s) φ(H(s)))` by the contour formula and by a central
/// difference with step [`FD_STEP`]. The spectra of `H(s)` and `H(s ± h)`
/// must all lie inside the contour with quadrature clearance.
pub fn lemma33_derivative(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    s: f64,
    phi: &SmoothFunction,
    contour: &Contour,
    n_points: usize,
) -> Result<DerivativeCheck> {
    let g = |s: f64| -> Result<f64> {
        let fv = family.eval(s)?;
        let h = h0.add(&fv.v);
        require_enclosed(&h, contour, n_points)?;
        trace_weighted_function(&fv.dv, &h, |x| phi.value(x))
    };
    let finite_diff = (g(s + FD_STEP)? - g(s - FD_STEP)?) / (2.0 * FD_STEP);
    let terms = derivative_terms(h0, family, s, phi, contour, n_points)?;
    Ok(DerivativeCheck {
        analytic: terms.derivative(),
        finite_diff,
        terms,
    })
}

/// Per-point signs of the two derivative terms for a concave family and a
/// nonnegative nonincreasing `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub terms: Vec<DerivativeTerms>,
    /// Values are the derivatives; a point is flagged when the curvature term
    /// exceeds `1e-10`, the contour term falls below `-1e-8` or the derivative
    /// exceeds `1e-8`, with the largest excess as the gap.
    pub report: ScanReport,
}

/// Checks `V'' <= 0` on the grid, `φ >= 0` and `φ' <= 0` on `(a, b)` (taken
/// from the contour) and that every `spec H(s)` lies in `(a, b)`, then
/// evaluates both derivative terms along the grid.
pub fn lemma34_sign_check(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    phi: &SmoothFunction,
    contour: &Contour,
    grid: &[f64],
    n_points: usize,
) -> Result<SignCheck> {
    check_grid(grid)?;
    require_concave(family, grid)?;
    let (a, b) = (contour.a, contour.b);
    if !phi_admissible(phi, a, b) {
        return Err(hypothesis(
            "phi_nonnegative_nonincreasing",
            format!("`{}` is negative or increasing somewhere on ({a}, {b})", phi.descriptor()),
        ));
    }
    for &s in grid {
        for &l in family.perturbed(h0, s)?.eigenvalues()? {
            if !(l > a && l < b) {
                return Err(hypothesis("spectrum_in_(a,b)", format!("eigenvalue {l} of H({s}) is outside ({a}, {b})")));
            }
        }
    }
    let terms: Vec<DerivativeTerms> = grid
        .par_iter()
        .map(|&s| derivative_terms(h0, family, s, phi, contour, n_points))
        .collect::<Result<_>>()?;
    let violations = terms
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let gap = (t.curvature_term - 1e-10)
                .max(-1e-8 - t.contour_term)
                .max(t.derivative() - 1e-8);
            (gap > 0.0).then_some(Violation {
                index: i,
                against: None,
                gap,
            })
        })
        .collect();
    Ok(SignCheck {
        report: ScanReport {
            grid: grid.to_vec(),
            values: terms.iter().map(DerivativeTerms::derivative).collect(),
            violations,
            tolerance: 1e-8,
        },
        terms,
    })
}

/// `tr(V'(s) φ(H^{(n)}(s)))` with `H^{(n)}(s) = P_n H0 P_n + V(s)` and
/// `P_n = E_{H0}((-n, n))`; one row per cutoff `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationTable {
    pub grid: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// The same trace with `H0` untruncated.
    pub untruncated: Vec<f64>,
}

impl TruncationTable {
    /// Largest change over `s` between the last two rows.
    pub fn column_gap(&self) -> f64 {
        match self.values.as_slice() {
            [.., prev, last] => prev.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// Largest deviation of the last row from the untruncated values.
    pub fn oracle_gap(&self) -> f64 {
        self.values.last().map_or(0.0, |last| {
            last.iter().zip(&self.untruncated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
    }

    /// Upward steps beyond `tol` along each row, as `(row, violation)`.
    pub fn row_violations(&self, tol: f64) -> Vec<(usize, Violation)> {
        let mut out = Vec::new();
        for (r, row) in self.values.iter().enumerate() {
            for (i, w) in row.windows(2).enumerate() {
                let gap = w[1] - w[0];
                if gap > tol {
                    out.push((
                        r,
                        Violation {
                            index: i + 1,
                            against: Some((i, i + 1)),
                            gap,
                        },
                    ));
                }
            }
        }
        out
    }

    /// CSV with columns `s, n=<cutoff>..., untruncated`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::invalid(format!("csv write: {e}"));
        let mut header = vec!["s".to_string()];
        header.extend(self.cutoffs.iter().map(|n| format!("n={n}")));
        header.push("untruncated".into());
        w.write_record(&header).map_err(err)?;
        for (i, s) in self.grid.iter().enumerate() {
            let mut row = vec![s.to_string()];
            row.extend(self.values.iter().map(|r| r[i].to_string()));
            row.push(self.untruncated[i].to_string());
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write: {e}")))?;
        Ok(())
    }
}

pub fn truncation_experiment(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    phi: &SmoothFunction,
    grid: &[f64],
    cutoffs: &[f64],
) -> Result<TruncationTable> {
    check_grid(grid)?;
    if cutoffs.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::invalid("truncation cutoffs must be positive"));
    }
    h0.check_same_dim(&family.v(grid[0])?, "truncation: H0 and family")?;
    let row = |h: &HermitianOperator| {
        par_map(grid, |s| {
            let fv = family.eval(s)?;
            trace_weighted_function(&fv.dv, &h.add(&fv.v), |x| phi.value(x))
        })
    };
    let (lo, hi) = (h0.min_eigenvalue()?, h0.max_eigenvalue()?);
    let values = cutoffs
        .iter()
        .map(|&n| {
            if lo > -n && hi < n {
                // P_n = I.
                row(h0)
            } else {
                row(&apply_function(h0, |l| if l > -n && l < n { l } else { 0.0 })?)
            }
        })
        .collect::<Result<_>>()?;
    Ok(TruncationTable {
        grid: grid.to_vec(),
        cutoffs: cutoffs.to_vec(),
        values,
        untruncated: row(h0)?,
    })
}

/// `tr(φ(H(s)) - φ(H0))` computed directly and as `-∫_Λ φ'' ζ(·, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiboundedCheck {
    pub direct: Vec<f64>,
    pub ibp: Vec<f64>,
    /// Finite part `[lo, hi]` of `Λ`: the spectral hull with a 1% margin.
    pub lambda: (f64, f64),
    /// Midpoint concavity of `direct` at tolerance `1e-8`.
    pub report: ScanReport,
}

impl SemiboundedCheck {
    pub fn max_identity_gap(&self) -> f64 {
        self.direct.iter().zip(&self.ibp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Tolerance of the per-interval Simpson integration of `φ'' ζ`.
const IBP_TOL: f64 = 1e-9;

/// Compares both routes to `tr(φ(H(s)) - φ(H0))` and scans the direct values
/// for midpoint concavity.
///
/// `φ'' <= 0` is sampled on `Λ = [lo, inf)` (on `[lo, hi]` and geometrically
/// beyond `hi`), and `φ'` must have decayed far to the right. Above `hi`, `ζ`
/// equals its value at `hi`, so the tail of the integral is
/// `ζ(hi) φ'(hi)` exactly.
pub fn semibounded_concavity_check(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    phi: &SmoothFunction,
    grid: &[f64],
) -> Result<SemiboundedCheck> {
    check_grid(grid)?;
    require_concave(family, grid)?;
    phi.second_derivative(0.0)?;
    let spectra: Vec<HermitianOperator> = grid.iter().map(|&s| family.perturbed(h0, s)).collect::<Result<_>>()?;
    let (mut lo, mut hi) = (h0.min_eigenvalue()?, h0.max_eigenvalue()?);
    for h in &spectra {
        lo = lo.min(h.min_eigenvalue()?);
        hi = hi.max(h.max_eigenvalue()?);
    }
    let margin = 0.01 * (hi - lo).max(1.0);
    let (lo, hi) = (lo - margin, hi + margin);
    check_semibounded_hypotheses(phi, lo, hi)?;

    let base = trace_function(h0, |x| phi.value(x))?;
    let direct = spectra
        .par_iter()
        .map(|h| Ok(trace_function(h, |x| phi.value(x))? - base))
        .collect::<Result<Vec<_>>>()?;
    let ibp = grid
        .par_iter()
        .map(|&s| {
            let shift = xi(h0, &family.v(s)?)?.xi;
            let mut cuts = vec![lo];
            cuts.extend(shift.breakpoints().iter().copied().filter(|&b| b > lo && b < hi));
            cuts.push(hi);
            let mut zeta = 0.0;
            let mut integral = 0.0;
            for w in cuts.windows(2) {
                let (l, r) = (w[0], w[1]);
                let slope = shift.eval(l);
                let z0 = zeta;
                let piece = adaptive_simpson(
                    |x| phi.second_derivative(x).unwrap_or(f64::NAN) * (z0 + slope * (x - l)),
                    l,
                    r,
                    IBP_TOL * (r - l) / (hi - lo),
                )?;
                integral += piece;
                zeta += slope * (r - l);
            }
            Ok(-integral + zeta * phi.derivative(hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = midpoint_report(grid, direct.clone(), 1.0, 1e-8);
    Ok(SemiboundedCheck {
        direct,
        ibp,
        lambda: (lo, hi),
        report,
    })
}

fn check_semibounded_hypotheses(phi: &SmoothFunction, lo: f64, hi: f64) -> Result<()> {
    let width = hi - lo;
    let far = hi + 1e6 * (1.0 + width);
    let inside = (0..=200).map(|i| lo + width * i as f64 / 200.0);
    let beyond = (0..=60).map(|k| hi + (1.0 + width) * (2f64.powf(k as f64 / 3.0) - 1.0));
    let mut slope_scale: f64 = 0.0;
    for x in inside.chain(beyond) {
        let d2 = phi.second_derivative(x)?;
        slope_scale = slope_scale.max(phi.derivative(x).abs());
        if d2 > 1e-12 * (1.0 + d2.abs()) {
            return Err(hypothesis(
                "phi_concave_on_lambda",
                format!("phi''({x}) = {d2:e} > 0 for `{}`", phi.descriptor()),
            ));
        }
    }
    let tail = phi.derivative(far);
    if tail.abs() > 1e-8 * (1.0 + slope_scale) {
        return Err(hypothesis(
            "phi_derivative_vanishes_at_infinity",
            format!("phi'({far:e}) = {tail:e} for `{}`", phi.descriptor()),
        ));
    }
    Ok(())
}

/// `h_t(s) = tr(e^{-t H(s)} - e^{-t H0})` along the grid for each `t`, with
/// midpoint convexity violations beyond `1e-8`.
pub fn heat_trace_convexity(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    t_list: &[f64],
    grid: &[f64],
) -> Result<Vec<ScanReport>> {
    check_grid(grid)?;
    if let Some(&t) = t_list.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid(format!("heat-trace time must be positive, got {t}")));
    }
    require_concave(family, grid)?;
    t_list
        .iter()
        .map(|&t| {
            let heat = |x: f64| (-t * x).exp();
            let base = trace_function(h0, heat)?;
            let values = par_map(grid, |s| Ok(trace_function(&family.perturbed(h0, s)?, heat)? - base))?;
            Ok(midpoint_report(grid, values, -1.0, 1e-8))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::linspace;
    use crate::rng::SplitMix64;

    fn scalar_linear() -> (HermitianOperator, OperatorFamily) {
        (
            HermitianOperator::from_real_diagonal(&[0.0]),
            OperatorFamily::linear(HermitianOperator::identity(1)),
        )
    }

    fn concave(seed: u64, dim: usize) -> (HermitianOperator, OperatorFamily) {
        let mut rng = SplitMix64::new(seed);
        let h0 = rng.hermitian(dim, 1.0);
        let a = rng.hermitian(dim, 0.5);
        let b = rng.psd(dim, 0.3).scale(-1.0);
        (h0, OperatorFamily::quadratic_concave(a, b).unwrap())
    }

    #[test]
    fn phi_mu_eps_values() {
        let phi = phi_mu_eps(0.3, 0.01).unwrap();
        assert!((phi.value(-1e9) - 1.0).abs() < 1e-10);
        assert!(phi.value(1e9) < 1e-10);
        assert!((phi.value(0.3 - 0.01 / 0.01f64.sqrt()) - 0.5).abs() < 1e-15);
        let sharp = phi_mu_eps(0.0, 1e-4).unwrap();
        assert!((sharp.value(-0.1) - 1.0).abs() < 1e-2);
        assert!(phi_mu_eps(0.0, 0.0).is_err());
        assert!(phi_mu_eps(0.0, -1.0).is_err());
    }

    #[test]
    fn phi_mu_eps_is_bounded_and_nonincreasing() {
        for &eps in &[1.0, 1e-2, 1e-4, 1e-8] {
            let phi = phi_mu_eps(-0.5, eps).unwrap();
            phi.check_nonincreasing(-10.0, 10.0, 2001).unwrap();
            for i in 0..=2000 {
                let v = phi.value(-10.0 + 0.01 * i as f64);
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn regularization_small_cases() {
        let h = HermitianOperator::from_real_diagonal(&[0.0]);
        let r = regularization_limit_check(&h, &HermitianOperator::identity(1), 1.0, &[1e-2, 1e-6, 1e-9]).unwrap();
        assert_eq!(r.limit, 1.0);
        assert!(r.contract_applies() && r.converged());
        let zero = regularization_limit_check(&h, &HermitianOperator::zero(1), 1.0, &[1e-2, 1e-6]).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            regularization_limit_check(&h, &h, 0.0, &[1e-3]),
            Err(Error::NearEigenvalue { .. })
        ));
    }

    #[test]
    fn scalar_derivative_formula() {
        let (h0, fam) = scalar_linear();
        let contour = Contour::around(-1.0, 1.5, 1.0).unwrap();
        let d = lemma33_derivative(&h0, &fam, 0.25, &SmoothFunction::identity(), &contour, 256).unwrap();
        assert!((d.analytic - 1.0).abs() < 1e-12, "{d:?}");
        assert!((d.finite_diff - 1.0).abs() < 1e-9);
        assert_eq!(d.terms.curvature_term, 0.0);
    }

    #[test]
    fn zero_family_has_zero_derivative_terms() {
        let h0 = SplitMix64::new(4).hermitian(3, 1.0);
        let contour = Contour::around(-6.0, 6.0, 1.0).unwrap();
        let d = lemma33_derivative(&h0, &OperatorFamily::zero(3), 0.1, &SmoothFunction::exp_decay(1.0), &contour, 256).unwrap();
        assert_eq!(d.analytic, 0.0);
        assert_eq!(d.finite_diff, 0.0);
    }

    #[test]
    fn derivative_formula_matches_differences() {
        let (h0, fam) = concave(11, 4);
        let contour = Contour::around(-8.0, 8.0, 1.5).unwrap();
        for &s in &[-0.3, 0.0, 0.4] {
            let d = lemma33_derivative(&h0, &fam, s, &SmoothFunction::exp_decay(1.0), &contour, 512).unwrap();
            assert!(d.relative_gap() <= 1e-5, "{d:?}");
        }
    }

    #[test]
    fn derivative_needs_enclosed_spectrum() {
        let (h0, fam) = scalar_linear();
        let contour = Contour::around(1.0, 2.0, 0.5).unwrap();
        let err = lemma33_derivative(&h0, &fam, 0.0, &SmoothFunction::identity(), &contour, 128).unwrap_err();
        assert!(matches!(err, Error::OutsideContour { .. }));
        let phi = phi_mu_eps(0.0, 0.1).unwrap();
        let wide = Contour::around(-3.0, 3.0, 1.0).unwrap();
        let err = lemma33_derivative(&h0, &fam, 0.0, &phi, &wide, 128).unwrap_err();
        assert!(matches!(err, Error::MissingCapability { .. }));
    }

    #[test]
    fn sign_check_on_concave_family() {
        let (h0, fam) = concave(5, 4);
        let grid = linspace(-0.5, 0.5, 11);
        let contour = Contour::new(-9.0, 9.0, 1.5, 1.0).unwrap();
        let check = lemma34_sign_check(&h0, &fam, &SmoothFunction::exp_decay(1.0), &contour, &grid, 512).unwrap();
        assert!(check.report.is_clean(), "{:?}", check.report.violations);
        let linear = OperatorFamily::linear(fam.coefficients()[0].clone());
        let check = lemma34_sign_check(&h0, &linear, &SmoothFunction::exp_decay(1.0), &contour, &grid, 512).unwrap();
        assert!(check.terms.iter().all(|t| t.curvature_term == 0.0 && t.contour_term >= -1e-8));
    }

    #[test]
    fn constant_phi_contour_term_vanishes() {
        let (h0, fam) = concave(6, 3);
        let contour = Contour::new(-9.0, 9.0, 1.5, 1.0).unwrap();
        let check = lemma34_sign_check(&h0, &fam, &SmoothFunction::constant(2.0), &contour, &[0.0, 0.2], 512).unwrap();
        assert!(check.terms.iter().all(|t| t.contour_term.abs() < 1e-10));
    }

    #[test]
    fn sign_check_rejects_increasing_phi() {
        let (h0, fam) = concave(6, 3);
        let contour = Contour::new(-9.0, 9.0, 1.5, 1.0).unwrap();
        let err = lemma34_sign_check(&h0, &fam, &SmoothFunction::identity(), &contour, &[0.0], 256).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { name: "phi_nonnegative_nonincreasing", .. }));
    }

    #[test]
    fn truncation_with_zero_family_and_full_cutoff() {
        let h0 = SplitMix64::new(2).hermitian(4, 1.0);
        let phi = phi_mu_eps(0.0, 0.05).unwrap();
        let grid = linspace(0.0, 1.0, 5);
        let t = truncation_experiment(&h0, &OperatorFamily::zero(4), &phi, &grid, &[1.0, 100.0]).unwrap();
        assert!(t.values.iter().flatten().all(|&v| v == 0.0));
        let (h0, fam) = concave(2, 4);
        let t = truncation_experiment(&h0, &fam, &phi, &grid, &[0.5, 1e3]).unwrap();
        assert_eq!(t.values[1], t.untruncated);
        assert!(t.row_violations(1e-8).is_empty());
    }

    #[test]
    fn semibounded_zero_family() {
        let h0 = SplitMix64::new(9).hermitian(3, 1.0);
        let phi = SmoothFunction::exp_decay(1.0).affine(-1.0, 0.0);
        let c = semibounded_concavity_check(&h0, &OperatorFamily::zero(3), &phi, &[0.0, 0.5, 1.0]).unwrap();
        assert!(c.direct.iter().chain(&c.ibp).all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn semibounded_routes_agree() {
        let (h0, fam) = concave(21, 5);
        let grid = linspace(-0.5, 0.5, 21);
        let lo = h0.min_eigenvalue().unwrap() - 10.0;
        for phi in [SmoothFunction::exp_decay(1.0).affine(-1.0, 0.0), SmoothFunction::tanh_rise(lo)] {
            let c = semibounded_concavity_check(&h0, &fam, &phi, &grid).unwrap();
            assert!(c.max_identity_gap() <= 1e-7, "{}", c.max_identity_gap());
            assert!(c.report.is_clean(), "{:?}", c.report.violations);
        }
    }

    #[test]
    fn semibounded_hypotheses_are_enforced() {
        let (h0, fam) = concave(21, 3);
        let grid = [0.0, 0.5];
        let linear = semibounded_concavity_check(&h0, &fam, &SmoothFunction::polynomial(&[0.0, -1.0]), &grid).unwrap_err();
        assert!(matches!(linear, Error::Hypothesis { name: "phi_derivative_vanishes_at_infinity", .. }));
        // Concave below `c` only; the semi-infinite Λ reaches the convex part.
        let step = semibounded_concavity_check(&h0, &fam, &SmoothFunction::tanh_step(20.0), &grid).unwrap_err();
        assert!(matches!(step, Error::Hypothesis { name: "phi_concave_on_lambda", .. }));
        let bare = SmoothFunction::new("bare", Arc::new(|x| x), Arc::new(|_| 1.0), None, None, (0.0, 1.0)).unwrap();
        assert!(matches!(
            semibounded_concavity_check(&h0, &fam, &bare, &grid),
            Err(Error::MissingCapability { .. })
        ));
    }

    #[test]
    fn heat_trace_small_cases() {
        let (h0, fam) = scalar_linear();
        let grid = linspace(-1.0, 1.0, 9);
        let r = heat_trace_convexity(&h0, &fam, &[1.0], &grid).unwrap();
        for (s, v) in grid.iter().zip(&r[0].values) {
            assert!((v - ((-s).exp() - 1.0)).abs() < 1e-14);
        }
        assert!(r[0].is_clean());
        let (h0, fam) = concave(8, 5);
        let tiny = heat_trace_convexity(&h0, &fam, &[1e-8], &grid).unwrap();
        assert!(tiny[0].values.iter().all(|v| v.abs() < 1e-6));
        assert!(heat_trace_convexity(&h0, &fam, &[0.0], &grid).is_err());
    }
}
