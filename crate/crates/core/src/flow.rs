//! Coupling-constant families `H(s) = H0 + V(s)` and scans of the quantities
//! whose sign or shape in `s` the monotonicity and concavity theorems predict.

use std::cell::RefCell;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SmoothFunction;
use crate::linalg::{projected_trace, trace, HermitianOperator, RealInterval};
use crate::quad::adaptive_simpson;
use crate::shift::{xi, zeta};
use crate::step::StepFunction;

/// Largest eigenvalue of `V''(s)` still counted as nonpositive.
pub const CONCAVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Linear,
    QuadraticConcave,
    MatrixPolynomial,
}

/// `V(s) = Σ_{k>=1} s^k C_k` on an open interval containing zero.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    kind: FamilyKind,
    coefficients: Vec<HermitianOperator>,
    domain: RealInterval,
}

/// `V(s)`, `V'(s)`, `V''(s)`.
#[derive(Debug, Clone)]
pub struct FamilyValue {
    pub v: HermitianOperator,
    pub dv: HermitianOperator,
    pub ddv: HermitianOperator,
}

impl OperatorFamily {
    /// `V(s) = s A` on the whole line.
    pub fn linear(a: HermitianOperator) -> Self {
        Self {
            kind: FamilyKind::Linear,
            coefficients: vec![a],
            domain: RealInterval::real_line(),
        }
    }

    /// `V(s) = s A + s^2 B` with `B <= 0`.
    pub fn quadratic_concave(a: HermitianOperator, b: HermitianOperator) -> Result<Self> {
        a.check_same_dim(&b, "quadratic family coefficients")?;
        let top = b.max_eigenvalue()?;
        if top > CONCAVITY_TOL {
            return Err(Error::NotConcave {
                s: 0.0,
                max_eigenvalue: top,
            });
        }
        Ok(Self {
            kind: FamilyKind::QuadraticConcave,
            coefficients: vec![a, b],
            domain: RealInterval::real_line(),
        })
    }

    /// `V(s) = Σ s^k C_k` with `C_1, C_2, ...` given in order.
    pub fn polynomial(coefficients: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = coefficients.first() else {
            return Err(Error::invalid("polynomial family needs at least one coefficient"));
        };
        for c in &coefficients[1..] {
            first.check_same_dim(c, "polynomial family coefficients")?;
        }
        Ok(Self {
            kind: FamilyKind::MatrixPolynomial,
            coefficients,
            domain: RealInterval::real_line(),
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::linear(HermitianOperator::zero(dim))
    }

    /// Restricts the family to an open interval containing zero.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < 0.0 && 0.0 < hi) {
            return Err(Error::invalid(format!("domain ({lo}, {hi}) must contain 0")));
        }
        self.domain = RealInterval::open(lo, hi)?;
        Ok(self)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].dim()
    }

    pub fn coefficients(&self) -> &[HermitianOperator] {
        &self.coefficients
    }

    pub fn domain(&self) -> RealInterval {
        self.domain
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        if self.domain.contains(s) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                s,
                lo: self.domain.lower,
                hi: self.domain.upper,
            })
        }
    }

    pub fn eval(&self, s: f64) -> Result<FamilyValue> {
        self.check_domain(s)?;
        let n = self.dim();
        let (mut v, mut dv, mut ddv) = (
            HermitianOperator::zero(n),
            HermitianOperator::zero(n),
            HermitianOperator::zero(n),
        );
        for (i, c) in self.coefficients.iter().enumerate() {
            let k = (i + 1) as i32;
            let kf = k as f64;
            v = v.add(&c.scale(s.powi(k)));
            dv = dv.add(&c.scale(kf * s.powi(k - 1)));
            if k >= 2 {
                ddv = ddv.add(&c.scale(kf * (kf - 1.0) * s.powi(k - 2)));
            }
        }
        Ok(FamilyValue { v, dv, ddv })
    }

    pub fn v(&self, s: f64) -> Result<HermitianOperator> {
        Ok(self.eval(s)?.v)
    }

    /// `H(s) = H0 + V(s)`.
    pub fn perturbed(&self, h0: &HermitianOperator, s: f64) -> Result<HermitianOperator> {
        h0.check_same_dim(&self.coefficients[0], "H0 and family")?;
        Ok(h0.add(&self.v(s)?))
    }

    /// Largest eigenvalue of `V''(s)`.
    pub fn curvature_top(&self, s: f64) -> Result<f64> {
        if self.kind == FamilyKind::Linear {
            return Ok(0.0);
        }
        self.eval(s)?.ddv.max_eigenvalue()
    }
}

/// Whether `V''(s) <= 0` (up to [`CONCAVITY_TOL`]) at every grid point.
pub fn check_concavity(family: &OperatorFamily, grid: &[f64]) -> bool {
    require_concave(family, grid).is_ok()
}

/// Like [`check_concavity`] but names the first offending point.
pub fn require_concave(family: &OperatorFamily, grid: &[f64]) -> Result<()> {
    for &s in grid {
        let top = family.curvature_top(s)?;
        if top > CONCAVITY_TOL {
            return Err(Error::NotConcave { s, max_eigenvalue: top });
        }
    }
    Ok(())
}

/// One failed comparison in a scan: the flagged point, the pair of indices
/// it was compared against (if any) and the amount by which it failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub against: Option<(usize, usize)>,
    pub gap: f64,
}

/// Values of a scanned function of `s` and the comparisons that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub points: usize,
    pub min: f64,
    pub max: f64,
    pub violation_count: usize,
    pub worst_gap: f64,
    pub tolerance: f64,
}

impl ScanReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest gap among the violations, `-inf` for a clean report.
    pub fn worst_gap(&self) -> f64 {
        self.violations.iter().map(|v| v.gap).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn summary(&self) -> ScanSummary {
        ScanSummary {
            points: self.values.len(),
            min: self.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            violation_count: self.violations.len(),
            worst_gap: if self.violations.is_empty() { 0.0 } else { self.worst_gap() },
            tolerance: self.tolerance,
        }
    }

    /// CSV rows `s,value,violation` with a 0/1 flag per grid point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut flagged = vec![false; self.grid.len()];
        for v in &self.violations {
            flagged[v.index] = true;
        }
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::invalid(format!("csv write: {e}"));
        w.write_record(["s", "value", "violation"]).map_err(err)?;
        for ((s, v), f) in self.grid.iter().zip(&self.values).zip(&flagged) {
            w.write_record([s.to_string(), v.to_string(), u8::from(*f).to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write: {e}")))?;
        Ok(())
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scan grid must be nonempty, finite and strictly ascending"));
    }
    Ok(())
}

/// Evaluates `f` at every grid point in parallel, keeping grid order.
pub(crate) fn par_map(grid: &[f64], f: impl Fn(f64) -> Result<f64> + Sync) -> Result<Vec<f64>> {
    grid.par_iter().map(|&s| f(s)).collect()
}

/// `tr(V'(s) E_{H(s)}(Δ))`.
pub fn projected_derivative_trace(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    delta: &RealInterval,
    s: f64,
) -> Result<f64> {
    let fv = family.eval(s)?;
    projected_trace(&fv.dv, &h0.add(&fv.v), delta)
}

/// `∫_{s_lo}^{s_hi} tr(V'(s) E_{H(s)}(Δ)) ds` by adaptive Simpson.
pub fn spectral_average(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    delta: &RealInterval,
    s_lo: f64,
    s_hi: f64,
    tol: f64,
) -> Result<f64> {
    family.check_domain(s_lo)?;
    family.check_domain(s_hi)?;
    h0.check_same_dim(&family.coefficients[0], "H0 and family")?;
    let failure = RefCell::new(None);
    let integrand = |s: f64| match projected_derivative_trace(h0, family, delta, s) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let value = adaptive_simpson(integrand, s_lo, s_hi, tol)?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `∫_Δ (ξ(·; H0, H(s_hi)) - ξ(·; H0, H(s_lo)))` computed exactly
/// with the coupling-constant integral from [`spectral_average`].
pub fn averaging_identity_check(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    delta: &RealInterval,
    s_lo: f64,
    s_hi: f64,
    tol: f64,
) -> Result<AveragingCheck> {
    let over_delta = |s: f64| -> Result<f64> {
        xi(h0, &family.v(s)?)?.xi.integral_between(delta.lower, delta.upper)
    };
    let lhs = over_delta(s_hi)? - over_delta(s_lo)?;
    let rhs = spectral_average(h0, family, delta, s_lo, s_hi, tol)?;
    Ok(AveragingCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// `ζ(μ, s) = ∫_{-inf}^{μ} ξ(λ; H0, H(s)) dλ` from the step function.
pub fn zeta_at(h0: &HermitianOperator, family: &OperatorFamily, mu: f64, s: f64) -> Result<f64> {
    zeta(&xi(h0, &family.v(s)?)?.xi, mu)
}

/// `ζ(μ, s)` as `∫_0^s tr(V'(t) E_{H(t)}((-inf, μ))) dt`.
pub fn zeta_by_averaging(h0: &HermitianOperator, family: &OperatorFamily, mu: f64, s: f64, tol: f64) -> Result<f64> {
    spectral_average(h0, family, &RealInterval::below(mu), 0.0, s, tol)
}

/// Values of `m(s) = tr(V'(s) E_{H(s)}((-inf, μ)))` and upward steps beyond
/// `1e-8 (1 + max|m|)`, with no hypothesis on the family. This is the
/// negative-control entry point.
pub fn projected_trace_scan(h0: &HermitianOperator, family: &OperatorFamily, mu: f64, grid: &[f64]) -> Result<ScanReport> {
    check_grid(grid)?;
    let below = RealInterval::below(mu);
    let values = par_map(grid, |s| projected_derivative_trace(h0, family, &below, s))?;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-8 * (1.0 + scale);
    let violations = values
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let gap = w[1] - w[0];
            (gap > tolerance).then_some(Violation {
                index: i + 1,
                against: Some((i, i + 1)),
                gap,
            })
        })
        .collect();
    Ok(ScanReport {
        grid: grid.to_vec(),
        values,
        violations,
        tolerance,
    })
}

/// [`projected_trace_scan`] for families with `V'' <= 0` on the grid, where
/// the scanned function must be nonincreasing.
pub fn monotonicity_scan(h0: &HermitianOperator, family: &OperatorFamily, mu: f64, grid: &[f64]) -> Result<ScanReport> {
    check_grid(grid)?;
    require_concave(family, grid)?;
    projected_trace_scan(h0, family, mu, grid)
}

/// Index triples `(i, k, j)` with `s_j` the midpoint of `s_i` and `s_k`.
pub fn midpoint_triples(grid: &[f64]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        for k in i + 2..grid.len() {
            let mid = 0.5 * (grid[i] + grid[k]);
            let j = grid.partition_point(|&s| s < mid);
            let hit = [j.checked_sub(1), Some(j)]
                .into_iter()
                .flatten()
                .filter(|&j| j > i && j < k)
                .find(|&j| (grid[j] - mid).abs() <= 1e-12 * (1.0 + mid.abs()));
            if let Some(j) = hit {
                out.push((i, k, j));
            }
        }
    }
    out
}

/// Midpoint comparisons of `values`: a violation when `sign * (v_mid -
/// (v_i + v_k)/2) < -tol`. `sign = 1` tests concavity, `-1` convexity.
pub fn midpoint_violations(grid: &[f64], values: &[f64], sign: f64, tol: f64) -> Vec<Violation> {
    midpoint_triples(grid)
        .into_iter()
        .filter_map(|(i, k, j)| {
            let gap = -sign * (values[j] - 0.5 * (values[i] + values[k]));
            (gap > tol).then_some(Violation {
                index: j,
                against: Some((i, k)),
                gap,
            })
        })
        .collect()
}

pub(crate) fn midpoint_report(grid: &[f64], values: Vec<f64>, sign: f64, tol: f64) -> ScanReport {
    let violations = midpoint_violations(grid, &values, sign, tol);
    ScanReport {
        grid: grid.to_vec(),
        values,
        violations,
        tolerance: tol,
    }
}

/// Midpoint concavity of `s -> ζ(μ, s)` on the grid at absolute tolerance
/// `1e-8`.
pub fn concavity_check(h0: &HermitianOperator, family: &OperatorFamily, mu: f64, grid: &[f64]) -> Result<ScanReport> {
    check_grid(grid)?;
    require_concave(family, grid)?;
    let values = par_map(grid, |s| zeta_at(h0, family, mu, s))?;
    Ok(midpoint_report(grid, values, 1.0, 1e-8))
}

/// `ζ(μ, s + t) <= ζ(μ, s) + ζ(μ, t) + 1e-8` for each pair. The report grid
/// holds the pair index and the values `ζ(μ, s + t) - ζ(μ, s) - ζ(μ, t)`.
pub fn subadditivity_check(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    mu: f64,
    pairs: &[(f64, f64)],
) -> Result<ScanReport> {
    let mut points: Vec<f64> = Vec::new();
    for &(s, t) in pairs {
        if s < 0.0 || t < 0.0 {
            return Err(Error::invalid(format!("subadditivity pair ({s}, {t}) must be nonnegative")));
        }
        points.extend([s, t, s + t]);
    }
    require_concave(family, &points)?;
    let excess: Vec<f64> = pairs
        .par_iter()
        .map(|&(s, t)| Ok(zeta_at(h0, family, mu, s + t)? - zeta_at(h0, family, mu, s)? - zeta_at(h0, family, mu, t)?))
        .collect::<Result<_>>()?;
    let tolerance = 1e-8;
    let violations = excess
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > tolerance)
        .map(|(i, &gap)| Violation {
            index: i,
            against: None,
            gap,
        })
        .collect();
    Ok(ScanReport {
        grid: (0..pairs.len()).map(|i| i as f64).collect(),
        values: excess,
        violations,
        tolerance,
    })
}

/// Nonincreasing weight for the generalized concavity functional.
#[derive(Debug, Clone)]
pub enum Weight {
    Step(StepFunction),
    Smooth { function: SmoothFunction, tol: f64 },
}

impl Weight {
    fn check_nonincreasing(&self, lo: f64, hi: f64) -> Result<()> {
        match self {
            Weight::Step(f) => {
                let v = f.values();
                let b = f.breakpoints();
                for i in 0..b.len() {
                    if v[i + 1] > v[i] {
                        let x0 = if i == 0 { f64::NEG_INFINITY } else { b[i - 1] };
                        return Err(Error::NotNonincreasing { x0, x1: b[i] });
                    }
                }
                Ok(())
            }
            Weight::Smooth { function, .. } => function.check_nonincreasing(lo, hi, 64),
        }
    }

    /// `∫ f ξ` against a step function `ξ` with zero tails.
    pub fn integrate_against(&self, xi: &StepFunction) -> Result<f64> {
        match self {
            Weight::Step(f) => f.combine(xi, |a, b| a * b).integral(),
            Weight::Smooth { function, tol } => {
                let support: f64 = xi.pieces().filter(|p| p.2 != 0.0).map(|(l, r, _)| r - l).sum();
                let mut total = 0.0;
                for (l, r, v) in xi.pieces().filter(|p| p.2 != 0.0) {
                    let share = tol * (r - l) / support;
                    total += v * adaptive_simpson(|x| function.value(x), l, r, share)?;
                }
                Ok(total)
            }
        }
    }
}

/// Midpoint concavity of `g(s) = ∫ f(λ) ξ(λ; H0, H(s)) dλ` for a
/// nonincreasing weight `f`, tolerance `1e-8`.
pub fn kostrykin_functional_check(
    h0: &HermitianOperator,
    family: &OperatorFamily,
    weight: &Weight,
    grid: &[f64],
) -> Result<ScanReport> {
    check_grid(grid)?;
    require_concave(family, grid)?;
    let shifts: Vec<StepFunction> = grid
        .par_iter()
        .map(|&s| Ok(xi(h0, &family.v(s)?)?.xi))
        .collect::<Result<_>>()?;
    let (lo, hi) = shifts
        .iter()
        .flat_map(|x| x.breakpoints().iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b), hi.max(b)));
    if lo < hi {
        weight.check_nonincreasing(lo, hi)?;
    }
    let values = shifts
        .par_iter()
        .map(|x| weight.integrate_against(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(midpoint_report(grid, values, 1.0, 1e-8))
}

/// `tr V(s)` along the grid.
pub fn trace_scan(family: &OperatorFamily, grid: &[f64]) -> Result<Vec<f64>> {
    par_map(grid, |s| Ok(trace(&family.v(s)?)))
}

/// Evenly spaced grid with `n >= 2` points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn scalar() -> (HermitianOperator, OperatorFamily) {
        (
            HermitianOperator::from_real_diagonal(&[0.0]),
            OperatorFamily::linear(HermitianOperator::identity(1)),
        )
    }

    #[test]
    fn family_evaluation() {
        let mut rng = SplitMix64::new(1);
        let a = rng.hermitian(3, 1.0);
        let b = rng.psd(3, 1.0).scale(-1.0);
        let lin = OperatorFamily::linear(a.clone());
        let fv = lin.eval(2.0).unwrap();
        assert_eq!(fv.v, a.scale(2.0));
        assert_eq!(fv.dv, a);
        assert_eq!(fv.ddv, HermitianOperator::zero(3));
        let quad = OperatorFamily::quadratic_concave(a.clone(), b.clone()).unwrap();
        let fv = quad.eval(0.0).unwrap();
        assert_eq!(fv.v, HermitianOperator::zero(3));
        assert_eq!(fv.dv, a);
        assert_eq!(fv.ddv, b.scale(2.0));
        let bounded = lin.with_domain(-1.0, 1.0).unwrap();
        assert!(matches!(bounded.eval(1.0), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn concavity_predicate() {
        let a = HermitianOperator::identity(2);
        assert!(check_concavity(&OperatorFamily::linear(a.clone()), &[0.0, 1.0]));
        let neg = OperatorFamily::quadratic_concave(a.clone(), a.scale(-1.0)).unwrap();
        assert!(check_concavity(&neg, &[0.0, 1.0]));
        assert!(OperatorFamily::quadratic_concave(a.clone(), a.clone()).is_err());
        let pos = OperatorFamily::polynomial(vec![a.clone(), a]).unwrap();
        assert!(!check_concavity(&pos, &[0.0, 1.0]));
    }

    #[test]
    fn scalar_averaging() {
        let (h0, f) = scalar();
        let v = spectral_average(&h0, &f, &RealInterval::real_line(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let c = averaging_identity_check(&h0, &f, &RealInterval::below(0.5), 0.0, 1.0, 1e-9).unwrap();
        assert!((c.lhs - 0.5).abs() < 1e-15 && c.gap < 1e-8, "{c:?}");
        let c = averaging_identity_check(&h0, &f, &RealInterval::below(0.5), 0.3, 0.3, 1e-9).unwrap();
        assert_eq!((c.lhs, c.rhs, c.gap), (0.0, 0.0, 0.0));
        let z = OperatorFamily::zero(3);
        let h0 = SplitMix64::new(3).hermitian(3, 1.0);
        assert_eq!(spectral_average(&h0, &z, &RealInterval::below(0.0), 0.0, 1.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn seeded_averaging_matches_shift_function() {
        let mut rng = SplitMix64::new(44);
        let h0 = rng.hermitian(4, 1.0);
        let f = OperatorFamily::linear(rng.hermitian(4, 1.0));
        let tol = 1e-8;
        let c = averaging_identity_check(&h0, &f, &RealInterval::below(0.1), 0.0, 1.0, tol).unwrap();
        assert!(c.gap <= 10.0 * tol, "{c:?}");
        let rhs = spectral_average(&h0, &f, &RealInterval::below(0.1), 0.0, 1.0, tol).unwrap();
        assert!((rhs - zeta_at(&h0, &f, 0.1, 1.0).unwrap()).abs() <= 10.0 * tol);
    }

    #[test]
    fn scalar_monotonicity_and_concavity() {
        let (h0, f) = scalar();
        let grid = linspace(0.0, 1.0, 11);
        let r = monotonicity_scan(&h0, &f, 0.55, &grid).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.values[..6], [1.0; 6]);
        assert_eq!(r.values[6..], [0.0; 5]);
        let r = monotonicity_scan(&h0, &f, -5.0, &grid).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));

        let r = concavity_check(&h0, &f, 0.5, &grid).unwrap();
        assert!(r.is_clean());
        for (s, z) in grid.iter().zip(&r.values) {
            assert!((z - s.min(0.5)).abs() < 1e-15);
        }
        let r = concavity_check(&h0, &OperatorFamily::zero(1), 0.5, &grid).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0) && r.is_clean());
    }

    #[test]
    fn scalar_subadditivity() {
        let (h0, f) = scalar();
        let r = subadditivity_check(&h0, &f, 0.5, &[(0.3, 0.4), (0.0, 0.7), (0.2, 0.0)]).unwrap();
        assert!(r.is_clean());
        assert!((r.values[0] - (0.5 - 0.7)).abs() < 1e-15);
        assert_eq!(r.values[1], 0.0);
        assert_eq!(r.values[2], 0.0);
    }

    #[test]
    fn convex_family_is_rejected_by_checked_scans() {
        let a = HermitianOperator::identity(2);
        let convex = OperatorFamily::polynomial(vec![a.clone(), a.scale(0.5)]).unwrap();
        let h0 = HermitianOperator::zero(2);
        let grid = linspace(0.0, 1.0, 5);
        assert!(matches!(monotonicity_scan(&h0, &convex, 0.5, &grid), Err(Error::NotConcave { .. })));
        assert!(projected_trace_scan(&h0, &convex, 0.5, &grid).is_ok());
    }

    #[test]
    fn convex_negative_control_does_violate() {
        // V(s) = s + s^2 on [0]: m(s) = (1 + 2s) while s + s^2 < μ, so m rises.
        let one = HermitianOperator::identity(1);
        let convex = OperatorFamily::polynomial(vec![one.clone(), one]).unwrap();
        let h0 = HermitianOperator::from_real_diagonal(&[0.0]);
        let r = projected_trace_scan(&h0, &convex, 5.0, &linspace(0.0, 1.0, 11)).unwrap();
        assert!(!r.is_clean());
    }

    #[test]
    fn kostrykin_reduces_to_zeta_and_trace() {
        let mut rng = SplitMix64::new(8);
        let h0 = rng.hermitian(4, 1.0);
        let f = OperatorFamily::quadratic_concave(rng.hermitian(4, 1.0), rng.psd(4, 0.5).scale(-1.0)).unwrap();
        let grid = linspace(0.0, 1.0, 9);
        let mu = 0.2;
        let indicator = Weight::Step(StepFunction::new(vec![mu], vec![1.0, 0.0]).unwrap());
        let k = kostrykin_functional_check(&h0, &f, &indicator, &grid).unwrap();
        let c = concavity_check(&h0, &f, mu, &grid).unwrap();
        for (a, b) in k.values.iter().zip(&c.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let one = Weight::Smooth {
            function: SmoothFunction::constant(1.0),
            tol: 1e-10,
        };
        let k = kostrykin_functional_check(&h0, &f, &one, &grid).unwrap();
        for (g, t) in k.values.iter().zip(trace_scan(&f, &grid).unwrap()) {
            assert!((g - t).abs() < 1e-9, "{g} vs {t}");
        }
        assert!(k.is_clean());
        let rising = Weight::Smooth {
            function: SmoothFunction::identity(),
            tol: 1e-10,
        };
        assert!(matches!(
            kostrykin_functional_check(&h0, &f, &rising, &grid),
            Err(Error::NotNonincreasing { .. })
        ));
    }

    #[test]
    fn midpoint_triples_on_uniform_grid() {
        let t = midpoint_triples(&linspace(0.0, 1.0, 5));
        assert_eq!(t, vec![(0, 2, 1), (0, 4, 2), (1, 3, 2), (2, 4, 3)]);
    }

    #[test]
    fn scan_csv() {
        let r = ScanReport {
            grid: vec![0.0, 0.5],
            values: vec![1.0, 2.0],
            violations: vec![Violation {
                index: 1,
                against: Some((0, 1)),
                gap: 1.0,
            }],
            tolerance: 1e-8,
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "s,value,violation\n0,1,0\n0.5,2,1\n");
        assert_eq!(r.summary().violation_count, 1);
    }
}
