//! The spectral shift function of a finite-dimensional pair and the identities
//! it satisfies.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{apply_function, projected_trace, trace, HermitianOperator, RealInterval, SchattenP};
use crate::step::StepFunction;

/// `N_A(λ) = #{eigenvalues of A below λ}`.
pub fn counting_function(a: &HermitianOperator) -> Result<StepFunction> {
    Ok(StepFunction::counting(a.eigenvalues()?))
}

#[derive(Debug, Clone)]
pub struct ShiftResult {
    pub xi: StepFunction,
    pub h0: HermitianOperator,
    pub h: HermitianOperator,
    pub v_trace: f64,
    pub xi_l1: f64,
}

/// `ξ(·; H0, H0 + V) = N_{H0} - N_{H0+V}`.
pub fn xi(h0: &HermitianOperator, v: &HermitianOperator) -> Result<ShiftResult> {
    h0.check_same_dim(v, "xi: H0 and V")?;
    let h = h0.add(v);
    let xi = counting_function(h0)?.sub(&counting_function(&h)?);
    let xi_l1 = xi.l1_norm()?;
    Ok(ShiftResult {
        xi,
        h0: h0.clone(),
        h,
        v_trace: trace(v),
        xi_l1,
    })
}

/// `ζ(μ) = ∫_{-inf}^{μ} ξ`.
pub fn zeta(xi: &StepFunction, mu: f64) -> Result<f64> {
    xi.integral_below(mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KreinCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl KreinCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (1.0 + self.lhs.abs())
    }
}

/// Both sides of the trace formula `tr(φ(H) - φ(H0)) = ∫ φ' ξ`.
///
/// The right side integrates `φ'` against the step function exactly, so only
/// `φ` itself is evaluated.
pub fn krein_check(h0: &HermitianOperator, v: &HermitianOperator, phi: impl Fn(f64) -> f64) -> Result<KreinCheck> {
    let shift = xi(h0, v)?;
    let lhs = trace(&apply_function(&shift.h, &phi)?) - trace(&apply_function(h0, &phi)?);
    let rhs = shift.xi.integrate_against_derivative(&phi)?;
    Ok(KreinCheck { lhs, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
}

impl Sandwich {
    /// Largest violation of `lower <= mid <= upper`, zero when it holds.
    pub fn violation(&self) -> f64 {
        (self.lower - self.mid).max(self.mid - self.upper).max(0.0)
    }
}

/// `tr(V E_H((-inf, μ))) <= ζ(μ) <= tr(V E_{H0}((-inf, μ)))`.
pub fn sandwich_check(h0: &HermitianOperator, v: &HermitianOperator, mu: f64) -> Result<Sandwich> {
    let shift = xi(h0, v)?;
    let below = RealInterval::below(mu);
    Ok(Sandwich {
        lower: projected_trace(v, &shift.h, &below)?,
        mid: zeta(&shift.xi, mu)?,
        upper: projected_trace(v, h0, &below)?,
    })
}

/// `‖V‖_1`, the bound on `∫ |ξ|`.
pub fn trace_norm(v: &HermitianOperator) -> Result<f64> {
    crate::linalg::schatten_norm(v, SchattenP::One)
}
