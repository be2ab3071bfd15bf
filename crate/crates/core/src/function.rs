//! Real test functions carried together with their closed-form derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

const CHECK_POINTS: usize = 10;
const FD_REL_STEP: f64 = 1e-5;

/// `φ` with `φ'`, optionally `φ''` and an analytic continuation to a
/// neighbourhood of the real axis.
#[derive(Clone)]
pub struct SmoothFunction {
    value: RealFn,
    derivative: RealFn,
    second_derivative: Option<RealFn>,
    analytic_extension: Option<ComplexFn>,
    descriptor: String,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("descriptor", &self.descriptor)
            .field("second_derivative", &self.second_derivative.is_some())
            .field("analytic_extension", &self.analytic_extension.is_some())
            .finish()
    }
}

impl SmoothFunction {
    /// Builds the function and checks `derivative` (and `second_derivative`
    /// when given) against central differences at ten points spread over
    /// `[lo, hi]`. A check passes when the difference is within `1e-6`
    /// relative, with an absolute floor of `1e-8 (1 + |φ(x)|)` covering
    /// cancellation in the difference quotient.
    pub fn new(
        descriptor: impl Into<String>,
        value: RealFn,
        derivative: RealFn,
        second_derivative: Option<RealFn>,
        analytic_extension: Option<ComplexFn>,
        check_range: (f64, f64),
    ) -> Result<Self> {
        let f = Self {
            value,
            derivative,
            second_derivative,
            analytic_extension,
            descriptor: descriptor.into(),
        };
        let (lo, hi) = check_range;
        for i in 0..CHECK_POINTS {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / CHECK_POINTS as f64;
            f.check_pair(x, &f.value, &f.derivative)?;
            if let Some(d2) = &f.second_derivative {
                f.check_pair(x, &f.derivative, d2)?;
            }
        }
        Ok(f)
    }

    fn check_pair(&self, x: f64, g: &RealFn, dg: &RealFn) -> Result<()> {
        let h = FD_REL_STEP * x.abs().max(1.0);
        let estimated = (g(x + h) - g(x - h)) / (2.0 * h);
        let supplied = dg(x);
        let allowed = 1e-6 * supplied.abs() + 1e-8 * (1.0 + g(x).abs());
        if !(estimated - supplied).abs().le(&allowed) {
            return Err(Error::InconsistentDerivative {
                descriptor: self.descriptor.clone(),
                x,
                supplied,
                estimated,
            });
        }
        Ok(())
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        self.second_derivative
            .as_ref()
            .map(|d2| d2(x))
            .ok_or_else(|| self.missing("second derivative"))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.second_derivative.is_some()
    }

    pub fn analytic(&self, z: Complex64) -> Result<Complex64> {
        self.analytic_extension
            .as_ref()
            .map(|g| g(z))
            .ok_or_else(|| self.missing("analytic extension"))
    }

    pub fn analytic_extension(&self) -> Result<ComplexFn> {
        self.analytic_extension
            .clone()
            .ok_or_else(|| self.missing("analytic extension"))
    }

    pub fn value_fn(&self) -> RealFn {
        self.value.clone()
    }

    fn missing(&self, what: &'static str) -> Error {
        Error::MissingCapability {
            descriptor: self.descriptor.clone(),
            what,
        }
    }

    /// Sampled check that `φ` is nonincreasing on `[lo, hi]`.
    pub fn check_nonincreasing(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let xs: Vec<f64> = (0..samples)
            .map(|i| lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64)
            .collect();
        for w in xs.windows(2) {
            if self.value(w[1]) > self.value(w[0]) + 1e-14 * (1.0 + self.value(w[0]).abs()) {
                return Err(Error::NotNonincreasing { x0: w[0], x1: w[1] });
            }
        }
        Ok(())
    }

    // Catalogue.

    pub fn identity() -> Self {
        Self::polynomial(&[0.0, 1.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(&[c])
    }

    /// `Σ_k c_k λ^k`.
    pub fn polynomial(coefficients: &[f64]) -> Self {
        let c: Arc<[f64]> = coefficients.into();
        let d1: Arc<[f64]> = derive(&c).into();
        let d2: Arc<[f64]> = derive(&d1).into();
        let (c0, c1, c2, c3) = (c.clone(), d1.clone(), d2.clone(), c.clone());
        let descriptor = format!("polynomial{:?}", coefficients);
        Self::new(
            descriptor,
            Arc::new(move |x| horner(&c0, x)),
            Arc::new(move |x| horner(&c1, x)),
            Some(Arc::new(move |x| horner(&c2, x))),
            Some(Arc::new(move |z: Complex64| {
                c3.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
            })),
            (-2.0, 2.0),
        )
        .expect("polynomial derivatives are exact")
    }

    /// `e^{-tλ}`.
    pub fn exp_decay(t: f64) -> Self {
        Self::new(
            format!("exp(-{t} x)"),
            Arc::new(move |x| (-t * x).exp()),
            Arc::new(move |x| -t * (-t * x).exp()),
            Some(Arc::new(move |x| t * t * (-t * x).exp())),
            Some(Arc::new(move |z: Complex64| (-t * z).exp())),
            (-2.0, 2.0),
        )
        .expect("exponential derivatives are exact")
    }

    pub fn arctan() -> Self {
        Self::new(
            "arctan(x)",
            Arc::new(f64::atan),
            Arc::new(|x| 1.0 / (1.0 + x * x)),
            Some(Arc::new(|x| -2.0 * x / (1.0 + x * x).powi(2))),
            Some(Arc::new(|z: Complex64| z.atan())),
            (-3.0, 3.0),
        )
        .expect("arctan derivatives are exact")
    }

    /// `1 - tanh(λ - c)`: positive, decreasing, concave for `λ <= c`, with
    /// `φ' -> 0` at `+inf`.
    pub fn tanh_step(c: f64) -> Self {
        Self::new(
            format!("1 - tanh(x - {c})"),
            Arc::new(move |x| 1.0 - (x - c).tanh()),
            Arc::new(move |x| -sech2(x - c)),
            Some(Arc::new(move |x| 2.0 * sech2(x - c) * (x - c).tanh())),
            Some(Arc::new(move |z: Complex64| 1.0 - (z - c).tanh())),
            (c - 3.0, c + 3.0),
        )
        .expect("tanh derivatives are exact")
    }

    /// `1 + tanh(λ - c)`: positive, increasing, concave for `λ >= c`, with
    /// `φ' -> 0` at `+inf`.
    pub fn tanh_rise(c: f64) -> Self {
        Self::new(
            format!("1 + tanh(x - {c})"),
            Arc::new(move |x| 1.0 + (x - c).tanh()),
            Arc::new(move |x| sech2(x - c)),
            Some(Arc::new(move |x| -2.0 * sech2(x - c) * (x - c).tanh())),
            Some(Arc::new(move |z: Complex64| 1.0 + (z - c).tanh())),
            (c - 3.0, c + 3.0),
        )
        .expect("tanh derivatives are exact")
    }

    /// `c φ + d`, keeping every capability of `φ`.
    pub fn affine(&self, c: f64, d: f64) -> Self {
        let (v, d1) = (self.value.clone(), self.derivative.clone());
        Self {
            value: Arc::new(move |x| c * v(x) + d),
            derivative: Arc::new(move |x| c * d1(x)),
            second_derivative: self
                .second_derivative
                .clone()
                .map(|d2| -> RealFn { Arc::new(move |x| c * d2(x)) }),
            analytic_extension: self
                .analytic_extension
                .clone()
                .map(|g| -> ComplexFn { Arc::new(move |z| c * g(z) + d) }),
            descriptor: format!("{c} * ({}) + {d}", self.descriptor),
        }
    }

    /// `a - tanh(λ - c)`, which changes sign at `c + atanh(a)` for `|a| < 1`.
    pub fn shifted_tanh(c: f64, a: f64) -> Self {
        Self::new(
            format!("{a} - tanh(x - {c})"),
            Arc::new(move |x| a - (x - c).tanh()),
            Arc::new(move |x| -sech2(x - c)),
            Some(Arc::new(move |x| 2.0 * sech2(x - c) * (x - c).tanh())),
            Some(Arc::new(move |z: Complex64| a - (z - c).tanh())),
            (c - 3.0, c + 3.0),
        )
        .expect("tanh derivatives are exact")
    }

    /// `1/(λ - c)`, positive and decreasing to the right of the pole.
    pub fn shifted_reciprocal(c: f64) -> Self {
        Self::new(
            format!("1/(x - {c})"),
            Arc::new(move |x| 1.0 / (x - c)),
            Arc::new(move |x| -1.0 / ((x - c) * (x - c))),
            Some(Arc::new(move |x| 2.0 / (x - c).powi(3))),
            Some(Arc::new(move |z: Complex64| 1.0 / (z - c))),
            (c + 1.0, c + 4.0),
        )
        .expect("reciprocal derivatives are exact")
    }
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

fn derive(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_builds_and_evaluates() {
        let p = SmoothFunction::polynomial(&[1.0, 0.0, 3.0]);
        assert_eq!(p.value(2.0), 13.0);
        assert_eq!(p.derivative(2.0), 12.0);
        assert_eq!(p.second_derivative(2.0).unwrap(), 6.0);
        assert_eq!(p.analytic(Complex64::new(0.0, 1.0)).unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(SmoothFunction::identity().value(1.5), 1.5);
        assert_eq!(SmoothFunction::constant(2.0).derivative(7.0), 0.0);
        let e = SmoothFunction::exp_decay(2.0);
        assert!((e.value(1.0) - (-2f64).exp()).abs() < 1e-16);
        let t = SmoothFunction::tanh_step(1.0);
        assert_eq!(t.value(1.0), 1.0);
        assert!(t.second_derivative(0.0).unwrap() < 0.0);
        assert!(t.derivative(1e4) == 0.0);
        let r = SmoothFunction::shifted_reciprocal(-1.0);
        assert_eq!(r.value(1.0), 0.5);
        SmoothFunction::arctan();
    }

    #[test]
    fn inconsistent_derivative_is_rejected() {
        let err = SmoothFunction::new(
            "bad",
            Arc::new(|x| x * x),
            Arc::new(|x| x),
            None,
            None,
            (0.0, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InconsistentDerivative { .. }));
        let err = SmoothFunction::new(
            "bad second",
            Arc::new(|x| x * x),
            Arc::new(|x| 2.0 * x),
            Some(Arc::new(|_| 3.0)),
            None,
            (0.0, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InconsistentDerivative { .. }));
    }

    #[test]
    fn missing_capabilities_are_named() {
        let f = SmoothFunction::new("plain", Arc::new(|x| x), Arc::new(|_| 1.0), None, None, (0.0, 1.0)).unwrap();
        assert!(matches!(f.second_derivative(0.0), Err(Error::MissingCapability { what: "second derivative", .. })));
        assert!(f.analytic(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn monotonicity_sampling() {
        assert!(SmoothFunction::exp_decay(1.0).check_nonincreasing(-2.0, 2.0, 50).is_ok());
        assert!(matches!(
            SmoothFunction::identity().check_nonincreasing(0.0, 1.0, 5),
            Err(Error::NotNonincreasing { .. })
        ));
    }
}
