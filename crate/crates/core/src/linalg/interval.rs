use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interval of the real line with optionally infinite, optionally closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl RealInterval {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::invalid(format!("invalid interval bounds {lower}, {upper}")));
        }
        Ok(Self {
            lower,
            upper,
            lower_closed: lower_closed && lower.is_finite(),
            upper_closed: upper_closed && upper.is_finite(),
        })
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `(-inf, mu)`.
    pub fn below(mu: f64) -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: mu,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `[mu, +inf)`.
    pub fn at_or_above(mu: f64) -> Self {
        Self {
            lower: mu,
            upper: f64::INFINITY,
            lower_closed: true,
            upper_closed: false,
        }
    }

    pub fn open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, false, false)
    }

    /// `[lower, upper)`.
    pub fn half_open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, false)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let below = if self.upper_closed { x <= self.upper } else { x < self.upper };
        above && below
    }

    /// Lebesgue measure of the intersection with `[a, b]`.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        (self.upper.min(b) - self.lower.max(a)).max(0.0)
    }

    /// `R \ self` as at most two disjoint intervals.
    pub fn complement(&self) -> Vec<RealInterval> {
        let mut out = Vec::with_capacity(2);
        if self.lower > f64::NEG_INFINITY {
            out.push(RealInterval {
                lower: f64::NEG_INFINITY,
                upper: self.lower,
                lower_closed: false,
                upper_closed: !self.lower_closed,
            });
        }
        if self.upper < f64::INFINITY {
            out.push(RealInterval {
                lower: self.upper,
                upper: f64::INFINITY,
                lower_closed: !self.upper_closed,
                upper_closed: false,
            });
        }
        out
    }
}
