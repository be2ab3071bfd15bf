//! Exact piecewise-constant functions on the real line.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-continuous step function: `values[0]` on `(-inf, b_1)`, `values[i]`
/// on `[b_i, b_{i+1})`, `values[m]` on `[b_m, +inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::DimensionMismatch {
                context: "step function values",
                expected: breakpoints.len() + 1,
                found: values.len(),
            });
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("step function entries must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints must be strictly ascending"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![c],
        }
    }

    /// Counting function of a sorted list: `#{x_k < λ}`.
    pub fn counting(sorted: &[f64]) -> Self {
        let mut breakpoints = Vec::new();
        let mut values = vec![0.0];
        for (k, &x) in sorted.iter().enumerate() {
            if breakpoints.last() == Some(&x) {
                *values.last_mut().unwrap() = (k + 1) as f64;
            } else {
                breakpoints.push(x);
                values.push((k + 1) as f64);
            }
        }
        Self { breakpoints, values }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_tail(&self) -> f64 {
        self.values[0]
    }

    pub fn right_tail(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&b| b <= x)]
    }

    /// Pointwise combination on the merged breakpoint set, with redundant
    /// breakpoints removed.
    pub fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut merged: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup();
        let mut values = Vec::with_capacity(merged.len() + 1);
        values.push(op(self.left_tail(), other.left_tail()));
        values.extend(merged.iter().map(|&b| op(self.eval(b), other.eval(b))));
        Self {
            breakpoints: merged,
            values,
        }
        .pruned()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
        .pruned()
    }

    /// Drops breakpoints across which the value does not change.
    fn pruned(self) -> Self {
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut values = vec![self.values[0]];
        for (b, &v) in self.breakpoints.iter().zip(&self.values[1..]) {
            if v != *values.last().unwrap() {
                breakpoints.push(*b);
                values.push(v);
            }
        }
        Self { breakpoints, values }
    }

    /// Bounded pieces `(left, right, value)` between consecutive breakpoints.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values[1..])
            .map(|(w, &v)| (w[0], w[1], v))
    }

    fn require_zero_tails(&self) -> Result<()> {
        for tail in [self.left_tail(), self.right_tail()] {
            if tail != 0.0 {
                return Err(Error::NonzeroTail { value: tail });
            }
        }
        Ok(())
    }

    /// `∫ f` over the line; both tails must vanish.
    pub fn integral(&self) -> Result<f64> {
        self.require_zero_tails()?;
        Ok(self.pieces().map(|(l, r, v)| v * (r - l)).sum())
    }

    /// `∫ |f|` over the line; both tails must vanish.
    pub fn l1_norm(&self) -> Result<f64> {
        self.require_zero_tails()?;
        Ok(self.pieces().map(|(l, r, v)| v.abs() * (r - l)).sum())
    }

    /// `∫_{-inf}^{mu} f`; the left tail must vanish, and the right tail too
    /// when `mu = +inf`.
    pub fn integral_below(&self, mu: f64) -> Result<f64> {
        if self.left_tail() != 0.0 {
            return Err(Error::NonzeroTail {
                value: self.left_tail(),
            });
        }
        if mu == f64::INFINITY {
            return self.integral();
        }
        let mut total = 0.0;
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if b >= mu {
                break;
            }
            let end = self.breakpoints.get(i + 1).map_or(mu, |&n| n.min(mu));
            total += self.values[i + 1] * (end - b);
        }
        Ok(total)
    }

    /// `∫_{lo}^{hi} f` for `lo <= hi`, either end possibly infinite.
    pub fn integral_between(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.integral_below(hi)? - self.integral_below(lo)?)
    }

    /// `Σ_i f_i (Φ(b_{i+1}) - Φ(b_i))`, the exact integral of `f Φ'` for an
    /// antiderivative `Φ`; both tails must vanish.
    pub fn integrate_against_derivative(&self, antiderivative: impl Fn(f64) -> f64) -> Result<f64> {
        self.require_zero_tails()?;
        Ok(self
            .pieces()
            .map(|(l, r, v)| v * (antiderivative(r) - antiderivative(l)))
            .sum())
    }

    /// CSV with header `breakpoint,value`; the first row is `-inf,<left tail>`
    /// and each further row gives a breakpoint and the value to its right.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::invalid(format!("csv write: {e}"));
        w.write_record(["breakpoint", "value"]).map_err(io)?;
        w.write_record(["-inf".to_string(), self.values[0].to_string()])
            .map_err(io)?;
        for (b, v) in self.breakpoints.iter().zip(&self.values[1..]) {
            w.write_record([b.to_string(), v.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv write: {e}")))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: "missing field".into(),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        line,
                        message: e.to_string(),
                    })
            };
            let (b, v) = (field(0)?, field(1)?);
            if i == 0 {
                if b != f64::NEG_INFINITY {
                    return Err(Error::Parse {
                        line,
                        message: "first row must be the -inf tail".into(),
                    });
                }
            } else {
                breakpoints.push(b);
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "empty step function".into(),
            });
        }
        Self::new(breakpoints, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_merges_multiplicities() {
        let n = StepFunction::counting(&[2.0, 2.0]);
        assert_eq!(n.breakpoints(), &[2.0]);
        assert_eq!(n.values(), &[0.0, 2.0]);
        let n = StepFunction::counting(&[0.0, 1.0]);
        assert_eq!(n.values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn right_continuous_evaluation() {
        let f = StepFunction::new(vec![0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.eval(-1e-300), 0.0);
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.0), 0.0);
    }

    #[test]
    fn subtraction_prunes_cancelled_breakpoints() {
        let a = StepFunction::counting(&[0.0, 1.0]);
        let b = StepFunction::counting(&[0.0, 2.0]);
        let d = a.sub(&b);
        assert_eq!(d.breakpoints(), &[1.0, 2.0]);
        assert_eq!(d.values(), &[0.0, 1.0, 0.0]);
        assert!(a.sub(&a).breakpoints().is_empty());
    }

    #[test]
    fn integrals() {
        let f = StepFunction::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, -1.0, 0.0]).unwrap();
        assert_eq!(f.integral().unwrap(), 0.0);
        assert_eq!(f.l1_norm().unwrap(), 4.0);
        assert_eq!(f.integral_below(0.5).unwrap(), 1.0);
        assert_eq!(f.integral_below(2.0).unwrap(), 1.0);
        assert_eq!(f.integral_below(-5.0).unwrap(), 0.0);
        assert_eq!(f.integral_below(10.0).unwrap(), 0.0);
        assert_eq!(f.integral_below(f64::INFINITY).unwrap(), 0.0);
        assert_eq!(f.integral_between(0.5, 2.0).unwrap(), 0.0);
        assert_eq!(f.integral_between(f64::NEG_INFINITY, 1.0).unwrap(), 2.0);
        assert_eq!(f.integrate_against_derivative(|x| x * x).unwrap(), 2.0 - 8.0);
        let tail = StepFunction::new(vec![0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(tail.integral_below(1.0), Err(Error::NonzeroTail { value: 1.0 }));
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let f = StepFunction::new(vec![0.0, 0.1], vec![0.0, 1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "breakpoint,value\n-inf,0\n0,1\n0.1,0\n");
        assert_eq!(StepFunction::read_csv(text.as_bytes()).unwrap(), f);
        assert!(StepFunction::read_csv("breakpoint,value\n0,1\n".as_bytes()).is_err());
    }
}
