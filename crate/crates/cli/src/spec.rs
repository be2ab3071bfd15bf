//! Experiment specifications as read from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use specshift::flow::FamilyKind;
use specshift::SmoothFunction;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Xi,
    Krein,
    Average,
    Monotonicity,
    Concavity,
    Subadditivity,
    Kostrykin,
    Lemma21,
    Theorem23,
    Jdecomp,
    Lemma33,
    Truncation,
    Semibounded,
    Heat,
    Regularization,
}

impl Experiment {
    pub const ALL: [Experiment; 15] = [
        Experiment::Xi,
        Experiment::Krein,
        Experiment::Average,
        Experiment::Monotonicity,
        Experiment::Concavity,
        Experiment::Subadditivity,
        Experiment::Kostrykin,
        Experiment::Lemma21,
        Experiment::Theorem23,
        Experiment::Jdecomp,
        Experiment::Lemma33,
        Experiment::Truncation,
        Experiment::Semibounded,
        Experiment::Heat,
        Experiment::Regularization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Xi => "xi",
            Experiment::Krein => "krein",
            Experiment::Average => "average",
            Experiment::Monotonicity => "monotonicity",
            Experiment::Concavity => "concavity",
            Experiment::Subadditivity => "subadditivity",
            Experiment::Kostrykin => "kostrykin",
            Experiment::Lemma21 => "lemma21",
            Experiment::Theorem23 => "theorem23",
            Experiment::Jdecomp => "jdecomp",
            Experiment::Lemma33 => "lemma33",
            Experiment::Truncation => "truncation",
            Experiment::Semibounded => "semibounded",
            Experiment::Heat => "heat",
            Experiment::Regularization => "regularization",
        }
    }
}

/// Evenly spaced grid `lo, ..., hi` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points }
    }

    pub fn values(&self) -> Vec<f64> {
        specshift::flow::linspace(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub a: f64,
    pub b: f64,
    pub half_height: f64,
    pub margin: f64,
}

/// Test function by name; see [`PhiSpec::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Identity,
    Polynomial { coefficients: Vec<f64> },
    ExpDecay { t: f64 },
    Arctan,
    TanhStep { c: f64 },
    TanhRise { c: f64 },
    ShiftedReciprocal { c: f64 },
    MuEps { mu: f64, eps: f64 },
    Affine { of: Box<PhiSpec>, scale: f64, offset: f64 },
}

impl PhiSpec {
    pub fn build(&self) -> Result<SmoothFunction, CliError> {
        Ok(match self {
            PhiSpec::Identity => SmoothFunction::identity(),
            PhiSpec::Polynomial { coefficients } => SmoothFunction::polynomial(coefficients),
            PhiSpec::ExpDecay { t } => SmoothFunction::exp_decay(*t),
            PhiSpec::Arctan => SmoothFunction::arctan(),
            PhiSpec::TanhStep { c } => SmoothFunction::tanh_step(*c),
            PhiSpec::TanhRise { c } => SmoothFunction::tanh_rise(*c),
            PhiSpec::ShiftedReciprocal { c } => SmoothFunction::shifted_reciprocal(*c),
            PhiSpec::MuEps { mu, eps } => specshift::analytic::phi_mu_eps(*mu, *eps)?,
            PhiSpec::Affine { of, scale, offset } => of.build()?.affine(*scale, *offset),
        })
    }
}

/// Optional experiment parameters; unset fields take per-experiment defaults
/// documented in the README.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_poles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_segment: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub seed: u64,
    pub dim: usize,
    pub family_kind: FamilyKind,
    pub scale: f64,
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Params,
}

pub const MAX_DIM: usize = 64;
const MAX_GRID_POINTS: usize = 10_001;
const MAX_N_POINTS: usize = 65_536;

fn field(name: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: name.to_string(),
        message: message.into(),
    }
}

fn finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(field(name, "must be finite"))
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {x}")))
    }
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.in_file(path))
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(field("dim", format!("must be between 1 and {MAX_DIM}, got {}", self.dim)));
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(field("scale", format!("must be finite and nonnegative, got {}", self.scale)));
        }
        let p = &self.params;
        for (name, v) in [("params.mu", p.mu), ("params.s", p.s)] {
            if let Some(v) = v {
                finite(name, v)?;
            }
        }
        if let Some([lo, hi]) = p.interval {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(field("params.interval", "must be finite with lo < hi"));
            }
        }
        if let Some(g) = p.grid {
            finite("params.grid.lo", g.lo)?;
            finite("params.grid.hi", g.hi)?;
            if g.lo >= g.hi {
                return Err(field("params.grid", "needs lo < hi"));
            }
            if !(2..=MAX_GRID_POINTS).contains(&g.points) {
                return Err(field("params.grid.points", format!("must be between 2 and {MAX_GRID_POINTS}")));
            }
        }
        if let Some(t) = p.tol {
            positive("params.tol", t)?;
        }
        if let Some(c) = p.contour {
            finite("params.contour.a", c.a)?;
            finite("params.contour.b", c.b)?;
            positive("params.contour.half_height", c.half_height)?;
            positive("params.contour.margin", c.margin)?;
            if c.a >= c.b {
                return Err(field("params.contour", "needs a < b"));
            }
        }
        if let Some(n) = p.n_points {
            if !(64..=MAX_N_POINTS).contains(&n) {
                return Err(field("params.n_points", format!("must be between 64 and {MAX_N_POINTS}")));
            }
        }
        if let Some(ns) = &p.n {
            if ns.is_empty() || ns.iter().any(|&n| !(1..=4096).contains(&n)) {
                return Err(field("params.n", "must be a nonempty list of integers in 1..=4096"));
            }
        }
        for (name, list) in [("params.cutoffs", &p.cutoffs), ("params.eps", &p.eps), ("params.t", &p.t)] {
            if let Some(list) = list {
                if list.is_empty() {
                    return Err(field(name, "must be nonempty"));
                }
                for (i, &x) in list.iter().enumerate() {
                    positive(&format!("{name}[{i}]"), x)?;
                }
            }
        }
        if let Some(m) = p.max_poles {
            if !(1..=32).contains(&m) {
                return Err(field("params.max_poles", "must be between 1 and 32"));
            }
        }
        for (name, d) in [("params.inner_dim", p.inner_dim), ("params.high_dim", p.high_dim)] {
            if let Some(d) = d {
                if d > MAX_DIM {
                    return Err(field(name, format!("must be at most {MAX_DIM}")));
                }
            }
        }
        if let Some(phi) = &p.phi {
            phi.build().map_err(|e| field("params.phi", e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"seed": 1, "dim": 3, "family_kind": "linear", "scale": 0.5, "experiment": "xi"}"#;

    #[test]
    fn minimal_spec_parses_with_default_params() {
        let spec = InstanceSpec::from_json(MINIMAL).unwrap();
        assert_eq!(spec.params, Params::default());
        assert_eq!(spec.experiment, Experiment::Xi);
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = InstanceSpec::from_json("{\n  \"seed\": 1,\n  \"dim\": \"three\"\n}").unwrap_err();
        match err {
            CliError::Schema { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            InstanceSpec::from_json(&MINIMAL.replace("\"xi\"", "\"nope\"")),
            Err(CliError::Schema { .. })
        ));
    }

    #[test]
    fn range_errors_name_the_field() {
        let err = InstanceSpec::from_json(&MINIMAL.replace("\"dim\": 3", "\"dim\": 65")).unwrap_err();
        assert!(matches!(err, CliError::Invalid { ref field, .. } if field == "dim"));
        let spec = MINIMAL.replace("}", r#", "params": {"grid": {"lo": 0, "hi": 1, "points": 1}}}"#);
        let err = InstanceSpec::from_json(&spec).unwrap_err();
        assert!(matches!(err, CliError::Invalid { ref field, .. } if field == "params.grid.points"));
        let spec = MINIMAL.replace("}", r#", "params": {"eps": [0.1, -1]}}"#);
        let err = InstanceSpec::from_json(&spec).unwrap_err();
        assert!(matches!(err, CliError::Invalid { ref field, .. } if field == "params.eps[1]"));
    }

    #[test]
    fn phi_specs_build() {
        let phi: PhiSpec = serde_json::from_str(
            r#"{"kind": "affine", "of": {"kind": "exp_decay", "t": 1.0}, "scale": -1.0, "offset": 0.5}"#,
        )
        .unwrap();
        let f = phi.build().unwrap();
        assert!((f.value(0.0) + 0.5).abs() < 1e-15);
        assert!(PhiSpec::MuEps { mu: 0.0, eps: 0.0 }.build().is_err());
    }
}
