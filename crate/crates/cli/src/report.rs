//! Reports and their canonical JSON form.
//!
//! Objects are written with sorted keys and every float as a 17-significant
//! digit `d.dddddddddddddddde±x` literal, so identical runs give identical
//! bytes apart from the timing field.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;
use crate::spec::InstanceSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A recorded quantity. Non-finite floats are stored as text (`"inf"`,
/// `"-inf"`, `"nan"`) because JSON has no literal for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Vector(Vec<f64>),
    Text(String),
}

impl Value {
    pub fn number(x: f64) -> Self {
        if x.is_finite() {
            Value::Number(x)
        } else {
            Value::Text(x.to_string().to_lowercase())
        }
    }

    pub fn vector(xs: &[f64]) -> Self {
        if xs.iter().all(|x| x.is_finite()) {
            Value::Vector(xs.to_vec())
        } else {
            Value::Text(format!("{xs:?}"))
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::number(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Number(x as f64)
    }
}

impl From<&[f64]> for Value {
    fn from(xs: &[f64]) -> Self {
        Value::vector(xs)
    }
}

impl From<Vec<f64>> for Value {
    fn from(xs: Vec<f64>) -> Self {
        Value::vector(&xs)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    pub fn holds(self, statistic: f64, tolerance: f64) -> bool {
        match self {
            Relation::AtMost => statistic <= tolerance,
            Relation::AtLeast => statistic >= tolerance,
        }
    }
}

/// One contract: `pass == (statistic relation tolerance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub values: BTreeMap<String, Value>,
    pub statistic: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// A non-finite statistic fails the check and is recorded as the largest
    /// finite value of the matching sign.
    fn build(name: impl Into<String>, statistic: f64, relation: Relation, tolerance: f64) -> Self {
        let finite = if statistic.is_nan() {
            match relation {
                Relation::AtMost => f64::MAX,
                Relation::AtLeast => f64::MIN,
            }
        } else {
            statistic.clamp(f64::MIN, f64::MAX)
        };
        let pass = !statistic.is_nan() && relation.holds(finite, tolerance) && statistic.is_finite();
        Check {
            name: name.into(),
            values: BTreeMap::new(),
            statistic: finite,
            relation,
            tolerance,
            pass,
        }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Self::build(name, statistic, Relation::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, tolerance: f64) -> Self {
        Self::build(name, statistic, Relation::AtLeast, tolerance)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.values.insert(key.to_string(), value.into());
        self
    }

    /// Whether the stored flag agrees with the stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.pass == self.relation.holds(self.statistic, self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: InstanceSpec,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub timing: Timing,
    pub version: String,
}

impl Report {
    pub fn new(spec: InstanceSpec, checks: Vec<Check>, elapsed_seconds: f64) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            spec,
            checks,
            pass,
            timing: Timing { elapsed_seconds },
            version: VERSION.to_string(),
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// The report with the timing zeroed, for comparisons across runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.timing.elapsed_seconds = 0.0;
        r
    }
}

/// Pretty printing with floats as `{:.16e}`.
struct CanonicalFormatter(PrettyFormatter<'static>);

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Canonical JSON text of any serializable value, newline terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let tree = serde_json::to_value(value).map_err(|e| CliError::Invalid {
        field: "report".into(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter(PrettyFormatter::new()));
    tree.serialize(&mut ser).map_err(|e| CliError::Invalid {
        field: "report".into(),
        message: e.to_string(),
    })?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
