use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float printed with 17 significant digits, or `null` when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Sig17 {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            // normalise -0 so reports do not depend on the sign of zero
            let x = if self.0 == 0.0 { 0.0 } else { self.0 };
            format!("{x:.16e}")
        } else {
            "null".to_string()
        }
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.text()).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

/// Payload attached to a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Data {
    Scalar(Sig17),
    Vector(Vec<Sig17>),
    Matrix(Vec<Vec<Sig17>>),
    /// Complex vector as `[re, im]` pairs.
    Spinor(Vec<[Sig17; 2]>),
    Text(String),
    List(Vec<Data>),
}

impl Data {
    pub fn vector(v: &[f64]) -> Self {
        Data::Vector(v.iter().copied().map(Sig17).collect())
    }

    pub fn matrix(m: &DMatrix<f64>) -> Self {
        Data::Matrix(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| Sig17(m[(i, j)])).collect())
                .collect(),
        )
    }

    pub fn spinor(v: &DVector<Complex64>) -> Self {
        Data::Spinor(v.iter().map(|z| [Sig17(z.re), Sig17(z.im)]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: Sig17,
    pub tolerance: Sig17,
    pub passed: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, Data>,
}

impl Check {
    /// Passes when `residual <= tolerance` (so NaN fails).
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual: Sig17(residual),
            tolerance: Sig17(tolerance),
            passed: residual <= tolerance,
            data: BTreeMap::new(),
        }
    }

    /// Passes when `residual > tolerance`; used where a residual must not vanish.
    pub fn above(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            passed: residual > tolerance,
            ..Check::at_most(name, residual, tolerance)
        }
    }

    pub fn with(mut self, key: &str, data: Data) -> Self {
        self.data.insert(key.to_string(), data);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene_hash: Option<String>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Report {
            tool: "kosmann",
            version: env!("CARGO_PKG_VERSION"),
            command,
            scene_hash: None,
            seed,
            checks: Vec::new(),
            warnings: Vec::new(),
            passed: true,
            timing_ms: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One line per check, for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<48} residual {:>12} tol {:>8}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                short(c.residual.0),
                short(c.tolerance.0),
            );
            for (k, v) in &c.data {
                if let Data::Text(t) = v {
                    let _ = writeln!(out, "     {k}: {t}");
                }
            }
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(out, "elapsed {ms} ms");
        }
        let _ = writeln!(out, "{}", if self.passed { "all checks passed" } else { "some checks failed" });
        out
    }
}

fn short(x: f64) -> String {
    format!("{x:.3e}")
}
