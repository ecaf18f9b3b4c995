use std::collections::BTreeMap;
use std::path::Path;

use kosmann_core::exprcore::{parse, Expr, PointBinding};
use kosmann_core::geometry::{orthonormal_frame, Chart, ExprMatrix, FrameField, MetricField, VectorFieldExpr};
use kosmann_core::spinor::{build_gamma, GammaRep, SpinorFieldExpr};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema: u32,
    pub dimension: usize,
    pub signature: [usize; 2],
    pub coordinates: Vec<String>,
    pub metric: BTreeMap<String, String>,
    #[serde(default)]
    pub frame: Option<Vec<Vec<String>>>,
    pub vector_fields: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub spinor: Option<SpinorSpec>,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorSpec {
    pub re: Vec<String>,
    pub im: Vec<String>,
}

/// Tolerance classes: exact symbolic residuals, mixed symbolic/numeric
/// identities, and flow-oracle comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub symbolic: f64,
    pub mixed: f64,
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symbolic: 1e-12,
            mixed: 1e-9,
            oracle: 1e-6,
        }
    }
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub chart: Chart,
    pub metric: MetricField,
    frame: Option<FrameField>,
    pub fields: BTreeMap<String, VectorFieldExpr>,
    pub spinor: Option<SpinorFieldExpr>,
    pub points: Vec<PointBinding>,
    pub tolerances: Tolerances,
    /// SHA-256 of the scene file bytes.
    pub hash: String,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn parse_expr(text: &str, what: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| input(format!("{what}: cannot parse {text:?}: {e}")))
}

fn metric_key(key: &str, m: usize) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = if key.contains(',') {
        key.split(',').map(str::trim).collect()
    } else {
        key.char_indices().map(|(i, c)| &key[i..i + c.len_utf8()]).collect()
    };
    let bad = || input(format!("metric key {key:?} is not a pair of indices below {m}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let mu: usize = parts[0].parse().map_err(|_| bad())?;
    let nu: usize = parts[1].parse().map_err(|_| bad())?;
    if mu >= m || nu >= m {
        return Err(bad());
    }
    Ok((mu, nu))
}

impl Scene {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CliError> {
        let file: SceneFile =
            serde_json::from_slice(bytes).map_err(|e| input(format!("malformed scene: {e}")))?;
        let hash = hex::encode(Sha256::digest(bytes));
        Self::from_file(file, hash)
    }

    fn from_file(file: SceneFile, hash: String) -> Result<Self, CliError> {
        if file.schema != SCHEMA_VERSION {
            return Err(input(format!(
                "unsupported scene schema {} (expected {SCHEMA_VERSION})",
                file.schema
            )));
        }
        let m = file.dimension;
        let [p, q] = file.signature;
        if p + q != m {
            return Err(input(format!("signature ({p},{q}) does not sum to dimension {m}")));
        }
        if file.coordinates.len() != m {
            return Err(input(format!(
                "{} coordinate names for dimension {m}",
                file.coordinates.len()
            )));
        }
        let chart = Chart::new(&file.coordinates, p, q).map_err(|e| input(e.to_string()))?;

        let mut entries: Vec<Vec<Option<Expr>>> = vec![vec![None; m]; m];
        for (key, text) in &file.metric {
            let (mu, nu) = metric_key(key, m)?;
            let e = parse_expr(text, &format!("metric {key}"))?;
            for (a, b) in [(mu, nu), (nu, mu)] {
                match &entries[a][b] {
                    Some(prev) if prev.simplify() != e.simplify() => {
                        return Err(input(format!("metric entries {mu}{nu} and {nu}{mu} differ")));
                    }
                    _ => entries[a][b] = Some(e.clone()),
                }
            }
        }
        let comps = ExprMatrix::from_fn(m, |a, b| entries[a][b].clone().unwrap_or_else(Expr::zero));
        let metric = MetricField::new(chart.clone(), comps).map_err(|e| input(e.to_string()))?;

        if file.points.is_empty() {
            return Err(input("scene has no evaluation points"));
        }
        let points = file
            .points
            .iter()
            .enumerate()
            .map(|(i, pt)| {
                if pt.len() != m {
                    return Err(input(format!("point {i} has {} coordinates, expected {m}", pt.len())));
                }
                if pt.iter().any(|x| !x.is_finite()) {
                    return Err(input(format!("point {i} is not finite")));
                }
                Ok(chart.point(pt))
            })
            .collect::<Result<Vec<_>, _>>()?;
        metric.check_at(&points).map_err(|e| input(e.to_string()))?;

        let frame = match &file.frame {
            None => None,
            Some(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(input(format!("frame must be {m}x{m}")));
                }
                let parsed = rows
                    .iter()
                    .enumerate()
                    .map(|(a, r)| {
                        r.iter()
                            .map(|t| parse_expr(t, &format!("frame row {a}")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let em = ExprMatrix::from_rows(parsed).map_err(|e| input(e.to_string()))?;
                let frame = FrameField::new(chart.clone(), em).map_err(|e| input(e.to_string()))?;
                let (dual, ortho) = frame.check(&metric, &points).map_err(|e| input(e.to_string()))?;
                if dual > file.tolerances.mixed || ortho > file.tolerances.mixed {
                    return Err(input(format!(
                        "frame is not orthonormal at the scene points (duality {dual:e}, orthonormality {ortho:e})"
                    )));
                }
                Some(frame)
            }
        };

        let fields = file
            .vector_fields
            .iter()
            .map(|(name, comps)| {
                if comps.len() != m {
                    return Err(input(format!("field {name} has {} components, expected {m}", comps.len())));
                }
                let exprs = comps
                    .iter()
                    .map(|t| parse_expr(t, &format!("field {name}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((name.clone(), VectorFieldExpr(exprs)))
            })
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;

        let spinor = match &file.spinor {
            None => None,
            Some(spec) => {
                let rep = gamma_for(&chart)?;
                let re = spec
                    .re
                    .iter()
                    .map(|t| parse_expr(t, "spinor re"))
                    .collect::<Result<Vec<_>, _>>()?;
                let im = spec
                    .im
                    .iter()
                    .map(|t| parse_expr(t, "spinor im"))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(SpinorFieldExpr::new(&rep, re, im).map_err(|e| input(e.to_string()))?)
            }
        };

        Ok(Scene {
            chart,
            metric,
            frame,
            fields,
            spinor,
            points,
            tolerances: file.tolerances,
            hash,
        })
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn field(&self, name: &str) -> Result<&VectorFieldExpr, CliError> {
        self.fields.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.fields.keys().map(String::as_str).collect();
            input(format!("unknown field {name:?}; scene has {}", known.join(", ")))
        })
    }

    /// The scene frame, or the diagonal orthonormal frame of the metric.
    pub fn frame(&self) -> Result<FrameField, CliError> {
        match &self.frame {
            Some(f) => Ok(f.clone()),
            None => orthonormal_frame(&self.metric, &self.points).map_err(|e| {
                input(format!("scene has no frame and none can be built symbolically: {e}"))
            }),
        }
    }

    pub fn spinor(&self) -> Result<&SpinorFieldExpr, CliError> {
        self.spinor
            .as_ref()
            .ok_or_else(|| input("scene has no spinor field"))
    }

    pub fn gamma(&self) -> Result<GammaRep, CliError> {
        gamma_for(&self.chart)
    }
}

fn gamma_for(chart: &Chart) -> Result<GammaRep, CliError> {
    let s = chart.signature();
    build_gamma(s.p, s.q).map_err(|e| input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema":1,"dimension":2,"signature":[2,0],"coordinates":["x0","x1"],
        "metric":{"00":"1","11":"x0^2"},"vector_fields":{"r":["0","1"]},"points":[[1.0,0.5]]}"#;

    #[test]
    fn loads_minimal_scene() {
        let s = Scene::from_bytes(MINIMAL.as_bytes()).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.tolerances, Tolerances::default());
        assert!(s.spinor().is_err());
        assert_eq!(s.hash.len(), 64);
        assert!(s.frame().is_ok());
    }

    #[test]
    fn metric_is_completed_symmetrically() {
        let text = MINIMAL.replace(r#""11":"x0^2""#, r#""11":"x0^2","0,1":"x1/4""#);
        let s = Scene::from_bytes(text.as_bytes()).unwrap();
        assert_eq!(s.metric.get(1, 0), s.metric.get(0, 1));
    }

    #[test]
    fn rejects_malformed_scenes() {
        for (from, to) in [
            (r#""schema":1"#, r#""schema":2"#),
            (r#""signature":[2,0]"#, r#""signature":[1,0]"#),
            (r#""11":"x0^2""#, r#""11":"x0^^2""#),
            (r#""11":"x0^2""#, r#""12":"x0""#),
            (r#"[[1.0,0.5]]"#, r#"[[1.0]]"#),
            (r#"[[1.0,0.5]]"#, r#"[]"#),
            (r#""r":["0","1"]"#, r#""r":["0"]"#),
            (r#""schema":1"#, r#""schema":1,"extra":0"#),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(
                matches!(Scene::from_bytes(text.as_bytes()), Err(CliError::Input(_))),
                "{to}"
            );
        }
    }

    #[test]
    fn conflicting_metric_entries() {
        let text = MINIMAL.replace(r#""11":"x0^2""#, r#""11":"x0^2","01":"1","10":"2""#);
        assert!(Scene::from_bytes(text.as_bytes()).is_err());
    }
}
