//! Scenario files: metric, connection source, torsion inputs, sample plan,
//! tolerances and the list of checks to run.
//!
//! The format is TOML; `docs/scenario-format.md` describes every key.

use std::path::Path;

use ndarray::Array3;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connection::{ConnectionError, ConnectionSource, SkewTensor, TorsionInputs};
use crate::expr::{parse, Expr};
use crate::jet::MAX_VARS;
use crate::metric::{check_homogeneity, presets, MetricConfig, MetricSpec};
use crate::report::CheckId;
use crate::sampling::SamplePlan;
use crate::tolerance::{Discrepancy, Tolerance};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field '{field}': {message}")]
    Invalid { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: &str, message: impl ToString) -> Self {
        ScenarioError::Invalid {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

/// Source text of a skew tensor entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SkewConfig {
    #[default]
    Zero,
    /// `values[k][i][j]`, 1-based in messages.
    Constant {
        values: Vec<Vec<Vec<f64>>>,
    },
    Expression {
        values: Vec<Vec<Vec<String>>>,
    },
    /// Uniform entries in `[-scale, scale]`, mirrored to be exactly skew.
    Random {
        #[serde(default = "default_scale")]
        scale: f64,
        seed: u64,
    },
}

fn default_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionConfig {
    #[serde(default)]
    pub s: SkewConfig,
    #[serde(default)]
    pub t: SkewConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionConfig {
    #[default]
    Canonical,
    Zero,
    /// `n[i][j]` is the expression for `N^i_j`.
    Expression {
        n: Vec<Vec<String>>,
    },
}

/// The file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    /// A preset name or a `[metric]` table (see [`MetricConfig`]).
    pub metric: toml::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub connection: ConnectionConfig,
    #[serde(default)]
    pub torsion: TorsionConfig,
    #[serde(default)]
    pub samples: SamplePlan,
    #[serde(default)]
    pub tolerances: Tolerance,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub metric: MetricSpec,
    pub connection: ConnectionSource,
    pub torsion: TorsionInputs,
    pub samples: SamplePlan,
    pub tolerance: Tolerance,
    pub checks: Vec<CheckId>,
    /// `F*(x, 2y)` against `4 F*(x, y)` at the first sample point.
    pub load_homogeneity: Option<Discrepancy>,
    /// Non-fatal findings made while loading.
    pub warnings: Vec<String>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        ScenarioError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    file.validate()
}

fn expr(src: &str, dim: usize, field: &str) -> Result<Expr, ScenarioError> {
    parse(src, dim).map_err(|e| ScenarioError::invalid(field, e))
}

fn is_cube<T>(v: &[Vec<Vec<T>>], dim: usize) -> bool {
    v.len() == dim
        && v.iter()
            .all(|plane| plane.len() == dim && plane.iter().all(|row| row.len() == dim))
}

fn skew_from_config(
    name: &str,
    cfg: &SkewConfig,
    dim: usize,
    probes: &[crate::metric::ChartPoint],
) -> Result<SkewTensor, ScenarioError> {
    let field = format!("torsion.{}", name.to_lowercase());
    let shape_err = || ScenarioError::invalid(&field, format!("values must be {dim}x{dim}x{dim}"));
    let wrap = |e: ConnectionError| match e {
        ConnectionError::Geometry(g) => ScenarioError::invalid(&field, g),
        other => ScenarioError::invalid(&field, other),
    };
    match cfg {
        SkewConfig::Zero => Ok(SkewTensor::Zero),
        SkewConfig::Constant { values } => {
            if !is_cube(values, dim) {
                return Err(shape_err());
            }
            let flat: Vec<f64> = values.iter().flatten().flatten().copied().collect();
            let a = Array3::from_shape_vec((dim, dim, dim), flat).map_err(|_| shape_err())?;
            SkewTensor::constant(name, a).map_err(wrap)
        }
        SkewConfig::Expression { values } => {
            if !is_cube(values, dim) {
                return Err(shape_err());
            }
            let mut exprs = Vec::with_capacity(dim * dim * dim);
            for (k, plane) in values.iter().enumerate() {
                for (i, row) in plane.iter().enumerate() {
                    for (j, src) in row.iter().enumerate() {
                        exprs.push(expr(
                            src,
                            dim,
                            &format!("{field}.values[{}][{}][{}]", k + 1, i + 1, j + 1),
                        )?);
                    }
                }
            }
            let a = Array3::from_shape_vec((dim, dim, dim), exprs).map_err(|_| shape_err())?;
            SkewTensor::expression(name, a, probes).map_err(wrap)
        }
        SkewConfig::Random { scale, seed } => {
            if !(scale.is_finite() && *scale >= 0.0) {
                return Err(ScenarioError::invalid(
                    &format!("{field}.scale"),
                    "must be finite and non-negative",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok(SkewTensor::random(dim, *scale, &mut rng))
        }
    }
}

/// Points where expression-valued inputs are probed at load time.
const LOAD_PROBES: usize = 5;

impl ScenarioFile {
    pub fn validate(&self) -> Result<Scenario, ScenarioError> {
        let dim = self.dim;
        if dim == 0 || 2 * dim > MAX_VARS {
            return Err(ScenarioError::invalid(
                "dim",
                format!("must be between 1 and {}", MAX_VARS / 2),
            ));
        }
        let metric = match &self.metric {
            toml::Value::String(name) => presets::by_name(name, dim),
            table @ toml::Value::Table(_) => MetricConfig::deserialize(table.clone())
                .map_err(|e| ScenarioError::invalid("metric", e.message()))?
                .build(dim),
            _ => {
                return Err(ScenarioError::invalid(
                    "metric",
                    "expected a preset name or a table",
                ))
            }
        }
        .map_err(|e| ScenarioError::invalid("metric", e))?;

        self.samples
            .validate()
            .map_err(|(field, m)| ScenarioError::invalid(field, m))?;
        let tol = self.tolerances;
        if !(tol.atol.is_finite() && tol.atol > 0.0) {
            return Err(ScenarioError::invalid(
                "tolerances.atol",
                "must be positive",
            ));
        }
        if !(tol.rtol.is_finite() && tol.rtol > 0.0) {
            return Err(ScenarioError::invalid(
                "tolerances.rtol",
                "must be positive",
            ));
        }

        let connection = match &self.connection {
            ConnectionConfig::Canonical => ConnectionSource::Canonical,
            ConnectionConfig::Zero => ConnectionSource::Zero,
            ConnectionConfig::Expression { n } => {
                let exprs = n
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, s)| {
                                expr(s, dim, &format!("connection.n[{}][{}]", i + 1, j + 1))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ConnectionSource::expression(exprs, dim)
                    .map_err(|e| ScenarioError::invalid("connection.n", e))?
            }
        };

        let probe_plan = SamplePlan {
            count: self.samples.count.min(LOAD_PROBES),
            ..self.samples.clone()
        };
        let probes = probe_plan
            .points(dim)
            .map_err(|e| ScenarioError::invalid("samples", e))?;
        let torsion = TorsionInputs::new(
            skew_from_config("S", &self.torsion.s, dim, &probes)?,
            skew_from_config("T", &self.torsion.t, dim, &probes)?,
        );

        let checks = match &self.checks {
            None => CheckId::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| CheckId::from_name(n).ok_or_else(|| unknown_check(n)))
                .collect::<Result<Vec<_>, _>>()?,
        };

        let mut warnings = Vec::new();
        let load_homogeneity = match check_homogeneity(&metric, &probes[0], 2.0) {
            Ok(h) => {
                if !h.scaling.within(&tol) {
                    warnings.push(format!(
                        "energy is not 2-homogeneous in y: |F*(x,2y) - 4F*(x,y)| = {:e} at the first sample point",
                        h.scaling.diff
                    ));
                }
                Some(h.scaling)
            }
            Err(e) => {
                warnings.push(format!(
                    "homogeneity probe failed at the first sample point: {e}"
                ));
                None
            }
        };

        Ok(Scenario {
            metric,
            connection,
            torsion,
            samples: self.samples.clone(),
            tolerance: tol,
            checks,
            load_homogeneity,
            warnings,
        })
    }
}

pub(crate) fn unknown_check(name: &str) -> ScenarioError {
    ScenarioError::invalid(
        "checks",
        format!(
            "unknown check '{name}' (known: {})",
            CheckId::ALL
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

impl Scenario {
    /// Restricts the run to the named checks.
    pub fn select(&mut self, names: &[String]) -> Result<(), ScenarioError> {
        self.checks = names
            .iter()
            .map(|n| CheckId::from_name(n.trim()).ok_or_else(|| unknown_check(n)))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    pub fn set_tolerance(
        &mut self,
        atol: Option<f64>,
        rtol: Option<f64>,
    ) -> Result<(), ScenarioError> {
        if let Some(a) = atol {
            if !(a.is_finite() && a > 0.0) {
                return Err(ScenarioError::invalid("atol", "must be positive"));
            }
            self.tolerance.atol = a;
        }
        if let Some(r) = rtol {
            if !(r.is_finite() && r > 0.0) {
                return Err(ScenarioError::invalid("rtol", "must be positive"));
            }
            self.tolerance.rtol = r;
        }
        Ok(())
    }

    pub fn set_samples(
        &mut self,
        count: Option<usize>,
        seed: Option<u64>,
    ) -> Result<(), ScenarioError> {
        if let Some(c) = count {
            if c == 0 {
                return Err(ScenarioError::invalid("samples", "must be at least 1"));
            }
            self.samples.count = c;
        }
        if let Some(s) = seed {
            self.samples.seed = s;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let s = parse_scenario("dim = 2\nmetric = \"euclidean\"\n").unwrap();
        assert_eq!(s.metric.dim(), 2);
        assert_eq!(s.connection, ConnectionSource::Canonical);
        assert!(s.torsion.s.is_zero() && s.torsion.t.is_zero());
        assert_eq!(s.samples.count, 200);
        assert_eq!(s.tolerance, Tolerance::default());
        assert_eq!(s.checks, CheckId::ALL.to_vec());
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn non_skew_constant_s_is_rejected() {
        let text = r#"
dim = 2
metric = "euclidean"
[torsion.s]
kind = "constant"
values = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
"#;
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(
            err.contains("S violates skew-symmetry at (k,i,j)=(1,1,1)"),
            "{err}"
        );
        assert!(err.contains("torsion.s"), "{err}");
    }

    #[test]
    fn expression_metric_loads_and_is_homogeneous() {
        let text = r#"
dim = 2
[metric]
family = "expression"
f = "y1^2+y2^2+x1*y1*y2"
"#;
        let s = parse_scenario(text).unwrap();
        assert!(s.warnings.is_empty(), "{:?}", s.warnings);
        assert!(s.load_homogeneity.unwrap().within(&s.tolerance));
    }

    #[test]
    fn non_homogeneous_expression_is_flagged() {
        let text = "dim = 2\n[metric]\nfamily = \"expression\"\nf = \"y1^3 + y2^2\"\n";
        let s = parse_scenario(text).unwrap();
        assert!(!s.load_homogeneity.unwrap().within(&s.tolerance));
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_scenario("dim = 2\nmetric = \"euclidean\n").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
        let err = parse_scenario("dim = 2\nmetric = \"euclidean\"\nsampels = 3\n").unwrap_err();
        match err {
            ScenarioError::Parse { line, column, .. } => assert_eq!((line, column), (3, 1)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn validation_errors_name_the_field() {
        let cases = [
            ("dim = 0\nmetric = \"euclidean\"\n", "dim"),
            ("dim = 2\nmetric = \"nope\"\n", "metric"),
            ("dim = 2\nmetric = \"euclidean\"\n[samples]\ncount = 0\n", "samples.count"),
            ("dim = 2\nmetric = \"euclidean\"\n[tolerances]\natol = 0.0\nrtol = 1e-8\n", "tolerances.atol"),
            ("dim = 2\nmetric = \"euclidean\"\nchecks = [\"bogus\"]\n", "checks"),
            (
                "dim = 2\nmetric = \"euclidean\"\n[connection]\nkind = \"expression\"\nn = [[\"x1\", \"0\"], [\"0\", \"y9\"]]\n",
                "connection.n[2][2]",
            ),
        ];
        for (text, field) in cases {
            match parse_scenario(text).unwrap_err() {
                ScenarioError::Invalid { field: f, .. } => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other}"),
            }
        }
    }

    #[test]
    fn random_torsion_is_reproducible() {
        let text = "dim = 3\nmetric = \"randers\"\n[torsion.s]\nkind = \"random\"\nseed = 4\n[torsion.t]\nkind = \"random\"\nseed = 5\nscale = 0.1\n";
        let a = parse_scenario(text).unwrap();
        let b = parse_scenario(text).unwrap();
        assert_eq!(a.torsion, b.torsion);
        assert_ne!(a.torsion.s, a.torsion.t);
    }

    #[test]
    fn expression_torsion_is_probed() {
        let text = r#"
dim = 2
metric = "euclidean"
[torsion.t]
kind = "expression"
values = [[["0", "x1"], ["-x1", "0"]], [["0", "y2"], ["y2", "0"]]]
"#;
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(
            err.contains("T violates skew-symmetry at (k,i,j)=(2,1,2)"),
            "{err}"
        );
    }
}
