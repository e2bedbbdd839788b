//! Text form of a [`MetricSpec`] as it appears in scenario files.

use serde::{Deserialize, Serialize};

use super::{presets, Family, GeometryError, MetricSpec};
use crate::expr::{parse, Expr};

/// A matrix or vector entry: a number or an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Number(f64),
    Text(String),
}

impl Coeff {
    fn to_expr(&self, dim: usize, field: &str) -> Result<Expr, GeometryError> {
        let src = match self {
            Coeff::Number(v) => format!("{v:?}"),
            Coeff::Text(s) => s.clone(),
        };
        parse(&src, dim).map_err(|e| GeometryError::Invalid(format!("{field}: {e}")))
    }

    fn from_expr(e: &Expr) -> Coeff {
        match e.root().constant_value() {
            Some(v) if !e.root().has_vars() && e.to_string() == format!("{v:?}") => {
                Coeff::Number(v)
            }
            _ => Coeff::Text(e.to_string()),
        }
    }
}

/// `[metric]` table of a scenario file, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Preset {
        name: String,
    },
    Euclidean,
    Riemannian {
        a: Vec<Vec<Coeff>>,
    },
    Randers {
        a: Vec<Vec<Coeff>>,
        b: Vec<Coeff>,
    },
    Minkowski {
        f: String,
    },
    Pseudo {
        a: Vec<Vec<f64>>,
        signature: usize,
    },
    Expression {
        f: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signature: Option<usize>,
    },
}

fn matrix(a: &[Vec<Coeff>], dim: usize, field: &str) -> Result<Vec<Vec<Expr>>, GeometryError> {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| c.to_expr(dim, &format!("{field}[{}][{}]", i + 1, j + 1)))
                .collect()
        })
        .collect()
}

fn parse_field(src: &str, dim: usize, field: &str) -> Result<Expr, GeometryError> {
    parse(src, dim).map_err(|e| GeometryError::Invalid(format!("{field}: {e}")))
}

impl MetricConfig {
    pub fn build(&self, dim: usize) -> Result<MetricSpec, GeometryError> {
        let family = match self {
            MetricConfig::Preset { name } => return presets::by_name(name, dim),
            MetricConfig::Euclidean => Family::Euclidean,
            MetricConfig::Riemannian { a } => Family::Riemannian {
                a: matrix(a, dim, "metric.a")?,
            },
            MetricConfig::Randers { a, b } => Family::Randers {
                a: matrix(a, dim, "metric.a")?,
                b: b.iter()
                    .enumerate()
                    .map(|(i, c)| c.to_expr(dim, &format!("metric.b[{}]", i + 1)))
                    .collect::<Result<_, _>>()?,
            },
            MetricConfig::Minkowski { f } => Family::Minkowski {
                f: parse_field(f, dim, "metric.f")?,
            },
            MetricConfig::Pseudo { a, signature } => Family::Pseudo {
                a: a.clone(),
                negative: *signature,
            },
            MetricConfig::Expression { f, signature } => Family::Expression {
                f: parse_field(f, dim, "metric.f")?,
                negative: *signature,
            },
        };
        MetricSpec::new(dim, family)
    }
}

impl MetricSpec {
    /// Expanded, self-contained config form (presets are written out by family).
    pub fn to_config(&self) -> MetricConfig {
        let mat = |a: &[Vec<Expr>]| {
            a.iter()
                .map(|row| row.iter().map(Coeff::from_expr).collect())
                .collect()
        };
        match self.family() {
            Family::Euclidean => MetricConfig::Euclidean,
            Family::Riemannian { a } => MetricConfig::Riemannian { a: mat(a) },
            Family::Randers { a, b } => MetricConfig::Randers {
                a: mat(a),
                b: b.iter().map(Coeff::from_expr).collect(),
            },
            Family::Minkowski { f } => MetricConfig::Minkowski { f: f.to_string() },
            Family::Pseudo { a, negative } => MetricConfig::Pseudo {
                a: a.clone(),
                signature: *negative,
            },
            Family::Expression { f, negative } => MetricConfig::Expression {
                f: f.to_string(),
                signature: *negative,
            },
        }
    }
}
