//! Named witness metrics.

use super::{Family, GeometryError, MetricSpec};
use crate::expr::{parse, Expr};

fn p(src: &str, dim: usize) -> Expr {
    parse(src, dim).unwrap_or_else(|e| panic!("preset expression '{src}': {e}"))
}

fn matrix(entries: &[&[&str]], dim: usize) -> Vec<Vec<Expr>> {
    entries
        .iter()
        .map(|row| row.iter().map(|s| p(s, dim)).collect())
        .collect()
}

fn need_dim(name: &str, dim: usize, allowed: impl Fn(usize) -> bool) -> Result<(), GeometryError> {
    if allowed(dim) {
        Ok(())
    } else {
        Err(GeometryError::Invalid(format!(
            "preset '{name}' is not available in dimension {dim}"
        )))
    }
}

pub fn euclidean(dim: usize) -> Result<MetricSpec, GeometryError> {
    MetricSpec::with_label(dim, Family::Euclidean, Some("euclidean"))
}

/// `dx₁² + (x₁² + 1) dx₂²`, a negatively curved surface.
pub fn curved_plane() -> Result<MetricSpec, GeometryError> {
    MetricSpec::with_label(
        2,
        Family::Riemannian {
            a: matrix(&[&["1", "0"], &["0", "x1^2 + 1"]], 2),
        },
        Some("curved"),
    )
}

/// Round unit sphere in latitude/longitude: `dx₁² + cos²x₁ dx₂²`.
pub fn sphere_chart() -> Result<MetricSpec, GeometryError> {
    MetricSpec::with_label(
        2,
        Family::Riemannian {
            a: matrix(&[&["1", "0"], &["0", "cos(x1)^2"]], 2),
        },
        Some("sphere"),
    )
}

/// Euclidean metric pulled back by `φ(x) = (x₁ + 0.3 sin x₂, x₂ + 0.2 x₁²)`;
/// `a = DφᵀDφ` is x-dependent but flat.
pub fn pullback_flat() -> Result<MetricSpec, GeometryError> {
    MetricSpec::with_label(
        2,
        Family::Riemannian {
            a: matrix(
                &[
                    &["1 + 0.16*x1^2", "0.3*cos(x2) + 0.4*x1"],
                    &["0.3*cos(x2) + 0.4*x1", "0.09*cos(x2)^2 + 1"],
                ],
                2,
            ),
        },
        Some("pullback_flat"),
    )
}

/// x-dependent Randers energy with tridiagonal `a` and small `b`.
pub fn randers(dim: usize) -> Result<MetricSpec, GeometryError> {
    let a = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        p(&format!("1 + 0.25*x{}^2", i + 1), dim)
                    } else if i.abs_diff(j) == 1 {
                        p("0.1", dim)
                    } else {
                        p("0", dim)
                    }
                })
                .collect()
        })
        .collect();
    let c = 0.2 / (dim as f64).sqrt();
    let b = (0..dim)
        .map(|i| p(&format!("{c:?}*sin(x{} + {})", i + 1, i + 1), dim))
        .collect();
    MetricSpec::with_label(dim, Family::Randers { a, b }, Some("randers"))
}

/// Constant-coefficient Randers energy: locally Minkowski, not Riemannian.
pub fn minkowski(dim: usize) -> Result<MetricSpec, GeometryError> {
    let alpha2 = (0..dim)
        .map(|i| format!("{:?}*y{}^2", 1.0 + 0.5 * i as f64, i + 1))
        .collect::<Vec<_>>()
        .join(" + ");
    let f = p(&format!("(sqrt({alpha2}) + 0.3*y1)^2"), dim);
    MetricSpec::with_label(dim, Family::Minkowski { f }, Some("minkowski"))
}

/// Constant indefinite quadratic form with one negative direction.
pub fn pseudo(dim: usize) -> Result<MetricSpec, GeometryError> {
    need_dim("pseudo", dim, |d| d >= 2)?;
    let a = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| match (i, j) {
                    (0, 0) => -1.0,
                    (0, 1) | (1, 0) => 0.2,
                    _ if i == j => 1.0 + 0.5 * (i as f64 - 1.0),
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    MetricSpec::with_label(dim, Family::Pseudo { a, negative: 1 }, Some("pseudo"))
}

/// Quartic perturbation of the Euclidean energy with x-dependent weight.
pub fn quartic(dim: usize) -> Result<MetricSpec, GeometryError> {
    let sq = (1..=dim)
        .map(|i| format!("y{i}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let quart = (1..=dim)
        .map(|i| format!("y{i}^4"))
        .collect::<Vec<_>>()
        .join(" + ");
    let f = p(
        &format!("sqrt(({sq})^2 + 0.3*(1 + 0.5*sin(x1))*({quart}))"),
        dim,
    );
    MetricSpec::with_label(
        dim,
        Family::Expression { f, negative: None },
        Some("quartic"),
    )
}

pub const PRESET_NAMES: [&str; 9] = [
    "euclidean",
    "curved",
    "sphere",
    "pullback_flat",
    "randers",
    "minkowski",
    "pseudo",
    "quartic",
    "flat_quadratic",
];

/// Constant positive-definite quadratic energy: the simplest non-Euclidean
/// locally Minkowski metric, with vanishing Cartan tensor.
pub fn flat_quadratic(dim: usize) -> Result<MetricSpec, GeometryError> {
    let a = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        p(&format!("{:?}", 1.0 + 0.5 * i as f64), dim)
                    } else if i.abs_diff(j) == 1 {
                        p("0.3", dim)
                    } else {
                        p("0", dim)
                    }
                })
                .collect()
        })
        .collect();
    MetricSpec::with_label(dim, Family::Riemannian { a }, Some("flat_quadratic"))
}

pub fn by_name(name: &str, dim: usize) -> Result<MetricSpec, GeometryError> {
    let only2 = |d: usize| d == 2;
    match name {
        "euclidean" => euclidean(dim),
        "curved" => need_dim(name, dim, only2).and_then(|_| curved_plane()),
        "sphere" => need_dim(name, dim, only2).and_then(|_| sphere_chart()),
        "pullback_flat" => need_dim(name, dim, only2).and_then(|_| pullback_flat()),
        "randers" => randers(dim),
        "minkowski" => minkowski(dim),
        "pseudo" => pseudo(dim),
        "quartic" => quartic(dim),
        "flat_quadratic" => flat_quadratic(dim),
        _ => Err(GeometryError::Invalid(format!(
            "unknown metric preset '{name}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Every builtin available in `dim`.
pub fn all_builtins(dim: usize) -> Vec<MetricSpec> {
    PRESET_NAMES
        .iter()
        .filter_map(|n| by_name(n, dim).ok())
        .collect()
}
