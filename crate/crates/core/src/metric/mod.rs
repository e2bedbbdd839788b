//! Pseudo-Finsler energies `F*(x, y)` and their fundamental tensor.
//!
//! The fundamental tensor is `g_ij = ½ ∂²F*/∂yⁱ∂yʲ`. With this normalization a
//! 2-homogeneous energy satisfies `g_ij yⁱ yʲ = F*`, which
//! [`check_homogeneity`] verifies pointwise.

mod config;
pub mod presets;

use ndarray::{Array2, Array3};
use thiserror::Error;

use crate::expr::{checked_sqrt, DomainError, Expr};
use crate::jet::{seed_point, Jet, JetError};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tolerance::Discrepancy;

pub use config::{Coeff, MetricConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("degenerate fundamental tensor (det = {det:e})")]
    Degenerate { det: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid metric: {0}")]
    Invalid(String),
}

/// A point `(x, y)` of `M'` in one chart; `y` is never the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint<S = f64> {
    pub x: Vec<S>,
    pub y: Vec<S>,
}

impl<S: Scalar> ChartPoint<S> {
    pub fn new(x: Vec<S>, y: Vec<S>) -> Result<Self, GeometryError> {
        if x.len() != y.len() || x.is_empty() {
            return Err(GeometryError::Dimension(format!(
                "base has {} coordinates, fiber has {}",
                x.len(),
                y.len()
            )));
        }
        if y.iter().all(|v| v.re() == 0.0) {
            return Err(JetError::ZeroFiber.into());
        }
        Ok(ChartPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The same base point with the fiber vector multiplied by `k`.
    pub fn scale_fiber(&self, k: f64) -> Self {
        ChartPoint {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v.scale(k)).collect(),
        }
    }

    /// Seed jets of the given order at this point (base variables first).
    pub fn seed(&self, order: usize) -> Result<Vec<Jet<S>>, JetError> {
        seed_point(&self.x, &self.y, order)
    }
}

/// Builtin and user-defined energy families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `Σ (yⁱ)²`
    Euclidean,
    /// `a_ij(x) yⁱ yʲ`
    Riemannian { a: Vec<Vec<Expr>> },
    /// `(√(a_ij(x) yⁱ yʲ) + b_i(x) yⁱ)²`
    Randers { a: Vec<Vec<Expr>>, b: Vec<Expr> },
    /// `f(y)` with no base dependence.
    Minkowski { f: Expr },
    /// Constant indefinite quadratic form with `negative` negative eigenvalues.
    Pseudo { a: Vec<Vec<f64>>, negative: usize },
    /// Arbitrary `F*(x, y)`.
    Expression { f: Expr, negative: Option<usize> },
}

impl Family {
    pub fn kind(&self) -> &'static str {
        match self {
            Family::Euclidean => "euclidean",
            Family::Riemannian { .. } => "riemannian",
            Family::Randers { .. } => "randers",
            Family::Minkowski { .. } => "minkowski",
            Family::Pseudo { .. } => "pseudo",
            Family::Expression { .. } => "expression",
        }
    }
}

/// A pseudo-Finsler energy of dimension `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    dim: usize,
    family: Family,
    label: String,
}

const SYMMETRY_PROBES: [f64; 3] = [0.37, -0.81, 1.13];

fn check_square<T>(a: &[Vec<T>], dim: usize, what: &str) -> Result<(), GeometryError> {
    if a.len() != dim || a.iter().any(|row| row.len() != dim) {
        return Err(GeometryError::Invalid(format!(
            "{what} must be {dim}x{dim}"
        )));
    }
    Ok(())
}

fn check_base_only(exprs: &[&Expr], what: &str) -> Result<(), GeometryError> {
    if exprs.iter().any(|e| e.uses_fiber()) {
        return Err(GeometryError::Invalid(format!(
            "{what} may depend on x only"
        )));
    }
    Ok(())
}

fn check_expr_dim(exprs: &[&Expr], dim: usize) -> Result<(), GeometryError> {
    if let Some(e) = exprs.iter().find(|e| e.dim() != dim) {
        return Err(GeometryError::Dimension(format!(
            "expression '{e}' parsed for dimension {}, metric has {dim}",
            e.dim()
        )));
    }
    Ok(())
}

fn check_symmetric_exprs(a: &[Vec<Expr>], what: &str) -> Result<(), GeometryError> {
    let dim = a.len();
    let x: Vec<f64> = (0..dim)
        .map(|i| SYMMETRY_PROBES[i % SYMMETRY_PROBES.len()] * (1.0 + 0.1 * i as f64))
        .collect();
    let y = vec![1.0; dim];
    for i in 0..dim {
        for j in i + 1..dim {
            if a[i][j] == a[j][i] {
                continue;
            }
            let u: f64 = a[i][j].eval(&x, &y)?;
            let v: f64 = a[j][i].eval(&x, &y)?;
            if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
                return Err(GeometryError::Invalid(format!(
                    "{what} is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

impl MetricSpec {
    pub fn new(dim: usize, family: Family) -> Result<Self, GeometryError> {
        Self::with_label(dim, family, None)
    }

    pub fn with_label(
        dim: usize,
        family: Family,
        label: Option<&str>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 || dim > crate::jet::MAX_VARS / 2 {
            return Err(GeometryError::Invalid(format!(
                "dimension {dim} outside 1..={}",
                crate::jet::MAX_VARS / 2
            )));
        }
        match &family {
            Family::Euclidean => {}
            Family::Riemannian { a } => {
                check_square(a, dim, "a")?;
                let all: Vec<&Expr> = a.iter().flatten().collect();
                check_expr_dim(&all, dim)?;
                check_base_only(&all, "a_ij")?;
                check_symmetric_exprs(a, "a")?;
            }
            Family::Randers { a, b } => {
                check_square(a, dim, "a")?;
                if b.len() != dim {
                    return Err(GeometryError::Invalid(format!("b must have {dim} entries")));
                }
                let all: Vec<&Expr> = a.iter().flatten().chain(b.iter()).collect();
                check_expr_dim(&all, dim)?;
                check_base_only(&all, "a_ij and b_i")?;
                check_symmetric_exprs(a, "a")?;
            }
            Family::Minkowski { f } => {
                check_expr_dim(&[f], dim)?;
                if f.uses_base() {
                    return Err(GeometryError::Invalid(
                        "locally Minkowski energy may depend on y only".into(),
                    ));
                }
            }
            Family::Pseudo { a, negative } => {
                check_square(a, dim, "a")?;
                for i in 0..dim {
                    for j in 0..dim {
                        if a[i][j] != a[j][i] {
                            return Err(GeometryError::Invalid(format!(
                                "a is not symmetric at ({}, {})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                if *negative == 0 || *negative >= dim {
                    return Err(GeometryError::Invalid(format!(
                        "pseudo signature requires 0 < q < {dim}, got q = {negative}"
                    )));
                }
            }
            Family::Expression { f, negative } => {
                check_expr_dim(&[f], dim)?;
                if let Some(q) = negative {
                    if *q > dim {
                        return Err(GeometryError::Invalid(format!(
                            "signature q = {q} exceeds dimension {dim}"
                        )));
                    }
                }
            }
        }
        Ok(MetricSpec {
            dim,
            label: label.unwrap_or(family.kind()).to_string(),
            family,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Preset name or family kind, used in reports.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Declared number of negative eigenvalues of `g` (0 for Finsler families).
    pub fn declared_negative(&self) -> usize {
        match &self.family {
            Family::Pseudo { negative, .. } => *negative,
            Family::Expression { negative, .. } => negative.unwrap_or(0),
            _ => 0,
        }
    }

    /// True when every energy in the family is positively 2-homogeneous by construction.
    pub fn homogeneous_by_construction(&self) -> bool {
        !matches!(
            self.family,
            Family::Minkowski { .. } | Family::Expression { .. }
        )
    }

    /// `F*(x, y)` on any scalar type.
    pub fn energy<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, DomainError> {
        let quad = |a: &dyn Fn(usize, usize) -> Result<S, DomainError>| -> Result<S, DomainError> {
            let mut acc = S::zero();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    acc = acc + a(i, j)? * y[i].clone() * y[j].clone();
                }
            }
            Ok(acc)
        };
        match &self.family {
            Family::Euclidean => Ok(y
                .iter()
                .fold(S::zero(), |acc, v| acc + v.clone() * v.clone())),
            Family::Riemannian { a } => quad(&|i, j| a[i][j].eval(x, y)),
            Family::Randers { a, b } => {
                let alpha2 = quad(&|i, j| a[i][j].eval(x, y))?;
                let alpha = checked_sqrt(alpha2)?;
                let mut beta = S::zero();
                for (bi, yi) in b.iter().zip(y) {
                    beta = beta + bi.eval(x, y)? * yi.clone();
                }
                let f = alpha + beta;
                if f.re() <= 0.0 {
                    return Err(DomainError::Guard(format!(
                        "Randers norm not positive ({:e})",
                        f.re()
                    )));
                }
                Ok(f.clone() * f)
            }
            Family::Minkowski { f } => f.eval(x, y),
            Family::Pseudo { a, .. } => quad(&|i, j| Ok(S::from_f64(a[i][j]))),
            Family::Expression { f, .. } => f.eval(x, y),
        }
    }

    pub fn energy_at<S: Scalar>(&self, p: &ChartPoint<S>) -> Result<S, DomainError> {
        self.check_point(p)
            .map_err(|e| DomainError::Guard(e.to_string()))?;
        self.energy(&p.x, &p.y)
    }

    fn check_point<S: Scalar>(&self, p: &ChartPoint<S>) -> Result<(), GeometryError> {
        if p.dim() != self.dim {
            return Err(GeometryError::Dimension(format!(
                "point has dimension {}, metric has {}",
                p.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// `g`, its inverse and first derivatives at a point.
#[derive(Debug, Clone)]
pub struct FundamentalTensor<S = f64> {
    pub at: ChartPoint<S>,
    pub energy: S,
    /// `g_ij`
    pub g: Array2<S>,
    /// `g^ij`
    pub g_inv: Array2<S>,
    /// `[i, j, k] = ∂g_ij/∂yᵏ`
    pub dg_dy: Array3<S>,
    /// `[i, j, k] = ∂g_ij/∂xᵏ`
    pub dg_dx: Array3<S>,
}

/// Fundamental tensor from one order-3 jet evaluation of `F*`.
pub fn fundamental_tensor<S: Scalar>(
    spec: &MetricSpec,
    p: &ChartPoint<S>,
) -> Result<FundamentalTensor<S>, GeometryError> {
    spec.check_point(p)?;
    let m = spec.dim;
    let vars = p.seed(3)?;
    let (jx, jy) = vars.split_at(m);
    let e = spec.energy(jx, jy)?;
    let (xi, yi) = (|k: usize| k, |k: usize| m + k);
    let g = Array2::from_shape_fn((m, m), |(i, j)| e.d2(yi(i), yi(j)).scale(0.5));
    if linalg::is_degenerate(&g) {
        return Err(GeometryError::Degenerate {
            det: linalg::det_re(&g),
        });
    }
    let g_inv = linalg::inverse(&g).ok_or(GeometryError::Degenerate { det: 0.0 })?;
    let dg_dy = Array3::from_shape_fn((m, m, m), |(i, j, k)| e.d3(yi(i), yi(j), yi(k)).scale(0.5));
    let dg_dx = Array3::from_shape_fn((m, m, m), |(i, j, k)| e.d3(yi(i), yi(j), xi(k)).scale(0.5));
    Ok(FundamentalTensor {
        at: p.clone(),
        energy: e.value().clone(),
        g,
        g_inv,
        dg_dy,
        dg_dx,
    })
}

/// Residuals of the two consequences of 2-homogeneity at `p`.
#[derive(Debug, Clone, Copy)]
pub struct Homogeneity {
    /// `F*(x, ky)` against `k² F*(x, y)`.
    pub scaling: Discrepancy,
    /// `g_ij yⁱ yʲ` against `F*`.
    pub euler: Discrepancy,
}

pub fn check_homogeneity(
    spec: &MetricSpec,
    p: &ChartPoint,
    k: f64,
) -> Result<Homogeneity, GeometryError> {
    if k <= 0.0 {
        return Err(GeometryError::Invalid(format!(
            "scaling factor must be positive, got {k}"
        )));
    }
    spec.check_point(p)?;
    let f = spec.energy(&p.x, &p.y)?;
    let fk = spec.energy(&p.x, &p.scale_fiber(k).y)?;
    let ft = fundamental_tensor(spec, p)?;
    let m = spec.dim;
    let mut gyy = 0.0;
    let mut gyy_scale = 0.0;
    for i in 0..m {
        for j in 0..m {
            let t = ft.g[[i, j]] * p.y[i] * p.y[j];
            gyy += t;
            gyy_scale += t.abs();
        }
    }
    Ok(Homogeneity {
        scaling: Discrepancy::between(fk, k * k * f),
        euler: Discrepancy {
            diff: (gyy - f).abs(),
            scale: gyy_scale.max(f.abs()),
        },
    })
}

/// Eigenvalue sign counts of `g` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub negative: usize,
    pub positive: usize,
}

pub fn check_signature(spec: &MetricSpec, p: &ChartPoint) -> Result<Signature, GeometryError> {
    let ft = fundamental_tensor(spec, p)?;
    let (negative, positive) = linalg::inertia(&ft.g);
    Ok(Signature { negative, positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use approx::assert_relative_eq;

    fn pt(x: &[f64], y: &[f64]) -> ChartPoint {
        ChartPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_energy_and_tensor() {
        let spec = presets::euclidean(2).unwrap();
        let p = pt(&[0.0, 0.0], &[3.0, 4.0]);
        assert_eq!(spec.energy_at(&p).unwrap(), 25.0);
        let ft = fundamental_tensor(&spec, &p).unwrap();
        assert_eq!(ft.g, Array2::<f64>::eye(2));
        assert!(ft.dg_dy.iter().all(|v| *v == 0.0));
        let h = check_homogeneity(&spec, &p, 2.0).unwrap();
        assert_eq!(h.euler.diff, 0.0);
    }

    #[test]
    fn riemannian_quadratic_energy() {
        let a = vec![
            vec![parse("2", 2).unwrap(), parse("0", 2).unwrap()],
            vec![parse("0", 2).unwrap(), parse("1", 2).unwrap()],
        ];
        let spec = MetricSpec::new(2, Family::Riemannian { a }).unwrap();
        let p = pt(&[0.4, -0.2], &[1.0, 1.0]);
        assert_eq!(spec.energy_at(&p).unwrap(), 3.0);
    }

    #[test]
    fn quadratic_tensor_is_a_of_x_for_any_y() {
        let spec = presets::curved_plane().unwrap();
        for y in [[1.0, 0.2], [-3.0, 7.0], [0.01, -0.5]] {
            let p = pt(&[0.7, -1.1], &y);
            let ft = fundamental_tensor(&spec, &p).unwrap();
            assert_relative_eq!(ft.g[[0, 0]], 1.0, max_relative = 1e-14);
            assert_relative_eq!(ft.g[[1, 1]], 0.49 + 1.0, max_relative = 1e-14);
            assert_eq!(ft.g[[0, 1]], 0.0);
            assert_relative_eq!(ft.dg_dx[[1, 1, 0]], 1.4, max_relative = 1e-14);
        }
    }

    #[test]
    fn randers_energy_matches_plain_arithmetic() {
        let spec = presets::randers(2).unwrap();
        let (x, y) = ([0.3, -0.6], [1.0, 0.2]);
        let a11 = 1.0 + 0.25 * x[0] * x[0];
        let a22 = 1.0 + 0.25 * x[1] * x[1];
        let a12 = 0.1;
        let alpha = (a11 * y[0] * y[0] + 2.0 * a12 * y[0] * y[1] + a22 * y[1] * y[1]).sqrt();
        let b = [
            0.2 / 2f64.sqrt() * (x[0] + 1.0).sin(),
            0.2 / 2f64.sqrt() * (x[1] + 2.0).sin(),
        ];
        let expect = (alpha + b[0] * y[0] + b[1] * y[1]).powi(2);
        assert_relative_eq!(
            spec.energy_at(&pt(&x, &y)).unwrap(),
            expect,
            max_relative = 1e-14
        );
    }

    #[test]
    fn randers_tensor_matches_richardson_hessian() {
        let spec = presets::randers(2).unwrap();
        let (x, y) = ([0.3, -0.6], [1.0, 0.2]);
        let ft = fundamental_tensor(&spec, &pt(&x, &y)).unwrap();
        let f = |y0: f64, y1: f64| spec.energy(&x, &[y0, y1]).unwrap();
        let hess = |h: f64, i: usize, j: usize| {
            let e = |s: f64, t: f64| {
                let mut v = y;
                v[i] += s;
                v[j] += t;
                f(v[0], v[1])
            };
            (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h)
        };
        for i in 0..2 {
            for j in 0..2 {
                let h = 1e-3;
                let rich = (4.0 * hess(h / 2.0, i, j) - hess(h, i, j)) / 3.0;
                assert!(
                    (0.5 * rich - ft.g[[i, j]]).abs() < 1e-6 * ft.g[[i, j]].abs().max(1.0),
                    "g[{i}{j}] {} vs {}",
                    ft.g[[i, j]],
                    0.5 * rich
                );
            }
        }
    }

    #[test]
    fn homogeneity_flags_cubic() {
        let spec = MetricSpec::new(
            2,
            Family::Expression {
                f: parse("y1^3 + y2^2", 2).unwrap(),
                negative: None,
            },
        )
        .unwrap();
        let h = check_homogeneity(&spec, &pt(&[0.0, 0.0], &[1.0, 1.0]), 2.0).unwrap();
        assert!(h.scaling.diff > 1.0);
    }

    #[test]
    fn builtins_are_two_homogeneous() {
        let p2 = pt(&[0.2, -0.4], &[0.7, -1.3]);
        for spec in presets::all_builtins(2) {
            let h = check_homogeneity(&spec, &p2, 2.0).unwrap();
            assert!(
                h.scaling.diff <= 1e-10 * h.scaling.scale,
                "{}",
                spec.label()
            );
            assert!(h.euler.diff <= 1e-10 * h.euler.scale, "{}", spec.label());
        }
    }

    #[test]
    fn signatures() {
        let p = pt(&[0.1, 0.2], &[0.5, 1.0]);
        let s = check_signature(&presets::euclidean(2).unwrap(), &p).unwrap();
        assert_eq!((s.negative, s.positive), (0, 2));
        let diag = MetricSpec::new(
            2,
            Family::Pseudo {
                a: vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
                negative: 1,
            },
        )
        .unwrap();
        let s = check_signature(&diag, &p).unwrap();
        assert_eq!((s.negative, s.positive), (1, 1));
    }

    #[test]
    fn randers_signature_against_closed_form_eigenvalues() {
        let spec = presets::randers(2).unwrap();
        let p = pt(&[0.5, 0.1], &[0.3, -1.2]);
        let ft = fundamental_tensor(&spec, &p).unwrap();
        let (tr, det) = (
            ft.g[[0, 0]] + ft.g[[1, 1]],
            ft.g[[0, 0]] * ft.g[[1, 1]] - ft.g[[0, 1]] * ft.g[[1, 0]],
        );
        let disc = (tr * tr - 4.0 * det).sqrt();
        let (l1, l2) = ((tr - disc) / 2.0, (tr + disc) / 2.0);
        assert!(l1 > 0.0 && l2 > 0.0);
        let s = check_signature(&spec, &p).unwrap();
        assert_eq!((s.negative, s.positive), (0, 2));
    }

    #[test]
    fn degenerate_tensor_is_reported() {
        let spec = MetricSpec::new(
            2,
            Family::Expression {
                f: parse("y1^2", 2).unwrap(),
                negative: None,
            },
        )
        .unwrap();
        let err = fundamental_tensor(&spec, &pt(&[0.0, 0.0], &[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, GeometryError::Degenerate { .. }));
    }

    #[test]
    fn validation_errors() {
        let e = |s| parse(s, 2).unwrap();
        assert!(MetricSpec::new(
            2,
            Family::Minkowski {
                f: e("x1*y1^2+y2^2")
            }
        )
        .is_err());
        assert!(MetricSpec::new(
            2,
            Family::Riemannian {
                a: vec![vec![e("1"), e("x1")], vec![e("0"), e("1")]]
            }
        )
        .is_err());
        assert!(MetricSpec::new(
            2,
            Family::Pseudo {
                a: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                negative: 0
            }
        )
        .is_err());
        assert!(ChartPoint::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn f32_tensor() {
        let spec = presets::euclidean(2).unwrap();
        let p = ChartPoint::new(vec![0.0f32, 0.0], vec![1.0f32, 2.0]).unwrap();
        let ft = fundamental_tensor(&spec, &p).unwrap();
        assert_eq!(ft.g[[0, 0]], 1.0f32);
        assert_eq!(ft.energy, 5.0f32);
    }
}
