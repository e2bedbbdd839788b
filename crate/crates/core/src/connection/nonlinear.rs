//! Nonlinear connections `N^i_j(x, y)` and their first derivatives at a point.

use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_traits::Zero;

use super::ConnectionError;
use crate::expr::Expr;
use crate::jet::{Jet, Layout};
use crate::linalg;
use crate::metric::{ChartPoint, GeometryError, MetricSpec};
use crate::scalar::Scalar;

/// Where the coefficients `N^i_j` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnectionSource {
    /// Geodesic spray of the energy.
    Canonical,
    /// `N ≡ 0`.
    Zero,
    /// User expressions, `exprs[i][j] = N^i_j`.
    Expression(Vec<Vec<Expr>>),
}

impl ConnectionSource {
    pub fn kind(&self) -> &'static str {
        match self {
            ConnectionSource::Canonical => "canonical",
            ConnectionSource::Zero => "zero",
            ConnectionSource::Expression(_) => "expression",
        }
    }

    pub fn expression(exprs: Vec<Vec<Expr>>, dim: usize) -> Result<Self, ConnectionError> {
        if exprs.len() != dim || exprs.iter().any(|r| r.len() != dim) {
            return Err(ConnectionError::Invalid(format!(
                "connection.n must be a {dim}x{dim} matrix"
            )));
        }
        if exprs.iter().flatten().any(|e| e.dim() != dim) {
            return Err(ConnectionError::Invalid(
                "connection.n parsed for a different dimension".into(),
            ));
        }
        Ok(ConnectionSource::Expression(exprs))
    }
}

/// `N` and its derivatives at one point.
///
/// Index convention: the last index is always the differentiation variable.
#[derive(Debug, Clone)]
pub struct NonlinearConnection<S = f64> {
    pub source: &'static str,
    /// `[i, j] = N^i_j`
    pub n: Array2<S>,
    /// `[k, j, i] = ∂N^k_j/∂yⁱ`
    pub dn_dy: Array3<S>,
    /// `[k, j, i] = ∂N^k_j/∂xⁱ`
    pub dn_dx: Array3<S>,
    /// `[k, i, j] = δN^k_i/δxʲ`
    pub delta_n: Array3<S>,
}

impl<S: Scalar> NonlinearConnection<S> {
    pub fn dim(&self) -> usize {
        self.n.nrows()
    }

    fn from_parts(source: &'static str, n: Array2<S>, dn_dy: Array3<S>, dn_dx: Array3<S>) -> Self {
        let m = n.nrows();
        let delta_n = Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            (0..m).fold(dn_dx[[k, i, j]].clone(), |acc, l| {
                acc - n[[l, j]].clone() * dn_dy[[k, i, l]].clone()
            })
        });
        NonlinearConnection {
            source,
            n,
            dn_dy,
            dn_dx,
            delta_n,
        }
    }

    pub fn zero(m: usize) -> Self {
        Self::from_parts(
            "zero",
            Array2::from_elem((m, m), S::zero()),
            Array3::from_elem((m, m, m), S::zero()),
            Array3::from_elem((m, m, m), S::zero()),
        )
    }

    /// `N^i_j` as order-1 jets in the `2m` chart variables.
    pub fn jets(&self) -> Array2<Jet<S>> {
        let m = self.dim();
        let layout = Layout::shared(2 * m, 1);
        Array2::from_shape_fn((m, m), |(i, j)| {
            first_order_jet(
                &layout,
                self.n[[i, j]].clone(),
                (0..m).map(|a| self.dn_dx[[i, j, a]].clone()),
                (0..m).map(|a| self.dn_dy[[i, j, a]].clone()),
            )
        })
    }

    /// `R^k_ij = δN^k_i/δxʲ − δN^k_j/δxⁱ`.
    pub fn curvature(&self) -> Array3<S> {
        let m = self.dim();
        Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            self.delta_n[[k, i, j]].clone() - self.delta_n[[k, j, i]].clone()
        })
    }

    /// `δf/δxⁱ = ∂f/∂xⁱ − N^j_i ∂f/∂yʲ` for a jet of order ≥ 1 in `(x, y)`.
    pub fn delta_x(&self, f: &Jet<S>) -> Vec<S> {
        delta_x(f, &self.n)
    }
}

/// `δf/δxⁱ = ∂f/∂xⁱ − N^j_i ∂f/∂yʲ`.
pub fn delta_x<S: Scalar>(f: &Jet<S>, n: &Array2<S>) -> Vec<S> {
    let m = n.nrows();
    (0..m)
        .map(|i| (0..m).fold(f.d(i), |acc, j| acc - n[[j, i]].clone() * f.d(m + j)))
        .collect()
}

pub(crate) fn first_order_jet<S: Scalar>(
    layout: &Arc<Layout>,
    value: S,
    dx: impl Iterator<Item = S>,
    dy: impl Iterator<Item = S>,
) -> Jet<S> {
    let mut coeffs = Vec::with_capacity(layout.len());
    coeffs.push(value);
    coeffs.extend(dx);
    coeffs.extend(dy);
    Jet::from_parts(layout, coeffs)
}

/// `N` at `p` from `source`.
pub fn nonlinear_connection<S: Scalar>(
    spec: &MetricSpec,
    source: &ConnectionSource,
    p: &ChartPoint<S>,
) -> Result<NonlinearConnection<S>, ConnectionError> {
    match source {
        ConnectionSource::Canonical => canonical_connection(spec, p),
        ConnectionSource::Zero => Ok(NonlinearConnection::zero(p.dim())),
        ConnectionSource::Expression(exprs) => expression_connection(exprs, p),
    }
}

/// Canonical connection from the geodesic spray
/// `Gⁱ = ¼ g^{il}(∂²F*/∂yˡ∂xᵏ yᵏ − ∂F*/∂xˡ)`, `N^i_j = ∂Gⁱ/∂yʲ`.
///
/// `G` needs second derivatives of `F*` and `∂N` needs two more, so `F*` is
/// evaluated on order-2 jets whose coefficients are themselves order-2 jets.
pub fn canonical_connection<S: Scalar>(
    spec: &MetricSpec,
    p: &ChartPoint<S>,
) -> Result<NonlinearConnection<S>, ConnectionError> {
    let m = spec.dim();
    if p.dim() != m {
        return Err(GeometryError::Dimension(format!(
            "point has dimension {}, metric has {m}",
            p.dim()
        ))
        .into());
    }
    let outer = p.seed(2).map_err(GeometryError::from)?;
    let inner = Jet::seed_values(&outer, 2).map_err(GeometryError::from)?;
    let (ix, iy) = inner.split_at(m);
    let e = spec.energy(ix, iy).map_err(GeometryError::from)?;
    let g = Array2::from_shape_fn((m, m), |(i, j)| e.d2(m + i, m + j).scale(0.5));
    if linalg::is_degenerate(&g) {
        return Err(GeometryError::Degenerate {
            det: linalg::det_re(&g),
        }
        .into());
    }
    let g_inv = linalg::inverse(&g).ok_or(GeometryError::Degenerate { det: 0.0 })?;
    let w: Vec<Jet<S>> = (0..m)
        .map(|l| {
            (0..m).fold(-e.d(l), |acc, k| {
                acc + e.d2(m + l, k) * outer[m + k].clone()
            })
        })
        .collect();
    let spray: Vec<Jet<S>> = (0..m)
        .map(|i| {
            (0..m)
                .fold(Jet::zero(), |acc: Jet<S>, l| {
                    acc + g_inv[[i, l]].clone() * w[l].clone()
                })
                .scale(0.25)
        })
        .collect();
    let n = Array2::from_shape_fn((m, m), |(i, j)| spray[i].d(m + j));
    let dn_dy = Array3::from_shape_fn((m, m, m), |(k, j, i)| spray[k].d2(m + j, m + i));
    let dn_dx = Array3::from_shape_fn((m, m, m), |(k, j, i)| spray[k].d2(m + j, i));
    Ok(NonlinearConnection::from_parts(
        "canonical",
        n,
        dn_dy,
        dn_dx,
    ))
}

fn expression_connection<S: Scalar>(
    exprs: &[Vec<Expr>],
    p: &ChartPoint<S>,
) -> Result<NonlinearConnection<S>, ConnectionError> {
    let m = p.dim();
    if exprs.len() != m {
        return Err(GeometryError::Dimension(format!(
            "connection has dimension {}, point has {m}",
            exprs.len()
        ))
        .into());
    }
    let vars = p.seed(1).map_err(GeometryError::from)?;
    let (jx, jy) = vars.split_at(m);
    let mut jets = Vec::with_capacity(m * m);
    for row in exprs {
        for e in row {
            jets.push(e.eval(jx, jy).map_err(GeometryError::from)?);
        }
    }
    let at = |i: usize, j: usize| &jets[i * m + j];
    let n = Array2::from_shape_fn((m, m), |(i, j)| at(i, j).value().clone());
    let dn_dy = Array3::from_shape_fn((m, m, m), |(k, j, i)| at(k, j).d(m + i));
    let dn_dx = Array3::from_shape_fn((m, m, m), |(k, j, i)| at(k, j).d(i));
    Ok(NonlinearConnection::from_parts(
        "expression",
        n,
        dn_dy,
        dn_dx,
    ))
}

/// Worst violation of `N(x, ky) = k N(x, y)` over the supplied factors.
pub fn spray_homogeneity(
    spec: &MetricSpec,
    source: &ConnectionSource,
    p: &ChartPoint,
    factors: &[f64],
) -> Result<Vec<(f64, f64)>, ConnectionError> {
    let base = nonlinear_connection(spec, source, p)?;
    let mut out = Vec::new();
    for &k in factors {
        let scaled = nonlinear_connection(spec, source, &p.scale_fiber(k))?;
        for (a, b) in scaled.n.iter().zip(base.n.iter()) {
            out.push((*a, k * b));
        }
    }
    Ok(out)
}
