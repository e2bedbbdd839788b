//! Nonlinear connection, the `(HM', S, T)`-Cartan coefficients and the
//! associated almost complex connection `D` on `TM'`.

mod frame;
mod koszul;
mod linear;
mod nonlinear;
mod skew;

use ndarray::{Array2, Array3};
use thiserror::Error;

pub use frame::{
    coords_to_adapted, derivative, AdaptedField, AdaptedVector, CoordField, FrameBrackets,
};
pub use koszul::KoszulOracle;
pub use linear::{
    apply_d, d_j, nabla_vertical, torsion_components, torsion_displays, TorsionBlocks,
};
pub use nonlinear::{
    canonical_connection, delta_x, nonlinear_connection, spray_homogeneity, ConnectionSource,
    NonlinearConnection,
};
pub use skew::{SkewTensor, TorsionInputs, SKEW_TOL};

use crate::jet::{Jet, Layout};
use crate::metric::{fundamental_tensor, ChartPoint, FundamentalTensor, GeometryError, MetricSpec};
use crate::scalar::Scalar;
use crate::tolerance::{Discrepancy, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{name} violates skew-symmetry at (k,i,j)=({k},{i},{j}): {name}^k_ij must equal -{name}^k_ji")]
    Skew {
        name: String,
        k: usize,
        i: usize,
        j: usize,
    },
    #[error("invalid connection input: {0}")]
    Invalid(String),
}

/// Every coefficient array of the Cartan connection at one point.
///
/// Three-index arrays are stored `[k, i, j]` for `X^k_ij`; derivative arrays
/// put the differentiation index last.
#[derive(Debug, Clone)]
pub struct ConnectionData<S = f64> {
    pub at: ChartPoint<S>,
    pub g: Array2<S>,
    pub g_inv: Array2<S>,
    /// `[i, j, k] = ∂g_ij/∂yᵏ`
    pub dg_dy: Array3<S>,
    /// `[i, j, k] = ∂g_ij/∂xᵏ`
    pub dg_dx: Array3<S>,
    /// `[i, j, k] = δg_ij/δxᵏ`
    pub delta_g: Array3<S>,
    pub nonlinear: NonlinearConnection<S>,
    pub s: Array3<S>,
    pub t: Array3<S>,
    /// `∇_{∂̇_j} ∂̇_i = C^k_ij ∂̇_k`
    pub c: Array3<S>,
    /// `∇_{δ_j} ∂̇_i = F^k_ij ∂̇_k`
    pub f: Array3<S>,
    /// `R^k_ij = δN^k_i/δxʲ − δN^k_j/δxⁱ`
    pub r: Array3<S>,
}

/// Coefficients at `p` for the given connection source and torsion inputs.
pub fn cartan_coefficients<S: Scalar>(
    spec: &MetricSpec,
    p: &ChartPoint<S>,
    source: &ConnectionSource,
    torsion: &TorsionInputs,
) -> Result<ConnectionData<S>, ConnectionError> {
    let ft = fundamental_tensor(spec, p)?;
    let nc = nonlinear_connection(spec, source, p)?;
    let (s, t) = torsion.eval(p)?;
    Ok(ConnectionData::assemble(ft, nc, s, t))
}

impl<S: Scalar> ConnectionData<S> {
    /// Coefficient formulas from the metric, `N`, `S` and `T`.
    pub fn assemble(
        ft: FundamentalTensor<S>,
        nc: NonlinearConnection<S>,
        s: Array3<S>,
        t: Array3<S>,
    ) -> Self {
        let m = ft.g.nrows();
        let FundamentalTensor {
            at,
            g,
            g_inv,
            dg_dy,
            dg_dx,
            ..
        } = ft;
        let delta_g = Array3::from_shape_fn((m, m, m), |(i, j, k)| {
            (0..m).fold(dg_dx[[i, j, k]].clone(), |acc, l| {
                acc - nc.n[[l, k]].clone() * dg_dy[[i, j, l]].clone()
            })
        });
        // ½{∂_j g_il + ∂_i g_lj − ∂_l g_ji + S^h_jl g_ih + S^h_ij g_lh − S^h_li g_jh}
        let c_low = Array3::from_shape_fn((m, m, m), |(l, i, j)| {
            let mut acc =
                dg_dy[[i, l, j]].clone() + dg_dy[[l, j, i]].clone() - dg_dy[[j, i, l]].clone();
            for h in 0..m {
                acc = acc
                    + s[[h, j, l]].clone() * g[[i, h]].clone()
                    + s[[h, i, j]].clone() * g[[l, h]].clone()
                    - s[[h, l, i]].clone() * g[[j, h]].clone();
            }
            acc.scale(0.5)
        });
        let f_low = Array3::from_shape_fn((m, m, m), |(l, i, j)| {
            let mut acc = delta_g[[i, l, j]].clone() + delta_g[[l, j, i]].clone()
                - delta_g[[j, i, l]].clone();
            for h in 0..m {
                acc = acc
                    - t[[h, j, l]].clone() * g[[i, h]].clone()
                    - t[[h, i, j]].clone() * g[[l, h]].clone()
                    + t[[h, l, i]].clone() * g[[j, h]].clone();
            }
            acc.scale(0.5)
        });
        let c = raise(&c_low, &g_inv);
        let f = raise(&f_low, &g_inv);
        let r = nc.curvature();
        ConnectionData {
            at,
            g,
            g_inv,
            dg_dy,
            dg_dx,
            delta_g,
            nonlinear: nc,
            s,
            t,
            c,
            f,
            r,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn n(&self) -> &Array2<S> {
        &self.nonlinear.n
    }

    /// `g_ij` as order-1 jets in the chart variables.
    pub fn g_jets(&self) -> Array2<Jet<S>> {
        let m = self.dim();
        let layout = Layout::shared(2 * m, 1);
        Array2::from_shape_fn((m, m), |(i, j)| {
            nonlinear::first_order_jet(
                &layout,
                self.g[[i, j]].clone(),
                (0..m).map(|k| self.dg_dx[[i, j, k]].clone()),
                (0..m).map(|k| self.dg_dy[[i, j, k]].clone()),
            )
        })
    }

    /// Same-index-convention view of the vertical Cartan tensor:
    /// `½ g^{lm} ∂g_ij/∂yˡ`.
    pub fn cartan_tensor(&self) -> Array3<S> {
        let m = self.dim();
        Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            (0..m)
                .fold(S::zero(), |acc, l| {
                    acc + self.g_inv[[l, k]].clone() * self.dg_dy[[i, j, l]].clone()
                })
                .scale(0.5)
        })
    }
}

/// `[m, i, j] = Σ_l low[l, i, j] g^{lm}`.
fn raise<S: Scalar>(low: &Array3<S>, g_inv: &Array2<S>) -> Array3<S> {
    let m = g_inv.nrows();
    Array3::from_shape_fn((m, m, m), |(k, i, j)| {
        (0..m).fold(S::zero(), |acc, l| {
            acc + low[[l, i, j]].clone() * g_inv[[l, k]].clone()
        })
    })
}

/// Two sides of a componentwise identity.
#[derive(Debug, Clone)]
pub struct Balance<S = f64> {
    pub lhs: Array3<S>,
    pub rhs: Array3<S>,
}

impl<S: Scalar> Balance<S> {
    pub fn residual(&self) -> Array3<S> {
        ndarray::Zip::from(&self.lhs)
            .and(&self.rhs)
            .map_collect(|a, b| a.clone() - b.clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |acc, (a, b)| acc.max((a.re() - b.re()).abs()))
    }

    /// Worst component under `tol`, scaled by `max(|lhs|, |rhs|)`.
    pub fn worst(&self, tol: &Tolerance) -> Discrepancy {
        crate::tolerance::worst_of(
            self.lhs
                .iter()
                .zip(&self.rhs)
                .map(|(a, b)| Discrepancy::between(a.re(), b.re())),
            tol,
        )
    }
}

/// The two metric-compatibility identities:
/// `∂g_jk/∂yⁱ = C^h_ji g_hk + C^h_ki g_jh` (`vertical`) and
/// `δg_jk/δxⁱ = F^h_ji g_hk + F^h_ki g_jh` (`horizontal`), stored `[i, j, k]`.
pub fn metric_compat_residuals<S: Scalar>(data: &ConnectionData<S>) -> (Balance<S>, Balance<S>) {
    let m = data.dim();
    let g = &data.g;
    let side = |coef: &Array3<S>| {
        Array3::from_shape_fn((m, m, m), |(i, j, k)| {
            (0..m).fold(S::zero(), |acc, h| {
                acc + coef[[h, j, i]].clone() * g[[h, k]].clone()
                    + coef[[h, k, i]].clone() * g[[j, h]].clone()
            })
        })
    };
    let vertical = Balance {
        lhs: Array3::from_shape_fn((m, m, m), |(i, j, k)| data.dg_dy[[j, k, i]].clone()),
        rhs: side(&data.c),
    };
    let horizontal = Balance {
        lhs: Array3::from_shape_fn((m, m, m), |(i, j, k)| data.delta_g[[j, k, i]].clone()),
        rhs: side(&data.f),
    };
    (vertical, horizontal)
}
