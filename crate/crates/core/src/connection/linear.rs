//! The linear connection `D_X Y = ∇_X vY − J ∇_X J hY` on `TM'` and its torsion.

use ndarray::Array3;

use super::{derivative, AdaptedField, AdaptedVector, ConnectionData, FrameBrackets};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// `∇_X W` for a vertical field `W = Wⁱ ∂̇_i`; returns the `∂̇_k` components
/// `X(Wᵏ) + Wⁱ (Xʲ F^k_ij + X̃ʲ C^k_ij)`.
pub fn nabla_vertical<S: Scalar>(
    data: &ConnectionData<S>,
    x: &AdaptedVector<S>,
    w: &[Jet<S>],
) -> Vec<S> {
    let m = data.dim();
    let n = data.n();
    (0..m)
        .map(|k| {
            let mut acc = derivative(&w[k], x, n);
            for (i, wi) in w.iter().enumerate() {
                let mut coef = S::zero();
                for j in 0..m {
                    coef = coef
                        + x.h[j].clone() * data.f[[k, i, j]].clone()
                        + x.v[j].clone() * data.c[[k, i, j]].clone();
                }
                acc = acc + wi.value().clone() * coef;
            }
            acc
        })
        .collect()
}

/// `D_X Y` at the point.
pub fn apply_d<S: Scalar>(
    data: &ConnectionData<S>,
    x: &AdaptedVector<S>,
    y: &AdaptedField<S>,
) -> AdaptedVector<S> {
    let v = nabla_vertical(data, x, &y.v);
    // J hY = −Yⁱ ∂̇_i, and J maps ∂̇_k to δ_k
    let jhy: Vec<Jet<S>> = y.h.iter().cloned().map(|a| -a).collect();
    let u = nabla_vertical(data, x, &jhy);
    AdaptedVector::new(u.into_iter().map(|a| -a).collect(), v)
}

/// `(D_X J) Y = D_X (JY) − J (D_X Y)`.
pub fn d_j<S: Scalar>(
    data: &ConnectionData<S>,
    x: &AdaptedVector<S>,
    y: &AdaptedField<S>,
) -> AdaptedVector<S> {
    apply_d(data, x, &y.apply_j()) - apply_d(data, x, y).apply_j()
}

impl<S: Scalar> AdaptedVector<S> {
    /// `J`: `(h, v) ↦ (v, −h)`.
    pub fn apply_j(&self) -> Self {
        AdaptedVector::new(self.v.clone(), self.h.iter().cloned().map(|a| -a).collect())
    }
}

/// The five coefficient blocks of the torsion of `D` on frame fields.
#[derive(Debug, Clone)]
pub struct TorsionBlocks<S = f64> {
    /// `∂̇_k` part of `T(∂̇_j, ∂̇_i)`, stored `[k, i, j]`
    pub vv: Array3<S>,
    /// `δ_k` part of `T(∂̇_i, δ_j)`
    pub hv_h: Array3<S>,
    /// `∂̇_k` part of `T(∂̇_i, δ_j)`
    pub hv_v: Array3<S>,
    /// `δ_k` part of `T(δ_i, δ_j)`
    pub hh_h: Array3<S>,
    /// `∂̇_k` part of `T(δ_i, δ_j)`
    pub hh_v: Array3<S>,
}

impl<S: Scalar> TorsionBlocks<S> {
    pub fn named(&self) -> [(&'static str, &Array3<S>); 5] {
        [
            ("vv", &self.vv),
            ("hv_h", &self.hv_h),
            ("hv_v", &self.hv_v),
            ("hh_h", &self.hh_h),
            ("hh_v", &self.hh_v),
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.named()
            .iter()
            .flat_map(|(_, a)| a.iter())
            .fold(0.0, |acc, v| acc.max(v.re().abs()))
    }
}

/// Torsion `T(A, B) = D_A B − D_B A − [A, B]` evaluated on frame fields.
pub fn torsion_components<S: Scalar>(
    data: &ConnectionData<S>,
    brackets: &FrameBrackets<S>,
) -> TorsionBlocks<S> {
    let m = data.dim();
    let frame_h: Vec<AdaptedVector<S>> = (0..m)
        .map(|i| AdaptedVector::horizontal_frame(m, i))
        .collect();
    let frame_v: Vec<AdaptedVector<S>> = (0..m)
        .map(|i| AdaptedVector::vertical_frame(m, i))
        .collect();
    let torsion = |a: &AdaptedVector<S>, b: &AdaptedVector<S>| {
        apply_d(data, a, &AdaptedField::constant(b))
            - apply_d(data, b, &AdaptedField::constant(a))
            - brackets.bracket(a, b)
    };
    let zero = Array3::from_elem((m, m, m), S::zero());
    let mut out = TorsionBlocks {
        vv: zero.clone(),
        hv_h: zero.clone(),
        hv_v: zero.clone(),
        hh_h: zero.clone(),
        hh_v: zero,
    };
    for i in 0..m {
        for j in 0..m {
            let vv = torsion(&frame_v[j], &frame_v[i]);
            let hv = torsion(&frame_v[i], &frame_h[j]);
            let hh = torsion(&frame_h[i], &frame_h[j]);
            for k in 0..m {
                out.vv[[k, i, j]] = vv.v[k].clone();
                out.hv_h[[k, i, j]] = hv.h[k].clone();
                out.hv_v[[k, i, j]] = hv.v[k].clone();
                out.hh_h[[k, i, j]] = hh.h[k].clone();
                out.hh_v[[k, i, j]] = hh.v[k].clone();
            }
        }
    }
    out
}

/// The closed-form torsion blocks: `S^k_ij`; `C^k_ji` and
/// `∂N^k_j/∂yⁱ − F^k_ij`; `T^k_ij` and `δN^k_j/δxⁱ − δN^k_i/δxʲ`.
pub fn torsion_displays<S: Scalar>(data: &ConnectionData<S>) -> TorsionBlocks<S> {
    let m = data.dim();
    let nc = &data.nonlinear;
    TorsionBlocks {
        vv: data.s.clone(),
        hv_h: Array3::from_shape_fn((m, m, m), |(k, i, j)| data.c[[k, j, i]].clone()),
        hv_v: Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            nc.dn_dy[[k, j, i]].clone() - data.f[[k, i, j]].clone()
        }),
        hh_h: data.t.clone(),
        hh_v: Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            nc.delta_n[[k, j, i]].clone() - nc.delta_n[[k, i, j]].clone()
        }),
    }
}
