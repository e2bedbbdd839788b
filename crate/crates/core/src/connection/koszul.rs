//! Koszul-type reconstruction of `∇` from `g`, Lie brackets and `S`, `T`.
//!
//! Works entirely with coordinate vector fields, jets of `g_ij` and `N^i_j`,
//! and generic Lie brackets, so it shares no formula with
//! [`ConnectionData::assemble`].

use ndarray::{Array2, Array3};
use num_traits::Zero;

use super::{ConnectionData, CoordField};
use crate::jet::Jet;
use crate::scalar::Scalar;

pub struct KoszulOracle<'a, S = f64> {
    data: &'a ConnectionData<S>,
    g: Array2<Jet<S>>,
    n: Array2<Jet<S>>,
}

impl<'a, S: Scalar> KoszulOracle<'a, S> {
    pub fn new(data: &'a ConnectionData<S>) -> Self {
        KoszulOracle {
            data,
            g: data.g_jets(),
            n: data.nonlinear.jets(),
        }
    }

    fn m(&self) -> usize {
        self.data.dim()
    }

    fn zeros(&self) -> Vec<Jet<S>> {
        vec![Jet::zero(); self.m()]
    }

    /// Vertical components `Y + N X` of a coordinate field.
    fn v_part(&self, f: &CoordField<S>) -> Vec<Jet<S>> {
        f.to_adapted(&self.n).v
    }

    /// `vX` as a coordinate field.
    fn v_field(&self, f: &CoordField<S>) -> CoordField<S> {
        CoordField::new(self.zeros(), self.v_part(f))
    }

    /// `hX = Xᵃ ∂_{xᵃ} − N^k_a Xᵃ ∂_{yᵏ}` as a coordinate field.
    fn h_field(&self, f: &CoordField<S>) -> CoordField<S> {
        let m = self.m();
        let y = (0..m)
            .map(|k| {
                (0..m).fold(Jet::zero(), |acc: Jet<S>, a| {
                    acc - self.n[[k, a]].clone() * f.x[a].clone()
                })
            })
            .collect();
        CoordField::new(f.x.clone(), y)
    }

    /// `g(A, B)` of two vertical component lists, as a jet.
    fn g_jet(&self, a: &[Jet<S>], b: &[Jet<S>]) -> Jet<S> {
        let m = self.m();
        let mut acc = Jet::zero();
        for i in 0..m {
            for j in 0..m {
                acc = acc + self.g[[i, j]].clone() * a[i].clone() * b[j].clone();
            }
        }
        acc
    }

    fn g_val(&self, a: &[S], b: &[S]) -> S {
        let m = self.m();
        let mut acc = S::zero();
        for i in 0..m {
            for j in 0..m {
                acc = acc + self.data.g[[i, j]].clone() * a[i].clone() * b[j].clone();
            }
        }
        acc
    }

    /// Vertical part of `[A, B]` at the point.
    fn v_bracket(&self, a: &CoordField<S>, b: &CoordField<S>) -> Vec<S> {
        let (bx, by) = a.bracket(b);
        super::coords_to_adapted(&bx, &by, self.data.n()).v
    }

    /// `J h [A, B] = −(x-components of the bracket)` on `∂̇`.
    fn jh_bracket(&self, a: &CoordField<S>, b: &CoordField<S>) -> Vec<S> {
        a.bracket(b).0.into_iter().map(|c| -c).collect()
    }

    /// `P(A, B)` for vertical arguments, `P(∂̇_a, ∂̇_b) = P^k_ba ∂̇_k`.
    fn skew(p: &Array3<S>, a: &[S], b: &[S]) -> Vec<S> {
        let m = a.len();
        (0..m)
            .map(|k| {
                let mut acc = S::zero();
                for i in 0..m {
                    for j in 0..m {
                        acc = acc + a[i].clone() * b[j].clone() * p[[k, j, i]].clone();
                    }
                }
                acc
            })
            .collect()
    }

    fn values(v: &[Jet<S>]) -> Vec<S> {
        v.iter().map(|j| j.value().clone()).collect()
    }

    /// Right-hand side of the vertical Koszul formula: `2 g(∇_{vX} vY, vZ)`.
    pub fn vertical(&self, x: &CoordField<S>, y: &CoordField<S>, z: &CoordField<S>) -> S {
        let (vx, vy, vz) = (self.v_field(x), self.v_field(y), self.v_field(z));
        let (cx, cy, cz) = (
            Self::values(&vx.y),
            Self::values(&vy.y),
            Self::values(&vz.y),
        );
        let s = &self.data.s;
        vx.apply(&self.g_jet(&vy.y, &vz.y)) + vy.apply(&self.g_jet(&vz.y, &vx.y))
            - vz.apply(&self.g_jet(&vx.y, &vy.y))
            + self.g_val(&cy, &self.v_bracket(&vz, &vx))
            + self.g_val(&cz, &self.v_bracket(&vx, &vy))
            - self.g_val(&cx, &self.v_bracket(&vy, &vz))
            + self.g_val(&cy, &Self::skew(s, &cz, &cx))
            + self.g_val(&cz, &Self::skew(s, &cx, &cy))
            - self.g_val(&cx, &Self::skew(s, &cy, &cz))
    }

    /// Right-hand side of the horizontal Koszul formula: `2 g(∇_{hX} JhY, JhZ)`.
    pub fn horizontal(&self, x: &CoordField<S>, y: &CoordField<S>, z: &CoordField<S>) -> S {
        let (hx, hy, hz) = (self.h_field(x), self.h_field(y), self.h_field(z));
        let jh = |f: &CoordField<S>| -> Vec<Jet<S>> { f.x.iter().cloned().map(|a| -a).collect() };
        let (jx, jy, jz) = (jh(x), jh(y), jh(z));
        let (cx, cy, cz) = (Self::values(&jx), Self::values(&jy), Self::values(&jz));
        let t = &self.data.t;
        hx.apply(&self.g_jet(&jy, &jz)) + hy.apply(&self.g_jet(&jz, &jx))
            - hz.apply(&self.g_jet(&jx, &jy))
            + self.g_val(&cy, &self.jh_bracket(&hz, &hx))
            + self.g_val(&cz, &self.jh_bracket(&hx, &hy))
            - self.g_val(&cx, &self.jh_bracket(&hy, &hz))
            + self.g_val(&cy, &Self::skew(t, &cz, &cx))
            + self.g_val(&cz, &Self::skew(t, &cx, &cy))
            - self.g_val(&cx, &Self::skew(t, &cy, &cz))
    }

    /// `C` and `F` solved from the formulas on frame probes
    /// (`X = ∂̇_j, Y = ∂̇_i, Z = ∂̇_l` and `X = δ_j, Y = δ_i, Z = δ_l`).
    pub fn reconstruct(&self) -> (Array3<S>, Array3<S>) {
        let m = self.m();
        let v: Vec<_> = (0..m).map(|i| CoordField::vertical_frame(m, i)).collect();
        let h: Vec<_> = (0..m)
            .map(|i| CoordField::horizontal_frame(&self.n, i))
            .collect();
        let mut kv = Array3::from_elem((m, m, m), S::zero());
        let mut kh = kv.clone();
        for j in 0..m {
            for i in 0..m {
                for l in 0..m {
                    kv[[l, i, j]] = self.vertical(&v[j], &v[i], &v[l]).scale(0.5);
                    kh[[l, i, j]] = self.horizontal(&h[j], &h[i], &h[l]).scale(0.5);
                }
            }
        }
        let g_inv = &self.data.g_inv;
        let raise = |low: &Array3<S>| {
            Array3::from_shape_fn((m, m, m), |(k, i, j)| {
                (0..m).fold(S::zero(), |acc, l| {
                    acc + low[[l, i, j]].clone() * g_inv[[l, k]].clone()
                })
            })
        };
        (raise(&kv), raise(&kh))
    }
}
