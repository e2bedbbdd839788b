//! Vectors and vector fields on `TM'`, in the adapted frame
//! `{δ/δxⁱ, ∂/∂yⁱ}` or in chart coordinates `{∂/∂xⁱ, ∂/∂yⁱ}`.
//!
//! Fields only need their value and first derivatives at the point under
//! study, so their components are order-1 jets (constants are allowed).

use ndarray::{Array2, Array3};
use num_traits::Zero;

use super::NonlinearConnection;
use crate::jet::Jet;
use crate::scalar::Scalar;

/// `Z = Zⁱ δ/δxⁱ + Z̃ⁱ ∂/∂yⁱ` at a point: `h = (Zⁱ)`, `v = (Z̃ⁱ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedVector<S = f64> {
    pub h: Vec<S>,
    pub v: Vec<S>,
}

impl<S: Scalar> AdaptedVector<S> {
    pub fn new(h: Vec<S>, v: Vec<S>) -> Self {
        assert_eq!(
            h.len(),
            v.len(),
            "horizontal and vertical parts differ in length"
        );
        AdaptedVector { h, v }
    }

    pub fn zero(m: usize) -> Self {
        AdaptedVector::new(vec![S::zero(); m], vec![S::zero(); m])
    }

    /// `δ/δxⁱ`
    pub fn horizontal_frame(m: usize, i: usize) -> Self {
        let mut z = Self::zero(m);
        z.h[i] = S::one();
        z
    }

    /// `∂/∂yⁱ`
    pub fn vertical_frame(m: usize, i: usize) -> Self {
        let mut z = Self::zero(m);
        z.v[i] = S::one();
        z
    }

    /// The `2m` frame vectors, horizontal first.
    pub fn frame(m: usize) -> Vec<Self> {
        (0..m)
            .map(|i| Self::horizontal_frame(m, i))
            .chain((0..m).map(|i| Self::vertical_frame(m, i)))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn horizontal(&self) -> Self {
        AdaptedVector::new(self.h.clone(), vec![S::zero(); self.dim()])
    }

    pub fn vertical(&self) -> Self {
        AdaptedVector::new(vec![S::zero(); self.dim()], self.v.clone())
    }

    pub fn scale(&self, c: S) -> Self {
        let f = |w: &[S]| w.iter().map(|a| a.clone() * c.clone()).collect();
        AdaptedVector::new(f(&self.h), f(&self.v))
    }

    pub fn components(&self) -> impl Iterator<Item = &S> {
        self.h.iter().chain(&self.v)
    }
}

impl<S: Scalar> std::ops::Add for AdaptedVector<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let f = |a: Vec<S>, b: Vec<S>| a.into_iter().zip(b).map(|(p, q)| p + q).collect();
        AdaptedVector::new(f(self.h, o.h), f(self.v, o.v))
    }
}

impl<S: Scalar> std::ops::Sub for AdaptedVector<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let f = |a: Vec<S>, b: Vec<S>| a.into_iter().zip(b).map(|(p, q)| p - q).collect();
        AdaptedVector::new(f(self.h, o.h), f(self.v, o.v))
    }
}

impl<S: Scalar> std::ops::Neg for AdaptedVector<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let f = |a: Vec<S>| a.into_iter().map(|p| -p).collect();
        AdaptedVector::new(f(self.h), f(self.v))
    }
}

/// Derivative of a scalar field along an adapted vector:
/// `Xʲ δf/δxʲ + X̃ʲ ∂f/∂yʲ`.
pub fn derivative<S: Scalar>(f: &Jet<S>, x: &AdaptedVector<S>, n: &Array2<S>) -> S {
    let m = x.dim();
    let mut acc = S::zero();
    for j in 0..m {
        let mut dj = f.d(j);
        for l in 0..m {
            dj = dj - n[[l, j]].clone() * f.d(m + l);
        }
        acc = acc + x.h[j].clone() * dj + x.v[j].clone() * f.d(m + j);
    }
    acc
}

/// A vector field in adapted components.
#[derive(Debug, Clone)]
pub struct AdaptedField<S = f64> {
    pub h: Vec<Jet<S>>,
    pub v: Vec<Jet<S>>,
}

impl<S: Scalar> AdaptedField<S> {
    pub fn new(h: Vec<Jet<S>>, v: Vec<Jet<S>>) -> Self {
        assert_eq!(
            h.len(),
            v.len(),
            "horizontal and vertical parts differ in length"
        );
        AdaptedField { h, v }
    }

    /// Constant-coefficient combination of frame fields.
    pub fn constant(z: &AdaptedVector<S>) -> Self {
        let f = |w: &[S]| w.iter().cloned().map(Jet::constant).collect();
        AdaptedField::new(f(&z.h), f(&z.v))
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn value(&self) -> AdaptedVector<S> {
        let f = |w: &[Jet<S>]| w.iter().map(|j| j.value().clone()).collect();
        AdaptedVector::new(f(&self.h), f(&self.v))
    }

    /// `J Y`: `(h, v) ↦ (v, −h)`.
    pub fn apply_j(&self) -> Self {
        AdaptedField::new(self.v.clone(), self.h.iter().cloned().map(|a| -a).collect())
    }

    /// `f Y` for a scalar field `f`.
    pub fn times(&self, f: &Jet<S>) -> Self {
        let g = |w: &[Jet<S>]| w.iter().map(|a| a.clone() * f.clone()).collect();
        AdaptedField::new(g(&self.h), g(&self.v))
    }

    pub fn scalar_product(&self, other: &Self, g: &Array2<Jet<S>>) -> Jet<S> {
        let m = self.dim();
        let mut acc = Jet::zero();
        for a in 0..m {
            for b in 0..m {
                acc = acc
                    + g[[a, b]].clone()
                        * (self.h[a].clone() * other.h[b].clone()
                            + self.v[a].clone() * other.v[b].clone());
            }
        }
        acc
    }
}

/// A vector field in chart coordinates: `Xᵃ ∂/∂xᵃ + Yᵃ ∂/∂yᵃ`.
#[derive(Debug, Clone)]
pub struct CoordField<S = f64> {
    pub x: Vec<Jet<S>>,
    pub y: Vec<Jet<S>>,
}

impl<S: Scalar> CoordField<S> {
    pub fn new(x: Vec<Jet<S>>, y: Vec<Jet<S>>) -> Self {
        assert_eq!(x.len(), y.len(), "base and fiber parts differ in length");
        CoordField { x, y }
    }

    pub fn constant(x: &[S], y: &[S]) -> Self {
        let f = |w: &[S]| w.iter().cloned().map(Jet::constant).collect();
        CoordField::new(f(x), f(y))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `∂/∂yⁱ`
    pub fn vertical_frame(m: usize, i: usize) -> Self {
        let mut y = vec![S::zero(); m];
        y[i] = S::one();
        CoordField::constant(&vec![S::zero(); m], &y)
    }

    /// `δ/δxⁱ = ∂/∂xⁱ − Nʲ_i ∂/∂yʲ`, with `N` as order-1 jets.
    pub fn horizontal_frame(n: &Array2<Jet<S>>, i: usize) -> Self {
        let m = n.nrows();
        let x = (0..m)
            .map(|a| Jet::constant(if a == i { S::one() } else { S::zero() }))
            .collect();
        let y = (0..m).map(|j| -n[[j, i]].clone()).collect();
        CoordField::new(x, y)
    }

    /// Build from adapted components: `Xᵃ δ_a + X̃ᵃ ∂̇_a`.
    pub fn from_adapted(f: &AdaptedField<S>, n: &Array2<Jet<S>>) -> Self {
        let m = f.dim();
        let y = (0..m)
            .map(|k| {
                (0..m).fold(f.v[k].clone(), |acc, a| {
                    acc - n[[k, a]].clone() * f.h[a].clone()
                })
            })
            .collect();
        CoordField::new(f.h.clone(), y)
    }

    /// Adapted components: `h = X`, `v = Y + N X`.
    pub fn to_adapted(&self, n: &Array2<Jet<S>>) -> AdaptedField<S> {
        let m = self.dim();
        let v = (0..m)
            .map(|k| {
                (0..m).fold(self.y[k].clone(), |acc, a| {
                    acc + n[[k, a]].clone() * self.x[a].clone()
                })
            })
            .collect();
        AdaptedField::new(self.x.clone(), v)
    }

    /// Derivative of a scalar field along this field at the point.
    pub fn apply(&self, f: &Jet<S>) -> S {
        let m = self.dim();
        let mut acc = S::zero();
        for a in 0..m {
            acc = acc + self.x[a].value().clone() * f.d(a) + self.y[a].value().clone() * f.d(m + a);
        }
        acc
    }

    /// Lie bracket `[self, other]` at the point, as `(x, y)` components.
    pub fn bracket(&self, other: &Self) -> (Vec<S>, Vec<S>) {
        let comp = |a: &Jet<S>, b: &Jet<S>| self.apply(b) - other.apply(a);
        (
            self.x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| comp(a, b))
                .collect(),
            self.y
                .iter()
                .zip(&other.y)
                .map(|(a, b)| comp(a, b))
                .collect(),
        )
    }
}

/// Coordinate components `(x, y)` of a vector to adapted components.
pub fn coords_to_adapted<S: Scalar>(x: &[S], y: &[S], n: &Array2<S>) -> AdaptedVector<S> {
    let m = x.len();
    let v = (0..m)
        .map(|k| {
            (0..m).fold(y[k].clone(), |acc, a| {
                acc + n[[k, a]].clone() * x[a].clone()
            })
        })
        .collect();
    AdaptedVector::new(x.to_vec(), v)
}

/// Lie brackets of the adapted frame, which are all vertical.
#[derive(Debug, Clone)]
pub struct FrameBrackets<S = f64> {
    /// `[k, i, j]`: `∂/∂yᵏ` component of `[δ_i, δ_j]`
    pub hh: Array3<S>,
    /// `[k, i, j]`: `∂/∂yᵏ` component of `[∂̇_i, δ_j]`
    pub vh: Array3<S>,
}

impl<S: Scalar> FrameBrackets<S> {
    /// Closed form: `[δ_i, δ_j] = R^k_ij ∂̇_k`, `[∂̇_i, δ_j] = −∂N^k_j/∂yⁱ ∂̇_k`,
    /// `[∂̇_i, ∂̇_j] = 0`.
    pub fn new(nc: &NonlinearConnection<S>) -> Self {
        let m = nc.dim();
        FrameBrackets {
            hh: nc.curvature(),
            vh: Array3::from_shape_fn((m, m, m), |(k, i, j)| -nc.dn_dy[[k, j, i]].clone()),
        }
    }

    /// The same blocks from coordinate Lie brackets of the frame fields.
    pub fn from_coordinates(nc: &NonlinearConnection<S>) -> Self {
        let m = nc.dim();
        let n = nc.jets();
        let h: Vec<_> = (0..m)
            .map(|i| CoordField::horizontal_frame(&n, i))
            .collect();
        let v: Vec<_> = (0..m).map(|i| CoordField::vertical_frame(m, i)).collect();
        let vertical = |a: &CoordField<S>, b: &CoordField<S>| {
            let (bx, by) = a.bracket(b);
            coords_to_adapted(&bx, &by, &nc.n).v
        };
        let mut hh = Array3::from_elem((m, m, m), S::zero());
        let mut vh = hh.clone();
        for i in 0..m {
            for j in 0..m {
                for (k, c) in vertical(&h[i], &h[j]).into_iter().enumerate() {
                    hh[[k, i, j]] = c;
                }
                for (k, c) in vertical(&v[i], &h[j]).into_iter().enumerate() {
                    vh[[k, i, j]] = c;
                }
            }
        }
        FrameBrackets { hh, vh }
    }

    pub fn dim(&self) -> usize {
        self.hh.dim().0
    }

    /// `[A, B]` for constant-coefficient combinations of frame fields.
    pub fn bracket(&self, a: &AdaptedVector<S>, b: &AdaptedVector<S>) -> AdaptedVector<S> {
        let m = self.dim();
        let mut out = AdaptedVector::zero(m);
        for k in 0..m {
            let mut acc = S::zero();
            for i in 0..m {
                for j in 0..m {
                    acc = acc
                        + a.h[i].clone() * b.h[j].clone() * self.hh[[k, i, j]].clone()
                        + (a.v[i].clone() * b.h[j].clone() - b.v[i].clone() * a.h[j].clone())
                            * self.vh[[k, i, j]].clone();
                }
            }
            out.v[k] = acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::canonical_connection;
    use crate::metric::{presets, ChartPoint};

    #[test]
    fn coordinate_round_trip() {
        let spec = presets::randers(2).unwrap();
        let p = ChartPoint::new(vec![0.2, -0.3], vec![1.0, 0.4]).unwrap();
        let nc = canonical_connection(&spec, &p).unwrap();
        let n = nc.jets();
        let f = AdaptedField::constant(&AdaptedVector::new(vec![1.5f64, -2.0], vec![0.25, 3.0]));
        let back = CoordField::from_adapted(&f, &n).to_adapted(&n).value();
        for (a, b) in back.components().zip(f.value().components()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_brackets_match_coordinate_brackets() {
        let spec = presets::sphere_chart().unwrap();
        let p = ChartPoint::new(vec![0.4f64, 1.0], vec![0.7, -1.3]).unwrap();
        let nc = canonical_connection(&spec, &p).unwrap();
        let (a, b) = (
            FrameBrackets::new(&nc),
            FrameBrackets::from_coordinates(&nc),
        );
        for (u, v) in
            a.hh.iter()
                .chain(a.vh.iter())
                .zip(b.hh.iter().chain(b.vh.iter()))
        {
            assert!((u - v).abs() < 1e-12, "{u} vs {v}");
        }
        assert!(a.hh[[0, 0, 1]].abs() > 1e-2);
    }

    #[test]
    fn frame_bracket_is_skew() {
        let spec = presets::curved_plane().unwrap();
        let p = ChartPoint::new(vec![0.4f64, 1.0], vec![0.7, -1.3]).unwrap();
        let fb = FrameBrackets::new(&canonical_connection(&spec, &p).unwrap());
        let a = AdaptedVector::new(vec![1.0f64, 2.0], vec![-1.0, 0.5]);
        let b = AdaptedVector::new(vec![0.3f64, -0.2], vec![2.0, 1.0]);
        let s = fb.bracket(&a, &b) + fb.bracket(&b, &a);
        assert!(s.components().all(|c| c.abs() < 1e-14));
    }
}
