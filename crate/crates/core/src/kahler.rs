//! The almost Hermitian structure `(J, G)` on `M'`: Sasaki-type metric,
//! fundamental 2-form `Φ(X, Y) = G(X, JY)`, its exterior derivative and the
//! Nijenhuis tensor of `J`.

use ndarray::{Array2, Array3};

use crate::connection::{
    apply_d, coords_to_adapted, derivative, AdaptedField, AdaptedVector, Balance, ConnectionData,
    CoordField, FrameBrackets,
};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tolerance::{Discrepancy, Tolerance};

/// `J`: `δ_i ↦ −∂̇_i`, `∂̇_i ↦ δ_i`.
pub fn apply_j<S: Scalar>(z: &AdaptedVector<S>) -> AdaptedVector<S> {
    z.apply_j()
}

/// The conjugate structure `J' = −J`.
pub fn apply_j_conjugate<S: Scalar>(z: &AdaptedVector<S>) -> AdaptedVector<S> {
    -z.apply_j()
}

/// `G = g_ij dxⁱdxʲ + g_ij δyⁱδyʲ` with `δyⁱ = dyⁱ + N^i_j dxʲ`.
#[derive(Debug, Clone)]
pub struct SasakiMetric<S = f64> {
    pub g: Array2<S>,
    pub n: Array2<S>,
}

impl<S: Scalar> SasakiMetric<S> {
    pub fn new(data: &ConnectionData<S>) -> Self {
        SasakiMetric {
            g: data.g.clone(),
            n: data.n().clone(),
        }
    }

    fn g_of(&self, a: &[S], b: &[S]) -> S {
        let m = a.len();
        let mut acc = S::zero();
        for i in 0..m {
            for j in 0..m {
                acc = acc + self.g[[i, j]].clone() * a[i].clone() * b[j].clone();
            }
        }
        acc
    }

    /// `G(X, Y)` for adapted components.
    pub fn inner(&self, x: &AdaptedVector<S>, y: &AdaptedVector<S>) -> S {
        self.g_of(&x.h, &y.h) + self.g_of(&x.v, &y.v)
    }

    /// `G(X, Y)` for chart components `(x, y)` of each vector, via `dx` and `δy`.
    pub fn inner_coords(&self, a: (&[S], &[S]), b: (&[S], &[S])) -> S {
        self.inner(
            &coords_to_adapted(a.0, a.1, &self.n),
            &coords_to_adapted(b.0, b.1, &self.n),
        )
    }

    /// `Φ(X, Y) = G(X, JY)`.
    pub fn phi(&self, x: &AdaptedVector<S>, y: &AdaptedVector<S>) -> S {
        self.inner(x, &y.apply_j())
    }

    /// Frame blocks of `Φ`.
    pub fn two_form(&self) -> TwoFormComponents<S> {
        let m = self.g.nrows();
        let h = |i| AdaptedVector::horizontal_frame(m, i);
        let v = |i| AdaptedVector::vertical_frame(m, i);
        TwoFormComponents {
            phi_hh: Array2::from_shape_fn((m, m), |(i, j)| self.phi(&h(i), &h(j))),
            phi_hv: Array2::from_shape_fn((m, m), |(i, j)| self.phi(&h(i), &v(j))),
            phi_vh: Array2::from_shape_fn((m, m), |(i, j)| self.phi(&v(i), &h(j))),
            phi_vv: Array2::from_shape_fn((m, m), |(i, j)| self.phi(&v(i), &v(j))),
        }
    }
}

/// `Φ` on pairs of frame vectors: `phi_hv[i, j] = Φ(δ_i, ∂̇_j)` and so on.
#[derive(Debug, Clone)]
pub struct TwoFormComponents<S = f64> {
    pub phi_hh: Array2<S>,
    pub phi_hv: Array2<S>,
    pub phi_vh: Array2<S>,
    pub phi_vv: Array2<S>,
}

/// `(D_X G)(Y, Z) = X(G(Y, Z)) − G(D_X Y, Z) − G(Y, D_X Z)`.
pub fn sasaki_parallel<S: Scalar>(
    data: &ConnectionData<S>,
    x: &AdaptedVector<S>,
    y: &AdaptedField<S>,
    z: &AdaptedField<S>,
) -> S {
    let [a, b, c] = sasaki_parallel_terms(data, x, y, z);
    a - b - c
}

/// The three terms `X(G(Y, Z))`, `G(D_X Y, Z)`, `G(Y, D_X Z)` separately.
pub fn sasaki_parallel_terms<S: Scalar>(
    data: &ConnectionData<S>,
    x: &AdaptedVector<S>,
    y: &AdaptedField<S>,
    z: &AdaptedField<S>,
) -> [S; 3] {
    let big_g = SasakiMetric::new(data);
    let gyz = y.scalar_product(z, &data.g_jets());
    [
        derivative(&gyz, x, data.n()),
        big_g.inner(&apply_d(data, x, y), &z.value()),
        big_g.inner(&y.value(), &apply_d(data, x, z)),
    ]
}

/// Frame blocks of `dΦ`, each stored `[i, j, k]`:
/// `vvv = dΦ(∂̇_i, ∂̇_j, ∂̇_k)`, `vvh = dΦ(∂̇_i, ∂̇_j, δ_k)`,
/// `vhh = dΦ(∂̇_i, δ_j, δ_k)`, `hhh = dΦ(δ_i, δ_j, δ_k)`.
#[derive(Debug, Clone)]
pub struct DPhiBlocks<S = f64> {
    pub vvv: Array3<S>,
    pub vvh: Array3<S>,
    pub vhh: Array3<S>,
    pub hhh: Array3<S>,
}

impl<S: Scalar> DPhiBlocks<S> {
    pub fn max_abs(&self) -> f64 {
        [&self.vvv, &self.vvh, &self.vhh, &self.hhh]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0, |acc, v| acc.max(v.re().abs()))
    }
}

/// `dΦ` on frame triples from the invariant three-argument formula, using
/// coordinate Lie brackets and jets of `g` and `N`.
pub fn dphi_components<S: Scalar>(data: &ConnectionData<S>) -> DPhiBlocks<S> {
    let m = data.dim();
    let g = data.g_jets();
    let n = data.nonlinear.jets();
    let metric = SasakiMetric::new(data);
    // frame E = (δ_1..δ_m, ∂̇_1..∂̇_m) as coordinate fields
    let frame: Vec<CoordField<S>> = (0..m)
        .map(|i| CoordField::horizontal_frame(&n, i))
        .chain((0..m).map(|i| CoordField::vertical_frame(m, i)))
        .collect();
    let adapted: Vec<AdaptedField<S>> = frame.iter().map(|f| f.to_adapted(&n)).collect();
    let e = 2 * m;
    // Φ(E_a, E_b) as a scalar field
    let phi: Vec<Jet<S>> = (0..e * e)
        .map(|ab| adapted[ab / e].scalar_product(&adapted[ab % e].apply_j(), &g))
        .collect();
    // Φ([E_a, E_b], E_c) at the point
    let values: Vec<AdaptedVector<S>> = frame
        .iter()
        .map(|f| {
            let x: Vec<S> = f.x.iter().map(|j| j.value().clone()).collect();
            let y: Vec<S> = f.y.iter().map(|j| j.value().clone()).collect();
            coords_to_adapted(&x, &y, data.n())
        })
        .collect();
    let brackets: Vec<AdaptedVector<S>> = (0..e * e)
        .map(|ab| {
            let (bx, by) = frame[ab / e].bracket(&frame[ab % e]);
            coords_to_adapted(&bx, &by, data.n())
        })
        .collect();
    let d_phi = |a: usize, b: usize, c: usize| {
        frame[a].apply(&phi[b * e + c]) - frame[b].apply(&phi[a * e + c])
            + frame[c].apply(&phi[a * e + b])
            - metric.phi(&brackets[a * e + b], &values[c])
            + metric.phi(&brackets[a * e + c], &values[b])
            - metric.phi(&brackets[b * e + c], &values[a])
    };
    let (h, v) = (0, m);
    let block = |oa: usize, ob: usize, oc: usize| {
        Array3::from_shape_fn((m, m, m), |(i, j, k)| d_phi(oa + i, ob + j, oc + k))
    };
    DPhiBlocks {
        vvv: block(v, v, v),
        vvh: block(v, v, h),
        vhh: block(v, h, h),
        hhh: block(h, h, h),
    }
}

/// The two closed-form almost-Kähler conditions, stored `[i, j, k]`:
/// `eq10`: `δg_ik/δxʲ + ∂N^h_k/∂yⁱ g_hj = δg_ij/δxᵏ + ∂N^h_j/∂yⁱ g_hk`;
/// `eq11`: `R^h_ij g_hk + R^h_jk g_hi = R^h_ik g_hj`.
#[derive(Debug, Clone)]
pub struct KahlerResiduals<S = f64> {
    pub eq10: Balance<S>,
    pub eq11: Balance<S>,
}

pub fn kahler_residuals<S: Scalar>(data: &ConnectionData<S>) -> KahlerResiduals<S> {
    let m = data.dim();
    let (g, dg, dn, r) = (&data.g, &data.delta_g, &data.nonlinear.dn_dy, &data.r);
    let sum = |f: &dyn Fn(usize) -> S| (0..m).fold(S::zero(), |acc, h| acc + f(h));
    let shape = (m, m, m);
    KahlerResiduals {
        eq10: Balance {
            lhs: Array3::from_shape_fn(shape, |(i, j, k)| {
                dg[[i, k, j]].clone() + sum(&|h| dn[[h, k, i]].clone() * g[[h, j]].clone())
            }),
            rhs: Array3::from_shape_fn(shape, |(i, j, k)| {
                dg[[i, j, k]].clone() + sum(&|h| dn[[h, j, i]].clone() * g[[h, k]].clone())
            }),
        },
        eq11: Balance {
            lhs: Array3::from_shape_fn(shape, |(i, j, k)| {
                sum(&|h| {
                    r[[h, i, j]].clone() * g[[h, k]].clone()
                        + r[[h, j, k]].clone() * g[[h, i]].clone()
                })
            }),
            rhs: Array3::from_shape_fn(shape, |(i, j, k)| {
                sum(&|h| r[[h, i, k]].clone() * g[[h, j]].clone())
            }),
        },
    }
}

/// Worst disagreement between the `dΦ` blocks and the closed forms: `vhh`
/// against the `eq10` residual, `hhh` against `eq11`, and `vvv`, `vvh`
/// against zero. Each entry is judged against the magnitude of the terms
/// that make it up.
pub fn dphi_two_path<S: Scalar>(
    dphi: &DPhiBlocks<S>,
    res: &KahlerResiduals<S>,
    tol: &Tolerance,
) -> Discrepancy {
    let pair = |block: &Array3<S>, bal: &Balance<S>| {
        block
            .iter()
            .zip(bal.lhs.iter().zip(&bal.rhs))
            .map(|(d, (l, r))| {
                let closed = l.re() - r.re();
                Discrepancy {
                    diff: (d.re() - closed).abs(),
                    scale: l.re().abs().max(r.re().abs()).max(d.re().abs()),
                }
            })
            .collect::<Vec<_>>()
    };
    let zeros = |block: &Array3<S>| {
        block
            .iter()
            .map(|d| Discrepancy::residual(d.re(), 0.0))
            .collect::<Vec<_>>()
    };
    crate::tolerance::worst_of(
        pair(&dphi.vhh, &res.eq10)
            .into_iter()
            .chain(pair(&dphi.hhh, &res.eq11))
            .chain(zeros(&dphi.vvv))
            .chain(zeros(&dphi.vvh)),
        tol,
    )
}

/// Nijenhuis tensor of `J` on frame pairs plus the two integrability
/// residuals it reduces to.
#[derive(Debug, Clone)]
pub struct NijenhuisBlocks<S = f64> {
    /// `[a, b, c]`: component `c` of `N_J(E_a, E_b)`, frame `E = (δ_1..δ_m, ∂̇_1..∂̇_m)`
    pub frame: Array3<S>,
    /// `[k, i, j] = δN^k_j/δxⁱ − δN^k_i/δxʲ`
    pub delta_symmetry: Array3<S>,
    /// `[k, i, j] = ∂N^k_j/∂yⁱ − ∂N^k_i/∂yʲ`
    pub fiber_symmetry: Array3<S>,
}

impl<S: Scalar> NijenhuisBlocks<S> {
    pub fn max_frame(&self) -> f64 {
        self.frame.iter().fold(0.0, |acc, v| acc.max(v.re().abs()))
    }

    pub fn max_corollary(&self) -> f64 {
        self.delta_symmetry
            .iter()
            .chain(&self.fiber_symmetry)
            .fold(0.0, |acc, v| acc.max(v.re().abs()))
    }
}

/// `N_J(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] − [X, Y]` on every frame pair.
pub fn nijenhuis<S: Scalar>(
    data: &ConnectionData<S>,
    brackets: &FrameBrackets<S>,
) -> NijenhuisBlocks<S> {
    let m = data.dim();
    let frame = AdaptedVector::frame(m);
    let b = |x: &AdaptedVector<S>, y: &AdaptedVector<S>| brackets.bracket(x, y);
    let mut out = Array3::from_elem((2 * m, 2 * m, 2 * m), S::zero());
    for (a, x) in frame.iter().enumerate() {
        for (c, y) in frame.iter().enumerate() {
            let (jx, jy) = (x.apply_j(), y.apply_j());
            let nj = b(&jx, &jy) - b(&jx, y).apply_j() - b(x, &jy).apply_j() - b(x, y);
            for (k, v) in nj.components().enumerate() {
                out[[a, c, k]] = v.clone();
            }
        }
    }
    let nc = &data.nonlinear;
    NijenhuisBlocks {
        frame: out,
        delta_symmetry: Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            nc.delta_n[[k, j, i]].clone() - nc.delta_n[[k, i, j]].clone()
        }),
        fiber_symmetry: Array3::from_shape_fn((m, m, m), |(k, i, j)| {
            nc.dn_dy[[k, j, i]].clone() - nc.dn_dy[[k, i, j]].clone()
        }),
    }
}
