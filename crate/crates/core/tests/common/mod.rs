//! Oracles that share no code with the library's derivative machinery.
#![allow(dead_code)]

use cartan_lab::{parse_scenario, ChartPoint, MetricSpec, Scenario};

/// Mixed partial `∂^k f / ∂z_{v1}…∂z_{vk}` by nested central differences,
/// Richardson-extrapolated over step pairs `(h, h/2)`.
///
/// `steps[v]` is the base step for variable `v`; it is shrunk by `1/2` for
/// the refined estimate.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, z: &[f64], vars: &[usize], steps: &[f64]) -> f64 {
    let central = |scale: f64| nested(f, z, vars, steps, scale);
    let coarse = central(1.0);
    let fine = central(0.5);
    (4.0 * fine - coarse) / 3.0
}

fn nested(f: &dyn Fn(&[f64]) -> f64, z: &[f64], vars: &[usize], steps: &[f64], scale: f64) -> f64 {
    match vars.split_first() {
        None => f(z),
        Some((&v, rest)) => {
            let h = steps[v] * scale;
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[v] += h;
            zm[v] -= h;
            (nested(f, &zp, rest, steps, scale) - nested(f, &zm, rest, steps, scale)) / (2.0 * h)
        }
    }
}

/// Base step for a derivative of total order `k`. Larger steps at higher
/// order balance truncation against round-off amplified by `h^-k`.
pub fn order_step(k: usize) -> f64 {
    match k {
        1 => 5e-4,
        2 => 2e-3,
        _ => 8e-3,
    }
}

/// Largest relative disagreement between jet partials and finite differences
/// of `F*`. Order-`k` partials are judged against the largest partial of that
/// order, floored at their natural size for a 2-homogeneous energy:
/// `max(|F*|, |y|² max|∂²F*/∂y∂y|) / |y|^k`. The second term keeps the floor
/// away from zero on the null cone of an indefinite metric.
pub fn worst_fd_error(spec: &MetricSpec, p: &ChartPoint) -> f64 {
    let m = spec.dim();
    let z: Vec<f64> = p.x.iter().chain(&p.y).copied().collect();
    let f = |z: &[f64]| spec.energy(&z[..m], &z[m..]).unwrap();
    let jet = spec
        .energy(&p.seed(3).unwrap()[..m], &p.seed(3).unwrap()[m..])
        .unwrap();
    let ynorm = p.y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let hess = (m..2 * m)
        .flat_map(|a| (m..2 * m).map(move |b| (a, b)))
        .map(|(a, b)| jet.d2(a, b).abs())
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let steps: Vec<f64> = (0..2 * m)
            .map(|v| order_step(k) * if v < m { 1.0 } else { ynorm })
            .collect();
        let idx: Vec<_> = multi_indices(2 * m)
            .into_iter()
            .filter(|a| a.len() == k)
            .collect();
        let ad: Vec<f64> = idx.iter().map(|a| jet.partial(a).unwrap()).collect();
        let floor = jet.value().abs().max(hess * ynorm * ynorm) / ynorm.powi(k as i32);
        let scale = ad.iter().fold(floor, |acc, v| acc.max(v.abs()));
        for (a, exact) in idx.iter().zip(&ad) {
            let fd = fd_partial(&f, &z, a, &steps);
            worst = worst.max((fd - exact).abs() / exact.abs().max(scale));
        }
    }
    worst
}

/// All sorted multi-indices over `n` variables with `1 ≤ |α| ≤ 3`.
pub fn multi_indices(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..n {
        out.push(vec![a]);
        for b in a..n {
            out.push(vec![a, b]);
            for c in b..n {
                out.push(vec![a, b, c]);
            }
        }
    }
    out
}

/// Analytic Christoffel data of a 2-dimensional metric `diag(1, G(x1))`.
pub struct Warped {
    pub g: fn(f64) -> f64,
    pub dg: fn(f64) -> f64,
    pub ddg: fn(f64) -> f64,
}

/// `dx1² + (x1² + 1) dx2²`
pub const CURVED: Warped = Warped {
    g: |t| t * t + 1.0,
    dg: |t| 2.0 * t,
    ddg: |_| 2.0,
};

/// `dx1² + cos²x1 dx2²`
pub const SPHERE: Warped = Warped {
    g: |t| t.cos().powi(2),
    dg: |t| -(2.0 * t).sin(),
    ddg: |t| -2.0 * (2.0 * t).cos(),
};

impl Warped {
    /// `Γ[k][i][j] = Γ^k_ij`
    pub fn christoffel(&self, x: &[f64]) -> [[[f64; 2]; 2]; 2] {
        let (g, dg) = ((self.g)(x[0]), (self.dg)(x[0]));
        let mut c = [[[0.0; 2]; 2]; 2];
        c[0][1][1] = -dg / 2.0;
        c[1][0][1] = dg / (2.0 * g);
        c[1][1][0] = dg / (2.0 * g);
        c
    }

    /// `[k][i][j][l] = ∂Γ^k_ij / ∂x^l`
    pub fn christoffel_dx(&self, x: &[f64]) -> [[[[f64; 2]; 2]; 2]; 2] {
        let (g, dg, ddg) = ((self.g)(x[0]), (self.dg)(x[0]), (self.ddg)(x[0]));
        let mut d = [[[[0.0; 2]; 2]; 2]; 2];
        d[0][1][1][0] = -ddg / 2.0;
        let v = (ddg * g - dg * dg) / (2.0 * g * g);
        d[1][0][1][0] = v;
        d[1][1][0][0] = v;
        d
    }

    /// `N^i_j = Γ^i_jk y^k`
    pub fn n(&self, x: &[f64], y: &[f64]) -> [[f64; 2]; 2] {
        let c = self.christoffel(x);
        let mut n = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                n[i][j] = (0..2).map(|k| c[i][j][k] * y[k]).sum();
            }
        }
        n
    }

    /// `R^k_ij = y^l (∂_jΓ^k_il − ∂_iΓ^k_jl + Γ^k_ja Γ^a_il − Γ^k_ia Γ^a_jl)`
    pub fn curvature(&self, x: &[f64], y: &[f64]) -> [[[f64; 2]; 2]; 2] {
        let c = self.christoffel(x);
        let d = self.christoffel_dx(x);
        let mut r = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for l in 0..2 {
                        let mut t = d[k][i][l][j] - d[k][j][l][i];
                        for a in 0..2 {
                            t += c[k][j][a] * c[a][i][l] - c[k][i][a] * c[a][j][l];
                        }
                        acc += y[l] * t;
                    }
                    r[k][i][j] = acc;
                }
            }
        }
        r
    }
}

/// Scenario for a named preset, optionally with random constant `S` and `T`.
pub fn preset_scenario(
    name: &str,
    dim: usize,
    torsion: bool,
    checks: &[&str],
    count: usize,
) -> Scenario {
    let mut text = format!("dim = {dim}\nmetric = \"{name}\"\n");
    if !checks.is_empty() {
        let list: Vec<String> = checks.iter().map(|c| format!("\"{c}\"")).collect();
        text += &format!("checks = [{}]\n", list.join(", "));
    }
    if torsion {
        text += "[torsion.s]\nkind = \"random\"\nscale = 0.5\nseed = 101\n";
        text += "[torsion.t]\nkind = \"random\"\nscale = 0.5\nseed = 202\n";
    }
    text += &format!("[samples]\ncount = {count}\nseed = 2024\n");
    parse_scenario(&text).unwrap_or_else(|e| panic!("{name}/{dim}: {e}"))
}

/// Every `(preset, dim)` pair available for `dims`.
pub fn builtin_matrix(dims: &[usize]) -> Vec<(String, usize, MetricSpec)> {
    let mut out = Vec::new();
    for &d in dims {
        for spec in cartan_lab::metric::presets::all_builtins(d) {
            out.push((spec.label().to_string(), d, spec));
        }
    }
    out
}
