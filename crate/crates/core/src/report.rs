//! Batch evaluation of every identity over a scenario's sample points.
//!
//! Points are evaluated in parallel; the report is assembled in point order,
//! so the output does not depend on scheduling.

use std::cell::OnceCell;
use std::fmt::Write as _;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{
    apply_d, cartan_coefficients, d_j, delta_x, metric_compat_residuals, spray_homogeneity,
    torsion_components, torsion_displays, AdaptedField, AdaptedVector, ConnectionData,
    ConnectionError, ConnectionSource, FrameBrackets, KoszulOracle, TorsionBlocks,
};
use crate::kahler::{
    dphi_components, dphi_two_path, kahler_residuals, nijenhuis, sasaki_parallel_terms, DPhiBlocks,
    KahlerResiduals, NijenhuisBlocks, SasakiMetric,
};
use crate::metric::{check_homogeneity, check_signature, ChartPoint};
use crate::sampling::{random_field, random_vector};
use crate::scenario::Scenario;
use crate::tolerance::{worst_of, Discrepancy, Tolerance};

/// Version of the JSON report layout; see `docs/report-schema.md`.
pub const SCHEMA_VERSION: u32 = 1;

/// Random probe configurations drawn per point for field-valued checks.
const PROBES: usize = 2;

/// Fiber scalings used by the homogeneity checks.
const SCALINGS: [f64; 3] = [0.5, 2.0, 10.0];

macro_rules! checks {
    ($($variant:ident => $name:literal, $about:literal;)*) => {
        /// A registered check.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum CheckId { $($variant),* }

        impl CheckId {
            pub const ALL: &'static [CheckId] = &[$(CheckId::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(CheckId::$variant => $name),* }
            }

            pub fn description(self) -> &'static str {
                match self { $(CheckId::$variant => $about),* }
            }

            pub fn from_name(name: &str) -> Option<CheckId> {
                match name { $($name => Some(CheckId::$variant),)* _ => None }
            }
        }
    };
}

checks! {
    Homogeneity => "homogeneity", "F*(x, ky) = k^2 F*(x, y) for k in {0.5, 2, 10}";
    Euler => "euler", "g_ij y^i y^j = F*";
    Signature => "signature", "eigenvalue signs of g match the declared signature";
    GInverse => "g_inverse", "g g^-1 = I";
    SprayHomogeneity => "spray_homogeneity", "canonical N(x, ky) = k N(x, y)";
    HorizontalEnergy => "horizontal_energy", "canonical N satisfies dF*/dx^i - N^j_i dF*/dy^j = 0";
    TwoPathEquality => "two_path_equality", "C and F from the coefficient formulas equal the Koszul reconstruction";
    MetricCompat => "metric_compat", "dg/dy and delta g/delta x identities of metric compatibility";
    DjParallel => "DJ_parallel", "(D_X J)Y = 0 on random fields";
    DMetric => "D_metric", "(D_X G)(Y, Z) = 0 on random fields";
    CartanSymmetry => "cartan_symmetry", "with S = 0, C^k_ij is the symmetric Cartan tensor";
    TorsionVvEqS => "torsion_vv_eq_S", "vertical torsion block equals S";
    TorsionHhEqT => "torsion_hh_eq_T", "horizontal part of T(delta_i, delta_j) equals T";
    TorsionDisplays => "torsion_displays", "torsion of D on frame fields equals the closed-form blocks";
    TorsionFree => "torsion_free", "all five torsion blocks vanish";
    Hermitian => "hermitian", "G(JX, JY) = G(X, Y)";
    SasakiOrthogonal => "sasaki_orthogonal", "horizontal and vertical frames are G-orthogonal in chart coordinates";
    PhiSkew => "phi_skew", "Phi(X, Y) = -Phi(Y, X)";
    JSquared => "J_squared", "J^2 = -Id";
    DphiTwoPath => "dphi_two_path", "dPhi frame blocks equal the closed-form Kahler residuals";
    KahlerEq10 => "kahler_eq10", "first closed-form Kahler condition";
    KahlerEq11 => "kahler_eq11", "second closed-form Kahler condition";
    Nijenhuis => "nijenhuis", "Nijenhuis tensor of J vanishes on frame pairs";
    Corollary1 => "corollary1", "delta N^k_i/delta x^j and dN^k_i/dy^j are symmetric in (i, j)";
    FrameBrackets => "frame_brackets", "closed-form frame brackets equal coordinate Lie brackets";
}

impl CheckId {
    /// Why the check does not apply to this scenario, if it does not.
    pub fn skip_reason(self, s: &Scenario) -> Option<&'static str> {
        match self {
            CheckId::SprayHomogeneity | CheckId::HorizontalEnergy
                if s.connection != ConnectionSource::Canonical =>
            {
                Some("only defined for the canonical connection")
            }
            CheckId::CartanSymmetry if !s.torsion.s.is_zero() => Some("requires S = 0"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub points_evaluated: usize,
    /// Largest absolute residual over all points.
    pub max_residual: f64,
    /// Largest `residual / (atol + rtol·scale)`; the check passes iff it is at most 1.
    pub max_ratio: f64,
    /// Point attaining `max_ratio`.
    pub worst_point: Option<SamplePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub dimension: usize,
    pub metric_family: String,
    pub metric_label: String,
    pub connection: String,
    pub torsion_s: String,
    pub torsion_t: String,
    pub seed: u64,
    pub samples: usize,
    pub x_box: [f64; 2],
    pub fiber_radius: [f64; 2],
    pub crate_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub environment: Environment,
    pub tolerances: Tolerance,
    pub checks: Vec<CheckResult>,
    pub point_errors: Vec<PointError>,
    pub warnings: Vec<String>,
    /// Every check that ran passed.
    pub all_pass: bool,
}

impl CheckReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn skew_kind(t: &crate::connection::SkewTensor) -> &'static str {
    use crate::connection::SkewTensor;
    match t {
        SkewTensor::Zero => "zero",
        SkewTensor::Constant(_) => "constant",
        SkewTensor::Expression(_) => "expression",
    }
}

/// Per-point intermediate results, computed on first use.
struct PointCache<'a> {
    data: &'a ConnectionData,
    brackets: OnceCell<FrameBrackets>,
    torsion: OnceCell<TorsionBlocks>,
    displays: OnceCell<TorsionBlocks>,
    dphi: OnceCell<DPhiBlocks>,
    kahler: OnceCell<KahlerResiduals>,
    nijenhuis: OnceCell<NijenhuisBlocks>,
}

impl<'a> PointCache<'a> {
    fn new(data: &'a ConnectionData) -> Self {
        PointCache {
            data,
            brackets: OnceCell::new(),
            torsion: OnceCell::new(),
            displays: OnceCell::new(),
            dphi: OnceCell::new(),
            kahler: OnceCell::new(),
            nijenhuis: OnceCell::new(),
        }
    }

    fn brackets(&self) -> &FrameBrackets {
        self.brackets
            .get_or_init(|| FrameBrackets::new(&self.data.nonlinear))
    }

    fn torsion(&self) -> &TorsionBlocks {
        self.torsion
            .get_or_init(|| torsion_components(self.data, self.brackets()))
    }

    fn displays(&self) -> &TorsionBlocks {
        self.displays.get_or_init(|| torsion_displays(self.data))
    }

    fn dphi(&self) -> &DPhiBlocks {
        self.dphi.get_or_init(|| dphi_components(self.data))
    }

    fn kahler(&self) -> &KahlerResiduals {
        self.kahler.get_or_init(|| kahler_residuals(self.data))
    }

    fn nijenhuis(&self) -> &NijenhuisBlocks {
        self.nijenhuis
            .get_or_init(|| nijenhuis(self.data, self.brackets()))
    }

    /// Magnitude of the first derivatives of `N` entering brackets and torsion.
    fn n_scale(&self) -> f64 {
        let nc = &self.data.nonlinear;
        max_abs(nc.dn_dy.iter().chain(&nc.delta_n).chain(&nc.dn_dx))
    }
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn vector_max(v: &AdaptedVector) -> f64 {
    max_abs(v.components())
}

struct PointOutcome {
    point: ChartPoint,
    results: Result<Vec<(CheckId, Discrepancy)>, String>,
}

fn evaluate_point(s: &Scenario, checks: &[CheckId], index: usize) -> PointOutcome {
    let m = s.metric.dim();
    let (point, mut rng) = match s.samples.point(m, index) {
        Ok(v) => v,
        Err(e) => {
            return PointOutcome {
                point: ChartPoint {
                    x: vec![],
                    y: vec![],
                },
                results: Err(e.to_string()),
            }
        }
    };
    let data = match cartan_coefficients(&s.metric, &point, &s.connection, &s.torsion) {
        Ok(d) => d,
        Err(e) => {
            return PointOutcome {
                point,
                results: Err(e.to_string()),
            }
        }
    };
    let probes: Vec<[AdaptedVector; 2]> = (0..PROBES)
        .map(|_| [random_vector(m, &mut rng), random_vector(m, &mut rng)])
        .collect();
    let fields: Vec<[AdaptedField; 2]> = (0..PROBES)
        .map(|_| [random_field(m, &mut rng), random_field(m, &mut rng)])
        .collect();
    let cache = PointCache::new(&data);
    let tol = s.tolerance;
    let mut out = Vec::with_capacity(checks.len());
    for &c in checks {
        match check_at(c, s, &point, &cache, &probes, &fields, &tol) {
            Ok(d) => out.push((c, d)),
            Err(e) => {
                return PointOutcome {
                    point,
                    results: Err(format!("{}: {e}", c.name())),
                }
            }
        }
    }
    PointOutcome {
        point,
        results: Ok(out),
    }
}

fn check_at(
    c: CheckId,
    s: &Scenario,
    p: &ChartPoint,
    cache: &PointCache,
    probes: &[[AdaptedVector; 2]],
    fields: &[[AdaptedField; 2]],
    tol: &Tolerance,
) -> Result<Discrepancy, ConnectionError> {
    let d = cache.data;
    let spec = &s.metric;
    let m = d.dim();
    Ok(match c {
        CheckId::Homogeneity => {
            let mut items = Vec::new();
            for k in SCALINGS {
                items.push(check_homogeneity(spec, p, k)?.scaling);
            }
            worst_of(items, tol)
        }
        CheckId::Euler => check_homogeneity(spec, p, 2.0)?.euler,
        CheckId::Signature => {
            let sig = check_signature(spec, p)?;
            let neg = spec.declared_negative();
            let miss = sig.negative.abs_diff(neg) + sig.positive.abs_diff(m - neg);
            Discrepancy::residual(miss as f64, 0.0)
        }
        CheckId::GInverse => {
            let prod = d.g.dot(&d.g_inv);
            let eye = Array2::<f64>::eye(m);
            let scale = d.g.mapv(f64::abs).dot(&d.g_inv.mapv(f64::abs));
            Discrepancy {
                diff: max_abs((&prod - &eye).iter()),
                scale: max_abs(scale.iter()),
            }
        }
        CheckId::SprayHomogeneity => {
            let pairs = spray_homogeneity(spec, &s.connection, p, &SCALINGS)?;
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            Discrepancy::arrays(&a, &b)
        }
        CheckId::HorizontalEnergy => {
            let vars = p.seed(1).map_err(crate::metric::GeometryError::from)?;
            let (jx, jy) = vars.split_at(m);
            let e = spec
                .energy(jx, jy)
                .map_err(crate::metric::GeometryError::from)?;
            let dx = delta_x(&e, d.n());
            let scale = (0..m)
                .map(|i| {
                    e.d(i).abs()
                        + (0..m)
                            .map(|j| (d.n()[[j, i]] * e.d(m + j)).abs())
                            .sum::<f64>()
                })
                .fold(0.0, f64::max);
            Discrepancy::vanishing(&dx, scale)
        }
        CheckId::TwoPathEquality => {
            let (c_k, f_k) = KoszulOracle::new(d).reconstruct();
            Discrepancy::arrays(d.c.iter().chain(&d.f), c_k.iter().chain(&f_k))
        }
        CheckId::MetricCompat => {
            let (v, h) = metric_compat_residuals(d);
            worst_of(
                [
                    Discrepancy::arrays(&v.lhs, &v.rhs),
                    Discrepancy::arrays(&h.lhs, &h.rhs),
                ],
                tol,
            )
        }
        CheckId::DjParallel => worst_of(
            probes.iter().zip(fields).map(|([x, _], [y, _])| {
                let r = d_j(d, x, y);
                let a = apply_d(d, x, &y.apply_j());
                let b = apply_d(d, x, y).apply_j();
                Discrepancy::residual(vector_max(&r), vector_max(&a).max(vector_max(&b)))
            }),
            tol,
        ),
        CheckId::DMetric => worst_of(
            probes.iter().zip(fields).map(|([x, _], [y, z])| {
                let [a, b, c] = sasaki_parallel_terms(d, x, y, z);
                Discrepancy::residual(a - b - c, a.abs().max(b.abs()).max(c.abs()))
            }),
            tol,
        ),
        CheckId::CartanSymmetry => Discrepancy::arrays(&d.c, &d.cartan_tensor()),
        CheckId::TorsionVvEqS => Discrepancy::arrays(&cache.torsion().vv, &d.s),
        CheckId::TorsionHhEqT => Discrepancy::arrays(&cache.torsion().hh_h, &d.t),
        CheckId::TorsionDisplays => {
            let (a, b) = (cache.torsion(), cache.displays());
            worst_of(
                a.named()
                    .iter()
                    .zip(b.named())
                    .map(|((_, x), (_, y))| Discrepancy::arrays(x.iter(), y.iter())),
                tol,
            )
        }
        CheckId::TorsionFree => {
            let t = cache.torsion();
            let scale = cache
                .n_scale()
                .max(max_abs(d.c.iter().chain(&d.f).chain(&d.s).chain(&d.t)));
            Discrepancy::vanishing(t.named().iter().flat_map(|(_, a)| a.iter()), scale)
        }
        CheckId::Hermitian => {
            let big_g = SasakiMetric::new(d);
            worst_of(
                probes.iter().map(|[x, y]| {
                    Discrepancy::between(big_g.inner(&x.apply_j(), &y.apply_j()), big_g.inner(x, y))
                }),
                tol,
            )
        }
        CheckId::SasakiOrthogonal => {
            let big_g = SasakiMetric::new(d);
            let n = d.n();
            let mut vals = Vec::with_capacity(m * m);
            for i in 0..m {
                let hx: Vec<f64> = (0..m).map(|a| if a == i { 1.0 } else { 0.0 }).collect();
                let hy: Vec<f64> = (0..m).map(|a| -n[[a, i]]).collect();
                for j in 0..m {
                    let vy: Vec<f64> = (0..m).map(|a| if a == j { 1.0 } else { 0.0 }).collect();
                    vals.push(big_g.inner_coords((&hx, &hy), (&vec![0.0; m], &vy)));
                }
            }
            let scale = max_abs(&d.g) * max_abs(n).max(1.0);
            Discrepancy::vanishing(&vals, scale)
        }
        CheckId::PhiSkew => {
            let big_g = SasakiMetric::new(d);
            worst_of(
                probes
                    .iter()
                    .map(|[x, y]| Discrepancy::between(big_g.phi(x, y), -big_g.phi(y, x))),
                tol,
            )
        }
        CheckId::JSquared => worst_of(
            probes.iter().map(|[x, _]| {
                let jj = x.apply_j().apply_j() + x.clone();
                Discrepancy::residual(vector_max(&jj), vector_max(x))
            }),
            tol,
        ),
        CheckId::DphiTwoPath => dphi_two_path(cache.dphi(), cache.kahler(), tol),
        CheckId::KahlerEq10 => {
            let b = &cache.kahler().eq10;
            Discrepancy::arrays(&b.lhs, &b.rhs)
        }
        CheckId::KahlerEq11 => {
            let b = &cache.kahler().eq11;
            Discrepancy::arrays(&b.lhs, &b.rhs)
        }
        CheckId::Nijenhuis => Discrepancy::vanishing(&cache.nijenhuis().frame, cache.n_scale()),
        CheckId::Corollary1 => {
            let nb = cache.nijenhuis();
            Discrepancy::vanishing(
                nb.delta_symmetry.iter().chain(&nb.fiber_symmetry),
                cache.n_scale(),
            )
        }
        CheckId::FrameBrackets => {
            let a = cache.brackets();
            let b = FrameBrackets::from_coordinates(&d.nonlinear);
            Discrepancy::arrays(a.hh.iter().chain(&a.vh), b.hh.iter().chain(&b.vh))
        }
    })
}

/// Runs every selected check at every sample point.
pub fn run_checks(s: &Scenario) -> CheckReport {
    let tol = s.tolerance;
    let active: Vec<CheckId> = s
        .checks
        .iter()
        .copied()
        .filter(|c| c.skip_reason(s).is_none())
        .collect();
    let outcomes: Vec<PointOutcome> = (0..s.samples.count)
        .into_par_iter()
        .map(|i| evaluate_point(s, &active, i))
        .collect();

    struct Acc {
        points: usize,
        max_residual: f64,
        worst: Option<(usize, f64)>,
    }
    let mut acc: Vec<Acc> = active
        .iter()
        .map(|_| Acc {
            points: 0,
            max_residual: 0.0,
            worst: None,
        })
        .collect();
    let mut point_errors = Vec::new();
    for (index, o) in outcomes.iter().enumerate() {
        match &o.results {
            Ok(results) => {
                for (a, (_, d)) in acc.iter_mut().zip(results) {
                    a.points += 1;
                    a.max_residual = if d.diff.is_nan() {
                        f64::NAN
                    } else {
                        a.max_residual.max(d.diff)
                    };
                    let r = d.ratio(&tol);
                    if a.worst.is_none_or(|(_, w)| r > w) {
                        a.worst = Some((index, r));
                    }
                }
            }
            Err(message) => point_errors.push(PointError {
                index,
                x: o.point.x.clone(),
                y: o.point.y.clone(),
                message: message.clone(),
            }),
        }
    }

    let mut results = Vec::with_capacity(s.checks.len());
    let mut active_acc = active.iter().zip(acc);
    for &c in &s.checks {
        if let Some(reason) = c.skip_reason(s) {
            results.push(CheckResult {
                name: c.name().into(),
                status: Status::Skipped,
                points_evaluated: 0,
                max_residual: 0.0,
                max_ratio: 0.0,
                worst_point: None,
                skip_reason: Some(reason.into()),
            });
            continue;
        }
        let (_, a) = active_acc.next().expect("active checks are in order");
        let max_ratio = a.worst.map_or(0.0, |(_, r)| r);
        let pass = a.points > 0 && max_ratio <= 1.0;
        results.push(CheckResult {
            name: c.name().into(),
            status: if pass { Status::Pass } else { Status::Fail },
            points_evaluated: a.points,
            max_residual: a.max_residual,
            max_ratio,
            worst_point: a.worst.map(|(i, _)| SamplePoint {
                index: i,
                x: outcomes[i].point.x.clone(),
                y: outcomes[i].point.y.clone(),
            }),
            skip_reason: None,
        });
    }
    let all_pass = results.iter().all(|r| r.status != Status::Fail);
    CheckReport {
        schema_version: SCHEMA_VERSION,
        environment: Environment {
            dimension: s.metric.dim(),
            metric_family: s.metric.family().kind().into(),
            metric_label: s.metric.label().into(),
            connection: s.connection.kind().into(),
            torsion_s: skew_kind(&s.torsion.s).into(),
            torsion_t: skew_kind(&s.torsion.t).into(),
            seed: s.samples.seed,
            samples: s.samples.count,
            x_box: s.samples.x_box,
            fiber_radius: s.samples.fiber_radius,
            crate_version: env!("CARGO_PKG_VERSION").into(),
        },
        tolerances: tol,
        checks: results,
        point_errors,
        warnings: s.warnings.clone(),
        all_pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Serialized report; JSON output ends with a newline.
pub fn emit_report(r: &CheckReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        Format::Text => text_report(r).into_bytes(),
    }
}

fn text_report(r: &CheckReport) -> String {
    let e = &r.environment;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "metric {} ({}), dim {}, connection {}, S {}, T {}",
        e.metric_label, e.metric_family, e.dimension, e.connection, e.torsion_s, e.torsion_t
    );
    let _ = writeln!(
        out,
        "{} samples, seed {}, atol {:e}, rtol {:e}",
        e.samples, e.seed, r.tolerances.atol, r.tolerances.rtol
    );
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let _ = writeln!(
        out,
        "{:<20} {:<7} {:>6} {:>12} {:>12} {:>6}",
        "check", "status", "points", "max resid", "max ratio", "worst"
    );
    for c in &r.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let worst = c
            .worst_point
            .as_ref()
            .map_or("-".to_string(), |p| p.index.to_string());
        let _ = writeln!(
            out,
            "{:<20} {:<7} {:>6} {:>12.3e} {:>12.3e} {:>6}",
            c.name, status, c.points_evaluated, c.max_residual, c.max_ratio, worst
        );
    }
    for p in &r.point_errors {
        let _ = writeln!(out, "point {} error: {}", p.index, p.message);
    }
    let _ = writeln!(out, "overall: {}", if r.all_pass { "PASS" } else { "FAIL" });
    out
}
