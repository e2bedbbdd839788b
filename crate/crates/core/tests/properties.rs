mod common;

use cartan_lab::connection::{cartan_coefficients, ConnectionSource, TorsionInputs};
use cartan_lab::expr::parse;
use cartan_lab::metric::{fundamental_tensor, presets};
use cartan_lab::{parse_scenario, ChartPoint, Jet, Layout, SamplePlan};
use proptest::prelude::*;

fn point(x: Vec<f64>, y: Vec<f64>) -> ChartPoint {
    ChartPoint::new(x, y).unwrap()
}

fn rel_close(a: f64, b: f64, rtol: f64, scale: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(scale)
}

/// Random jets over 3 variables of order 3.
fn jet3() -> impl Strategy<Value = Jet<f64>> {
    let layout = Layout::shared(3, 3);
    prop::collection::vec(-2.0..2.0f64, layout.len()).prop_map(move |c| Jet::from_parts(&layout, c))
}

/// Source text of a random expression in `x1, x2, y1, y2`.
fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x1", "x2", "y1", "y2"]).prop_map(str::to_string),
        (-5.0..5.0f64).prop_map(|c| format!("{c:?}")),
        (0u32..4).prop_map(|n| n.to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/"]),
                inner.clone()
            )
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (
                prop::sample::select(vec!["sin", "cos", "exp", "sqrt", "log"]),
                inner
            )
                .prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_product_obeys_leibniz(f in jet3(), g in jet3()) {
        let h = f.clone() * g.clone();
        let p = |j: &Jet<f64>, v: &[usize]| j.partial(v).unwrap();
        let (f0, g0) = (*f.value(), *g.value());
        let scale = f.coeffs().iter().chain(g.coeffs()).fold(1.0f64, |a, v| a.max(v.abs()));
        let tol = 1e-13 * scale * scale * 16.0;
        for a in 0..3 {
            let want = p(&f, &[a]) * g0 + f0 * p(&g, &[a]);
            prop_assert!((p(&h, &[a]) - want).abs() <= tol);
            for b in a..3 {
                let want = p(&f, &[a, b]) * g0 + p(&f, &[a]) * p(&g, &[b])
                    + p(&f, &[b]) * p(&g, &[a]) + f0 * p(&g, &[a, b]);
                prop_assert!((p(&h, &[a, b]) - want).abs() <= tol);
                for c in b..3 {
                    let mut want = f0 * p(&g, &[a, b, c]) + p(&f, &[a, b, c]) * g0;
                    for (one, two) in [([a], [b, c]), ([b], [a, c]), ([c], [a, b])] {
                        want += p(&f, &one) * p(&g, &two) + p(&f, &two) * p(&g, &one);
                    }
                    prop_assert!((p(&h, &[a, b, c]) - want).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn printed_expressions_reparse_to_the_same_function(src in expr_source(), seed in any::<u64>()) {
        let e = parse(&src, 2).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, 2).unwrap();
        prop_assert_eq!(again.to_string(), printed.clone());
        let plan = SamplePlan { count: 100, seed, ..SamplePlan::default() };
        for p in plan.points(2).unwrap() {
            match (e.eval(&p.x, &p.y), again.eval(&p.x, &p.y)) {
                (Ok(a), Ok(b)) if a.is_finite() => {
                    prop_assert!(rel_close(a, b, 1e-12, 1e-300), "{} vs {} for {}", a, b, printed)
                }
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{:?} vs {:?} for {}", a, b, printed),
            }
        }
    }

    #[test]
    fn jet_value_equals_plain_arithmetic(
        which in 0usize..6,
        x in prop::collection::vec(-1.0..1.0f64, 3),
        y in prop::collection::vec(-3.0..3.0f64, 3),
    ) {
        prop_assume!(y.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let spec = presets::all_builtins(3).swap_remove(which);
        let p = point(x, y);
        let plain = spec.energy_at(&p).unwrap();
        for order in 0..=3 {
            let s = p.seed(order).unwrap();
            let jet = spec.energy(&s[..3], &s[3..]).unwrap();
            prop_assert_eq!(jet.value().to_bits(), plain.to_bits());
        }
    }

    #[test]
    fn fundamental_tensor_is_zero_homogeneous(
        which in 0usize..6,
        x in prop::collection::vec(-1.0..1.0f64, 3),
        y in prop::collection::vec(-3.0..3.0f64, 3),
        k in 0.1..10.0f64,
    ) {
        prop_assume!(y.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let spec = presets::all_builtins(3).swap_remove(which);
        let p = point(x, y);
        let a = fundamental_tensor(&spec, &p).unwrap().g;
        let b = fundamental_tensor(&spec, &p.scale_fiber(k)).unwrap().g;
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (u, v) in a.iter().zip(&b) {
            prop_assert!(rel_close(*u, *v, 1e-10, scale), "{} vs {}", u, v);
        }
    }

    #[test]
    fn canonical_n_is_one_homogeneous(
        which in 0usize..6,
        x in prop::collection::vec(-1.0..1.0f64, 3),
        y in prop::collection::vec(-3.0..3.0f64, 3),
        k in 0.1..10.0f64,
    ) {
        prop_assume!(y.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let spec = presets::all_builtins(3).swap_remove(which);
        let p = point(x, y);
        let coeffs = |q: &ChartPoint| {
            cartan_coefficients(&spec, q, &ConnectionSource::Canonical, &TorsionInputs::default()).unwrap()
        };
        let (a, b) = (coeffs(&p), coeffs(&p.scale_fiber(k)));
        let scale = a.n().iter().fold(0.0f64, |m, v| m.max((k * v).abs()));
        for (u, v) in a.n().iter().zip(b.n()) {
            prop_assert!(rel_close(k * u, *v, 1e-9, scale), "{} vs {}", k * u, v);
        }
    }

    #[test]
    fn random_skew_inputs_are_exactly_skew(
        s_seed in any::<u64>(),
        t_seed in any::<u64>(),
        scale in 0.01..5.0f64,
        dim in 2usize..5,
    ) {
        let text = format!(
            "dim = {dim}\nmetric = \"randers\"\n\
             [torsion.s]\nkind = \"random\"\nscale = {scale:?}\nseed = {s_seed}\n\
             [torsion.t]\nkind = \"random\"\nscale = {scale:?}\nseed = {t_seed}\n"
        );
        let scn = parse_scenario(&text).unwrap();
        let p = scn.samples.point(dim, 0).unwrap().0;
        let d = cartan_coefficients(&scn.metric, &p, &scn.connection, &scn.torsion).unwrap();
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    prop_assert_eq!(d.s[[k, i, j]], -d.s[[k, j, i]]);
                    prop_assert_eq!(d.t[[k, i, j]], -d.t[[k, j, i]]);
                }
            }
        }
        prop_assert!(d.s.iter().any(|v| *v != 0.0));
    }
}
