use std::sync::OnceLock;

use dsfrob_core::exact::{q, qi, Poly, RadicalElement, Ring};
use dsfrob_core::registry::Registry;
use dsfrob_core::rgroup::{coxeter_type, element_order, group_order, run, GeneratorKind, RGroupError, RGroupOptions, RGroupReport};
use proptest::prelude::*;

fn d4() -> &'static RGroupReport {
    static R: OnceLock<RGroupReport> = OnceLock::new();
    R.get_or_init(|| {
        let rec = Registry::builtin().find("D4(a1)").unwrap().clone();
        run(&rec, &RGroupOptions::default()).unwrap()
    })
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn d4a1_checks_pass() {
    let r = d4();
    assert!(r.passed(), "{}", r.to_text());
    for name in [
        "orbit-commute",
        "gauge",
        "density-invariance",
        "slice-invariance",
        "mu-linear",
        "reflection",
        "sheet",
        "mu-metric",
        "isomorphism",
    ] {
        assert!(r.check(name).is_some_and(|c| c.passed), "{name}");
    }
}

#[test]
fn d4a1_order_is_weyl_d4() {
    // |W(D4)| = 2^3 * 4!
    assert_eq!(d4().order, Some(8 * factorial(4)));
}

#[test]
fn d4a1_type_is_d4() {
    assert_eq!(d4().weyl_type, Some(("D4".to_string(), 192)));
}

fn diagram(n: usize, edges: &[(usize, usize, usize)]) -> Vec<Vec<usize>> {
    let mut m = vec![vec![2; n]; n];
    for &(i, j, o) in edges {
        m[i][j] = o;
        m[j][i] = o;
    }
    m
}

#[test]
fn coxeter_diagrams_are_named() {
    let e6 = diagram(6, &[(0, 2, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (1, 3, 3)]);
    assert_eq!(coxeter_type(&e6), Some(("E6".to_string(), 51_840)));
    let e8 = diagram(8, &[(0, 2, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (5, 6, 3), (6, 7, 3), (1, 3, 3)]);
    assert_eq!(coxeter_type(&e8), Some(("E8".to_string(), 696_729_600)));
    let f4 = diagram(4, &[(0, 1, 3), (1, 2, 4), (2, 3, 3)]);
    assert_eq!(coxeter_type(&f4), Some(("F4".to_string(), 1152)));
    let b3 = diagram(3, &[(0, 1, 3), (1, 2, 4)]);
    assert_eq!(coxeter_type(&b3), Some(("B3".to_string(), 48)));
    let d5 = diagram(5, &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (2, 4, 3)]);
    assert_eq!(coxeter_type(&d5), Some(("D5".to_string(), 1920)));
    let split = diagram(3, &[(0, 1, 3)]);
    assert_eq!(coxeter_type(&split), Some(("A1×A2".to_string(), 12)));
    let cycle = diagram(3, &[(0, 1, 3), (1, 2, 3), (0, 2, 3)]);
    assert_eq!(coxeter_type(&cycle), None);
}

#[test]
fn d4a1_relations() {
    let r = d4();
    for g in ["R1", "R2", "R3", "R4"] {
        assert_eq!(r.relation(g, g), Some(2), "{g}");
    }
    for (a, b) in [("R1", "R3"), ("R1", "R4"), ("R3", "R4")] {
        assert_eq!(r.relation(a, b), Some(2), "{a}{b}");
    }
    for b in ["R1", "R3", "R4"] {
        assert_eq!(r.relation("R2", b), Some(3), "R2{b}");
    }
}

#[test]
fn d4a1_orbits() {
    let r = d4();
    let orbit = |l: &str| match &r.generator(l).unwrap().kind {
        GeneratorKind::Orbit { orbit } => orbit.clone(),
        GeneratorKind::Weyl => Vec::new(),
    };
    assert_eq!(orbit("R1"), vec!["Y1", "Y12"]);
    assert_eq!(orbit("R3"), vec!["Y3", "Y23"]);
    assert_eq!(orbit("R4"), vec!["Y4", "Y24"]);
    assert_eq!(r.generator("R2").unwrap().kind, GeneratorKind::Weyl);
}

#[test]
fn d4a1_r1_plus_formula() {
    let r = d4();
    let ctx = &r.chart.ctx;
    let v = |i| RadicalElement::var(ctx, i);
    // ν1 -> (−ν1 + ν3 + ν4 + √J)/2
    let expect = v(0)
        .neg()
        .add(&v(2))
        .add(&v(3))
        .add(&RadicalElement::delta(ctx))
        .scale(&q(1, 2));
    let g = r.generator("R1").unwrap();
    assert_eq!(g.nu[0], expect);
    // J = ω² + 4ν5ν6 with ω = ν1 − 2ν2 + ν3 + ν4
    let vars = ctx.vars();
    let p = |i| Poly::var(vars, i);
    let w = &(&(&p(0) - &p(1).scale(&qi(2))) + &p(2)) + &p(3);
    let j = &(&w * &w) + &(&p(4) * &p(5)).scale(&qi(4));
    assert_eq!(r.chart.j.as_ref(), Some(&j));
}

#[test]
fn d4a1_mu_actions() {
    let r = d4();
    let m = |l: &str| r.generator(l).unwrap().matrix.clone();
    assert_eq!(m("R1"), vec![vec![-1, 1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]);
    assert_eq!(m("R2"), vec![vec![1, 0, 0, 0], vec![1, -1, 1, 1], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]);
    assert_eq!(m("R3"), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 1, -1, 0], vec![0, 0, 0, 1]]);
    assert_eq!(m("R4"), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 1, 0, -1]]);
}

#[test]
fn d4a1_mu_metric_is_inverse_cartan() {
    let r = d4();
    let h = q(1, 2);
    let expect = vec![
        vec![qi(1), qi(1), h.clone(), h.clone()],
        vec![qi(1), qi(2), qi(1), qi(1)],
        vec![h.clone(), qi(1), qi(1), h.clone()],
        vec![h.clone(), qi(1), h.clone(), qi(1)],
    ];
    assert_eq!(r.mu_metric.as_ref(), Some(&expect));
}

#[test]
fn d4a1_json_has_order() {
    let v = d4().to_json();
    assert_eq!(v["order"], 192);
    assert_eq!(v["passed"], true);
    assert_eq!(v["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn coxeter_a_series_gives_symmetric_groups() {
    for n in 1..=3 {
        let rec = Registry::builtin().find(&format!("A{n}")).unwrap().clone();
        let r = run(&rec, &RGroupOptions::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.order, Some(factorial(n + 1)), "A{n}");
        assert_eq!(r.generators.len(), n);
    }
}

#[test]
fn non_simply_laced_needs_experimental() {
    let rec = Registry::builtin().find("F4(a1)").unwrap().clone();
    assert!(matches!(
        run(&rec, &RGroupOptions::default()),
        Err(RGroupError::Experimental(_))
    ));
}

#[test]
fn order_bound_is_reported() {
    let rec = Registry::builtin().find("A3").unwrap().clone();
    let opts = RGroupOptions {
        max_elements: 10,
        ..RGroupOptions::default()
    };
    let r = run(&rec, &opts).unwrap();
    assert_eq!(r.order, None);
    assert!(!r.check("group-order").unwrap().passed);
}

fn transposition(n: usize, i: usize) -> Vec<i64> {
    let mut m = vec![0; n * n];
    for k in 0..n {
        let t = if k == i { i + 1 } else if k == i + 1 { i } else { k };
        m[k * n + t] = 1;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn path_diagram_is_type_a(n in 1usize..9) {
        let edges: Vec<(usize, usize, usize)> = (0..n - 1).map(|i| (i, i + 1, 3)).collect();
        let expect = (1..=n as u128 + 1).product::<u128>();
        prop_assert_eq!(coxeter_type(&diagram(n, &edges)), Some((format!("A{n}"), expect)));
    }

    #[test]
    fn adjacent_transpositions_generate_sn(n in 2usize..6) {
        let gens: Vec<Vec<i64>> = (0..n - 1).map(|i| transposition(n, i)).collect();
        prop_assert_eq!(group_order(&gens, n, 1000), Some(factorial(n)));
    }

    #[test]
    fn product_of_transpositions_has_coxeter_order(n in 3usize..7, i in 0usize..5, j in 0usize..5) {
        prop_assume!(i < n - 1 && j < n - 1);
        let a = transposition(n, i);
        let b = transposition(n, j);
        let mut p = vec![0; n * n];
        for r in 0..n {
            for k in 0..n {
                for c in 0..n {
                    p[r * n + c] += a[r * n + k] * b[k * n + c];
                }
            }
        }
        let expect = if i == j { 1 } else if i.abs_diff(j) == 1 { 3 } else { 2 };
        prop_assert_eq!(element_order(&p, n, 10), Some(expect));
    }
}
