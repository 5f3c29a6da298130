use std::sync::OnceLock;

use dsfrob_core::exact::quadratic::Sign;
use dsfrob_core::exact::{q, qi, Poly, RadicalElement, Ring};
use dsfrob_core::frobenius::potential::{third_derivatives, wdvv_defects};
use dsfrob_core::frobenius::{self, curvature_control, FrobeniusReport, Level, LambdaSource, PipelineOptions};
use dsfrob_core::registry::Registry;

fn report(label: &str, opts: &PipelineOptions) -> FrobeniusReport {
    let rec = Registry::builtin().find(label).unwrap().clone();
    frobenius::run(&rec, opts).unwrap()
}

fn d4() -> &'static FrobeniusReport {
    static R: OnceLock<FrobeniusReport> = OnceLock::new();
    R.get_or_init(|| report("D4(a1)", &PipelineOptions::default()))
}

/// a + bΔ in the ring of the D4(a1) potential.
fn rad(a: &str, b: &str) -> RadicalElement {
    let f = d4().potential().unwrap();
    let ctx = f.ctx();
    let p = |s: &str| Poly::parse(ctx.vars(), s).unwrap();
    RadicalElement::from_parts(ctx, p(a), p(b))
}

#[test]
fn d4a1_all_checks_pass() {
    let r = d4();
    assert!(r.passed(), "{}", r.to_text());
    assert_eq!(r.source, LambdaSource::Reference);
}

#[test]
fn d4a1_radical_and_constraints() {
    let r = d4();
    let f = r.potential().unwrap();
    let vars = f.ctx().vars().clone();
    assert_eq!(f.ctx().square(), &Poly::parse(&vars, "N1^2 + 3*N2^2 + 48*N3").unwrap());
    assert_eq!(
        r.constraints,
        vec![
            ("v2".to_string(), "-2*N1 + N2 + (1)*sqrt(N1^2 + 3*N2^2 + 48*N3)".to_string()),
            ("w3".to_string(), "0".to_string()),
        ]
    );
}

#[test]
fn d4a1_eta_and_charge() {
    let s = d4().structure.as_ref().unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let e = if i + j == 3 { qi(4) } else { qi(0) };
            assert_eq!(s.eta[i][j], e, "η[{i}][{j}]");
        }
    }
    assert_eq!(s.charge, q(1, 2));
    assert_eq!(s.dvals, vec![q(1, 2), q(1, 2), qi(1), qi(1)]);
}

#[test]
fn d4a1_gamma_table() {
    let g = &d4().structure.as_ref().unwrap().gamma;
    let table = [
        (0, 0, "N1", "0"),
        (0, 1, "N2", "0"),
        (0, 2, "N3", "0"),
        (0, 3, "N4", "0"),
        (2, 0, "3*N3", "0"),
        (3, 0, "3*N4", "0"),
        (1, 1, "N1/3", "2/3"),
        (1, 2, "N4 + N1*N2/6", "N2/12"),
        (1, 3, "(N3 - N1^2/12 + N2^2/4)/3", "N1/36"),
        (2, 2, "(N1*N3 + 3/32*N1*N2^2 + 7/288*N1^3)/2", "(N1^2 + 12*N2^2 + 48*N3)/288"),
        (3, 2, "(N2*N3 + 7/96*N2*N1^2 + N2^3/32)/2", "N1*N2/96"),
        (3, 3, "(-N1*N3 + 19/288*N1^3 + 7/32*N1*N2^2)/6", "(4*N1^2 + 3*N2^2 + 48*N3)/864"),
    ];
    for (i, j, a, b) in table {
        assert_eq!(g[i][j], rad(a, b), "γ{}{}", i + 1, j + 1);
    }
    assert_eq!(g[2][1], g[1][2].scale(&qi(3)));
    assert_eq!(g[3][1], g[1][3].scale(&qi(3)));
    assert_eq!(g[2][3], g[3][2]);
}

#[test]
fn d4a1_potential_matches_closed_form() {
    let f = d4().potential().unwrap();
    // F/4 with Δ⁵ = Δ⁴·Δ
    let quarter = rad(
        "N2*N3*N4 + N1*N4^2/2 + N1*N3^2/6 - N3*N1^3/108 + N1*N2^2*N3/12 \
         + 19/103680*N1^5 + 7/3456*N1^3*N2^2 + N1*N2^4/768",
        "(N1^2 + 3*N2^2 + 48*N3)^2/12960",
    );
    assert_eq!(f.scale(&qi(4)), quarter);
}

#[test]
fn d4a1_perturbed_potential_breaks_wdvv() {
    let s = d4().structure.as_ref().unwrap();
    let f = d4().potential().unwrap();
    let clean = third_derivatives(f, 4).unwrap();
    assert!(wdvv_defects(&clean, &s.eta).is_empty());
    let bumped = f.add(&rad("N2^2*N3*N1/5", "0"));
    let f3 = third_derivatives(&bumped, 4).unwrap();
    assert!(!wdvv_defects(&f3, &s.eta).is_empty());
}

#[test]
fn d4a1_minus_branch_is_frobenius() {
    let opts = PipelineOptions {
        branch: Sign::Minus,
        level: Level::Fast,
        ..PipelineOptions::default()
    };
    let r = report("D4(a1)", &opts);
    assert!(r.passed(), "{}", r.to_text());
    assert_eq!(r.branch, Sign::Minus);
    assert_eq!(r.structure.as_ref().unwrap().charge, q(1, 2));
}

#[test]
fn coxeter_charge_is_one_minus_two_over_h() {
    for n in 1..=3i64 {
        let r = report(&format!("A{n}"), &PipelineOptions::default());
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.structure.as_ref().unwrap().charge, qi(1) - q(2, n + 1), "A{n}");
        assert!(r.check("wdvv").unwrap().passed);
        assert!(r.potential().unwrap().as_poly().is_some(), "A{n}");
    }
}

#[test]
fn a2_degrees() {
    let r = report("A2", &PipelineOptions::default());
    let s = r.structure.as_ref().unwrap();
    // invariant degrees 2, 3 over the Coxeter number 3
    assert_eq!(s.dvals, vec![q(2, 3), qi(1)]);
}

#[test]
fn fast_level_skips_expensive_checks() {
    let opts = PipelineOptions {
        level: Level::Fast,
        ..PipelineOptions::default()
    };
    let r = report("A2", &opts);
    assert!(r.passed());
    for name in ["jacobi-pencil", "curvature-control"] {
        assert_eq!(r.check(name).unwrap().detail, "skipped at level fast");
    }
}

#[test]
fn sphere_registers_as_curved() {
    assert!(curvature_control().unwrap());
}

#[test]
fn json_report_round_trips() {
    let v = d4().to_json();
    let text = serde_json::to_string(&v).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back, v);
    assert_eq!(back["passed"], true);
    assert_eq!(back["class"], "D4(a1)");
}
