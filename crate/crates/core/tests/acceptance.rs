//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dsfrob_core::dressing::{LoopAlgebra, RegularElement, DEFAULT_WINDOW};
use dsfrob_core::exact::{q, qi, Monomial, Poly, RadicalCtx, RadicalElement, Ring, VarSet, Vars};
use dsfrob_core::frobenius::potential::{third_derivatives, wdvv_defects};
use dsfrob_core::frobenius::{self, curvature_control, FrobeniusReport, PipelineOptions};
use dsfrob_core::gauge::{CanonicalSlice, GaugeFixer};
use dsfrob_core::grading::{validate_class, GradedDecomposition, Gradation};
use dsfrob_core::lie::{LieAlgebra, LieElement};
use dsfrob_core::reference;
use dsfrob_core::registry::{ConjugacyClassRecord, Registry};
use dsfrob_core::rgroup::{self, RGroupOptions, RGroupReport};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const SEED: [u8; 32] = *b"dsfrob acceptance fixed rng seed";

struct Outcome {
    failures: Vec<String>,
    note: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            failures: Vec::new(),
            note: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

fn record(label: &str) -> ConjugacyClassRecord {
    Registry::builtin().find(label).unwrap().clone()
}

fn d4_frobenius() -> Result<(FrobeniusReport, Duration), String> {
    let t = Instant::now();
    let r = frobenius::run(&record("D4(a1)"), &PipelineOptions::default()).map_err(|e| e.to_string())?;
    Ok((r, t.elapsed()))
}

/// a + bΔ in the ring of a potential.
fn rad(ctx: &std::sync::Arc<RadicalCtx>, a: &str, b: &str) -> RadicalElement {
    let p = |s: &str| Poly::parse(ctx.vars(), s).unwrap();
    RadicalElement::from_parts(ctx, p(a), p(b))
}

fn golden(r: &FrobeniusReport, took: Duration) -> Outcome {
    let mut o = Outcome::new();
    o.note = format!("{:.1}s", took.as_secs_f64());
    o.require(took < Duration::from_secs(120), "slower than 2 min");
    let Some(s) = &r.structure else {
        o.require(false, "no structure");
        return o;
    };
    for i in 0..4 {
        for j in 0..4 {
            let e = if i + j == 3 { qi(4) } else { qi(0) };
            o.require(s.eta[i][j] == e, format!("η[{i}][{j}]"));
        }
    }
    let ctx = s.gamma[0][0].ctx().clone();
    o.require(
        ctx.square() == &Poly::parse(ctx.vars(), "N1^2 + 3*N2^2 + 48*N3").unwrap(),
        "Δ²",
    );
    for (i, j, a, b) in [
        (1, 1, "N1/3", "2/3"),
        (1, 3, "(N3 - N1^2/12 + N2^2/4)/3", "N1/36"),
        (2, 2, "(N1*N3 + 3/32*N1*N2^2 + 7/288*N1^3)/2", "(N1^2 + 12*N2^2 + 48*N3)/288"),
        (3, 3, "(-N1*N3 + 19/288*N1^3 + 7/32*N1*N2^2)/6", "(4*N1^2 + 3*N2^2 + 48*N3)/864"),
    ] {
        o.require(s.gamma[i][j] == rad(&ctx, a, b), format!("γ{}{}", i + 1, j + 1));
    }
    o.require(
        r.constraints
            == vec![
                ("v2".to_string(), "-2*N1 + N2 + (1)*sqrt(N1^2 + 3*N2^2 + 48*N3)".to_string()),
                ("w3".to_string(), "0".to_string()),
            ],
        "constraint branch",
    );
    o
}

fn potential(r: &FrobeniusReport) -> Outcome {
    let mut o = Outcome::new();
    let (Some(s), Some(f)) = (&r.structure, r.potential()) else {
        o.require(false, "no potential");
        return o;
    };
    let ctx = f.ctx().clone();
    let d = RadicalElement::delta(&ctx);
    let poly = rad(
        &ctx,
        "N2*N3*N4 + N1*N4^2/2 + N1*N3^2/6 - N3*N1^3/108 + N1*N2^2*N3/12 \
         + 19/103680*N1^5 + 7/3456*N1^3*N2^2 + N1*N2^4/768",
        "0",
    );
    // 2⁵·3⁴·5 = 12960, 2⁸·3⁴·5 = 103680
    let quarter = poly.add(&d.pow(5).scale(&q(1, 12_960)));
    o.require(f.scale(&qi(4)) == quarter, "F ≠ closed form");
    let f3 = third_derivatives(f, 4);
    o.require(f3.as_ref().is_ok_and(|t| wdvv_defects(t, &s.eta).is_empty()), "WDVV residual");
    o.require(r.check("wdvv").is_some_and(|c| c.passed), "wdvv check");
    o.require(s.charge == q(1, 2), "d ≠ 1/2");
    o.require(r.check("homogeneity").is_some_and(|c| c.passed), "homogeneity");
    o
}

fn relations(r: &Result<RGroupReport, String>) -> Outcome {
    let mut o = Outcome::new();
    let r = match r {
        Ok(r) => r,
        Err(e) => {
            o.require(false, e.clone());
            return o;
        }
    };
    for g in ["R1", "R2", "R3", "R4"] {
        o.require(r.relation(g, g) == Some(2), format!("{g}² ≠ 1"));
    }
    for (a, b) in [("R1", "R3"), ("R1", "R4"), ("R3", "R4")] {
        o.require(r.relation(a, b) == Some(2), format!("({a}{b})² ≠ 1"));
    }
    for b in ["R1", "R3", "R4"] {
        o.require(r.relation("R2", b) == Some(3), format!("(R2{b})³ ≠ 1"));
    }
    o.require(r.order == Some(192), format!("order {:?}", r.order));
    if let Some(n) = r.order {
        o.note = format!("order {n}");
    }
    o
}

fn registry() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let reg = Registry::builtin();
    let reports: Vec<_> = {
        use rayon::prelude::*;
        reg.records().par_iter().map(validate_class).collect()
    };
    for v in &reports {
        for name in ["weights", "trace", "match", "pairing"] {
            o.require(v.check(name).is_some_and(|c| c.passed), format!("{} {name}", v.class));
        }
        o.require(v.passed(), format!("{} validation", v.class));
    }
    let took = t.elapsed();
    o.require(took < Duration::from_secs(300), "slower than 5 min");
    o.require(reg.records().iter().any(|r| r.label.starts_with("E8")), "no E8 classes");
    o.note = format!("{} classes, {:.1}s", reports.len(), took.as_secs_f64());
    o
}

fn coxeter() -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=3i64 {
        let r = match frobenius::run(&record(&format!("A{n}")), &PipelineOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                o.require(false, format!("A{n}: {e}"));
                continue;
            }
        };
        o.require(r.potential().is_some_and(|f| f.as_poly().is_some()), format!("A{n} F not polynomial"));
        o.require(r.check("wdvv").is_some_and(|c| c.passed), format!("A{n} wdvv"));
        o.require(r.check("homogeneity").is_some_and(|c| c.passed), format!("A{n} homogeneity"));
        let d = r.structure.as_ref().map(|s| s.charge.clone());
        o.require(d == Some(qi(1) - q(2, n + 1)), format!("A{n} d"));
    }
    o
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &SEED),
    )
}

fn d4_gauge_setup() -> (LoopAlgebra, RegularElement, Vars, LieElement<Poly>) {
    let rec = record("D4(a1)");
    let g = LieAlgebra::build(rec.algebra, rec.rank).unwrap();
    let dec = GradedDecomposition::new(&g, Gradation::new(&g, &rec.s).unwrap());
    let lp = LoopAlgebra::new(g, dec, DEFAULT_WINDOW);
    let ip = lp.g.parse_element(reference::I_PLUS).unwrap();
    let c = lp.g.parse_element(reference::C_MINUS).unwrap();
    let reg = RegularElement::from_parts(&lp, ip, c).unwrap();
    let vars = VarSet::new(&["n1", "n2", "n3", "n4", "n5", "n6"]);
    let mut qv = LieElement::zero();
    for (i, l) in ["H1", "H2", "H3", "H4", "X2", "Y2"].iter().enumerate() {
        qv.add_term(lp.g.parse_label(l).unwrap(), Poly::var(&vars, i));
    }
    (lp, reg, vars, qv)
}

/// w is unchanged by exp(ad n) for random constant n in negative grades.
fn gauge_invariance() -> Result<(), String> {
    let (lp, reg, vars, qv) = d4_gauge_setup();
    let slice = CanonicalSlice::from_vectors(reference::slice(&lp.g));
    let fixer = GaugeFixer::new(&lp.g, &lp.dec, reg.i_plus.clone(), &slice).map_err(|e| e.to_string())?;
    let base = fixer.fix(&qv, &vars).map_err(|e| e.to_string())?.coords;
    let neg: Vec<usize> = (1..=3).flat_map(|k| lp.dec.basis(-k).to_vec()).collect();
    let ip = reg.i_plus.map(|c| Poly::constant(&vars, c.clone()));
    runner(16)
        .run(&prop::collection::vec(-3i64..4, neg.len()), |cs| {
            let mut n = LieElement::zero();
            for (b, c) in neg.iter().zip(&cs) {
                n.add_term(*b, Poly::constant(&vars, qi(*c)));
            }
            let mut moved = ip.add(&qv);
            let mut term = moved.clone();
            for m in 1..16 {
                term = lp.g.bracket(&n, &term).scale(&q(1, m));
                moved = moved.add(&term);
            }
            let fix = fixer.fix(&moved.sub(&ip), &vars).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(fix.coords, base.clone());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn ring_axioms() -> Result<(), String> {
    let vars = VarSet::new(&["N1", "N2", "N3"]);
    let ctx = RadicalCtx::new(Poly::parse(&vars, "N1^2 + 3*N2^2 + 48*N3").unwrap());
    let poly = {
        let vars = vars.clone();
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -5i64..6, 1i64..4), 0..5).prop_map(move |ts| {
            Poly::from_terms(&vars, ts.into_iter().map(|((a, b, c), n, d)| (Monomial(vec![a, b, c]), q(n, d))))
        })
    };
    let elt = (poly.clone(), poly).prop_map(move |(a, b)| RadicalElement::from_parts(&ctx, a, b));
    runner(32)
        .run(&(elt.clone(), elt.clone(), elt), |(a, b, c)| {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).diff(0).unwrap(), a.diff(0).unwrap().mul(&b).add(&a.mul(&b.diff(0).unwrap())));
            if !a.norm().is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()), RadicalElement::constant(a.ctx(), qi(1)));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn properties(d4: Option<&FrobeniusReport>, rg: &Result<RGroupReport, String>) -> Outcome {
    let mut o = Outcome::new();
    let algebras: BTreeSet<_> = Registry::builtin().records().iter().map(|r| (r.algebra, r.rank)).collect();
    {
        use rayon::prelude::*;
        let bad: Vec<String> = algebras
            .par_iter()
            .filter_map(|&(t, n)| {
                let g = LieAlgebra::build(t, n).ok()?;
                (g.jacobi_violations() > 0).then(|| format!("Jacobi {t}{n}"))
            })
            .collect();
        o.failures.extend(bad);
    }
    if let Err(e) = ring_axioms() {
        o.require(false, format!("ring axioms: {e}"));
    }
    if let Err(e) = gauge_invariance() {
        o.require(false, format!("gauge invariance: {e}"));
    }
    let pipeline_checks = [
        "dressing",
        "casimirs",
        "involution",
        "slow-variety",
        "unit-free-constraints",
        "eta",
        "flatness",
        "torsion",
        "euler-row",
        "metric-degree",
    ];
    let mut runs: Vec<FrobeniusReport> = (1..=3)
        .filter_map(|n| frobenius::run(&record(&format!("A{n}")), &PipelineOptions::default()).ok())
        .collect();
    o.require(runs.len() == 3, "A-series runs");
    runs.extend(d4.cloned());
    for r in &runs {
        for name in pipeline_checks {
            o.require(r.check(name).is_some_and(|c| c.passed), format!("{} {name}", r.class));
        }
    }
    match rg {
        Ok(r) => {
            for name in ["mu-metric", "density-invariance", "slice-invariance", "mu-linear", "sheet", "orbit-commute"] {
                o.require(r.check(name).is_some_and(|c| c.passed), format!("rgroup {name}"));
            }
        }
        Err(e) => o.require(false, e.clone()),
    }
    o.note = format!("{} algebras", algebras.len());
    o
}

fn negative_controls(d4: Option<&FrobeniusReport>) -> Outcome {
    let mut o = Outcome::new();
    let mut bad = record("D4(a1)");
    bad.exponents = vec![1, 3, 3, 5];
    o.require(!validate_class(&bad).passed(), "corrupted row validates");
    match d4.and_then(|r| Some((r.structure.as_ref()?, r.potential()?))) {
        Some((s, f)) => {
            let bumped = f.add(&rad(f.ctx(), "N2^2*N3*N1/5", "0"));
            let defects = third_derivatives(&bumped, 4).map(|t| wdvv_defects(&t, &s.eta));
            o.require(defects.is_ok_and(|d| !d.is_empty()), "perturbed F satisfies WDVV");
        }
        None => o.require(false, "no D4(a1) potential"),
    }
    o.require(curvature_control().unwrap_or(false), "sphere reads flat");
    o
}

fn main() -> ExitCode {
    let d4 = d4_frobenius();
    let rg = rgroup::run(&record("D4(a1)"), &RGroupOptions::default()).map_err(|e| e.to_string());
    let d4_ok = d4.as_ref().ok().map(|(r, _)| r);
    let missing = |e: &String| {
        let mut o = Outcome::new();
        o.require(false, e.clone());
        o
    };
    let results = [
        ("D4(a1) golden structure", d4.as_ref().map_or_else(missing, |(r, t)| golden(r, *t))),
        ("D4(a1) potential and WDVV", d4.as_ref().map_or_else(missing, |(r, _)| potential(r))),
        ("D4(a1) R-group relations", relations(&rg)),
        ("registry regeneration", registry()),
        ("Coxeter A1-A3", coxeter()),
        ("property suites", properties(d4_ok, &rg)),
        ("negative controls", negative_controls(d4_ok)),
    ];
    let mut all = true;
    for (i, (name, o)) in results.iter().enumerate() {
        let pass = o.failures.is_empty();
        all &= pass;
        let mut line = format!("{} {}. {name}", if pass { "PASS" } else { "FAIL" }, i + 1);
        if !o.note.is_empty() {
            line += &format!(" ({})", o.note);
        }
        if !pass {
            line += &format!(": {}", o.failures.join("; "));
        }
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
