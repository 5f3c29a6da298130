use std::sync::Arc;

use dsfrob_core::exact::quadratic::{solve_quadratic_system, Sign};
use dsfrob_core::exact::{q, qi, AlgebraError, Monomial, Poly, RadicalCtx, RadicalElement, Ring, VarSet, Vars};
use proptest::prelude::*;

fn vars() -> Vars {
    VarSet::new(&["N1", "N2", "N3"])
}

fn poly(s: &str) -> Poly {
    Poly::parse(&vars(), s).unwrap()
}

/// Δ² = N1² + 3N2² + 48N3
fn ctx() -> Arc<RadicalCtx> {
    RadicalCtx::new(poly("N1^2 + 3*N2^2 + 48*N3"))
}

#[test]
fn delta_squared_reduces() {
    let c = ctx();
    let d = RadicalElement::delta(&c);
    assert_eq!(d.mul(&d), RadicalElement::from_poly(&c, c.square().clone()));
    let p = RadicalElement::from_parts(&c, poly("N1*N2 - 7"), poly("N3/2"));
    assert_eq!(p.mul(&RadicalElement::constant(&c, qi(1))), p);
}

#[test]
fn conjugate_product() {
    let c = ctx();
    let n1 = RadicalElement::var(&c, 0);
    let d = RadicalElement::delta(&c);
    let prod = n1.add(&d).mul(&n1.sub(&d));
    assert_eq!(prod, RadicalElement::from_poly(&c, poly("-3*N2^2 - 48*N3")));
}

#[test]
fn derivative_of_delta() {
    let c = ctx();
    let d = RadicalElement::delta(&c);
    let got = d.diff_named("N3").unwrap();
    // 24/Δ = 24Δ/Δ²
    let expect = d.scale(&qi(24)).div_poly(c.square()).unwrap();
    assert_eq!(got, expect);
    assert_eq!(got.mul(&got), RadicalElement::from_poly(&c, poly("576")).div_poly(c.square()).unwrap());
    let k = RadicalElement::constant(&c, q(3, 7));
    assert!(k.diff_named("N2").unwrap().is_zero());
    assert!(matches!(d.diff_named("x"), Err(AlgebraError::UnknownVariable(_))));
}

#[test]
fn derivative_of_fifth_power() {
    let c = ctx();
    let d = RadicalElement::delta(&c);
    let den = 32 * 81;
    let f = d.pow(5).scale(&q(1, den * 5));
    let got = f.diff(0).unwrap();
    let expect = RadicalElement::var(&c, 0).mul(&d.pow(3)).scale(&q(1, den));
    assert_eq!(got, expect);
    // numeric cross-check against a central difference
    let pt = [1.3, -0.4, 0.7];
    let h = 1e-6;
    let fd = (f.to_f64(&[pt[0] + h, pt[1], pt[2]]) - f.to_f64(&[pt[0] - h, pt[1], pt[2]])) / (2.0 * h);
    assert!((fd - got.to_f64(&pt)).abs() < 1e-6 * fd.abs().max(1.0));
}

#[test]
fn degenerate_radical_cannot_differentiate() {
    // a zero square means Δ = 0, which the checked constructor folds away
    let c = RadicalCtx::new(Poly::zero(&vars()));
    let folded = RadicalElement::from_parts(&c, poly("N1"), poly("1"));
    assert_eq!(folded.diff(0).unwrap(), RadicalElement::constant(&c, qi(1)));
    let raw = RadicalElement::from_raw(&c, poly("N1"), poly("1"), Vec::new());
    assert_eq!(raw.diff(0), Err(AlgebraError::DegenerateRadical));
}

#[test]
fn mismatched_rings_are_errors() {
    let a = poly("N1");
    let b = Poly::parse(&VarSet::new(&["x"]), "x").unwrap();
    assert_eq!(a.checked_add(&b), Err(AlgebraError::VariableMismatch));
    let c1 = ctx();
    let c2 = RadicalCtx::new(poly("N1^2 + 1"));
    let r1 = RadicalElement::delta(&c1);
    let r2 = RadicalElement::delta(&c2);
    assert_eq!(r1.checked_mul(&r2), Err(AlgebraError::RadicalMismatch));
}

#[test]
fn zero_norm_division_is_an_error() {
    // Δ² = N1², so N1 − Δ has norm 0
    let c = RadicalCtx::new(poly("N1^2"));
    let r = RadicalElement::from_parts(&c, poly("N1"), poly("-1"));
    assert!(r.inv().is_err());
}

#[test]
fn rationals_stay_reduced() {
    let x = q(6, -4);
    assert_eq!(*x.numer(), (-3).into());
    assert_eq!(*x.denom(), 2.into());
}

#[test]
fn printing_is_canonical() {
    let c = ctx();
    let r = RadicalElement::from_parts(&c, poly("N2 - 2*N1"), poly("1"));
    assert_eq!(r.to_string(), "-2*N1 + N2 + (1)*sqrt(N1^2 + 3*N2^2 + 48*N3)");
    assert_eq!(poly("N3 + N1^2 + 19/2*N1*N2").to_string(), "N1^2 + 19/2*N1*N2 + N3");
}

/// Substitute a branch into the equations in the radical ring of the solution.
fn residuals(eqs: &[Poly], unknowns: &[&str], ctx: &Arc<RadicalCtx>, values: &[RadicalElement]) -> Vec<RadicalElement> {
    let full = eqs[0].vars();
    let params = ctx.vars();
    let args: Vec<RadicalElement> = full
        .names()
        .iter()
        .map(|n| match unknowns.iter().position(|u| u == n) {
            Some(k) => values[k].clone(),
            None => RadicalElement::var(ctx, params.index(n).unwrap()),
        })
        .collect();
    eqs.iter().map(|e| e.eval_in(&args, &RadicalElement::zero(ctx))).collect()
}

#[test]
fn single_square_root() {
    let v = VarSet::new(&["x", "a"]);
    let e = Poly::parse(&v, "x^2 - a").unwrap();
    let sol = solve_quadratic_system(std::slice::from_ref(&e), &["x"]).unwrap();
    assert_eq!(sol.ctx.square(), &Poly::parse(&sol.params, "a").unwrap());
    for s in [Sign::Plus, Sign::Minus] {
        let b = sol.branch(s).unwrap();
        let d = RadicalElement::delta(&sol.ctx);
        assert_eq!(b.values[0], if s == Sign::Plus { d } else { d.neg() });
    }
}

#[test]
fn slow_variety_shape() {
    // v2, w3 unknown; the Δ of the D4(a1) slow variety
    let v = VarSet::new(&["v2", "w3", "N1", "N2", "N3"]);
    let p = |s: &str| Poly::parse(&v, s).unwrap();
    let eqs = vec![
        p("w3"),
        p("(v2 + 2*N1 - N2)^2 - N1^2 - 3*N2^2 - 48*N3 + w3*N1"),
    ];
    let sol = solve_quadratic_system(&eqs, &["v2", "w3"]).unwrap();
    let plus = sol.branch(Sign::Plus).unwrap();
    assert_eq!(plus.values[0].to_string(), "-2*N1 + N2 + (1)*sqrt(N1^2 + 3*N2^2 + 48*N3)");
    assert!(plus.values[1].is_zero());
    for b in &sol.branches {
        assert!(residuals(&eqs, &["v2", "w3"], &sol.ctx, &b.values).iter().all(|r| r.is_zero()));
    }
}

#[test]
fn cubic_is_not_quadratic() {
    let v = VarSet::new(&["x", "a"]);
    let e = Poly::parse(&v, "x^3 - a").unwrap();
    assert!(matches!(solve_quadratic_system(&[e], &["x"]), Err(AlgebraError::NotQuadratic(_))));
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -5i64..6, 1i64..4), 0..5).prop_map(|ts| {
        Poly::from_terms(
            &vars(),
            ts.into_iter().map(|((a, b, c), n, d)| (Monomial(vec![a, b, c]), q(n, d))),
        )
    })
}

fn arb_rad() -> impl Strategy<Value = RadicalElement> {
    (arb_poly(), arb_poly()).prop_map(|(a, b)| RadicalElement::from_parts(&ctx(), a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(a in arb_rad(), b in arb_rad(), c in arb_rad()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn inverse_is_exact(a in arb_rad()) {
        prop_assume!(!a.norm().is_zero());
        let one = RadicalElement::constant(a.ctx(), qi(1));
        prop_assert_eq!(a.mul(&a.inv().unwrap()), one);
    }

    #[test]
    fn leibniz(a in arb_rad(), b in arb_rad(), i in 0usize..3) {
        let lhs = a.mul(&b).diff(i).unwrap();
        let rhs = a.diff(i).unwrap().mul(&b).add(&a.mul(&b.diff(i).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn polynomial_leibniz(a in arb_poly(), b in arb_poly(), i in 0usize..3) {
        prop_assert_eq!((&a * &b).diff(i), &(&a.diff(i) * &b) + &(&a * &b.diff(i)));
    }

    #[test]
    fn quadratic_branches_solve_the_system(a in -4i64..5, b in 1i64..5, c in -3i64..4) {
        // x linear in y, y² = parameters
        let v = VarSet::new(&["x", "y", "s", "t"]);
        let p = |s: &str| Poly::parse(&v, s).unwrap();
        let eqs = vec![
            p(&format!("x - {a}*y - s")),
            p(&format!("{b}*y^2 + {c}*y*s - t")),
        ];
        let sol = solve_quadratic_system(&eqs, &["x", "y"]).unwrap();
        prop_assert_eq!(sol.branches.len(), 2);
        for br in &sol.branches {
            prop_assert!(residuals(&eqs, &["x", "y"], &sol.ctx, &br.values).iter().all(|r| r.is_zero()));
        }
    }
}
