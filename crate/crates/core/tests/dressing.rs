use dsfrob_core::dressing::{
    build_regular_element, casimir_densities, certify, commutator_defects, heisenberg_basis,
    kernel_profile, Dresser, LoopAlgebra, LoopElement, RegularElement, DEFAULT_WINDOW,
};
use dsfrob_core::exact::{linear, qi, Poly, VarSet, Q};
use dsfrob_core::gauge::{CanonicalSlice, GaugeFixer};
use dsfrob_core::grading::{GradedDecomposition, Gradation};
use dsfrob_core::lie::{LieAlgebra, LieElement};
use dsfrob_core::reference;
use dsfrob_core::registry::Registry;

fn loop_for(label: &str) -> (LoopAlgebra, dsfrob_core::registry::ConjugacyClassRecord) {
    let rec = Registry::builtin().find(label).unwrap().clone();
    let g = LieAlgebra::build(rec.algebra, rec.rank).unwrap();
    let dec = GradedDecomposition::new(&g, Gradation::new(&g, &rec.s).unwrap());
    (LoopAlgebra::new(g, dec, DEFAULT_WINDOW), rec)
}

fn d4_reference(lp: &LoopAlgebra) -> RegularElement {
    let ip = lp.g.parse_element(reference::I_PLUS).unwrap();
    let c = lp.g.parse_element(reference::C_MINUS).unwrap();
    RegularElement::from_parts(lp, ip, c).unwrap()
}

#[test]
fn d4a1_reference_lambda_is_regular() {
    let (lp, rec) = loop_for("D4(a1)");
    let reg = d4_reference(&lp);
    assert_eq!(reg.lambda, reference::generators(&lp.g)[0]);
    assert_eq!(reg.i_minus, lp.g.parse_element(reference::I_MINUS).unwrap());
    certify(&lp, &rec, &reg.lambda).unwrap();
    assert_eq!(kernel_profile(&lp, &reg.lambda, 1..=7).unwrap(), vec![2, 0, 2, 0, 2, 0, 2]);
}

#[test]
fn d4a1_heisenberg_grade_three_matches_reference() {
    let (lp, _) = loop_for("D4(a1)");
    let reg = d4_reference(&lp);
    let basis = heisenberg_basis(&lp, &reg.lambda, [-1, 0, 1, 3]).unwrap();
    assert!(basis[&0].is_empty());
    assert_eq!(basis[&3].len(), 2);
    let gens = reference::generators(&lp.g);
    // reference generators lie in the kernel and span the same space
    let keys: Vec<(i64, usize)> = lp.slice(3).unwrap();
    let row = |x: &LoopElement<Q>| keys.iter().map(|k| x.terms.get(k).cloned().unwrap_or_else(|| qi(0))).collect::<Vec<Q>>();
    let mut m: Vec<Vec<Q>> = basis[&3].iter().map(row).collect();
    m.push(row(&gens[2]));
    m.push(row(&gens[3]));
    assert_eq!(linear::rank(&m), 2);
    for b in &gens {
        assert!(lp.bracket(&reg.lambda, b).is_zero());
    }
    let all = heisenberg_basis(&lp, &reg.lambda, [-3, -1, 1, 3, 5]).unwrap();
    assert!(commutator_defects(&lp, &all).is_empty());
}

#[test]
fn random_search_finds_regular_elements() {
    for label in ["A1", "A3", "B2", "G2", "D4(a1)", "F4(a1)"] {
        let (lp, rec) = loop_for(label);
        let reg = build_regular_element(&lp, &rec, 7, 32).unwrap();
        certify(&lp, &rec, &reg.lambda).unwrap();
        if label == "A1" {
            assert_eq!(kernel_profile(&lp, &reg.lambda, [1]).unwrap(), vec![1]);
        }
    }
}

#[test]
fn search_is_deterministic() {
    let (lp, rec) = loop_for("D4(a1)");
    let a = build_regular_element(&lp, &rec, 11, 32).unwrap();
    let b = build_regular_element(&lp, &rec, 11, 32).unwrap();
    assert_eq!(a.lambda, b.lambda);
}

#[test]
fn window_too_small_is_reported() {
    let rec = Registry::builtin().find("D4(a1)").unwrap().clone();
    let g = LieAlgebra::build(rec.algebra, rec.rank).unwrap();
    let dec = GradedDecomposition::new(&g, Gradation::new(&g, &rec.s).unwrap());
    let lp = LoopAlgebra::new(g, dec, (0, 0));
    assert!(lp.slice(-1).is_err());
}

#[test]
fn zero_potential_dresses_trivially() {
    let (lp, _) = loop_for("D4(a1)");
    let reg = d4_reference(&lp);
    let vars = VarSet::new(&["x"]);
    let d = Dresser::new(&lp, reg.lambda.clone()).dress(&LoopElement::zero(), -3, &vars).unwrap();
    assert!(d.h.is_zero() && d.t.is_zero() && d.residual.is_zero());
}

#[test]
fn a1_one_step_recursion() {
    // Λ = E + zF, q = u H: h at grade −1 is proportional to u²
    let (lp, _) = loop_for("A1");
    let e = lp.g.parse_element("X1").unwrap();
    let f = lp.g.parse_element("Y1").unwrap();
    let reg = RegularElement::from_parts(&lp, e, f).unwrap();
    let vars = VarSet::new(&["u"]);
    let u = Poly::var(&vars, 0);
    let mut qv = LoopElement::zero();
    qv.add_term((0, 0), u.clone());
    let d = Dresser::new(&lp, reg.lambda.clone()).dress(&qv, -1, &vars).unwrap();
    assert!(d.residual.is_zero());
    let dens = casimir_densities(&lp, &d, std::slice::from_ref(&reg.lambda), &vars);
    assert_eq!(dens.degrees, vec![2]);
    // by hand: T = u z⁻¹E, h(−1) = u²/2 (F + z⁻¹E), so (Λ|h) = u² = ½(E + uH | E + uH)
    assert_eq!(dens.densities[0], &u * &u);
}

fn d4_miura() -> (LoopAlgebra, RegularElement, dsfrob_core::exact::Vars, LieElement<Poly>) {
    let (lp, _) = loop_for("D4(a1)");
    let reg = d4_reference(&lp);
    let vars = VarSet::new(&["n1", "n2", "n3", "n4", "n5", "n6"]);
    let labels = ["H1", "H2", "H3", "H4", "X2", "Y2"];
    let mut qv = LieElement::zero();
    for (i, l) in labels.iter().enumerate() {
        qv.add_term(lp.g.parse_label(l).unwrap(), Poly::var(&vars, i));
    }
    (lp, reg, vars, qv)
}

#[test]
fn d4a1_miura_densities_are_gauge_invariants() {
    let (lp, reg, vars, qv) = d4_miura();
    let d = Dresser::new(&lp, reg.lambda.clone())
        .dress(&LoopElement::at_power(&qv, 0), -3, &vars)
        .unwrap();
    assert!(d.residual.is_zero());
    let dens = casimir_densities(&lp, &d, &reference::generators(&lp.g), &vars);
    assert_eq!(dens.degrees, vec![2, 2, 4, 4]);

    let slice = CanonicalSlice::from_vectors(reference::slice(&lp.g));
    let fixer = GaugeFixer::new(&lp.g, &lp.dec, reg.i_plus.clone(), &slice).unwrap();
    let fix = fixer.fix(&qv, &vars).unwrap();
    let w = reference::coordinates(&fix.coords);
    let wv = VarSet::new(&reference::COORDINATE_NAMES);
    let n3 = Poly::parse(&wv, "u4 + w2^2/16 - w2*u2/30 + w2*v2/30 + 37/300*u2^2 - 7/600*u2*v2 + 7/1200*v2^2").unwrap();
    let n4 = Poly::parse(&wv, "-w4 + 7/120*w2*u2 - 7/300*u2^2 + 7/300*u2*v2").unwrap();
    assert_eq!(dens.densities[0], w[0]);
    assert_eq!(dens.densities[1], w[1]);
    assert_eq!(dens.densities[2], n3.subst(&w));
    assert_eq!(dens.densities[3], n4.subst(&w));
    // w2 = ½(I+ + q | I+ + q)
    let zero = Poly::zero(&vars);
    let j = reg.i_plus.map(|c| Poly::constant(&vars, c.clone())).add(&qv);
    assert_eq!(lp.g.form(&j, &j, &zero).scale(&dsfrob_core::exact::q(1, 2)), w[0]);
}

#[test]
fn d4a1_paper_gauge_density() {
    let (lp, reg, _, _) = d4_miura();
    let wv = VarSet::new(&reference::COORDINATE_NAMES);
    let slice = reference::slice(&lp.g);
    let im = lp.g.parse_element(reference::I_MINUS).unwrap();
    let p = |s: &str| Poly::parse(&wv, s).unwrap();
    let coeffs = [p("0"), p("u2/20"), p("v2/20"), p("w3/6"), p("u4"), p("w4")];
    let mut qv: LieElement<Poly> = im.map(|c| p("w2/12 - u2/120 - v2/24").scale(c));
    for ((_, v), c) in slice.iter().zip(&coeffs) {
        qv = qv.add(&v.map(|x| c.scale(x)));
    }
    let d = Dresser::new(&lp, reg.lambda.clone())
        .dress(&LoopElement::at_power(&qv, 0), -3, &wv)
        .unwrap();
    assert!(d.residual.is_zero());
    let dens = casimir_densities(&lp, &d, &reference::generators(&lp.g), &wv);
    assert_eq!(dens.densities[0], p("w2"));
    assert_eq!(dens.densities[1], p("u2"));
    assert_eq!(dens.densities[3], p("-w4 + 7/120*w2*u2 - 7/300*u2^2 + 7/300*u2*v2"));
}

fn exp_ad(g: &LieAlgebra, n: &LieElement<Poly>, x: &LieElement<Poly>) -> LieElement<Poly> {
    let mut out = x.clone();
    let mut term = x.clone();
    for m in 1..16 {
        term = g.bracket(n, &term).scale(&dsfrob_core::exact::q(1, m));
        if term.is_zero() {
            break;
        }
        out = out.add(&term);
    }
    out
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]

    #[test]
    fn slice_coordinates_are_gauge_invariant(cs in proptest::collection::vec(-3i64..4, 18)) {
        let (lp, reg, vars, qv) = d4_miura();
        let slice = CanonicalSlice::from_vectors(reference::slice(&lp.g));
        let fixer = GaugeFixer::new(&lp.g, &lp.dec, reg.i_plus.clone(), &slice).unwrap();
        let base = fixer.fix(&qv, &vars).unwrap();
        // random constant n in grades -1..-3
        let mut n = LieElement::zero();
        let neg: Vec<usize> = (1..=3).flat_map(|k| lp.dec.basis(-k).to_vec()).collect();
        for (b, c) in neg.iter().zip(&cs) {
            n.add_term(*b, Poly::constant(&vars, qi(*c)));
        }
        let ip = reg.i_plus.map(|c| Poly::constant(&vars, c.clone()));
        let moved = exp_ad(&lp.g, &n, &ip.add(&qv)).sub(&ip);
        let fix = fixer.fix(&moved, &vars).unwrap();
        proptest::prop_assert_eq!(fix.coords, base.coords);
    }
}
