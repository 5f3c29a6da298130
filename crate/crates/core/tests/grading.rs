use dsfrob_core::exact::qi;
use dsfrob_core::grading::{
    cyclotomic, g0_type, lowering_partner, validate_class, GradedDecomposition, Gradation,
    GradingError,
};
use dsfrob_core::lie::{LieAlgebra, LieType, RootSystem};
use dsfrob_core::registry::Registry;
use proptest::prelude::*;

fn d4a1() -> (std::sync::Arc<LieAlgebra>, GradedDecomposition) {
    let g = LieAlgebra::build(LieType::D, 4).unwrap();
    let grad = Gradation::new(&g, &[1, 1, 0, 1, 1]).unwrap();
    let dec = GradedDecomposition::new(&g, grad);
    (g, dec)
}

#[test]
fn d4a1_order_and_rho() {
    let (g, dec) = d4a1();
    assert_eq!(dec.gradation.order, 4);
    let rho = g.parse_element("2*H1 + 3*H2 + 2*H3 + 2*H4").unwrap();
    assert_eq!(dec.gradation.rho, rho);
    for k in -3..=3 {
        for &b in dec.basis(k) {
            let e = dsfrob_core::lie::LieElement::basis(b, qi(1));
            assert_eq!(g.bracket(&rho, &e), e.scale(&qi(k)));
        }
    }
}

#[test]
fn d4a1_character_and_weights() {
    let (_, dec) = d4a1();
    let chi = dec.character();
    let dims: Vec<i64> = (-3..=3).map(|k| chi.coeff(k)).collect();
    assert_eq!(dims, vec![2, 3, 6, 6, 6, 3, 2]);
    assert!(chi.is_palindromic());
    assert_eq!(chi.at_one(), 28);
    assert_eq!(chi.conformal_weights().unwrap(), vec![1, 1, 1, 2, 3, 3]);
}

#[test]
fn principal_gradation_gives_exponents() {
    let expected: &[(LieType, usize, &[i64])] = &[
        (LieType::A, 3, &[1, 2, 3]),
        (LieType::B, 3, &[1, 3, 5]),
        (LieType::G, 2, &[1, 5]),
        (LieType::F, 4, &[1, 5, 7, 11]),
        (LieType::E, 6, &[1, 4, 5, 7, 8, 11]),
    ];
    for &(t, n, e) in expected {
        let g = LieAlgebra::build(t, n).unwrap();
        let dec = GradedDecomposition::new(&g, Gradation::principal(&g));
        assert_eq!(dec.character().conformal_weights().unwrap(), e.to_vec(), "{t}{n}");
    }
}

#[test]
fn bad_weight_vectors_rejected() {
    let g = LieAlgebra::build(LieType::D, 4).unwrap();
    assert!(matches!(Gradation::new(&g, &[1, 1, 0]), Err(GradingError::WrongLength { .. })));
    assert!(matches!(Gradation::new(&g, &[2, 2, 0, 2, 2]), Err(GradingError::NotCoprime(_))));
    assert!(matches!(Gradation::new(&g, &[1, -1, 0, 1, 1]), Err(GradingError::Negative)));
}

#[test]
fn cyclotomic_polynomials() {
    assert_eq!(cyclotomic(1), vec![-1, 1]);
    assert_eq!(cyclotomic(4), vec![1, 0, 1]);
    assert_eq!(cyclotomic(6), vec![1, -1, 1]);
    assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
}

#[test]
fn g0_types_from_diagram() {
    let d4 = RootSystem::new(LieType::D, 4).unwrap();
    assert_eq!(g0_type(&d4, &[1, 1, 0, 1, 1]), "u1^3 + su2");
    let e8 = RootSystem::new(LieType::E, 8).unwrap();
    assert_eq!(g0_type(&e8, &[1, 0, 0, 0, 1, 0, 0, 0, 0]), "u1 + su4 + su5");
    // deleting only α_0 leaves the finite diagram
    assert_eq!(g0_type(&e8, &[1, 0, 0, 0, 0, 0, 0, 0, 0]), "e8");
    let b3 = RootSystem::new(LieType::B, 3).unwrap();
    assert_eq!(g0_type(&b3, &[1, 0, 0, 0]), "so7");
    let c3 = RootSystem::new(LieType::C, 3).unwrap();
    assert_eq!(g0_type(&c3, &[1, 0, 0, 0]), "sp6");
    let f4 = RootSystem::new(LieType::F, 4).unwrap();
    assert_eq!(g0_type(&f4, &[1, 0, 0, 0, 0]), "f4");
    let d5 = RootSystem::new(LieType::D, 5).unwrap();
    assert_eq!(g0_type(&d5, &[1, 0, 0, 0, 0, 0]), "so10");
    let g2 = RootSystem::new(LieType::G, 2).unwrap();
    assert_eq!(g0_type(&g2, &[1, 0, 0]), "g2");
}

#[test]
fn every_builtin_class_validates() {
    let reg = Registry::builtin();
    for rec in reg.records() {
        let rep = validate_class(rec);
        assert!(rep.passed(), "{}: {:?}", rec.key(), rep.failures());
    }
}

#[test]
fn corrupted_record_fails_trace() {
    let reg = Registry::builtin();
    let mut rec = reg.find("E7(a4)").unwrap().clone();
    rec.exponents[3] = 2;
    let rep = validate_class(&rec);
    assert!(!rep.check("trace").unwrap().passed);
    assert!(!rep.passed());
}

#[test]
fn wrong_g0_string_fails() {
    let reg = Registry::builtin();
    let mut rec = reg.find("E8(a8)").unwrap().clone();
    rec.g0 = "u1 + su3 + su6".into();
    assert!(!validate_class(&rec).check("g0").unwrap().passed);
}

#[test]
fn sl2_triple_every_class() {
    // I+ = Σ E_α over grade-one roots is a valid choice whenever a partner exists
    let reg = Registry::builtin();
    for rec in reg.records().iter().filter(|r| r.rank <= 6) {
        let g = LieAlgebra::build(rec.algebra, rec.rank).unwrap();
        let dec = GradedDecomposition::new(&g, Gradation::new(&g, &rec.s).unwrap());
        let mut ip = dsfrob_core::lie::LieElement::zero();
        for (i, &b) in dec.basis(1).iter().enumerate() {
            ip.add_term(b, qi(i as i64 + 1));
        }
        let im = lowering_partner(&g, &dec, &ip).unwrap_or_else(|| panic!("{}", rec.key()));
        let rho = &dec.gradation.rho;
        assert_eq!(g.bracket(rho, &ip), ip);
        assert_eq!(g.bracket(rho, &im), im.neg());
        assert_eq!(g.bracket(&ip, &im), rho.scale(&qi(2)));
    }
}

proptest! {
    #[test]
    fn character_palindromic_and_counts_dimension(
        idx in 0usize..8,
        s in proptest::collection::vec(0i64..3, 9),
    ) {
        let types = [(LieType::A, 3), (LieType::B, 3), (LieType::C, 3), (LieType::D, 4),
                     (LieType::D, 5), (LieType::G, 2), (LieType::F, 4), (LieType::E, 6)];
        let (t, n) = types[idx];
        let mut s: Vec<i64> = s[..=n].to_vec();
        s[0] = 1;
        let g = LieAlgebra::build(t, n).unwrap();
        let dec = GradedDecomposition::new(&g, Gradation::new(&g, &s).unwrap());
        let chi = dec.character();
        prop_assert!(chi.is_palindromic());
        prop_assert_eq!(chi.at_one(), g.dim() as i64);
        // grade(α) = Σ s_i m_i and ad ρ acts by it
        for (k, root) in g.rs.roots.iter().enumerate() {
            let gr: i64 = root.iter().zip(&s[1..]).map(|(m, x)| m * x).sum();
            prop_assert_eq!(dec.gradation.grade(n + k), gr);
        }
    }
}
