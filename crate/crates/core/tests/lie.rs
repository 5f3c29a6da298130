use dsfrob_core::exact::{qi, Q};
use dsfrob_core::lie::{LieAlgebra, LieElement, LieType, RootSystem};

fn all_types() -> Vec<(LieType, usize)> {
    use LieType::*;
    let mut v = Vec::new();
    for n in 1..=8 {
        v.push((A, n));
    }
    for n in 2..=8 {
        v.push((B, n));
        v.push((C, n));
    }
    for n in 4..=8 {
        v.push((D, n));
    }
    v.extend([(E, 6), (E, 7), (E, 8), (F, 4), (G, 2)]);
    v
}

fn classical_root_count(t: LieType, n: usize) -> usize {
    match t {
        LieType::A => n * (n + 1),
        LieType::B | LieType::C => 2 * n * n,
        LieType::D => 2 * n * (n - 1),
        LieType::E => [72, 126, 240][n - 6],
        LieType::F => 48,
        LieType::G => 12,
    }
}

#[test]
fn root_counts_match_classical_values() {
    for (t, n) in all_types() {
        let rs = RootSystem::new(t, n).unwrap();
        assert_eq!(rs.roots.len(), classical_root_count(t, n), "{t}{n}");
        for i in 0..n {
            assert_eq!(rs.cartan[i][i], 2);
        }
        // highest root = Σ k_i α_i
        assert_eq!(rs.highest_root(), &rs.kac, "{t}{n}");
    }
}

#[test]
fn invalid_type_rank_rejected() {
    assert!(RootSystem::new(LieType::D, 3).is_err());
    assert!(RootSystem::new(LieType::E, 5).is_err());
    assert!(RootSystem::new(LieType::G, 3).is_err());
    assert!(RootSystem::new(LieType::A, 9).is_err());
}

#[test]
fn a1_brackets() {
    let g = LieAlgebra::build(LieType::A, 1).unwrap();
    let e = g.parse_label("X1").unwrap();
    let f = g.parse_label("Y1").unwrap();
    assert_eq!(g.bracket_basis(0, e), &[(e, 2)]);
    assert_eq!(g.bracket_basis(e, f), &[(0, 1)]);
}

#[test]
fn d4_positive_roots_and_dimension() {
    let g = LieAlgebra::build(LieType::D, 4).unwrap();
    assert_eq!(g.dim(), 28);
    let labels: Vec<String> = g.rs.positive.iter().map(|r| dsfrob_core::lie::root_label(r)).collect();
    let expected = [
        "X1", "X2", "X3", "X4", "X12", "X23", "X24", "X123", "X124", "X234", "X1234", "X12234",
    ];
    let mut a = labels.clone();
    a.sort();
    let mut b: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn jacobi_and_invariance_small_algebras() {
    use LieType::*;
    for (t, n) in [(A, 1), (A, 2), (A, 3), (B, 2), (B, 3), (C, 3), (D, 4), (G, 2), (F, 4)] {
        let g = LieAlgebra::build(t, n).unwrap();
        assert_eq!(g.jacobi_violations(), 0, "{t}{n}");
    }
    for (t, n) in [(A, 2), (B, 2), (G, 2), (D, 4)] {
        let g = LieAlgebra::build(t, n).unwrap();
        assert_eq!(g.invariance_violations(), 0, "{t}{n}");
    }
}

#[test]
fn structure_constants_antisymmetric_integral() {
    for (t, n) in all_types().into_iter().filter(|&(_, n)| n <= 6) {
        let g = LieAlgebra::build(t, n).unwrap();
        let r = g.rank();
        for i in r..g.dim() {
            for j in r..g.dim() {
                let a = g.bracket_basis(i, j);
                let b = g.bracket_basis(j, i);
                assert_eq!(a.len(), b.len());
                for (x, y) in a.iter().zip(b) {
                    assert_eq!(x.0, y.0);
                    assert_eq!(x.1, -y.1);
                }
                let ra = g.root_of(i).unwrap();
                let rb = g.root_of(j).unwrap();
                let s: Vec<i64> = ra.iter().zip(rb).map(|(x, y)| x + y).collect();
                let nonzero = !a.is_empty();
                let expected = g.rs.is_root(&s) || s.iter().all(|&x| x == 0);
                assert_eq!(nonzero, expected);
            }
        }
    }
}

#[test]
fn d4_sl2_triple_from_labels() {
    let g = LieAlgebra::build(LieType::D, 4).unwrap();
    let ip = g.parse_element("X1 + X3 + X12 + X23 + X24").unwrap();
    let im = g.parse_element("3*Y1 + 3*Y3 + Y12 + Y23 + 4*Y24").unwrap();
    let rho = g.parse_element("2*H1 + 3*H2 + 2*H3 + 2*H4").unwrap();
    assert_eq!(g.bracket(&rho, &ip), ip);
    assert_eq!(g.bracket(&rho, &im), im.neg());
    assert_eq!(g.bracket(&ip, &im), rho.scale(&qi(2)));
    // (ρ|ρ) = ½(I+|I−)
    let z = Q::from_integer(0.into());
    assert_eq!(g.form(&rho, &rho, &z), g.form(&ip, &im, &z) / qi(2));
    let x: LieElement<Q> = g.parse_element("X2").unwrap();
    assert!(g.bracket(&x, &x).is_zero());
}

#[test]
#[ignore = "exhaustive E8 Jacobi check takes about a minute in debug builds"]
fn jacobi_e8() {
    let g = LieAlgebra::build(LieType::E, 8).unwrap();
    assert_eq!(g.jacobi_violations(), 0);
}
