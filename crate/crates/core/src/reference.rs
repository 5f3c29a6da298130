//! Worked D4(a1) gauge: the explicit Heisenberg generators and the slice used
//! for the golden comparison, written in the Chevalley basis of `lie`.

use crate::exact::{Poly, Q};
use crate::lie::{LieAlgebra, LieElement};

use crate::dressing::LoopElement;

/// z^0 and z^1 parts of the grade 1 and grade 3 generators.
pub const GENERATORS: [(&str, &str); 4] = [
    ("X1 + X3 + X12 + X23 + X24", "-Y12234"),
    ("X1 - X3 + X4 - X12 + X23", "-Y1234"),
    ("X1234", "-1/2*Y1 + 1/2*Y3 - Y4 + 1/2*Y12 - 1/2*Y23"),
    ("X12234", "-1/2*Y1 - 1/2*Y3 - 1/2*Y12 - 1/2*Y23 - Y24"),
];

pub const I_PLUS: &str = "X1 + X3 + X12 + X23 + X24";
pub const I_MINUS: &str = "3*Y1 + 3*Y3 + Y12 + Y23 + 4*Y24";
pub const C_MINUS: &str = "-Y12234";

/// Slice vectors by grade, in the order of the gauge coordinates below.
pub const SLICE: [(i64, &str); 6] = [
    (-1, "3*Y1 + 3*Y3 + Y12 + Y23 + 4*Y24"),
    (-1, "3*Y1 - 3*Y3 + 12*Y4 + 2*Y23"),
    (-1, "3*Y1 + 3*Y3 + 4*Y24"),
    (-2, "Y123 - 2*Y124 + 2*Y234"),
    (-3, "Y1234"),
    (-3, "-Y12234"),
];

pub const COORDINATE_NAMES: [&str; 6] = ["w2", "u2", "v2", "w3", "u4", "w4"];

/// (w2, u2, v2, w3, u4, w4) from the slice coefficients.
pub fn coordinates(c: &[Poly]) -> Vec<Poly> {
    let s = |p: &Poly, k: i64| p.scale(&Q::from_integer(k.into()));
    vec![
        &(&s(&c[0], 12) + &s(&c[1], 2)) + &s(&c[2], 10),
        s(&c[1], 20),
        s(&c[2], 20),
        s(&c[3], 6),
        c[4].clone(),
        c[5].clone(),
    ]
}

pub fn generators(g: &LieAlgebra) -> Vec<LoopElement<Q>> {
    GENERATORS
        .iter()
        .map(|(a, b)| {
            let x = g.parse_element(a).expect("reference label");
            let y = g.parse_element(b).expect("reference label");
            LoopElement::at_power(&x, 0).add(&LoopElement::at_power(&y, 1))
        })
        .collect()
}

pub fn slice(g: &LieAlgebra) -> Vec<(i64, LieElement<Q>)> {
    SLICE
        .iter()
        .map(|(k, s)| (*k, g.parse_element(s).expect("reference label")))
        .collect()
}
