//! Canonical slice and the finite gauge-fixing recursion.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::exact::linear::{self, Matrix};
use crate::exact::{q, qi, Poly, Vars, Q};
use crate::grading::GradedDecomposition;
use crate::lie::{LieAlgebra, LieElement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("slice weights {got:?} differ from Pr_w {expected:?}")]
    WeightMismatch { expected: Vec<i64>, got: Vec<i64> },
    #[error("slice at grade {0} is not complementary to the image of ad I+")]
    NotComplement(i64),
    #[error("gauge recursion left a residual at grade {0}")]
    Residual(i64),
    #[error("exp(ad n) did not terminate")]
    Nilpotency,
}

/// Complement of [I+, g] in the negative grades.
#[derive(Clone, Debug)]
pub struct CanonicalSlice {
    /// (grade, vector), grades descending from −1
    pub vectors: Vec<(i64, LieElement<Q>)>,
}

impl CanonicalSlice {
    pub fn from_vectors(mut vectors: Vec<(i64, LieElement<Q>)>) -> Self {
        vectors.sort_by_key(|(k, _)| -k);
        CanonicalSlice { vectors }
    }

    pub fn weights(&self) -> Vec<i64> {
        let mut w: Vec<i64> = self.vectors.iter().map(|(k, _)| -k).collect();
        w.sort();
        w
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn at(&self, k: i64) -> Vec<&LieElement<Q>> {
        self.vectors.iter().filter(|(g, _)| *g == k).map(|(_, v)| v).collect()
    }
}

fn vec_of(x: &LieElement<Q>, basis: &[usize]) -> Vec<Q> {
    basis.iter().map(|b| x.get(*b).cloned().unwrap_or_else(Q::zero)).collect()
}

fn elem_of(v: &[Q], basis: &[usize]) -> LieElement<Q> {
    let mut out = LieElement::zero();
    for (c, b) in v.iter().zip(basis) {
        out.add_term(*b, c.clone());
    }
    out
}

/// Lowest-weight vectors Ker(ad I−) at negative grades. At grade −1 the first
/// vector is I−/(I+|I−) and the rest are orthogonal to I+.
pub fn canonical_slice(
    g: &LieAlgebra,
    dec: &GradedDecomposition,
    i_plus: &LieElement<Q>,
    i_minus: &LieElement<Q>,
    pr_w: &[i64],
) -> Result<CanonicalSlice, GaugeError> {
    let zero = Q::zero();
    let top = dec.gradation.max_grade();
    let mut vectors = Vec::new();
    for k in 1..=top {
        let src = dec.basis(-k);
        let dst = dec.basis(-k - 1);
        let mut m: Matrix = linear::zeros(dst.len(), src.len());
        for (j, &b) in src.iter().enumerate() {
            let img = g.bracket(i_minus, &LieElement::basis(b, qi(1)));
            for (r, &d) in dst.iter().enumerate() {
                if let Some(v) = img.get(d) {
                    m[r][j] = v.clone();
                }
            }
        }
        let ker: Vec<LieElement<Q>> = linear::nullspace(&m, src.len())
            .iter()
            .map(|v| elem_of(v, src))
            .collect();
        if k == 1 {
            let norm = g.form(i_plus, i_minus, &zero);
            vectors.push((-1, i_minus.scale(&(qi(1) / &norm))));
            let mut span = vec![vec_of(i_minus, src)];
            for v in ker {
                let c = g.form(i_plus, &v, &zero) / &norm;
                let w = v.sub(&i_minus.scale(&c));
                let mut trial = span.clone();
                trial.push(vec_of(&w, src));
                if linear::rank(&trial) > span.len() {
                    span = trial;
                    vectors.push((-1, w));
                }
            }
        } else {
            vectors.extend(ker.into_iter().map(|v| (-k, v)));
        }
    }
    let slice = CanonicalSlice { vectors };
    let got = slice.weights();
    if got != pr_w {
        return Err(GaugeError::WeightMismatch {
            expected: pr_w.to_vec(),
            got,
        });
    }
    Ok(slice)
}

struct Decomp {
    dst: Vec<usize>,
    nslice: usize,
    pre: Vec<usize>,
    binv: Matrix,
}

/// exp(ad n)(I+ + q) = I+ + Σ c_i F_i with n in negative grades.
#[derive(Clone, Debug)]
pub struct GaugeFix {
    /// coefficient of each slice vector, in slice order
    pub coords: Vec<Poly>,
    pub n: LieElement<Poly>,
    pub fixed: LieElement<Poly>,
}

pub struct GaugeFixer<'a> {
    g: &'a LieAlgebra,
    dec: &'a GradedDecomposition,
    i_plus: LieElement<Q>,
    slice: &'a CanonicalSlice,
    decomps: BTreeMap<i64, Decomp>,
}

impl<'a> GaugeFixer<'a> {
    pub fn new(
        g: &'a LieAlgebra,
        dec: &'a GradedDecomposition,
        i_plus: LieElement<Q>,
        slice: &'a CanonicalSlice,
    ) -> Result<Self, GaugeError> {
        let mut decomps = BTreeMap::new();
        let lo = -dec.gradation.max_grade();
        for k in (lo..=0).rev() {
            let dst = dec.basis(k).to_vec();
            let src = dec.basis(k - 1);
            let mut cols: Vec<Vec<Q>> = slice.at(k).iter().map(|v| vec_of(v, &dst)).collect();
            let nslice = cols.len();
            let mut pre = Vec::new();
            for &b in src {
                let img = g.bracket(&i_plus, &LieElement::basis(b, qi(1)));
                let mut trial = cols.clone();
                trial.push(vec_of(&img, &dst));
                if linear::rank(&trial) > cols.len() {
                    cols = trial;
                    pre.push(b);
                }
            }
            if cols.len() != dst.len() || linear::rank(&cols) != dst.len() {
                return Err(GaugeError::NotComplement(k));
            }
            let binv = linear::inverse(&linear::transpose(&cols)).map_err(|_| GaugeError::NotComplement(k))?;
            decomps.insert(
                k,
                Decomp {
                    dst,
                    nslice,
                    pre,
                    binv,
                },
            );
        }
        Ok(GaugeFixer {
            g,
            dec,
            i_plus,
            slice,
            decomps,
        })
    }

    fn exp_ad(&self, n: &LieElement<Poly>, x: &LieElement<Poly>) -> Result<LieElement<Poly>, GaugeError> {
        let bound = (2 * self.dec.gradation.max_grade() + 3) as usize;
        let mut out = x.clone();
        let mut term = x.clone();
        for m in 1..=bound {
            term = self.g.bracket(n, &term).scale(&q(1, m as i64));
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term);
        }
        Err(GaugeError::Nilpotency)
    }

    pub fn fix(&self, qv: &LieElement<Poly>, vars: &Vars) -> Result<GaugeFix, GaugeError> {
        let zero = Poly::zero(vars);
        let j = self.i_plus.map(|c| Poly::constant(vars, c.clone())).add(qv);
        let mut n: LieElement<Poly> = LieElement::zero();
        let mut by_grade: BTreeMap<i64, Vec<Poly>> = BTreeMap::new();
        for (&k, d) in self.decomps.iter().rev() {
            let cur = if n.is_zero() { j.clone() } else { self.exp_ad(&n, &j)? };
            let v: Vec<Poly> = d.dst.iter().map(|b| cur.get(*b).cloned().unwrap_or_else(|| zero.clone())).collect();
            let c: Vec<Poly> = d
                .binv
                .iter()
                .map(|row| {
                    let mut s = zero.clone();
                    for (r, x) in row.iter().zip(&v) {
                        if !r.is_zero() && !x.is_zero() {
                            s = &s + &x.scale(r);
                        }
                    }
                    s
                })
                .collect();
            by_grade.insert(k, c[..d.nslice].to_vec());
            for (i, p) in d.pre.iter().enumerate() {
                n.add_term(*p, c[d.nslice + i].clone());
            }
        }
        let fixed = self.exp_ad(&n, &j)?;
        // slice order is grade descending, matching by_grade iterated in reverse
        let mut coords = Vec::new();
        for (_, c) in by_grade.into_iter().rev() {
            coords.extend(c);
        }
        let mut expect = self.i_plus.map(|c| Poly::constant(vars, c.clone()));
        for ((_, f), c) in self.slice.vectors.iter().zip(&coords) {
            expect = expect.add(&f.map(|x| c.scale(x)));
        }
        let diff = fixed.sub(&expect);
        if let Some((&b, _)) = diff.coeffs.iter().next() {
            return Err(GaugeError::Residual(self.dec.gradation.grades[b]));
        }
        Ok(GaugeFix { coords, n, fixed })
    }
}
