//! Truncated loop algebra, the regular element Λ and the dispersionless
//! dressing recursion that produces Casimir densities.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::linear::{self, Matrix};
use crate::exact::{q, qi, Poly, Ring, Vars, Q};
use crate::grading::{lowering_partner, GradedDecomposition};
use crate::lie::{Algebra, LieElement};
use crate::registry::ConjugacyClassRecord;

pub const DEFAULT_WINDOW: (i64, i64) = (-2, 2);
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_ATTEMPTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressingError {
    #[error("z-window [{lo}, {hi}] cannot hold grade {grade}")]
    WindowTooSmall { grade: i64, lo: i64, hi: i64 },
    #[error("no regular element found after {0} attempts")]
    SearchExhausted(usize),
    #[error("ad Λ is not semisimple at grade {0}")]
    NotSemisimple(i64),
    #[error("kernel of ad Λ at grade {grade} has dimension {got}, expected {expected}")]
    KernelMismatch {
        grade: i64,
        expected: usize,
        got: usize,
    },
    #[error("exp(ad T) did not terminate within {0} terms")]
    NilpotencyExceeded(usize),
    #[error("depth {depth} is below −(N_w − 1) = {bound}")]
    DepthTooLow { depth: i64, bound: i64 },
    #[error("densities are not independent")]
    Dependent,
    #[error("no sl2 partner for I+")]
    NoSl2,
}

/// Element of g ⊗ C[z, z⁻¹], keyed by (z-power, basis index).
#[derive(Clone, Debug, PartialEq)]
pub struct LoopElement<C> {
    pub terms: BTreeMap<(i64, usize), C>,
}

impl<C: Ring> LoopElement<C> {
    pub fn zero() -> Self {
        LoopElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: (i64, usize), c: C) {
        let v = match self.terms.remove(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !v.vanishes() {
            self.terms.insert(key, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &o.terms {
            out.add_term(*k, v.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> LoopElement<D> {
        let mut out = LoopElement::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, f(v));
        }
        out
    }

    /// x placed at z^m.
    pub fn at_power(x: &LieElement<C>, m: i64) -> Self {
        let mut out = LoopElement::zero();
        for (i, c) in &x.coeffs {
            out.add_term((m, *i), c.clone());
        }
        out
    }

    /// Coefficient of z^m.
    pub fn power(&self, m: i64) -> LieElement<C> {
        let mut out = LieElement::zero();
        for ((p, i), c) in &self.terms {
            if *p == m {
                out.add_term(*i, c.clone());
            }
        }
        out
    }
}

impl LoopElement<Q> {
    pub fn lift(&self, vars: &Vars) -> LoopElement<Poly> {
        self.map(|c| Poly::constant(vars, c.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct LoopAlgebra {
    pub g: Algebra,
    pub dec: GradedDecomposition,
    pub window: (i64, i64),
}

impl LoopAlgebra {
    pub fn new(g: Algebra, dec: GradedDecomposition, window: (i64, i64)) -> Self {
        LoopAlgebra { g, dec, window }
    }

    pub fn order(&self) -> i64 {
        self.dec.gradation.order
    }

    pub fn grade(&self, m: i64, i: usize) -> i64 {
        m * self.order() + self.dec.gradation.grades[i]
    }

    /// Basis of the grade-k subspace of the loop algebra.
    pub fn slice(&self, k: i64) -> Result<Vec<(i64, usize)>, DressingError> {
        let n = self.order();
        let (lo, hi) = self.window;
        let mut out = Vec::new();
        for i in 0..self.g.dim() {
            let r = k - self.dec.gradation.grades[i];
            if r.rem_euclid(n) != 0 {
                continue;
            }
            let m = r.div_euclid(n);
            if m < lo || m > hi {
                return Err(DressingError::WindowTooSmall { grade: k, lo, hi });
            }
            out.push((m, i));
        }
        out.sort();
        Ok(out)
    }

    pub fn bracket<C: Ring>(&self, a: &LoopElement<C>, b: &LoopElement<C>) -> LoopElement<C> {
        let mut acc: HashMap<(i64, usize), C> = HashMap::new();
        for ((m, i), x) in &a.terms {
            for ((n, j), y) in &b.terms {
                let t = self.g.bracket_basis(*i, *j);
                if t.is_empty() {
                    continue;
                }
                let xy = x.mul(y);
                for (k, c) in t {
                    let v = xy.scale(&qi(*c));
                    match acc.get_mut(&(m + n, *k)) {
                        Some(s) => *s = s.add(&v),
                        None => {
                            acc.insert((m + n, *k), v);
                        }
                    }
                }
            }
        }
        LoopElement {
            terms: acc.into_iter().filter(|(_, v)| !v.vanishes()).collect(),
        }
    }

    /// Loop pairing: invariant form on terms whose z-powers cancel.
    pub fn pair<C: Ring>(&self, a: &LoopElement<C>, b: &LoopElement<C>, zero: &C) -> C {
        let mut tot = zero.clone();
        for ((m, i), x) in &a.terms {
            let j = self.g.dual_index(*i);
            if let Some(y) = b.terms.get(&(-m, j)) {
                let f = self.g.form_basis(*i, j);
                tot = tot.add(&x.mul(y).scale(&f));
            }
        }
        tot
    }

    pub fn truncate<C: Ring>(&self, x: &LoopElement<C>, floor: i64) -> LoopElement<C> {
        LoopElement {
            terms: x
                .terms
                .iter()
                .filter(|((m, i), _)| self.grade(*m, *i) >= floor)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn project<C: Ring>(&self, x: &LoopElement<C>, k: i64) -> LoopElement<C> {
        LoopElement {
            terms: x
                .terms
                .iter()
                .filter(|((m, i), _)| self.grade(*m, *i) == k)
                .map(|(key, v)| (*key, v.clone()))
                .collect(),
        }
    }

    fn element_of(&self, v: &[Q], basis: &[(i64, usize)]) -> LoopElement<Q> {
        let mut out = LoopElement::zero();
        for (c, k) in v.iter().zip(basis) {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn format(&self, x: &LoopElement<Q>) -> String {
        let mut parts = Vec::new();
        for m in x.terms.keys().map(|k| k.0).collect::<std::collections::BTreeSet<_>>() {
            let body = self.g.format(&x.power(m));
            parts.push(match m {
                0 => body,
                1 => format!("z*({body})"),
                _ => format!("z^{m}*({body})"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Λ = I+ + z·C with its sl2 partner.
#[derive(Clone, Debug)]
pub struct RegularElement {
    pub lambda: LoopElement<Q>,
    pub i_plus: LieElement<Q>,
    pub c_minus: LieElement<Q>,
    pub i_minus: LieElement<Q>,
}

impl RegularElement {
    pub fn from_parts(
        lp: &LoopAlgebra,
        i_plus: LieElement<Q>,
        c_minus: LieElement<Q>,
    ) -> Result<Self, DressingError> {
        let i_minus = lowering_partner(&lp.g, &lp.dec, &i_plus).ok_or(DressingError::NoSl2)?;
        let lambda = LoopElement::at_power(&i_plus, 0).add(&LoopElement::at_power(&c_minus, 1));
        Ok(RegularElement {
            lambda,
            i_plus,
            c_minus,
            i_minus,
        })
    }
}

type GradedBasis = Vec<(i64, usize)>;

/// Matrix of ad Λ from grade k to grade k+1.
fn ad_matrix(
    lp: &LoopAlgebra,
    lam: &LoopElement<Q>,
    k: i64,
) -> Result<(Matrix, GradedBasis, GradedBasis), DressingError> {
    let src = lp.slice(k)?;
    let dst = lp.slice(k + 1)?;
    let mut m = linear::zeros(dst.len(), src.len());
    let pos: HashMap<(i64, usize), usize> = dst.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    for (j, b) in src.iter().enumerate() {
        let mut e = LoopElement::zero();
        e.add_term(*b, qi(1));
        for (key, v) in lp.bracket(lam, &e).terms {
            m[pos[&key]][j] = v;
        }
    }
    Ok((m, src, dst))
}

/// Expected kernel dimension of ad Λ at grade k from I(w).
pub fn expected_kernel_dim(rec: &ConjugacyClassRecord, k: i64) -> usize {
    rec.exponents
        .iter()
        .filter(|&&e| (k - e).rem_euclid(rec.order) == 0)
        .count()
}

pub fn kernel_profile(
    lp: &LoopAlgebra,
    lam: &LoopElement<Q>,
    grades: impl IntoIterator<Item = i64>,
) -> Result<Vec<usize>, DressingError> {
    grades
        .into_iter()
        .map(|k| {
            let (m, src, _) = ad_matrix(lp, lam, k)?;
            Ok(src.len() - linear::rank(&m))
        })
        .collect()
}

/// Checks regularity and semisimplicity of ad Λ over one period of grades.
pub fn certify(
    lp: &LoopAlgebra,
    rec: &ConjugacyClassRecord,
    lam: &LoopElement<Q>,
) -> Result<(), DressingError> {
    let n = rec.order;
    for k in 0..n {
        let (m, src, _) = ad_matrix(lp, lam, k)?;
        let ker = src.len() - linear::rank(&m);
        let expected = expected_kernel_dim(rec, k);
        if ker != expected {
            return Err(DressingError::KernelMismatch {
                grade: k,
                expected,
                got: ker,
            });
        }
        let (mp, _, _) = ad_matrix(lp, lam, k - 1)?;
        if ker + linear::rank(&mp) != src.len() {
            return Err(DressingError::NotSemisimple(k));
        }
    }
    Ok(())
}

/// Seeded random search for Λ = I+ + z·C over small integer coefficients.
pub fn build_regular_element(
    lp: &LoopAlgebra,
    rec: &ConjugacyClassRecord,
    seed: u64,
    attempts: usize,
) -> Result<RegularElement, DressingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = -(rec.order - 1);
    for _ in 0..attempts {
        let mut ip = LieElement::zero();
        for &b in lp.dec.basis(1) {
            ip.add_term(b, qi(rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 }));
        }
        let mut c = LieElement::zero();
        for &b in lp.dec.basis(top) {
            c.add_term(b, qi(rng.gen_range(-3..=3)));
        }
        let Ok(reg) = RegularElement::from_parts(lp, ip, c) else {
            continue;
        };
        match certify(lp, rec, &reg.lambda) {
            Ok(()) => return Ok(reg),
            Err(DressingError::WindowTooSmall { grade, lo, hi }) => {
                return Err(DressingError::WindowTooSmall { grade, lo, hi })
            }
            Err(_) => continue,
        }
    }
    Err(DressingError::SearchExhausted(attempts))
}

/// Basis of Ker(ad Λ) at each requested grade.
pub fn heisenberg_basis(
    lp: &LoopAlgebra,
    lam: &LoopElement<Q>,
    grades: impl IntoIterator<Item = i64>,
) -> Result<BTreeMap<i64, Vec<LoopElement<Q>>>, DressingError> {
    let mut out = BTreeMap::new();
    for k in grades {
        let (m, src, _) = ad_matrix(lp, lam, k)?;
        let ker = linear::nullspace(&m, src.len());
        out.insert(k, ker.iter().map(|v| lp.element_of(v, &src)).collect());
    }
    Ok(out)
}

/// Pairs of Heisenberg basis elements whose bracket does not vanish.
pub fn commutator_defects(
    lp: &LoopAlgebra,
    basis: &BTreeMap<i64, Vec<LoopElement<Q>>>,
) -> Vec<(i64, usize, i64, usize)> {
    let flat: Vec<(i64, usize, &LoopElement<Q>)> = basis
        .iter()
        .flat_map(|(k, v)| v.iter().enumerate().map(move |(i, x)| (*k, i, x)))
        .collect();
    let mut bad = Vec::new();
    for a in 0..flat.len() {
        for b in a + 1..flat.len() {
            if !lp.bracket(flat[a].2, flat[b].2).is_zero() {
                bad.push((flat[a].0, flat[a].1, flat[b].0, flat[b].1));
            }
        }
    }
    bad
}

struct GradeSplit {
    src: Vec<(i64, usize)>,
    nker: usize,
    ker: Vec<Vec<Q>>,
    pre: Vec<(i64, usize)>,
    binv: Matrix,
}

/// Solves exp(−ad T)(Λ + q) = Λ + h grade by grade with h in Ker(ad Λ).
pub struct Dresser<'a> {
    lp: &'a LoopAlgebra,
    lambda: LoopElement<Q>,
    cache: Mutex<BTreeMap<i64, std::sync::Arc<GradeSplit>>>,
}

#[derive(Clone, Debug)]
pub struct Dressing {
    pub h: LoopElement<Poly>,
    pub t: LoopElement<Poly>,
    pub residual: LoopElement<Poly>,
    pub depth: i64,
}

impl<'a> Dresser<'a> {
    pub fn new(lp: &'a LoopAlgebra, lambda: LoopElement<Q>) -> Self {
        Dresser {
            lp,
            lambda,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    fn split(&self, k: i64) -> Result<std::sync::Arc<GradeSplit>, DressingError> {
        if let Some(s) = self.cache.lock().unwrap().get(&k) {
            return Ok(s.clone());
        }
        let (m, src, _) = ad_matrix(self.lp, &self.lambda, k)?;
        let ker = linear::nullspace(&m, src.len());
        let (mp, psrc, _) = ad_matrix(self.lp, &self.lambda, k - 1)?;
        let cols = linear::transpose(&mp);
        let mut chosen: Vec<Vec<Q>> = Vec::new();
        let mut pre = Vec::new();
        for (j, c) in cols.iter().enumerate() {
            let mut trial = chosen.clone();
            trial.push(c.clone());
            if linear::rank(&trial) > chosen.len() {
                chosen = trial;
                pre.push(psrc[j]);
            }
        }
        if ker.len() + chosen.len() != src.len() {
            return Err(DressingError::NotSemisimple(k));
        }
        let mut cols_all = ker.clone();
        cols_all.extend(chosen);
        let basis = linear::transpose(&cols_all);
        let binv = linear::inverse(&basis).map_err(|_| DressingError::NotSemisimple(k))?;
        let s = std::sync::Arc::new(GradeSplit {
            src,
            nker: ker.len(),
            ker,
            pre,
            binv,
        });
        self.cache.lock().unwrap().insert(k, s.clone());
        Ok(s)
    }

    /// exp(−ad T) x, dropping grades below `floor`.
    pub fn exp_minus_ad(
        &self,
        t: &LoopElement<Poly>,
        x: &LoopElement<Poly>,
        floor: i64,
    ) -> Result<LoopElement<Poly>, DressingError> {
        let bound = (self.lp.order() + 2) as usize;
        let mut out = self.lp.truncate(x, floor);
        let mut term = out.clone();
        for n in 1..=bound {
            term = self.lp.truncate(&self.lp.bracket(t, &term), floor).scale(&q(-1, n as i64));
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term);
        }
        Err(DressingError::NilpotencyExceeded(bound))
    }

    pub fn dress(&self, qv: &LoopElement<Poly>, depth: i64, vars: &Vars) -> Result<Dressing, DressingError> {
        let bound = -(self.lp.order() - 1);
        if depth < bound {
            return Err(DressingError::DepthTooLow { depth, bound });
        }
        let zero = Poly::zero(vars);
        let full = self.lambda.lift(vars).add(qv);
        let mut t: LoopElement<Poly> = LoopElement::zero();
        let mut h: LoopElement<Poly> = LoopElement::zero();
        for k in (depth..=0).rev() {
            let cur = self.exp_minus_ad(&t, &full, depth)?;
            let sp = self.split(k)?;
            let v: Vec<Poly> = sp
                .src
                .iter()
                .map(|b| cur.terms.get(b).cloned().unwrap_or_else(|| zero.clone()))
                .collect();
            let c: Vec<Poly> = sp
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
            for (j, kv) in sp.ker.iter().enumerate() {
                for (bi, b) in sp.src.iter().enumerate() {
                    if !kv[bi].is_zero() {
                        h.add_term(*b, c[j].scale(&kv[bi]));
                    }
                }
            }
            for (j, p) in sp.pre.iter().enumerate() {
                t.add_term(*p, -c[sp.nker + j].clone());
            }
        }
        let residual = self
            .exp_minus_ad(&t, &full, depth)?
            .sub(&self.lambda.lift(vars).add(&h));
        Ok(Dressing { h, t, residual, depth })
    }
}

/// Casimir densities N^a with their scaling degrees k_a + 1.
#[derive(Clone, Debug)]
pub struct CasimirDensitySet {
    pub densities: Vec<Poly>,
    pub degrees: Vec<i64>,
    pub generators: Vec<LoopElement<Q>>,
}

impl CasimirDensitySet {
    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }
}

/// Pair each Heisenberg generator of grade k_a with the dressed h.
pub fn casimir_densities(
    lp: &LoopAlgebra,
    dressing: &Dressing,
    generators: &[LoopElement<Q>],
    vars: &Vars,
) -> CasimirDensitySet {
    let zero = Poly::zero(vars);
    let mut densities = Vec::new();
    let mut degrees = Vec::new();
    for b in generators {
        let (m, i) = *b.terms.keys().next().expect("nonzero generator");
        degrees.push(lp.grade(m, i) + 1);
        densities.push(lp.pair(&b.lift(vars), &dressing.h, &zero));
    }
    CasimirDensitySet {
        densities,
        degrees,
        generators: generators.to_vec(),
    }
}

/// One Heisenberg generator per entry of I(w), in ascending order.
pub fn exponent_generators(
    lp: &LoopAlgebra,
    lam: &LoopElement<Q>,
    rec: &ConjugacyClassRecord,
) -> Result<Vec<LoopElement<Q>>, DressingError> {
    let mut grades: Vec<i64> = rec.exponents.clone();
    grades.dedup();
    let basis = heisenberg_basis(lp, lam, grades.iter().copied())?;
    let mut out = Vec::new();
    for k in grades {
        let want = rec.exponents.iter().filter(|&&e| e == k).count();
        let got = &basis[&k];
        if got.len() != want {
            return Err(DressingError::KernelMismatch {
                grade: k,
                expected: want,
                got: got.len(),
            });
        }
        out.extend(got.iter().cloned());
    }
    Ok(out)
}

/// Rank of the Jacobian of `polys` at a rational point.
pub fn jacobian_rank(polys: &[Poly], point: &[Q]) -> usize {
    let n = point.len();
    let m: Matrix = polys
        .iter()
        .map(|p| (0..n).map(|i| p.diff(i).eval(point)).collect())
        .collect();
    linear::rank(&m)
}
