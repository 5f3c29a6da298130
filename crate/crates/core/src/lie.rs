//! Root systems, Chevalley bases and the invariant form.
//!
//! Roots are stored by their coordinates on the simple roots, with inner
//! products read from a Gram matrix normalized so long roots have length 2.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{q, qi, Ring, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("no simple Lie algebra of type {0}{1}")]
    InvalidType(char, usize),
    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum LieType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl LieType {
    pub fn letter(self) -> char {
        match self {
            LieType::A => 'A',
            LieType::B => 'B',
            LieType::C => 'C',
            LieType::D => 'D',
            LieType::E => 'E',
            LieType::F => 'F',
            LieType::G => 'G',
        }
    }

    pub fn simply_laced(self) -> bool {
        matches!(self, LieType::A | LieType::D | LieType::E)
    }
}

impl FromStr for LieType {
    type Err = LieError;
    fn from_str(s: &str) -> Result<Self, LieError> {
        Ok(match s.trim() {
            "A" => LieType::A,
            "B" => LieType::B,
            "C" => LieType::C,
            "D" => LieType::D,
            "E" => LieType::E,
            "F" => LieType::F,
            "G" => LieType::G,
            other => return Err(LieError::InvalidType(other.chars().next().unwrap_or('?'), 0)),
        })
    }
}

impl fmt::Display for LieType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A root as integer coordinates on the simple roots.
pub type Root = Vec<i64>;

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub ty: LieType,
    pub rank: usize,
    /// Inner products of simple roots.
    pub gram: Vec<Vec<Q>>,
    /// cartan[i][j] = <α_j, α_i^∨>.
    pub cartan: Vec<Vec<i64>>,
    /// Kac labels k_1..k_r (k_0 = 1 is implicit).
    pub kac: Vec<i64>,
    pub positive: Vec<Root>,
    /// Positive roots followed by their negatives in the same order.
    pub roots: Vec<Root>,
    index: HashMap<Root, usize>,
}

fn gram_and_kac(ty: LieType, n: usize) -> Result<(Vec<Vec<Q>>, Vec<i64>), LieError> {
    let bad = || LieError::InvalidType(ty.letter(), n);
    let ok = match ty {
        LieType::A => (1..=8).contains(&n),
        LieType::B => (2..=8).contains(&n),
        LieType::C => (2..=8).contains(&n),
        LieType::D => (4..=8).contains(&n),
        LieType::E => (6..=8).contains(&n),
        LieType::F => n == 4,
        LieType::G => n == 2,
    };
    if !ok {
        return Err(bad());
    }
    let mut b = vec![vec![Q::zero(); n]; n];
    let link = |b: &mut Vec<Vec<Q>>, i: usize, j: usize, v: Q| {
        b[i][j] = v.clone();
        b[j][i] = v;
    };
    let kac: Vec<i64>;
    match ty {
        LieType::A => {
            for i in 0..n {
                b[i][i] = qi(2);
            }
            for i in 0..n.saturating_sub(1) {
                link(&mut b, i, i + 1, qi(-1));
            }
            kac = vec![1; n];
        }
        LieType::B => {
            for i in 0..n {
                b[i][i] = qi(2);
            }
            b[n - 1][n - 1] = qi(1);
            for i in 0..n - 1 {
                link(&mut b, i, i + 1, qi(-1));
            }
            kac = std::iter::once(1).chain(std::iter::repeat_n(2, n - 1)).collect();
        }
        LieType::C => {
            for i in 0..n {
                b[i][i] = qi(1);
            }
            b[n - 1][n - 1] = qi(2);
            for i in 0..n.saturating_sub(2) {
                link(&mut b, i, i + 1, q(-1, 2));
            }
            link(&mut b, n - 2, n - 1, qi(-1));
            kac = std::iter::repeat_n(2, n - 1).chain(std::iter::once(1)).collect();
        }
        LieType::D => {
            for i in 0..n {
                b[i][i] = qi(2);
            }
            for i in 0..n - 2 {
                link(&mut b, i, i + 1, qi(-1));
            }
            link(&mut b, n - 3, n - 1, qi(-1));
            kac = std::iter::once(1)
                .chain(std::iter::repeat_n(2, n - 3))
                .chain([1, 1])
                .collect();
        }
        LieType::E => {
            for i in 0..n {
                b[i][i] = qi(2);
            }
            for i in 0..n - 2 {
                link(&mut b, i, i + 1, qi(-1));
            }
            link(&mut b, 2, n - 1, qi(-1));
            kac = match n {
                6 => vec![1, 2, 3, 2, 1, 2],
                7 => vec![2, 3, 4, 3, 2, 1, 2],
                _ => vec![2, 4, 6, 5, 4, 3, 2, 3],
            };
        }
        LieType::F => {
            // α1, α2 short; α3, α4 long; double bond between α2 and α3
            b = vec![
                vec![qi(1), q(-1, 2), qi(0), qi(0)],
                vec![q(-1, 2), qi(1), qi(-1), qi(0)],
                vec![qi(0), qi(-1), qi(2), qi(-1)],
                vec![qi(0), qi(0), qi(-1), qi(2)],
            ];
            kac = vec![2, 4, 3, 2];
        }
        LieType::G => {
            b = vec![vec![q(2, 3), qi(-1)], vec![qi(-1), qi(2)]];
            kac = vec![3, 2];
        }
    }
    Ok((b, kac))
}

impl RootSystem {
    pub fn new(ty: LieType, rank: usize) -> Result<Self, LieError> {
        let (gram, kac) = gram_and_kac(ty, rank)?;
        let n = rank;
        let cartan: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (qi(2) * &gram[i][j] / &gram[i][i]).to_integer().to_i64().unwrap())
                    .collect()
            })
            .collect();
        let mut rs = RootSystem {
            ty,
            rank,
            gram,
            cartan,
            kac,
            positive: Vec::new(),
            roots: Vec::new(),
            index: HashMap::new(),
        };
        // Grow positive roots by root strings.
        let simple: Vec<Root> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        let mut pos: std::collections::HashSet<Root> = simple.iter().cloned().collect();
        let mut layer = simple;
        while !layer.is_empty() {
            let mut next = Vec::new();
            for r in &layer {
                for i in 0..n {
                    let mut p = 0;
                    loop {
                        let mut rr = r.clone();
                        rr[i] -= p + 1;
                        if pos.contains(&rr) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let qq = p - rs.coroot_pairing(r, i);
                    if qq > 0 {
                        let mut rn = r.clone();
                        rn[i] += 1;
                        if pos.insert(rn.clone()) {
                            next.push(rn);
                        }
                    }
                }
            }
            layer = next;
        }
        let mut pos: Vec<Root> = pos.into_iter().collect();
        pos.sort_by(|a, b| {
            let ha: i64 = a.iter().sum();
            let hb: i64 = b.iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        rs.roots = pos.clone();
        rs.roots.extend(pos.iter().map(|r| r.iter().map(|x| -x).collect::<Root>()));
        rs.positive = pos;
        rs.index = rs.roots.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        Ok(rs)
    }

    pub fn inner(&self, a: &[i64], b: &[i64]) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rank {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                if b[j] != 0 && !self.gram[i][j].is_zero() {
                    s += &self.gram[i][j] * Q::from_integer((a[i] * b[j]).into());
                }
            }
        }
        s
    }

    /// <r, α_i^∨> = 2(r, α_i)/(α_i, α_i).
    pub fn coroot_pairing(&self, r: &[i64], i: usize) -> i64 {
        let mut s = Q::zero();
        for j in 0..self.rank {
            s += &self.gram[j][i] * Q::from_integer(r[j].into());
        }
        (qi(2) * s / &self.gram[i][i]).to_integer().to_i64().unwrap()
    }

    pub fn root_index(&self, r: &[i64]) -> Option<usize> {
        self.index.get(r).copied()
    }

    pub fn is_root(&self, r: &[i64]) -> bool {
        self.index.contains_key(r)
    }

    pub fn highest_root(&self) -> &Root {
        self.positive.last().unwrap()
    }

    pub fn coxeter_number(&self) -> i64 {
        1 + self.kac.iter().sum::<i64>()
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    /// Simple reflection s_i applied to a root.
    pub fn reflect(&self, r: &[i64], i: usize) -> Root {
        let c = self.coroot_pairing(r, i);
        let mut out = r.to_vec();
        out[i] -= c;
        out
    }

    pub fn is_long(&self, r: &[i64]) -> bool {
        self.inner(r, r) == qi(2)
    }

    /// Cartan matrix determinant, used to count the fundamental group.
    pub fn cartan_det(&self) -> Q {
        let m: Vec<Vec<Q>> = self
            .cartan
            .iter()
            .map(|r| r.iter().map(|&x| qi(x)).collect())
            .collect();
        crate::exact::linear::det(&m)
    }
}

/// X/Y label digits: simple root i repeated m_i times.
pub fn root_label(r: &[i64]) -> String {
    let neg = r.iter().any(|&x| x < 0);
    let mut s = String::from(if neg { "Y" } else { "X" });
    for (i, &m) in r.iter().enumerate() {
        for _ in 0..m.abs() {
            s.push_str(&(i + 1).to_string());
        }
    }
    s
}

/// Simple Lie algebra with basis H_1..H_r (simple coroots) followed by E_α for
/// every root, in `RootSystem::roots` order.
#[derive(Debug)]
pub struct LieAlgebra {
    pub rs: RootSystem,
    dim: usize,
    /// Structure constants: table[i * dim + j] lists (k, c) with [b_i, b_j] = Σ c b_k.
    table: Vec<Vec<(usize, i64)>>,
    form_h: Vec<Vec<Q>>,
}

pub type Algebra = Arc<LieAlgebra>;

impl LieAlgebra {
    pub fn new(rs: RootSystem) -> Self {
        let r = rs.rank;
        let dim = r + rs.roots.len();
        let n = structure_constants(&rs);
        let form_h = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| qi(4) * &rs.gram[i][j] / (&rs.gram[i][i] * &rs.gram[j][j]))
                    .collect()
            })
            .collect();
        let mut alg = LieAlgebra {
            rs,
            dim,
            table: vec![Vec::new(); dim * dim],
            form_h,
        };
        for i in 0..dim {
            for j in 0..dim {
                alg.table[i * dim + j] = alg.bracket_basis_raw(i, j, &n);
            }
        }
        alg
    }

    pub fn build(ty: LieType, rank: usize) -> Result<Algebra, LieError> {
        Ok(Arc::new(LieAlgebra::new(RootSystem::new(ty, rank)?)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rs.rank
    }

    pub fn is_cartan(&self, i: usize) -> bool {
        i < self.rs.rank
    }

    /// Root of a root-vector basis index.
    pub fn root_of(&self, i: usize) -> Option<&Root> {
        if i < self.rs.rank {
            None
        } else {
            Some(&self.rs.roots[i - self.rs.rank])
        }
    }

    pub fn root_basis(&self, r: &[i64]) -> Option<usize> {
        self.rs.root_index(r).map(|k| k + self.rs.rank)
    }

    /// Coroot H_α written on the simple coroots.
    pub fn coroot(&self, a: &[i64]) -> Vec<(usize, i64)> {
        let la = self.rs.inner(a, a);
        (0..self.rs.rank)
            .filter(|&i| a[i] != 0)
            .map(|i| {
                let c = Q::from_integer(a[i].into()) * &self.rs.gram[i][i] / &la;
                (i, c.to_integer().to_i64().unwrap())
            })
            .collect()
    }

    fn bracket_basis_raw(&self, i: usize, j: usize, n: &HashMap<(usize, usize), i64>) -> Vec<(usize, i64)> {
        let r = self.rs.rank;
        if i < r && j < r {
            return Vec::new();
        }
        if i < r {
            let c = self.rs.coroot_pairing(&self.rs.roots[j - r], i);
            return if c != 0 { vec![(j, c)] } else { Vec::new() };
        }
        if j < r {
            let c = self.rs.coroot_pairing(&self.rs.roots[i - r], j);
            return if c != 0 { vec![(i, -c)] } else { Vec::new() };
        }
        let a = &self.rs.roots[i - r];
        let b = &self.rs.roots[j - r];
        let s: Root = a.iter().zip(b).map(|(x, y)| x + y).collect();
        if s.iter().all(|&x| x == 0) {
            return self.coroot(a);
        }
        match self.rs.root_index(&s) {
            Some(k) => vec![(k + r, n[&(i - r, j - r)])],
            None => Vec::new(),
        }
    }

    /// [b_i, b_j] as integer combination of basis vectors.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, i64)] {
        &self.table[i * self.dim + j]
    }

    /// Structure constant N_{α,β} for roots with α+β a root.
    pub fn n_const(&self, a: &[i64], b: &[i64]) -> Option<i64> {
        let i = self.root_basis(a)?;
        let j = self.root_basis(b)?;
        self.bracket_basis(i, j).first().map(|&(_, c)| c).filter(|_| {
            let s: Root = a.iter().zip(b).map(|(x, y)| x + y).collect();
            self.rs.is_root(&s)
        })
    }

    /// Invariant form on basis vectors.
    pub fn form_basis(&self, i: usize, j: usize) -> Q {
        let r = self.rs.rank;
        if i < r && j < r {
            return self.form_h[i][j].clone();
        }
        if i < r || j < r {
            return Q::zero();
        }
        let a = &self.rs.roots[i - r];
        let b = &self.rs.roots[j - r];
        if a.iter().zip(b).all(|(x, y)| x + y == 0) {
            qi(2) / self.rs.inner(a, a)
        } else {
            Q::zero()
        }
    }

    /// Index of the basis vector dual to b_i under the form (up to scale).
    pub fn dual_index(&self, i: usize) -> usize {
        let r = self.rs.rank;
        if i < r {
            i
        } else {
            let k = i - r;
            let np = self.rs.positive.len();
            if k < np {
                k + np + r
            } else {
                k - np + r
            }
        }
    }

    pub fn label(&self, i: usize) -> String {
        if i < self.rs.rank {
            format!("H{}", i + 1)
        } else {
            root_label(&self.rs.roots[i - self.rs.rank])
        }
    }

    /// Inverse of `label`: "H2", "X12234", "Y1".
    pub fn parse_label(&self, s: &str) -> Result<usize, LieError> {
        let bad = || LieError::UnknownLabel(s.to_string());
        let s = s.trim();
        let (head, digits) = s.split_at(1.min(s.len()));
        if head == "H" {
            let k: usize = digits.parse().map_err(|_| bad())?;
            if k == 0 || k > self.rs.rank {
                return Err(bad());
            }
            return Ok(k - 1);
        }
        let sign = match head {
            "X" => 1,
            "Y" => -1,
            _ => return Err(bad()),
        };
        let mut r = vec![0i64; self.rs.rank];
        for ch in digits.chars() {
            let d = ch.to_digit(10).ok_or_else(bad)? as usize;
            if d == 0 || d > self.rs.rank {
                return Err(bad());
            }
            r[d - 1] += sign;
        }
        self.root_basis(&r).ok_or_else(bad)
    }

    /// Sum over all basis triples of the Jacobi residual count; zero means the identity holds.
    pub fn jacobi_violations(&self) -> usize {
        let d = self.dim;
        let mut bad = 0;
        let mut acc: Vec<i64> = vec![0; d];
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let mut touched = Vec::new();
                    for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                        for &(m, c1) in self.bracket_basis(y, z) {
                            for &(t, c2) in self.bracket_basis(x, m) {
                                acc[t] += c1 * c2;
                                touched.push(t);
                            }
                        }
                    }
                    if touched.iter().any(|&t| acc[t] != 0) {
                        bad += 1;
                    }
                    for t in touched {
                        acc[t] = 0;
                    }
                }
            }
        }
        bad
    }

    /// Ad-invariance residual count: (b_i|[b_j,b_k]) = ([b_i,b_j]|b_k).
    pub fn invariance_violations(&self) -> usize {
        let d = self.dim;
        let mut bad = 0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let lhs: Q = self
                        .bracket_basis(j, k)
                        .iter()
                        .map(|&(m, c)| self.form_basis(i, m) * qi(c))
                        .sum();
                    let rhs: Q = self
                        .bracket_basis(i, j)
                        .iter()
                        .map(|&(m, c)| self.form_basis(m, k) * qi(c))
                        .sum();
                    if lhs != rhs {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    pub fn bracket<C: Ring>(&self, x: &LieElement<C>, y: &LieElement<C>) -> LieElement<C> {
        let mut out: BTreeMap<usize, C> = BTreeMap::new();
        for (&i, a) in &x.coeffs {
            for (&j, b) in &y.coeffs {
                let t = self.bracket_basis(i, j);
                if t.is_empty() {
                    continue;
                }
                let ab = a.mul(b);
                for &(k, c) in t {
                    let v = ab.scale(&qi(c));
                    match out.get_mut(&k) {
                        Some(e) => *e = e.add(&v),
                        None => {
                            out.insert(k, v);
                        }
                    }
                }
            }
        }
        LieElement::from_map(out)
    }

    pub fn form<C: Ring>(&self, x: &LieElement<C>, y: &LieElement<C>, zero: &C) -> C {
        let mut s = zero.clone();
        for (&i, a) in &x.coeffs {
            let j = self.dual_index(i);
            if i < self.rs.rank {
                for (&jj, b) in y.coeffs.range(..self.rs.rank) {
                    let f = self.form_basis(i, jj);
                    if !f.is_zero() {
                        s = s.add(&a.mul(b).scale(&f));
                    }
                }
            } else if let Some(b) = y.coeffs.get(&j) {
                s = s.add(&a.mul(b).scale(&self.form_basis(i, j)));
            }
        }
        s
    }

    pub fn format<C: Ring + fmt::Display>(&self, x: &LieElement<C>) -> String {
        if x.coeffs.is_empty() {
            return "0".into();
        }
        x.coeffs
            .iter()
            .map(|(&i, c)| format!("({c})*{}", self.label(i)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Parse "X1 + X3 - 2*Y24 + 1/2*H1" into a rational element.
    pub fn parse_element(&self, s: &str) -> Result<LieElement<Q>, LieError> {
        let mut out = LieElement::zero();
        let bad = || LieError::UnknownLabel(s.to_string());
        let text = s.replace('-', "+-");
        for term in text.split('+').map(str::trim).filter(|t| !t.is_empty()) {
            let (neg, t) = match term.strip_prefix('-') {
                Some(t) => (true, t.trim()),
                None => (false, term),
            };
            let (coef, lab) = match t.rsplit_once('*') {
                Some((c, l)) => (crate::exact::rational::parse_q(c).map_err(|_| bad())?, l.trim()),
                None => (Q::one(), t),
            };
            let coef = if neg { -coef } else { coef };
            let idx = self.parse_label(lab)?;
            out.add_term(idx, coef);
        }
        Ok(out)
    }
}

/// Structure constants by the extraspecial-pair algorithm, all extraspecial signs +.
fn structure_constants(rs: &RootSystem) -> HashMap<(usize, usize), i64> {
    let np = rs.positive.len();
    let height = |r: &Root| r.iter().sum::<i64>();
    let add = |a: &Root, b: &Root| -> Root { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let sub = |a: &Root, b: &Root| -> Root { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let neg = |a: &Root| -> Root { a.iter().map(|x| -x).collect() };
    let is_pos = |r: &Root| rs.root_index(r).map(|k| k < np).unwrap_or(false);
    let len2 = |r: &Root| rs.inner(r, r);
    // p: largest k with b - k a a root
    let pcoef = |a: &Root, b: &Root| {
        let mut p = 0;
        loop {
            let t: Root = b.iter().zip(a).map(|(y, x)| y - (p + 1) * x).collect();
            if rs.is_root(&t) {
                p += 1;
            } else {
                return p;
            }
        }
    };
    let mut ext: HashMap<Root, (Root, Root)> = HashMap::new();
    for xi in &rs.positive {
        if height(xi) == 1 {
            continue;
        }
        for a in &rs.positive {
            let b = sub(xi, a);
            if is_pos(&b) {
                ext.insert(xi.clone(), (a.clone(), b));
                break;
            }
        }
    }
    let mut pairs: Vec<(Root, Root)> = Vec::new();
    for (i, a) in rs.positive.iter().enumerate() {
        for b in &rs.positive[i + 1..] {
            if rs.is_root(&add(a, b)) {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    let idx = |r: &Root| rs.root_index(r).unwrap();
    pairs.sort_by_key(|(a, b)| (height(&add(a, b)), idx(a)));

    let mut n: HashMap<(Root, Root), Q> = HashMap::new();
    fn get_n(
        rs: &RootSystem,
        n: &HashMap<(Root, Root), Q>,
        a: &Root,
        b: &Root,
        np: usize,
    ) -> Q {
        if let Some(v) = n.get(&(a.clone(), b.clone())) {
            return v.clone();
        }
        let is_pos = |r: &Root| rs.root_index(r).map(|k| k < np).unwrap_or(false);
        let neg = |a: &Root| -> Root { a.iter().map(|x| -x).collect() };
        let c: Root = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let (ap, bp) = (is_pos(a), is_pos(b));
        if ap && bp {
            return -n[&(b.clone(), a.clone())].clone();
        }
        if !ap && !bp {
            return -get_n(rs, n, &neg(a), &neg(b), np);
        }
        let g = neg(&c);
        let l = |r: &Root| rs.inner(r, r);
        if is_pos(b) == is_pos(&g) {
            l(&c) / l(a) * get_n(rs, n, b, &g, np)
        } else {
            l(&c) / l(b) * get_n(rs, n, &g, a, np)
        }
    }
    for (a, b) in &pairs {
        let xi = add(a, b);
        let p = pcoef(a, b);
        let (z, e) = ext[&xi].clone();
        if (&z, &e) == (a, b) {
            n.insert((a.clone(), b.clone()), qi(p + 1));
            n.insert((b.clone(), a.clone()), qi(-(p + 1)));
            continue;
        }
        let mut t = Q::zero();
        let bz = sub(b, &z);
        if rs.is_root(&bz) {
            t += get_n(rs, &n, b, &neg(&z), np) * get_n(rs, &n, a, &neg(&e), np) / len2(&bz);
        }
        let az = sub(a, &z);
        if rs.is_root(&az) {
            t += get_n(rs, &n, &neg(&z), a, np) * get_n(rs, &n, b, &neg(&e), np) / len2(&az);
        }
        let val = len2(&xi) / &n[&(z.clone(), e.clone())] * t;
        n.insert((a.clone(), b.clone()), val.clone());
        n.insert((b.clone(), a.clone()), -val);
    }
    let mut full = HashMap::new();
    for (i, a) in rs.roots.iter().enumerate() {
        for (j, b) in rs.roots.iter().enumerate() {
            if rs.is_root(&add(a, b)) {
                let v = get_n(rs, &n, a, b, np);
                assert!(v.is_integer(), "non-integral structure constant");
                full.insert((i, j), v.to_integer().to_i64().unwrap());
            }
        }
    }
    full
}

/// Sparse element of the algebra with coefficients in a ring. No stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct LieElement<C> {
    pub coeffs: BTreeMap<usize, C>,
}

impl<C: Ring> LieElement<C> {
    pub fn zero() -> Self {
        LieElement {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_map(m: BTreeMap<usize, C>) -> Self {
        LieElement {
            coeffs: m.into_iter().filter(|(_, v)| !v.vanishes()).collect(),
        }
    }

    pub fn basis(i: usize, one: C) -> Self {
        let mut m = BTreeMap::new();
        m.insert(i, one);
        LieElement::from_map(m)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&C> {
        self.coeffs.get(&i)
    }

    pub fn add_term(&mut self, i: usize, c: C) {
        let v = match self.coeffs.remove(&i) {
            Some(e) => e.add(&c),
            None => c,
        };
        if !v.vanishes() {
            self.coeffs.insert(i, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (&i, c) in &o.coeffs {
            r.add_term(i, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        LieElement {
            coeffs: self.coeffs.iter().map(|(&i, c)| (i, c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        LieElement::from_map(self.coeffs.iter().map(|(&i, v)| (i, v.scale(c))).collect())
    }

    pub fn mul_coeff(&self, c: &C) -> Self {
        LieElement::from_map(self.coeffs.iter().map(|(&i, v)| (i, v.mul(c))).collect())
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> LieElement<D> {
        LieElement::from_map(self.coeffs.iter().map(|(&i, v)| (i, f(v))).collect())
    }
}

impl LieElement<Q> {
    pub fn lift<D: Ring>(&self, one: &D) -> LieElement<D> {
        self.map(|c| one.scale(c))
    }
}
