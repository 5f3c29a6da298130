use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::rational::{fmt_q, parse_q, Q};
use super::{AlgebraError, Ring};

/// Ordered list of variable names shared by every polynomial of a ring.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct VarSet {
    names: Vec<String>,
}

pub type Vars = Arc<VarSet>;

impl VarSet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Vars {
        Arc::new(VarSet {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then the larger exponent on the earlier variable wins.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weighted_degree(&self, w: &[i64]) -> i64 {
        self.0.iter().zip(w).map(|(&e, &w)| e as i64 * w).sum()
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with rational coefficients. No zero coefficient is stored.
#[derive(Clone, Debug)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.terms == other.terms
    }
}

impl Poly {
    pub fn zero(vars: &Vars) -> Self {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Poly::constant(vars, Q::one())
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Poly::monomial(vars, Monomial(e), Q::one())
    }

    pub fn var_named(vars: &Vars, name: &str) -> Result<Self, AlgebraError> {
        let i = vars
            .index(name)
            .ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))?;
        Ok(Poly::var(vars, i))
    }

    pub fn monomial(vars: &Vars, m: Monomial, c: Q) -> Self {
        assert_eq!(m.0.len(), vars.len(), "exponent vector length");
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Poly::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn same_ring(&self, o: &Poly) -> bool {
        Arc::ptr_eq(&self.vars, &o.vars) || self.vars == o.vars
    }

    fn check(&self, o: &Poly) -> Result<(), AlgebraError> {
        if self.same_ring(o) {
            Ok(())
        } else {
            Err(AlgebraError::VariableMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&Monomial::one(self.nvars()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// The value of a constant polynomial.
    pub fn as_constant(&self) -> Option<Q> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn checked_add(&self, o: &Poly) -> Result<Poly, AlgebraError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn checked_sub(&self, o: &Poly) -> Result<Poly, AlgebraError> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), -c.clone());
        }
        Ok(r)
    }

    pub fn checked_mul(&self, o: &Poly) -> Result<Poly, AlgebraError> {
        self.check(o)?;
        let mut r = Poly::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one(&self.vars);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn diff(&self, i: usize) -> Poly {
        let mut r = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                r.add_term(m2, c * Q::from_integer(e.into()));
            }
        }
        r
    }

    pub fn diff_named(&self, name: &str) -> Result<Poly, AlgebraError> {
        let i = self
            .vars
            .index(name)
            .ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))?;
        Ok(self.diff(i))
    }

    pub fn eval(&self, pt: &[Q]) -> Q {
        let mut tot = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in pt.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= x;
                }
            }
            tot += t;
        }
        tot
    }

    /// Substitute ring elements for every variable. `zero` fixes the target ring.
    pub fn eval_in<R: Ring>(&self, vals: &[R], zero: &R) -> R {
        assert_eq!(vals.len(), self.nvars(), "substitution arity");
        let mut powers: Vec<Vec<R>> = vals.iter().map(|v| vec![zero.one_like(), v.clone()]).collect();
        let mut tot = zero.clone();
        for (m, c) in &self.terms {
            let mut t = zero.one_like().scale(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&vals[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            tot = tot.add(&t);
        }
        tot
    }

    /// Substitute polynomials (possibly over another ring) for every variable.
    pub fn subst(&self, vals: &[Poly]) -> Poly {
        let target = vals
            .first()
            .map(|p| p.vars.clone())
            .unwrap_or_else(|| self.vars.clone());
        self.eval_in(vals, &Poly::zero(&target))
    }

    /// Reinterpret in a larger ring; `map[i]` is the index of variable i in `vars`.
    pub fn embed(&self, vars: &Vars, map: &[usize]) -> Poly {
        let mut r = Poly::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &x) in m.0.iter().enumerate() {
                e[map[i]] += x;
            }
            r.add_term(Monomial(e), c.clone());
        }
        r
    }

    /// Move to another ring; `map[i]` gives the target index of variable i, or
    /// `None` when variable i must not occur.
    pub fn restrict(&self, vars: &Vars, map: &[Option<usize>]) -> Option<Poly> {
        let mut r = Poly::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &x) in m.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                e[map[i]?] += x;
            }
            r.add_term(Monomial(e), c.clone());
        }
        Some(r)
    }

    /// Coefficients of x_i^0, x_i^1, ... as polynomials free of x_i.
    pub fn coefficients_in(&self, i: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(&self.vars); self.degree_in(i) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.0[i] as usize;
            let mut m2 = m.clone();
            m2.0[i] = 0;
            out[e].add_term(m2, c.clone());
        }
        out
    }

    pub fn is_weighted_homogeneous(&self, w: &[i64], deg: i64) -> bool {
        self.terms.keys().all(|m| m.weighted_degree(w) == deg)
    }

    pub fn weighted_degree(&self, w: &[i64]) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.weighted_degree(w));
        let d = it.next()?;
        if it.all(|x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.vars);
        while let Some((m, c)) = rem.leading() {
            if !lm.divides(m) {
                return None;
            }
            let t = Poly::monomial(&self.vars, m.div(&lm), c / &lc);
            rem = &rem - &(&t * d);
            quot = &quot + &t;
        }
        Some(quot)
    }

    /// Exact square root when `self` is the square of a polynomial.
    /// The root with positive leading coefficient is returned.
    pub fn sqrt_exact(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading()?;
        if lm.0.iter().any(|e| e % 2 == 1) {
            return None;
        }
        let c = super::rational::sqrt_q(lc)?;
        let mut root = Poly::monomial(&self.vars, Monomial(lm.0.iter().map(|e| e / 2).collect()), c);
        let (rlm, rlc) = {
            let (m, c) = root.leading().unwrap();
            (m.clone(), c.clone())
        };
        let two_lc = &rlc * Q::from_integer(2.into());
        let mut rem = self - &(&root * &root);
        // Peel one new root term per step, largest monomial first.
        let bound = self.num_terms() * 4 + 16;
        for _ in 0..bound {
            let Some((m, c)) = rem.leading() else {
                return Some(root);
            };
            if !rlm.divides(m) {
                return None;
            }
            let t = Poly::monomial(&self.vars, m.div(&rlm), c / &two_lc);
            if t.leading().map(|(tm, _)| *tm >= rlm).unwrap_or(false) {
                return None;
            }
            let twice_root = root.scale(&Q::from_integer(2.into()));
            rem = &rem - &(&(&twice_root + &t) * &t);
            root = &root + &t;
        }
        None
    }

    /// Gcd of numerators over lcm of denominators; positive.
    pub fn content(&self) -> Q {
        use num_integer::Integer;
        let mut n = num_bigint::BigInt::from(0);
        let mut d = num_bigint::BigInt::from(1);
        for c in self.terms.values() {
            n = n.gcd(c.numer());
            d = d.lcm(c.denom());
        }
        if n == num_bigint::BigInt::from(0) {
            return Q::one();
        }
        Q::new(n, d)
    }

    /// Drop every term whose total degree is at most `deg`.
    pub fn drop_low_degree(&self, deg: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() > deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn to_f64(&self, pt: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = super::rational::to_f64(c);
                for (x, &e) in pt.iter().zip(&m.0) {
                    t *= x.powi(e as i32);
                }
                t
            })
            .sum()
    }

    pub fn parse(vars: &Vars, s: &str) -> Result<Poly, AlgebraError> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
            vars,
        };
        let r = p.sum()?;
        p.ws();
        if p.pos != p.src.len() {
            return Err(AlgebraError::Parse(format!(
                "trailing input at {} in {s:?}",
                p.pos
            )));
        }
        Ok(r)
    }
}

fn fmt_monomial(m: &Monomial, names: &[String]) -> String {
    let parts: Vec<String> = m
        .0
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                names[i].clone()
            } else {
                format!("{}^{}", names[i], e)
            }
        })
        .collect();
    parts.join("*")
}

impl fmt::Display for Poly {
    /// Canonical text: terms in descending graded-lex order, explicit rationals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.vars.names();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mon = fmt_monomial(m, names);
            if mon.is_empty() {
                write!(f, "{}", fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{mon}")?;
            } else {
                write!(f, "{}*{mon}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.checked_add(o).expect("polynomial ring mismatch")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self.checked_sub(o).expect("polynomial ring mismatch")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.checked_mul(o).expect("polynomial ring mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        &self + &o
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        &self - &o
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Ring for Poly {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Q) -> Self {
        Poly::scale(self, c)
    }
    fn vanishes(&self) -> bool {
        Poly::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        Poly::zero(&self.vars)
    }
    fn one_like(&self) -> Self {
        Poly::one(&self.vars)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> AlgebraError {
        AlgebraError::Parse(format!(
            "{what} at byte {} of {:?}",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn sum(&mut self) -> Result<Poly, AlgebraError> {
        let mut neg = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            neg = true;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let mut acc = self.product()?;
        if neg {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.product()?;
                    acc = acc + t;
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.product()?;
                    acc = acc - t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Poly, AlgebraError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let t = self.power()?;
                    acc = acc * t;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let t = self.power()?;
                    let c = t.as_constant().ok_or_else(|| self.err("division by non-constant"))?;
                    if c.is_zero() {
                        return Err(AlgebraError::DivisionByZero);
                    }
                    acc = acc.scale(&(Q::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly, AlgebraError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("bad exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let r = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(Poly::constant(self.vars, parse_q(s)?))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Poly::var_named(self.vars, s)
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
