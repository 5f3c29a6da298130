//! Gradations of type s, the grading element ρ and class consistency checks.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::exact::linear::{self, Matrix};
use crate::exact::{qi, Q};
use crate::lie::{LieAlgebra, LieElement, LieType, RootSystem};
use crate::registry::ConjugacyClassRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradingError {
    #[error("weight vector has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("weights must be non-negative")]
    Negative,
    #[error("weights {0:?} are not relatively prime")]
    NotCoprime(Vec<i64>),
    #[error("ad rho has a non-integral eigenvalue")]
    NonIntegral,
}

/// Gradation of type s = (s_0, ..., s_r).
#[derive(Clone, Debug)]
pub struct Gradation {
    pub s: Vec<i64>,
    pub order: i64,
    /// δ_s on the simple coroot basis, so ρ = N_s δ_s.
    pub delta: Vec<Q>,
    pub rho: LieElement<Q>,
    /// Grade of every basis vector of the algebra.
    pub grades: Vec<i64>,
}

impl Gradation {
    pub fn new(g: &LieAlgebra, s: &[i64]) -> Result<Self, GradingError> {
        let rs = &g.rs;
        let r = rs.rank;
        if s.len() != r + 1 {
            return Err(GradingError::WrongLength {
                expected: r + 1,
                got: s.len(),
            });
        }
        if s.iter().any(|&x| x < 0) {
            return Err(GradingError::Negative);
        }
        if s.iter().fold(0i64, |a, &b| a.gcd(&b)) != 1 {
            return Err(GradingError::NotCoprime(s.to_vec()));
        }
        let order = s[0] + rs.kac.iter().zip(&s[1..]).map(|(k, x)| k * x).sum::<i64>();
        // α_i(ρ) = s_i: Σ_j c_j <α_i, H_j> = s_i
        let m: Matrix = (0..r)
            .map(|i| (0..r).map(|j| qi(rs.cartan[j][i])).collect())
            .collect();
        let rhs: Vec<Q> = s[1..].iter().map(|&x| qi(x)).collect();
        let c = linear::solve(&m, &rhs).expect("Cartan matrix is invertible");
        let mut rho = LieElement::zero();
        for (j, v) in c.iter().enumerate() {
            rho.add_term(j, v.clone());
        }
        let delta = c.iter().map(|v| v / qi(order)).collect();
        let mut grades = vec![0; g.dim()];
        for (k, root) in rs.roots.iter().enumerate() {
            grades[r + k] = root.iter().zip(&s[1..]).map(|(m, x)| m * x).sum();
        }
        // ad ρ must act on E_α by the grade
        for (k, root) in rs.roots.iter().enumerate() {
            let ev: Q = c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * qi(rs.coroot_pairing(root, j)))
                .sum();
            if ev != qi(grades[r + k]) || !ev.is_integer() {
                return Err(GradingError::NonIntegral);
            }
        }
        Ok(Gradation {
            s: s.to_vec(),
            order,
            delta,
            rho,
            grades,
        })
    }

    pub fn principal(g: &LieAlgebra) -> Self {
        Gradation::new(g, &vec![1; g.rank() + 1]).expect("principal gradation")
    }

    pub fn grade(&self, i: usize) -> i64 {
        self.grades[i]
    }

    pub fn max_grade(&self) -> i64 {
        self.grades.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    pub gradation: Gradation,
    /// grade -> basis indices of g_k
    pub subspaces: BTreeMap<i64, Vec<usize>>,
}

impl GradedDecomposition {
    pub fn new(g: &LieAlgebra, grad: Gradation) -> Self {
        let mut subspaces: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for i in 0..g.dim() {
            subspaces.entry(grad.grades[i]).or_default().push(i);
        }
        GradedDecomposition {
            gradation: grad,
            subspaces,
        }
    }

    pub fn dim(&self, k: i64) -> usize {
        self.subspaces.get(&k).map(|v| v.len()).unwrap_or(0)
    }

    pub fn basis(&self, k: i64) -> &[usize] {
        self.subspaces.get(&k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn character(&self) -> Character {
        Character(
            self.subspaces
                .iter()
                .map(|(&k, v)| (k, v.len() as i64))
                .collect(),
        )
    }
}

/// Laurent polynomial Σ c_k q^k with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character(pub BTreeMap<i64, i64>);

impl Character {
    pub fn coeff(&self, k: i64) -> i64 {
        self.0.get(&k).copied().unwrap_or(0)
    }

    pub fn at_one(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        self.0.iter().all(|(&k, &c)| self.coeff(-k) == c)
    }

    /// Pr_w from (1 − q)χ: multiplicity of k is dim g_{−k} − dim g_{−k−1}.
    pub fn conformal_weights(&self) -> Result<Vec<i64>, GradingError> {
        let top = self.0.keys().map(|k| k.abs()).max().unwrap_or(0);
        let mut out = Vec::new();
        for k in 1..=top + 1 {
            let m = self.coeff(-k) - self.coeff(-k - 1);
            if m < 0 {
                return Err(GradingError::NonIntegral);
            }
            out.extend(std::iter::repeat_n(k, m as usize));
        }
        Ok(out)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .rev()
            .map(|(&k, &c)| match k {
                0 => format!("{c}"),
                _ => format!("{c}*q^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Integer coefficients (low to high) of the cyclotomic polynomial Φ_n.
pub fn cyclotomic(n: usize) -> Vec<i64> {
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic(d));
        }
    }
    num
}

fn poly_div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut a = a.to_vec();
    let mut q = vec![0; a.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let c = a[i + b.len() - 1] / b[b.len() - 1];
        q[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            a[i + j] -= c * bj;
        }
    }
    q
}

fn poly_rem(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut a = a.to_vec();
    if a.len() < b.len() {
        return a;
    }
    for i in (0..=a.len() - b.len()).rev() {
        let c = a[i + b.len() - 1] / b[b.len() - 1];
        for (j, &bj) in b.iter().enumerate() {
            a[i + j] -= c * bj;
        }
    }
    a.truncate(b.len() - 1);
    a
}

/// Type of g_0(s) read from the extended Dynkin diagram with the s ≠ 0 nodes removed.
pub fn g0_type(rs: &RootSystem, s: &[i64]) -> String {
    let r = rs.rank;
    // extended simple roots: α_0 = −θ, then α_1..α_r
    let theta = rs.highest_root().clone();
    let mut ext: Vec<Vec<i64>> = vec![theta.iter().map(|x| -x).collect()];
    for i in 0..r {
        ext.push((0..r).map(|j| i64::from(i == j)).collect());
    }
    let kept: Vec<usize> = (0..=r).filter(|&i| s[i] == 0).collect();
    let center = s.iter().filter(|&&x| x != 0).count() as i64 - 1;
    let mut seen = vec![false; r + 1];
    let mut parts: Vec<(char, usize)> = Vec::new();
    for &start in &kept {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let a = comp[k];
            for &b in &kept {
                if !seen[b] && !rs.inner(&ext[a], &ext[b]).is_zero() {
                    seen[b] = true;
                    comp.push(b);
                }
            }
            k += 1;
        }
        parts.push(classify_component(rs, &ext, &comp));
    }
    format_g0(center, &parts)
}

fn classify_component(rs: &RootSystem, ext: &[Vec<i64>], comp: &[usize]) -> (char, usize) {
    let n = comp.len();
    let lens: Vec<Q> = comp.iter().map(|&i| rs.inner(&ext[i], &ext[i])).collect();
    let mut degree = vec![0; n];
    let mut multiple = false;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let ip = rs.inner(&ext[comp[a]], &ext[comp[b]]);
            if !ip.is_zero() {
                degree[a] += 1;
                let bond = qi(4) * &ip * &ip / (&lens[a] * &lens[b]);
                if bond > qi(1) {
                    multiple = true;
                }
            }
        }
    }
    let branch = degree.iter().any(|&d| d > 2);
    if !multiple && !branch {
        return ('A', n);
    }
    if branch {
        // D_n has two arms of length one at the branch node
        let leaves = degree.iter().filter(|&&d| d == 1).count();
        let short_arms = comp
            .iter()
            .enumerate()
            .filter(|&(a, _)| degree[a] == 1)
            .filter(|&(a, _)| {
                (0..n).any(|b| {
                    degree[b] == 3 && !rs.inner(&ext[comp[a]], &ext[comp[b]]).is_zero()
                })
            })
            .count();
        if leaves == 3 && short_arms >= 2 {
            return ('D', n);
        }
        return ('E', n);
    }
    if n == 2 {
        let ip = rs.inner(&ext[comp[0]], &ext[comp[1]]);
        let bond = qi(4) * &ip * &ip / (&lens[0] * &lens[1]);
        if bond == qi(3) {
            return ('G', 2);
        }
        return ('B', 2);
    }
    if n == 4 && lens.iter().filter(|l| **l == lens[0]).count() == 2 {
        let ends_differ = degree.iter().enumerate().filter(|(_, &d)| d == 1).count() == 2;
        if ends_differ {
            let long = lens.iter().max().unwrap().clone();
            let n_long = lens.iter().filter(|l| **l == long).count();
            if n_long == 2 {
                return ('F', 4);
            }
        }
    }
    let long = lens.iter().max().unwrap().clone();
    let n_long = lens.iter().filter(|l| **l == long).count();
    if n_long == n - 1 {
        ('B', n)
    } else {
        ('C', n)
    }
}

fn format_g0(center: i64, parts: &[(char, usize)]) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut order: Vec<(usize, String)> = Vec::new();
    for &(t, n) in parts {
        let name = match t {
            'A' => format!("su{}", n + 1),
            'B' => format!("so{}", 2 * n + 1),
            'C' => format!("sp{}", 2 * n),
            'D' => format!("so{}", 2 * n),
            'E' => format!("e{n}"),
            'F' => "f4".to_string(),
            _ => "g2".to_string(),
        };
        if !counts.contains_key(&name) {
            order.push((if t == 'A' { n } else { 100 + n }, name.clone()));
        }
        *counts.entry(name).or_default() += 1;
    }
    order.sort();
    let mut terms = Vec::new();
    let pow = |name: &str, k: usize| {
        if k == 1 {
            name.to_string()
        } else {
            format!("{name}^{k}")
        }
    };
    if center > 0 {
        terms.push(pow("u1", center as usize));
    }
    for (_, name) in order {
        terms.push(pow(&name, counts[&name]));
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Canonical spelling of a g_0 description ("u1^3+su2" -> "u1^3 + su2").
pub fn normalize_g0(s: &str) -> String {
    s.split('+')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub class: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn multiset_minus(a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
    let mut rest = a.to_vec();
    for x in b {
        let p = rest.iter().position(|y| y == x)?;
        rest.remove(p);
    }
    rest.sort();
    Some(rest)
}

/// U(w) = Pr_w − I(w), when I(w) ⊆ Pr_w.
pub fn complement_weights(rec: &ConjugacyClassRecord) -> Option<Vec<i64>> {
    multiset_minus(&rec.weights, &rec.exponents)
}

/// Consistency checks of one class record against its own root data.
/// Failures are collected in the report, never raised.
pub fn validate_class(rec: &ConjugacyClassRecord) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        checks.push(CheckResult { name, passed, detail })
    };
    let rs = match RootSystem::new(rec.algebra, rec.rank) {
        Ok(rs) => rs,
        Err(e) => {
            push("algebra", false, e.to_string());
            return ValidationReport {
                class: rec.label.clone(),
                checks,
            };
        }
    };
    let r = rs.rank;
    push(
        "rank",
        rec.exponents.len() == r && rec.s.len() == r + 1,
        format!("|I(w)| = {}, |s| = {}, rank {r}", rec.exponents.len(), rec.s.len()),
    );
    if rec.s.len() != r + 1 {
        return ValidationReport {
            class: rec.label.clone(),
            checks,
        };
    }
    let n = rec.order;
    let n_s = rec.s[0] + rs.kac.iter().zip(&rec.s[1..]).map(|(k, x)| k * x).sum::<i64>();
    push("order", n_s == n, format!("N_s = {n_s}, N_w = {n}"));
    push("s0", rec.s[0] == 1, format!("s_0 = {}", rec.s[0]));

    // grade multiplicities
    let mut dims: BTreeMap<i64, i64> = BTreeMap::new();
    dims.insert(0, r as i64);
    for root in &rs.roots {
        let gr: i64 = root.iter().zip(&rec.s[1..]).map(|(m, x)| m * x).sum();
        *dims.entry(gr).or_default() += 1;
    }
    let chi = Character(dims.clone());
    let h = rs.coxeter_number();
    let expected = Q::new((r as i64 * h).into(), n.into());
    let d0 = chi.coeff(0);
    let ok_match = chi.coeff(1) == d0 && chi.coeff(-1) == d0 && qi(d0) == expected;
    push(
        "match",
        ok_match,
        format!(
            "dim g(0) = {d0}, dim g(1) = {}, dim g(-1) = {}, rh/N = {expected}",
            chi.coeff(1),
            chi.coeff(-1)
        ),
    );

    // χ(e^{2πi/N}) = Σ_{k∈I(w)} e^{2πik/N}, tested modulo Φ_N
    let trace_ok = if n > 1 {
        let nn = n as usize;
        let mut c = vec![0i64; nn];
        for (&g, &d) in &dims {
            c[g.rem_euclid(n) as usize] += d;
        }
        for &k in &rec.exponents {
            c[k.rem_euclid(n) as usize] -= 1;
        }
        poly_rem(&c, &cyclotomic(nn)).iter().all(|&x| x == 0)
    } else {
        true
    };
    push("trace", trace_ok, format!("character at primitive {n}-th root vs I(w)"));

    let pr = chi.conformal_weights();
    let pr_ok = matches!(&pr, Ok(p) if *p == rec.weights);
    push(
        "weights",
        pr_ok,
        match &pr {
            Ok(p) => format!("regenerated {p:?}, recorded {:?}", rec.weights),
            Err(e) => e.to_string(),
        },
    );

    let count = |v: &[i64], x: i64| v.iter().filter(|&&y| y == x).count();
    let (ce, cw) = (count(&rec.exponents, n - 1), count(&rec.weights, n - 1));
    if multiset_minus(&rec.weights, &rec.exponents).is_none() {
        push("inclusion", false, "I(w) is not contained in Pr_w".into());
    } else {
        push(
            "inclusion",
            ce == cw,
            format!("I(w) in Pr_w; multiplicity of {} is {ce} vs {cw}", n - 1),
        );
    }

    let ends = rec.exponents.contains(&1) && rec.exponents.contains(&(n - 1));
    push("endpoints", ends, format!("1 and {} in I(w)", n - 1));

    match complement_weights(rec) {
        Some(u) => {
            let ok = (0..u.len()).all(|i| u[i] + u[u.len() - 1 - i] == n - 1);
            push("pairing", ok, format!("U(w) = {u:?}, pairs sum to {}", n - 1));
        }
        None => push("pairing", false, "I(w) is not contained in Pr_w".into()),
    }

    let g0 = g0_type(&rs, &rec.s);
    let ok = g0 == normalize_g0(&rec.g0);
    push("g0", ok, format!("diagram gives {g0}, recorded {}", rec.g0));

    ValidationReport {
        class: rec.label.clone(),
        checks,
    }
}

/// Solve [I+, I−] = 2ρ for I− in g_{−1}.
pub fn lowering_partner(
    g: &LieAlgebra,
    dec: &GradedDecomposition,
    ip: &LieElement<Q>,
) -> Option<LieElement<Q>> {
    let src = dec.basis(-1);
    let dst = dec.basis(0);
    let pos: BTreeMap<usize, usize> = dst.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut m = linear::zeros(dst.len(), src.len());
    for (j, &b) in src.iter().enumerate() {
        let img = g.bracket(ip, &LieElement::basis(b, qi(1)));
        for (k, v) in &img.coeffs {
            m[pos[k]][j] = v.clone();
        }
    }
    let rho2 = dec.gradation.rho.scale(&qi(2));
    let rhs: Vec<Q> = dst
        .iter()
        .map(|b| rho2.get(*b).cloned().unwrap_or_else(Q::zero))
        .collect();
    let x = linear::solve(&m, &rhs).ok()?;
    let mut im = LieElement::zero();
    for (j, v) in x.into_iter().enumerate() {
        im.add_term(src[j], v);
    }
    if g.bracket(ip, &im) == rho2 {
        Some(im)
    } else {
        None
    }
}

pub fn is_simply_laced(t: LieType) -> bool {
    t.simply_laced()
}
