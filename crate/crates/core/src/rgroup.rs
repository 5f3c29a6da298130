//! Gauge transformations of the Miura variables along W(g0)-orbits of simple
//! roots, and the finite group they generate on the Cartan chart μ.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::linear::{self, Matrix};
use crate::exact::quadratic::{solve_quadratic_system, Sign};
use crate::exact::rational::{fmt_q, sqrt_q};
use crate::exact::{qi, AlgebraError, Monomial, Poly, RadicalCtx, RadicalElement, Ring, VarSet, Vars, Q};
use crate::frobenius::pencil::MiuraSystem;
use crate::frobenius::{miura_densities, ClassContext, FrobeniusError, PipelineOptions};
use crate::grading::CheckResult;
use crate::lie::{root_label, LieAlgebra, LieElement, Root};
use crate::registry::ConjugacyClassRecord;

pub const DEFAULT_MAX_ELEMENTS: usize = 60_000;

#[derive(Debug, Error)]
pub enum RGroupError {
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0} is not simply laced; its R-group is only attempted with --experimental")]
    Experimental(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("the orbit of {0} admits no nontrivial gauge solution")]
    NoSolution(String),
    #[error("the radical of the {0} solution differs from the chart radical")]
    RadicalMismatch(String),
}

#[derive(Clone, Debug)]
pub struct RGroupOptions {
    pub pipeline: PipelineOptions,
    /// bound on the number of group elements enumerated
    pub max_elements: usize,
    pub experimental: bool,
}

impl Default for RGroupOptions {
    fn default() -> Self {
        RGroupOptions {
            pipeline: PipelineOptions::default(),
            max_elements: DEFAULT_MAX_ELEMENTS,
            experimental: false,
        }
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail: detail.into(),
    }
}

fn coeff_of<C: Ring>(x: &LieElement<C>, i: usize, zero: &C) -> C {
    x.get(i).cloned().unwrap_or_else(|| zero.clone())
}

/// α(q) for q = Σ νᵢ eᵢ, read off [q, E_α].
fn root_form(g: &LieAlgebra, miura: &MiuraSystem, root: &[i64]) -> Poly {
    let e = g.root_basis(root).expect("root");
    let one = Poly::one(&miura.vars);
    let br = g.bracket(&miura.q, &LieElement::basis(e, one));
    coeff_of(&br, e, &Poly::zero(&miura.vars))
}

/// Pairing of a root with the simple coroots: β(H_i) for each i.
fn root_on_coroots(g: &LieAlgebra, root: &[i64]) -> Vec<Q> {
    let e = g.root_basis(root).expect("root");
    (0..g.rank())
        .map(|i| {
            let br = g.bracket(&LieElement::basis(i, qi(1)), &LieElement::basis(e, qi(1)));
            coeff_of(&br, e, &Q::zero())
        })
        .collect()
}

fn reflect_in(g: &LieAlgebra, r: &[i64], beta: &[i64]) -> Root {
    let c = qi(2) * g.rs.inner(r, beta) / g.rs.inner(beta, beta);
    let c = c.to_integer().try_into().unwrap_or(0i64);
    r.iter().zip(beta).map(|(x, y)| x - c * y).collect()
}

fn neg(r: &[i64]) -> Root {
    r.iter().map(|x| -x).collect()
}

fn simple(rank: usize, k: usize) -> Root {
    let mut r = vec![0; rank];
    r[k] = 1;
    r
}

/// Cartan coordinates μ of the Miura variable, with √J the eigenvalue of the
/// su(2) root on q.
pub struct CartanChart {
    pub ctx: Arc<RadicalCtx>,
    /// the positive root of the su(2) summand of g0, if any
    pub root: Option<Root>,
    pub j: Option<Poly>,
    pub mu: Vec<RadicalElement>,
    /// position of H_i among the Miura variables
    h_pos: Vec<usize>,
    /// coroot coordinates of the su(2) coroot H with β(H) = 2
    h_beta: Vec<Q>,
    beta_on: Vec<Q>,
}

impl CartanChart {
    pub fn new(g: &LieAlgebra, miura: &MiuraSystem, g0_roots: &[Root]) -> Result<Self, RGroupError> {
        let r = g.rank();
        let h_pos: Vec<usize> = (0..r)
            .map(|i| miura.basis.iter().position(|&b| b == i).expect("Cartan in g0"))
            .collect();
        let vars = &miura.vars;
        if g0_roots.is_empty() {
            let ctx = RadicalCtx::plain(vars);
            let mu = h_pos.iter().map(|&p| RadicalElement::var(&ctx, p)).collect();
            return Ok(CartanChart {
                ctx,
                root: None,
                j: None,
                mu,
                h_pos,
                h_beta: Vec::new(),
                beta_on: Vec::new(),
            });
        }
        if g0_roots.len() > 1 {
            return Err(RGroupError::Unsupported(format!(
                "g0 has {} positive roots; only a single su(2) summand is handled",
                g0_roots.len()
            )));
        }
        let beta = g0_roots[0].clone();
        let ep = g.root_basis(&beta).expect("root");
        let em = g.root_basis(&neg(&beta)).expect("root");
        let pp = miura.basis.iter().position(|&b| b == ep).expect("g0 root");
        let pm = miura.basis.iter().position(|&b| b == em).expect("g0 root");
        let hb = g.bracket(&LieElement::basis(ep, qi(1)), &LieElement::basis(em, qi(1)));
        let beta_on = root_on_coroots(g, &beta);
        let s: Q = (0..r).map(|i| coeff_of(&hb, i, &Q::zero()) * &beta_on[i]).sum();
        let h_beta: Vec<Q> = (0..r).map(|i| coeff_of(&hb, i, &Q::zero()) * qi(2) / &s).collect();
        let bq = root_form(g, miura, &beta);
        let j = &(&bq * &bq) + &(&Poly::var(vars, pp) * &Poly::var(vars, pm)).scale(&(qi(2) * &s));
        let ctx = RadicalCtx::new(j.clone());
        // μ = q_h + (√J − β(q_h))/2 · H
        let c = RadicalElement::delta(&ctx)
            .sub(&RadicalElement::from_poly(&ctx, bq))
            .scale(&(Q::one() / qi(2)));
        let mu = (0..r)
            .map(|i| RadicalElement::var(&ctx, h_pos[i]).add(&c.scale(&h_beta[i])))
            .collect();
        Ok(CartanChart {
            ctx,
            root: Some(beta),
            j: Some(j),
            mu,
            h_pos,
            h_beta,
            beta_on,
        })
    }

    /// Candidate μ(ν̌) for a transformed point, one per choice of √J(ν̌).
    fn chart_at(&self, nu: &[RadicalElement]) -> Result<Vec<Vec<RadicalElement>>, RGroupError> {
        let r = self.h_pos.len();
        let qh: Vec<RadicalElement> = self.h_pos.iter().map(|&p| nu[p].clone()).collect();
        let Some(j) = &self.j else {
            return Ok(vec![qh]);
        };
        let zero = RadicalElement::zero(&self.ctx);
        let jv = j.eval_in(nu, &zero);
        let bq = (0..r).fold(zero.clone(), |t, i| t.add(&qh[i].scale(&self.beta_on[i])));
        let mut out = Vec::new();
        for l in radical_sqrt(&jv)? {
            let c = l.sub(&bq).scale(&(Q::one() / qi(2)));
            out.push((0..r).map(|i| qh[i].add(&c.scale(&self.h_beta[i]))).collect());
        }
        Ok(out)
    }

    /// Reflection of μ in the su(2) root.
    fn weyl_matrix(&self) -> Option<Matrix> {
        self.root.as_ref()?;
        let r = self.h_pos.len();
        Some(
            (0..r)
                .map(|i| {
                    (0..r)
                        .map(|k| {
                            let d = if i == k { qi(1) } else { qi(0) };
                            d - &self.h_beta[i] * &self.beta_on[k]
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// a + bΔ as a polynomial in the Miura variables and a formal D.
    fn flatten(&self, x: &RadicalElement) -> Option<Poly> {
        if !x.den_factors().is_empty() {
            return None;
        }
        let m = self.ctx.vars().len();
        let mut names = self.ctx.vars().names().to_vec();
        names.push("D".into());
        let ext = VarSet::new(&names);
        let map: Vec<usize> = (0..m).collect();
        let d = Poly::var(&ext, m);
        Some(&x.base().embed(&ext, &map) + &(&x.radical_part().embed(&ext, &map) * &d))
    }

    /// Write each entry of `target` as a rational combination of μ.
    fn linear_in_mu(&self, target: &[RadicalElement]) -> Option<Matrix> {
        let basis: Vec<Poly> = self.mu.iter().map(|x| self.flatten(x)).collect::<Option<_>>()?;
        let mut rows = Vec::new();
        for t in target {
            let row = linear::fit(&self.flatten(t)?, &basis)?;
            let back = row
                .iter()
                .zip(&self.mu)
                .fold(RadicalElement::zero(&self.ctx), |s, (c, m)| s.add(&m.scale(c)));
            if back != *t {
                return None;
            }
            rows.push(row);
        }
        Some(rows)
    }

    /// ∇μᵢ K⁻¹ ∇μⱼ, when every entry is constant.
    pub fn metric(&self, miura: &MiuraSystem) -> Result<Option<Matrix>, AlgebraError> {
        let m = miura.dim();
        let grads: Vec<Vec<RadicalElement>> = self
            .mu
            .iter()
            .map(|x| (0..m).map(|k| x.diff(k)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let r = self.mu.len();
        let mut out = linear::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                let mut t = RadicalElement::zero(&self.ctx);
                for k in 0..m {
                    for l in 0..m {
                        if !miura.kinv[k][l].is_zero() {
                            t = t.add(&grads[i][k].mul(&grads[j][l]).scale(&miura.kinv[k][l]));
                        }
                    }
                }
                match t.as_constant() {
                    Some(c) => out[i][j] = c,
                    None => return Ok(None),
                }
            }
        }
        Ok(Some(out))
    }
}

/// √P for P the square of an affine form.
fn affine_sqrt(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(p.clone());
    }
    let vars = p.vars().clone();
    let n = vars.len();
    let unit = |i: usize, e: u32| {
        let mut m = vec![0; n];
        m[i] = e;
        Monomial(m)
    };
    let l = match (0..n).find(|&i| !p.coeff(&unit(i, 2)).is_zero()) {
        None => Poly::constant(&vars, sqrt_q(&p.constant_term())?),
        Some(i) => {
            let li = sqrt_q(&p.coeff(&unit(i, 2)))?;
            let mut l = Poly::var(&vars, i).scale(&li);
            for k in (0..n).filter(|&k| k != i) {
                let mut m = vec![0; n];
                m[i] = 1;
                m[k] = 1;
                let c = p.coeff(&Monomial(m)) / (qi(2) * &li);
                l = &l + &Poly::var(&vars, k).scale(&c);
            }
            let c = p.coeff(&unit(i, 1)) / (qi(2) * &li);
            &l + &Poly::constant(&vars, c)
        }
    };
    (&l * &l == *p).then_some(l)
}

/// Both roots ±(p + qΔ), with p affine and q constant, of a radical element.
fn radical_sqrt(x: &RadicalElement) -> Result<Vec<RadicalElement>, RGroupError> {
    let fail = || RGroupError::Unsupported(format!("√J of the transformed point is not linear in μ: {x}"));
    if !x.den_factors().is_empty() {
        return Err(fail());
    }
    let ctx = x.ctx();
    let (p_all, q_all) = (x.base(), x.radical_part());
    let j = ctx.square();
    let mut found: Option<(Poly, Q)> = None;
    if q_all.is_zero() {
        if let Some(t) = p_all.div_exact(j).and_then(|t| t.as_constant()) {
            if let Some(qv) = sqrt_q(&t) {
                found = Some((Poly::zero(ctx.vars()), qv));
            }
        }
        if found.is_none() {
            found = affine_sqrt(p_all).map(|p| (p, Q::zero()));
        }
    } else {
        // t = q² solves t²J − tP + Q²/4 = 0 coefficientwise
        let s = (q_all * q_all).scale(&(Q::one() / qi(4)));
        let (m, jm) = j.terms().iter().next().ok_or_else(fail)?;
        let (pm, sm) = (p_all.coeff(m), s.coeff(m));
        let disc = &pm * &pm - qi(4) * jm * &sm;
        if let Some(root) = sqrt_q(&disc) {
            for t in [(&pm + &root) / (qi(2) * jm), (&pm - &root) / (qi(2) * jm)] {
                let Some(qv) = (t.is_positive()).then(|| sqrt_q(&t)).flatten() else {
                    continue;
                };
                let p = q_all.scale(&(Q::one() / (qi(2) * &qv)));
                if &(&p * &p) + &j.scale(&t) == *p_all {
                    found = Some((p, qv));
                    break;
                }
            }
        }
    }
    let (p, qv) = found.ok_or_else(fail)?;
    let l = RadicalElement::from_parts(ctx, p, Poly::constant(ctx.vars(), qv));
    Ok(vec![l.clone(), l.neg()])
}

/// Move a solution from its own radical ring into the chart ring.
fn rebase(x: &RadicalElement, chart: &Arc<RadicalCtx>, label: &str) -> Result<RadicalElement, RGroupError> {
    let mismatch = || RGroupError::RadicalMismatch(label.to_string());
    let b = if x.radical_part().is_zero() {
        Poly::zero(chart.vars())
    } else {
        let own = x.ctx().square();
        let ratio = own.div_exact(chart.square()).and_then(|t| t.as_constant()).ok_or_else(mismatch)?;
        let m = sqrt_q(&ratio).ok_or_else(mismatch)?;
        x.radical_part().scale(&m)
    };
    let den = x.den_factors().to_vec();
    Ok(RadicalElement::from_raw(chart, x.base().clone(), b, den))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// gauge transformation along the orbit of −α_k
    Orbit { orbit: Vec<String> },
    /// Weyl reflection of the su(2) summand of g0
    Weyl,
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub label: String,
    pub kind: GeneratorKind,
    /// ν̌ in the chart ring, one per Miura variable; empty for Weyl generators
    pub nu: Vec<RadicalElement>,
    /// μ ↦ Aμ
    pub matrix: Vec<Vec<i64>>,
}

pub struct RGroupReport {
    pub class: String,
    pub miura_vars: Vec<String>,
    pub chart: CartanChart,
    pub generators: Vec<Generator>,
    pub mu_metric: Option<Matrix>,
    /// None when the enumeration hit the bound
    pub order: Option<usize>,
    pub max_elements: usize,
    /// (i, j, order of R_i R_j)
    pub relations: Vec<(usize, usize, Option<usize>)>,
    /// Coxeter type named by the relations, with the order of its Weyl group
    pub weyl_type: Option<(String, u128)>,
    pub checks: Vec<CheckResult>,
}

type IMat = Vec<i64>;

fn to_imat(m: &Matrix) -> Option<IMat> {
    m.iter()
        .flatten()
        .map(|x| x.is_integer().then(|| x.to_integer().try_into().ok()).flatten())
        .collect()
}

fn imul(a: &[i64], b: &[i64], n: usize) -> IMat {
    let mut c = vec![0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x != 0 {
                for j in 0..n {
                    c[i * n + j] += x * b[k * n + j];
                }
            }
        }
    }
    c
}

fn identity(n: usize) -> IMat {
    (0..n * n).map(|i| i64::from(i % (n + 1) == 0)).collect()
}

/// Order of a matrix, up to `bound`.
pub fn element_order(m: &[i64], n: usize, bound: usize) -> Option<usize> {
    let id = identity(n);
    let mut p = m.to_vec();
    for k in 1..=bound {
        if p == id {
            return Some(k);
        }
        p = imul(&p, m, n);
    }
    None
}

/// Size of the group generated by `gens`, or None past `bound` elements.
pub fn group_order(gens: &[IMat], n: usize, bound: usize) -> Option<usize> {
    let id = identity(n);
    let mut seen: HashSet<IMat> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = imul(&x, g, n);
            if seen.insert(y.clone()) {
                if seen.len() > bound {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen.len())
}

fn grade_of(ctx: &ClassContext, root: &[i64]) -> i64 {
    let g = &ctx.lp.g;
    ctx.lp.dec.gradation.grades[g.root_basis(root).expect("root")]
}

/// W(g0)-orbit of a root under reflections in the positive grade-zero roots.
fn g0_orbit(g: &LieAlgebra, start: &Root, g0_roots: &[Root]) -> Vec<Root> {
    let mut out = vec![start.clone()];
    let mut i = 0;
    while i < out.len() {
        for b in g0_roots {
            let r = reflect_in(g, &out[i], b);
            if !out.contains(&r) {
                out.push(r);
            }
        }
        i += 1;
    }
    out
}

struct OrbitSolution {
    /// ν̌ in the solution's own ring
    nu: Vec<RadicalElement>,
    /// every negative-grade component of exp(ad n)(I+ + q) vanishes
    gauge_ok: bool,
}

fn exp_ad<C: Ring>(g: &LieAlgebra, n: &LieElement<C>, x: &LieElement<C>, bound: usize) -> LieElement<C> {
    let mut out = x.clone();
    let mut term = x.clone();
    for m in 1..=bound {
        term = g.bracket(n, &term).scale(&(Q::one() / qi(m as i64)));
        if term.is_zero() {
            break;
        }
        out = out.add(&term);
    }
    out
}

fn solve_orbit(
    ctx: &ClassContext,
    miura: &MiuraSystem,
    orbit: &[Root],
    branch: Sign,
) -> Result<OrbitSolution, RGroupError> {
    let g = &ctx.lp.g;
    let dec = &ctx.lp.dec;
    let m = miura.dim();
    let z = orbit.len();
    let mut names = miura.vars.names().to_vec();
    names.extend((1..=z).map(|i| format!("x{i}")));
    let full: Vars = VarSet::new(&names);
    let map: Vec<usize> = (0..m).collect();
    let one = Poly::one(&full);
    let zero = Poly::zero(&full);
    let jfull = ctx
        .regular
        .i_plus
        .lift(&one)
        .add(&miura.q.map(|p| p.embed(&full, &map)));
    let mut n = LieElement::zero();
    for (i, r) in orbit.iter().enumerate() {
        n.add_term(g.root_basis(r).expect("root"), Poly::var(&full, m + i));
    }
    let bound = (2 * dec.gradation.max_grade() + 3) as usize;
    let fixed = exp_ad(g, &n, &jfull, bound);
    let eqs: Vec<Poly> = dec
        .basis(-1)
        .iter()
        .map(|&b| coeff_of(&fixed, b, &zero))
        .filter(|e| !e.is_zero())
        .collect();
    let label = root_label(&orbit[0]);
    let to_nu: Vec<Option<usize>> = (0..m + z).map(|i| (i < m).then_some(i)).collect();
    let (rctx, xs) = if z == 1 {
        let xv = Poly::var(&full, m);
        let lin = eqs
            .iter()
            .filter_map(|e| e.div_exact(&xv))
            .find(|e| e.degree_in(m) == 1)
            .ok_or_else(|| RGroupError::NoSolution(label.clone()))?;
        let cs = lin.coefficients_in(m);
        let c1 = cs[1].as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
            RGroupError::Unsupported(format!("the {label} equation has a non-constant leading coefficient"))
        })?;
        let x = cs[0]
            .restrict(&miura.vars, &to_nu)
            .ok_or_else(|| RGroupError::NoSolution(label.clone()))?
            .scale(&(-Q::one() / c1));
        let rc = RadicalCtx::plain(&miura.vars);
        (rc.clone(), vec![RadicalElement::from_poly(&rc, x)])
    } else if z == 2 {
        let sol = solve_quadratic_system(&eqs, &["x1", "x2"])?;
        let br = sol
            .branch(branch)
            .or_else(|| sol.branches.iter().find(|b| !b.is_trivial()))
            .filter(|b| !b.is_trivial())
            .ok_or_else(|| RGroupError::NoSolution(label.clone()))?;
        (sol.ctx.clone(), br.values.clone())
    } else {
        return Err(RGroupError::Unsupported(format!(
            "orbit of {label} has {z} roots; at most two are handled"
        )));
    };
    let rzero = RadicalElement::zero(&rctx);
    let mut vals: Vec<RadicalElement> = (0..m).map(|i| RadicalElement::var(&rctx, i)).collect();
    vals.extend(xs);
    let mut gauge_ok = true;
    for (&b, c) in &fixed.coeffs {
        if dec.gradation.grades[b] < 0 && !c.eval_in(&vals, &rzero).is_zero() {
            gauge_ok = false;
        }
    }
    let nu = miura
        .basis
        .iter()
        .map(|&b| coeff_of(&fixed, b, &zero).eval_in(&vals, &rzero))
        .collect();
    Ok(OrbitSolution { nu, gauge_ok })
}

fn is_reflection(a: &Matrix) -> bool {
    let n = a.len();
    let id = linear::identity(n);
    let a_minus: Matrix = a
        .iter()
        .zip(&id)
        .map(|(r, i)| r.iter().zip(i).map(|(x, y)| x - y).collect())
        .collect();
    linear::matmul(a, a) == id && linear::rank(&a_minus) == 1
}

pub fn run(rec: &ConjugacyClassRecord, opts: &RGroupOptions) -> Result<RGroupReport, RGroupError> {
    if !rec.algebra.simply_laced() && !rec.is_coxeter() && !opts.experimental {
        return Err(RGroupError::Experimental(rec.label.clone()));
    }
    let ctx = ClassContext::new(rec, &opts.pipeline)?;
    let g = ctx.lp.g.clone();
    let rank = g.rank();
    let data = miura_densities(&ctx)?;
    let miura = &data.miura;
    let g0_roots: Vec<Root> = g
        .rs
        .positive
        .iter()
        .filter(|r| grade_of(&ctx, r) == 0)
        .cloned()
        .collect();
    let chart = CartanChart::new(&g, miura, &g0_roots)?;
    let mut checks = Vec::new();
    let mut gens: Vec<(usize, Generator)> = Vec::new();
    let mut commute = Vec::new();
    let (mut gauge_bad, mut dens_bad, mut slice_bad, mut lin_bad, mut refl_bad) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());

    for k in (0..rank).filter(|&k| grade_of(&ctx, &simple(rank, k)) == 1) {
        let label = format!("R{}", k + 1);
        let orbit = g0_orbit(&g, &neg(&simple(rank, k)), &g0_roots);
        for (i, a) in orbit.iter().enumerate() {
            for b in &orbit[i + 1..] {
                let s: Root = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if g.rs.is_root(&s) {
                    commute.push(format!("{label}: {} + {}", root_label(a), root_label(b)));
                }
            }
        }
        let sol = solve_orbit(&ctx, miura, &orbit, opts.pipeline.branch)?;
        if !sol.gauge_ok {
            gauge_bad.push(label.clone());
        }
        let sctx = sol.nu[0].ctx().clone();
        let sz = RadicalElement::zero(&sctx);
        let lift = |p: &Poly| RadicalElement::from_poly(&sctx, p.clone());
        if let Some(a) = data
            .dens
            .densities
            .iter()
            .position(|n| n.eval_in(&sol.nu, &sz) != lift(n))
        {
            dens_bad.push(format!("{label} moves N{}", a + 1));
        }
        if let Some(a) = data.coords.iter().position(|w| w.eval_in(&sol.nu, &sz) != lift(w)) {
            slice_bad.push(format!("{label} moves slice coordinate {}", a + 1));
        }
        let nu: Vec<RadicalElement> = sol
            .nu
            .iter()
            .map(|x| rebase(x, &chart.ctx, &label))
            .collect::<Result<_, _>>()?;
        let mut chosen = None;
        let mut linear_any = false;
        for cand in chart.chart_at(&nu)? {
            if let Some(a) = chart.linear_in_mu(&cand) {
                linear_any = true;
                if is_reflection(&a) {
                    chosen = Some(a);
                    break;
                }
            }
        }
        if !linear_any {
            lin_bad.push(label.clone());
            continue;
        }
        let Some(a) = chosen else {
            refl_bad.push(label.clone());
            continue;
        };
        let Some(matrix) = to_imat(&a) else {
            return Err(RGroupError::Unsupported(format!("{label} acts on μ by a non-integral matrix")));
        };
        gens.push((
            k,
            Generator {
                label,
                kind: GeneratorKind::Orbit {
                    orbit: orbit.iter().map(|r| root_label(r)).collect(),
                },
                nu,
                matrix: matrix.chunks(rank).map(|c| c.to_vec()).collect(),
            },
        ));
    }
    checks.push(check(
        "orbit-commute",
        commute.is_empty(),
        if commute.is_empty() {
            "root vectors within each orbit commute".to_string()
        } else {
            commute.join("; ")
        },
    ));
    checks.push(check(
        "gauge",
        gauge_bad.is_empty(),
        if gauge_bad.is_empty() {
            "exp(ad n)(I+ + q) has no negative-grade part".to_string()
        } else {
            format!("residual for {}", gauge_bad.join(", "))
        },
    ));
    checks.push(check(
        "density-invariance",
        dens_bad.is_empty(),
        if dens_bad.is_empty() {
            "Nᵃ(ν̌) = Nᵃ(ν) for every orbit generator".to_string()
        } else {
            dens_bad.join("; ")
        },
    ));
    checks.push(check(
        "slice-invariance",
        slice_bad.is_empty(),
        if slice_bad.is_empty() {
            "gauge-fixed coordinates are unchanged".to_string()
        } else {
            slice_bad.join("; ")
        },
    ));
    checks.push(check(
        "mu-linear",
        lin_bad.is_empty(),
        if lin_bad.is_empty() {
            "μ(ν̌) = Aμ(ν) identically".to_string()
        } else {
            format!("not linear in μ: {}", lin_bad.join(", "))
        },
    ));
    checks.push(check(
        "reflection",
        refl_bad.is_empty(),
        if refl_bad.is_empty() {
            "every A satisfies A² = 1 with rank(A − 1) = 1".to_string()
        } else {
            format!("no reflection branch for {}", refl_bad.join(", "))
        },
    ));

    if let (Some(w), Some(beta)) = (chart.weyl_matrix(), chart.root.clone()) {
        // the other sheet of √J is the Weyl image of μ
        let conj: Vec<RadicalElement> = chart.mu.iter().map(|x| x.conjugate()).collect();
        let ok = chart.linear_in_mu(&conj).as_ref() == Some(&w);
        checks.push(check(
            "sheet",
            ok,
            if ok {
                "√J ↦ −√J acts on μ as the su(2) reflection".to_string()
            } else {
                "sheet exchange is not the su(2) reflection".to_string()
            },
        ));
        let matrix = to_imat(&w)
            .ok_or_else(|| RGroupError::Unsupported("su(2) reflection is not integral".into()))?;
        let node = (0..rank).find(|&k| beta == simple(rank, k));
        gens.push((
            node.unwrap_or(rank),
            Generator {
                label: node.map_or_else(|| format!("S{}", root_label(&beta)), |k| format!("R{}", k + 1)),
                kind: GeneratorKind::Weyl,
                nu: Vec::new(),
                matrix: matrix.chunks(rank).map(|c| c.to_vec()).collect(),
            },
        ));
    }
    gens.sort_by_key(|(k, _)| *k);
    let generators: Vec<Generator> = gens.into_iter().map(|(_, g)| g).collect();

    let mu_metric = chart.metric(miura)?;
    let nondeg = mu_metric.as_ref().is_some_and(|m| !linear::det(m).is_zero());
    checks.push(check(
        "mu-metric",
        nondeg,
        match &mu_metric {
            Some(_) if nondeg => "∇μᵢ K⁻¹ ∇μⱼ is a constant nondegenerate matrix".to_string(),
            Some(_) => "∇μᵢ K⁻¹ ∇μⱼ is constant but degenerate".to_string(),
            None => "∇μᵢ K⁻¹ ∇μⱼ is not constant".to_string(),
        },
    ));

    let flat: Vec<IMat> = generators.iter().map(|g| g.matrix.concat()).collect();
    let order = if flat.is_empty() {
        None
    } else {
        group_order(&flat, rank, opts.max_elements)
    };
    checks.push(check(
        "group-order",
        order.is_some(),
        match order {
            Some(n) => format!("{n} elements"),
            None => format!("more than {} elements", opts.max_elements),
        },
    ));
    let mut relations = Vec::new();
    for i in 0..flat.len() {
        for j in i..flat.len() {
            let p = if i == j { flat[i].clone() } else { imul(&flat[i], &flat[j], rank) };
            relations.push((i, j, element_order(&p, rank, 64)));
        }
    }
    let cox: Option<Vec<Vec<usize>>> = (0..flat.len())
        .map(|i| {
            (0..flat.len())
                .map(|j| {
                    let (a, b) = (i.min(j), i.max(j));
                    let o = relations.iter().find(|r| r.0 == a && r.1 == b).and_then(|r| r.2)?;
                    Some(if i == j { 2 * usize::from(o == 2) } else { o })
                })
                .collect()
        })
        .collect();
    let weyl_type = cox.as_deref().and_then(coxeter_type);
    let iso = match (&weyl_type, order) {
        (Some((t, o)), Some(n)) if *o == n as u128 => (true, format!("W({t}) of order {o}")),
        (Some((t, o)), _) => (false, format!("relations give W({t}) of order {o}, enumeration disagrees")),
        (None, _) => (false, "relations do not form a Coxeter diagram".to_string()),
    };
    checks.push(check("isomorphism", iso.0, iso.1));
    Ok(RGroupReport {
        weyl_type,
        class: rec.label.clone(),
        miura_vars: miura.vars.names().to_vec(),
        chart,
        generators,
        mu_metric,
        order,
        max_elements: opts.max_elements,
        relations,
        checks,
    })
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Coxeter type of one connected diagram with its group order.
fn component_type(nodes: &[usize], m: &[Vec<usize>]) -> Option<(String, u128)> {
    let k = nodes.len();
    let edges: Vec<(usize, usize, usize)> = nodes
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| nodes[a + 1..].iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| m[i][j] > 2)
        .map(|(i, j)| (i, j, m[i][j]))
        .collect();
    if k == 1 {
        return Some(("A1".into(), 2));
    }
    if edges.len() != k - 1 {
        return None;
    }
    let deg = |x: usize| edges.iter().filter(|e| e.0 == x || e.1 == x).count();
    let heavy: Vec<&(usize, usize, usize)> = edges.iter().filter(|e| e.2 > 3).collect();
    let path = nodes.iter().all(|&x| deg(x) <= 2);
    match heavy.as_slice() {
        [] => {}
        [e] if path => {
            return match (k, e.2) {
                (2, 6) => Some(("G2".into(), 12)),
                (2, 4) => Some(("B2".into(), 8)),
                (_, 4) if deg(e.0) == 1 || deg(e.1) == 1 => {
                    Some((format!("B{k}"), (1u128 << k) * factorial(k)))
                }
                (4, 4) => Some(("F4".into(), 1152)),
                _ => None,
            };
        }
        _ => return None,
    }
    if path {
        return Some((format!("A{k}"), factorial(k + 1)));
    }
    let centers: Vec<usize> = nodes.iter().copied().filter(|&x| deg(x) == 3).collect();
    if centers.len() != 1 || nodes.iter().any(|&x| deg(x) > 3) {
        return None;
    }
    let c = centers[0];
    let mut arms: Vec<usize> = Vec::new();
    for e in edges.iter().filter(|e| e.0 == c || e.1 == c) {
        let (mut prev, mut cur) = (c, if e.0 == c { e.1 } else { e.0 });
        let mut len = 1;
        loop {
            let next = edges
                .iter()
                .find(|f| (f.0 == cur || f.1 == cur) && f.0 != prev && f.1 != prev)
                .map(|f| if f.0 == cur { f.1 } else { f.0 });
            match next {
                Some(n) => {
                    prev = cur;
                    cur = n;
                    len += 1;
                }
                None => break,
            }
        }
        arms.push(len);
    }
    arms.sort();
    match arms.as_slice() {
        [1, 1, _] => Some((format!("D{k}"), (1u128 << (k - 1)) * factorial(k))),
        [1, 2, 2] => Some(("E6".into(), 51_840)),
        [1, 2, 3] => Some(("E7".into(), 2_903_040)),
        [1, 2, 4] => Some(("E8".into(), 696_729_600)),
        _ => None,
    }
}

/// Coxeter type and order read off the matrix of orders m_ij of R_iR_j, when
/// every generator is an involution.
pub fn coxeter_type(m: &[Vec<usize>]) -> Option<(String, u128)> {
    let n = m.len();
    if (0..n).any(|i| m[i][i] != 2) {
        return None;
    }
    let mut seen = vec![false; n];
    let mut parts = Vec::new();
    let mut order = 1u128;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            for j in 0..n {
                if !seen[j] && m[comp[i]][j] > 2 {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            i += 1;
        }
        comp.sort();
        let (t, o) = component_type(&comp, m)?;
        parts.push(t);
        order *= o;
    }
    parts.sort();
    Some((parts.join("×"), order))
}

fn fmt_matrix(m: &[Vec<i64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", rows.join("; "))
}

impl RGroupReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn generator(&self, label: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.label == label)
    }

    /// Order of R_a R_b by label.
    pub fn relation(&self, a: &str, b: &str) -> Option<usize> {
        let i = self.generators.iter().position(|g| g.label == a)?;
        let j = self.generators.iter().position(|g| g.label == b)?;
        let (i, j) = (i.min(j), i.max(j));
        self.relations.iter().find(|r| r.0 == i && r.1 == j).and_then(|r| r.2)
    }

    /// ν̌ of a generator as text, variable by variable.
    pub fn nu_map(&self, g: &Generator) -> Vec<(String, String)> {
        self.miura_vars
            .iter()
            .zip(&g.nu)
            .map(|(v, x)| (v.clone(), x.to_string()))
            .collect()
    }

    fn chart_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(j) = &self.chart.j {
            out.push(format!("J = {j}"));
        }
        for (i, m) in self.chart.mu.iter().enumerate() {
            out.push(format!("mu{} = {m}", i + 1));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("class {}\n", self.class);
        for l in self.chart_lines() {
            s += &format!("  {l}\n");
        }
        for g in &self.generators {
            match &g.kind {
                GeneratorKind::Orbit { orbit } => {
                    s += &format!("{} orbit {{{}}}\n", g.label, orbit.join(", "));
                    for (v, x) in self.nu_map(g) {
                        if x != v {
                            s += &format!("  {v} -> {x}\n");
                        }
                    }
                }
                GeneratorKind::Weyl => s += &format!("{} su(2) reflection\n", g.label),
            }
            s += &format!("  mu -> {}\n", fmt_matrix(&g.matrix));
        }
        if let Some(m) = &self.mu_metric {
            let rows: Vec<String> = m
                .iter()
                .map(|r| r.iter().map(fmt_q).collect::<Vec<_>>().join(" "))
                .collect();
            s += &format!("mu metric [{}]\n", rows.join("; "));
        }
        match self.order {
            Some(n) => s += &format!("order {n}\n"),
            None => s += &format!("order > {}\n", self.max_elements),
        }
        if let Some((t, _)) = &self.weyl_type {
            s += &format!("type W({t})\n");
        }
        s += "relations\n";
        for (i, j, o) in &self.relations {
            let (a, b) = (&self.generators[*i].label, &self.generators[*j].label);
            let w = if i == j { a.clone() } else { format!("{a}{b}") };
            match o {
                Some(o) => s += &format!("  ({w})^{o} = 1\n"),
                None => s += &format!("  ({w}) has order above 64\n"),
            }
        }
        for c in &self.checks {
            s += &format!("[{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": 1,
            "class": self.class,
            "chart": self.chart_lines(),
            "generators": self.generators.iter().map(|g| json!({
                "label": g.label,
                "kind": match &g.kind { GeneratorKind::Orbit { .. } => "orbit", GeneratorKind::Weyl => "weyl" },
                "orbit": match &g.kind { GeneratorKind::Orbit { orbit } => json!(orbit), GeneratorKind::Weyl => Value::Null },
                "nu": self.nu_map(g).into_iter().map(|(v, x)| json!([v, x])).collect::<Vec<_>>(),
                "matrix": g.matrix,
            })).collect::<Vec<_>>(),
            "mu_metric": self.mu_metric.as_ref().map(|m| m.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>()),
            "order": self.order,
            "max_elements": self.max_elements,
            "type": self.weyl_type.as_ref().map(|(t, _)| t.clone()),
            "relations": self.relations.iter().map(|(i, j, o)| json!({
                "a": self.generators[*i].label,
                "b": self.generators[*j].label,
                "order": o,
            })).collect::<Vec<_>>(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}
