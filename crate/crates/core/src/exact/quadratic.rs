//! Polynomial systems solvable by triangular substitution with at most one
//! square root.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};


use super::poly::{Poly, VarSet, Vars};
use super::radical::{RadicalCtx, RadicalElement};
use super::rational::{qi, square_part, Q};
use super::{AlgebraError, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// No radical on this branch.
    Rational,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Rational => "0",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub sign: Sign,
    /// One value per unknown, in the order requested.
    pub values: Vec<RadicalElement>,
}

impl Branch {
    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct QuadraticSolution {
    /// Ring of the remaining (parameter) variables.
    pub params: Vars,
    pub ctx: Arc<RadicalCtx>,
    pub unknowns: Vec<String>,
    pub branches: Vec<Branch>,
}

impl QuadraticSolution {
    pub fn branch(&self, sign: Sign) -> Option<&Branch> {
        self.branches.iter().find(|b| b.sign == sign)
    }
}

struct Layout {
    full: Vars,
    params: Vars,
    unk: Vec<usize>,
    /// full index -> params index
    to_param: Vec<Option<usize>>,
    /// params index -> full index
    from_param: Vec<usize>,
}

impl Layout {
    fn new(full: &Vars, unknowns: &[&str]) -> Result<Self, AlgebraError> {
        let mut unk = Vec::new();
        for u in unknowns {
            unk.push(
                full.index(u)
                    .ok_or_else(|| AlgebraError::UnknownVariable(u.to_string()))?,
            );
        }
        let mut names = Vec::new();
        let mut to_param = vec![None; full.len()];
        let mut from_param = Vec::new();
        for (i, n) in full.names().iter().enumerate() {
            if !unk.contains(&i) {
                to_param[i] = Some(names.len());
                from_param.push(i);
                names.push(n.clone());
            }
        }
        Ok(Layout {
            full: full.clone(),
            params: VarSet::new(&names),
            unk,
            to_param,
            from_param,
        })
    }

    fn to_params(&self, p: &Poly) -> Result<Poly, AlgebraError> {
        p.restrict(&self.params, &self.to_param)
            .ok_or_else(|| AlgebraError::NotQuadratic("value still depends on an unknown".into()))
    }

    fn to_full(&self, p: &Poly) -> Poly {
        p.embed(&self.full, &self.from_param)
    }

    fn rad_to_params(
        &self,
        r: &RadicalElement,
        ctx: &Arc<RadicalCtx>,
    ) -> Result<RadicalElement, AlgebraError> {
        let mut den = Vec::new();
        for (f, e) in r.den_factors() {
            den.push((self.to_params(f)?, *e));
        }
        Ok(RadicalElement::from_raw(
            ctx,
            self.to_params(r.base())?,
            self.to_params(r.radical_part())?,
            den,
        ))
    }

    fn rad_to_full(&self, r: &RadicalElement, ctx: &Arc<RadicalCtx>) -> RadicalElement {
        let den = r
            .den_factors()
            .iter()
            .map(|(f, e)| (self.to_full(f), *e))
            .collect();
        RadicalElement::from_raw(ctx, self.to_full(r.base()), self.to_full(r.radical_part()), den)
    }
}

/// Substitute inside one radical ring: `vals[i]` replaces variable i.
fn subst_rad(r: &RadicalElement, vals: &[RadicalElement]) -> Result<RadicalElement, AlgebraError> {
    let ctx = r.ctx();
    let zero = RadicalElement::zero(ctx);
    let a = r.base().eval_in(vals, &zero);
    let b = r.radical_part().eval_in(vals, &zero);
    let num = a.add(&b.mul(&RadicalElement::delta(ctx)));
    let den = r.denominator().eval_in(vals, &zero);
    num.checked_div(&den)
}

/// Coefficients of x_i^0 and x_i^1 of an element of degree at most one in x_i.
fn linear_coeffs(r: &RadicalElement, i: usize) -> Option<(RadicalElement, RadicalElement)> {
    if r.base().degree_in(i) > 1 || r.radical_part().degree_in(i) > 1 {
        return None;
    }
    if r.den_factors().iter().any(|(f, _)| f.degree_in(i) > 0) {
        return None;
    }
    let ca = r.base().coefficients_in(i);
    let cb = r.radical_part().coefficients_in(i);
    let get = |v: &Vec<Poly>, k: usize| v.get(k).cloned().unwrap_or_else(|| Poly::zero(r.base().vars()));
    let den = r.den_factors().to_vec();
    let c0 = RadicalElement::from_raw(r.ctx(), get(&ca, 0), get(&cb, 0), den.clone());
    let c1 = RadicalElement::from_raw(r.ctx(), get(&ca, 1), get(&cb, 1), den);
    Some((c0, c1))
}

type SignedRoots = (Arc<RadicalCtx>, Vec<(Sign, RadicalElement)>);

/// Roots of A x² + B x + C over the parameter ring. Returns the ring used and the roots.
fn quadratic_roots(
    a: &Poly,
    b: &Poly,
    c: &Poly,
) -> Result<SignedRoots, AlgebraError> {
    let vars = a.vars().clone();
    let disc = &(b * b) - &(a * c).scale(&qi(4));
    let two_a = a.scale(&qi(2));
    let mb = -b;
    if let Some(s) = disc.sqrt_exact() {
        let ctx = RadicalCtx::plain(&vars);
        let mut roots = Vec::new();
        let r1 = RadicalElement::from_poly(&ctx, &mb + &s).div_poly(&two_a)?;
        roots.push((Sign::Rational, r1));
        if !s.is_zero() {
            let r2 = RadicalElement::from_poly(&ctx, &mb - &s).div_poly(&two_a)?;
            roots.push((Sign::Rational, r2));
        }
        return Ok((ctx, roots));
    }
    // disc = content * primitive, content = (k/d)^2 t
    let content = disc.content();
    let m: BigInt = content.numer() * content.denom();
    let (k, t) = square_part(&m);
    let scale_root = Q::new(k, content.denom().clone());
    let square = disc.scale(&(Q::from_integer(t) / &content));
    let ctx = RadicalCtx::new(square);
    let delta = RadicalElement::delta(&ctx).scale(&scale_root);
    let base = RadicalElement::from_poly(&ctx, mb);
    let plus = base.add(&delta).div_poly(&two_a)?;
    let minus = base.sub(&delta).div_poly(&two_a)?;
    Ok((ctx, vec![(Sign::Plus, plus), (Sign::Minus, minus)]))
}

/// Solve a polynomial system by triangular substitution: linear equations with
/// constant leading coefficient first, then a single quadratic in one unknown,
/// then equations linear over the radical ring. Falls back to the
/// homogeneous two-unknown method when the system has no triangular form.
pub fn solve_quadratic_system(
    eqs: &[Poly],
    unknowns: &[&str],
) -> Result<QuadraticSolution, AlgebraError> {
    match solve_triangular(eqs, unknowns) {
        Err(AlgebraError::NotQuadratic(msg)) => {
            if unknowns.len() == 2 && eqs.len() >= 2 {
                solve_homogeneous_pair(eqs, unknowns[0], unknowns[1])
            } else {
                Err(AlgebraError::NotQuadratic(msg))
            }
        }
        r => r,
    }
}

pub fn solve_triangular(
    eqs: &[Poly],
    unknowns: &[&str],
) -> Result<QuadraticSolution, AlgebraError> {
    let Some(first) = eqs.first() else {
        return Err(AlgebraError::NotQuadratic("empty system".into()));
    };
    let lay = Layout::new(first.vars(), unknowns)?;
    let full = lay.full.clone();
    let nu = lay.unk.len();
    let mut exprs: Vec<Option<Poly>> = vec![None; nu];
    let mut cur: Vec<Poly> = eqs.iter().filter(|e| !e.is_zero()).cloned().collect();

    // Linear steps with constant coefficients.
    loop {
        let mut found = None;
        'outer: for e in &cur {
            for (k, &u) in lay.unk.iter().enumerate() {
                if exprs[k].is_some() || e.degree_in(u) != 1 {
                    continue;
                }
                let cs = e.coefficients_in(u);
                if let Some(c) = cs[1].as_constant() {
                    found = Some((k, cs[0].scale(&(-Q::one() / c))));
                    break 'outer;
                }
            }
        }
        let Some((k, val)) = found else { break };
        let u = lay.unk[k];
        let mut vals: Vec<Poly> = (0..full.len()).map(|i| Poly::var(&full, i)).collect();
        vals[u] = val.clone();
        cur = cur
            .iter()
            .map(|e| e.subst(&vals))
            .filter(|e| !e.is_zero())
            .collect();
        for x in exprs.iter_mut().flatten() {
            *x = x.subst(&vals);
        }
        exprs[k] = Some(val);
    }

    let open: Vec<usize> = (0..nu).filter(|&k| exprs[k].is_none()).collect();
    let unknown_names: Vec<String> = unknowns.iter().map(|s| s.to_string()).collect();

    if open.is_empty() {
        if !cur.is_empty() {
            return Err(AlgebraError::Inconsistent);
        }
        let ctx = RadicalCtx::plain(&lay.params);
        let values = exprs
            .iter()
            .map(|e| Ok(RadicalElement::from_poly(&ctx, lay.to_params(e.as_ref().unwrap())?)))
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        let sol = QuadraticSolution {
            params: lay.params.clone(),
            ctx,
            unknowns: unknown_names,
            branches: vec![Branch {
                sign: Sign::Rational,
                values,
            }],
        };
        verify(eqs, &lay, &sol)?;
        return Ok(sol);
    }

    // One quadratic in a single unknown.
    let mut quad = None;
    for (ei, e) in cur.iter().enumerate() {
        let involved: Vec<usize> = open.iter().copied().filter(|&k| e.degree_in(lay.unk[k]) > 0).collect();
        if involved.len() == 1 && e.degree_in(lay.unk[involved[0]]) == 2 {
            quad = Some((ei, involved[0]));
            break;
        }
    }
    let Some((qe, qk)) = quad else {
        return Err(AlgebraError::NotQuadratic(
            "no linear or single-unknown quadratic equation remains".into(),
        ));
    };
    let cs = cur[qe].coefficients_in(lay.unk[qk]);
    let (pa, pb, pc) = (lay.to_params(&cs[2])?, lay.to_params(&cs[1])?, lay.to_params(&cs[0])?);
    let (pctx, roots) = quadratic_roots(&pa, &pb, &pc)?;
    let square_full = lay.to_full(pctx.square());
    let fctx = if pctx.has_radical() {
        RadicalCtx::new(square_full)
    } else {
        RadicalCtx::plain(&full)
    };

    let mut branches = Vec::new();
    for (sign, root) in roots {
        let mut known: Vec<Option<RadicalElement>> = vec![None; nu];
        known[qk] = Some(lay.rad_to_full(&root, &fctx));
        let mut eqr: Vec<RadicalElement> = cur
            .iter()
            .map(|e| RadicalElement::from_poly(&fctx, e.clone()))
            .collect();
        loop {
            let mut vals: Vec<RadicalElement> = (0..full.len()).map(|i| RadicalElement::var(&fctx, i)).collect();
            for (k, v) in known.iter().enumerate() {
                if let Some(v) = v {
                    vals[lay.unk[k]] = v.clone();
                }
            }
            eqr = eqr
                .iter()
                .map(|e| subst_rad(e, &vals))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|e| !e.is_zero())
                .collect();
            let pending: Vec<usize> = open.iter().copied().filter(|&k| known[k].is_none()).collect();
            if pending.is_empty() {
                if !eqr.is_empty() {
                    return Err(AlgebraError::Inconsistent);
                }
                break;
            }
            let mut step = None;
            'find: for e in &eqr {
                for &k in &pending {
                    let u = lay.unk[k];
                    let others_free = pending
                        .iter()
                        .filter(|&&j| j != k)
                        .all(|&j| e.base().degree_in(lay.unk[j]) == 0 && e.radical_part().degree_in(lay.unk[j]) == 0);
                    if !others_free {
                        continue;
                    }
                    if let Some((c0, c1)) = linear_coeffs(e, u) {
                        if !c1.is_zero() {
                            step = Some((k, c0.neg().checked_div(&c1)?));
                            break 'find;
                        }
                    }
                }
            }
            let Some((k, v)) = step else {
                return Err(AlgebraError::SecondRadical(
                    "a further quadratic step would need another radical".into(),
                ));
            };
            known[k] = Some(v);
        }
        // Back-substitute into the linear expressions.
        let mut vals: Vec<RadicalElement> = (0..full.len()).map(|i| RadicalElement::var(&fctx, i)).collect();
        for (k, v) in known.iter().enumerate() {
            if let Some(v) = v {
                vals[lay.unk[k]] = v.clone();
            }
        }
        let mut values = Vec::new();
        for k in 0..nu {
            let v = match (&exprs[k], &known[k]) {
                (_, Some(v)) => v.clone(),
                (Some(p), None) => p.eval_in(&vals, &RadicalElement::zero(&fctx)),
                (None, None) => unreachable!(),
            };
            values.push(lay.rad_to_params(&v, &pctx)?);
        }
        branches.push(Branch { sign, values });
    }
    let sol = QuadraticSolution {
        params: lay.params.clone(),
        ctx: pctx,
        unknowns: unknown_names,
        branches,
    };
    verify(eqs, &lay, &sol)?;
    Ok(sol)
}

fn verify(eqs: &[Poly], lay: &Layout, sol: &QuadraticSolution) -> Result<(), AlgebraError> {
    for br in &sol.branches {
        let vals = branch_point(lay, sol, br);
        for e in eqs {
            if !e.eval_in(&vals, &RadicalElement::zero(&sol.ctx)).is_zero() {
                return Err(AlgebraError::NotQuadratic(format!(
                    "branch {} does not satisfy {e}",
                    br.sign.symbol()
                )));
            }
        }
    }
    Ok(())
}

fn branch_point(lay: &Layout, sol: &QuadraticSolution, br: &Branch) -> Vec<RadicalElement> {
    (0..lay.full.len())
        .map(|i| match lay.to_param[i] {
            Some(p) => RadicalElement::var(&sol.ctx, p),
            None => {
                let k = lay.unk.iter().position(|&u| u == i).unwrap();
                br.values[k].clone()
            }
        })
        .collect()
}

/// Nontrivial solutions of two equations in (x, y) without constant terms,
/// through the substitution y = λx. Root factors λ - r shared by both
/// quadratic parts are discarded as spurious. The trivial solution is kept
/// as a `Rational` branch.
pub fn solve_homogeneous_pair(
    eqs: &[Poly],
    x: &str,
    y: &str,
) -> Result<QuadraticSolution, AlgebraError> {
    let lay = Layout::new(eqs[0].vars(), &[x, y])?;
    let (ix, iy) = (lay.unk[0], lay.unk[1]);
    let np = lay.params.len();
    let mut names: Vec<String> = lay.params.names().to_vec();
    names.push("lambda".into());
    let lam_vars = VarSet::new(&names);
    let lam = np;
    // e(x, λx) = x ℓ(λ) + x² q(λ)
    let split = |e: &Poly| -> Result<(Poly, Poly), AlgebraError> {
        let mut l = Poly::zero(&lam_vars);
        let mut qd = Poly::zero(&lam_vars);
        for (m, c) in e.terms() {
            let dx = m.0[ix];
            let dy = m.0[iy];
            let mut ex = vec![0; np + 1];
            for (i, &p) in m.0.iter().enumerate() {
                if let Some(j) = lay.to_param[i] {
                    ex[j] = p;
                }
            }
            ex[lam] = dy;
            let t = Poly::monomial(&lam_vars, super::poly::Monomial(ex), c.clone());
            match dx + dy {
                1 => l = &l + &t,
                2 => qd = &qd + &t,
                _ => {
                    return Err(AlgebraError::NotQuadratic(
                        "pair equations must be linear plus quadratic in the unknowns".into(),
                    ))
                }
            }
        }
        Ok((l, qd))
    };
    let live: Vec<&Poly> = eqs.iter().filter(|e| !e.is_zero()).collect();
    if live.len() < 2 {
        return Err(AlgebraError::NotQuadratic("pair method needs two equations".into()));
    }
    let (l1, q1) = split(live[0])?;
    let (l2, q2) = split(live[1])?;
    let mut res = &(&l1 * &q2) - &(&l2 * &q1);
    // Strip rational roots common to both quadratic parts.
    for r in common_constant_roots(&q1, &q2, lam) {
        let f = &Poly::var(&lam_vars, lam) - &Poly::constant(&lam_vars, r);
        while let Some(d) = res.div_exact(&f) {
            if res.is_zero() {
                break;
            }
            res = d;
        }
    }
    if res.degree_in(lam) > 2 || res.is_zero() {
        return Err(AlgebraError::NotQuadratic(
            "eliminant in the slope has degree above two".into(),
        ));
    }
    let cs = res.coefficients_in(lam);
    let to_p: Vec<Option<usize>> = (0..=np).map(|i| if i < np { Some(i) } else { None }).collect();
    let get = |k: usize| -> Poly {
        cs.get(k)
            .map(|p| p.restrict(&lay.params, &to_p).expect("free of lambda"))
            .unwrap_or_else(|| Poly::zero(&lay.params))
    };
    let (pa, pb, pc) = (get(2), get(1), get(0));
    let (ctx, roots) = if pa.is_zero() {
        let ctx = RadicalCtx::plain(&lay.params);
        let r = RadicalElement::from_poly(&ctx, -&pc).div_poly(&pb)?;
        (ctx, vec![(Sign::Rational, r)])
    } else {
        quadratic_roots(&pa, &pb, &pc)?
    };
    let mut branches = vec![Branch {
        sign: Sign::Rational,
        values: vec![RadicalElement::zero(&ctx), RadicalElement::zero(&ctx)],
    }];
    let mut lam_vals: Vec<RadicalElement> = (0..np).map(|i| RadicalElement::var(&ctx, i)).collect();
    lam_vals.push(RadicalElement::zero(&ctx));
    for (sign, lv) in roots {
        lam_vals[np] = lv.clone();
        let zero = RadicalElement::zero(&ctx);
        let (lv1, qv1) = (l1.eval_in(&lam_vals, &zero), q1.eval_in(&lam_vals, &zero));
        let (lv2, qv2) = (l2.eval_in(&lam_vals, &zero), q2.eval_in(&lam_vals, &zero));
        let xv = if !qv1.is_zero() && qv1.norm() != Poly::zero(&lay.params) {
            lv1.neg().checked_div(&qv1)?
        } else {
            lv2.neg().checked_div(&qv2)?
        };
        let yv = xv.mul(&lv);
        branches.push(Branch {
            sign,
            values: vec![xv, yv],
        });
    }
    let sol = QuadraticSolution {
        params: lay.params.clone(),
        ctx,
        unknowns: vec![x.to_string(), y.to_string()],
        branches,
    };
    verify(eqs, &lay, &sol)?;
    Ok(sol)
}

/// Rational r with q1(r) = q2(r) = 0 identically, where q1 and q2 have
/// constant coefficients in the slope variable.
fn common_constant_roots(q1: &Poly, q2: &Poly, lam: usize) -> Vec<Q> {
    let cs: Vec<Option<Q>> = q1.coefficients_in(lam).iter().map(|p| p.as_constant()).collect();
    if cs.iter().any(|c| c.is_none()) {
        return Vec::new();
    }
    let cs: Vec<Q> = cs.into_iter().map(|c| c.unwrap()).collect();
    let mut cand = Vec::new();
    match cs.len() {
        2 if !cs[1].is_zero() => cand.push(-&cs[0] / &cs[1]),
        3 if !cs[2].is_zero() => {
            let d = &cs[1] * &cs[1] - qi(4) * &cs[0] * &cs[2];
            if let Some(s) = super::rational::sqrt_q(&d) {
                let two_a = qi(2) * &cs[2];
                cand.push((-&cs[1] + &s) / &two_a);
                if !s.is_zero() {
                    cand.push((-&cs[1] - &s) / &two_a);
                }
            }
        }
        _ => {}
    }
    let vars = q2.vars();
    cand.into_iter()
        .filter(|r| {
            let mut pt: Vec<Poly> = (0..vars.len()).map(|i| Poly::var(vars, i)).collect();
            pt[lam] = Poly::constant(vars, r.clone());
            q2.subst(&pt).is_zero()
        })
        .collect()
}
