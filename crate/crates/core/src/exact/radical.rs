use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::poly::{Poly, Vars};
use super::rational::{fmt_q, qi, Q};
use super::{AlgebraError, Ring};

/// Ring of polynomial fractions with one adjoined square root Δ, Δ² = `square`.
/// A zero `square` means no radical has been adjoined.
#[derive(Debug, PartialEq)]
pub struct RadicalCtx {
    vars: Vars,
    square: Poly,
}

impl RadicalCtx {
    pub fn new(square: Poly) -> Arc<Self> {
        Arc::new(RadicalCtx {
            vars: square.vars().clone(),
            square,
        })
    }

    pub fn plain(vars: &Vars) -> Arc<Self> {
        Arc::new(RadicalCtx {
            vars: vars.clone(),
            square: Poly::zero(vars),
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn square(&self) -> &Poly {
        &self.square
    }

    pub fn has_radical(&self) -> bool {
        !self.square.is_zero()
    }
}

/// (a + bΔ) / ∏ fᵢ^eᵢ with monic, non-constant factors fᵢ.
#[derive(Clone, Debug)]
pub struct RadicalElement {
    ctx: Arc<RadicalCtx>,
    a: Poly,
    b: Poly,
    den: Vec<(Poly, u32)>,
}

/// Split `p` into (leading coefficient, monic part).
fn monic(p: &Poly) -> (Q, Poly) {
    let lc = p.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::one);
    (lc.clone(), p.scale(&(Q::one() / lc)))
}

impl RadicalElement {
    pub fn from_poly(ctx: &Arc<RadicalCtx>, p: Poly) -> Self {
        assert!(p.same_ring(&Poly::zero(&ctx.vars)), "polynomial ring mismatch");
        RadicalElement {
            ctx: ctx.clone(),
            b: Poly::zero(&ctx.vars),
            a: p,
            den: Vec::new(),
        }
    }

    pub fn constant(ctx: &Arc<RadicalCtx>, c: Q) -> Self {
        RadicalElement::from_poly(ctx, Poly::constant(&ctx.vars, c))
    }

    pub fn zero(ctx: &Arc<RadicalCtx>) -> Self {
        RadicalElement::constant(ctx, Q::zero())
    }

    pub fn var(ctx: &Arc<RadicalCtx>, i: usize) -> Self {
        RadicalElement::from_poly(ctx, Poly::var(&ctx.vars, i))
    }

    /// The element Δ itself.
    pub fn delta(ctx: &Arc<RadicalCtx>) -> Self {
        RadicalElement::from_parts(ctx, Poly::zero(&ctx.vars), Poly::one(&ctx.vars))
    }

    /// a + bΔ.
    pub fn from_parts(ctx: &Arc<RadicalCtx>, a: Poly, b: Poly) -> Self {
        let b = if ctx.has_radical() { b } else { Poly::zero(&ctx.vars) };
        RadicalElement {
            ctx: ctx.clone(),
            a,
            b,
            den: Vec::new(),
        }
    }

    /// Raw constructor from numerator parts and a factored denominator.
    pub fn from_raw(ctx: &Arc<RadicalCtx>, a: Poly, b: Poly, den: Vec<(Poly, u32)>) -> Self {
        let mut r = RadicalElement {
            ctx: ctx.clone(),
            a,
            b,
            den: Vec::new(),
        };
        for (f, e) in den {
            for _ in 0..e {
                r = r.div_poly(&f).expect("nonzero factor");
            }
        }
        r
    }

    pub fn den_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn ctx(&self) -> &Arc<RadicalCtx> {
        &self.ctx
    }

    /// Rational part of the numerator.
    pub fn base(&self) -> &Poly {
        &self.a
    }

    /// Coefficient of Δ in the numerator.
    pub fn radical_part(&self) -> &Poly {
        &self.b
    }

    pub fn denominator(&self) -> Poly {
        let mut d = Poly::one(&self.ctx.vars);
        for (f, e) in &self.den {
            d = &d * &f.pow(*e);
        }
        d
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Polynomial value, when Δ and all denominators are absent.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.den.is_empty() && self.b.is_zero() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Q> {
        self.as_poly().and_then(|p| p.as_constant())
    }

    fn check(&self, o: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.ctx, &o.ctx) || self.ctx == o.ctx {
            Ok(())
        } else if self.ctx.vars != o.ctx.vars {
            Err(AlgebraError::VariableMismatch)
        } else {
            Err(AlgebraError::RadicalMismatch)
        }
    }

    fn with(&self, a: Poly, b: Poly, den: Vec<(Poly, u32)>) -> Self {
        let mut r = RadicalElement {
            ctx: self.ctx.clone(),
            a,
            b,
            den,
        };
        r.reduce();
        r
    }

    /// Cancel denominator factors that divide both numerator parts.
    fn reduce(&mut self) {
        if self.is_zero() {
            self.den.clear();
            return;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                let Some(qa) = self.a.div_exact(f) else { break };
                let Some(qb) = self.b.div_exact(f) else { break };
                self.a = qa;
                self.b = qb;
                *e -= 1;
            }
        }
        self.den.retain(|(_, e)| *e > 0);
    }

    /// Denominator lists merged to their lcm; returns (lcm, multiplier for self, multiplier for o).
    fn common_den(&self, o: &Self) -> (Vec<(Poly, u32)>, Poly, Poly) {
        let one = Poly::one(&self.ctx.vars);
        let mut lcm = self.den.clone();
        let mut ms = one.clone();
        let mut mo = one;
        for (f, e) in &o.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some((_, e2)) => {
                    if *e > *e2 {
                        ms = &ms * &f.pow(*e - *e2);
                        *e2 = *e;
                    } else if *e2 > *e {
                        mo = &mo * &f.pow(*e2 - *e);
                    }
                }
                None => {
                    ms = &ms * &f.pow(*e);
                    lcm.push((f.clone(), *e));
                }
            }
        }
        for (f, e) in &self.den {
            if !o.den.iter().any(|(g, _)| g == f) {
                mo = &mo * &f.pow(*e);
            }
        }
        (lcm, ms, mo)
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.check(o)?;
        if self.den == o.den {
            return Ok(self.with(&self.a + &o.a, &self.b + &o.b, self.den.clone()));
        }
        let (den, ms, mo) = self.common_den(o);
        Ok(self.with(
            &(&self.a * &ms) + &(&o.a * &mo),
            &(&self.b * &ms) + &(&o.b * &mo),
            den,
        ))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.check(o)?;
        let sq = &self.ctx.square;
        let a = &(&self.a * &o.a) + &(&(&self.b * &o.b) * sq);
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        let mut den = self.den.clone();
        for (f, e) in &o.den {
            match den.iter_mut().find(|(g, _)| g == f) {
                Some((_, e2)) => *e2 += e,
                None => den.push((f.clone(), *e)),
            }
        }
        Ok(self.with(a, b, den))
    }

    pub fn neg(&self) -> Self {
        RadicalElement {
            ctx: self.ctx.clone(),
            a: -&self.a,
            b: -&self.b,
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        RadicalElement {
            ctx: self.ctx.clone(),
            a: self.a.scale(c),
            b: self.b.scale(c),
            den: if c.is_zero() { Vec::new() } else { self.den.clone() },
        }
    }

    /// Numerator norm a² − b²Δ².
    pub fn norm(&self) -> Poly {
        &(&self.a * &self.a) - &(&(&self.b * &self.b) * &self.ctx.square)
    }

    /// Inverse by the conjugate. Zero norm is an error.
    pub fn inv(&self) -> Result<Self, AlgebraError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(AlgebraError::ZeroNorm);
        }
        let d = self.denominator();
        let (c, m) = monic(&n);
        let s = Q::one() / c;
        let a = (&self.a * &d).scale(&s);
        let b = (-&(&self.b * &d)).scale(&s);
        let den = if m.is_constant() { Vec::new() } else { vec![(m, 1)] };
        Ok(self.with(a, b, den))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.checked_mul(&o.inv()?)
    }

    /// Divide by a polynomial; the polynomial becomes a denominator factor.
    pub fn div_poly(&self, p: &Poly) -> Result<Self, AlgebraError> {
        if p.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let (c, m) = monic(p);
        let s = Q::one() / c;
        let mut den = self.den.clone();
        if !m.is_constant() {
            match den.iter_mut().find(|(g, _)| *g == m) {
                Some((_, e)) => *e += 1,
                None => den.push((m, 1)),
            }
        }
        Ok(self.with(self.a.scale(&s), self.b.scale(&s), den))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = RadicalElement::constant(&self.ctx, Q::one());
        for _ in 0..e {
            r = r.checked_mul(self).expect("same ring");
        }
        r
    }

    /// Formal partial derivative, with ∂Δ = ∂(Δ²)/(2Δ) = ∂(Δ²)·Δ/(2Δ²).
    pub fn diff(&self, i: usize) -> Result<Self, AlgebraError> {
        let vars = &self.ctx.vars;
        let mut num = if self.b.is_zero() {
            RadicalElement {
                ctx: self.ctx.clone(),
                a: self.a.diff(i),
                b: Poly::zero(vars),
                den: self.den.clone(),
            }
        } else {
            let sq = &self.ctx.square;
            if sq.is_zero() {
                return Err(AlgebraError::DegenerateRadical);
            }
            let two = qi(2);
            let a = &(sq * &self.a.diff(i)).scale(&two);
            let b = &(sq * &self.b.diff(i)).scale(&two) + &(&self.b * &sq.diff(i));
            RadicalElement {
                ctx: self.ctx.clone(),
                a: a.clone(),
                b,
                den: self.den.clone(),
            }
            .div_poly(&sq.scale(&two))?
        };
        // Quotient rule on each denominator factor.
        for (k, (f, e)) in self.den.iter().enumerate() {
            let df = f.diff(i);
            if df.is_zero() {
                continue;
            }
            let mut den = self.den.clone();
            den[k].1 += 1;
            let c = Q::from_integer((*e).into());
            let t = RadicalElement {
                ctx: self.ctx.clone(),
                a: (&self.a * &df).scale(&-c.clone()),
                b: (&self.b * &df).scale(&-c),
                den,
            };
            num = num.checked_add(&t)?;
        }
        num.reduce();
        Ok(num)
    }

    pub fn diff_named(&self, name: &str) -> Result<Self, AlgebraError> {
        let i = self
            .ctx
            .vars
            .index(name)
            .ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))?;
        self.diff(i)
    }

    /// Conjugate a − bΔ over the same denominator.
    pub fn conjugate(&self) -> Self {
        RadicalElement {
            ctx: self.ctx.clone(),
            a: self.a.clone(),
            b: -&self.b,
            den: self.den.clone(),
        }
    }

    /// Sanity-check evaluation in floating point; Δ is the positive root.
    pub fn to_f64(&self, pt: &[f64]) -> f64 {
        let d = self.ctx.square.to_f64(pt).sqrt();
        let mut den = 1.0;
        for (f, e) in &self.den {
            den *= f.to_f64(pt).powi(*e as i32);
        }
        (self.a.to_f64(pt) + self.b.to_f64(pt) * d) / den
    }

    /// Exact evaluation at a rational point where Δ² is a rational square.
    pub fn eval(&self, pt: &[Q]) -> Result<Q, AlgebraError> {
        let d = if self.b.is_zero() {
            Q::zero()
        } else {
            let s = self.ctx.square.eval(pt);
            super::rational::sqrt_q(&s)
                .ok_or_else(|| AlgebraError::SecondRadical(fmt_q(&s)))?
        };
        let den = self.denominator().eval(pt);
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok((self.a.eval(pt) + self.b.eval(pt) * d) / den)
    }

    /// Substitute radical elements (in another ring) for the variables.
    /// The defining square of `self` must be absent or `self` must be free of Δ.
    pub fn subst(&self, vals: &[RadicalElement]) -> Result<RadicalElement, AlgebraError> {
        let zero = vals
            .first()
            .map(|v| RadicalElement::zero(v.ctx()))
            .ok_or(AlgebraError::VariableMismatch)?;
        if !self.b.is_zero() {
            return Err(AlgebraError::SecondRadical(self.ctx.square.to_string()));
        }
        let a = self.a.eval_in(vals, &zero);
        let d = self.denominator().eval_in(vals, &zero);
        a.checked_div(&d)
    }
}

impl PartialEq for RadicalElement {
    fn eq(&self, other: &Self) -> bool {
        match self.checked_sub(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

impl Ring for RadicalElement {
    fn add(&self, o: &Self) -> Self {
        self.checked_add(o).expect("radical ring mismatch")
    }
    fn sub(&self, o: &Self) -> Self {
        self.checked_sub(o).expect("radical ring mismatch")
    }
    fn mul(&self, o: &Self) -> Self {
        self.checked_mul(o).expect("radical ring mismatch")
    }
    fn neg(&self) -> Self {
        RadicalElement::neg(self)
    }
    fn scale(&self, c: &Q) -> Self {
        RadicalElement::scale(self, c)
    }
    fn vanishes(&self) -> bool {
        RadicalElement::is_zero(self)
    }
    fn zero_like(&self) -> Self {
        RadicalElement::zero(&self.ctx)
    }
    fn one_like(&self) -> Self {
        RadicalElement::constant(&self.ctx, Q::one())
    }
}

impl fmt::Display for RadicalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = if self.b.is_zero() {
            self.a.to_string()
        } else if self.a.is_zero() {
            format!("({})*sqrt({})", self.b, self.ctx.square)
        } else {
            format!("{} + ({})*sqrt({})", self.a, self.b, self.ctx.square)
        };
        if self.den.is_empty() {
            return write!(f, "{num}");
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(p, e)| {
                if *e == 1 {
                    format!("({p})")
                } else {
                    format!("({p})^{e}")
                }
            })
            .collect();
        write!(f, "({num})/{}", den.join("*"))
    }
}
