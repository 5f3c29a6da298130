//! From a regular primitive class to a Frobenius manifold: Casimir densities,
//! the Poisson pencil on the slice, its slow variety, the restricted metric
//! and the potential.

pub mod metric;
pub mod pencil;
pub mod potential;

use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dressing::{
    build_regular_element, casimir_densities, CasimirDensitySet, exponent_generators, Dresser, DressingError, LoopAlgebra,
    LoopElement, RegularElement, DEFAULT_ATTEMPTS, DEFAULT_SEED, DEFAULT_WINDOW,
};
use crate::exact::linear::{self, Matrix};
use crate::exact::quadratic::{solve_quadratic_system, Sign};
use crate::exact::rational::fmt_q;
use crate::exact::{qi, AlgebraError, Monomial, Poly, RadicalCtx, RadicalElement, Ring, VarSet, Vars, Q};
use crate::gauge::{canonical_slice, CanonicalSlice, GaugeError, GaugeFixer};
use crate::grading::{CheckResult, GradedDecomposition, Gradation, GradingError};
use crate::lie::{LieAlgebra, LieError, LieType};
use crate::reference;
use crate::registry::ConjugacyClassRecord;

use metric::{Tensor2, Tensor3};
use pencil::{CoordinateFitter, MiuraSystem, Pencil};

#[derive(Debug, Error)]
pub enum FrobeniusError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Dressing(#[from] DressingError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error("{what} of {a} and {b} is not polynomial in the slice coordinates")]
    NotClosed { what: &'static str, a: String, b: String },
    #[error("density N{0} is not a polynomial in the slice coordinates")]
    DensityNotInvariant(usize),
    #[error("linear parts of the densities have rank {rank}, expected {expected}")]
    DensitiesDependent { rank: usize, expected: usize },
    #[error("no bracket Nᵃ with the remaining coordinates is nonzero; the slow variety is not cut out")]
    Underdetermined,
    #[error("slow-variety constraints are not solvable by one square root ({0}); a numeric fallback is not available")]
    NumericFallback(String),
    #[error("no {0} branch on the slow variety")]
    NoBranch(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// skips the Jacobi identities and the curvature tensor
    Fast,
    Full,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// None keeps the worked Λ where one exists and uses the default seed elsewhere
    pub seed: Option<u64>,
    pub window: (i64, i64),
    pub branch: Sign,
    pub level: Level,
    pub attempts: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            seed: None,
            window: DEFAULT_WINDOW,
            branch: Sign::Plus,
            level: Level::Full,
            attempts: DEFAULT_ATTEMPTS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaSource {
    Reference,
    Search(u64),
}

fn is_reference_class(rec: &ConjugacyClassRecord) -> bool {
    rec.algebra == LieType::D && rec.rank == 4 && rec.matches("D4(a1)")
}

/// Everything fixed before any polynomial work: the loop algebra, Λ, the
/// Heisenberg generators and the canonical slice with its coordinates.
pub struct ClassContext {
    pub record: ConjugacyClassRecord,
    pub lp: LoopAlgebra,
    pub regular: RegularElement,
    pub source: LambdaSource,
    pub generators: Vec<LoopElement<Q>>,
    pub slice: CanonicalSlice,
    /// names and weights of the slice coordinates
    pub ds_names: Vec<String>,
    pub ds_weights: Vec<i64>,
    reference_coords: bool,
}

impl ClassContext {
    pub fn new(rec: &ConjugacyClassRecord, opts: &PipelineOptions) -> Result<Self, FrobeniusError> {
        let g = LieAlgebra::build(rec.algebra, rec.rank)?;
        let dec = GradedDecomposition::new(&g, Gradation::new(&g, &rec.s)?);
        let lp = LoopAlgebra::new(g.clone(), dec, opts.window);
        if opts.seed.is_none() && is_reference_class(rec) {
            let ip = g.parse_element(reference::I_PLUS)?;
            let c = g.parse_element(reference::C_MINUS)?;
            let regular = RegularElement::from_parts(&lp, ip, c)?;
            crate::dressing::certify(&lp, rec, &regular.lambda)?;
            let slice = CanonicalSlice::from_vectors(reference::slice(&g));
            return Ok(ClassContext {
                record: rec.clone(),
                generators: reference::generators(&g),
                lp,
                regular,
                source: LambdaSource::Reference,
                slice,
                ds_names: reference::COORDINATE_NAMES.iter().map(|s| s.to_string()).collect(),
                ds_weights: vec![2, 2, 2, 3, 4, 4],
                reference_coords: true,
            });
        }
        let seed = opts.seed.unwrap_or(DEFAULT_SEED);
        let regular = build_regular_element(&lp, rec, seed, opts.attempts)?;
        let generators = exponent_generators(&lp, &regular.lambda, rec)?;
        let slice = canonical_slice(&g, &lp.dec, &regular.i_plus, &regular.i_minus, &rec.weights)?;
        let ds_weights: Vec<i64> = slice.vectors.iter().map(|(k, _)| 1 - k).collect();
        let ds_names = ds_weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let same: Vec<usize> = (0..ds_weights.len()).filter(|&j| ds_weights[j] == *w).collect();
                if same.len() == 1 {
                    format!("w{w}")
                } else {
                    format!("w{w}_{}", same.iter().position(|&j| j == i).unwrap() + 1)
                }
            })
            .collect();
        Ok(ClassContext {
            record: rec.clone(),
            lp,
            regular,
            source: LambdaSource::Search(seed),
            generators,
            slice,
            ds_names,
            ds_weights,
            reference_coords: false,
        })
    }

    pub fn order(&self) -> i64 {
        self.record.order
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail: detail.into(),
    }
}

fn skipped(name: &'static str) -> CheckResult {
    check(name, true, "skipped at level fast")
}

/// Densities, DS coordinates and the pencil, before the slow variety.
pub struct PencilData {
    pub miura: MiuraSystem,
    /// Nᵃ in the Miura variables
    pub densities: Vec<Poly>,
    pub degrees: Vec<i64>,
    /// Nᵃ in the slice coordinates
    pub densities_ds: Vec<Poly>,
    pub ds_vars: Vars,
    pub pencil: Pencil,
    pub fitter: CoordinateFitter,
    pub dressing_residual: bool,
}

/// The Miura system with its Casimir densities and the gauge-fixed slice
/// coefficients, all polynomial in the Miura variables.
pub struct MiuraData {
    pub miura: MiuraSystem,
    pub dens: CasimirDensitySet,
    pub coords: Vec<Poly>,
    pub dressing_residual: bool,
}

pub fn miura_densities(ctx: &ClassContext) -> Result<MiuraData, FrobeniusError> {
    let lp = &ctx.lp;
    let miura = MiuraSystem::new(&lp.g, &lp.dec)?;
    let depth = -ctx.record.exponents.iter().copied().max().unwrap_or(1);
    let dressing = Dresser::new(lp, ctx.regular.lambda.clone()).dress(
        &LoopElement::at_power(&miura.q, 0),
        depth,
        &miura.vars,
    )?;
    let dens = casimir_densities(lp, &dressing, &ctx.generators, &miura.vars);
    let fixer = GaugeFixer::new(&lp.g, &lp.dec, ctx.regular.i_plus.clone(), &ctx.slice)?;
    let fix = fixer.fix(&miura.q, &miura.vars)?;
    Ok(MiuraData {
        miura,
        dens,
        coords: fix.coords,
        dressing_residual: dressing.residual.is_zero(),
    })
}

pub fn build_pencil(ctx: &ClassContext) -> Result<PencilData, FrobeniusError> {
    let MiuraData {
        miura,
        dens,
        coords,
        dressing_residual,
    } = miura_densities(ctx)?;
    let r = dens.len();
    let ds_images = if ctx.reference_coords {
        reference::coordinates(&coords)
    } else {
        coords
    };
    let ds_vars = VarSet::new(&ctx.ds_names);
    let mut ds_fit = CoordinateFitter::new(ds_vars.clone(), ctx.ds_weights.clone(), ds_images.clone());
    let mut densities_ds = Vec::new();
    for (a, (n, d)) in dens.densities.iter().zip(&dens.degrees).enumerate() {
        let (p, _) = ds_fit.fit(n, *d, &[]).ok_or(FrobeniusError::DensityNotInvariant(a + 1))?;
        densities_ds.push(p);
    }

    // pivots of the linear parts become the Nᵃ, the rest stay as u
    let m = ds_vars.len();
    let lin: Matrix = densities_ds
        .iter()
        .map(|p| {
            (0..m)
                .map(|j| {
                    let mut e = vec![0; m];
                    e[j] = 1;
                    p.coeff(&Monomial(e))
                })
                .collect()
        })
        .collect();
    let (_, piv) = linear::rref(&lin);
    if piv.len() != r {
        return Err(FrobeniusError::DensitiesDependent {
            rank: piv.len(),
            expected: r,
        });
    }
    let free: Vec<usize> = (0..m).filter(|j| !piv.contains(j)).collect();
    let mut names: Vec<String> = (1..=r).map(|a| format!("N{a}")).collect();
    names.extend(free.iter().map(|&j| ctx.ds_names[j].clone()));
    let mut weights = dens.degrees.clone();
    weights.extend(free.iter().map(|&j| ctx.ds_weights[j]));
    let mut images = dens.densities.clone();
    images.extend(free.iter().map(|&j| ds_images[j].clone()));
    let mut fitter = CoordinateFitter::new(VarSet::new(&names), weights, images);

    let top = *dens.degrees.iter().max().unwrap_or(&0);
    let candidates: Vec<usize> = (0..r).rev().filter(|&a| dens.degrees[a] == top).collect();
    let mut pencil = Pencil::fit(&miura, &mut fitter, r, candidates[0])?;
    for &c in &candidates {
        pencil.set_unit(c);
        if pencil.linear_in_unit() && pencil.casimirs_of_b().is_none() {
            break;
        }
    }
    if !pencil.linear_in_unit() || pencil.casimirs_of_b().is_some() {
        pencil.set_unit(candidates[0]);
    }
    Ok(PencilData {
        miura,
        densities: dens.densities,
        degrees: dens.degrees,
        densities_ds,
        ds_vars,
        pencil,
        fitter,
        dressing_residual,
    })
}

/// Solution of the slow-variety constraints on one branch.
#[derive(Clone, Debug)]
pub struct SlowVariety {
    pub ctx: Arc<RadicalCtx>,
    pub sign: Sign,
    pub unknowns: Vec<String>,
    pub values: Vec<RadicalElement>,
    /// values for every pencil coordinate: Nᵃ then u
    pub point: Vec<RadicalElement>,
}

pub fn slow_variety(pd: &PencilData, sign: Sign) -> Result<SlowVariety, FrobeniusError> {
    let p = &pd.pencil;
    let r = p.r;
    let n = p.dim();
    let nvars = VarSet::new(&p.coords.names()[..r]);
    if n == r {
        let ctx = RadicalCtx::plain(&nvars);
        let point = (0..r).map(|a| RadicalElement::var(&ctx, a)).collect();
        return Ok(SlowVariety {
            ctx,
            sign: Sign::Rational,
            unknowns: Vec::new(),
            values: Vec::new(),
            point,
        });
    }
    let eqs: Vec<Poly> = (1..r)
        .map(|a| (r..n).map(|u| p.a[u][a].clone()).collect::<Vec<_>>())
        .find(|e| e.iter().any(|x| !x.is_zero()))
        .ok_or(FrobeniusError::Underdetermined)?;
    let unknowns: Vec<String> = p.coords.names()[r..].to_vec();
    let unk: Vec<&str> = unknowns.iter().map(|s| s.as_str()).collect();
    let sol = solve_quadratic_system(&eqs, &unk).map_err(|e| match e {
        AlgebraError::NotQuadratic(m) => FrobeniusError::NumericFallback(m),
        other => FrobeniusError::Algebra(other),
    })?;
    let br = sol
        .branch(sign)
        .or_else(|| sol.branch(Sign::Rational).filter(|b| !b.is_trivial() || sol.branches.len() == 1))
        .ok_or(FrobeniusError::NoBranch(sign.symbol()))?;
    let ctx = sol.ctx.clone();
    let mut point: Vec<RadicalElement> = (0..r).map(|a| RadicalElement::var(&ctx, a)).collect();
    point.extend(br.values.iter().cloned());
    Ok(SlowVariety {
        ctx,
        sign: br.sign,
        unknowns,
        values: br.values.clone(),
        point,
    })
}

fn on_variety(p: &Poly, sv: &SlowVariety) -> RadicalElement {
    p.eval_in(&sv.point, &RadicalElement::zero(&sv.ctx))
}

/// H^{ab} on the pencil coordinates with ∇Nᵃ K⁻¹ ∇Nᵇ = H^{ab} modulo the
/// Hamiltonian fields of the densities.
pub fn metric_lift(pd: &mut PencilData) -> Result<Vec<Vec<Poly>>, FrobeniusError> {
    let r = pd.pencil.r;
    let miura = &pd.miura;
    let grads: Vec<Vec<Poly>> = pd.densities.iter().map(|f| miura.gradient(f)).collect();
    let fields: Vec<Vec<Poly>> = grads.iter().map(|g| miura.field(g)).collect();
    let ones = vec![1i64; miura.dim()];
    let zero = Poly::zero(&pd.pencil.coords);
    let mut h = vec![vec![zero; r]; r];
    for a in 0..r {
        for b in a..r {
            let target = miura.metric_grad(&grads[a], &grads[b]);
            let tot = pd.degrees[a] + pd.degrees[b] - 2;
            let mut extra = Vec::new();
            for (c, x) in fields.iter().enumerate() {
                let mons = linear::weighted_monomials(&ones, tot - pd.degrees[c]);
                for xk in x.iter().filter(|p| !p.is_zero()) {
                    for e in &mons {
                        extra.push(&Poly::monomial(&miura.vars, Monomial(e.clone()), qi(1)) * xk);
                    }
                }
            }
            let (p, _) = pd.fitter.fit(&target, tot, &extra).ok_or_else(|| FrobeniusError::NotClosed {
                what: "metric",
                a: format!("N{}", a + 1),
                b: format!("N{}", b + 1),
            })?;
            h[b][a] = p.clone();
            h[a][b] = p;
        }
    }
    Ok(h)
}

/// Flat structure on the slow variety.
#[derive(Clone, Debug)]
pub struct FrobeniusStructure {
    pub metric: Tensor2,
    pub gamma: Tensor2,
    pub eta: Matrix,
    pub eta_low: Matrix,
    pub charge: Q,
    pub dvals: Vec<Q>,
    pub potential: Option<RadicalElement>,
}

#[derive(Clone, Debug)]
pub struct FrobeniusReport {
    pub class: String,
    pub lambda: String,
    pub source: LambdaSource,
    pub coordinates: Vec<String>,
    pub degrees: Vec<i64>,
    pub order: i64,
    pub unit: usize,
    pub densities: Vec<String>,
    pub constraints: Vec<(String, String)>,
    pub radical: Option<String>,
    pub branch: Sign,
    pub structure: Option<FrobeniusStructure>,
    pub checks: Vec<CheckResult>,
}

impl FrobeniusReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn potential(&self) -> Option<&RadicalElement> {
        self.structure.as_ref().and_then(|s| s.potential.as_ref())
    }

    pub fn to_json(&self) -> Value {
        let q = |x: &Q| fmt_q(x);
        let mat = |m: &Matrix| -> Vec<Vec<String>> { m.iter().map(|r| r.iter().map(q).collect()).collect() };
        let ten = |m: &Tensor2| -> Vec<Vec<String>> { m.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect() };
        let structure = self.structure.as_ref().map(|s| {
            json!({
                "charge": q(&s.charge),
                "euler": self.coordinates[..self.degrees.len()]
                    .iter()
                    .zip(&s.dvals)
                    .map(|(n, d)| format!("{}*{}", q(d), n))
                    .collect::<Vec<_>>(),
                "eta": mat(&s.eta),
                "metric": ten(&s.metric),
                "gamma": ten(&s.gamma),
                "potential": s.potential.as_ref().map(|f| f.to_string()),
            })
        });
        json!({
            "version": 1,
            "class": self.class,
            "lambda": self.lambda,
            "lambda_source": match self.source {
                LambdaSource::Reference => "reference".to_string(),
                LambdaSource::Search(s) => format!("search:{s}"),
            },
            "order": self.order,
            "coordinates": self.coordinates,
            "degrees": self.degrees,
            "unit": self.coordinates[self.unit],
            "densities": self.densities,
            "constraints": self.constraints.iter().map(|(u, v)| json!({"coordinate": u, "value": v})).collect::<Vec<_>>(),
            "radical": self.radical,
            "branch": self.branch.symbol(),
            "structure": structure,
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let r = self.degrees.len();
        out += &format!("class {}  (N = {}, Λ {})\n", self.class, self.order, match self.source {
            LambdaSource::Reference => "reference".to_string(),
            LambdaSource::Search(s) => format!("seed {s}"),
        });
        out += &format!("Λ = {}\n", self.lambda);
        for (a, d) in self.densities.iter().enumerate() {
            out += &format!("N{} [{}] = {}\n", a + 1, self.degrees[a], d);
        }
        if let Some(rad) = &self.radical {
            out += &format!("Δ² = {rad}\n");
        }
        for (u, v) in &self.constraints {
            out += &format!("{u} = {v}\n");
        }
        out += &format!("unit ∂/∂{}  branch {}\n", self.coordinates[self.unit], self.branch.symbol());
        if let Some(s) = &self.structure {
            out += &format!("d = {}\n", fmt_q(&s.charge));
            for a in 0..r {
                out += &format!(
                    "η[{}] = [{}]\n",
                    a + 1,
                    s.eta[a].iter().map(fmt_q).collect::<Vec<_>>().join(", ")
                );
            }
            for a in 0..r {
                for b in 0..r {
                    out += &format!("γ{}{} = {}\n", a + 1, b + 1, s.gamma[a][b]);
                }
            }
            if let Some(f) = &s.potential {
                out += &format!("F = {f}\n");
            }
        }
        for c in &self.checks {
            out += &format!("{:5} {:<22} {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

fn random_point(seed: u64, n: usize) -> Vec<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: i64 = rng.gen_range(1..=9);
            qi(if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect()
}

fn pencil_checks(pd: &PencilData, level: Level, seed: u64) -> Vec<CheckResult> {
    let p = &pd.pencil;
    let names = p.coords.names();
    let mut out = vec![check(
        "dressing",
        pd.dressing_residual,
        "h is free of positive grades",
    )];
    if level == Level::Full {
        for (name, bv) in [("jacobi-a", p.a.clone()), ("jacobi-b", p.b.clone()), ("jacobi-pencil", p.sum())] {
            out.push(match pencil::jacobi_defect(&bv) {
                None => check(name, true, "all triples"),
                Some((i, j, k)) => check(name, false, format!("({}, {}, {})", names[i], names[j], names[k])),
            });
        }
    } else {
        out.extend(["jacobi-a", "jacobi-b", "jacobi-pencil"].map(skipped));
    }
    let pt = random_point(seed, p.dim());
    let rank = pencil::rank_at(&p.b, &pt);
    out.push(check(
        "corank",
        rank + p.r == p.dim(),
        format!("rank B = {rank} of {}", p.dim()),
    ));
    out.push(match p.casimirs_of_b() {
        None => check("casimirs", true, "B(·, Nᵃ) = 0"),
        Some((i, a)) => check("casimirs", false, format!("B({}, N{}) ≠ 0", names[i], a + 1)),
    });
    out.push(match p.involutive() {
        None => check("involution", true, "A(Nᵃ, Nᵇ) = 0"),
        Some((a, b)) => check("involution", false, format!("A(N{}, N{}) ≠ 0", a + 1, b + 1)),
    });
    let first = (0..p.dim()).find(|&i| !p.a[i][0].is_zero());
    out.push(check(
        "first-casimir",
        first.is_none(),
        first.map_or("N1 is a Casimir of A".into(), |i| format!("A({}, N1) ≠ 0", names[i])),
    ));
    out.push(check("unit-linear", p.linear_in_unit(), format!("A is affine in {}", names[p.unit])));
    out.push(match p.u_block_det() {
        Some(d) => check("u-block", true, format!("det = {}", fmt_q(&d))),
        None => check("u-block", false, "determinant is not a nonzero constant"),
    });
    out
}

/// The sphere metric must register as curved; guards the curvature routine.
pub fn curvature_control() -> Result<bool, AlgebraError> {
    let vars = VarSet::new(&["x", "y"]);
    let ctx = RadicalCtx::plain(&vars);
    let conf = Poly::parse(&vars, "(1 + x^2 + y^2)^2/4")?;
    let e = RadicalElement::from_poly(&ctx, conf);
    let z = RadicalElement::zero(&ctx);
    let g = vec![vec![e.clone(), z.clone()], vec![z, e]];
    let gam = metric::levi_civita(&g)?;
    Ok(metric::curvature_defect(&g, &gam)?.is_some())
}

fn structure(
    pd: &PencilData,
    sv: &SlowVariety,
    h: &[Vec<Poly>],
    order: i64,
    level: Level,
    checks: &mut Vec<CheckResult>,
) -> Result<Option<FrobeniusStructure>, FrobeniusError> {
    let r = pd.pencil.r;
    let unit = pd.pencil.unit;
    let g: Tensor2 = h.iter().map(|row| row.iter().map(|e| on_variety(e, sv)).collect()).collect();

    // η = ∂_e g, constant and nondegenerate
    let mut eta = linear::zeros(r, r);
    let mut eta_ok = true;
    for a in 0..r {
        for b in 0..r {
            let d = g[a][b].diff(unit)?;
            match d.as_constant() {
                Some(c) => eta[a][b] = c,
                None => eta_ok = false,
            }
            if !d.diff(unit)?.is_zero() {
                eta_ok = false;
            }
        }
    }
    let eta_low = linear::inverse(&eta).ok();
    checks.push(check(
        "eta",
        eta_ok && eta_low.is_some(),
        if eta_ok { "∂_e g is constant" } else { "∂_e g is not constant" },
    ));
    let Some(eta_low) = eta_low.filter(|_| eta_ok) else {
        return Ok(None);
    };

    let nq = qi(order);
    let dvals: Vec<Q> = pd.degrees.iter().map(|&k| qi(k) / &nq).collect();
    let charge = qi(1) - qi(2) / &nq;
    let paired = (0..r).all(|a| (0..r).all(|b| eta[a][b].is_zero() || &dvals[a] + &dvals[b] == qi(2) - &charge));
    checks.push(check(
        "charge",
        paired && dvals[unit] == qi(1),
        format!("d = {}", fmt_q(&charge)),
    ));

    // g^{1k} = c deg_k Nᵏ
    let ctx = &sv.ctx;
    let lie = RadicalElement::var(ctx, 0).scale(&qi(pd.degrees[0]));
    let c = g[0][0].checked_div(&lie)?.as_constant();
    let lie_ok = c.as_ref().is_some_and(|c| {
        !c.is_zero()
            && (0..r).all(|k| g[0][k].sub(&RadicalElement::var(ctx, k).scale(&(c * qi(pd.degrees[k])))).is_zero())
    });
    checks.push(check(
        "euler-row",
        lie_ok,
        c.map_or("g^{11} is not proportional to N1".into(), |c| format!("g^{{1k}} = {} deg_k Nᵏ", fmt_q(&c))),
    ));

    let mut homog = true;
    for a in 0..r {
        for b in 0..r {
            let mut e = RadicalElement::zero(ctx);
            for cc in 0..r {
                e = e.add(&RadicalElement::var(ctx, cc).mul(&g[a][b].diff(cc)?).scale(&qi(pd.degrees[cc])));
            }
            if !e.sub(&g[a][b].scale(&qi(pd.degrees[a] + pd.degrees[b] - 2))).is_zero() {
                homog = false;
            }
        }
    }
    checks.push(check("metric-degree", homog, "L_E g = (d − 1) g"));

    let gamma: Tensor2 = (0..r)
        .map(|a| {
            (0..r)
                .map(|b| {
                    let w = (&charge - qi(1) + &dvals[a] * qi(2)) / ((&charge - qi(1) + &dvals[a] + &dvals[b]) * qi(2));
                    g[a][b].scale(&w)
                })
                .collect()
        })
        .collect();
    if level == Level::Full {
        let gam: Tensor3 = metric::split_connection(&gamma)?;
        checks.push(match metric::torsion_defect(&g, &gam) {
            None => check("torsion", true, "g^{as}Γ^{bc}_s symmetric"),
            Some(t) => check("torsion", false, format!("{t:?}")),
        });
        checks.push(match metric::curvature_defect(&g, &gam)? {
            None => check("flatness", true, "R = 0"),
            Some(t) => check("flatness", false, format!("R{t:?} ≠ 0")),
        });
        checks.push(check("curvature-control", curvature_control()?, "sphere is curved"));
    } else {
        checks.extend(["torsion", "flatness", "curvature-control"].map(skipped));
    }

    let s = potential::hessian(&g, &eta_low, &dvals, &charge);
    let f = potential::integrate(&s, &dvals, &charge)?;
    checks.push(check("potential", f.is_some(), "∂_a∂_b F = S_ab"));
    if let Some(f) = &f {
        let f3 = potential::third_derivatives(f, r)?;
        let unit_ok = (0..r).all(|a| (0..r).all(|b| f3[unit][a][b].as_constant().as_ref() == Some(&eta_low[a][b])));
        checks.push(check("unit", unit_ok, "∂_e∂_a∂_b F = η_ab"));
        let bad = potential::wdvv_defects(&f3, &eta);
        checks.push(check(
            "wdvv",
            bad.is_empty(),
            if bad.is_empty() { "all quadruples".to_string() } else { format!("{} failing, first {:?}", bad.len(), bad[0]) },
        ));
        let e = potential::euler_defect(f, &dvals, &charge)?;
        checks.push(check("homogeneity", e.is_zero(), "E F = (3 − d) F"));
    }
    Ok(Some(FrobeniusStructure {
        metric: g,
        gamma,
        eta,
        eta_low,
        charge,
        dvals,
        potential: f,
    }))
}

/// Run the whole construction for one class.
pub fn run(rec: &ConjugacyClassRecord, opts: &PipelineOptions) -> Result<FrobeniusReport, FrobeniusError> {
    let ctx = ClassContext::new(rec, opts)?;
    let mut pd = build_pencil(&ctx)?;
    run_with(&ctx, &mut pd, opts)
}

/// Continue from a built pencil, e.g. to compare branches.
pub fn run_with(ctx: &ClassContext, pd: &mut PencilData, opts: &PipelineOptions) -> Result<FrobeniusReport, FrobeniusError> {
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let mut checks = pencil_checks(pd, opts.level, seed);
    let sv = slow_variety(pd, opts.branch)?;
    let p = &pd.pencil;
    let r = p.r;
    let mut vanish = true;
    for u in r..p.dim() {
        for a in 0..r {
            if !on_variety(&p.a[u][a], &sv).is_zero() {
                vanish = false;
            }
        }
    }
    checks.push(check("slow-variety", vanish, "A(u, Nᵃ) = 0 on the branch"));
    let free = (r..p.dim()).all(|u| (0..r).all(|a| p.a[u][a].diff(p.unit).is_zero()));
    checks.push(check(
        "unit-free-constraints",
        free,
        format!("A(u, Nᵃ) does not involve {}", p.coords.names()[p.unit]),
    ));
    let h = metric_lift(pd)?;
    let st = structure(pd, &sv, &h, ctx.order(), opts.level, &mut checks)?;
    let p = &pd.pencil;
    let radical = sv.ctx.has_radical().then(|| sv.ctx.square().to_string());
    Ok(FrobeniusReport {
        class: ctx.record.label.clone(),
        lambda: ctx.lp.format(&ctx.regular.lambda),
        source: ctx.source.clone(),
        coordinates: p.coords.names().to_vec(),
        degrees: pd.degrees.clone(),
        order: ctx.order(),
        unit: p.unit,
        densities: pd.densities_ds.iter().map(|d| d.to_string()).collect(),
        constraints: sv.unknowns.iter().cloned().zip(sv.values.iter().map(|v| v.to_string())).collect(),
        radical,
        branch: sv.sign,
        structure: st,
        checks,
    })
}
