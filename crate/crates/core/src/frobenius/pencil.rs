//! Miura variables on g0, the induced brackets, and their pull-back to
//! polynomial coordinates on the slice.

use std::collections::HashMap;

use num_traits::Zero;

use crate::exact::linear::{self, Matrix};
use crate::exact::{qi, AlgebraError, Monomial, Poly, VarSet, Vars, Q};
use crate::grading::GradedDecomposition;
use crate::lie::{LieAlgebra, LieElement};

use super::FrobeniusError;

/// q = Σ νᵢ eᵢ over a basis of g0, with Π^{ij} = (q | [dνᵢ, dνⱼ]).
#[derive(Clone, Debug)]
pub struct MiuraSystem {
    pub vars: Vars,
    pub basis: Vec<usize>,
    pub q: LieElement<Poly>,
    pub kinv: Matrix,
    pub pi: Vec<Vec<Poly>>,
}

impl MiuraSystem {
    pub fn new(g: &LieAlgebra, dec: &GradedDecomposition) -> Result<Self, AlgebraError> {
        let basis = dec.basis(0).to_vec();
        let m = basis.len();
        let names: Vec<String> = (1..=m).map(|i| format!("n{i}")).collect();
        let vars = VarSet::new(&names);
        let k: Matrix = basis
            .iter()
            .map(|&a| basis.iter().map(|&b| g.form_basis(a, b)).collect())
            .collect();
        let kinv = linear::inverse(&k)?;
        let mut qv = LieElement::zero();
        for (i, &b) in basis.iter().enumerate() {
            qv.add_term(b, Poly::var(&vars, i));
        }
        let dnu: Vec<LieElement<Q>> = kinv
            .iter()
            .map(|row| {
                let mut e = LieElement::zero();
                for (c, &b) in row.iter().zip(&basis) {
                    e.add_term(b, c.clone());
                }
                e
            })
            .collect();
        let zero = Poly::zero(&vars);
        let mut pi = vec![vec![zero.clone(); m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let br = g.bracket(&dnu[i], &dnu[j]).map(|c| Poly::constant(&vars, c.clone()));
                let v = g.form(&qv, &br, &zero);
                pi[j][i] = -&v;
                pi[i][j] = v;
            }
        }
        Ok(MiuraSystem {
            vars,
            basis,
            q: qv,
            kinv,
            pi,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gradient(&self, f: &Poly) -> Vec<Poly> {
        (0..self.dim()).map(|i| f.diff(i)).collect()
    }

    /// {f, h} from gradients.
    pub fn bracket_grad(&self, df: &[Poly], dh: &[Poly]) -> Poly {
        let mut s = Poly::zero(&self.vars);
        for (i, a) in df.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in dh.iter().enumerate() {
                if b.is_zero() || self.pi[i][j].is_zero() {
                    continue;
                }
                s = &s + &(&(a * &self.pi[i][j]) * b);
            }
        }
        s
    }

    /// ∇f K⁻¹ ∇h from gradients.
    pub fn metric_grad(&self, df: &[Poly], dh: &[Poly]) -> Poly {
        let mut s = Poly::zero(&self.vars);
        for (i, a) in df.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in dh.iter().enumerate() {
                let k = &self.kinv[i][j];
                if b.is_zero() || k.is_zero() {
                    continue;
                }
                s = &s + &(a * b).scale(k);
            }
        }
        s
    }

    /// Components X^k = Σ_l Π^{kl} ∂_l f of the Hamiltonian field of f.
    pub fn field(&self, df: &[Poly]) -> Vec<Poly> {
        (0..self.dim())
            .map(|k| {
                let mut s = Poly::zero(&self.vars);
                for (l, d) in df.iter().enumerate() {
                    if !d.is_zero() && !self.pi[k][l].is_zero() {
                        s = &s + &(&self.pi[k][l] * d);
                    }
                }
                s
            })
            .collect()
    }
}

/// Expresses polynomials in the Miura variables through a set of weighted
/// coordinate images.
pub struct CoordinateFitter {
    pub coords: Vars,
    pub weights: Vec<i64>,
    pub images: Vec<Poly>,
    cache: HashMap<Vec<u32>, Poly>,
}

impl CoordinateFitter {
    pub fn new(coords: Vars, weights: Vec<i64>, images: Vec<Poly>) -> Self {
        CoordinateFitter {
            coords,
            weights,
            images,
            cache: HashMap::new(),
        }
    }

    pub fn image(&mut self, m: &[u32]) -> Poly {
        if let Some(p) = self.cache.get(m) {
            return p.clone();
        }
        let p = match m.iter().position(|&e| e > 0) {
            None => Poly::one(self.images[0].vars()),
            Some(i) => {
                let mut rest = m.to_vec();
                rest[i] -= 1;
                &self.image(&rest) * &self.images[i]
            }
        };
        self.cache.insert(m.to_vec(), p.clone());
        p
    }

    /// Write `target` as a polynomial of the given weight in the coordinates
    /// plus a rational combination of `extra`.
    pub fn fit(&mut self, target: &Poly, weight: i64, extra: &[Poly]) -> Option<(Poly, Vec<Q>)> {
        if target.is_zero() {
            return Some((Poly::zero(&self.coords), vec![Q::zero(); extra.len()]));
        }
        let monos = linear::weighted_monomials(&self.weights, weight);
        let mut basis: Vec<Poly> = monos.iter().map(|m| self.image(m)).collect();
        basis.extend(extra.iter().cloned());
        let c = linear::fit(target, &basis)?;
        let mut p = Poly::zero(&self.coords);
        for (m, x) in monos.into_iter().zip(&c) {
            if !x.is_zero() {
                p.add_term(Monomial(m), x.clone());
            }
        }
        Some((p, c[basis.len() - extra.len()..].to_vec()))
    }
}

/// Bivector P^{ij} on the coordinates.
pub type Bivector = Vec<Vec<Poly>>;

/// First triple (i, j, k) where the Jacobi identity fails.
pub fn jacobi_defect(p: &Bivector) -> Option<(usize, usize, usize)> {
    let n = p.len();
    let d: Vec<Vec<Vec<Poly>>> = p
        .iter()
        .map(|row| row.iter().map(|e| (0..n).map(|l| e.diff(l)).collect()).collect())
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut s = Poly::zero(p[0][0].vars());
                for l in 0..n {
                    for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                        if !p[x][l].is_zero() && !d[y][z][l].is_zero() {
                            s = &s + &(&p[x][l] * &d[y][z][l]);
                        }
                    }
                }
                if !s.is_zero() {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

/// Rank of a bivector at a rational point.
pub fn rank_at(p: &Bivector, pt: &[Q]) -> usize {
    let m: Matrix = p.iter().map(|r| r.iter().map(|e| e.eval(pt)).collect()).collect();
    linear::rank(&m)
}

/// The bracket A on (N¹..Nʳ, u) and its unit derivative B = ∂A/∂N^unit.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub coords: Vars,
    pub weights: Vec<i64>,
    /// number of Casimir coordinates, which come first
    pub r: usize,
    pub unit: usize,
    pub a: Bivector,
    pub b: Bivector,
}

impl Pencil {
    pub fn fit(
        miura: &MiuraSystem,
        fitter: &mut CoordinateFitter,
        r: usize,
        unit: usize,
    ) -> Result<Self, FrobeniusError> {
        let n = fitter.images.len();
        let grads: Vec<Vec<Poly>> = fitter.images.iter().map(|f| miura.gradient(f)).collect();
        let zero = Poly::zero(&fitter.coords);
        let mut a = vec![vec![zero.clone(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let t = miura.bracket_grad(&grads[i], &grads[j]);
                let w = fitter.weights[i] + fitter.weights[j] - 1;
                let (p, _) = fitter.fit(&t, w, &[]).ok_or_else(|| FrobeniusError::NotClosed {
                    what: "bracket",
                    a: fitter.coords.names()[i].clone(),
                    b: fitter.coords.names()[j].clone(),
                })?;
                a[j][i] = -&p;
                a[i][j] = p;
            }
        }
        let b = a.iter().map(|row| row.iter().map(|e| e.diff(unit)).collect()).collect();
        Ok(Pencil {
            coords: fitter.coords.clone(),
            weights: fitter.weights.clone(),
            r,
            unit,
            a,
            b,
        })
    }

    pub fn set_unit(&mut self, unit: usize) {
        self.unit = unit;
        self.b = self.a.iter().map(|row| row.iter().map(|e| e.diff(unit)).collect()).collect();
    }

    pub fn sum(&self) -> Bivector {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// A is affine in the unit coordinate.
    pub fn linear_in_unit(&self) -> bool {
        self.b.iter().flatten().all(|e| e.diff(self.unit).is_zero())
    }

    /// Every Nᵃ is a Casimir of B.
    pub fn casimirs_of_b(&self) -> Option<(usize, usize)> {
        for i in 0..self.dim() {
            for a in 0..self.r {
                if !self.b[i][a].is_zero() {
                    return Some((i, a));
                }
            }
        }
        None
    }

    /// The Nᵃ commute under A.
    pub fn involutive(&self) -> Option<(usize, usize)> {
        for a in 0..self.r {
            for b in a + 1..self.r {
                if !self.a[a][b].is_zero() {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Determinant of B on the u-block, which should be a nonzero constant.
    pub fn u_block_det(&self) -> Option<Q> {
        let n = self.dim();
        if n == self.r {
            return Some(qi(1));
        }
        let block: Vec<Vec<Poly>> = (self.r..n)
            .map(|i| (self.r..n).map(|j| self.b[i][j].clone()).collect())
            .collect();
        let d = poly_det(&block);
        d.as_constant().filter(|c| !c.is_zero())
    }
}

/// Determinant by cofactor expansion; the blocks here are small.
pub fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        unreachable!("empty block")
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut s = Poly::zero(m[0][0].vars());
    for (j, e) in m[0].iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let t = e * &poly_det(&minor);
        s = if j % 2 == 0 { &s + &t } else { &s - &t };
    }
    s
}
