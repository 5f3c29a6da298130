//! Dense and sparse exact linear algebra over Q.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::poly::{Monomial, Poly};
use super::rational::Q;
use super::AlgebraError;

pub type Matrix = Vec<Vec<Q>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b.first().map(|r| r.len()).unwrap_or(0);
    a.iter()
        .map(|r| {
            (0..n)
                .map(|j| {
                    let mut s = Q::zero();
                    for (k, x) in r.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            s += x * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn matvec(a: &Matrix, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|r| {
            r.iter()
                .zip(v)
                .filter(|(x, y)| !x.is_zero() && !y.is_zero())
                .map(|(x, y)| x * y)
                .sum()
        })
        .collect()
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &Matrix) -> (Matrix, Vec<usize>) {
    let mut m = m.clone();
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    (m, piv)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m).1.len()
}

/// Basis of {v : m v = 0}, one vector per free column.
pub fn nullspace(m: &Matrix, ncols: usize) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return identity(ncols);
    }
    let (r, piv) = rref(m);
    (0..ncols)
        .filter(|c| !piv.contains(c))
        .map(|f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (i, &p) in piv.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(m: &Matrix) -> Result<Matrix, AlgebraError> {
    let n = m.len();
    let aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let (r, piv) = rref(&aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return Err(AlgebraError::Singular);
    }
    Ok(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(m: &Matrix) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = Q::one() / &a[c][c];
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// One solution of m x = b (free variables zero).
pub fn solve(m: &Matrix, b: &[Q]) -> Result<Vec<Q>, AlgebraError> {
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let rows: Vec<(BTreeMap<usize, Q>, Q)> = m
        .iter()
        .zip(b)
        .map(|(r, x)| {
            (
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect(),
                x.clone(),
            )
        })
        .collect();
    solve_sparse(rows, ncols)
}

/// Incremental Gauss-Jordan on sparse rows. Returns one solution with free unknowns zero.
pub fn solve_sparse(
    rows: Vec<(BTreeMap<usize, Q>, Q)>,
    nunk: usize,
) -> Result<Vec<Q>, AlgebraError> {
    let mut piv: HashMap<usize, (BTreeMap<usize, Q>, Q)> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for (mut r, mut b) in rows {
        for c in &order {
            if let Some(f) = r.get(c).cloned() {
                let (pr, pb) = &piv[c];
                for (k, v) in pr {
                    let nv = r.get(k).cloned().unwrap_or_else(Q::zero) - &f * v;
                    if nv.is_zero() {
                        r.remove(k);
                    } else {
                        r.insert(*k, nv);
                    }
                }
                b -= &f * pb;
            }
        }
        let Some((&c, f)) = r.iter().next() else {
            if !b.is_zero() {
                return Err(AlgebraError::Inconsistent);
            }
            continue;
        };
        let inv = Q::one() / f.clone();
        let r: BTreeMap<usize, Q> = r.into_iter().map(|(k, v)| (k, v * &inv)).collect();
        let b = b * &inv;
        for c2 in &order {
            let (pr, pb) = piv.get_mut(c2).unwrap();
            if let Some(g) = pr.get(&c).cloned() {
                for (k, v) in &r {
                    let nv = pr.get(k).cloned().unwrap_or_else(Q::zero) - &g * v;
                    if nv.is_zero() {
                        pr.remove(k);
                    } else {
                        pr.insert(*k, nv);
                    }
                }
                *pb -= &g * &b;
            }
        }
        piv.insert(c, (r, b));
        order.push(c);
    }
    let mut x = vec![Q::zero(); nunk];
    for c in order {
        x[c] = piv[&c].1.clone();
    }
    Ok(x)
}

/// Coefficients c with Σ cᵢ basisᵢ = target, if any.
pub fn fit(target: &Poly, basis: &[Poly]) -> Option<Vec<Q>> {
    let mut eqs: BTreeMap<Monomial, BTreeMap<usize, Q>> = BTreeMap::new();
    for (j, b) in basis.iter().enumerate() {
        for (m, c) in b.terms() {
            eqs.entry(m.clone()).or_default().insert(j, c.clone());
        }
    }
    for m in target.terms().keys() {
        eqs.entry(m.clone()).or_default();
    }
    let rows = eqs
        .into_iter()
        .map(|(m, r)| {
            let rhs = target.coeff(&m);
            (r, rhs)
        })
        .collect();
    solve_sparse(rows, basis.len()).ok()
}

/// Exponent vectors with Σ eᵢ wᵢ = total.
pub fn weighted_monomials(weights: &[i64], total: i64) -> Vec<Vec<u32>> {
    fn rec(w: &[i64], i: usize, rem: i64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut e = 0;
        while e as i64 * w[i] <= rem {
            cur.push(e);
            rec(w, i + 1, rem - e as i64 * w[i], cur, out);
            cur.pop();
            e += 1;
            if w[i] == 0 {
                break;
            }
        }
    }
    let mut out = Vec::new();
    if total >= 0 {
        rec(weights, 0, total, &mut Vec::new(), &mut out);
    }
    out
}
