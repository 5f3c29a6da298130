//! Contravariant connections and curvature over the radical ring.

use num_traits::One;

use crate::exact::{AlgebraError, RadicalElement, Ring, Q};

/// g^{ab}
pub type Tensor2 = Vec<Vec<RadicalElement>>;
/// Γ^{ab}_c stored as [a][b][c]
pub type Tensor3 = Vec<Vec<Vec<RadicalElement>>>;

fn zero_of(m: &Tensor2) -> RadicalElement {
    m[0][0].zero_like()
}

pub fn invert(m: &Tensor2) -> Result<Tensor2, AlgebraError> {
    let n = m.len();
    let z = zero_of(m);
    let one = z.one_like();
    let mut a: Vec<Vec<RadicalElement>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { one.clone() } else { z.clone() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(AlgebraError::Singular)?;
        a.swap(col, p);
        let inv = a[col][col].inv()?;
        a[col] = a[col].iter().map(|x| x.mul(&inv)).collect();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot = a[col].clone();
                a[r] = a[r].iter().zip(&pivot).map(|(x, y)| x.sub(&f.mul(y))).collect();
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Γ^{ab}_c = ∂_c γ^{ba} for a splitting g = γ + γᵀ.
pub fn split_connection(gamma: &Tensor2) -> Result<Tensor3, AlgebraError> {
    let n = gamma.len();
    (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| gamma[b][a].diff(c)).collect()).collect())
        .collect()
}

/// Contravariant Levi-Civita connection Γ^{ij}_k = −g^{is} Γ^j_{sk}.
pub fn levi_civita(g: &Tensor2) -> Result<Tensor3, AlgebraError> {
    let n = g.len();
    let z = zero_of(g);
    let lower = invert(g)?;
    let dl: Vec<Vec<Vec<RadicalElement>>> = lower
        .iter()
        .map(|row| row.iter().map(|e| (0..n).map(|k| e.diff(k)).collect()).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let half = Q::one() / Q::from_integer(2.into());
    // Christoffel symbols of the second kind, [j][s][k]
    let mut ch = vec![vec![vec![z.clone(); n]; n]; n];
    for j in 0..n {
        for s in 0..n {
            for k in 0..n {
                let mut t = z.clone();
                for m in 0..n {
                    if g[j][m].is_zero() {
                        continue;
                    }
                    let first = dl[m][k][s].add(&dl[m][s][k]).sub(&dl[s][k][m]);
                    t = t.add(&g[j][m].mul(&first));
                }
                ch[j][s][k] = t.scale(&half);
            }
        }
    }
    let mut out = vec![vec![vec![z.clone(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut t = z.clone();
                for s in 0..n {
                    if !g[i][s].is_zero() {
                        t = t.sub(&g[i][s].mul(&ch[j][s][k]));
                    }
                }
                out[i][j][k] = t;
            }
        }
    }
    Ok(out)
}

/// First (a, b, c) with ∂_c g^{ab} ≠ Γ^{ab}_c + Γ^{ba}_c.
pub fn compatibility_defect(g: &Tensor2, gam: &Tensor3) -> Result<Option<(usize, usize, usize)>, AlgebraError> {
    let n = g.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if !g[a][b].diff(c)?.sub(&gam[a][b][c]).sub(&gam[b][a][c]).is_zero() {
                    return Ok(Some((a, b, c)));
                }
            }
        }
    }
    Ok(None)
}

/// First (a, b, c) with g^{as}Γ^{bc}_s ≠ g^{bs}Γ^{ac}_s.
pub fn torsion_defect(g: &Tensor2, gam: &Tensor3) -> Option<(usize, usize, usize)> {
    let n = g.len();
    let z = zero_of(g);
    let contract = |a: usize, b: usize, c: usize| {
        (0..n).fold(z.clone(), |t, s| t.add(&g[a][s].mul(&gam[b][c][s])))
    };
    for a in 0..n {
        for b in a + 1..n {
            for c in 0..n {
                if !contract(a, b, c).sub(&contract(b, a, c)).is_zero() {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// First (a, b, c, d) with nonzero
/// R^{abc}_d = g^{as}(∂_sΓ^{bc}_d − ∂_dΓ^{bc}_s) + Γ^{ab}_sΓ^{sc}_d − Γ^{ac}_sΓ^{sb}_d.
pub fn curvature_defect(g: &Tensor2, gam: &Tensor3) -> Result<Option<(usize, usize, usize, usize)>, AlgebraError> {
    let n = g.len();
    let z = zero_of(g);
    // dg[b][c][d][s] = ∂_s Γ^{bc}_d
    let mut dg = vec![vec![vec![Vec::with_capacity(n); n]; n]; n];
    for b in 0..n {
        for c in 0..n {
            for d in 0..n {
                for s in 0..n {
                    dg[b][c][d].push(gam[b][c][d].diff(s)?);
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut t = z.clone();
                    for s in 0..n {
                        if !g[a][s].is_zero() {
                            t = t.add(&g[a][s].mul(&dg[b][c][d][s].sub(&dg[b][c][s][d])));
                        }
                        t = t.add(&gam[a][b][s].mul(&gam[s][c][d]));
                        t = t.sub(&gam[a][c][s].mul(&gam[s][b][d]));
                    }
                    if !t.is_zero() {
                        return Ok(Some((a, b, c, d)));
                    }
                }
            }
        }
    }
    Ok(None)
}
