//! Potential by Euler integration, and the WDVV system.

use rayon::prelude::*;

use crate::exact::linear::Matrix;
use crate::exact::{qi, AlgebraError, RadicalElement, Ring, Q};

use super::metric::{Tensor2, Tensor3};

/// S_ab = η_ac η_bd g^{cd} / (d − 1 + d_c + d_d), the Hessian of F.
pub fn hessian(g: &Tensor2, eta_low: &Matrix, dvals: &[Q], d: &Q) -> Tensor2 {
    let n = g.len();
    let z = g[0][0].zero_like();
    let mut out = vec![vec![z.clone(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut t = z.clone();
            for c in 0..n {
                if eta_low[a][c] == qi(0) {
                    continue;
                }
                for e in 0..n {
                    if eta_low[b][e] == qi(0) {
                        continue;
                    }
                    let w = &eta_low[a][c] * &eta_low[b][e] / (d - qi(1) + &dvals[c] + &dvals[e]);
                    t = t.add(&g[c][e].scale(&w));
                }
            }
            out[a][b] = t;
        }
    }
    out
}

/// Integrate a quasi-homogeneous Hessian twice along the Euler field.
/// Returns None when the result does not reproduce `s`.
pub fn integrate(s: &Tensor2, dvals: &[Q], d: &Q) -> Result<Option<RadicalElement>, AlgebraError> {
    let n = s.len();
    let z = s[0][0].zero_like();
    let ctx = z.ctx().clone();
    let t: Vec<RadicalElement> = (0..n).map(|a| RadicalElement::var(&ctx, a)).collect();
    let three = qi(3);
    let first: Vec<RadicalElement> = (0..n)
        .map(|a| {
            let mut x = z.clone();
            for b in 0..n {
                x = x.add(&t[b].mul(&s[a][b]).scale(&dvals[b]));
            }
            x.scale(&(qi(1) / (&three - d - &dvals[a])))
        })
        .collect();
    let mut f = z.clone();
    for a in 0..n {
        f = f.add(&t[a].mul(&first[a]).scale(&dvals[a]));
    }
    let f = f.scale(&(qi(1) / (&three - d)));
    for a in 0..n {
        let fa = f.diff(a)?;
        for b in 0..n {
            if !fa.diff(b)?.sub(&s[a][b]).is_zero() {
                return Ok(None);
            }
        }
    }
    Ok(Some(f))
}

/// F_abc for all index triples.
pub fn third_derivatives(f: &RadicalElement, n: usize) -> Result<Tensor3, AlgebraError> {
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let fa = f.diff(a)?;
        let mut rows = Vec::with_capacity(n);
        for b in 0..n {
            let fab = fa.diff(b)?;
            rows.push((0..n).map(|c| fab.diff(c)).collect::<Result<Vec<_>, _>>()?);
        }
        out.push(rows);
    }
    Ok(out)
}

/// Quadruples (a, b, c, d) where F_abe η^{ef} F_fcd ≠ F_ace η^{ef} F_fbd.
pub fn wdvv_defects(f3: &Tensor3, eta_up: &Matrix) -> Vec<(usize, usize, usize, usize)> {
    let n = f3.len();
    let mut quads = Vec::new();
    for a in 0..n {
        for d in a..n {
            for b in 0..n {
                for c in b + 1..n {
                    quads.push((a, b, c, d));
                }
            }
        }
    }
    let side = |x: usize, y: usize, u: usize, v: usize| {
        let mut t = f3[0][0][0].zero_like();
        for e in 0..n {
            for h in 0..n {
                if eta_up[e][h] != qi(0) {
                    t = t.add(&f3[x][y][e].mul(&f3[h][u][v]).scale(&eta_up[e][h]));
                }
            }
        }
        t
    };
    let mut bad: Vec<_> = quads
        .into_par_iter()
        .filter(|&(a, b, c, d)| !side(a, b, c, d).sub(&side(a, c, b, d)).is_zero())
        .collect();
    bad.sort();
    bad
}

/// Σ d_a t_a ∂_a F − (3 − d) F.
pub fn euler_defect(f: &RadicalElement, dvals: &[Q], d: &Q) -> Result<RadicalElement, AlgebraError> {
    let ctx = f.ctx().clone();
    let mut e = f.zero_like();
    for (a, da) in dvals.iter().enumerate() {
        e = e.add(&RadicalElement::var(&ctx, a).mul(&f.diff(a)?).scale(da));
    }
    Ok(e.sub(&f.scale(&(qi(3) - d))))
}
