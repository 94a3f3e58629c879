//! Exact matrix routines over coefficient fields and polynomial rings.

use std::ops::Div;

use crate::error::{Error, Result};
use crate::polymap::{Coeff, Poly, PolyMatrix};

/// Determinant by Gaussian elimination with exact arithmetic.
pub fn det_exact<C>(m: &[Vec<C>]) -> Result<C>
where
    C: Coeff + Div<Output = C>,
{
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("determinant of a non-square matrix".into()));
    }
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut det = C::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(C::zero());
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / p.clone();
            for k in col..n {
                let v = a[col][k].clone() * factor.clone();
                a[r][k] = a[r][k].clone() - v;
            }
        }
    }
    Ok(det)
}

/// Characteristic polynomial `det(mu I - A)` of a square matrix of
/// polynomials, by Berkowitz's division-free recurrence.
///
/// Returns coefficients from the leading `mu^N` term down to the constant
/// term, so `result[0] = 1` and `result[k]` multiplies `mu^(N-k)`. Fails when
/// an intermediate polynomial exceeds `term_limit` terms.
pub fn charpoly_berkowitz<C: Coeff>(m: &PolyMatrix<C>, term_limit: usize) -> Result<Vec<Poly<C>>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::InvalidArgument("characteristic polynomial of a non-square matrix".into()));
    }
    let n_vars = m.entries().first().map_or(0, Poly::n_vars);
    let zero = Poly::zero(n_vars);
    let one = Poly::one(n_vars);
    if n == 0 {
        return Ok(vec![one]);
    }
    let guard = |p: &Poly<C>| -> Result<()> {
        if p.len() > term_limit {
            Err(Error::TermBlowup { limit: term_limit })
        } else {
            Ok(())
        }
    };

    // coefficients of det(mu I - A_r) for the leading r x r block
    let mut vect = vec![one.clone(), m.get(0, 0).neg()];
    for r in 1..n {
        // A_{r+1} = [[A_r, S], [R, a]]
        let a = m.get(r, r);
        let s: Vec<Poly<C>> = (0..r).map(|i| m.get(i, r).clone()).collect();
        let row: Vec<&Poly<C>> = (0..r).map(|j| m.get(r, j)).collect();

        // Toeplitz column: 1, -a, -R S, -R A_r S, ..., -R A_r^(r-1) S
        let mut col = Vec::with_capacity(r + 2);
        col.push(one.clone());
        col.push(a.neg());
        let mut v = s;
        for k in 0..r {
            let mut dot = zero.clone();
            for (rj, vj) in row.iter().zip(&v) {
                if !rj.is_zero() && !vj.is_zero() {
                    dot = dot.add(&rj.mul(vj));
                }
            }
            guard(&dot)?;
            col.push(dot.neg());
            if k + 1 < r {
                v = (0..r)
                    .map(|i| {
                        let mut acc = zero.clone();
                        for (j, vj) in v.iter().enumerate() {
                            let aij = m.get(i, j);
                            if !aij.is_zero() && !vj.is_zero() {
                                acc = acc.add(&aij.mul(vj));
                            }
                        }
                        acc
                    })
                    .collect();
                for p in &v {
                    guard(p)?;
                }
            }
        }

        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = zero.clone();
            for (j, vj) in vect.iter().enumerate().take(i + 1) {
                let c = &col[i - j];
                if !c.is_zero() && !vj.is_zero() {
                    acc = acc.add(&c.mul(vj));
                }
            }
            guard(&acc)?;
            next.push(acc);
        }
        vect = next;
    }
    Ok(vect)
}

/// Coefficients (leading first) of `(lambda - 1)^n` as constants in a ring
/// with `n_vars` variables.
pub fn shifted_unipotent_charpoly<C: Coeff>(n: usize, n_vars: usize) -> Vec<Poly<C>> {
    let mut binom = vec![1i64];
    for _ in 0..n {
        let mut next = vec![1i64; binom.len() + 1];
        for k in 1..binom.len() {
            next[k] = binom[k - 1] + binom[k];
        }
        binom = next;
    }
    binom
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            Poly::constant(n_vars, C::from_i64(sign * b))
        })
        .collect()
}
