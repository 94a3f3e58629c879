//! Multistart search for non-injectivity witnesses `F(a) = F(b)`, `a != b`.
//!
//! Each trial minimizes
//!
//! ```text
//! Phi(x, y) = |F(x) - F(y)|^2 + rho * max(0, s0 - |x - y|)^2
//! ```
//!
//! with a Levenberg-Marquardt iteration, then polishes the candidate on
//! `|F(x) - F(y)|^2` alone. The penalty keeps trials off the diagonal
//! `x = y`, where `Phi` vanishes trivially.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::polymap::{rational_point, NumericMap, Rational, RealMap};
use crate::sampling::{trial_rng, BoxDomain};

pub const PENALTY_WEIGHT: f64 = 1e3;
pub const SEPARATION_FLOOR: f64 = 0.1;
/// Largest residual a reported witness may carry.
pub const MAX_RESIDUAL: f64 = 1e-8;
/// Smallest separation a reported witness may carry.
pub const MIN_SEPARATION: f64 = 1e-2;

const LM_INITIAL_DAMPING: f64 = 1e-3;
const LM_MAX_DAMPING: f64 = 1e16;
const SEARCH_ITERS: usize = 200;
const POLISH_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionWitness {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub residual: f64,
    pub separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionCheck {
    pub residual: f64,
    pub separation: f64,
    pub passed: bool,
}

struct Objective<'a> {
    map: &'a NumericMap,
    n: usize,
    penalty: bool,
}

impl Objective<'_> {
    /// Residual vector and its Jacobian with respect to `z = (x, y)`.
    fn residual(&self, z: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let (x, y) = z.split_at(n);
        let (fx, jx) = self.map.eval_with_jacobian(x);
        let (fy, jy) = self.map.eval_with_jacobian(y);
        let rows = if self.penalty { n + 1 } else { n };
        let mut r = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, 2 * n);
        r.rows_mut(0, n).copy_from(&(fx - fy));
        j.view_mut((0, 0), (n, n)).copy_from(&jx);
        j.view_mut((0, n), (n, n)).copy_from(&(-jy));
        if self.penalty {
            let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let sep = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
            let w = PENALTY_WEIGHT.sqrt();
            if sep < SEPARATION_FLOOR {
                r[n] = w * (SEPARATION_FLOOR - sep);
                if sep > 0.0 {
                    for k in 0..n {
                        let g = w * diff[k] / sep;
                        j[(n, k)] = -g;
                        j[(n, n + k)] = g;
                    }
                }
            }
        }
        (r, j)
    }

    fn cost(&self, z: &[f64]) -> f64 {
        self.residual(z).0.norm_squared()
    }
}

/// Damped Gauss-Newton with a multiplicative diagonal shift.
fn levenberg_marquardt(obj: &Objective<'_>, z0: Vec<f64>, iters: usize) -> Vec<f64> {
    let mut z = z0;
    let mut damping = LM_INITIAL_DAMPING;
    let (mut r, mut j) = obj.residual(&z);
    let mut cost = r.norm_squared();
    for _ in 0..iters {
        if !cost.is_finite() || cost < 1e-32 {
            break;
        }
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let mut accepted = false;
        while damping <= LM_MAX_DAMPING {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += damping;
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_cost = obj.cost(&trial);
            if trial_cost.is_finite() && trial_cost < cost {
                let small_step = step.norm() <= 1e-15 * (1.0 + z.iter().map(|v| v * v).sum::<f64>().sqrt());
                z = trial;
                damping = (damping / 10.0).max(1e-15);
                (r, j) = obj.residual(&z);
                cost = r.norm_squared();
                accepted = !small_step;
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    z
}

fn separation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn run_trial(numeric: &NumericMap, domain: &BoxDomain, seed: u64, index: usize) -> Option<CollisionWitness> {
    let n = numeric.n_in();
    let mut rng = trial_rng(seed, (index / 2) as u64);
    let mut x = domain.uniform(&mut rng);
    let mut y = domain.uniform(&mut rng);
    if index % 2 == 1 {
        x = domain.reflect(&x);
        y = domain.reflect(&y);
    }
    let z0: Vec<f64> = x.into_iter().chain(y).collect();
    let search = Objective { map: numeric, n, penalty: true };
    let z = levenberg_marquardt(&search, z0, SEARCH_ITERS);
    let polish = Objective { map: numeric, n, penalty: false };
    let z = levenberg_marquardt(&polish, z, POLISH_ITERS);
    let (a, b) = z.split_at(n);
    let residual = (numeric.eval(a) - numeric.eval(b)).norm();
    let sep = separation(a, b);
    (residual.is_finite() && residual <= MAX_RESIDUAL && sep >= MIN_SEPARATION).then(|| CollisionWitness {
        a: a.to_vec(),
        b: b.to_vec(),
        residual,
        separation: sep,
    })
}

/// Runs up to `budget` trials started uniformly in `domain` (antithetic
/// pairs) and returns the qualifying witness of the lowest trial index.
pub fn find_collision(map: &RealMap, domain: &BoxDomain, budget: usize, seed: u64) -> Result<Option<CollisionWitness>> {
    let n = map.require_square()?;
    check_len(n, domain.dim())?;
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let numeric = NumericMap::new(map);
    Ok((0..budget).into_par_iter().find_map_first(|k| run_trial(&numeric, domain, seed, k)))
}

fn exact_norm(v: &[Rational]) -> f64 {
    use crate::polymap::Coeff;
    let sq = v.iter().fold(Rational::from_integer(0.into()), |acc, x| acc + x.clone() * x.clone());
    sq.to_float().sqrt()
}

/// Recomputes residual and separation in exact rational arithmetic.
pub fn verify_collision(map: &RealMap, w: &CollisionWitness, tol: f64) -> Result<CollisionCheck> {
    let n = map.require_square()?;
    check_len(n, w.a.len())?;
    check_len(n, w.b.len())?;
    let a = rational_point(&w.a)?;
    let b = rational_point(&w.b)?;
    let fa = map.evaluate_exact(&a)?;
    let fb = map.evaluate_exact(&b)?;
    let diff: Vec<Rational> = fa.into_iter().zip(fb).map(|(p, q)| p - q).collect();
    let gap: Vec<Rational> = a.into_iter().zip(b).map(|(p, q)| p - q).collect();
    let residual = exact_norm(&diff);
    let separation = exact_norm(&gap);
    Ok(CollisionCheck { residual, separation, passed: residual <= tol && separation >= MIN_SEPARATION })
}
