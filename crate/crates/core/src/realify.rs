//! Complex-to-real doubling of polynomial maps and the Keller-form checks
//! that go with it: the determinant identity `det JF̄ = |det JF|^2`,
//! nilpotency of `JH` for `F = id - H`, and `Spec(F) = {1}`.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::{charpoly_berkowitz, det_exact, shifted_unipotent_charpoly};
use crate::sampling::trial_rng;
use crate::polymap::{ComplexMap, ComplexRational, Poly, PolyMap, PolyMatrix, Rational, RealMap};

/// Cap on the size of any intermediate polynomial in symbolic matrix work.
pub const TERM_LIMIT: usize = 10_000_000;

/// A complex map together with its real doubling on the interleaved layout
/// `(Re x1, Im x1, ..., Re xn, Im xn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifiedMap {
    pub source: ComplexMap,
    pub doubled: RealMap,
}

/// `(z1, ..., zn) -> (Re z1, Im z1, ..., Re zn, Im zn)`.
pub fn interleave<T: Clone>(z: &[Complex<T>]) -> Vec<T> {
    z.iter().flat_map(|c| [c.re.clone(), c.im.clone()]).collect()
}

/// Expands real and imaginary parts of every component symbolically.
pub fn realify(map: &ComplexMap) -> Result<RealifiedMap> {
    let n = map.require_square()?;
    let m = 2 * n;
    let i_unit = Complex::new(Rational::zero(), Rational::one());
    let subs: Vec<Poly<ComplexRational>> = (0..n)
        .map(|j| Poly::var(m, 2 * j).add(&Poly::var(m, 2 * j + 1).scale(&i_unit)))
        .collect();
    let mut components = Vec::with_capacity(m);
    for c in map.components() {
        let expanded = c.compose(&subs)?;
        components.push(expanded.map_coeffs(|z| z.re.clone()));
        components.push(expanded.map_coeffs(|z| z.im.clone()));
    }
    Ok(RealifiedMap { source: map.clone(), doubled: PolyMap::new(m, components)? })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetSample {
    pub point: Vec<Complex64>,
    pub det_complex: Complex64,
    pub det_real: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetIdentityReport {
    pub samples: Vec<DetSample>,
    pub max_rel_error: f64,
    pub passed: bool,
}

/// Relative-error tolerance for the floating-point determinant identity.
pub const DET_IDENTITY_TOL: f64 = 1e-9;

/// Checks `det JF̄(interleave z) = |det JF(z)|^2` in double precision.
pub fn verify_det_identity(rm: &RealifiedMap, points: &[Vec<Complex64>]) -> Result<DetIdentityReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let n = rm.source.n_in();
    let jc = rm.source.jacobian();
    let jr = rm.doubled.jacobian();
    let mut samples = Vec::with_capacity(points.len());
    for z in points {
        check_len(n, z.len())?;
        let d_c = jc.evaluate(z)?.determinant();
        let d_r = jr.evaluate(&interleave(z))?.determinant();
        let target = d_c.norm_sqr();
        let rel_error = if target == 0.0 && d_r == 0.0 {
            0.0
        } else {
            (d_r - target).abs() / target.abs().max(d_r.abs()).max(f64::MIN_POSITIVE)
        };
        samples.push(DetSample { point: z.clone(), det_complex: d_c, det_real: d_r, rel_error });
    }
    let max_rel_error = samples.iter().map(|s| s.rel_error).fold(0.0, f64::max);
    Ok(DetIdentityReport { samples, max_rel_error, passed: max_rel_error <= DET_IDENTITY_TOL })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDetReport {
    pub n_points: usize,
    pub holds: bool,
    /// Index of the first point where the identity fails.
    pub first_mismatch: Option<usize>,
}

/// Checks the determinant identity exactly at Gaussian-rational points.
pub fn verify_det_identity_exact(rm: &RealifiedMap, points: &[Vec<ComplexRational>]) -> Result<ExactDetReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let n = rm.source.n_in();
    let jc = rm.source.jacobian();
    let jr = rm.doubled.jacobian();
    for (k, z) in points.iter().enumerate() {
        check_len(n, z.len())?;
        let d_c = det_exact(&jc.evaluate_exact(z)?)?;
        let d_r = det_exact(&jr.evaluate_exact(&interleave(z))?)?;
        let abs_sq = d_c.re.clone() * d_c.re.clone() + d_c.im.clone() * d_c.im.clone();
        if d_r != abs_sq {
            return Ok(ExactDetReport { n_points: points.len(), holds: false, first_mismatch: Some(k) });
        }
    }
    Ok(ExactDetReport { n_points: points.len(), holds: true, first_mismatch: None })
}

/// Seeded complex points with real and imaginary parts uniform in
/// `[-2, 2]`.
pub fn random_complex_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = trial_rng(seed, 0);
    (0..count).map(|_| (0..n).map(|_| Complex64::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0))).collect()).collect()
}

/// Seeded Gaussian-rational points `p/q + i r/s` with `|p|, |r| <= 32` and
/// `1 <= q, s <= 16`.
pub fn random_rational_points(n: usize, count: usize, seed: u64) -> Vec<Vec<ComplexRational>> {
    let mut rng = trial_rng(seed, 1);
    let mut part = move || Rational::new(rng.gen_range(-32i64..=32).into(), rng.gen_range(1i64..=16).into());
    (0..count).map(|_| (0..n).map(|_| Complex::new(part(), part())).collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NilpotencyReport {
    /// `H = id - F` has no constant or linear terms.
    pub is_keller_form: bool,
    pub cubic_homogeneous: bool,
    pub nilpotent: bool,
    /// Least `k` with `JH^k ≡ 0`, when nilpotent.
    pub nilpotency_index: Option<usize>,
    /// Coefficients of `det(mu I - JH)`, leading (`mu^N`) first.
    pub charpoly_coeffs: Vec<Poly<Rational>>,
}

fn jacobian_of_h(map: &RealMap) -> Result<(PolyMatrix<Rational>, bool, bool)> {
    let n = map.require_square()?;
    match map.keller_decompose()? {
        None => Ok((PolyMatrix::from_entries(n, n, vec![Poly::zero(n); n * n])?, true, false)),
        Some(d) => {
            let low_degree = d.h.components().iter().any(|c| c.min_degree().is_some_and(|m| m < 2));
            Ok((d.h.jacobian(), !low_degree, d.cubic_homogeneous))
        }
    }
}

/// Symbolic characteristic polynomial of `JH` for `F = id - H` and the
/// nilpotency index of `JH`.
pub fn nilpotency_report(map: &RealMap) -> Result<NilpotencyReport> {
    let n = map.require_square()?;
    let (jh, is_keller_form, cubic_homogeneous) = jacobian_of_h(map)?;
    let charpoly_coeffs = charpoly_berkowitz(&jh, TERM_LIMIT)?;
    let nilpotent = charpoly_coeffs.iter().skip(1).all(Poly::is_zero);
    let nilpotency_index = if nilpotent {
        let mut power = jh.clone();
        let mut k = 1;
        while !power.is_zero() && k < n {
            power = power.mul(&jh)?;
            if power.total_terms() > TERM_LIMIT {
                return Err(Error::TermBlowup { limit: TERM_LIMIT });
            }
            k += 1;
        }
        power.is_zero().then_some(k)
    } else {
        None
    };
    Ok(NilpotencyReport { is_keller_form, cubic_homogeneous, nilpotent, nilpotency_index, charpoly_coeffs })
}

/// Symbolic `det(lambda I - JF)`, leading coefficient first.
pub fn jacobian_charpoly(map: &RealMap) -> Result<Vec<Poly<Rational>>> {
    map.require_square()?;
    charpoly_berkowitz(&map.jacobian(), TERM_LIMIT)
}

/// Whether `det(lambda I - JF) ≡ (lambda - 1)^N` for a map of the form
/// `F = id - H`, compared coefficient by coefficient.
pub fn spec_is_one(map: &RealMap) -> Result<bool> {
    let n = map.require_square()?;
    let (_, is_keller_form, _) = jacobian_of_h(map)?;
    if !is_keller_form {
        return Err(Error::NotKellerForm("id - F has constant or linear terms".into()));
    }
    Ok(jacobian_charpoly(map)? == shifted_unipotent_charpoly(n, n))
}

/// Evaluates a symbolic charpoly at a point, producing numeric coefficients.
pub fn charpoly_at(coeffs: &[Poly<Rational>], point: &[Rational]) -> Result<Vec<Rational>> {
    coeffs.iter().map(|c| c.eval_exact(point)).collect()
}

/// Exact numeric determinant of the Jacobian at a rational point.
pub fn jacobian_det_exact(map: &RealMap, point: &[Rational]) -> Result<Rational> {
    det_exact(&map.jacobian().evaluate_exact(point)?)
}

pub fn jacobian_det(map: &RealMap, point: &[f64]) -> Result<f64> {
    let j: DMatrix<f64> = map.jacobian_at(point)?;
    Ok(j.determinant())
}
