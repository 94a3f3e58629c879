//! Eigenvalues, Rayleigh bounds and sampled checks of the spectral
//! injectivity hypotheses.
//!
//! Four conditions are supported, each evaluated pointwise on the Jacobian
//! `JF(x)` and its symmetrization `JF(x) + JF(x)^T`:
//!
//! * [`ConditionKind::FgrBand`]: no real eigenvalue of `JF` in `[0, eps)`.
//! * [`ConditionKind::SymmetricBand`]: `JF` nonsingular and every eigenvalue
//!   of `JF + JF^T` above `eps` (positive branch) or below `-eps`.
//! * [`ConditionKind::SquareRegion`]: every eigenvalue of `JF` outside the
//!   open square `(-eps, eps) x (-i eps, i eps)`.
//! * [`ConditionKind::TraceDetBounds`]: `JF` nonsingular, symmetric spectrum
//!   of one sign, `|trace| < m1` and `prod |lambda| > m2`.
//!
//! Sampling never certifies a global hypothesis; a clean run is reported as
//! [`VerdictStatus::SatisfiedOnSamples`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::polymap::{NumericMap, RealMap};
use crate::sampling::{BoxDomain, SamplerConfig};

const SYMMETRY_TOL: f64 = 1e-12;

fn require_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn require_square(m: &DMatrix<f64>) -> Result<usize> {
    check_len(m.nrows(), m.ncols())?;
    Ok(m.nrows())
}

/// Largest entrywise asymmetry `|m_ij - m_ji|`, scaled by `max(1, max|m_ij|)`.
fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// All eigenvalues with multiplicity, sorted by real then imaginary part.
///
/// Symmetric input goes through the symmetric solver, so imaginary parts
/// are exactly zero.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = require_square(m)?;
    require_finite(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out: Vec<Complex64> = if asymmetry(m) <= SYMMETRY_TOL {
        symmetric_eigenvalues(m)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    } else {
        let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
        schur.complex_eigenvalues().iter().copied().collect()
    };
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(s: &DMatrix<f64>) -> Result<Vec<f64>> {
    require_square(s)?;
    require_finite(s)?;
    let eig = SymmetricEigen::try_new(s.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `m + m^T` (the sum, not the average).
pub fn symmetrize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(m)?;
    Ok(m + m.transpose())
}

/// `(mu1, mu2)`: smallest and largest eigenvalue, which bracket every
/// Rayleigh quotient `y^T S y / y^T y`.
pub fn rayleigh_bounds(s: &DMatrix<f64>) -> Result<(f64, f64)> {
    require_square(s)?;
    require_finite(s)?;
    let asym = asymmetry(s);
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let eig = symmetric_eigenvalues(s)?;
    match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::InvalidArgument("empty matrix".into())),
    }
}

pub fn rayleigh_quotient(s: &DMatrix<f64>, y: &[f64]) -> f64 {
    let y = nalgebra::DVector::from_column_slice(y);
    (y.transpose() * s * &y)[(0, 0)] / y.norm_squared()
}

/// Threshold below which an eigenvalue of `JF` counts as zero.
pub fn zero_threshold(jf: &DMatrix<f64>) -> f64 {
    1e-9 * (1.0 + jf.norm())
}

/// Spectral data of `JF` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub point: Vec<f64>,
    pub eig_jf: Vec<Complex64>,
    /// Ascending eigenvalues of `JF + JF^T`.
    pub eig_sym: Vec<f64>,
    pub trace_sym: f64,
    pub det_sym: f64,
    /// Zero threshold for `JF` at this point.
    pub zero_tol: f64,
}

impl SpectralSample {
    pub fn from_jacobian(point: Vec<f64>, jf: &DMatrix<f64>) -> Result<Self> {
        let eig_jf = eigenvalues(jf)?;
        let sym = symmetrize(jf)?;
        let eig_sym = symmetric_eigenvalues(&sym)?;
        Ok(SpectralSample {
            point,
            eig_jf,
            trace_sym: sym.trace(),
            det_sym: sym.determinant(),
            eig_sym,
            zero_tol: zero_threshold(jf),
        })
    }

    pub fn at(map: &NumericMap, point: &[f64]) -> Result<Self> {
        check_len(map.n_in(), point.len())?;
        Self::from_jacobian(point.to_vec(), &map.jacobian(point))
    }

    fn min_abs_eig(&self) -> f64 {
        self.eig_jf.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min)
    }

    fn is_real(&self, l: &Complex64) -> bool {
        l.im.abs() <= self.zero_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionKind {
    /// `Spec(F) ∩ [0, eps) = ∅`.
    #[serde(rename = "FGR_BAND")]
    FgrBand,
    /// `0 ∉ Spec(F)` and `Spec(F + F^T) ⊆ (eps, ∞)` or `(-∞, -eps)`.
    #[serde(rename = "THM16_BAND")]
    SymmetricBand,
    /// `Spec(F)` avoids the open square of half-width `eps`.
    #[serde(rename = "LIUXU_REGION")]
    SquareRegion,
    /// Sign, trace and determinant bounds on `Spec(F + F^T)`.
    #[serde(rename = "THM17_BOUNDS")]
    TraceDetBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub kind: ConditionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
    }
}

impl ConditionSpec {
    pub fn fgr_band(epsilon: f64) -> Result<Self> {
        Ok(ConditionSpec {
            kind: ConditionKind::FgrBand,
            epsilon: Some(positive("epsilon", epsilon)?),
            sign: None,
            m1: None,
            m2: None,
        })
    }

    pub fn symmetric_band(sign: Sign, epsilon: f64) -> Result<Self> {
        Ok(ConditionSpec {
            kind: ConditionKind::SymmetricBand,
            epsilon: Some(positive("epsilon", epsilon)?),
            sign: Some(sign),
            m1: None,
            m2: None,
        })
    }

    pub fn square_region(epsilon: f64) -> Result<Self> {
        Ok(ConditionSpec {
            kind: ConditionKind::SquareRegion,
            epsilon: Some(positive("epsilon", epsilon)?),
            sign: None,
            m1: None,
            m2: None,
        })
    }

    pub fn trace_det_bounds(sign: Sign, m1: f64, m2: f64) -> Result<Self> {
        Ok(ConditionSpec {
            kind: ConditionKind::TraceDetBounds,
            epsilon: None,
            sign: Some(sign),
            m1: Some(positive("m1", m1)?),
            m2: Some(positive("m2", m2)?),
        })
    }

    fn validate(&self) -> Result<()> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::InvalidArgument(format!("{name} is required")));
        match self.kind {
            ConditionKind::FgrBand | ConditionKind::SquareRegion => {
                positive("epsilon", need(self.epsilon, "epsilon")?)?;
            }
            ConditionKind::SymmetricBand => {
                positive("epsilon", need(self.epsilon, "epsilon")?)?;
                self.sign.ok_or_else(|| Error::InvalidArgument("sign is required".into()))?;
            }
            ConditionKind::TraceDetBounds => {
                positive("m1", need(self.m1, "m1")?)?;
                positive("m2", need(self.m2, "m2")?)?;
                self.sign.ok_or_else(|| Error::InvalidArgument("sign is required".into()))?;
            }
        }
        Ok(())
    }

    /// Whether the condition holds at this sample, and the signed slack.
    pub fn evaluate(&self, s: &SpectralSample) -> Outcome {
        let eps = self.epsilon.unwrap_or(0.0);
        match self.kind {
            ConditionKind::FgrBand => {
                let mut holds = true;
                let mut margin = f64::INFINITY;
                for l in &s.eig_jf {
                    let d = if s.is_real(l) && l.re >= 0.0 && l.re < eps {
                        holds = false;
                        -(l.re.min(eps - l.re))
                    } else {
                        // distance from l to the segment [0, eps]
                        let dx = if l.re < 0.0 {
                            -l.re
                        } else if l.re > eps {
                            l.re - eps
                        } else {
                            0.0
                        };
                        dx.hypot(if s.is_real(l) { 0.0 } else { l.im })
                    };
                    margin = margin.min(d);
                }
                Outcome { holds, margin }
            }
            ConditionKind::SymmetricBand => {
                let nonsingular = s.min_abs_eig() > s.zero_tol;
                let band = match self.sign.unwrap_or(Sign::Positive) {
                    Sign::Positive => s.eig_sym.first().map_or(f64::INFINITY, |&lo| lo - eps),
                    Sign::Negative => s.eig_sym.last().map_or(f64::INFINITY, |&hi| -eps - hi),
                };
                let margin = if nonsingular { band } else { band.min(s.min_abs_eig() - s.zero_tol) };
                Outcome { holds: nonsingular && band > 0.0, margin }
            }
            ConditionKind::SquareRegion => {
                let margin = s
                    .eig_jf
                    .iter()
                    .map(|l| l.re.abs().max(l.im.abs()) - eps)
                    .fold(f64::INFINITY, f64::min);
                Outcome { holds: margin >= 0.0, margin }
            }
            ConditionKind::TraceDetBounds => {
                let m1 = self.m1.unwrap_or(f64::INFINITY);
                let m2 = self.m2.unwrap_or(0.0);
                let nonsingular = s.min_abs_eig() > s.zero_tol;
                let sum: f64 = s.eig_sym.iter().sum();
                let prod_abs: f64 = s.eig_sym.iter().map(|l| l.abs()).product();
                let (sign_slack, trace_slack) = match self.sign.unwrap_or(Sign::Positive) {
                    Sign::Positive => (s.eig_sym.first().copied().unwrap_or(f64::INFINITY), m1 - sum),
                    Sign::Negative => (-s.eig_sym.last().copied().unwrap_or(f64::NEG_INFINITY), sum + m1),
                };
                let det_slack = prod_abs - m2;
                let mut margin = sign_slack.min(trace_slack).min(det_slack);
                if !nonsingular {
                    margin = margin.min(s.min_abs_eig() - s.zero_tol);
                }
                Outcome {
                    holds: nonsingular && sign_slack > 0.0 && trace_slack > 0.0 && det_slack > 0.0,
                    margin,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub holds: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    SatisfiedOnSamples,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    pub condition: ConditionSpec,
    pub domain: BoxDomain,
    pub sampler: SamplerConfig,
    pub n_samples: usize,
    pub status: VerdictStatus,
    /// Violating sample with the smallest margin (lowest sample index on ties).
    pub witness: Option<SpectralSample>,
    /// Smallest slack seen over all samples.
    pub margin: f64,
}

/// Samples `domain` and checks `cond` at every point.
pub fn check_condition(
    map: &RealMap,
    cond: &ConditionSpec,
    domain: &BoxDomain,
    sampler: &SamplerConfig,
) -> Result<SpectralVerdict> {
    let n = map.require_square()?;
    check_len(n, domain.dim())?;
    cond.validate()?;
    let numeric = NumericMap::new(map);
    let points = sampler.points(domain);
    if points.is_empty() {
        return Err(Error::InvalidArgument("sampler produced no points".into()));
    }
    let evaluated: Vec<(SpectralSample, Outcome)> = points
        .par_iter()
        .map(|p| {
            let s = SpectralSample::at(&numeric, p)?;
            let o = cond.evaluate(&s);
            Ok((s, o))
        })
        .collect::<Result<_>>()?;

    let margin = evaluated.iter().map(|(_, o)| o.margin).fold(f64::INFINITY, f64::min);
    let mut witness: Option<(usize, f64)> = None;
    for (i, (_, o)) in evaluated.iter().enumerate() {
        if !o.holds && witness.is_none_or(|(_, m)| o.margin < m) {
            witness = Some((i, o.margin));
        }
    }
    let n_samples = evaluated.len();
    let witness = witness.map(|(i, _)| evaluated.into_iter().nth(i).expect("index in range").0);
    Ok(SpectralVerdict {
        condition: *cond,
        domain: domain.clone(),
        sampler: *sampler,
        n_samples,
        status: if witness.is_some() { VerdictStatus::Violated } else { VerdictStatus::SatisfiedOnSamples },
        witness,
        margin,
    })
}

/// Lower bound `m2 / m1^(n-1)` on `min |lambda|` for `n` reals with
/// `sum |lambda| < m1` and `prod |lambda| > m2`.
pub fn derived_eigenvalue_bound(m1: f64, m2: f64, n: usize) -> Result<f64> {
    positive("m1", m1)?;
    positive("m2", m2)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {n}")));
    }
    Ok(m2 / m1.powi(n as i32 - 1))
}
