//! Axis-aligned sampling boxes and reproducible point sets.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Product of closed intervals `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub bounds: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("empty box".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!("degenerate box interval {i}: [{lo}, {hi}]")));
            }
        }
        Ok(BoxDomain { bounds })
    }

    /// `[-half, half]^n`.
    pub fn cube(n: usize, half: f64) -> Self {
        BoxDomain { bounds: vec![(-half, half); n] }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.bounds).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
    }

    /// Point reflection through the box centre.
    pub fn reflect(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.bounds).map(|(v, (lo, hi))| lo + hi - v).collect()
    }
}

impl FromStr for BoxDomain {
    type Err = Error;

    /// Parses `"-5:5,-5:5"`.
    fn from_str(s: &str) -> Result<Self> {
        let bounds = s
            .split(',')
            .map(|part| {
                let (lo, hi) = part
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidArgument(format!("box interval {part:?} is not lo:hi")))?;
                let lo: f64 =
                    lo.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad box bound {lo:?}")))?;
                let hi: f64 =
                    hi.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad box bound {hi:?}")))?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        BoxDomain::new(bounds)
    }
}

impl fmt::Display for BoxDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bounds.iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Per-axis grid plus uniform random points, reproducible from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub grid: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { grid: 17, random: 4096, seed: 42 }
    }
}

impl SamplerConfig {
    /// Grid points (lexicographic, first axis slowest) followed by the random
    /// points, in a fixed order.
    pub fn points(&self, domain: &BoxDomain) -> Vec<Vec<f64>> {
        let n = domain.dim();
        let mut out = Vec::new();
        if self.grid > 0 {
            let axes: Vec<Vec<f64>> = domain
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    if self.grid == 1 {
                        vec![0.5 * (lo + hi)]
                    } else {
                        let step = (hi - lo) / (self.grid - 1) as f64;
                        (0..self.grid).map(|k| if k + 1 == self.grid { hi } else { lo + step * k as f64 }).collect()
                    }
                })
                .collect();
            let total = self.grid.checked_pow(n as u32).unwrap_or(usize::MAX);
            out.reserve(total.min(1 << 24));
            let mut idx = vec![0usize; n];
            'outer: loop {
                out.push(idx.iter().enumerate().map(|(d, &k)| axes[d][k]).collect());
                for d in (0..n).rev() {
                    idx[d] += 1;
                    if idx[d] < self.grid {
                        continue 'outer;
                    }
                    idx[d] = 0;
                }
                break;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        out.extend((0..self.random).map(|_| domain.uniform(&mut rng)));
        out
    }
}

/// Independent RNG stream for trial `index` under a master seed, so that
/// parallel trials do not depend on scheduling.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_box() {
        let b: BoxDomain = "-5:5,-2.5:1".parse().unwrap();
        assert_eq!(b.bounds, vec![(-5.0, 5.0), (-2.5, 1.0)]);
        assert_eq!(b.to_string(), "-5:5,-2.5:1");
        assert!("1:1".parse::<BoxDomain>().is_err());
        assert!("3".parse::<BoxDomain>().is_err());
        assert!("".parse::<BoxDomain>().is_err());
    }

    #[test]
    fn grid_covers_corners_and_centre() {
        let b = BoxDomain::cube(2, 5.0);
        let pts = SamplerConfig { grid: 17, random: 10, seed: 42 }.points(&b);
        assert_eq!(pts.len(), 17 * 17 + 10);
        assert_eq!(pts[0], vec![-5.0, -5.0]);
        assert_eq!(pts[17 * 17 - 1], vec![5.0, 5.0]);
        assert!(pts.contains(&vec![0.0, 0.0]));
        assert!(pts.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn reproducible() {
        let b = BoxDomain::cube(3, 1.0);
        let s = SamplerConfig { grid: 3, random: 50, seed: 7 };
        assert_eq!(s.points(&b), s.points(&b));
        let other = SamplerConfig { seed: 8, ..s };
        assert_ne!(s.points(&b), other.points(&b));
    }
}
