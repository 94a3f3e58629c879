use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, ToPrimitive, Zero};

pub type Rational = BigRational;
pub type ComplexRational = Complex<BigRational>;

/// Ground field of a polynomial map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// Exact coefficient ring of a [`Poly`](super::Poly).
///
/// Implemented for exact rationals (real maps) and Gaussian rationals
/// (complex maps). `Float` is the matching double-precision scalar.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    type Float: Copy + Num + Neg<Output = Self::Float> + Debug + Send + Sync + nalgebra::Scalar + 'static;

    const FIELD: Field;

    fn to_float(&self) -> Self::Float;

    fn from_rational(q: Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// Exact rational image of a double; fails on non-finite input.
    fn from_float(x: Self::Float) -> Option<Self>;

    /// Magnitude used by numerical tolerances.
    fn float_abs(x: Self::Float) -> f64;
}

impl Coeff for Rational {
    type Float = f64;
    const FIELD: Field = Field::Real;

    fn to_float(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_rational(q: Rational) -> Self {
        q
    }

    fn from_float(x: f64) -> Option<Self> {
        Rational::from_f64(x)
    }

    fn float_abs(x: f64) -> f64 {
        x.abs()
    }
}

impl Coeff for ComplexRational {
    type Float = Complex64;
    const FIELD: Field = Field::Complex;

    fn to_float(&self) -> Complex64 {
        Complex64::new(self.re.to_float(), self.im.to_float())
    }

    fn from_rational(q: Rational) -> Self {
        Complex::new(q, Rational::zero())
    }

    fn from_float(x: Complex64) -> Option<Self> {
        Some(Complex::new(Rational::from_f64(x.re)?, Rational::from_f64(x.im)?))
    }

    fn float_abs(x: Complex64) -> f64 {
        x.norm()
    }
}

/// Parses an exact rational: integer, `p/q`, or a plain decimal such as `-0.125`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let digits = int_part.trim_start_matches(['-', '+']);
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let numer: BigInt = format!("{digits}{frac_part}").parse().ok()?;
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let q = Rational::new(numer, denom);
        return Some(if negative { -q } else { q });
    }
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (int(n)?, int(d)?),
        None => (int(s)?, BigInt::one()),
    };
    if denom.is_zero() {
        return None;
    }
    Some(Rational::new(numer, denom))
}

fn int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("-3/4"), Some(q(-3, 4)));
        assert_eq!(parse_rational("6/8"), Some(q(3, 4)));
        assert_eq!(parse_rational("17"), Some(q(17, 1)));
        assert_eq!(parse_rational("-0.125"), Some(q(-1, 8)));
        assert_eq!(parse_rational("2.5"), Some(q(5, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1.2.3"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn float_conversion_is_exact_for_dyadics() {
        let x = Rational::from_float(0.375).unwrap();
        assert_eq!(x, q(3, 8));
        assert_eq!(x.to_float(), 0.375);
        assert!(Rational::from_float(f64::NAN).is_none());
    }
}
