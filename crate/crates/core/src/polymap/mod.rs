//! Exact sparse multivariate polynomial maps.

pub mod coeff;
pub mod compiled;
pub mod json;
pub mod map;
pub mod poly;

pub use coeff::{parse_rational, Coeff, ComplexRational, Field, Rational};
pub use compiled::{CompiledPoly, NumericMap};
pub use json::{parse_map, serialize_complex, serialize_map, serialize_real};
pub use map::{rational_point, AnyMap, ComplexMap, KellerDecomposition, PolyMap, PolyMatrix, RealMap};
pub use poly::{grlex, Monomial, Poly};
