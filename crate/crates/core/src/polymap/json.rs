//! JSON map documents.
//!
//! ```json
//! {"field":"real","n_vars":2,"components":[[{"coeff":"-3/4","exps":[2,0]}],[...]]}
//! ```
//!
//! Complex coefficients are written as `{"re":"1/2","im":"0"}`. Serialization
//! always emits the canonical (merged, graded-lex sorted) term order, so a
//! parse/serialize cycle is byte-stable.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::coeff::{parse_rational, Coeff, ComplexRational, Rational};
use super::map::{AnyMap, PolyMap};
use super::poly::{Monomial, Poly};
use crate::error::{Error, Result};

/// Largest accepted total degree of a single monomial.
pub const MAX_DEGREE: u32 = 64;
/// Largest accepted number of terms in one component.
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    field: String,
    n_vars: usize,
    components: Vec<Vec<RawTerm>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: Value,
    exps: Vec<u32>,
}

#[derive(Serialize)]
struct OutDoc<'a, T: Serialize> {
    field: &'a str,
    n_vars: usize,
    components: Vec<Vec<OutTerm<'a, T>>>,
}

#[derive(Serialize)]
struct OutTerm<'a, T: Serialize> {
    coeff: T,
    exps: &'a [u32],
}

#[derive(Serialize)]
struct OutComplex {
    re: String,
    im: String,
}

/// Parses a map document into a canonical map of the declared field.
pub fn parse_map(text: &str) -> Result<AnyMap> {
    let raw: RawDoc = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    match raw.field.as_str() {
        "real" => Ok(AnyMap::Real(build(&raw, real_coeff)?)),
        "complex" => Ok(AnyMap::Complex(build(&raw, complex_coeff)?)),
        other => Err(Error::parse("field", format!("expected \"real\" or \"complex\", got {other:?}"))),
    }
}

fn build<C: Coeff>(raw: &RawDoc, coeff: impl Fn(&Value, &str) -> Result<C>) -> Result<PolyMap<C>> {
    let mut components = Vec::with_capacity(raw.components.len());
    for (i, terms) in raw.components.iter().enumerate() {
        if terms.len() > MAX_TERMS {
            return Err(Error::parse(
                format!("components[{i}]"),
                format!("{} terms exceeds the cap of {MAX_TERMS}", terms.len()),
            ));
        }
        let mut monomials = Vec::with_capacity(terms.len());
        for (k, t) in terms.iter().enumerate() {
            let ctx = format!("components[{i}][{k}]");
            if t.exps.len() != raw.n_vars {
                return Err(Error::parse(
                    format!("{ctx}.exps"),
                    format!("length {}, expected n_vars = {}", t.exps.len(), raw.n_vars),
                ));
            }
            let degree: u64 = t.exps.iter().map(|&e| u64::from(e)).sum();
            if degree > u64::from(MAX_DEGREE) {
                return Err(Error::parse(
                    format!("{ctx}.exps"),
                    format!("total degree {degree} exceeds the cap of {MAX_DEGREE}"),
                ));
            }
            monomials.push(Monomial { coeff: coeff(&t.coeff, &format!("{ctx}.coeff"))?, exps: t.exps.clone() });
        }
        components.push(Poly::from_terms(raw.n_vars, monomials)?);
    }
    PolyMap::new(raw.n_vars, components)
}

fn rational_value(v: &Value, ctx: &str) -> Result<Rational> {
    let parsed = match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => n.as_i64().map(|i| Rational::from_integer(i.into())),
        _ => None,
    };
    parsed.ok_or_else(|| Error::parse(ctx, format!("unparsable rational {v}")))
}

fn real_coeff(v: &Value, ctx: &str) -> Result<Rational> {
    rational_value(v, ctx)
}

fn complex_coeff(v: &Value, ctx: &str) -> Result<ComplexRational> {
    match v {
        Value::Object(obj) => {
            if let Some(key) = obj.keys().find(|k| *k != "re" && *k != "im") {
                return Err(Error::parse(ctx, format!("unexpected key {key:?}")));
            }
            let part = |key: &str| match obj.get(key) {
                Some(p) => rational_value(p, &format!("{ctx}.{key}")),
                None => Ok(Rational::from_integer(0.into())),
            };
            Ok(Complex::new(part("re")?, part("im")?))
        }
        // A bare rational is accepted as a purely real coefficient.
        other => Ok(Complex::new(rational_value(other, ctx)?, Rational::from_integer(0.into()))),
    }
}

/// Canonical compact serialization of a real map.
pub fn serialize_real(map: &PolyMap<Rational>) -> String {
    serialize_with(map, "real", |c| c.to_string())
}

/// Canonical compact serialization of a complex map.
pub fn serialize_complex(map: &PolyMap<ComplexRational>) -> String {
    serialize_with(map, "complex", |c| OutComplex { re: c.re.to_string(), im: c.im.to_string() })
}

pub fn serialize_map(map: &AnyMap) -> String {
    match map {
        AnyMap::Real(m) => serialize_real(m),
        AnyMap::Complex(m) => serialize_complex(m),
    }
}

fn serialize_with<C: Coeff, T: Serialize>(map: &PolyMap<C>, field: &str, coeff: impl Fn(&C) -> T) -> String {
    let doc = OutDoc {
        field,
        n_vars: map.n_in(),
        components: map
            .components()
            .iter()
            .map(|c| c.terms().iter().map(|t| OutTerm { coeff: coeff(&t.coeff), exps: &t.exps }).collect())
            .collect(),
    };
    serde_json::to_string(&doc).expect("map documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_document() {
        let m = parse_map(
            r#"{"field":"real","n_vars":2,"components":[[{"coeff":"1","exps":[1,0]}],[{"coeff":"1","exps":[0,1]}]]}"#,
        )
        .unwrap()
        .into_real()
        .unwrap();
        assert_eq!(m, PolyMap::identity(2));
    }

    #[test]
    fn merges_like_terms() {
        let m = parse_map(
            r#"{"field":"real","n_vars":2,"components":[[{"coeff":"2","exps":[2,1]},{"coeff":"3","exps":[2,1]}]]}"#,
        )
        .unwrap()
        .into_real()
        .unwrap();
        let terms = m.components()[0].terms();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].coeff, Rational::from_integer(5.into()));
        assert_eq!(terms[0].exps, vec![2, 1]);
    }

    #[test]
    fn complex_round_trip() {
        let text = r#"{"field":"complex","n_vars":1,"components":[[{"coeff":{"re":"1/2","im":"-3"},"exps":[2]},{"coeff":{"re":"0","im":"1"},"exps":[0]}]]}"#;
        let m = parse_map(text).unwrap();
        let out = serialize_map(&m);
        assert_eq!(parse_map(&out).unwrap(), m);
        assert_eq!(serialize_map(&parse_map(&out).unwrap()), out);
        // canonical order puts the constant first
        assert!(out.find("\"exps\":[0]").unwrap() < out.find("\"exps\":[2]").unwrap());
    }

    #[test]
    fn rejections_carry_context() {
        let err = parse_map(r#"{"field":"real","n_vars":2,"components":[[{"coeff":"1","exps":[1]}]]}"#).unwrap_err();
        assert!(err.to_string().contains("components[0][0].exps"), "{err}");

        let err = parse_map(r#"{"field":"real","n_vars":1,"components":[[{"coeff":"x/2","exps":[1]}]]}"#).unwrap_err();
        assert!(err.to_string().contains("components[0][0].coeff"), "{err}");

        let err = parse_map("{\"field\":\"real\",\n\"n_vars\":1,\n\"components\":[[{\"coeff\":\"1\" \"exps\":[1]}]]}")
            .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let err = parse_map(r#"{"field":"quaternion","n_vars":1,"components":[]}"#).unwrap_err();
        assert!(err.to_string().contains("field"));

        let err = parse_map(r#"{"field":"real","n_vars":1,"components":[[{"coeff":"1","exps":[65]}]]}"#).unwrap_err();
        assert!(err.to_string().contains("degree"), "{err}");
    }
}
