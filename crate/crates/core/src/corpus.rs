//! Curated fixture maps with expected properties.
//!
//! The fixtures live as map documents under `corpus/` next to a
//! `manifest.json` that lists each entry with its tags. They are embedded in
//! the library so that [`load_corpus`] works from any working directory;
//! [`load_corpus_dir`] reads the same layout from disk.
//!
//! Tags are claims, not facts: the test suite re-derives every one of them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collide::CollisionWitness;
use crate::error::{Error, Result};
use crate::polymap::{parse_map, AnyMap, ComplexMap, ComplexRational, Poly, PolyMap, Rational, RealMap};
use crate::sampling::BoxDomain;
use crate::spectra::{ConditionSpec, VerdictStatus};

const MANIFEST: &str = include_str!("../corpus/manifest.json");

const FIXTURES: &[(&str, &str)] = &[
    ("identity2.json", include_str!("../corpus/identity2.json")),
    ("identity3.json", include_str!("../corpus/identity3.json")),
    ("keller_cubic.json", include_str!("../corpus/keller_cubic.json")),
    ("monotone_cubic.json", include_str!("../corpus/monotone_cubic.json")),
    ("fold.json", include_str!("../corpus/fold.json")),
    ("cubic_fold3.json", include_str!("../corpus/cubic_fold3.json")),
    ("non_nilpotent.json", include_str!("../corpus/non_nilpotent.json")),
    ("complex_square.json", include_str!("../corpus/complex_square.json")),
    ("complex_keller.json", include_str!("../corpus/complex_keller.json")),
    ("pinchuk.json", include_str!("../corpus/pinchuk.json")),
    ("pinchuk_collision.json", include_str!("../corpus/pinchuk_collision.json")),
];

/// Expected outcome of one condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionTag {
    pub condition: ConditionSpec,
    pub domain: BoxDomain,
    pub status: VerdictStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tags {
    /// `None` when injectivity is not claimed either way.
    pub injective: Option<bool>,
    /// `det JF` is a nonzero constant.
    pub keller: bool,
    /// `JH` nilpotent for `F = X - H`; `None` when `F` is not of that form.
    pub nilpotent: Option<bool>,
    #[serde(default)]
    pub conditions: Vec<ConditionTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub map_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_file: Option<String>,
    pub tags: Tags,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub map_file: String,
    pub witness_file: Option<String>,
    pub tags: Tags,
    pub provenance: String,
    pub map: AnyMap,
    pub witness: Option<CollisionWitness>,
}

impl CorpusEntry {
    pub fn real_map(&self) -> Result<RealMap> {
        self.map.clone().into_real()
    }
}

/// Loads the embedded corpus.
pub fn load_corpus() -> Result<Vec<CorpusEntry>> {
    load_with(MANIFEST, |file| {
        FIXTURES
            .iter()
            .find(|(name, _)| *name == file)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| Error::Corpus(format!("missing fixture {file}")))
    })
}

/// Loads a corpus directory containing `manifest.json`.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let read = |file: &str| {
        std::fs::read_to_string(dir.join(file)).map_err(|e| Error::Corpus(format!("cannot read fixture {file}: {e}")))
    };
    load_with(&read("manifest.json")?, read)
}

/// Looks up one entry of the embedded corpus by name.
pub fn corpus_entry(name: &str) -> Result<CorpusEntry> {
    load_corpus()?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Corpus(format!("no corpus entry named {name:?}")))
}

fn load_with(manifest: &str, read: impl Fn(&str) -> Result<String>) -> Result<Vec<CorpusEntry>> {
    let manifest: Manifest =
        serde_json::from_str(manifest).map_err(|e| Error::Corpus(format!("corrupt manifest: {e}")))?;
    manifest
        .entries
        .into_iter()
        .map(|e| {
            let map = parse_map(&read(&e.map_file)?)
                .map_err(|err| Error::Corpus(format!("corrupt fixture {}: {err}", e.map_file)))?;
            let witness = match &e.witness_file {
                Some(file) => Some(
                    serde_json::from_str::<CollisionWitness>(&read(file)?)
                        .map_err(|err| Error::Corpus(format!("corrupt witness {file}: {err}")))?,
                ),
                None => None,
            };
            Ok(CorpusEntry {
                name: e.name,
                map_file: e.map_file,
                witness_file: e.witness_file,
                tags: e.tags,
                provenance: e.provenance,
                map,
                witness,
            })
        })
        .collect()
}

/// Symbolic constructions the fixtures are generated from.
pub mod constructions {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn c(n: usize, p: i64, d: i64) -> Poly<Rational> {
        Poly::constant(n, q(p, d))
    }

    fn xy() -> (Poly<Rational>, Poly<Rational>) {
        (Poly::var(2, 0), Poly::var(2, 1))
    }

    pub fn identity(n: usize) -> RealMap {
        RealMap::identity(n)
    }

    /// `(x - y^3, y)`
    pub fn keller_cubic() -> RealMap {
        let (x, y) = xy();
        PolyMap::new(2, vec![x.sub(&y.pow(3)), y]).expect("square")
    }

    /// `(x + x^3/3, y + y^3/3)`
    pub fn monotone_cubic() -> RealMap {
        let (x, y) = xy();
        let third = q(1, 3);
        PolyMap::new(2, vec![x.add(&x.pow(3).scale(&third)), y.add(&y.pow(3).scale(&third))]).expect("square")
    }

    /// `(x^3 - x, y)`
    pub fn fold() -> RealMap {
        let (x, y) = xy();
        PolyMap::new(2, vec![x.pow(3).sub(&x), y]).expect("square")
    }

    /// `(x^3 - 3x, y)`
    pub fn cubic_fold3() -> RealMap {
        let (x, y) = xy();
        PolyMap::new(2, vec![x.pow(3).sub(&x.scale(&q(3, 1))), y]).expect("square")
    }

    /// `(x - x^3, y)`: Keller form with `JH` not nilpotent.
    pub fn non_nilpotent() -> RealMap {
        let (x, y) = xy();
        PolyMap::new(2, vec![x.sub(&x.pow(3)), y]).expect("square")
    }

    /// `z^2`
    pub fn complex_square() -> ComplexMap {
        let z: Poly<ComplexRational> = Poly::var(1, 0);
        PolyMap::new(1, vec![z.pow(2)]).expect("square")
    }

    /// `(z1 - z2^3, z2)`
    pub fn complex_keller() -> ComplexMap {
        let z1: Poly<ComplexRational> = Poly::var(2, 0);
        let z2: Poly<ComplexRational> = Poly::var(2, 1);
        PolyMap::new(2, vec![z1.sub(&z2.pow(3)), z2]).expect("square")
    }

    /// Pinchuk's planar map: nonvanishing Jacobian determinant, not injective.
    pub fn pinchuk() -> RealMap {
        let (x, y) = xy();
        let one = Poly::one(2);
        let t = x.mul(&y).sub(&one);
        let xt1 = x.mul(&t).add(&one);
        let h = t.mul(&xt1);
        let f = xt1.pow(2).mul(&t.pow(2).add(&y));
        let p = f.add(&h);
        let h2 = h.pow(2);
        let h3 = h.pow(3);
        let q = t
            .pow(2)
            .neg()
            .sub(&c(2, 6, 1).mul(&t).mul(&h).mul(&h.add(&one)))
            .sub(&c(2, 170, 1).mul(&f).mul(&h))
            .sub(&c(2, 91, 1).mul(&h2))
            .sub(&c(2, 195, 1).mul(&f).mul(&h2))
            .sub(&c(2, 69, 1).mul(&h3))
            .sub(&c(2, 75, 1).mul(&h3).mul(&f))
            .sub(&c(2, 75, 4).mul(&h.pow(4)));
        PolyMap::new(2, vec![p, q]).expect("square")
    }
}
