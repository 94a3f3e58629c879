//! Re-derives every manifest tag from the modules.

use jacprobe::collide::{find_collision, verify_collision};
use jacprobe::corpus::{load_corpus, CorpusEntry};
use jacprobe::polymap::{AnyMap, Poly, RealMap};
use jacprobe::realify::{jacobian_charpoly, nilpotency_report, realify};
use jacprobe::sampling::{BoxDomain, SamplerConfig};
use jacprobe::spectra::check_condition;

fn as_real(e: &CorpusEntry) -> RealMap {
    match &e.map {
        AnyMap::Real(m) => m.clone(),
        AnyMap::Complex(m) => realify(m).unwrap().doubled,
    }
}

/// `det JF` from the constant coefficient of the characteristic polynomial.
fn det_is_nonzero_constant(map: &RealMap) -> bool {
    let coeffs = jacobian_charpoly(map).unwrap();
    let det: &Poly<_> = coeffs.last().unwrap();
    !det.is_zero() && det.degree() == 0
}

#[test]
fn keller_tags() {
    for e in load_corpus().unwrap() {
        assert_eq!(det_is_nonzero_constant(&as_real(&e)), e.tags.keller, "{}", e.name);
    }
}

#[test]
fn nilpotent_tags() {
    for e in load_corpus().unwrap() {
        let report = nilpotency_report(&as_real(&e)).unwrap();
        let derived = report.is_keller_form.then_some(report.nilpotent);
        assert_eq!(derived, e.tags.nilpotent, "{}", e.name);
    }
}

#[test]
fn condition_tags() {
    for e in load_corpus().unwrap() {
        let map = as_real(&e);
        for tag in &e.tags.conditions {
            let v = check_condition(&map, &tag.condition, &tag.domain, &SamplerConfig::default()).unwrap();
            assert_eq!(v.status, tag.status, "{} {:?}", e.name, tag.condition);
        }
    }
}

/// Non-injective entries get a verified witness, from the fixture or from a
/// search; injective ones get none from the same search.
#[test]
fn injectivity_tags() {
    for e in load_corpus().unwrap() {
        let map = as_real(&e);
        let found = match &e.witness {
            Some(w) => verify_collision(&map, w, 1e-8).unwrap().passed,
            None => {
                let domain = BoxDomain::cube(map.n_in(), 2.0);
                match find_collision(&map, &domain, 2000, 1).unwrap() {
                    Some(w) => verify_collision(&map, &w, 1e-8).unwrap().passed,
                    None => false,
                }
            }
        };
        match e.tags.injective {
            Some(false) if e.name != "pinchuk" => assert!(found, "{}: no witness", e.name),
            Some(true) => assert!(!found, "{}: unexpected witness", e.name),
            _ => {}
        }
    }
}

#[test]
fn pinchuk_entry_is_reproducible() {
    let corpus = load_corpus().unwrap();
    let pinchuk = corpus.iter().find(|e| e.name == "pinchuk").unwrap();
    let frozen = corpus.iter().find(|e| e.name == "pinchuk_collision").unwrap();
    assert_eq!(pinchuk.map, frozen.map);
    assert_eq!(as_real(pinchuk).degree(), 25);
    let w = frozen.witness.as_ref().unwrap();
    assert!(verify_collision(&as_real(pinchuk), w, 1e-8).unwrap().passed);
}
