mod common;

use jacprobe::corpus::load_corpus;
use jacprobe::polymap::{AnyMap, ComplexMap};
use jacprobe::realify::{
    interleave, nilpotency_report, random_rational_points, realify, spec_is_one, verify_det_identity_exact,
};

fn complex_corpus() -> Vec<(String, ComplexMap)> {
    load_corpus()
        .unwrap()
        .into_iter()
        .filter_map(|e| match e.map {
            AnyMap::Complex(m) => Some((e.name, m)),
            AnyMap::Real(_) => None,
        })
        .collect()
}

#[test]
fn realification_commutes_with_evaluation() {
    for (name, map) in complex_corpus() {
        let rm = realify(&map).unwrap();
        for z in random_rational_points(map.n_in(), 100, 11) {
            let lhs = interleave(&map.evaluate_exact(&z).unwrap());
            let rhs = rm.doubled.evaluate_exact(&interleave(&z)).unwrap();
            assert_eq!(lhs, rhs, "{name}");
        }
    }
}

#[test]
fn determinant_identity_is_exact() {
    for (name, map) in complex_corpus() {
        let rm = realify(&map).unwrap();
        let report = verify_det_identity_exact(&rm, &random_rational_points(map.n_in(), 100, 12)).unwrap();
        assert!(report.holds, "{name}: {report:?}");
    }
}

#[test]
fn spec_one_iff_nilpotent_on_keller_maps() {
    let mut checked = 0;
    for (name, map) in common::real_corpus() {
        let report = nilpotency_report(&map).unwrap();
        if !report.is_keller_form {
            assert!(spec_is_one(&map).is_err(), "{name}");
            continue;
        }
        checked += 1;
        assert_eq!(spec_is_one(&map).unwrap(), report.nilpotent, "{name}");
        if let Some(k) = report.nilpotency_index {
            assert!(k <= map.n_in(), "{name}: index {k}");
        }
        assert_eq!(report.nilpotent, report.nilpotency_index.is_some(), "{name}");
    }
    assert!(checked >= 5);
}
