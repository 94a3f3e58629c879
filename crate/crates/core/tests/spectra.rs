mod common;

use common::{real_corpus, rng};
use jacprobe::polymap::NumericMap;
use jacprobe::sampling::{BoxDomain, SamplerConfig};
use jacprobe::spectra::{
    check_condition, derived_eigenvalue_bound, eigenvalues, rayleigh_bounds, rayleigh_quotient, symmetric_eigenvalues,
    symmetrize, ConditionSpec, Sign, SpectralSample, VerdictStatus,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-5.0..5.0));
    &m + m.transpose()
}

#[test]
fn rayleigh_sandwich_on_random_matrices() {
    let mut rng = rng(7);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let s = random_symmetric(&mut rng, n);
        let (mu1, mu2) = rayleigh_bounds(&s).unwrap();
        for _ in 0..100 {
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if y.iter().all(|v| *v == 0.0) {
                continue;
            }
            let q = rayleigh_quotient(&s, &y);
            assert!(mu1 - 1e-9 <= q && q <= mu2 + 1e-9, "{mu1} <= {q} <= {mu2}");
        }
    }
}

#[test]
fn symmetrized_spectrum_is_real() {
    let mut rng = rng(8);
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-5.0..5.0));
        let s = symmetrize(&m).unwrap();
        // the general solver on the symmetric matrix, before any clamping
        for l in eigenvalues(&s).unwrap() {
            assert!(l.im.abs() <= 1e-10, "{l}");
        }
        assert_eq!(symmetric_eigenvalues(&s).unwrap().len(), n);
    }
}

fn conditions() -> Vec<ConditionSpec> {
    vec![
        ConditionSpec::fgr_band(0.1).unwrap(),
        ConditionSpec::symmetric_band(Sign::Positive, 0.5).unwrap(),
        ConditionSpec::symmetric_band(Sign::Negative, 0.5).unwrap(),
        ConditionSpec::square_region(0.2).unwrap(),
        ConditionSpec::trace_det_bounds(Sign::Positive, 20.0, 1.0).unwrap(),
    ]
}

#[test]
fn violated_witnesses_reproduce() {
    let sampler = SamplerConfig { grid: 9, random: 256, seed: 3 };
    for (name, map) in real_corpus() {
        let n = map.n_in();
        let domain = BoxDomain::cube(n, 2.0);
        let numeric = NumericMap::new(&map);
        for cond in conditions() {
            let v = check_condition(&map, &cond, &domain, &sampler).unwrap();
            if v.status == VerdictStatus::Violated {
                let w = v.witness.expect("violated verdicts carry a witness");
                let again = SpectralSample::at(&numeric, &w.point).unwrap();
                assert!(!cond.evaluate(&again).holds, "{name} {cond:?}");
            } else {
                assert!(v.witness.is_none());
            }
        }
    }
}

#[test]
fn trace_and_det_match_eigenvalues() {
    let sampler = SamplerConfig { grid: 5, random: 100, seed: 4 };
    for (name, map) in real_corpus() {
        let numeric = NumericMap::new(&map);
        for p in sampler.points(&BoxDomain::cube(map.n_in(), 2.0)) {
            let s = SpectralSample::at(&numeric, &p).unwrap();
            let sum: f64 = s.eig_sym.iter().sum();
            let prod: f64 = s.eig_sym.iter().product();
            let scale = s.eig_sym.iter().map(|l| l.abs()).fold(1.0, f64::max);
            assert!((s.trace_sym - sum).abs() <= 1e-8 * scale, "{name} trace");
            let pscale = s.eig_sym.iter().map(|l| l.abs().max(1.0)).product::<f64>();
            assert!((s.det_sym - prod).abs() <= 1e-8 * pscale, "{name} det {} vs {prod}", s.det_sym);
        }
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let map = real_corpus().into_iter().find(|(n, _)| n == "pinchuk").unwrap().1;
    let cond = ConditionSpec::fgr_band(0.1).unwrap();
    let domain = BoxDomain::cube(2, 5.0);
    let sampler = SamplerConfig::default();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| check_condition(&map, &cond, &domain, &sampler).unwrap());
    let parallel = check_condition(&map, &cond, &domain, &sampler).unwrap();
    assert_eq!(serial, parallel);
}

proptest! {
    #[test]
    fn bound_monotonicity(m1 in 0.1f64..10.0, m2 in 0.1f64..10.0, n in 2usize..6, dm in 0.01f64..5.0) {
        let b = derived_eigenvalue_bound(m1, m2, n).unwrap();
        prop_assert!(derived_eigenvalue_bound(m1, m2 + dm, n).unwrap() > b);
        prop_assert!(derived_eigenvalue_bound(m1 + dm, m2, n).unwrap() < b);
        if m1 > 1.0 {
            prop_assert!(derived_eigenvalue_bound(m1, m2, n + 1).unwrap() < b);
        }
    }
}
