//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use jacprobe::collide::{find_collision, verify_collision};
use jacprobe::corpus::{constructions, load_corpus, CorpusEntry};
use jacprobe::minimax::{Functional, MinimaxParams, MountainPassProblem, PSWitness};
use jacprobe::polymap::{AnyMap, Coeff, Poly, Rational, RealMap};
use jacprobe::realify::{
    jacobian_charpoly, nilpotency_report, random_complex_points, random_rational_points, realify, spec_is_one,
    verify_det_identity, verify_det_identity_exact,
};
use jacprobe::sampling::{trial_rng, BoxDomain, SamplerConfig};
use jacprobe::spectra::{
    check_condition, derived_eigenvalue_bound, rayleigh_bounds, rayleigh_quotient, ConditionSpec, Sign, VerdictStatus,
};
use nalgebra::DMatrix;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn as_real(e: &CorpusEntry) -> RealMap {
    match &e.map {
        AnyMap::Real(m) => m.clone(),
        AnyMap::Complex(m) => realify(m).unwrap().doubled,
    }
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn dyadic(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| q(rng.gen_range(-1024i64..=1024), 1024)).collect()
}

fn floats(v: &[Rational]) -> Vec<f64> {
    v.iter().map(|r| r.to_float()).collect()
}

/// `|F(a + x) - t|^2` in exact arithmetic.
fn exact_value(map: &RealMap, a: &[Rational], t: &[Rational], x: &[Rational]) -> Rational {
    let y: Vec<Rational> = a.iter().zip(x).map(|(u, v)| u + v).collect();
    map.evaluate_exact(&y).unwrap().iter().zip(t).map(|(f, ti)| (f - ti) * (f - ti)).fold(q(0, 1), |s, v| s + v)
}

/// Central difference of the exact functional along coordinate `k`, with
/// one Richardson step so the result is accurate to O(h^4).
fn exact_partial(map: &RealMap, a: &[Rational], t: &[Rational], x: &[Rational], k: usize) -> f64 {
    let central = |h: &Rational| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        (exact_value(map, a, t, &xp) - exact_value(map, a, t, &xm)) / (h * q(2, 1))
    };
    let coarse = central(&q(1, 65_536));
    let fine = central(&q(1, 131_072));
    ((fine * q(4, 1) - coarse) / q(3, 1)).to_float()
}

fn gradient_correctness() -> Check {
    let start = Instant::now();
    let mut rng = trial_rng(2024, 100);
    let mut worst = 0.0f64;
    let mut total = 0;
    for e in load_corpus().map_err(|e| e.to_string())?.iter().filter(|e| e.witness.is_none()) {
        let map = as_real(e);
        let n = map.n_in();
        let a = dyadic(&mut rng, n);
        let b = dyadic(&mut rng, n);
        let t = map.evaluate_exact(&b).unwrap();
        let f = Functional::new(&map, &floats(&a), &floats(&t)).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let x = dyadic(&mut rng, n);
            let g = f.gradient(&floats(&x)).unwrap();
            let fd: Vec<f64> = (0..n).map(|k| exact_partial(&map, &a, &t, &x, k)).collect();
            let err = g.iter().zip(&fd).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            let scale = g.iter().map(|u| u * u).sum::<f64>().sqrt().max(1.0);
            worst = worst.max(err / scale);
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-6, || format!("relative error {worst:.2e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{total} points, worst relative error {worst:.1e}, {:.2}s", elapsed.as_secs_f64()))
}

fn fold_problem() -> Result<MountainPassProblem, String> {
    prepared(&constructions::fold(), &[0.0, 0.0], &[1.0, 0.0], 1e-10)
}

fn cubic_fold3_problem() -> Result<MountainPassProblem, String> {
    prepared(&constructions::cubic_fold3(), &[0.0, 0.0], &[3f64.sqrt(), 0.0], 1e-10)
}

fn prepared(map: &RealMap, a: &[f64], b: &[f64], tol: f64) -> Result<MountainPassProblem, String> {
    let mut p = MountainPassProblem::build_with_tolerance(map, a, b, tol).map_err(|e| e.to_string())?;
    let det = p.functional_map().residual(&vec![0.0; p.n()]).unwrap().1.determinant().abs();
    p.establish_geometry(0.5 * det, &SamplerConfig::default(), 64).map_err(|e| e.to_string())?;
    Ok(p)
}

fn run_mp(p: &MountainPassProblem) -> Result<(PSWitness, Duration), String> {
    let start = Instant::now();
    let w = p.mountain_pass(&MinimaxParams::default()).map_err(|e| e.to_string())?;
    Ok((w, start.elapsed()))
}

fn rayleigh_machinery() -> Check {
    let mut rng = trial_rng(2024, 200);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-10.0..10.0));
        let s = &m + m.transpose();
        let (mu1, mu2) = rayleigh_bounds(&s).unwrap();
        let scale = mu1.abs().max(mu2.abs()).max(1.0);
        for _ in 0..100 {
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = rayleigh_quotient(&s, &y);
            if r < mu1 - 1e-9 * scale || r > mu2 + 1e-9 * scale {
                violations += 1;
            }
        }
    }
    let mut iterates = 0;
    for p in [fold_problem()?, cubic_fold3_problem()?] {
        let (w, _) = run_mp(&p)?;
        for it in &w.iterates {
            let m = p.rayleigh_monitor(&it.point).map_err(|e| e.to_string())?;
            iterates += 1;
            if !m.sandwich_holds() || !m.gradient_bound_holds() {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("100000 matrix samples and {iterates} iterates, no violations"))
}

fn determinant_identity() -> Check {
    for e in [constructions::complex_square(), constructions::complex_keller()] {
        let rm = realify(&e).map_err(|e| e.to_string())?;
        let n = e.n_in();
        let exact = verify_det_identity_exact(&rm, &random_rational_points(n, 100, 300)).unwrap();
        ensure(exact.holds, || format!("exact mismatch at sample {:?}", exact.first_mismatch))?;
        let float = verify_det_identity(&rm, &random_complex_points(n, 100, 301)).unwrap();
        ensure(float.max_rel_error <= 1e-9, || format!("relative error {:.2e}", float.max_rel_error))?;
    }
    Ok("exact on 200 rational points, within 1e-9 on 200 double points".into())
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

fn nilpotency_equivalence() -> Check {
    let keller: Vec<(&str, RealMap)> = vec![
        ("keller_cubic", constructions::keller_cubic()),
        ("complex_keller", realify(&constructions::complex_keller()).unwrap().doubled),
    ];
    for (name, map) in &keller {
        let n = map.n_in();
        // det(mu I - JH) = mu^N and det(lambda I - JF) = (lambda - 1)^N
        let mu_n: Vec<Poly<Rational>> =
            (0..=n).map(|k| if k == 0 { Poly::one(n) } else { Poly::zero(n) }).collect();
        let shifted: Vec<Poly<Rational>> = (0..=n)
            .map(|k| Poly::constant(n, q(if k % 2 == 0 { 1 } else { -1 } * binomial(n, k), 1)))
            .collect();
        let report = nilpotency_report(map).unwrap();
        ensure(report.nilpotent && report.charpoly_coeffs == mu_n, || format!("{name}: JH not nilpotent"))?;
        ensure(jacobian_charpoly(map).unwrap() == shifted, || format!("{name}: charpoly of JF"))?;
        ensure(spec_is_one(map).unwrap(), || format!("{name}: spec_is_one false"))?;
    }
    let cubic = constructions::non_nilpotent();
    ensure(!nilpotency_report(&cubic).unwrap().nilpotent, || "x - x^3 reported nilpotent".into())?;
    ensure(!spec_is_one(&cubic).unwrap(), || "x - x^3 reported unipotent".into())?;
    Ok("coefficient-exact on 2 maps, both checks false for (x - x^3, y)".into())
}

fn mountain_pass_convergence() -> Check {
    let s = 1.0 / 3f64.sqrt();
    let mut lines = Vec::new();
    for (name, p, value, point) in
        [("fold", fold_problem()?, 4.0 / 27.0, [s, 0.0]), ("cubic_fold3", cubic_fold3_problem()?, 4.0, [1.0, 0.0])]
    {
        let (w, elapsed) = run_mp(&p)?;
        let dv = (w.final_value - value).abs();
        let dx = w.final_point.iter().zip(&point).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        ensure(dv <= 1e-3 && dx <= 1e-2, || {
            format!("{name}: {:?} value {} at {:?}", w.classification, w.final_value, w.final_point)
        })?;
        ensure(elapsed < Duration::from_secs(30), || format!("{name}: took {elapsed:?}"))?;
        lines.push(format!("{name} value {:.6} ({:.2}s)", w.final_value, elapsed.as_secs_f64()));
    }
    Ok(lines.join(", "))
}

fn certificate_verdicts() -> Check {
    let sampler = SamplerConfig::default();
    let band = ConditionSpec::symmetric_band(Sign::Positive, 1.0).unwrap();
    let five = BoxDomain::cube(2, 5.0);
    let v = check_condition(&constructions::monotone_cubic(), &band, &five, &sampler).unwrap();
    ensure(v.status == VerdictStatus::SatisfiedOnSamples && v.margin >= 1.0, || format!("monotone_cubic: {v:?}"))?;
    let monotone_margin = v.margin;

    let v = check_condition(&constructions::keller_cubic(), &band, &five, &sampler).unwrap();
    let y = v.witness.as_ref().map(|w| w.point[1]);
    ensure(
        v.status == VerdictStatus::Violated && y.is_some_and(|y| 2.0 - 3.0 * y * y < 1.0),
        || format!("keller_cubic: {:?} witness y {y:?}", v.status),
    )?;

    let pinchuk = constructions::pinchuk();
    let fgr = ConditionSpec::fgr_band(0.1).unwrap();
    let v = check_condition(&pinchuk, &fgr, &five, &sampler).unwrap();
    let w = v.witness.as_ref().ok_or("pinchuk: no witness")?;
    let again = fgr.evaluate(&jacprobe::spectra::SpectralSample::at(
        &jacprobe::polymap::NumericMap::new(&pinchuk),
        &w.point,
    )
    .unwrap());
    ensure(v.status == VerdictStatus::Violated && !again.holds, || "pinchuk: witness does not reproduce".into())?;
    Ok(format!("monotone_cubic margin {:.3}, pinchuk violated at {:?}", monotone_margin, w.point))
}

fn collision_pipeline() -> Check {
    let fold = constructions::fold();
    let w = find_collision(&fold, &BoxDomain::cube(2, 2.0), 100, 42).unwrap().ok_or("fold: no witness")?;
    ensure(w.residual <= 1e-10, || format!("fold residual {:.2e}", w.residual))?;
    let exact = verify_collision(&fold, &w, 1e-10).unwrap();
    ensure(exact.passed, || format!("fold witness fails verification: {exact:?}"))?;

    let none = find_collision(&constructions::monotone_cubic(), &BoxDomain::cube(2, 5.0), 10_000, 42).unwrap();
    ensure(none.is_none(), || format!("monotone_cubic: {none:?}"))?;

    let corpus = load_corpus().unwrap();
    let frozen = corpus.iter().find(|e| e.name == "pinchuk_collision").ok_or("no frozen pinchuk witness")?;
    let check = verify_collision(&as_real(frozen), frozen.witness.as_ref().unwrap(), 1e-8).unwrap();
    ensure(check.passed, || format!("pinchuk: {check:?}"))?;
    Ok(format!("fold residual {:.1e}, pinchuk residual {:.1e}", w.residual, check.residual))
}

fn eigenvalue_bound() -> Check {
    let mut rng = trial_rng(2024, 800);
    let mut violations = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=6);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lambdas: Vec<f64> = (0..n).map(|_| sign * rng.gen_range(1e-3..5.0)).collect();
        let sum: f64 = lambdas.iter().map(|l| l.abs()).sum();
        let prod: f64 = lambdas.iter().map(|l| l.abs()).product();
        // strict premises with random slack
        let m1 = sum * (1.0 + rng.gen_range(1e-9..1.0));
        let m2 = prod * rng.gen_range(1e-3..1.0 - 1e-9);
        let bound = derived_eigenvalue_bound(m1, m2, n).unwrap();
        let min = lambdas.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        if min <= bound {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("10000 trials, no violations".into())
}

fn corpus_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name).display().to_string()
}

fn determinism() -> Check {
    let fold = corpus_file("fold.json");
    let keller = corpus_file("complex_keller.json");
    let dir = std::env::temp_dir().join(format!("jacprobe-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let witness = dir.join("witness.json");
    let first = jacprobe_cli::run(["jacprobe", "collide", "--map", &fold, "--box", "-2:2,-2:2", "--out", witness.to_str().unwrap()]);
    ensure(first.code == 0, || first.stderr.clone())?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["check", "--map", &fold, "--cond", "fgr", "--eps", "0.1", "--box", "-2:2,-2:2"],
        vec!["check", "--map", &fold, "--cond", "thm17", "--sign", "pos", "--m1", "9", "--m2", "3", "--box", "-1:1,-1:1"],
        vec!["realify", "--map", &keller],
        vec!["nilpotent", "--map", &keller],
        vec!["mountain-pass", "--map", &fold, "--a", "0,0", "--b", "1,0"],
        vec!["mountain-pass", "--map", &fold, "--witness", witness.to_str().unwrap()],
        vec!["collide", "--map", &fold, "--box", "-2:2,-2:2", "--budget", "50"],
        vec!["corpus"],
    ];
    let mut result = Ok(());
    for args in &commands {
        let argv = || std::iter::once("jacprobe").chain(args.iter().copied()).chain(["--seed", "7"]);
        let a = jacprobe_cli::run(argv());
        let b = jacprobe_cli::run(argv());
        let payload = |s: &str| serde_json::from_str::<serde_json::Value>(s).ok().map(|v| v["results"].to_string());
        let same = a.code == b.code && payload(&a.stdout).is_some() && payload(&a.stdout) == payload(&b.stdout);
        if !same {
            result = Err(format!("{} differs between runs: {}", args[0], a.stderr));
            break;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    result?;
    Ok(format!("{} invocations repeated byte-identically", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("gradient correctness", gradient_correctness),
        ("rayleigh machinery", rayleigh_machinery),
        ("determinant identity", determinant_identity),
        ("nilpotency and charpoly", nilpotency_equivalence),
        ("mountain-pass convergence", mountain_pass_convergence),
        ("certificate verdicts", certificate_verdicts),
        ("collision pipeline", collision_pipeline),
        ("eigenvalue bound", eigenvalue_bound),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("criterion {} {name}: FAIL (panicked)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
