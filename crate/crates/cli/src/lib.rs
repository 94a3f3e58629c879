//! Command-line front end: parses arguments, runs one analysis and renders a
//! JSON [`RunReport`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use jacprobe::collide::{find_collision, verify_collision, CollisionWitness};
use jacprobe::corpus::{load_corpus, load_corpus_dir};
use jacprobe::minimax::{MinimaxParams, MountainPassProblem, COLLISION_TOL};
use jacprobe::polymap::{parse_map, serialize_map, serialize_real, AnyMap, PolyMap, RealMap};
use jacprobe::realify::{
    nilpotency_report, random_complex_points, random_rational_points, realify, spec_is_one, verify_det_identity,
    verify_det_identity_exact,
};
use jacprobe::sampling::{BoxDomain, SamplerConfig};
use jacprobe::spectra::{check_condition, ConditionSpec, Sign, VerdictStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jacprobe", version, about = "Injectivity diagnostics for polynomial maps")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum Command {
    /// Check a spectral condition on sampled points of a box.
    Check(CheckArgs),
    /// Double a complex map into a real one and test the determinant identity.
    Realify(RealifyArgs),
    /// Nilpotency of JH and Spec(F) = {1} for F = X - H.
    Nilpotent(MapArgs),
    /// Numerical mountain pass between two points with the same image.
    MountainPass(MountainPassArgs),
    /// Multistart search for a collision F(a) = F(b).
    Collide(CollideArgs),
    /// List the built-in fixture corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CondArg {
    Fgr,
    Thm16,
    Liuxu,
    Thm17,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SignArg {
    Pos,
    Neg,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Pos => Sign::Positive,
            SignArg::Neg => Sign::Negative,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct MapArgs {
    #[arg(long)]
    map: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CheckArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum)]
    cond: CondArg,
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    /// Sampling box, e.g. -5:5,-5:5.
    #[arg(long = "box", allow_hyphen_values = true)]
    domain: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 17)]
    grid: usize,
    /// Uniform random points.
    #[arg(long, default_value_t = 4096)]
    random: usize,
}

#[derive(Debug, Args, Serialize)]
struct RealifyArgs {
    #[arg(long)]
    map: PathBuf,
    /// Random points for each determinant test.
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Debug, Args, Serialize)]
struct MountainPassArgs {
    #[arg(long)]
    map: PathBuf,
    /// First endpoint, comma separated.
    #[arg(long, allow_hyphen_values = true, requires = "b", conflicts_with = "witness")]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    b: Option<String>,
    /// Collision witness: a bare `{a, b, ...}` document or a `collide` report.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Residual tolerance for accepting the endpoints as a collision.
    #[arg(long, default_value_t = COLLISION_TOL)]
    tol: f64,
    /// Determinant floor for the isolation radius; defaults to |det JG(0)| / 2.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    n_rim: Option<usize>,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol_grad: f64,
}

#[derive(Debug, Args, Serialize)]
struct CollideArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    domain: String,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    /// Residual tolerance of the exact re-verification.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct CorpusArgs {
    /// Read the corpus from a directory instead of the built-in copy.
    #[arg(long)]
    dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Value,
    pub inputs: Vec<InputDigest>,
    pub results: Value,
    pub seed: u64,
    pub version: String,
}

/// Exit status plus whatever should go to stdout and stderr.
#[derive(Debug)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<jacprobe::Error> for Failure {
    fn from(e: jacprobe::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Context {
    seed: u64,
    inputs: Vec<InputDigest>,
}

impl Context {
    fn read(&mut self, path: &Path) -> Outcome<String> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).map_err(|_| Failure::Runtime(format!("{} is not UTF-8", path.display())))
    }

    fn map(&mut self, path: &Path) -> Outcome<AnyMap> {
        let text = self.read(path)?;
        parse_map(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
    }

    fn real_map(&mut self, path: &Path) -> Outcome<RealMap> {
        Ok(self.map(path)?.into_real()?)
    }
}

fn parse_point(s: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad coordinate {v:?} in {s:?}"))))
        .collect()
}

fn parse_box(s: &str) -> Outcome<BoxDomain> {
    s.parse().map_err(|e: jacprobe::Error| Failure::Usage(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Embeds a serialized map document as a JSON value.
fn map_value(text: &str) -> Value {
    serde_json::from_str(text).expect("serializer emits valid JSON")
}

fn condition(args: &CheckArgs) -> Outcome<ConditionSpec> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| Failure::Usage(format!("--cond requires --{flag}")));
    let sign = || args.sign.map(Sign::from).ok_or_else(|| Failure::Usage("--cond requires --sign".into()));
    let spec = match args.cond {
        CondArg::Fgr => ConditionSpec::fgr_band(need(args.eps, "eps")?),
        CondArg::Thm16 => ConditionSpec::symmetric_band(sign()?, need(args.eps, "eps")?),
        CondArg::Liuxu => ConditionSpec::square_region(need(args.eps, "eps")?),
        CondArg::Thm17 => ConditionSpec::trace_det_bounds(sign()?, need(args.m1, "m1")?, need(args.m2, "m2")?),
    };
    spec.map_err(|e| Failure::Usage(e.to_string()))
}

fn run_check(ctx: &mut Context, args: &CheckArgs) -> Outcome<(Value, i32)> {
    let cond = condition(args)?;
    let domain = parse_box(&args.domain)?;
    let map = ctx.real_map(&args.map)?;
    let sampler = SamplerConfig { grid: args.grid, random: args.random, seed: ctx.seed };
    let verdict = check_condition(&map, &cond, &domain, &sampler)?;
    let code = if verdict.status == VerdictStatus::Violated { EXIT_VIOLATED } else { EXIT_OK };
    Ok((to_value(&verdict), code))
}

fn run_realify(ctx: &mut Context, args: &RealifyArgs) -> Outcome<Value> {
    if args.points == 0 {
        return Err(Failure::Usage("--points must be positive".into()));
    }
    let map = ctx.map(&args.map)?.into_complex()?;
    let rm = realify(&map)?;
    let n = map.n_in();
    let float_pts: Vec<Vec<Complex64>> = random_complex_points(n, args.points, ctx.seed);
    let exact_pts = random_rational_points(n, args.points, ctx.seed);
    let float = verify_det_identity(&rm, &float_pts)?;
    let exact = verify_det_identity_exact(&rm, &exact_pts)?;
    Ok(json!({
        "realified": map_value(&serialize_real(&rm.doubled)),
        "det_identity": {
            "max_rel_error": float.max_rel_error,
            "passed": float.passed,
            "samples": float.samples,
        },
        "det_identity_exact": exact,
    }))
}

fn run_nilpotent(ctx: &mut Context, args: &MapArgs) -> Outcome<Value> {
    let (map, realified) = match ctx.map(&args.map)? {
        AnyMap::Real(m) => (m, false),
        AnyMap::Complex(m) => (realify(&m)?.doubled, true),
    };
    let report = nilpotency_report(&map)?;
    let spec_one = if report.is_keller_form { Some(spec_is_one(&map)?) } else { None };
    let n = map.n_in();
    let charpoly = PolyMap::new(n, report.charpoly_coeffs.clone())?;
    Ok(json!({
        "realified": realified,
        "n": n,
        "is_keller_form": report.is_keller_form,
        "cubic_homogeneous": report.cubic_homogeneous,
        "nilpotent": report.nilpotent,
        "nilpotency_index": report.nilpotency_index,
        "spec_is_one": spec_one,
        "charpoly_jh": map_value(&serialize_real(&charpoly))["components"],
    }))
}

fn run_mountain_pass(ctx: &mut Context, args: &MountainPassArgs) -> Outcome<Value> {
    let (a, b) = match (&args.a, &args.b, &args.witness) {
        (Some(a), Some(b), None) => (parse_point(a)?, parse_point(b)?),
        (None, None, Some(path)) => {
            let text = ctx.read(path)?;
            let bad = |e: String| Failure::Runtime(format!("{}: bad witness: {e}", path.display()));
            let doc: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            // either a bare witness or a `collide` report
            let doc = match doc.pointer("/results/witness") {
                Some(w) => w.clone(),
                None => doc,
            };
            let w: CollisionWitness = serde_json::from_value(doc).map_err(|e| bad(e.to_string()))?;
            (w.a, w.b)
        }
        _ => return Err(Failure::Usage("give either --a and --b or --witness".into())),
    };
    let map = ctx.real_map(&args.map)?;
    let mut problem = MountainPassProblem::build_with_tolerance(&map, &a, &b, args.tol)?;
    let n = problem.n();
    let delta = match args.delta {
        Some(d) => d,
        None => 0.5 * map.jacobian_at(problem.a())?.determinant().abs(),
    };
    let n_rim = args.n_rim.unwrap_or_else(|| 64usize.max(1 << n.min(20)));
    let sampler = SamplerConfig { grid: 0, random: 4096, seed: ctx.seed };
    let (r, alpha) = problem.establish_geometry(delta, &sampler, n_rim)?;
    let params = MinimaxParams {
        nodes: args.nodes,
        eta: args.eta,
        max_iter: args.max_iter,
        tol_grad: args.tol_grad,
        seed: ctx.seed,
        ..MinimaxParams::default()
    };
    let witness = problem.mountain_pass(&params)?;
    Ok(json!({
        "a": problem.a(),
        "b": problem.b(),
        "c": problem.c_vec(),
        "delta": delta,
        "r": r,
        "alpha": alpha,
        "classification": witness.classification,
        "i_value": witness.final_value,
        "critical_point": witness.final_point,
        "grad_norm": witness.final_grad_norm,
        "trace": witness,
    }))
}

fn run_collide(ctx: &mut Context, args: &CollideArgs) -> Outcome<Value> {
    let domain = parse_box(&args.domain)?;
    if args.budget == 0 {
        return Err(Failure::Usage("--budget must be positive".into()));
    }
    let map = ctx.real_map(&args.map)?;
    let witness = find_collision(&map, &domain, args.budget, ctx.seed)?;
    let check = witness.as_ref().map(|w| verify_collision(&map, w, args.tol)).transpose()?;
    Ok(json!({ "found": witness.is_some(), "witness": witness, "check": check }))
}

fn run_corpus(ctx: &mut Context, args: &CorpusArgs) -> Outcome<Value> {
    let entries = match &args.dir {
        Some(dir) => {
            let manifest = dir.join("manifest.json");
            ctx.read(&manifest)?;
            load_corpus_dir(dir)?
        }
        None => load_corpus()?,
    };
    let listed: Vec<Value> = entries
        .iter()
        .map(|e| {
            let digest = hex::encode(Sha256::digest(serialize_map(&e.map).as_bytes()));
            json!({
                "name": e.name,
                "map_file": e.map_file,
                "witness_file": e.witness_file,
                "field": e.map.field().name(),
                "tags": e.tags,
                "provenance": e.provenance,
                "map_sha256": digest,
                "witness": e.witness,
            })
        })
        .collect();
    Ok(json!({ "count": listed.len(), "entries": listed }))
}

fn dispatch(ctx: &mut Context, command: &Command) -> Outcome<(Value, i32)> {
    match command {
        Command::Check(a) => run_check(ctx, a),
        Command::Realify(a) => run_realify(ctx, a).map(|v| (v, EXIT_OK)),
        Command::Nilpotent(a) => run_nilpotent(ctx, a).map(|v| (v, EXIT_OK)),
        Command::MountainPass(a) => run_mountain_pass(ctx, a).map(|v| (v, EXIT_OK)),
        Command::Collide(a) => run_collide(ctx, a).map(|v| (v, EXIT_OK)),
        Command::Corpus(a) => run_corpus(ctx, a).map(|v| (v, EXIT_OK)),
    }
}

fn render(report: &RunReport, pretty: bool) -> String {
    let mut text = if pretty {
        serde_json::to_string_pretty(report).expect("report serializes")
    } else {
        serde_json::to_string(report).expect("report serializes")
    };
    text.push('\n');
    text
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> RunOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                RunOutcome { code, stdout: text, stderr: String::new() }
            } else {
                RunOutcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut ctx = Context { seed: cli.seed, inputs: Vec::new() };
    let (results, code) = match dispatch(&mut ctx, &cli.command) {
        Ok(done) => done,
        Err(Failure::Usage(msg)) => {
            return RunOutcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") }
        }
        Err(Failure::Runtime(msg)) => {
            return RunOutcome { code: EXIT_RUNTIME, stdout: String::new(), stderr: format!("error: {msg}\n") }
        }
    };
    let report = RunReport {
        command: to_value(&cli.command),
        inputs: ctx.inputs,
        results,
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let text = render(&report, cli.pretty);
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => RunOutcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => RunOutcome {
                code: EXIT_RUNTIME,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => RunOutcome { code, stdout: text, stderr: String::new() },
    }
}

/// Caps the global rayon pool at `JACPROBE_THREADS` workers when set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("JACPROBE_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("JACPROBE_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("JACPROBE_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
