//! Numerical mountain pass for `I(X) = G(X)^T G(X)`, where
//! `G(X) = F(X + a) - F(b)` is built from a collision pair `F(a) = F(b)`.
//!
//! `G` vanishes at `0` and at `c = b - a`. When `JG(0)` is nonsingular the
//! origin is an isolated zero, so `I` is bounded below by a positive `alpha`
//! on a small sphere around it, and the mountain-pass value
//! `inf over paths sup_t I(path(t))` is at least `alpha`. Since
//! `I'(X) = 2 G(X)^T JG(X)`, a critical point at a positive level can only sit
//! where `JG` is singular; otherwise minimizing paths must escape to infinity
//! along a Palais-Smale sequence. The monitors in [`MonitorRecord`] track the
//! Rayleigh quotient of `JG + JG^T` along `G`, which is squeezed to zero on
//! such sequences.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::polymap::{rational_point, NumericMap, RealMap};
use crate::sampling::{trial_rng, SamplerConfig};
use crate::spectra::{rayleigh_bounds, symmetrize, Sign};

/// Default residual tolerance for accepting `(a, b)` as a collision pair.
pub const COLLISION_TOL: f64 = 1e-10;
/// Endpoint residual required after polishing.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Tolerance of the Rayleigh sandwich and the gradient bound on `G^T JG G`.
pub const MONITOR_TOL: f64 = 1e-9;

const RADIUS_LEVELS: usize = 30;
const RIM_SEED: u64 = 42;
const RIM_REFINE_STEPS: usize = 10;
/// Step halvings before a descent move is abandoned.
const BACKTRACK_LIMIT: usize = 60;

#[derive(Debug, Clone)]
pub struct MountainPassProblem {
    g: RealMap,
    func: Functional,
    a: Vec<f64>,
    b: Vec<f64>,
    c_vec: Vec<f64>,
    r: Option<f64>,
    alpha: Option<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Newton iteration on `F(y) = target` starting at `y0`.
fn polish_preimage(f: &NumericMap, target: &DVector<f64>, y0: &[f64]) -> Vec<f64> {
    let mut y = y0.to_vec();
    let mut res = (f.eval(&y) - target).norm();
    for _ in 0..60 {
        if res <= 1e-15 * (1.0 + target.norm()) {
            break;
        }
        let (v, j) = f.eval_with_jacobian(&y);
        let Some(step) = j.lu().solve(&(target - v)) else { break };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let r = (f.eval(&trial) - target).norm();
            if r < res {
                y = trial;
                res = r;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    y
}

/// `I(X) = |G(X)|^2` for `G(X) = F(X + a) - target`.
///
/// `G` is evaluated through `F` at the shifted point rather than through the
/// expanded translate, so rounding stays at the level of `F`.
#[derive(Debug, Clone)]
pub struct Functional {
    numeric: NumericMap,
    shift: Vec<f64>,
    target: DVector<f64>,
}

impl Functional {
    pub fn new(f: &RealMap, a: &[f64], target: &[f64]) -> Result<Self> {
        let n = f.require_square()?;
        check_len(n, a.len())?;
        check_len(n, target.len())?;
        Ok(Functional {
            numeric: NumericMap::with_hessians(f),
            shift: a.to_vec(),
            target: DVector::from_column_slice(target),
        })
    }

    pub fn n(&self) -> usize {
        self.shift.len()
    }

    /// `I(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.n(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    /// `I'(x) = 2 JG(x)^T G(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        Ok(self.value_and_gradient(x).1.iter().copied().collect())
    }

    /// `G(x)` and `JG(x)`.
    pub fn residual(&self, x: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        check_len(self.n(), x.len())?;
        let (g, j) = self.eval_g_with_jacobian(x);
        Ok((g.iter().copied().collect(), j))
    }

    /// `I''(x) = 2 (JG^T JG + sum_i G_i Hess G_i)`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.n(), x.len())?;
        let (g, j) = self.eval_g_with_jacobian(x);
        let y = self.shifted(x);
        let mut h = j.transpose() * &j;
        for i in 0..self.n() {
            let hi = self.numeric.component_hessian(i, &y).expect("compiled with Hessians");
            h += hi * g[i];
        }
        Ok(h * 2.0)
    }

    fn shifted(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(v, a)| v + a).collect()
    }

    fn eval_g(&self, x: &[f64]) -> DVector<f64> {
        self.numeric.eval(&self.shifted(x)) - &self.target
    }

    fn eval_g_with_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (v, j) = self.numeric.eval_with_jacobian(&self.shifted(x));
        (v - &self.target, j)
    }

    fn component_gradient(&self, i: usize, x: &[f64]) -> DVector<f64> {
        self.numeric.component_gradient(i, &self.shifted(x))
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.eval_g(x).norm_squared()
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, DVector<f64>) {
        let (g, j) = self.eval_g_with_jacobian(x);
        (g.norm_squared(), 2.0 * j.transpose() * g)
    }
}

impl MountainPassProblem {
    /// Builds `G` and `c = b - a` from an exact collision pair
    /// (`|F(a) - F(b)| <= 1e-10`).
    pub fn build(f: &RealMap, a: &[f64], b: &[f64]) -> Result<Self> {
        Self::build_with_tolerance(f, a, b, COLLISION_TOL)
    }

    /// Like [`Self::build`] with a relaxed collision tolerance; `b` is then
    /// Newton-polished so that `F(b) = F(a)` to working precision.
    pub fn build_with_tolerance(f: &RealMap, a: &[f64], b: &[f64], tol: f64) -> Result<Self> {
        let n = f.require_square()?;
        check_len(n, a.len())?;
        check_len(n, b.len())?;
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite endpoint".into()));
        }
        if dist(a, b) == 0.0 {
            return Err(Error::SameEndpoints);
        }
        let fnum = NumericMap::new(f);
        let fa = fnum.eval(a);
        let residual = (&fa - fnum.eval(b)).norm();
        if !(residual <= tol) {
            return Err(Error::NotACollision { residual });
        }
        let exact_a = rational_point(a)?;
        let exact_hit = f.evaluate_exact(&exact_a)? == f.evaluate_exact(&rational_point(b)?)?;
        let b = if exact_hit { b.to_vec() } else { polish_preimage(&fnum, &fa, b) };
        if dist(a, &b) <= 1e-8 * (1.0 + norm(a)) {
            return Err(Error::NotACollision { residual });
        }
        let g = f.translate(&exact_a, &rational_point(&b)?)?;
        let c_vec: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        // F(a) rather than F(b) as the target keeps G(0) = 0 exactly in floating point
        let func = Functional::new(f, a, fa.as_slice())?;
        let gc = func.eval_g(&c_vec).norm();
        let scale = fnum.eval_magnitude(&b).max(1.0);
        if gc > ENDPOINT_TOL * scale {
            return Err(Error::NotACollision { residual: gc });
        }
        Ok(MountainPassProblem { g, func, a: a.to_vec(), b, c_vec, r: None, alpha: None })
    }

    pub fn n(&self) -> usize {
        self.c_vec.len()
    }

    pub fn g(&self) -> &RealMap {
        &self.g
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Second endpoint after polishing.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c_vec(&self) -> &[f64] {
        &self.c_vec
    }

    pub fn radius(&self) -> Option<f64> {
        self.r
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// The functional `I` of this problem.
    pub fn functional_map(&self) -> &Functional {
        &self.func
    }

    /// `I(x) = |G(x)|^2`.
    pub fn functional(&self, x: &[f64]) -> Result<f64> {
        self.func.value(x)
    }

    /// `I'(x) = 2 JG(x)^T G(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.func.gradient(x)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.func.hessian(x)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.func.value_unchecked(x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, DVector<f64>) {
        self.func.value_and_gradient(x)
    }

    /// Largest radius `r` on the halving schedule `|c|/2, |c|/4, ...` such
    /// that every sampled tuple `(X_1, ..., X_n)` in `B_r(0)^n` gives a matrix
    /// with rows `grad G_i(X_i)` of determinant at least `delta` in modulus.
    /// Stores and returns `r`.
    pub fn isolation_radius(&mut self, delta: f64, sampler: &SamplerConfig) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        let n = self.n();
        let det0 = self.func.eval_g_with_jacobian(&vec![0.0; n]).1.determinant();
        if !(det0.abs() > 1e-9) {
            return Err(Error::SingularJacobian { det: det0 });
        }
        let tuples = sampler.random.max(1);
        let mut r = norm(&self.c_vec) / 2.0;
        for level in 0..RADIUS_LEVELS {
            let mut rng = trial_rng(sampler.seed, level as u64);
            let mut ok = det0.abs() >= delta;
            for _ in 0..tuples {
                if !ok {
                    break;
                }
                let mut gamma = DMatrix::zeros(n, n);
                for i in 0..n {
                    let x = uniform_in_ball(&mut rng, n, r);
                    gamma.set_row(i, &self.func.component_gradient(i, &x).transpose());
                }
                ok = gamma.determinant().abs() >= delta;
            }
            if ok {
                self.r = Some(r);
                return Ok(r);
            }
            r *= 0.5;
        }
        Err(Error::ScheduleExhausted { delta })
    }

    /// Minimum of `I` over the sphere of radius `r / sqrt(n)`, from
    /// `n_rim` quasi-uniform points refined by projected descent. Stores and
    /// returns `alpha`.
    pub fn rim_infimum(&mut self, r: f64, n_rim: usize) -> Result<f64> {
        let alpha = self.rim_infimum_at(r, n_rim)?;
        self.r = Some(r);
        self.alpha = Some(alpha);
        Ok(alpha)
    }

    fn rim_infimum_at(&self, r: f64, n_rim: usize) -> Result<f64> {
        let n = self.n();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rim radius must be positive, got {r}")));
        }
        let min_points = 1usize.checked_shl(n as u32).unwrap_or(usize::MAX);
        if n_rim < min_points {
            return Err(Error::InvalidArgument(format!("n_rim = {n_rim} is below 2^n = {min_points}")));
        }
        let rho = r / (n as f64).sqrt();
        let points = sphere_points(n, rho, n_rim);
        let (mut best, mut best_val) = points
            .into_iter()
            .map(|p| {
                let v = self.value(&p);
                (p, v)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n_rim >= 1");

        for _ in 0..RIM_REFINE_STEPS {
            let (_, grad) = self.value_and_gradient(&best);
            let x = DVector::from_column_slice(&best);
            let radial = &x / rho;
            let tangential = &grad - &radial * radial.dot(&grad);
            let tn = tangential.norm();
            if tn == 0.0 {
                break;
            }
            let mut t = 0.1 * rho / tn;
            let mut moved = false;
            for _ in 0..20 {
                let trial = &x - &tangential * t;
                let trial = trial.scale(rho / trial.norm());
                let trial: Vec<f64> = trial.iter().copied().collect();
                let v = self.value(&trial);
                if v < best_val {
                    best = trial;
                    best_val = v;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if !(best_val > 1e-12) {
            return Err(Error::DegenerateRim { alpha: best_val });
        }
        Ok(best_val)
    }

    /// Sets `r` via [`Self::isolation_radius`] and `alpha` via
    /// [`Self::rim_infimum`].
    pub fn establish_geometry(&mut self, delta: f64, sampler: &SamplerConfig, n_rim: usize) -> Result<(f64, f64)> {
        let r = self.isolation_radius(delta, sampler)?;
        let alpha = self.rim_infimum(r, n_rim)?;
        Ok((r, alpha))
    }

    /// Rayleigh quantities of `S = JG + JG^T` along `G(x)`.
    pub fn rayleigh_monitor(&self, x: &[f64]) -> Result<MonitorRecord> {
        check_len(self.n(), x.len())?;
        let (g, j) = self.func.eval_g_with_jacobian(x);
        let i_value = g.norm_squared();
        if i_value == 0.0 {
            return Err(Error::ZeroResidual);
        }
        let grad = 2.0 * j.transpose() * &g;
        let (mu1, mu2) = rayleigh_bounds(&symmetrize(&j)?)?;
        let quad = 2.0 * (g.transpose() * &j * &g)[(0, 0)];
        Ok(MonitorRecord {
            mu1,
            mu2,
            rayleigh_mid: quad / i_value,
            quad_form: quad,
            i_value,
            grad_norm: grad.norm(),
        })
    }

    /// Runs the path minimax. Requires [`Self::rim_infimum`] to have set a
    /// positive `alpha`.
    pub fn mountain_pass(&self, params: &MinimaxParams) -> Result<PSWitness> {
        params.validate()?;
        match self.alpha {
            Some(alpha) if alpha > 0.0 => {}
            _ => return Err(Error::InvalidArgument("mountain-pass geometry not established (alpha unset)".into())),
        }
        PathSolver::new(self, params).run()
    }
}

fn uniform_in_ball<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let len = norm(&dir).max(f64::MIN_POSITIVE);
    let radius = r * rng.gen::<f64>().powf(1.0 / n as f64);
    dir.into_iter().map(|d| d * radius / len).collect()
}

/// Equally spaced angles in the plane; axis points plus seeded uniform
/// directions in higher dimension.
fn sphere_points(n: usize, rho: f64, count: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![rho], vec![-rho]];
    }
    if n == 2 {
        return (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                vec![rho * t.cos(), rho * t.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s * rho;
            out.push(e);
        }
    }
    let mut rng = trial_rng(RIM_SEED, 0);
    while out.len() < count {
        let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&d);
        if len > 0.0 {
            out.push(d.into_iter().map(|v| v * rho / len).collect());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    /// Smallest eigenvalue of `JG + JG^T`.
    pub mu1: f64,
    /// Largest eigenvalue of `JG + JG^T`.
    pub mu2: f64,
    /// `2 G^T JG G / G^T G`.
    pub rayleigh_mid: f64,
    /// `2 G^T JG G`.
    pub quad_form: f64,
    pub i_value: f64,
    pub grad_norm: f64,
}

impl MonitorRecord {
    /// `mu1 <= rayleigh_mid <= mu2` within [`MONITOR_TOL`] (relative to the
    /// spectral scale when it exceeds one).
    pub fn sandwich_holds(&self) -> bool {
        let tol = MONITOR_TOL * self.mu1.abs().max(self.mu2.abs()).max(1.0);
        self.mu1 - tol <= self.rayleigh_mid && self.rayleigh_mid <= self.mu2 + tol
    }

    /// `|2 G^T JG G| <= |I'| sqrt(I)` within [`MONITOR_TOL`].
    pub fn gradient_bound_holds(&self) -> bool {
        let bound = self.grad_norm * self.i_value.sqrt();
        self.quad_form.abs() <= bound + MONITOR_TOL * bound.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxParams {
    /// Number of path nodes including both endpoints.
    pub nodes: usize,
    /// Initial step of the damped descent.
    pub eta: f64,
    /// Arc-length redistribution period, in iterations.
    pub k_redist: usize,
    pub tol_grad: f64,
    /// Relative stabilization tolerance on the path maximum.
    pub tol_c: f64,
    /// Divergence radius; `None` means `1e3 * |c|`.
    pub r_div: Option<f64>,
    pub max_iter: usize,
    /// Iterations over which the path maximum must be stable.
    pub window: usize,
    pub seed: u64,
}

impl Default for MinimaxParams {
    fn default() -> Self {
        MinimaxParams {
            nodes: 64,
            eta: 0.1,
            k_redist: 25,
            tol_grad: 1e-8,
            tol_c: 1e-9,
            r_div: None,
            max_iter: 200_000,
            window: 50,
            seed: 42,
        }
    }
}

impl MinimaxParams {
    fn validate(&self) -> Result<()> {
        if self.nodes < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 path nodes, got {}", self.nodes)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.tol_grad > 0.0 && self.tol_c > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.k_redist == 0 || self.window == 0 {
            return Err(Error::InvalidArgument("k_redist and window must be positive".into()));
        }
        if let Some(r) = self.r_div {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument(format!("r_div must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Highest-node descent on the discretized path.
    Path,
    /// Climbing and Newton refinement from the path maximum.
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub point: Vec<f64>,
    pub i_value: f64,
    pub grad_norm: f64,
    pub point_norm: f64,
    /// Absent where `G` vanishes.
    pub monitor: Option<MonitorRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    ConvergedCritical,
    PsDivergence,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSWitness {
    pub iterates: Vec<IterateRecord>,
    pub classification: Classification,
    pub final_point: Vec<f64>,
    pub final_value: f64,
    pub final_grad_norm: f64,
    /// Maximum of `I` over the final path nodes.
    pub path_max: f64,
    /// Final path, endpoints included.
    pub path: Vec<Vec<f64>>,
    pub iterations: usize,
    pub r_div: f64,
}

impl PSWitness {
    /// True when the record shows the impossible combination behind the
    /// injectivity argument: a divergent Palais-Smale sequence whose
    /// Rayleigh quotient leaves the band while the symmetric spectrum stays in
    /// it.
    pub fn contradiction(&self, epsilon: f64, sign: Sign) -> bool {
        if self.classification != Classification::PsDivergence {
            return false;
        }
        let Some(m) = self.iterates.last().and_then(|it| it.monitor) else {
            return false;
        };
        match sign {
            Sign::Positive => m.mu1 >= epsilon && m.rayleigh_mid < epsilon,
            Sign::Negative => m.mu2 <= -epsilon && m.rayleigh_mid > -epsilon,
        }
    }

    /// Values of the phase-one path maximum, in iteration order.
    pub fn path_max_history(&self) -> Vec<f64> {
        self.iterates.iter().filter(|r| r.phase == Phase::Path).map(|r| r.i_value).collect()
    }
}

struct PathSolver<'a> {
    p: &'a MountainPassProblem,
    params: &'a MinimaxParams,
    nodes: Vec<Vec<f64>>,
    values: Vec<f64>,
    iterates: Vec<IterateRecord>,
    r_div: f64,
}

impl<'a> PathSolver<'a> {
    fn new(p: &'a MountainPassProblem, params: &'a MinimaxParams) -> Self {
        let count = params.nodes;
        let n = p.n();
        let mut nodes: Vec<Vec<f64>> = (0..count)
            .map(|k| {
                let t = k as f64 / (count - 1) as f64;
                p.c_vec.iter().map(|c| c * t).collect()
            })
            .collect();
        nodes[0] = vec![0.0; n];
        nodes[count - 1] = p.c_vec.clone();
        let values = nodes.iter().map(|x| p.value(x)).collect();
        let r_div = params.r_div.unwrap_or(1e3 * norm(&p.c_vec));
        PathSolver { p, params, nodes, values, iterates: Vec::new(), r_div }
    }

    /// Highest interior node, lowest index on ties.
    fn max_node(&self) -> usize {
        let mut best = 1;
        for k in 2..self.nodes.len() - 1 {
            if self.values[k] > self.values[best] {
                best = k;
            }
        }
        best
    }

    fn path_max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn record(&mut self, iteration: usize, phase: Phase, x: &[f64]) -> (f64, f64) {
        let (i_value, grad) = self.p.value_and_gradient(x);
        let grad_norm = grad.norm();
        let monitor = self.p.rayleigh_monitor(x).ok();
        self.iterates.push(IterateRecord {
            iteration,
            phase,
            point: x.to_vec(),
            i_value,
            grad_norm,
            point_norm: norm(x),
            monitor,
        });
        (i_value, grad_norm)
    }

    fn tangent(&self, m: usize) -> DVector<f64> {
        let t: Vec<f64> = self.nodes[m + 1].iter().zip(&self.nodes[m - 1]).map(|(a, b)| a - b).collect();
        let t = DVector::from_vec(t);
        let len = t.norm();
        if len > 0.0 {
            t / len
        } else {
            t
        }
    }

    /// One damped step of the component of `-I'` normal to the path at node
    /// `m`; backtracking halves the step until `I` decreases.
    fn descend(&mut self, m: usize) {
        let (_, grad) = self.p.value_and_gradient(&self.nodes[m]);
        let tau = self.tangent(m);
        let d = &grad - &tau * tau.dot(&grad);
        if d.norm() == 0.0 {
            return;
        }
        let x = DVector::from_column_slice(&self.nodes[m]);
        let mut step = self.params.eta;
        for _ in 0..BACKTRACK_LIMIT {
            let trial: Vec<f64> = (&x - &d * step).iter().copied().collect();
            let v = self.p.value(&trial);
            if v < self.values[m] {
                self.nodes[m] = trial;
                self.values[m] = v;
                return;
            }
            step *= 0.5;
        }
    }

    /// Re-spaces interior nodes uniformly in arc length. Kept only when the
    /// highest node does not rise.
    fn redistribute(&mut self) {
        let count = self.nodes.len();
        let mut cum = vec![0.0; count];
        for k in 1..count {
            cum[k] = cum[k - 1] + dist(&self.nodes[k], &self.nodes[k - 1]);
        }
        let total = cum[count - 1];
        if !(total > 0.0) {
            return;
        }
        let mut fresh = self.nodes.clone();
        let mut seg = 0;
        for (k, node) in fresh.iter_mut().enumerate().take(count - 1).skip(1) {
            let s = total * k as f64 / (count - 1) as f64;
            while seg + 1 < count - 1 && cum[seg + 1] < s {
                seg += 1;
            }
            let span = cum[seg + 1] - cum[seg];
            let t = if span > 0.0 { (s - cum[seg]) / span } else { 0.0 };
            *node = self.nodes[seg].iter().zip(&self.nodes[seg + 1]).map(|(a, b)| a + t * (b - a)).collect();
        }
        let fresh_values: Vec<f64> = fresh.iter().map(|x| self.p.value(x)).collect();
        let fresh_max = fresh_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if fresh_max <= self.path_max() {
            self.nodes = fresh;
            self.values = fresh_values;
        }
    }

    fn stabilized(&self, history: &[f64]) -> bool {
        let w = self.params.window;
        if history.len() <= w {
            return false;
        }
        let now = history[history.len() - 1];
        let then = history[history.len() - 1 - w];
        (then - now).abs() <= self.params.tol_c * now.abs().max(f64::MIN_POSITIVE)
    }

    fn run(mut self) -> Result<PSWitness> {
        let mut history = Vec::new();
        let mut iteration = 0;
        while iteration < self.params.max_iter {
            let m = self.max_node();
            let x = self.nodes[m].clone();
            let (value, grad_norm) = self.record(iteration, Phase::Path, &x);
            history.push(value);
            iteration += 1;
            if self.stabilized(&history) {
                if norm(&x) > self.r_div && grad_norm <= self.params.tol_grad {
                    return Ok(self.finish(Classification::PsDivergence, x, iteration));
                }
                return self.refine(m, iteration);
            }
            self.descend(m);
            if iteration % self.params.k_redist == 0 {
                self.redistribute();
            }
        }
        let m = self.max_node();
        let x = self.nodes[m].clone();
        Ok(self.finish(Classification::BudgetExhausted, x, iteration))
    }

    /// Maximizes `I` along the two path segments adjacent to node `m`.
    fn segment_max(&self, m: usize) -> Vec<f64> {
        let mut best = self.nodes[m].clone();
        let mut best_val = self.values[m];
        for (p, q) in [(m - 1, m), (m, m + 1)] {
            let (p, q) = (&self.nodes[p], &self.nodes[q]);
            let at = |s: f64| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a + s * (b - a)).collect() };
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let s1 = hi - ratio * (hi - lo);
                let s2 = lo + ratio * (hi - lo);
                if self.p.value(&at(s1)) >= self.p.value(&at(s2)) {
                    hi = s2;
                } else {
                    lo = s1;
                }
            }
            let x = at(0.5 * (lo + hi));
            let v = self.p.value(&x);
            if v > best_val {
                best = x;
                best_val = v;
            }
        }
        best
    }

    /// Climbing iteration (ascend along the path tangent, descend across it)
    /// followed by Newton steps on `I' = 0`, accepting only steps that
    /// shrink `|I'|`.
    fn refine(mut self, m: usize, mut iteration: usize) -> Result<PSWitness> {
        let tau = self.tangent(m);
        let start = DVector::from_vec(self.segment_max(m));
        // refinement is local: stay within a few node spacings of the start
        let trust = 2.0 * dist(&self.nodes[m - 1], &self.nodes[m]).max(dist(&self.nodes[m], &self.nodes[m + 1]));
        let inside = |y: &DVector<f64>| (y - &start).norm() <= trust;
        let mut x = start.clone();
        let grad_at = |x: &DVector<f64>| self.p.value_and_gradient(x.as_slice()).1;
        let mut g = grad_at(&x);
        let mut step = self.params.eta;
        let climb_budget = self.params.max_iter.saturating_sub(iteration).min(20_000);
        for _ in 0..climb_budget {
            if g.norm() <= self.params.tol_grad.sqrt() {
                break;
            }
            let dir = &g - &tau * (2.0 * tau.dot(&g));
            let mut moved = false;
            while step > 1e-14 {
                let trial = &x - &dir * step;
                let gt = grad_at(&trial);
                if inside(&trial) && gt.norm() < g.norm() {
                    x = trial;
                    g = gt;
                    moved = true;
                    step = (step * 1.5).min(self.params.eta);
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
            let xs: Vec<f64> = x.iter().copied().collect();
            self.record(iteration, Phase::Refine, &xs);
            iteration += 1;
        }

        for _ in 0..100 {
            if g.norm() <= self.params.tol_grad * 1e-2 {
                break;
            }
            let h = self.p.hessian(x.as_slice())?;
            let Some(delta) = h.lu().solve(&(-&g)) else { break };
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let trial = &x + &delta * t;
                let gt = grad_at(&trial);
                if inside(&trial) && gt.norm() < g.norm() {
                    x = trial;
                    g = gt;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
            let xs: Vec<f64> = x.iter().copied().collect();
            self.record(iteration, Phase::Refine, &xs);
            iteration += 1;
        }

        let xs: Vec<f64> = x.iter().copied().collect();
        let value = self.p.value(&xs);
        let grad_norm = g.norm();
        let classification = if grad_norm > self.params.tol_grad {
            Classification::BudgetExhausted
        } else if norm(&xs) > self.r_div {
            Classification::PsDivergence
        } else {
            // the refined point must be the highest point of the path it sits on
            let others = self
                .values
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != m)
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            if value >= others * (1.0 - self.params.tol_c) {
                self.nodes[m] = xs.clone();
                self.values[m] = value;
                Classification::ConvergedCritical
            } else {
                Classification::BudgetExhausted
            }
        };
        Ok(self.finish(classification, xs, iteration))
    }

    fn finish(mut self, classification: Classification, x: Vec<f64>, iterations: usize) -> PSWitness {
        let (final_value, grad) = self.p.value_and_gradient(&x);
        if self.iterates.last().is_none_or(|r| r.point != x) {
            self.record(iterations, Phase::Refine, &x);
        }
        PSWitness {
            classification,
            final_point: x,
            final_value,
            final_grad_norm: grad.norm(),
            path_max: self.path_max(),
            path: self.nodes,
            iterations,
            r_div: self.r_div,
            iterates: self.iterates,
        }
    }
}
