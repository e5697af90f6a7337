//! LASSO sparse recovery: analog locally-competitive dynamics, a spiking LCA
//! with positive/negative unit pairs, an accelerated proximal-gradient (FISTA)
//! reference, exhaustive support enumeration for tiny instances, and KKT
//! optimality diagnostics.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SpikeRaster;
use crate::seed;
use crate::snn::SimTrace;

/// min ½‖Φa − s‖² + λ‖a‖₁ with unit-norm dictionary columns. Construction
/// normalizes the columns and records the scaling factors so solutions can be
/// mapped back to the original dictionary.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    phi: Array2<f64>,
    s: Array1<f64>,
    lambda: f64,
    scales: Vec<f64>,
}

impl LassoProblem {
    pub fn new(dictionary: Array2<f64>, target: Array1<f64>, lambda: f64) -> Result<Self> {
        if dictionary.nrows() == 0 || dictionary.ncols() == 0 {
            return Err(Error::Shape("dictionary must be non-empty".into()));
        }
        if target.len() != dictionary.nrows() {
            return Err(Error::Shape(format!(
                "target length {} vs {} dictionary rows",
                target.len(),
                dictionary.nrows()
            )));
        }
        if !dictionary.iter().all(|x| x.is_finite()) || !target.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("lasso problem"));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Range(format!("lambda {lambda} must be ≥ 0")));
        }
        let mut phi = dictionary;
        let mut scales = Vec::with_capacity(phi.ncols());
        for mut col in phi.columns_mut() {
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::Config(format!(
                    "dictionary column {} is (numerically) zero",
                    scales.len()
                )));
            }
            col.mapv_inplace(|x| x / norm);
            scales.push(norm);
        }
        Ok(Self { phi, s: target, lambda, scales })
    }

    /// (rows M, columns N).
    pub fn dims(&self) -> (usize, usize) {
        (self.phi.nrows(), self.phi.ncols())
    }

    /// Column-normalized dictionary.
    pub fn phi(&self) -> ArrayView2<'_, f64> {
        self.phi.view()
    }

    pub fn target(&self) -> ArrayView1<'_, f64> {
        self.s.view()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Original column norms recorded at construction.
    pub fn column_scales(&self) -> &[f64] {
        &self.scales
    }

    /// Same dictionary and target under a different sparsity weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Range(format!("lambda {lambda} must be ≥ 0")));
        }
        Ok(Self { lambda, ..self.clone() })
    }

    /// Map a solution of the normalized problem back onto the original
    /// (unnormalized) dictionary columns: x_i = a_i / scale_i reproduces the
    /// same fit Φ_orig·x = Φ_norm·a.
    pub fn rescale_solution(&self, a: ArrayView1<'_, f64>) -> Array1<f64> {
        Array1::from_iter(a.iter().zip(&self.scales).map(|(&ai, &sc)| ai / sc))
    }

    pub fn to_json(&self) -> String {
        let doc = ProblemDoc {
            rows: self.phi.nrows(),
            cols: self.phi.ncols(),
            lambda: self.lambda,
            phi: self.phi.iter().copied().collect(),
            target: self.s.to_vec(),
            scales: self.scales.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("problem serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("problem JSON: {e}")))?;
        let phi = Array2::from_shape_vec((doc.rows, doc.cols), doc.phi)
            .map_err(|e| Error::Format(format!("dictionary array: {e}")))?;
        if doc.target.len() != doc.rows || doc.scales.len() != doc.cols {
            return Err(Error::Shape("problem JSON: inconsistent dimensions".into()));
        }
        if !phi.iter().all(|x| x.is_finite()) || !doc.lambda.is_finite() || doc.lambda < 0.0 {
            return Err(Error::Format("problem JSON: invalid values".into()));
        }
        Ok(Self { phi, s: Array1::from_vec(doc.target), lambda: doc.lambda, scales: doc.scales })
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    rows: usize,
    cols: usize,
    lambda: f64,
    phi: Vec<f64>,
    target: Vec<f64>,
    scales: Vec<f64>,
}

/// sign(u)·max(|u|−λ, 0); the closed threshold maps |u| = λ to exactly 0.
pub fn soft_threshold(u: f64, lambda: f64) -> f64 {
    if u > lambda {
        u - lambda
    } else if u < -lambda {
        u + lambda
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(u: ArrayView1<'_, f64>, lambda: f64) -> Array1<f64> {
    u.mapv(|x| soft_threshold(x, lambda))
}

/// ½‖Φa − s‖² + λ‖a‖₁.
pub fn objective(problem: &LassoProblem, a: ArrayView1<'_, f64>) -> f64 {
    let r = problem.phi.dot(&a) - &problem.s;
    0.5 * r.dot(&r) + problem.lambda * a.iter().map(|x| x.abs()).sum::<f64>()
}

/// Worst violation of the LASSO optimality conditions at `a`:
/// |g_i + λ·sign(a_i)| on the support, max(|g_i| − λ, 0) off it,
/// with g = Φᵀ(Φa − s).
pub fn kkt_residual(problem: &LassoProblem, a: ArrayView1<'_, f64>) -> f64 {
    let r = problem.phi.dot(&a) - &problem.s;
    let g = problem.phi.t().dot(&r);
    let mut worst = 0.0f64;
    for (&ai, &gi) in a.iter().zip(g.iter()) {
        let v = if ai != 0.0 {
            (gi + problem.lambda * ai.signum()).abs()
        } else {
            (gi.abs() - problem.lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// One row of a solver log.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverLogRow {
    pub iteration: usize,
    pub objective: f64,
    pub kkt: f64,
}

/// Render a solver log as CSV.
pub fn log_to_csv(rows: &[SolverLogRow]) -> String {
    let mut out = String::from("iteration,objective,kkt\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.iteration, r.objective, r.kkt));
    }
    out
}

/// Analog LCA parameters: u ← u + (dt/τ)(Φᵀs − u − (ΦᵀΦ−I)a).
#[derive(Debug, Clone, Copy)]
pub struct LcaConfig {
    pub tau: f64,
    pub dt: f64,
    pub max_steps: usize,
    /// Stop when both ‖Δa‖∞ and ‖Δu‖∞ fall below this; the membrane check
    /// guarantees kkt ≤ (τ/dt)·tol at the returned point.
    pub tol: f64,
}

impl Default for LcaConfig {
    fn default() -> Self {
        Self { tau: 1.0, dt: 0.1, max_steps: 2_000_000, tol: 1e-6 }
    }
}

impl LcaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Range(format!("tau {} must be > 0", self.tau)));
        }
        if !(self.dt > 0.0 && self.dt <= self.tau) {
            return Err(Error::Range(format!("dt {} outside (0, tau]", self.dt)));
        }
        if self.max_steps == 0 || !(self.tol > 0.0) {
            return Err(Error::Range("max_steps ≥ 1 and tol > 0 required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LcaSolution {
    pub a: Array1<f64>,
    pub iterations: usize,
    pub kkt: f64,
    pub converged: bool,
}

/// Integrate the analog LCA dynamics to a fixed point.
pub fn solve_lca(problem: &LassoProblem, cfg: &LcaConfig) -> Result<LcaSolution> {
    solve_lca_inner(problem, cfg, None)
}

/// Same as [`solve_lca`] but records (iteration, objective, kkt) per step.
pub fn solve_lca_logged(
    problem: &LassoProblem,
    cfg: &LcaConfig,
) -> Result<(LcaSolution, Vec<SolverLogRow>)> {
    let mut log = Vec::new();
    let sol = solve_lca_inner(problem, cfg, Some(&mut log))?;
    Ok((sol, log))
}

fn solve_lca_inner(
    problem: &LassoProblem,
    cfg: &LcaConfig,
    mut log: Option<&mut Vec<SolverLogRow>>,
) -> Result<LcaSolution> {
    cfg.validate()?;
    let n = problem.phi.ncols();
    let b = problem.phi.t().dot(&problem.s);
    // lateral competition matrix ΦᵀΦ − I
    let mut g_lat = problem.phi.t().dot(&problem.phi);
    for i in 0..n {
        g_lat[(i, i)] -= 1.0;
    }
    let rate = cfg.dt / cfg.tau;
    let mut u = Array1::<f64>::zeros(n);
    let mut a = soft_threshold_vec(u.view(), problem.lambda);
    for it in 0..cfg.max_steps {
        let mut du = &b - &u - &g_lat.dot(&a);
        du.mapv_inplace(|x| x * rate);
        u += &du;
        let a_next = soft_threshold_vec(u.view(), problem.lambda);
        let da_inf =
            a_next.iter().zip(a.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let du_inf = du.iter().map(|x| x.abs()).fold(0.0, f64::max);
        a = a_next;
        if let Some(rows) = log.as_deref_mut() {
            rows.push(SolverLogRow {
                iteration: it + 1,
                objective: objective(problem, a.view()),
                kkt: kkt_residual(problem, a.view()),
            });
        }
        if da_inf.max(du_inf) <= cfg.tol {
            let kkt = kkt_residual(problem, a.view());
            return Ok(LcaSolution { a, iterations: it + 1, kkt, converged: true });
        }
    }
    let kkt = kkt_residual(problem, a.view());
    Ok(LcaSolution { a, iterations: cfg.max_steps, kkt, converged: false })
}

/// Spiking LCA parameters. Each coefficient is a positive/negative unit pair;
/// lateral inhibition acts on a box-car rate estimate of recent spikes, and an
/// integrate-and-fire accumulator with threshold θ emits the spikes that are
/// counted for decoding.
#[derive(Debug, Clone, Copy)]
pub struct SlcaConfig {
    pub t_window: usize,
    pub dt: f64,
    pub tau: f64,
    /// Spike threshold; None picks 2·max(1, ‖Φᵀs‖∞)·dt, which keeps every
    /// unit below one spike per step.
    pub theta: Option<f64>,
    /// Box-car filter length (steps) for the lateral rate estimate.
    pub boxcar: usize,
}

impl Default for SlcaConfig {
    fn default() -> Self {
        Self { t_window: 20_000, dt: 0.1, tau: 1.0, theta: None, boxcar: 10 }
    }
}

impl SlcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_window == 0 {
            return Err(Error::Range("t_window must be ≥ 1".into()));
        }
        if !(self.tau > 0.0) || !(self.dt > 0.0 && self.dt <= self.tau) {
            return Err(Error::Range(format!("dt {} outside (0, tau {}]", self.dt, self.tau)));
        }
        if let Some(th) = self.theta {
            if !(th > 0.0) || !th.is_finite() {
                return Err(Error::Range(format!("theta {th} must be > 0")));
            }
        }
        if self.boxcar == 0 {
            return Err(Error::Range("boxcar length must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Run the spiking LCA for `t_window` steps and decode
/// â_i = θ·(count⁺_i − count⁻_i)/(T·dt). The trace holds the 2N-unit raster
/// (positive units first) and exact event counts.
pub fn solve_slca(problem: &LassoProblem, cfg: &SlcaConfig) -> Result<(Array1<f64>, SimTrace)> {
    cfg.validate()?;
    let n = problem.phi.ncols();
    let t_window = cfg.t_window;
    let b = problem.phi.t().dot(&problem.s);
    let mut w_lat = problem.phi.t().dot(&problem.phi);
    for i in 0..n {
        w_lat[(i, i)] = 0.0;
    }
    let nnz_row: Vec<u64> =
        (0..n).map(|i| w_lat.row(i).iter().filter(|&&x| x != 0.0).count() as u64).collect();
    let theta = cfg
        .theta
        .unwrap_or_else(|| 2.0 * b.iter().fold(1.0f64, |m, &x| m.max(x.abs())) * cfg.dt);
    let rate = cfg.dt / cfg.tau;

    let mut u = vec![0.0f64; 2 * n];
    let mut membrane = vec![0.0f64; 2 * n];
    let mut boxsum = vec![0i64; 2 * n];
    let mut hist = vec![vec![false; 2 * n]; cfg.boxcar];
    let mut counts = vec![0u64; 2 * n];
    let mut raster = SpikeRaster::zeros(2 * n, t_window)?;
    let mut spike_count = 0u64;
    let mut syn_events = 0u64;
    let mut a_est = Array1::<f64>::zeros(n);
    for t in 0..t_window {
        // lateral inhibition from the box-car rate estimate of past spikes
        for i in 0..n {
            a_est[i] = theta * (boxsum[i] - boxsum[n + i]) as f64 / (cfg.boxcar as f64 * cfg.dt);
        }
        let inhib = w_lat.dot(&a_est);
        let slot = &mut hist[t % cfg.boxcar];
        for i in 0..2 * n {
            let drive = if i < n { b[i] - inhib[i] } else { -b[i - n] + inhib[i - n] };
            u[i] += rate * (drive - u[i]);
            let a_inst = (u[i] - problem.lambda).max(0.0);
            membrane[i] += a_inst * cfg.dt;
            let fired = membrane[i] >= theta;
            if fired {
                membrane[i] -= theta;
                counts[i] += 1;
                raster.set(i, t, true);
                spike_count += 1;
                // each spike reaches both halves of every laterally coupled pair
                syn_events += 2 * nnz_row[i % n];
            }
            if slot[i] {
                boxsum[i] -= 1;
            }
            if fired {
                boxsum[i] += 1;
            }
            slot[i] = fired;
        }
    }
    let decoded = Array1::from_shape_fn(n, |i| {
        theta * (counts[i] as f64 - counts[n + i] as f64) / (t_window as f64 * cfg.dt)
    });
    let trace = SimTrace {
        rasters: vec![raster],
        spike_count,
        syn_events,
        neuron_updates: 2 * n as u64 * t_window as u64,
        steps: t_window,
    };
    Ok((decoded, trace))
}

/// FISTA parameters; iterations stop once the KKT residual reaches `tol`.
#[derive(Debug, Clone, Copy)]
pub struct FistaConfig {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FistaConfig {
    fn default() -> Self {
        Self { max_iter: 50_000, tol: 1e-8 }
    }
}

impl FistaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::Range("max_iter ≥ 1 and tol > 0 required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FistaSolution {
    pub a: Array1<f64>,
    pub iterations: usize,
    pub kkt: f64,
    pub converged: bool,
}

/// Accelerated proximal gradient with step 1/L (L from power iteration plus a
/// 1% safety margin) and a function-value restart.
pub fn solve_fista(problem: &LassoProblem, cfg: &FistaConfig) -> Result<FistaSolution> {
    solve_fista_inner(problem, cfg, None)
}

/// Same as [`solve_fista`] but records (iteration, objective, kkt) per step.
pub fn solve_fista_logged(
    problem: &LassoProblem,
    cfg: &FistaConfig,
) -> Result<(FistaSolution, Vec<SolverLogRow>)> {
    let mut log = Vec::new();
    let sol = solve_fista_inner(problem, cfg, Some(&mut log))?;
    Ok((sol, log))
}

fn solve_fista_inner(
    problem: &LassoProblem,
    cfg: &FistaConfig,
    mut log: Option<&mut Vec<SolverLogRow>>,
) -> Result<FistaSolution> {
    cfg.validate()?;
    let n = problem.phi.ncols();
    let g = problem.phi.t().dot(&problem.phi);
    let b = problem.phi.t().dot(&problem.s);
    let lipschitz = power_iteration_upper(&g);
    let step = 1.0 / lipschitz;
    let lam = problem.lambda;

    let mut x = Array1::<f64>::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = objective(problem, x.view());
    for it in 0..cfg.max_iter {
        let grad_y = g.dot(&y) - &b;
        let mut x_new = soft_threshold_vec((&y - &(grad_y * step)).view(), lam * step);
        let mut f_new = objective(problem, x_new.view());
        if f_new > fx {
            // momentum overshoot: restart with a plain proximal step from x
            let grad_x = g.dot(&x) - &b;
            x_new = soft_threshold_vec((&x - &(grad_x * step)).view(), lam * step);
            f_new = objective(problem, x_new.view());
            t = 1.0;
        }
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_new;
        y = &x_new + &((&x_new - &x) * momentum);
        x = x_new;
        t = t_new;
        fx = f_new;
        let kkt = kkt_residual(problem, x.view());
        if let Some(rows) = log.as_deref_mut() {
            rows.push(SolverLogRow { iteration: it + 1, objective: fx, kkt });
        }
        if kkt <= cfg.tol {
            return Ok(FistaSolution { a: x, iterations: it + 1, kkt, converged: true });
        }
    }
    let kkt = kkt_residual(problem, x.view());
    Ok(FistaSolution { a: x, iterations: cfg.max_iter, kkt, converged: false })
}

/// Upper bound on the top eigenvalue of a symmetric PSD matrix: power
/// iteration from a seeded random start (a deterministic start can be
/// orthogonal to a multiplicity-2 top eigenspace), 1e-6 relative tolerance,
/// then a 1% margin because the iterate approaches the eigenvalue from below.
fn power_iteration_upper(g: &Array2<f64>) -> f64 {
    let n = g.nrows();
    let mut rng = seed::rng(0x5eed);
    let mut v = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        v.fill(1.0 / (n as f64).sqrt());
    } else {
        v.mapv_inplace(|x| x / norm);
    }
    let mut lam_prev = 0.0f64;
    let mut lam = 1.0f64;
    for _ in 0..1000 {
        let w = g.dot(&v);
        lam = w.dot(&w).sqrt();
        if lam == 0.0 {
            return 1.0;
        }
        v = w.mapv(|x| x / lam);
        if (lam - lam_prev).abs() <= 1e-6 * lam {
            break;
        }
        lam_prev = lam;
    }
    lam * 1.01
}

/// Globally optimal solution by exhaustive support and sign enumeration;
/// practical only for very small N (capped at 12 columns). Used as an
/// independent oracle for the iterative solvers.
pub fn solve_bruteforce(problem: &LassoProblem) -> Result<Array1<f64>> {
    let (_, n) = problem.dims();
    if n > 12 {
        return Err(Error::Config(format!("brute force capped at 12 columns, got {n}")));
    }
    let lam = problem.lambda;
    if lam == 0.0 {
        // plain least squares via the normal equations
        let g = problem.phi.t().dot(&problem.phi);
        let b = problem.phi.t().dot(&problem.s);
        return solve_linear(g, b)
            .ok_or_else(|| Error::Config("singular normal equations at lambda = 0".into()));
    }
    let mut best: Option<(f64, Array1<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let k = support.len();
        if k == 0 {
            let a = Array1::zeros(n);
            if kkt_residual(problem, a.view()) <= 1e-9 {
                consider(&mut best, objective(problem, a.view()), a);
            }
            continue;
        }
        // Φ restricted to the support
        let phi_s = {
            let mut m = Array2::zeros((problem.phi.nrows(), k));
            for (c, &j) in support.iter().enumerate() {
                m.column_mut(c).assign(&problem.phi.column(j));
            }
            m
        };
        let gram = phi_s.t().dot(&phi_s);
        let rhs_base = phi_s.t().dot(&problem.s);
        for signs in 0u32..(1 << k) {
            let sigma: Vec<f64> =
                (0..k).map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let rhs = Array1::from_shape_fn(k, |i| rhs_base[i] - lam * sigma[i]);
            let Some(a_s) = solve_linear(gram.clone(), rhs) else { continue };
            // stationarity assumed the signs; they must come out consistent
            if a_s.iter().zip(&sigma).any(|(&ai, &si)| ai * si <= 0.0) {
                continue;
            }
            let mut a = Array1::zeros(n);
            for (c, &j) in support.iter().enumerate() {
                a[j] = a_s[c];
            }
            // off-support coordinates must satisfy the dual bound
            if kkt_residual(problem, a.view()) <= 1e-8 {
                consider(&mut best, objective(problem, a.view()), a);
            }
        }
    }
    best.map(|(_, a)| a)
        .ok_or_else(|| Error::Config("no KKT-consistent support found".into()))
}

fn consider(best: &mut Option<(f64, Array1<f64>)>, obj: f64, a: Array1<f64>) {
    if best.as_ref().map_or(true, |(fb, _)| obj < *fb) {
        *best = Some((obj, a));
    }
}

/// Gaussian elimination with partial pivoting; None on (numerical) singularity.
fn solve_linear(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| a[(r1, col)].abs().total_cmp(&a[(r2, col)].abs()))
            .unwrap();
        if a[(pivot, col)].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[(row, col)] / a[(col, col)];
            if f != 0.0 {
                for j in col..n {
                    a[(row, j)] -= f * a[(col, j)];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[(row, j)] * x[j];
        }
        x[row] = acc / a[(row, row)];
    }
    Some(x)
}
