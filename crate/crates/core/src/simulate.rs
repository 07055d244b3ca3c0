//! Monte Carlo paths of the CBI stochastic differential equation.
//!
//! Paths are simulated in `f64` whatever the scalar of the mechanisms. Each
//! path owns a ChaCha stream keyed by `(seed, path index)`, so a batch is
//! bit-identical across runs and thread counts.
//!
//! With a tilt `y`, every step is drawn from the exponential tilt of the
//! plain step law by `e^{y Δ}` and the exact likelihood ratio of the chain is
//! accumulated in `log_weight`, so `E[g] = E_tilted[g · exp(log_weight)]`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{JumpSampler, LevyMeasure};
use crate::mechanisms::Mechanisms;
use crate::scalar::Real;
use crate::stats;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Euler,
    /// Noncentral chi-square transitions between immigration jumps. Needs
    /// `σ > 0`, no branching jumps and a finite immigration measure.
    ExactCir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub x0: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Jumps below this size are replaced by their drift or Gaussian proxy.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Times at which `X`, `Y`, `M` and `[M]` are recorded; `t_end` if empty.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    /// Keep every `k`-th grid value of `X` for each path.
    #[serde(default)]
    pub record_stride: Option<usize>,
    /// Constant exponential tilt of the step law.
    #[serde(default)]
    pub tilt: Option<f64>,
}

fn default_epsilon() -> f64 {
    1e-3
}

impl PathConfig {
    pub fn new(x0: f64, t_end: f64, dt: f64) -> Self {
        Self {
            x0,
            t_end,
            dt,
            epsilon: default_epsilon(),
            seed: 0,
            scheme: Scheme::Euler,
            checkpoints: Vec::new(),
            record_stride: None,
            tilt: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_tilt(mut self, tilt: f64) -> Self {
        self.tilt = Some(tilt);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = Some(stride);
        self
    }
}

/// Quadratic-variation components, in the order diffusion, branching
/// jumps, immigration jumps.
pub type QvComponents = [f64; 3];

/// Everything recorded along one path, indexed by checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `X_t - x0 - ∫_0^t (b̃ + β X_s) ds` with `b̃ = b + ∫ z ν(dz)`.
    pub martingale: Vec<f64>,
    pub qv: Vec<QvComponents>,
    /// Log likelihood ratio of the plain chain against the tilted one.
    pub log_weight: Vec<f64>,
    pub trajectory: Vec<f64>,
    pub truncated_steps: u64,
}

/// Long-run targets of `[M]_t / t` and the normalizer `β²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvTargets {
    pub diffusion: f64,
    pub branching: f64,
    pub immigration: f64,
    pub beta_sq: f64,
    /// `ρ²`, absent when a second moment is infinite.
    pub rho_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub checkpoints: Vec<f64>,
    pub paths: Vec<PathRecord>,
    pub steps_per_path: usize,
    pub dt: f64,
    pub tilt: Option<f64>,
    pub qv_targets: QvTargets,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub t: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_y: f64,
    pub qv_diffusion: f64,
    pub qv_branching: f64,
    pub qv_immigration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvRow {
    pub t: f64,
    pub component: &'static str,
    /// Batch mean of `[M]_t / t`.
    pub mean: f64,
    pub stderr: f64,
    pub target: f64,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn column(&self, k: usize, f: impl Fn(&PathRecord, usize) -> f64) -> Vec<f64> {
        self.paths.iter().map(|p| f(p, k)).collect()
    }

    pub fn x_at(&self, k: usize) -> Vec<f64> {
        self.column(k, |p, k| p.x[k])
    }

    pub fn y_at(&self, k: usize) -> Vec<f64> {
        self.column(k, |p, k| p.y[k])
    }

    /// `∫_0^t X_s ds` at checkpoint `k`.
    pub fn integral_at(&self, k: usize) -> Vec<f64> {
        let t = self.checkpoints[k];
        self.column(k, |p, k| p.y[k] * t)
    }

    pub fn log_weight_at(&self, k: usize) -> Vec<f64> {
        self.column(k, |p, k| p.log_weight[k])
    }

    pub fn truncation_fraction(&self) -> f64 {
        let total: u64 = self.paths.iter().map(|p| p.truncated_steps).sum();
        total as f64 / (self.steps_per_path as f64 * self.n_paths() as f64)
    }

    pub fn checkpoint_table(&self) -> Vec<CheckpointRow> {
        (0..self.checkpoints.len())
            .map(|k| {
                let t = self.checkpoints[k];
                let y = self.y_at(k);
                let qv = |c: usize| stats::mean(&self.column(k, |p, k| p.qv[k][c] / t));
                CheckpointRow {
                    t,
                    mean_x: stats::mean(&self.x_at(k)),
                    mean_y: stats::mean(&y),
                    var_y: stats::variance(&y),
                    qv_diffusion: qv(0),
                    qv_branching: qv(1),
                    qv_immigration: qv(2),
                }
            })
            .collect()
    }
}

/// Per-checkpoint `[M]_t / t` by component next to its long-run target, plus
/// the component sum normalized by `β²` against `ρ²`.
pub fn qv_diagnostics(batch: &PathBatch) -> Vec<QvRow> {
    let q = batch.qv_targets;
    let targets = [
        ("diffusion", q.diffusion),
        ("branching", q.branching),
        ("immigration", q.immigration),
    ];
    let mut rows = Vec::new();
    for (k, &t) in batch.checkpoints.iter().enumerate() {
        for (c, &(component, target)) in targets.iter().enumerate() {
            let v = batch.column(k, |p, k| p.qv[k][c] / t);
            rows.push(QvRow {
                t,
                component,
                mean: stats::mean(&v),
                stderr: stats::stderr(&v),
                target,
            });
        }
        let total = batch.column(k, |p, k| p.qv[k].iter().sum::<f64>() / (t * q.beta_sq));
        rows.push(QvRow {
            t,
            component: "total_over_beta_sq",
            mean: stats::mean(&total),
            stderr: stats::stderr(&total),
            target: q.rho_sq.unwrap_or(f64::NAN),
        });
    }
    rows
}

/// Step ingredients shared by all paths.
struct Kernel {
    beta: f64,
    sigma2: f64,
    /// `b + ∫_0^ε z ν(dz)`.
    drift_const: f64,
    /// `∫_ε^∞ z μ(dz)`, the branching compensator per unit state.
    mu_compensator: f64,
    mu_small_var: f64,
    nu_small_qv: f64,
    nu_jumps: JumpSampler,
    mu_jumps: JumpSampler,
    nu_rate_plain: f64,
    mu_rate_plain: f64,
    b_tilde: f64,
    tilt: f64,
}

impl Kernel {
    fn new(mech: &Mechanisms<f64>, cfg: &PathConfig) -> Result<Self> {
        let eps = cfg.epsilon;
        let nu = mech.nu();
        let mu = mech.mu();
        let tilt = cfg.tilt.unwrap_or(0.0);
        let tilted = |m: &LevyMeasure<f64>| {
            m.tilted(tilt)
                .ok_or_else(|| Error::TiltUnavailable(format!("measure {m} has no exponential tilt by {tilt}")))
        };
        let nu_q = tilted(nu)?;
        let mu_q = tilted(mu)?;
        let nu_jumps = JumpSampler::new(&nu_q, eps);
        let mu_jumps = JumpSampler::new(&mu_q, eps);
        if !nu_jumps.rate.is_finite() || !mu_jumps.rate.is_finite() {
            return Err(Error::TiltUnavailable(format!("tilted jump intensity diverges at y = {tilt}")));
        }
        Ok(Self {
            beta: mech.beta(),
            sigma2: mech.sigma() * mech.sigma(),
            drift_const: mech.b() + nu.truncated_moment(1, 0.0, eps),
            mu_compensator: mu.truncated_moment(1, eps, f64::INFINITY),
            mu_small_var: mu.truncated_moment(2, 0.0, eps),
            nu_small_qv: nu.truncated_moment(2, 0.0, eps),
            nu_rate_plain: JumpSampler::new(nu, eps).rate,
            mu_rate_plain: JumpSampler::new(mu, eps).rate,
            nu_jumps,
            mu_jumps,
            b_tilde: mech.b() + nu.truncated_moment(1, 0.0, f64::INFINITY),
            tilt,
        })
    }
}

fn compound_poisson<R: Rng>(rate: f64, sampler: &JumpSampler, rng: &mut R, sq: &mut f64) -> f64 {
    if !(rate > 0.0) {
        return 0.0;
    }
    let n = Poisson::new(rate).expect("positive finite Poisson rate").sample(rng) as u64;
    let mut total = 0.0;
    for _ in 0..n {
        let z = sampler.sample(rng);
        total += z;
        *sq += z * z;
    }
    total
}

fn smallest_atom(m: &LevyMeasure<f64>) -> f64 {
    match m {
        LevyMeasure::PointMass { location, .. } => *location,
        LevyMeasure::Mixture { parts } => parts.iter().map(smallest_atom).fold(f64::INFINITY, f64::min),
        _ => f64::INFINITY,
    }
}

/// Simulates `n_paths` independent paths.
pub fn simulate_batch<S: Real>(mech: &Mechanisms<S>, cfg: &PathConfig, n_paths: usize) -> Result<PathBatch> {
    let mech: Mechanisms<f64> = mech.cast()?;
    let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
    if !(cfg.x0 >= 0.0 && cfg.x0.is_finite()) {
        return bad("x0", format!("initial state must be finite and nonnegative, got {}", cfg.x0));
    }
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return bad("t_end", format!("horizon must be positive, got {}", cfg.t_end));
    }
    if !(cfg.dt > 0.0 && cfg.dt <= cfg.t_end) {
        return bad("dt", format!("need 0 < dt <= t_end, got {}", cfg.dt));
    }
    if !(cfg.epsilon > 0.0) {
        return bad("epsilon", format!("truncation must be positive, got {}", cfg.epsilon));
    }
    if n_paths == 0 {
        return bad("n_paths", "need at least one path".into());
    }
    let atom = smallest_atom(mech.nu()).min(smallest_atom(mech.mu()));
    if cfg.epsilon >= atom {
        return bad("epsilon", format!("truncation {} must stay below the atom at {atom}", cfg.epsilon));
    }
    if cfg.dt * mech.beta().abs() > 0.5 {
        return Err(Error::StepTooCoarse(cfg.dt * mech.beta().abs()));
    }
    if cfg.scheme == Scheme::ExactCir {
        let finite_nu = mech.nu().truncated_moment(0, 0.0, f64::INFINITY).is_finite();
        if !mech.mu().is_zero() || !finite_nu || mech.sigma() <= 0.0 || cfg.tilt.is_some() {
            return Err(Error::IncompatibleScheme(
                "exact CIR steps need sigma > 0, no branching jumps, finite immigration mass and no tilt".into(),
            ));
        }
    }

    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let mut marks: Vec<usize> = if cfg.checkpoints.is_empty() {
        vec![steps]
    } else {
        let mut v = Vec::with_capacity(cfg.checkpoints.len());
        for &t in &cfg.checkpoints {
            if !(t > 0.0 && t <= cfg.t_end * (1.0 + 1e-12)) {
                return bad("checkpoints", format!("checkpoint {t} outside (0, t_end]"));
            }
            v.push(((t / dt).round() as usize).clamp(1, steps));
        }
        v
    };
    marks.sort_unstable();
    marks.dedup();
    let checkpoints: Vec<f64> = marks.iter().map(|&i| i as f64 * dt).collect();

    let kernel = Kernel::new(&mech, cfg)?;
    let m = mech.stationary_mean();
    let qv_targets = QvTargets {
        diffusion: kernel.sigma2 * m,
        branching: m * mech.mu().truncated_moment(2, 0.0, f64::INFINITY),
        immigration: mech.nu().truncated_moment(2, 0.0, f64::INFINITY),
        beta_sq: mech.beta() * mech.beta(),
        rho_sq: mech.clt_variance().ok(),
    };

    let paths: Vec<PathRecord> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            simulate_path(&kernel, cfg, dt, steps, &marks, &mut rng)
        })
        .collect();

    Ok(PathBatch {
        checkpoints,
        paths,
        steps_per_path: steps,
        dt,
        tilt: cfg.tilt,
        qv_targets,
    })
}

fn simulate_path<R: Rng>(k: &Kernel, cfg: &PathConfig, dt: f64, steps: usize, marks: &[usize], rng: &mut R) -> PathRecord {
    let n = marks.len();
    let mut rec = PathRecord {
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        martingale: Vec::with_capacity(n),
        qv: Vec::with_capacity(n),
        log_weight: Vec::with_capacity(n),
        trajectory: Vec::new(),
        truncated_steps: 0,
    };
    let stride = cfg.record_stride.filter(|&s| s > 0);
    if stride.is_some() {
        rec.trajectory.push(cfg.x0);
    }
    let y = k.tilt;
    let nu_poisson_rate = k.nu_jumps.rate * dt;
    let mut x = cfg.x0;
    let mut integral = 0.0;
    let mut qv = [0.0; 3];
    let mut log_w = 0.0;
    let mut next = 0;
    for step in 1..=steps {
        let x_new = match cfg.scheme {
            Scheme::Euler => {
                let drift = (k.drift_const + k.beta * x - x * k.mu_compensator) * dt;
                let s2 = (k.sigma2 + k.mu_small_var) * x * dt;
                let gauss = if s2 > 0.0 {
                    let n: f64 = rng.sample(StandardNormal);
                    s2.sqrt() * n + y * s2
                } else {
                    0.0
                };
                let jump_nu = compound_poisson(nu_poisson_rate, &k.nu_jumps, rng, &mut qv[2]);
                let jump_mu = compound_poisson(x * k.mu_jumps.rate * dt, &k.mu_jumps, rng, &mut qv[1]);
                qv[0] += k.sigma2 * x * dt;
                qv[1] += k.mu_small_var * x * dt;
                qv[2] += k.nu_small_qv * dt;
                let delta = drift + gauss + jump_nu + jump_mu;
                if y != 0.0 {
                    let cumulant = y * drift
                        + 0.5 * y * y * s2
                        + dt * (k.nu_jumps.rate - k.nu_rate_plain)
                        + x * dt * (k.mu_jumps.rate - k.mu_rate_plain);
                    log_w += cumulant - y * delta;
                }
                x + delta
            }
            Scheme::ExactCir => {
                qv[0] += k.sigma2 * x * dt;
                qv[2] += k.nu_small_qv * dt;
                exact_cir_step(k, x, dt, rng, &mut qv[2])
            }
        };
        let x_new = if x_new < 0.0 {
            rec.truncated_steps += 1;
            0.0
        } else {
            x_new
        };
        integral += 0.5 * (x + x_new) * dt;
        x = x_new;
        if let Some(s) = stride {
            if step % s == 0 {
                rec.trajectory.push(x);
            }
        }
        if next < n && marks[next] == step {
            let t = step as f64 * dt;
            rec.x.push(x);
            rec.y.push(integral / t);
            rec.martingale.push(x - cfg.x0 - k.b_tilde * t - k.beta * integral);
            rec.qv.push(qv);
            rec.log_weight.push(log_w);
            next += 1;
        }
    }
    rec
}

/// One exact step of `dX = (b + βX) dt + σ √X dB` interleaved with the
/// immigration jumps that fall inside the step.
fn exact_cir_step<R: Rng>(k: &Kernel, x: f64, dt: f64, rng: &mut R, sq: &mut f64) -> f64 {
    let mut times: Vec<f64> = Vec::new();
    if k.nu_jumps.rate > 0.0 {
        let n = Poisson::new(k.nu_jumps.rate * dt).expect("positive finite Poisson rate").sample(rng) as usize;
        times.extend((0..n).map(|_| rng.random::<f64>() * dt));
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let mut state = x;
    let mut t = 0.0;
    for s in times {
        state = cir_transition(k, state, s - t, rng);
        let z = k.nu_jumps.sample(rng);
        *sq += z * z;
        state += z;
        t = s;
    }
    cir_transition(k, state, dt - t, rng)
}

/// Poisson mixture of Gamma laws for the noncentral chi-square transition.
fn cir_transition<R: Rng>(k: &Kernel, x: f64, h: f64, rng: &mut R) -> f64 {
    if h <= 0.0 {
        return x;
    }
    let decay = (k.beta * h).exp();
    let c = k.sigma2 * (1.0 - decay) / (-4.0 * k.beta);
    let half_dof = 2.0 * k.drift_const / k.sigma2;
    let half_nc = x * decay / (2.0 * c);
    let n = if half_nc > 0.0 {
        Poisson::new(half_nc).expect("positive finite Poisson rate").sample(rng)
    } else {
        0.0
    };
    let shape = half_dof + n;
    if shape <= 0.0 {
        return 0.0;
    }
    let g: f64 = Gamma::new(shape, 1.0).expect("positive gamma shape").sample(rng);
    2.0 * c * g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::ModelParams;

    fn model(b: f64, beta: f64, sigma: f64, nu: LevyMeasure<f64>, mu: LevyMeasure<f64>) -> Mechanisms<f64> {
        Mechanisms::new(ModelParams { b, beta, sigma, nu, mu }).unwrap()
    }

    #[test]
    fn zero_process_stays_zero() {
        let mech = model(0.0, -1.0, 1.0, LevyMeasure::Zero, LevyMeasure::point_mass(1.0, 1.0));
        let batch = simulate_batch(&mech, &PathConfig::new(0.0, 2.0, 0.01), 50).unwrap();
        assert!(batch.paths.iter().all(|p| p.x[0] == 0.0 && p.y[0] == 0.0));
    }

    #[test]
    fn deterministic_linear_ode() {
        let mech = model(1.0, -1.0, 0.0, LevyMeasure::Zero, LevyMeasure::Zero);
        let cfg = PathConfig::new(0.0, 3.0, 1e-3).with_checkpoints(vec![1.0, 3.0]);
        let batch = simulate_batch(&mech, &cfg, 2).unwrap();
        for (k, &t) in batch.checkpoints.iter().enumerate() {
            let exact = 1.0 - (-t).exp();
            assert!((batch.paths[0].x[k] - exact).abs() < 2e-3);
            let y_exact = 1.0 - (1.0 - (-t).exp()) / t;
            assert!((batch.paths[1].y[k] - y_exact).abs() < 2e-3);
        }
    }

    #[test]
    fn rejects_coarse_steps_and_bad_schemes() {
        let mech = model(1.0, -10.0, 1.0, LevyMeasure::Zero, LevyMeasure::point_mass(1.0, 1.0));
        assert!(matches!(
            simulate_batch(&mech, &PathConfig::new(0.0, 1.0, 0.1), 1),
            Err(Error::StepTooCoarse(_))
        ));
        let cfg = PathConfig::new(0.0, 1.0, 0.01).with_scheme(Scheme::ExactCir);
        assert!(matches!(simulate_batch(&mech, &cfg, 1), Err(Error::IncompatibleScheme(_))));
        let atom = model(1.0, -1.0, 1.0, LevyMeasure::point_mass(1.0, 0.01), LevyMeasure::Zero);
        let cfg = PathConfig::new(0.0, 1.0, 0.01).with_epsilon(0.05);
        assert!(simulate_batch(&atom, &cfg, 1).is_err());
    }

    #[test]
    fn reproducible_and_nonnegative() {
        let mech = model(
            0.5,
            -1.0,
            1.0,
            LevyMeasure::tempered_power_law(1.0, 1.0, 1.5, 0.0),
            LevyMeasure::tempered_power_law(1.0, 1.0, 2.5, 0.0),
        );
        let cfg = PathConfig::new(0.2, 2.0, 0.01).with_seed(7).with_checkpoints(vec![0.5, 1.0, 2.0]);
        let a = simulate_batch(&mech, &cfg, 64).unwrap();
        let b = simulate_batch(&mech, &cfg, 64).unwrap();
        assert_eq!(a, b);
        for p in &a.paths {
            assert!(p.x.iter().all(|&x| x >= 0.0));
            for w in p.qv.windows(2) {
                assert!((0..3).all(|c| w[1][c] >= w[0][c] && w[0][c] >= 0.0));
            }
        }
        let c = simulate_batch(&mech, &cfg.clone().with_seed(8), 64).unwrap();
        assert_ne!(a.paths[0].x, c.paths[0].x);
    }

    #[test]
    fn mean_follows_linear_ode() {
        // E X_t = x0 e^{βt} + m (1 - e^{βt})
        let mech = model(1.0, -2.0, 2f64.sqrt(), LevyMeasure::point_mass(0.5, 1.0), LevyMeasure::Zero);
        let m = mech.stationary_mean();
        let cfg = PathConfig::new(2.0, 5.0, 0.005).with_seed(3).with_checkpoints(vec![0.5, 1.0, 5.0]);
        let batch = simulate_batch(&mech, &cfg, 4000).unwrap();
        for (k, &t) in batch.checkpoints.iter().enumerate() {
            let e = (-2.0 * t).exp();
            let expect = 2.0 * e + m * (1.0 - e);
            let xs = batch.x_at(k);
            assert!((stats::mean(&xs) - expect).abs() < 4.0 * stats::stderr(&xs));
        }
    }

    #[test]
    fn exact_cir_matches_euler_mean() {
        let mech = model(1.0, -2.0, 2f64.sqrt(), LevyMeasure::point_mass(0.5, 1.0), LevyMeasure::Zero);
        let cfg = PathConfig::new(1.0, 1.0, 0.05).with_seed(11).with_scheme(Scheme::ExactCir);
        let batch = simulate_batch(&mech, &cfg, 20000).unwrap();
        let e = (-2.0f64).exp();
        let expect = e + 0.75 * (1.0 - e);
        let xs = batch.x_at(0);
        assert!((stats::mean(&xs) - expect).abs() < 4.0 * stats::stderr(&xs));
        assert_eq!(batch.truncation_fraction(), 0.0);
    }

    #[test]
    fn tilted_weights_are_unbiased() {
        // E[exp(λ ∫X)] computed with and without a tilt agree
        let mech = model(1.0, -2.0, 2f64.sqrt(), LevyMeasure::Zero, LevyMeasure::Zero);
        let cfg = PathConfig::new(0.5, 1.0, 0.01).with_seed(5);
        let plain = simulate_batch(&mech, &cfg, 20000).unwrap();
        let tilted = simulate_batch(&mech, &cfg.clone().with_tilt(0.3), 20000).unwrap();
        let w = tilted.log_weight_at(0);
        let weights: Vec<f64> = w.iter().map(|l| l.exp()).collect();
        assert!((stats::mean(&weights) - 1.0).abs() < 4.0 * stats::stderr(&weights));
        let xs = plain.x_at(0);
        let weighted: Vec<f64> = tilted.x_at(0).iter().zip(&weights).map(|(x, w)| x * w).collect();
        let diff = stats::mean(&xs) - stats::mean(&weighted);
        let se = (stats::stderr(&xs).powi(2) + stats::stderr(&weighted).powi(2)).sqrt();
        assert!(diff.abs() < 4.0 * se);
    }

    #[test]
    fn atom_immigration_qv() {
        let mech = model(0.0, -1.0, 0.0, LevyMeasure::point_mass(1.0, 1.0), LevyMeasure::Zero);
        let batch = simulate_batch(&mech, &PathConfig::new(1.0, 50.0, 0.01).with_seed(2), 400).unwrap();
        let rows = qv_diagnostics(&batch);
        assert!(rows[0].mean == 0.0 && rows[1].mean == 0.0);
        let nu = rows[2];
        assert!((nu.mean - nu.target).abs() < 3.0 * nu.stderr, "{nu:?}");
        assert_eq!(nu.target, 1.0);
    }
}
