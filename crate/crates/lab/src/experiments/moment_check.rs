//! First-moment structure: `E[X_t | X_s]` is affine in `X_s` with slope
//! `e^{β(t-s)}` and intercept `m (1 - e^{β(t-s)})`, and the mean path never
//! exceeds `max{x0, m}`.

use cbi_core::{simulate_batch, stats, Mechanisms, PathConfig, Scheme};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub x0: Option<f64>,
    pub times: Vec<f64>,
    /// `(s, t)` pairs for the conditional-mean regression; both must be in `times`.
    pub pairs: Vec<(f64, f64)>,
    pub n_paths: usize,
    pub dt: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub sigmas: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            x0: None,
            times: vec![0.25, 0.5, 1.0, 2.0, 3.0, 5.0],
            pairs: vec![(0.5, 1.0), (1.0, 3.0)],
            n_paths: 10_000,
            dt: 0.005,
            epsilon: 1e-3,
            scheme: Scheme::Euler,
            sigmas: 3.0,
        }
    }
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    anyhow::ensure!(!p.times.is_empty(), "times must be nonempty");
    let m = mech.stationary_mean();
    let beta = mech.beta();
    let x0 = p.x0.unwrap_or(5.0 * m);
    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let cfg = PathConfig::new(x0, t_end, p.dt)
        .with_seed(seed)
        .with_epsilon(p.epsilon)
        .with_scheme(p.scheme)
        .with_checkpoints(p.times.clone());
    let batch = simulate_batch(mech, &cfg, p.n_paths)?;
    report.note_number("m", m);
    report.note_number("x0", x0);

    let mut means = Table::new("means", &["t", "mean_x", "stderr_x", "exact"]);
    let bound = x0.max(m);
    let mut worst_excess = f64::NEG_INFINITY;
    for (k, &t) in batch.checkpoints.iter().enumerate() {
        let x = batch.x_at(k);
        let (mean, se) = (stats::mean(&x), stats::stderr(&x));
        let decay = (beta * t).exp();
        let exact = x0 * decay + m * (1.0 - decay);
        means.push(vec![t, mean, se, exact]);
        report.check(Check::absolute(format!("mean_x_t{t}"), mean, exact, p.sigmas * se + 1e-12));
        worst_excess = worst_excess.max(mean - bound - p.sigmas * se);
    }
    report.tables.push(means);
    report.check(Check::at_most("sup_mean_minus_bound", worst_excess, 0.0).with_note(format!("bound = {bound}")));

    let index = |t: f64| {
        batch
            .checkpoints
            .iter()
            .position(|&c| (c - t).abs() <= 0.5 * batch.dt)
            .ok_or_else(|| anyhow::anyhow!("pair time {t} is not a checkpoint"))
    };
    let mut reg = Table::new(
        "regression",
        &["s", "t", "slope", "slope_se", "slope_exact", "intercept", "intercept_se", "intercept_exact"],
    );
    for &(s, t) in &p.pairs {
        let (ks, kt) = (index(s)?, index(t)?);
        let (slope, intercept, se_s, se_i) = stats::regression(&batch.x_at(ks), &batch.x_at(kt));
        let decay = (beta * (t - s)).exp();
        let exact_i = m * (1.0 - decay);
        reg.push(vec![s, t, slope, se_s, decay, intercept, se_i, exact_i]);
        report.check(Check::absolute(format!("slope_s{s}_t{t}"), slope, decay, p.sigmas * se_s));
        report.check(Check::absolute(format!("intercept_s{s}_t{t}"), intercept, exact_i, p.sigmas * se_i));
    }
    report.tables.push(reg);
    Ok(())
}
