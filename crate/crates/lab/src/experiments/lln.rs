//! Law of large numbers: `Y_t → m` with mean-square error decaying like `1/t`.

use cbi_core::{simulate_batch, stats, Mechanisms, PathConfig, Scheme};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    /// Starts at the stationary mean when absent.
    pub x0: Option<f64>,
    pub mean_tol: f64,
    /// Allowed relative deviation of `mse(t_{i+1}) / mse(t_i)` from `t_i / t_{i+1}`.
    pub ratio_tol: f64,
    pub max_truncation: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            times: vec![50.0, 100.0, 200.0],
            n_paths: 10_000,
            dt: 0.01,
            epsilon: 1e-3,
            scheme: Scheme::Euler,
            x0: None,
            mean_tol: 0.01,
            ratio_tol: 0.3,
            max_truncation: 0.01,
        }
    }
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    anyhow::ensure!(!p.times.is_empty(), "times must be nonempty");
    let m = mech.stationary_mean();
    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let cfg = PathConfig::new(p.x0.unwrap_or(m), t_end, p.dt)
        .with_seed(seed)
        .with_epsilon(p.epsilon)
        .with_scheme(p.scheme)
        .with_checkpoints(p.times.clone());
    let batch = simulate_batch(mech, &cfg, p.n_paths)?;
    report.note_number("m", m);
    report.note("n_paths", p.n_paths);

    let mut table = Table::new("decay", &["t", "mean_y", "stderr_y", "var_y", "mse", "t_times_mse"]);
    let mut mse = Vec::new();
    for (k, &t) in batch.checkpoints.iter().enumerate() {
        let y = batch.y_at(k);
        let sq: Vec<f64> = y.iter().map(|v| (v - m) * (v - m)).collect();
        let e = stats::mean(&sq);
        mse.push(e);
        table.push(vec![t, stats::mean(&y), stats::stderr(&y), stats::variance(&y), e, t * e]);
    }
    report.tables.push(table);
    report.tables.push(super::checkpoint_table(&batch));

    let last = batch.checkpoints.len() - 1;
    let mean_last = stats::mean(&batch.y_at(last));
    report.check(Check::absolute(
        format!("mean_y_at_t{}", batch.checkpoints[last]),
        mean_last,
        m,
        p.mean_tol,
    ));
    for k in 1..batch.checkpoints.len() {
        let (t0, t1) = (batch.checkpoints[k - 1], batch.checkpoints[k]);
        if mse[k - 1] == 0.0 {
            report.check(Check::flag(format!("mse_ratio_t{t1}_over_t{t0}"), mse[k] == 0.0, "degenerate zero error"));
            continue;
        }
        report.check(Check::relative(
            format!("mse_ratio_t{t1}_over_t{t0}"),
            mse[k] / mse[k - 1],
            t0 / t1,
            p.ratio_tol,
        ));
    }
    report.check(Check::at_most("truncation_fraction", batch.truncation_fraction(), p.max_truncation));
    Ok(())
}
