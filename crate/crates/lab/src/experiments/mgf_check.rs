//! Monte Carlo `log E[exp(λ ∫_0^t X_s ds)]` against the Riccati value, and
//! `log E[exp(λ X_t)]` against the transition formula.

use cbi_core::{simulate_batch, stats, Mechanisms, PathConfig, RiccatiProfile};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub x0: f64,
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// `λ` values (nonpositive) for the marginal `E[exp(λ X_t)]` cross-check.
    pub transition_lambdas: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub epsilon: f64,
    /// Cells with `λ >= λ_c - safety` are skipped.
    pub safety: f64,
    pub max_z: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            x0: 1.0,
            times: vec![1.0, 2.0],
            lambdas: vec![-1.0, 0.1, 0.2],
            transition_lambdas: vec![-0.5],
            n_paths: 100_000,
            dt: 1e-3,
            epsilon: 1e-3,
            safety: 0.02,
            max_z: 3.0,
        }
    }
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    anyhow::ensure!(!p.times.is_empty() && !p.lambdas.is_empty(), "grids must be nonempty");
    let profile = RiccatiProfile::new(mech.clone())?;
    let lambda_c = profile.lambda_c();
    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let cfg = PathConfig::new(p.x0, t_end, p.dt)
        .with_seed(seed)
        .with_epsilon(p.epsilon)
        .with_checkpoints(p.times.clone());
    let batch = simulate_batch(mech, &cfg, p.n_paths)?;
    report.note_number("lambda_c", lambda_c);

    let mut table = Table::new("cells", &["kind", "t", "lambda", "mc_log", "mc_stderr", "exact", "z"]);
    let mut cells = 0;
    for (k, &t) in batch.checkpoints.iter().enumerate() {
        let integral = batch.integral_at(k);
        for &lambda in &p.lambdas {
            if lambda >= lambda_c - p.safety {
                report.note(&format!("skipped_t{t}_lambda{lambda}"), "beyond safety bound");
                continue;
            }
            let exact = profile.integrated_log_mgf(p.x0, t, lambda)?;
            let logs: Vec<f64> = integral.iter().map(|i| lambda * i).collect();
            let (mc, se) = stats::log_mean_exp(&logs);
            let z = (mc - exact) / se;
            table.push(vec![0.0, t, lambda, mc, se, exact, z]);
            report.check(
                Check::absolute(format!("log_mgf_t{t}_lambda{lambda}"), mc, exact, p.max_z * se)
                    .with_note(format!("z = {z:.3}")),
            );
            cells += 1;
        }
        let x = batch.x_at(k);
        for &lambda in &p.transition_lambdas {
            let exact = profile.transition_log_laplace(p.x0, t, lambda)?;
            let logs: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let (mc, se) = stats::log_mean_exp(&logs);
            let z = (mc - exact) / se;
            table.push(vec![1.0, t, lambda, mc, se, exact, z]);
            report.check(
                Check::absolute(format!("log_laplace_x_t{t}_lambda{lambda}"), mc, exact, p.max_z * se)
                    .with_note(format!("z = {z:.3}")),
            );
        }
    }
    report.note("integral_cells", cells);
    report.note("kind_codes", ["integrated", "marginal"]);
    report.tables.push(table);
    Ok(())
}
