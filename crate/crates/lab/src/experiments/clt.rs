//! Central limit theorem: `√n (Y_n - m)` against `N(0, ρ²)`, plus the
//! per-component quadratic variation of the martingale part.

use cbi_core::special::upper_gamma;
use cbi_core::{qv_diagnostics, simulate_batch, stats, Mechanisms, PathConfig, Scheme};
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
    pub x0: Option<f64>,
    /// Relative tolerance on `Var(S_n) / ρ²` at the last time.
    pub var_rel_tol: f64,
    /// QV component means must lie within this many standard errors.
    pub qv_sigmas: f64,
    /// Ceiling on the Kolmogorov distance between standardized `S_n` and `N(0,1)`.
    pub max_ks_distance: f64,
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
            var_rel_tol: 0.10,
            qv_sigmas: 3.0,
            max_ks_distance: 0.03,
            max_truncation: 0.01,
        }
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    // Φ(z) = Γ(1/2, z²/2) / (2√π) for z <= 0
    let tail = upper_gamma(0.5, 0.5 * z * z) / (2.0 * std::f64::consts::PI.sqrt());
    if z <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Anderson-Darling `A²` and Kolmogorov `D` of standardized samples.
pub fn normality_scores(samples: &[f64]) -> (f64, f64) {
    let mu = stats::mean(samples);
    let sd = stats::variance(samples).sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mu) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = z.len() as f64;
    let cdf: Vec<f64> = z.iter().map(|&v| normal_cdf(v)).collect();
    let terms: Vec<f64> = (0..z.len())
        .map(|i| {
            let lo = cdf[i].max(1e-300).ln();
            let hi = (1.0 - cdf[z.len() - 1 - i]).max(1e-300).ln();
            (2.0 * i as f64 + 1.0) * (lo + hi)
        })
        .collect();
    let a2 = -n - stats::pairwise_sum(&terms) / n;
    let d = cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs()))
        .fold(0.0, f64::max);
    (a2, d)
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    anyhow::ensure!(!p.times.is_empty(), "times must be nonempty");
    let m = mech.stationary_mean();
    let rho2 = mech.clt_variance()?;
    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let cfg = PathConfig::new(p.x0.unwrap_or(m), t_end, p.dt)
        .with_seed(seed)
        .with_epsilon(p.epsilon)
        .with_scheme(p.scheme)
        .with_checkpoints(p.times.clone());
    let batch = simulate_batch(mech, &cfg, p.n_paths)?;
    report.note_number("m", m);
    report.note_number("rho_sq", rho2);

    let mut table = Table::new("clt", &["n", "mean_s", "var_s", "rho_sq", "anderson_darling", "ks_distance"]);
    let mut last = (f64::NAN, f64::NAN);
    for (k, &t) in batch.checkpoints.iter().enumerate() {
        let s: Vec<f64> = batch.y_at(k).iter().map(|y| t.sqrt() * (y - m)).collect();
        let var = stats::variance(&s);
        let (a2, d) = if var > 0.0 { normality_scores(&s) } else { (f64::NAN, 0.0) };
        table.push(vec![t, stats::mean(&s), var, rho2, a2, d]);
        last = (var, d);
    }
    report.tables.push(table);
    let t_last = *batch.checkpoints.last().unwrap();
    if rho2 > 0.0 {
        report.check(Check::relative(format!("var_s_at_n{t_last}"), last.0, rho2, p.var_rel_tol));
        report.check(Check::at_most(format!("ks_distance_at_n{t_last}"), last.1, p.max_ks_distance));
    } else {
        report.check(Check::absolute(format!("var_s_at_n{t_last}"), last.0, 0.0, 1e-12));
    }

    let mut qv = Table::new("qv", &["t", "component", "mean", "stderr", "target"]);
    let rows = qv_diagnostics(&batch);
    for (i, r) in rows.iter().enumerate() {
        qv.push(vec![r.t, (i % 4) as f64, r.mean, r.stderr, r.target]);
        if r.t == t_last && r.component != "total_over_beta_sq" {
            report.check(
                Check::absolute(
                    format!("qv_{}", r.component),
                    r.mean,
                    r.target,
                    p.qv_sigmas * r.stderr + 1e-12 * r.target.abs().max(1.0),
                )
                .with_note(format!("{} stderr band", p.qv_sigmas)),
            );
        }
        if r.t == t_last && r.component == "total_over_beta_sq" {
            report.note_number("qv_total_over_beta_sq", r.mean);
        }
    }
    report.note("qv_component_codes", ["diffusion", "branching", "immigration", "total_over_beta_sq"]);
    report.tables.push(qv);
    report.tables.push(super::checkpoint_table(&batch));
    report.check(Check::at_most("truncation_fraction", batch.truncation_fraction(), p.max_truncation));
    Ok(())
}
