//! Tail probabilities `P[Y_t >= a]` by exponentially tilted Monte Carlo.
//!
//! With a rate function available the tilt is the maximizer `y*(a)` and the
//! decay rate is read off as the least-squares slope of `log p_t` in `t`; the
//! slope is insensitive to the polynomial prefactor that biases
//! `(1/t) log p_t` at moderate `t`. When `F ≡ 0` only the upper bound
//! `-λ_c a` is available and `(1/t) log p_t` is compared against it.

use anyhow::bail;
use cbi_core::numerics::root::{brent, RootConfig};
use cbi_core::{simulate_batch, stats, Error, Mechanisms, PathBatch, PathConfig, RateFunction, Regime, RiccatiProfile};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Threshold `a = m + delta` unless `threshold` is set.
    pub delta: f64,
    pub threshold: Option<f64>,
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub epsilon: f64,
    pub x0: Option<f64>,
    pub rel_tol: f64,
    /// Tilts with `λ* >= λ_c - margin` are refused.
    pub margin: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: 0.25,
            threshold: None,
            times: vec![25.0, 50.0, 75.0, 100.0],
            n_paths: 100_000,
            dt: 0.01,
            epsilon: 1e-3,
            x0: None,
            rel_tol: 0.2,
            margin: 1e-3,
        }
    }
}

/// `(log p_t, stderr of log p_t)` at every checkpoint.
fn tail_estimates(batch: &PathBatch, a: f64) -> Vec<(f64, f64)> {
    (0..batch.checkpoints.len())
        .map(|k| {
            let w = batch.log_weight_at(k);
            let logs: Vec<f64> = batch
                .y_at(k)
                .iter()
                .zip(&w)
                .map(|(&y, &lw)| if y >= a { lw } else { f64::NEG_INFINITY })
                .collect();
            stats::log_mean_exp(&logs)
        })
        .collect()
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    anyhow::ensure!(!p.times.is_empty(), "times must be nonempty");
    let rf = RateFunction::new(RiccatiProfile::new(mech.clone())?)?;
    let m = rf.mean();
    let a = p.threshold.unwrap_or(m + p.delta);
    let lambda_c = rf.profile().lambda_c();
    let t_end = p.times.iter().copied().fold(0.0, f64::max);
    let x0 = p.x0.unwrap_or(if m > 0.0 { m } else { 1.0 });
    report.note_number("m", m);
    report.note_number("threshold", a);
    report.note_number("lambda_c", lambda_c);

    let degenerate = rf.regime() == Regime::DegenerateF0;
    let (tilt, target) = if degenerate {
        // the cheapest way to keep ∫X ≈ a t is a slowed-down decay from x0:
        // drift R'(y) X with R'(y) = -x0 / (a t)
        let mech_ref = rf.profile().mechanisms();
        let slope = -x0 / (a * t_end);
        let u_c = rf.profile().u_c().min(50.0);
        let y = brent(|y| mech_ref.r_eval(y, 1) - slope, 0.0, u_c, &RootConfig::default())?.x;
        (y, -lambda_c * a)
    } else {
        let pt = rf.evaluate(a)?;
        if pt.lambda_star >= lambda_c - p.margin || !pt.y_star.is_finite() {
            return Err(Error::TiltUnavailable(format!(
                "λ*({a}) = {} is within {} of λ_c = {lambda_c}",
                pt.lambda_star, p.margin
            ))
            .into());
        }
        report.note_number("lambda_star", pt.lambda_star);
        (pt.y_star, -pt.rate)
    };
    report.note_number("tilt", tilt);
    report.note_number("target_exponent", target);

    let mut cfg = PathConfig::new(x0, t_end, p.dt)
        .with_seed(seed)
        .with_epsilon(p.epsilon)
        .with_checkpoints(p.times.clone());
    if tilt != 0.0 {
        cfg = cfg.with_tilt(tilt);
    }
    let batch = simulate_batch(mech, &cfg, p.n_paths)?;
    let est = tail_estimates(&batch, a);

    let mut table = Table::new("tail", &["t", "log_p", "stderr_log_p", "exponent", "target"]);
    for (&t, &(lp, se)) in batch.checkpoints.iter().zip(&est) {
        table.push(vec![t, lp, se, lp / t, target]);
    }
    report.tables.push(table);
    if est.iter().any(|(lp, _)| !lp.is_finite()) {
        bail!("no tilted path reached the threshold; increase n_paths");
    }

    let last = batch.checkpoints.len() - 1;
    let raw = est[last].0 / batch.checkpoints[last];
    report.note_number("raw_exponent_at_t_end", raw);
    if degenerate {
        // upper bound with the relative slack in the conservative direction
        let bound = target * (1.0 - p.rel_tol);
        report.check(Check::at_most(format!("exponent_at_t{t_end}"), raw, bound));
        return Ok(());
    }
    let ts = &batch.checkpoints;
    let logs: Vec<f64> = est.iter().map(|e| e.0).collect();
    let slope = if ts.len() >= 2 { stats::least_squares(ts, &logs).0 } else { raw };
    report.note_number("slope", slope);
    if target == 0.0 {
        report.check(Check::absolute("slope", slope, 0.0, p.rel_tol * 0.05));
    } else {
        report.check(Check::relative("slope", slope, target, p.rel_tol));
    }
    Ok(())
}
