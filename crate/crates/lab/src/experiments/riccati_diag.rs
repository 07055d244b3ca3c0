//! Riccati flow on a `λ` grid: convergence to `y(λ)` and the sign and
//! monotonicity tables below `λ_R`, blow-up times above it.

use cbi_core::{Mechanisms, RiccatiProfile, RiccatiStatus};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Subcritical grid as multiples of `λ_R` (absolute values when `λ_R` is infinite).
    pub lambda_fractions: Vec<f64>,
    /// Supercritical grid as offsets above `λ_R`.
    pub explode_offsets: Vec<f64>,
    pub limit_tol: f64,
    pub blowup_tol_finite: f64,
    pub blowup_tol_infinite: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda_fractions: vec![-2.0, -0.5, 0.3, 0.8, 1.0],
            explode_offsets: vec![0.05, 0.5, 2.0],
            limit_tol: 1e-6,
            blowup_tol_finite: 1e-4,
            blowup_tol_infinite: 1e-3,
        }
    }
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, report: &mut Report) -> anyhow::Result<()> {
    let profile = RiccatiProfile::new(mech.clone())?;
    let summary = profile.summary();
    report.note("profile", summary);
    let lambda_r = profile.lambda_r();
    let gamma_r = mech.gamma_r();

    let mut limits = Table::new("limits", &["lambda", "y", "t_end", "a_t_end", "abs_error", "violations"]);
    for &frac in &p.lambda_fractions {
        let lambda = if lambda_r.is_finite() { frac * lambda_r } else { frac };
        let y = profile.resolvent_root(lambda)?;
        // an order of magnitude below the tolerance leaves room for the solver
        let t_end = profile.suggested_horizon(lambda, p.limit_tol * 0.1)?;
        let sol = profile.solve_a(lambda, t_end)?;
        let a = sol.eval(t_end);
        let violations = sol.invariant_violations(gamma_r);
        limits.push(vec![lambda, y, t_end, a, (a - y).abs(), violations.len() as f64]);
        report.check(Check::absolute(format!("limit_lambda{lambda:.6}"), a, y, p.limit_tol));
        report.check(Check::flag(
            format!("tables_lambda{lambda:.6}"),
            violations.is_empty(),
            violations.first().cloned().unwrap_or_default(),
        ));
    }
    report.tables.push(limits);

    if lambda_r.is_finite() {
        let mut blow = Table::new("explosions", &["lambda", "t_quadrature", "t_ode", "rel_error", "bound"]);
        let tol = if gamma_r.is_finite() {
            p.blowup_tol_finite
        } else {
            p.blowup_tol_infinite
        };
        for &offset in &p.explode_offsets {
            let lambda = lambda_r + offset;
            let t_quad = profile.explosion_time(lambda)?;
            let sol = profile.solve_a(lambda, 1.0)?;
            let RiccatiStatus::Exploding { t_lambda, .. } = sol.status else {
                anyhow::bail!("no blow-up detected at λ = {lambda}");
            };
            let bound = gamma_r / (lambda - lambda_r);
            blow.push(vec![lambda, t_quad, t_lambda, (t_lambda / t_quad - 1.0).abs(), bound]);
            report.check(Check::relative(format!("blowup_lambda{lambda:.6}"), t_lambda, t_quad, tol));
            report.check(Check::at_most(format!("blowup_bound_lambda{lambda:.6}"), t_quad, bound));
        }
        report.tables.push(blow);
    }
    Ok(())
}
