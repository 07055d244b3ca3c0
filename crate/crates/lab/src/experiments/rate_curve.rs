//! Rate-function table, regime tag and the cross-checks of the optimizer:
//! zero exactly at `m`, a brute-force grid search, and Legendre duality.

use cbi_core::{Mechanisms, RateFunction, Regime, RiccatiProfile};
use serde::Deserialize;

use crate::report::{Check, Report, Table};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub points_per_side: usize,
    pub oracle_points: usize,
    pub offsets: Vec<f64>,
    pub zero_tol: f64,
    pub oracle_tol: f64,
    pub duality_tol: f64,
    pub expect_regime: Option<String>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            points_per_side: 40,
            oracle_points: 30,
            offsets: vec![0.01, 0.1],
            zero_tol: 1e-8,
            oracle_tol: 1e-8,
            duality_tol: 1e-8,
            expect_regime: None,
        }
    }
}

pub fn regime_tag(r: Regime) -> &'static str {
    match r {
        Regime::FullLdp => "FullLDP",
        Regime::BoundedLowerLdp => "BoundedLowerLDP",
        Regime::DegenerateF0 => "DegenerateF0",
    }
}

/// `sup_{lo <= y <= hi} (-R(y) x - F(y))` by a uniform grid followed by a
/// golden-section search around the best node. The lower end is pushed
/// out while the best node sits on it.
pub fn brute_force_rate(mech: &Mechanisms<f64>, x: f64, y_hi: f64) -> f64 {
    let psi = |y: f64| {
        let f = mech.f_eval(y, 0);
        if f.is_nan() || f == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        -mech.r_eval(y, 0) * x - f
    };
    const NODES: usize = 20_000;
    let mut lo = -50.0;
    loop {
        let h = (y_hi - lo) / NODES as f64;
        let (best, _) = (0..=NODES)
            .map(|i| (i, psi(lo + i as f64 * h)))
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if best == 0 && lo > -1e6 {
            lo *= 8.0;
            continue;
        }
        let a = lo + best.saturating_sub(1) as f64 * h;
        let b = (lo + (best + 1) as f64 * h).min(y_hi);
        return golden_max(psi, a, b);
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(a).max(f(b)).max(fc).max(fd)
}

pub fn run(mech: &Mechanisms<f64>, p: &Params, report: &mut Report) -> anyhow::Result<()> {
    let rf = RateFunction::new(RiccatiProfile::new(mech.clone())?)?;
    let summary = rf.summary();
    report.note("rate_summary", summary);
    report.note("regime", regime_tag(rf.regime()));
    if let Ok((curv, target)) = rf.curvature_at_mean() {
        report.note_number("curvature_at_mean", curv);
        report.note_number("inverse_rho_sq", target);
    }
    if !rf.slope_sequence().is_empty() {
        report.note("slope_sequence", rf.slope_sequence().iter().map(|(l, g)| [*l, *g]).collect::<Vec<_>>());
    }

    let mut table = Table::new("rate", &["x", "y_star", "lambda_star", "rate", "upper_bound_only"]);
    let points = rf.table(p.points_per_side)?;
    for pt in &points {
        table.push(vec![pt.x, pt.y_star, pt.lambda_star, pt.rate, f64::from(u8::from(pt.upper_bound_only))]);
    }
    report.tables.push(table);

    let m = rf.mean();
    report.check(Check::at_most("rate_at_mean", rf.rate_function(m)?.abs(), p.zero_tol));
    for &eps in &p.offsets {
        for x in [m - eps, m + eps] {
            if x >= 0.0 {
                let v = rf.rate_function(x)?;
                report.check(Check::flag(format!("positive_at_x{x:.4}"), v > 0.0, format!("rate = {v:e}")));
            }
        }
    }

    // oracle grid on (0.2 m, 3 m), or (0.05, 1.5) when m = 0
    let (x_lo, x_hi) = if m > 0.0 { (0.2 * m, 3.0 * m) } else { (0.05, 1.5) };
    let y_hi = rf.profile().y_c().min(50.0);
    let mut oracle = Table::new("oracle", &["x", "rate", "brute_force", "abs_diff"]);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for i in 0..p.oracle_points {
        let x = x_lo + (x_hi - x_lo) * i as f64 / (p.oracle_points - 1).max(1) as f64;
        let v = rf.rate_function(x)?;
        if !v.is_finite() {
            continue;
        }
        let bf = brute_force_rate(mech, x, y_hi);
        let diff = (v - bf).abs() / v.abs().max(1.0);
        worst = worst.max(diff);
        compared += 1;
        oracle.push(vec![x, v, bf, (v - bf).abs()]);
    }
    report.tables.push(oracle);
    report.note("oracle_points_compared", compared);
    report.check(Check::at_most("brute_force_max_diff", worst, p.oracle_tol));

    if rf.regime() != Regime::DegenerateF0 {
        let mut residual: f64 = 0.0;
        for pt in points.iter().filter(|pt| pt.rate.is_finite() && !pt.upper_bound_only && pt.x > 0.0) {
            if pt.lambda_star >= rf.profile().lambda_c() {
                continue;
            }
            let big_lambda = rf.profile().limit_mgf(pt.lambda_star)?;
            let r = (pt.rate + big_lambda - pt.lambda_star * pt.x).abs() / pt.rate.abs().max(1.0);
            residual = residual.max(r);
        }
        report.check(Check::at_most("legendre_duality_residual", residual, p.duality_tol));
    }

    if let Some(expect) = &p.expect_regime {
        let got = regime_tag(rf.regime());
        report.check(Check::flag("regime", got == expect, format!("expected {expect}, got {got}")));
    }
    Ok(())
}
