//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary so the lines are never captured.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cbi_core::{LevyMeasure, Mechanisms, ModelParams, RiccatiProfile};
use cbi_lab::{run, Experiment, ExperimentConfig, Report};
use serde_json::json;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).expect("shipped config loads")
}

fn run_with(name: &str, experiment: Experiment, block: serde_json::Value, seed: u64) -> Report {
    let mut cfg = config(name);
    cfg.experiment = json!({ experiment.to_string(): block });
    run(experiment, &cfg, seed).unwrap_or_else(|e| panic!("{experiment} on {name}: {e:#}"))
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_reports<'a>(reports: impl IntoIterator<Item = (&'a str, &'a Report)>, filter: impl Fn(&str) -> bool) -> Self {
        let mut passed = true;
        let mut failures = Vec::new();
        let mut count = 0;
        for (label, report) in reports {
            for c in report.checks.iter().filter(|c| filter(&c.name)) {
                count += 1;
                if !c.passed {
                    passed = false;
                    failures.push(format!("{label}/{} = {} vs {} (tol {})", c.name, c.value, c.target, c.tolerance));
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("{count} checks")
        } else {
            format!("{count} checks; failed: {}", failures.join("; "))
        };
        Self { passed: passed && count > 0, detail }
    }
}

fn criterion(number: u32, title: &str, budget: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let passed = outcome.passed && in_time;
    println!(
        "criterion {number} [{title}]: {} ({}; {:.1}s of {:.0}s budget{})",
        if passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    passed
}

fn cir_closed_forms() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: String, ok: bool| {
        if !ok {
            failures.push(name);
        }
    };
    let mech = Mechanisms::<f64>::diffusion(1.0, -1.0, 2f64.sqrt()).unwrap();
    let p = RiccatiProfile::new(mech).unwrap();
    check(format!("u_c = {}", p.u_c()), (p.u_c() - 0.5).abs() < 1e-10);
    check(format!("lambda_R = {}", p.lambda_r()), (p.lambda_r() - 0.25).abs() < 1e-10);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let lambda = -5.0 + 5.25 * i as f64 / 49.0;
        let closed = 0.5 - (0.5 - 2.0 * lambda).sqrt() / 2f64.sqrt();
        worst = worst.max((p.resolvent_root(lambda).unwrap() - closed).abs());
    }
    check(format!("max |y - closed form| = {worst:e}"), worst < 1e-8);
    let with_nu = Mechanisms::new(ModelParams {
        b: 1.0,
        beta: -1.0,
        sigma: 2f64.sqrt(),
        nu: LevyMeasure::tempered_power_law(1.0, 0.25, 1.5, 1.0),
        mu: LevyMeasure::Zero,
    })
    .unwrap();
    let lc = RiccatiProfile::new(with_nu).unwrap().lambda_c();
    check(format!("lambda_c = {lc}"), (lc - 0.1875).abs() < 1e-10);
    let passed = failures.is_empty();
    Outcome {
        passed,
        detail: if passed {
            format!("u_c, lambda_R, 50-point y grid (max err {worst:.1e}), lambda_c")
        } else {
            format!("failed: {}", failures.join("; "))
        },
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;

    all &= criterion(1, "CIR closed forms", secs(1), cir_closed_forms);

    let riccati_models = ["cir_unit.toml", "atom_jumps.toml", "tempered_jumps.toml", "tempered_branching.toml"];
    let mut riccati_reports = Vec::new();
    all &= criterion(2, "Riccati asymptotics", secs(10), || {
        riccati_reports = riccati_models
            .iter()
            .map(|m| (*m, run_with(m, Experiment::RiccatiDiag, json!(null), 0)))
            .collect();
        Outcome::from_reports(riccati_reports.iter().map(|(m, r)| (*m, r)), |n| {
            n.starts_with("limit_") || n.starts_with("tables_")
        })
    });
    all &= criterion(3, "explosion consistency", secs(10), || {
        Outcome::from_reports(riccati_reports.iter().map(|(m, r)| (*m, r)), |n| n.starts_with("blowup"))
    });

    all &= criterion(4, "MGF cross-validation", secs(600), || {
        let reports: Vec<_> = [
            ("cir.toml", json!({})),
            ("atom_jumps.toml", json!({})),
            ("tempered_jumps.toml", json!({ "epsilon": 0.05 })),
        ]
        .into_iter()
        .map(|(m, block)| (m, run_with(m, Experiment::MgfCheck, block, 4)))
        .collect();
        Outcome::from_reports(reports.iter().map(|(m, r)| (*m, r)), |n| n.starts_with("log_mgf"))
    });

    all &= criterion(5, "rate function", secs(120), || {
        let models = [
            "cir.toml",
            "cir_unit.toml",
            "atom_jumps.toml",
            "tempered_jumps.toml",
            "tempered_branching.toml",
            "ou_eta15.toml",
            "ou_eta20.toml",
            "ou_eta25.toml",
            "f_zero.toml",
        ];
        let reports: Vec<_> = models
            .iter()
            .map(|m| (*m, run_with(m, Experiment::RateCurve, json!(null), 0)))
            .collect();
        Outcome::from_reports(reports.iter().map(|(m, r)| (*m, r)), |n| n != "regime")
    });

    all &= criterion(6, "LLN", secs(300), || {
        let report = run_with("cir.toml", Experiment::Lln, json!(null), 6);
        Outcome::from_reports([("cir.toml", &report)], |n| !n.starts_with("truncation"))
    });

    all &= criterion(7, "CLT", secs(600), || {
        let report = run_with("cir.toml", Experiment::Clt, json!({ "scheme": "exact_cir" }), 7);
        Outcome::from_reports([("cir.toml", &report)], |n| n.starts_with("var_s") || n.starts_with("qv_"))
    });

    all &= criterion(8, "LDP tail", secs(1200), || {
        let cir = run_with("cir.toml", Experiment::LdpTail, json!(null), 8);
        let f0 = run_with("f_zero.toml", Experiment::LdpTail, json!({ "threshold": 0.5, "x0": 1.0 }), 8);
        Outcome::from_reports([("cir.toml", &cir), ("f_zero.toml", &f0)], |n| {
            n == "slope" || n.starts_with("exponent")
        })
    });

    all &= criterion(9, "regime classification", secs(60), || {
        let reports: Vec<_> = [
            ("ou_eta15.toml", "FullLDP"),
            ("ou_eta20.toml", "FullLDP"),
            ("ou_eta25.toml", "BoundedLowerLDP"),
        ]
        .into_iter()
        .map(|(m, regime)| (m, run_with(m, Experiment::RateCurve, json!({ "expect_regime": regime }), 0)))
        .collect();
        Outcome::from_reports(reports.iter().map(|(m, r)| (*m, r)), |n| n == "regime")
    });

    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
