//! One module per experiment. Each exposes a `Params` block whose defaults
//! are the tolerances and budgets the project ships with, and a `run`
//! function producing a [`Report`].

use std::fmt;

use anyhow::Context;
use cbi_core::Mechanisms;
use clap::ValueEnum;
use serde::de::DeserializeOwned;

use crate::config::ExperimentConfig;
use crate::report::Report;

pub mod clt;
pub mod ldp_tail;
pub mod lln;
pub mod mgf_check;
pub mod moment_check;
pub mod rate_curve;
pub mod riccati_diag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Lln,
    Clt,
    MgfCheck,
    RiccatiDiag,
    RateCurve,
    LdpTail,
    MomentCheck,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

impl Experiment {
    pub fn all() -> &'static [Experiment] {
        Self::value_variants()
    }
}

/// Decodes this experiment's sub-block of the `experiment` table; a missing
/// sub-block means all defaults.
pub fn params<T: DeserializeOwned + Default>(experiment: Experiment, table: &serde_json::Value) -> anyhow::Result<T> {
    let tag = experiment.to_string();
    match table.get(&tag) {
        None | Some(serde_json::Value::Null) => Ok(T::default()),
        Some(block) => serde_json::from_value(block.clone()).with_context(|| format!("invalid [experiment.{tag}] block")),
    }
}

fn validate_tags(table: &serde_json::Value) -> anyhow::Result<()> {
    match table {
        serde_json::Value::Null => Ok(()),
        serde_json::Value::Object(map) => {
            for key in map.keys() {
                if !Experiment::all().iter().any(|e| e.to_string() == *key) {
                    anyhow::bail!("unknown experiment `{key}` in the experiment table");
                }
            }
            Ok(())
        }
        _ => anyhow::bail!("the experiment table must map experiment names to blocks"),
    }
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<Report> {
    let mech = Mechanisms::new(cfg.model.clone()).context("invalid model block")?;
    let mut report = Report::new(&experiment.to_string(), cfg.hash(), seed, mech.to_string());
    let block = &cfg.experiment;
    validate_tags(block)?;
    let e = experiment;
    match experiment {
        Experiment::Lln => lln::run(&mech, &params(e, block)?, seed, &mut report)?,
        Experiment::Clt => clt::run(&mech, &params(e, block)?, seed, &mut report)?,
        Experiment::MgfCheck => mgf_check::run(&mech, &params(e, block)?, seed, &mut report)?,
        Experiment::RiccatiDiag => riccati_diag::run(&mech, &params(e, block)?, &mut report)?,
        Experiment::RateCurve => rate_curve::run(&mech, &params(e, block)?, &mut report)?,
        Experiment::LdpTail => ldp_tail::run(&mech, &params(e, block)?, seed, &mut report)?,
        Experiment::MomentCheck => moment_check::run(&mech, &params(e, block)?, seed, &mut report)?,
    }
    Ok(report)
}

/// Checkpoint table shared by the simulation experiments.
pub(crate) fn checkpoint_table(batch: &cbi_core::PathBatch) -> crate::report::Table {
    let mut table = crate::report::Table::new(
        "checkpoints",
        &["t", "mean_x", "mean_y", "var_y", "qv_diffusion", "qv_branching", "qv_immigration"],
    );
    for r in batch.checkpoint_table() {
        table.push(vec![r.t, r.mean_x, r.mean_y, r.var_y, r.qv_diffusion, r.qv_branching, r.qv_immigration]);
    }
    table
}
