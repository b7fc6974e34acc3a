//! Scripted studies. Each takes an [`ExperimentConfig`] and returns an
//! [`ExperimentReport`]: a CSV-ready table plus verdict rows. Results are a
//! pure function of the config, seeds included.

mod config;
mod delta_h;
mod moments;
mod output;
mod temperature;

pub use config::{ExperimentConfig, EXPERIMENTS};
pub use delta_h::{delta_h_profile, delta_h_study, DeltaHProfile};
pub use moments::{
    avg_abs_gap, avg_moment, avg_signed_gap, clique_counterexample, clique_model, envelopes, expander_model, jackknife,
    moment_comparison, naive_envelope_from_skl, naive_vs_stein, subset_means, Model, MomentGapResult,
};
pub use output::{Cell, ExperimentReport, Table};
pub use temperature::{concentration_check, correlation_sum, dobrushin_perturbation, high_temperature_scan};

use crate::error::{Error, Result};

/// Run the study named by `cfg.name`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.name.as_str() {
        "moment_comparison" => moment_comparison(cfg),
        "clique_counterexample" => clique_counterexample(cfg),
        "high_temperature_scan" => high_temperature_scan(cfg),
        "dobrushin_perturbation" => dobrushin_perturbation(cfg),
        "concentration_check" => concentration_check(cfg),
        "naive_vs_stein" => naive_vs_stein(cfg),
        "delta_h_study" => delta_h_study(cfg),
        other => Err(Error::Config(format!("unknown experiment `{other}`"))),
    }
}
