//! Scheme × offered-load sweep producing one CSV table: the comparison grid
//! behind the dropping / forced-termination / utilization curves.

use std::fmt::Write as _;

use crate::config::effective_config_lines;
use crate::error::Error;
use crate::metrics::{aggregate, MetricStat};
use crate::model::{Bandwidth, Scheme, SchemeConfig};
use crate::sim::{replicate, RunSpec};
use crate::traffic::TrafficRates;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Total new-call arrival rates (calls/s), strictly increasing.
    pub lambda_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// Independent replications per (scheme, λ) cell.
    pub replications: usize,
    pub base_seed: u64,
    pub horizon_s: f64,
    pub warmup_s: f64,
}

impl Default for SweepSpec {
    fn default() -> SweepSpec {
        SweepSpec {
            lambda_values: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            schemes: vec![
                Scheme::Proposed,
                Scheme::FixedMbs {
                    reserved_kbps: Bandwidth(6_000),
                },
                Scheme::FixedMbs {
                    reserved_kbps: Bandwidth(14_000),
                },
            ],
            replications: 10,
            base_seed: 1,
            horizon_s: 200_000.0,
            warmup_s: 20_000.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.lambda_values.is_empty() {
            return Err(Error::config("sweep.lambda", "need at least one arrival rate"));
        }
        if let Some(&bad) = self
            .lambda_values
            .iter()
            .find(|l| !l.is_finite() || **l <= 0.0)
        {
            return Err(Error::config(
                "sweep.lambda",
                format!("rate {bad} must be positive and finite"),
            ));
        }
        if self.lambda_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "sweep.lambda",
                "rates must be strictly increasing",
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("sweep.schemes", "need at least one scheme"));
        }
        if self.replications == 0 {
            return Err(Error::config(
                "sweep.replications",
                "need at least one replication",
            ));
        }
        if !self.horizon_s.is_finite() || self.horizon_s <= 0.0 {
            return Err(Error::config("sim.horizon_s", "horizon must be positive"));
        }
        if !self.warmup_s.is_finite() || self.warmup_s < 0.0 || self.warmup_s >= self.horizon_s {
            return Err(Error::config(
                "sim.warmup_s",
                "warmup must lie in [0, horizon)",
            ));
        }
        Ok(())
    }

    /// Seeds for the `lambda_idx`-th load point: a block of `replications`
    /// consecutive seeds starting at `base_seed`. Blocks are disjoint across
    /// load points but deliberately shared across schemes, so scheme
    /// comparisons at equal load are paired on identical traffic (common
    /// random numbers).
    pub fn seeds_for(&self, lambda_idx: usize) -> Vec<u64> {
        let start = self.base_seed + (lambda_idx * self.replications) as u64;
        (0..self.replications as u64).map(|r| start + r).collect()
    }
}

fn prob_cell(stat: &MetricStat) -> String {
    format!("{:.6}", stat.mean)
}

fn ci_cell(stat: &MetricStat) -> String {
    stat.ci_half_width
        .map(|h| format!("{h:.6}"))
        .unwrap_or_default()
}

pub const CSV_HEADER: &str = "scheme,lambda_total,p_block_voice,p_block_unicast,p_block_background,p_drop,p_drop_ci,p_forced,p_forced_ci,p_forced_alt,utilization,replications,seed_base";

/// Runs the full grid and renders the CSV (comment block with the effective
/// config, one header line, one data row per (scheme, λ) in scheme-major
/// order). Pure function of its inputs: same arguments, same bytes, whether
/// replications execute in parallel or not.
pub fn run_sweep(
    config: &SchemeConfig,
    rates: &TrafficRates,
    sweep: &SweepSpec,
    parallel: bool,
) -> Result<String, Error> {
    config.validate()?;
    rates.validate()?;
    sweep.validate()?;
    // Fail before burning simulation time if any scheme in the list is
    // infeasible for this cell (e.g. a fixed reserve below the session floor).
    for scheme in &sweep.schemes {
        SchemeConfig {
            scheme: *scheme,
            ..config.clone()
        }
        .validate()?;
    }

    let mut out = String::new();
    let _ = writeln!(out, "# bandsim v{}", env!("CARGO_PKG_VERSION"));
    for line in effective_config_lines(config, rates, sweep) {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');

    for scheme in &sweep.schemes {
        for (lambda_idx, &lambda) in sweep.lambda_values.iter().enumerate() {
            let seeds = sweep.seeds_for(lambda_idx);
            let spec = RunSpec {
                config: SchemeConfig {
                    scheme: *scheme,
                    ..config.clone()
                },
                rates: TrafficRates {
                    total_new_rate: lambda,
                    ..rates.clone()
                },
                horizon_s: sweep.horizon_s,
                warmup_s: sweep.warmup_s,
                seed: seeds[0],
                check_invariants: false,
            };
            let records = replicate(&spec, &seeds, parallel)?;
            let summary = aggregate(&records)?;
            let _ = writeln!(
                out,
                "{scheme},{lambda},{},{},{},{},{},{},{},{},{},{},{}",
                prob_cell(&summary.p_block_voice),
                prob_cell(&summary.p_block_unicast),
                prob_cell(&summary.p_block_background),
                prob_cell(&summary.p_drop),
                ci_cell(&summary.p_drop),
                prob_cell(&summary.p_forced),
                ci_cell(&summary.p_forced),
                prob_cell(&summary.p_forced_alt),
                prob_cell(&summary.utilization),
                summary.replications,
                seeds[0],
            );
        }
    }
    Ok(out)
}
