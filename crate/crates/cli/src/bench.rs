//! Latency harness over a grid of synthetic inputs.

use std::time::Duration;

use clap::Args;
use serde::Serialize;

use prominence_core::io::sub_seed;
use prominence_core::{compress_timed, synth_tokens, CompressConfig, Error, PhaseTimings, Preset};

use crate::DiversityArg;

#[derive(Args)]
pub(crate) struct BenchArgs {
    /// Token counts.
    #[arg(long, value_delimiter = ',', default_value = "576,2880")]
    n: Vec<usize>,
    /// Feature dimensions.
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    d: Vec<usize>,
    /// Token budgets; combinations with budget > n are skipped.
    #[arg(long, value_delimiter = ',', default_value = "64,320")]
    budget: Vec<usize>,
    /// Equal-energy directions in the synthetic data; 0 means min(n, d).
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 1e-3)]
    noise: f64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, value_enum, default_value = "dpp")]
    diversity: DiversityArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Serialize)]
pub(crate) struct Percentiles {
    pub p50_us: f64,
    pub p90_us: f64,
    pub max_us: f64,
}

#[derive(Debug, Serialize)]
pub(crate) struct PhaseReport {
    pub entropy: Percentiles,
    pub allocation: Percentiles,
    pub stage1: Percentiles,
    pub stage2: Percentiles,
    pub total: Percentiles,
    pub diagnostics: Percentiles,
}

#[derive(Debug, Serialize)]
pub(crate) struct CellReport {
    pub n: usize,
    pub d: usize,
    pub budget: usize,
    pub reps: usize,
    pub t_sal: usize,
    pub t_cov: usize,
    pub phases: PhaseReport,
    /// Mean over runs of (entropy + allocation + stage1 + stage2) / total.
    pub phase_sum_ratio: f64,
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn summarize(samples: impl Iterator<Item = Duration>) -> Percentiles {
    let mut us: Vec<f64> = samples.map(|d| d.as_secs_f64() * 1e6).collect();
    us.sort_by(f64::total_cmp);
    Percentiles {
        p50_us: percentile(&us, 0.5),
        p90_us: percentile(&us, 0.9),
        max_us: *us.last().expect("at least one rep"),
    }
}

pub(crate) fn run(args: &BenchArgs) -> Result<(), Error> {
    if args.reps == 0 {
        return Err(Error::InvalidInput("--reps must be at least 1".into()));
    }
    let mut cell = 0u64;
    for &n in &args.n {
        for &d in &args.d {
            for &budget in &args.budget {
                if budget > n {
                    continue;
                }
                let k = if args.k == 0 { n.min(d) } else { args.k };
                let cfg =
                    CompressConfig::new(budget, Preset::Clip).with_diversity(args.diversity.into());
                let mut runs: Vec<PhaseTimings> = Vec::with_capacity(args.reps);
                let mut last_split = (0, 0);
                for rep in 0..args.reps {
                    let seed = sub_seed(args.seed, cell * 1_000_003 + rep as u64);
                    let (tokens, sal) = synth_tokens(n, d, k, args.noise, seed)?;
                    let (result, timings) = compress_timed(&tokens, &sal, &cfg)?;
                    last_split = (result.split.t_sal, result.split.t_cov);
                    runs.push(timings);
                }
                let ratio = runs
                    .iter()
                    .map(|t| {
                        (t.entropy + t.allocation + t.stage1 + t.stage2).as_secs_f64()
                            / t.total.as_secs_f64()
                    })
                    .sum::<f64>()
                    / runs.len() as f64;
                let report = CellReport {
                    n,
                    d,
                    budget,
                    reps: args.reps,
                    t_sal: last_split.0,
                    t_cov: last_split.1,
                    phases: PhaseReport {
                        entropy: summarize(runs.iter().map(|t| t.entropy)),
                        allocation: summarize(runs.iter().map(|t| t.allocation)),
                        stage1: summarize(runs.iter().map(|t| t.stage1)),
                        stage2: summarize(runs.iter().map(|t| t.stage2)),
                        total: summarize(runs.iter().map(|t| t.total)),
                        diagnostics: summarize(runs.iter().map(|t| t.diagnostics)),
                    },
                    phase_sum_ratio: ratio,
                };
                println!("{}", serde_json::to_string(&report)?);
                cell += 1;
            }
        }
    }
    Ok(())
}
