use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use prominence_core::io::{
    estimate_kv_cache_mb, read_saliency, read_tokens, sub_seed, write_saliency, write_tokens,
};
use prominence_core::oracle::run_dpp_oracle;
use prominence_core::selection::{reduce_head_attention, AttentionReduction, HeadAttention};
use prominence_core::{
    allocate_budget, attention_entropy, compress_fixed, estimate_prefill_flops,
    feature_norm_entropy, spectral_entropy, synth_tokens, CompressConfig, DiversityMethod, Error,
    FpsStart, ModelCostSpec, Preset, SaliencyVector,
};

mod bench;

#[derive(Parser)]
#[command(
    name = "prominence",
    version,
    about = "Entropy-guided visual token selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of a token file (or of its saliency, for `attn`).
    Entropy(EntropyArgs),
    /// Spectral entropy and the resulting budget split.
    Allocate(AllocateArgs),
    /// Full adaptive compression.
    Compress(CompressArgs),
    /// Compression with a fixed saliency budget.
    CompressFixed(CompressFixedArgs),
    /// Cross-check the fast DPP greedy against naive and exhaustive search.
    Oracle(OracleArgs),
    /// Write synthetic token and saliency files.
    Synth(SynthArgs),
    /// Per-phase latency over an (N, d, T) grid.
    Bench(bench::BenchArgs),
    /// Prefill FLOPs and KV-cache size for a visual sequence length.
    Flops(FlopsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Spectral,
    Norm,
    Attn,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Clip,
    Qwen25vl,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Clip => Preset::Clip,
            PresetArg::Qwen25vl => Preset::Qwen25Vl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum DiversityArg {
    Dpp,
    Fps,
    Fl,
}

impl From<DiversityArg> for DiversityMethod {
    fn from(d: DiversityArg) -> Self {
        match d {
            DiversityArg::Dpp => DiversityMethod::Dpp,
            DiversityArg::Fps => DiversityMethod::Fps,
            DiversityArg::Fl => DiversityMethod::FacilityLocation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FpsStartArg {
    Lowest,
    Saliency,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttentionModeArg {
    /// Rows are per-head CLS-to-token attention.
    Cls,
    /// Rows are per-head mean attention received per token.
    Global,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long, value_enum, default_value = "spectral")]
    metric: MetricArg,
    /// Required for `--metric attn`.
    #[arg(long)]
    saliency: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cls")]
    attention_mode: AttentionModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long)]
    budget: usize,
    #[arg(long, value_enum, default_value = "clip")]
    preset: PresetArg,
    /// Overrides the preset midpoint.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    tau: f64,
}

impl BudgetArgs {
    fn config(&self) -> CompressConfig {
        let mut cfg = CompressConfig::new(self.budget, self.preset.into()).with_tau(self.tau);
        if let Some(mu) = self.mu {
            cfg = cfg.with_mu(mu);
        }
        cfg
    }
}

#[derive(Args)]
struct AllocateArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long)]
    saliency: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value = "dpp")]
    diversity: DiversityArg,
    #[arg(long, value_enum, default_value = "lowest")]
    fps_start: FpsStartArg,
    #[arg(long, value_enum, default_value = "cls")]
    attention_mode: AttentionModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CompressArgs {
    fn config(&self) -> CompressConfig {
        self.budget
            .config()
            .with_diversity(self.diversity.into())
            .with_fps_start(match self.fps_start {
                FpsStartArg::Lowest => FpsStart::LowestIndex,
                FpsStartArg::Saliency => FpsStart::HighestSaliency,
            })
    }
}

#[derive(Args)]
struct CompressFixedArgs {
    #[command(flatten)]
    inner: CompressArgs,
    #[arg(long)]
    t_sal_fixed: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 16)]
    max_n: usize,
    #[arg(long, default_value_t = 6)]
    max_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Number of equal-energy directions.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1e-3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of samples; sample `i` uses a seed derived from `--seed` and `i`.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Output token file (with `--count > 1`, `-<i>` is inserted before the extension).
    #[arg(long)]
    tokens: PathBuf,
    #[arg(long)]
    saliency: PathBuf,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long)]
    seq_visual: u64,
    /// Reference visual length for a reduction ratio.
    #[arg(long)]
    baseline: Option<u64>,
    #[arg(long)]
    text_tokens: Option<u64>,
    #[arg(long)]
    hidden_dim: Option<u64>,
    #[arg(long)]
    n_layers: Option<u64>,
    #[arg(long)]
    intermediate_dim: Option<u64>,
    #[arg(long)]
    n_params: Option<u64>,
    #[arg(long, default_value_t = 2)]
    kv_bytes: u64,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(&text, out)
}

fn load_saliency(path: &Path, mode: AttentionModeArg) -> Result<SaliencyVector, Error> {
    let heads: HeadAttention = read_saliency(path)?;
    let mode = match mode {
        AttentionModeArg::Cls => AttentionReduction::ClsRow,
        AttentionModeArg::Global => AttentionReduction::GlobalAverage,
    };
    reduce_head_attention(&heads, mode)
}

fn with_index(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{i}.{ext}"),
        None => format!("{stem}-{i}"),
    };
    path.with_file_name(name)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Entropy(a) => {
            let tokens = read_tokens(&a.tokens)?;
            let report = match a.metric {
                MetricArg::Spectral => spectral_entropy(&tokens)?,
                MetricArg::Norm => feature_norm_entropy(&tokens)?,
                MetricArg::Attn => {
                    let path = a.saliency.as_deref().ok_or_else(|| {
                        Error::InvalidInput("--metric attn requires --saliency".into())
                    })?;
                    let sal = load_saliency(path, a.attention_mode)?;
                    if sal.len() != tokens.n_tokens() {
                        return Err(Error::InvalidInput(
                            "saliency length does not match token count".into(),
                        ));
                    }
                    attention_entropy(&sal)?
                }
            };
            emit_json(&report, a.out.as_deref())?;
        }
        Command::Allocate(a) => {
            let tokens = read_tokens(&a.tokens)?;
            let cfg = a.budget.config();
            if cfg.total_budget > tokens.n_tokens() {
                return Err(Error::InvalidBudget(format!(
                    "budget {} exceeds the {} available tokens",
                    cfg.total_budget,
                    tokens.n_tokens()
                )));
            }
            let entropy = spectral_entropy(&tokens)?;
            let split = allocate_budget(entropy.normalized_entropy, &cfg)?;
            #[derive(Serialize)]
            struct Allocation {
                entropy: prominence_core::EntropyReport,
                split: prominence_core::BudgetSplit,
                mu: f64,
                tau: f64,
            }
            emit_json(
                &Allocation {
                    entropy,
                    split,
                    mu: cfg.mu,
                    tau: cfg.tau,
                },
                a.out.as_deref(),
            )?;
        }
        Command::Compress(a) => {
            let tokens = read_tokens(&a.tokens)?;
            let sal = load_saliency(&a.saliency, a.attention_mode)?;
            let (result, timings) = prominence_core::compress_timed(&tokens, &sal, &a.config())?;
            eprintln!(
                "timing entropy_us={} allocation_us={} stage1_us={} stage2_us={} total_us={}",
                timings.entropy.as_micros(),
                timings.allocation.as_micros(),
                timings.stage1.as_micros(),
                timings.stage2.as_micros(),
                timings.total.as_micros()
            );
            emit(&result.to_json()?, a.out.as_deref())?;
        }
        Command::CompressFixed(a) => {
            let inner = &a.inner;
            let tokens = read_tokens(&inner.tokens)?;
            let sal = load_saliency(&inner.saliency, inner.attention_mode)?;
            let cfg = inner.config();
            let result = compress_fixed(&tokens, &sal, a.t_sal_fixed, &cfg)?;
            emit(&result.to_json()?, inner.out.as_deref())?;
        }
        Command::Oracle(a) => {
            let summary = run_dpp_oracle(a.trials, a.max_n, a.max_k, a.seed)?;
            println!(
                "oracle trials={} naive_mismatches={} optimum_violations={} min_ratio={:.6} median_ratio={:.6}",
                summary.trials.len(),
                summary.mismatches(),
                summary.optimum_violations(),
                summary.min_ratio(),
                summary.median_ratio()
            );
            if summary.mismatches() > 0 || summary.optimum_violations() > 0 {
                eprintln!("error[oracle-violation]: greedy DPP disagreed with a reference");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Synth(a) => {
            for i in 0..a.count {
                let seed = if a.count == 1 {
                    a.seed
                } else {
                    sub_seed(a.seed, i as u64)
                };
                let (tokens, sal) = synth_tokens(a.n, a.d, a.k, a.noise, seed)?;
                let heads = HeadAttention::new(1, sal.len(), sal.scores().to_vec())?;
                let (tp, sp) = if a.count == 1 {
                    (a.tokens.clone(), a.saliency.clone())
                } else {
                    (with_index(&a.tokens, i), with_index(&a.saliency, i))
                };
                write_tokens(&tokens, &tp)?;
                write_saliency(&heads, &sp)?;
            }
        }
        Command::Bench(a) => bench::run(&a)?,
        Command::Flops(a) => {
            let mut spec = ModelCostSpec::llava_next_7b();
            spec.text_tokens = a.text_tokens.unwrap_or(spec.text_tokens);
            spec.hidden_dim = a.hidden_dim.unwrap_or(spec.hidden_dim);
            spec.n_layers = a.n_layers.unwrap_or(spec.n_layers);
            spec.intermediate_dim = a.intermediate_dim.unwrap_or(spec.intermediate_dim);
            spec.n_params = a.n_params.unwrap_or(spec.n_params);
            let flops = estimate_prefill_flops(a.seq_visual, &spec)?;
            #[derive(Serialize)]
            struct Cost {
                seq_visual: u64,
                flops: f64,
                tflops: f64,
                kv_cache_mb: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                baseline_tflops: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                flops_reduction: Option<f64>,
                model: ModelCostSpec,
            }
            let baseline = a
                .baseline
                .map(|b| estimate_prefill_flops(b, &spec))
                .transpose()?;
            emit_json(
                &Cost {
                    seq_visual: a.seq_visual,
                    flops,
                    tflops: flops / 1e12,
                    kv_cache_mb: estimate_kv_cache_mb(a.seq_visual, &spec, a.kv_bytes)?,
                    baseline_tflops: baseline.map(|b| b / 1e12),
                    flops_reduction: baseline.map(|b| 1.0 - flops / b),
                    model: spec,
                },
                None,
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) => 2,
        Error::DegenerateInput(_) => 3,
        Error::InvalidBudget(_) => 4,
        Error::Format(_) => 5,
        Error::InstanceTooLarge(_) => 6,
        Error::Io(_) => 7,
        Error::Numerical(_) | Error::Serde(_) => 8,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}
