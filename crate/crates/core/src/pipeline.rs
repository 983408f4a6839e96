//! End-to-end compression: entropy, budget split, saliency top-k, then
//! diversity completion over the remaining tokens.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::budget::{allocate_budget, fixed_split, BudgetSplit, CompressConfig, DiversityMethod};
use crate::error::{Error, Result};
use crate::prominence::{spectral_entropy, EntropyMetric, EntropyReport};
use crate::selection::{
    cosine_kernel, dpp_greedy_map, facility_location_select, fps_select,
    min_pairwise_cosine_distance, saliency_topk, DiversityContext, IndexSet, SaliencyVector,
    DPP_JITTER,
};
use crate::tensor::TokenMatrix;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Saliency,
    Coverage,
}

/// Output of one compression run. `selected` is ascending (spatial order);
/// `stage_of[i]` tags `selected[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: IndexSet,
    pub stage_of: Vec<Stage>,
    /// Coverage tokens in the order the diversity selector chose them.
    pub coverage_pick_order: Vec<usize>,
    pub split: BudgetSplit,
    pub entropy: EntropyReport,
    pub diagnostics: BTreeMap<String, f64>,
}

impl SelectionResult {
    pub fn indices_with(&self, stage: Stage) -> Vec<usize> {
        self.selected
            .iter()
            .zip(&self.stage_of)
            .filter(|(_, s)| **s == stage)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&Document::from(self.clone()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Wall-clock time per phase. Never serialized with the result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub entropy: Duration,
    pub allocation: Duration,
    pub stage1: Duration,
    pub stage2: Duration,
    /// Entropy through the merged selection.
    pub total: Duration,
    /// Post-selection quality diagnostics, outside `total`.
    pub diagnostics: Duration,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema: u32,
    selected: Vec<usize>,
    stage_of: Vec<Stage>,
    coverage_pick_order: Vec<usize>,
    t_sal: usize,
    t_cov: usize,
    coverage_ratio: f64,
    normalized_entropy: f64,
    raw_entropy: f64,
    entropy_metric: EntropyMetric,
    entropy_normalizer: f64,
    diagnostics: BTreeMap<String, f64>,
}

impl From<SelectionResult> for Document {
    fn from(r: SelectionResult) -> Self {
        Document {
            schema: SCHEMA_VERSION,
            selected: r.selected.into(),
            stage_of: r.stage_of,
            coverage_pick_order: r.coverage_pick_order,
            t_sal: r.split.t_sal,
            t_cov: r.split.t_cov,
            coverage_ratio: r.split.coverage_ratio,
            normalized_entropy: r.split.normalized_entropy,
            raw_entropy: r.entropy.raw_entropy,
            entropy_metric: r.entropy.metric,
            entropy_normalizer: r.entropy.normalizer,
            diagnostics: r.diagnostics,
        }
    }
}

impl TryFrom<Document> for SelectionResult {
    type Error = Error;

    fn try_from(d: Document) -> Result<Self> {
        if d.schema != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema version {}",
                d.schema
            )));
        }
        if d.stage_of.len() != d.selected.len() || d.t_sal + d.t_cov != d.selected.len() {
            return Err(Error::invalid("selection document sizes are inconsistent"));
        }
        let entropy = EntropyReport {
            raw_entropy: d.raw_entropy,
            normalized_entropy: d.normalized_entropy,
            metric: d.entropy_metric,
            normalizer: d.entropy_normalizer,
        };
        Ok(SelectionResult {
            selected: IndexSet::new(d.selected)?,
            stage_of: d.stage_of,
            coverage_pick_order: d.coverage_pick_order,
            split: BudgetSplit {
                t_sal: d.t_sal,
                t_cov: d.t_cov,
                normalized_entropy: d.normalized_entropy,
                coverage_ratio: d.coverage_ratio,
            },
            entropy,
            diagnostics: d.diagnostics,
        })
    }
}

fn validate_inputs(
    tokens: &TokenMatrix,
    saliency: &SaliencyVector,
    config: &CompressConfig,
) -> Result<()> {
    config.validate()?;
    if saliency.len() != tokens.n_tokens() {
        return Err(Error::invalid(format!(
            "saliency has {} entries for {} tokens",
            saliency.len(),
            tokens.n_tokens()
        )));
    }
    if config.total_budget > tokens.n_tokens() {
        return Err(Error::budget(format!(
            "budget {} exceeds the {} available tokens",
            config.total_budget,
            tokens.n_tokens()
        )));
    }
    Ok(())
}

/// Full adaptive compression.
pub fn compress(
    tokens: &TokenMatrix,
    saliency: &SaliencyVector,
    config: &CompressConfig,
) -> Result<SelectionResult> {
    compress_timed(tokens, saliency, config).map(|(r, _)| r)
}

pub fn compress_timed(
    tokens: &TokenMatrix,
    saliency: &SaliencyVector,
    config: &CompressConfig,
) -> Result<(SelectionResult, PhaseTimings)> {
    run(tokens, saliency, config, None)
}

/// Compression with the saliency share pinned to `t_sal_fixed`.
pub fn compress_fixed(
    tokens: &TokenMatrix,
    saliency: &SaliencyVector,
    t_sal_fixed: usize,
    config: &CompressConfig,
) -> Result<SelectionResult> {
    run(tokens, saliency, config, Some(t_sal_fixed)).map(|(r, _)| r)
}

fn run(
    tokens: &TokenMatrix,
    saliency: &SaliencyVector,
    config: &CompressConfig,
    fixed_t_sal: Option<usize>,
) -> Result<(SelectionResult, PhaseTimings)> {
    validate_inputs(tokens, saliency, config)?;
    let mut timings = PhaseTimings::default();
    let start = Instant::now();

    let entropy = spectral_entropy(tokens)?;
    timings.entropy = start.elapsed();

    let t = Instant::now();
    let split = match fixed_t_sal {
        Some(t_sal) => fixed_split(t_sal, entropy.normalized_entropy, config)?,
        None => allocate_budget(entropy.normalized_entropy, config)?,
    };
    timings.allocation = t.elapsed();

    let t = Instant::now();
    let salient = saliency_topk(saliency, split.t_sal)?;
    timings.stage1 = t.elapsed();

    let t = Instant::now();
    let mut diagnostics = BTreeMap::new();
    let (coverage, coverage_pick_order) = if split.t_cov == 0 {
        (IndexSet::empty(), Vec::new())
    } else {
        let pool = salient.complement(tokens.n_tokens());
        let ctx = DiversityContext {
            epsilon: config.epsilon,
            saliency: Some(saliency),
            fps_start: config.fps_start,
        };
        match config.diversity_method {
            DiversityMethod::Dpp => {
                let s = dpp_greedy_map(tokens, &pool, split.t_cov, &ctx)?;
                diagnostics.insert("dpp_fallback_fills".to_string(), s.fallback_fills as f64);
                (s.selected, s.pick_order)
            }
            DiversityMethod::Fps => {
                let s = fps_select(tokens, &pool, split.t_cov, &ctx)?;
                (s.selected, s.pick_order)
            }
            DiversityMethod::FacilityLocation => {
                let s = facility_location_select(tokens, &pool, split.t_cov, &ctx)?;
                let order = s.as_slice().to_vec();
                (s, order)
            }
        }
    };
    timings.stage2 = t.elapsed();

    let mut merged: Vec<(usize, Stage)> = salient
        .iter()
        .map(|i| (i, Stage::Saliency))
        .chain(coverage.iter().map(|i| (i, Stage::Coverage)))
        .collect();
    merged.sort_unstable_by_key(|&(i, _)| i);
    let stage_of = merged.iter().map(|&(_, s)| s).collect();
    let selected = IndexSet::new(merged.into_iter().map(|(i, _)| i).collect())?;
    timings.total = start.elapsed();

    let t = Instant::now();
    if !coverage.is_empty() {
        if let Some(v) = coverage_log_det(tokens, &coverage, config.epsilon)? {
            diagnostics.insert("coverage_log_det".to_string(), v);
        }
    }
    if let Some(d) = min_pairwise_cosine_distance(tokens, &selected, config.epsilon)? {
        diagnostics.insert("min_pairwise_cosine_distance".to_string(), d);
    }
    diagnostics.insert(
        "reduction_ratio".to_string(),
        1.0 - selected.len() as f64 / tokens.n_tokens() as f64,
    );
    timings.diagnostics = t.elapsed();

    Ok((
        SelectionResult {
            selected,
            stage_of,
            coverage_pick_order,
            split,
            entropy,
            diagnostics,
        },
        timings,
    ))
}

/// `ln det(L_S + jitter I)` of the cosine kernel on `set`; `None` when the
/// kernel is undefined (all-zero rows) or the factorization breaks down.
fn coverage_log_det(tokens: &TokenMatrix, set: &IndexSet, epsilon: f64) -> Result<Option<f64>> {
    let kernel = match cosine_kernel(tokens, set, epsilon) {
        Ok(k) => k,
        Err(Error::DegenerateInput(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let m = kernel.side();
    let mut jittered = Mat::from_fn(m, m, |i, j| kernel.get(i, j));
    for i in 0..m {
        jittered[(i, i)] += DPP_JITTER;
    }
    let Ok(llt) = jittered.llt(Side::Lower) else {
        return Ok(None);
    };
    let l = llt.L();
    let v: f64 = (0..m).map(|i| 2.0 * l[(i, i)].ln()).sum();
    Ok(v.is_finite().then_some(v))
}
