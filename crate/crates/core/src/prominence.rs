//! Entropy metrics describing how concentrated the information in a token
//! matrix is.
//!
//! The spectral metric drives budget allocation. Feature-norm and attention
//! entropy are kept for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::SaliencyVector;
use crate::tensor::{gram_matrix, norm, sym_eigenvalues, TokenMatrix};

/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMetric {
    Spectral,
    FeatureNorm,
    Attention,
}

impl EntropyMetric {
    pub fn name(self) -> &'static str {
        match self {
            EntropyMetric::Spectral => "spectral",
            EntropyMetric::FeatureNorm => "feature_norm",
            EntropyMetric::Attention => "attention",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// Shannon entropy in nats.
    pub raw_entropy: f64,
    /// `raw_entropy / normalizer`, or 0 when the normalizer vanishes.
    pub normalized_entropy: f64,
    pub metric: EntropyMetric,
    /// Natural log of the support size.
    pub normalizer: f64,
}

impl EntropyReport {
    fn from_weights(
        weights: impl Iterator<Item = f64> + Clone,
        support: usize,
        metric: EntropyMetric,
    ) -> Self {
        let raw_entropy = shannon_entropy(weights);
        let normalizer = (support as f64).ln();
        let normalized_entropy = if normalizer > 0.0 {
            (raw_entropy / normalizer).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Self {
            raw_entropy,
            normalized_entropy,
            metric,
            normalizer,
        }
    }
}

/// Entropy of the distribution proportional to nonnegative `weights`, with
/// `0 log 0 = 0`. The caller guarantees a positive total.
fn shannon_entropy(weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let total: f64 = weights.clone().sum();
    let h = weights
        .filter(|&w| w > 0.0)
        .map(|w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// Entropy of the normalized squared singular values of `tokens`.
pub fn spectral_entropy(tokens: &TokenMatrix) -> Result<EntropyReport> {
    let spectrum = sym_eigenvalues(&gram_matrix(tokens)?)?;
    let top = spectrum.eigenvalues.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Err(Error::DegenerateInput(
            "token matrix is all zeros; spectral distribution undefined".into(),
        ));
    }
    let cutoff = SPECTRAL_CUTOFF * top;
    let kept = spectrum
        .eigenvalues
        .iter()
        .map(move |&v| if v > cutoff { v } else { 0.0 });
    let rank_bound = tokens.n_tokens().min(tokens.dim());
    Ok(EntropyReport::from_weights(
        kept,
        rank_bound,
        EntropyMetric::Spectral,
    ))
}

/// Entropy of the distribution of per-token l2 norms.
pub fn feature_norm_entropy(tokens: &TokenMatrix) -> Result<EntropyReport> {
    let norms: Vec<f64> = tokens.rows().map(norm).collect();
    if norms.iter().all(|&m| m == 0.0) {
        return Err(Error::DegenerateInput(
            "every token row is zero; norm distribution undefined".into(),
        ));
    }
    Ok(EntropyReport::from_weights(
        norms.iter().copied(),
        tokens.n_tokens(),
        EntropyMetric::FeatureNorm,
    ))
}

/// Entropy of a head-averaged attention vector.
pub fn attention_entropy(saliency: &SaliencyVector) -> Result<EntropyReport> {
    let scores = saliency.scores();
    let total: f64 = scores.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::invalid("attention scores sum to zero"));
    }
    Ok(EntropyReport::from_weights(
        scores.iter().copied(),
        scores.len(),
        EntropyMetric::Attention,
    ))
}
