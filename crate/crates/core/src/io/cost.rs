//! Prefill cost arithmetic for a decoder-only language model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TEXT_TOKENS: u64 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCostSpec {
    pub hidden_dim: u64,
    pub n_layers: u64,
    pub intermediate_dim: u64,
    /// Total language-model parameters.
    pub n_params: u64,
    /// Non-visual prompt length.
    pub text_tokens: u64,
}

impl ModelCostSpec {
    /// Vicuna-7B backbone as used by LLaVA-NeXT-7B.
    pub fn llava_next_7b() -> Self {
        Self {
            hidden_dim: 4096,
            n_layers: 32,
            intermediate_dim: 11008,
            n_params: 6_740_000_000,
            text_tokens: DEFAULT_TEXT_TOKENS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0
            || self.n_layers == 0
            || self.intermediate_dim == 0
            || self.n_params == 0
            || self.text_tokens == 0
        {
            return Err(Error::invalid(
                "model cost spec fields must all be positive",
            ));
        }
        Ok(())
    }
}

/// Prefill FLOPs for `seq_visual` visual tokens plus the text prompt:
/// `2 * params * L` for the dense layers and `4 * layers * L^2 * hidden`
/// for attention scores and value mixing.
pub fn estimate_prefill_flops(seq_visual: u64, spec: &ModelCostSpec) -> Result<f64> {
    spec.validate()?;
    let len = (seq_visual + spec.text_tokens) as f64;
    let dense = 2.0 * spec.n_params as f64 * len;
    let attention = 4.0 * spec.n_layers as f64 * len * len * spec.hidden_dim as f64;
    Ok(dense + attention)
}

/// Key/value cache held for the visual tokens, in MiB.
pub fn estimate_kv_cache_mb(
    seq_visual: u64,
    spec: &ModelCostSpec,
    bytes_per_value: u64,
) -> Result<f64> {
    spec.validate()?;
    let bytes = 2 * spec.n_layers * spec.hidden_dim * bytes_per_value * seq_visual;
    Ok(bytes as f64 / (1024.0 * 1024.0))
}
