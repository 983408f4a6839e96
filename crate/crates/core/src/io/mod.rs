//! File formats, synthetic data and the prefill cost model.

mod cost;
mod format;
mod synth;

pub use cost::{estimate_kv_cache_mb, estimate_prefill_flops, ModelCostSpec, DEFAULT_TEXT_TOKENS};
pub use format::{
    decode_saliency, decode_tokens, encode_saliency, encode_tokens, read_saliency, read_tokens,
    write_saliency, write_tokens, SALIENCY_MAGIC, TOKEN_MAGIC,
};
pub use synth::synth_tokens;

/// Derives the seed for sample `index` from a run seed (splitmix64), so
/// serial and parallel drivers draw identical per-sample streams.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
