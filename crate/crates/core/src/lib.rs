//! Entropy-guided visual token selection.
//!
//! A token matrix's spectral entropy measures whether its information is
//! concentrated in a few directions or spread over many. That entropy sets
//! how a fixed token budget splits between saliency retention (top-k by
//! attention) and coverage completion (greedy DPP MAP, or the FPS and
//! facility-location alternates) over the tokens stage one left behind.
//!
//! ```
//! use prominence_core::{compress, CompressConfig, Preset, synth_tokens};
//!
//! let (tokens, saliency) = synth_tokens(64, 16, 4, 1e-3, 7).unwrap();
//! let result = compress(&tokens, &saliency, &CompressConfig::new(16, Preset::Clip)).unwrap();
//! assert_eq!(result.selected.len(), 16);
//! ```

pub mod budget;
pub mod error;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod prominence;
pub mod selection;
pub mod tensor;

pub use budget::{allocate_budget, BudgetSplit, CompressConfig, DiversityMethod, FpsStart, Preset};
pub use error::{Error, FormatError, Result};
pub use io::{estimate_prefill_flops, synth_tokens, ModelCostSpec};
pub use pipeline::{
    compress, compress_fixed, compress_timed, PhaseTimings, SelectionResult, Stage,
};
pub use prominence::{
    attention_entropy, feature_norm_entropy, spectral_entropy, EntropyMetric, EntropyReport,
};
pub use selection::{IndexSet, SaliencyVector};
pub use tensor::TokenMatrix;
