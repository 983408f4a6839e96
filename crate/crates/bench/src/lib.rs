//! Shared fixtures for the criterion benchmarks.

use prominence_core::{synth_tokens, IndexSet, SaliencyVector, TokenMatrix};

/// Inputs at the three token counts the benchmarks sweep.
pub const TOKEN_COUNTS: [usize; 3] = [576, 1296, 2880];

pub fn fixture(n: usize, d: usize, seed: u64) -> (TokenMatrix, SaliencyVector) {
    synth_tokens(n, d, n.min(d), 1e-3, seed).expect("valid synthetic shape")
}

/// Every index except the `t_sal` most salient ones.
pub fn residual_pool(saliency: &SaliencyVector, t_sal: usize) -> IndexSet {
    let kept = prominence_core::selection::saliency_topk(saliency, t_sal).expect("t_sal <= n");
    kept.complement(saliency.len())
}
