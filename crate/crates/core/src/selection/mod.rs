//! Stage-1 saliency retention and stage-2 diversity selectors.
//!
//! Every selector breaks ties toward the lowest token index.

mod dpp;
mod exhaustive;
mod facility;
mod fps;

pub use dpp::{dpp_greedy_map, DppSelection, DPP_JITTER, DPP_RANK_TOLERANCE};
pub use exhaustive::{brute_force_max_logdet, log_det_subset, BRUTE_FORCE_LIMIT};
pub use facility::{facility_location_select, facility_location_value, facility_similarity};
pub use fps::{fps_select, FpsSelection};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::budget::FpsStart;
use crate::error::{Error, Result};
use faer::MatRef;

use crate::tensor::{dot, norm, outer_gram, SquareMatrix, TokenMatrix, DEFAULT_NORM_EPSILON};

/// Nonnegative per-token saliency scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyVector {
    scores: Vec<f64>,
}

impl SaliencyVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!(
                "saliency score {v} at index {i} is negative or non-finite"
            )));
        }
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Descending score, then ascending index.
    fn rank_cmp(&self, a: usize, b: usize) -> Ordering {
        self.scores[b]
            .total_cmp(&self.scores[a])
            .then_with(|| a.cmp(&b))
    }
}

/// Strictly increasing token indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Accepts indices in any order; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate index {}", w[0])));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{0, 1, ..., n - 1}`.
    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Indices in `0..n` not contained in `self`.
    pub fn complement(&self, n: usize) -> Self {
        let mut out = Vec::with_capacity(n.saturating_sub(self.0.len()));
        let mut taken = self.0.iter().peekable();
        for i in 0..n {
            if taken.peek() == Some(&&i) {
                taken.next();
            } else {
                out.push(i);
            }
        }
        Self(out)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub(crate) fn check_within(&self, n_tokens: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n_tokens => Err(Error::invalid(format!(
                "index {last} out of range for {n_tokens} tokens"
            ))),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// Per-head attention scores, `n_heads x n_tokens`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadAttention {
    pub n_heads: usize,
    pub n_tokens: usize,
    pub data: Vec<f64>,
}

impl HeadAttention {
    pub fn new(n_heads: usize, n_tokens: usize, data: Vec<f64>) -> Result<Self> {
        if n_heads == 0 || n_tokens == 0 {
            return Err(Error::invalid(
                "head attention needs at least one head and token",
            ));
        }
        if data.len() != n_heads * n_tokens {
            return Err(Error::invalid(format!(
                "expected {} attention values, got {}",
                n_heads * n_tokens,
                data.len()
            )));
        }
        Ok(Self {
            n_heads,
            n_tokens,
            data,
        })
    }

    pub fn head(&self, h: usize) -> &[f64] {
        &self.data[h * self.n_tokens..(h + 1) * self.n_tokens]
    }
}

/// How the per-head rows were produced by the encoder hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionReduction {
    /// Each row is one head's CLS-to-token attention.
    #[default]
    ClsRow,
    /// Each row is one head's mean attention received per token, for
    /// encoders without a CLS token.
    GlobalAverage,
}

/// Averages per-head scores into one saliency score per token.
///
/// Both modes reduce identically; the mode records which hook produced the rows.
pub fn reduce_head_attention(
    heads: &HeadAttention,
    _mode: AttentionReduction,
) -> Result<SaliencyVector> {
    if let Some(v) = heads.data.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!(
            "attention value {v} is negative or non-finite"
        )));
    }
    let mut sums = vec![0.0; heads.n_tokens];
    for h in 0..heads.n_heads {
        for (s, v) in sums.iter_mut().zip(heads.head(h)) {
            *s += v;
        }
    }
    let h = heads.n_heads as f64;
    SaliencyVector::new(sums.into_iter().map(|s| s / h).collect())
}

/// Indices of the `k` highest scores, ties to the lower index.
pub fn saliency_topk(saliency: &SaliencyVector, k: usize) -> Result<IndexSet> {
    let n = saliency.len();
    if k > n {
        return Err(Error::budget(format!("cannot keep {k} of {n} tokens")));
    }
    if k == 0 {
        return Ok(IndexSet::empty());
    }
    let mut order: Vec<usize> = (0..n).collect();
    if k < n {
        order.select_nth_unstable_by(k - 1, |&a, &b| saliency.rank_cmp(a, b));
    }
    order.truncate(k);
    order.sort_unstable();
    Ok(IndexSet(order))
}

/// Options shared by the diversity selectors.
#[derive(Debug, Clone, Copy)]
pub struct DiversityContext<'a> {
    pub epsilon: f64,
    /// Used for the DPP rank-deficiency fill and the saliency FPS start.
    pub saliency: Option<&'a SaliencyVector>,
    pub fps_start: FpsStart,
}

impl Default for DiversityContext<'_> {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_NORM_EPSILON,
            saliency: None,
            fps_start: FpsStart::LowestIndex,
        }
    }
}

impl<'a> DiversityContext<'a> {
    pub fn with_saliency(mut self, saliency: &'a SaliencyVector) -> Self {
        self.saliency = Some(saliency);
        self
    }

    pub fn with_fps_start(mut self, start: FpsStart) -> Self {
        self.fps_start = start;
        self
    }
}

/// Scales `row` by `1 / (||row|| + epsilon)`.
#[inline]
pub(crate) fn normalize_in_place(row: &mut [f64], epsilon: f64) {
    let scale = 1.0 / (norm(row) + epsilon);
    row.iter_mut().for_each(|v| *v *= scale);
}

/// Normalized pool rows packed contiguously, in pool order.
pub(crate) struct PoolFeatures {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PoolFeatures {
    pub fn gather(tokens: &TokenMatrix, pool: &IndexSet, epsilon: f64) -> Result<Self> {
        pool.check_within(tokens.n_tokens())?;
        let dim = tokens.dim();
        let mut data = tokens.gather_rows(pool.as_slice());
        for row in data.chunks_exact_mut(dim) {
            normalize_in_place(row, epsilon);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.dim..(a + 1) * self.dim]
    }

    /// Cosine kernel `F F^T`, exactly symmetric. The diagonal comes from
    /// [`PoolFeatures::self_dot`] so every selector sees identical values.
    pub fn kernel(&self) -> SquareMatrix {
        let mut k = outer_gram(MatRef::from_row_major_slice(
            &self.data,
            self.len(),
            self.dim,
        ));
        for a in 0..self.len() {
            k.set(a, a, self.self_dot(a));
        }
        k
    }

    pub fn self_dot(&self, a: usize) -> f64 {
        let r = self.row(a);
        dot(r, r)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }
}

pub(crate) fn check_k(k: usize, pool: &IndexSet) -> Result<()> {
    if k > pool.len() {
        return Err(Error::budget(format!(
            "cannot select {k} tokens from a pool of {}",
            pool.len()
        )));
    }
    Ok(())
}

/// Cosine-similarity kernel over the pool, indexed by pool position.
pub fn cosine_kernel(tokens: &TokenMatrix, pool: &IndexSet, epsilon: f64) -> Result<SquareMatrix> {
    if pool.is_empty() {
        return Err(Error::invalid("kernel pool is empty"));
    }
    let feats = PoolFeatures::gather(tokens, pool, epsilon)?;
    if feats.data.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput(
            "every pooled token row is zero".into(),
        ));
    }
    Ok(feats.kernel())
}

/// Smallest pairwise cosine distance `1 - cos` among `set`; `None` below two tokens.
pub fn min_pairwise_cosine_distance(
    tokens: &TokenMatrix,
    set: &IndexSet,
    epsilon: f64,
) -> Result<Option<f64>> {
    let feats = PoolFeatures::gather(tokens, set, epsilon)?;
    let m = feats.len();
    if m < 2 {
        return Ok(None);
    }
    let kernel = feats.kernel();
    let mut best: Option<f64> = None;
    for a in 0..m {
        for b in (a + 1)..m {
            let d = 1.0 - kernel.get(a, b);
            best = Some(best.map_or(d, |cur| cur.min(d)));
        }
    }
    Ok(best)
}

/// Ranks pool positions by saliency (descending, ties to lower index), or by
/// index when no saliency is supplied.
pub(crate) fn fill_order(
    pool: &IndexSet,
    positions: &mut [usize],
    saliency: Option<&SaliencyVector>,
) {
    match saliency {
        Some(s) => positions.sort_by(|&a, &b| s.rank_cmp(pool.as_slice()[a], pool.as_slice()[b])),
        None => positions.sort_unstable(),
    }
}
