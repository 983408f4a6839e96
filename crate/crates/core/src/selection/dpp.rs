//! Greedy MAP inference for a DPP with a cosine kernel.
//!
//! Incremental Cholesky form: each candidate keeps a row `c_i` of the
//! partial factor and its residual `d_i^2`; the marginal log-det gain of
//! adding `i` is `ln d_i^2`. Only the kernel rows of picked candidates are
//! needed. They are produced in blocks for the current highest-residual
//! candidates, since a blocked product runs far faster than one pass over
//! the features per pick.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::error::Result;
use crate::tensor::TokenMatrix;

use super::{check_k, fill_order, DiversityContext, IndexSet, PoolFeatures};

/// Added to every kernel diagonal entry.
pub const DPP_JITTER: f64 = 1e-10;

/// Residual `d^2` below which a candidate adds no new direction. Sits above
/// the jitter-induced floor (about `2 * DPP_JITTER` for an exact duplicate).
pub const DPP_RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DppSelection {
    pub selected: IndexSet,
    /// Token indices in the order they were chosen, fallback fills last.
    pub pick_order: Vec<usize>,
    /// `ln d^2` for each greedy pick; non-increasing.
    pub gains: Vec<f64>,
    /// Slots filled by the saliency/index fallback after the kernel ran out of rank.
    pub fallback_fills: usize,
}

impl DppSelection {
    /// `ln det(L_S + jitter I)` over the greedy picks.
    pub fn greedy_log_det(&self) -> f64 {
        self.gains.iter().sum()
    }
}

pub fn dpp_greedy_map(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    k: usize,
    ctx: &DiversityContext<'_>,
) -> Result<DppSelection> {
    check_k(k, pool)?;
    let feats = PoolFeatures::gather(tokens, pool, ctx.epsilon)?;
    let m = pool.len();
    if k == 0 {
        return Ok(DppSelection {
            selected: IndexSet::empty(),
            pick_order: Vec::new(),
            gains: Vec::new(),
            fallback_fills: 0,
        });
    }
    let mut rows = KernelRows::new(&feats);

    let mut residual: Vec<f64> = (0..m).map(|a| feats.self_dot(a) + DPP_JITTER).collect();
    let mut active = vec![true; m];
    // Row t holds the t-th Cholesky coefficient of every candidate.
    let mut factor: Vec<f64> = Vec::with_capacity(k * m);
    let mut overlap = vec![0.0; m];
    let mut picks: Vec<usize> = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);

    while picks.len() < k {
        let mut best: Option<usize> = None;
        for a in 0..m {
            if active[a] && best.is_none_or(|b| residual[a] > residual[b]) {
                best = Some(a);
            }
        }
        let Some(j) = best else { break };
        let d2 = residual[j];
        if d2 < DPP_RANK_TOLERANCE {
            break;
        }
        active[j] = false;
        picks.push(j);
        gains.push(d2.ln());
        if picks.len() == k {
            break;
        }

        let dj = d2.sqrt();
        let (kj, folded) = rows.get(j, &residual, &active, &factor);
        // The block product already removed the first `folded` factor rows.
        overlap.iter_mut().for_each(|v| *v = 0.0);
        for row in factor.chunks_exact(m).skip(folded) {
            let cj = row[j];
            // Inactive slots are accumulated too and ignored; branch-free
            // keeps the loop vectorized.
            for (o, &c) in overlap.iter_mut().zip(row) {
                *o += cj * c;
            }
        }
        let start = factor.len();
        factor.resize(start + m, 0.0);
        let new_row = &mut factor[start..];
        for a in 0..m {
            if !active[a] {
                continue;
            }
            let e = (kj[a] - overlap[a]) / dj;
            new_row[a] = e;
            residual[a] -= e * e;
        }
    }

    let greedy_picks = picks.len();
    if greedy_picks < k {
        let mut rest: Vec<usize> = (0..m).filter(|&a| active[a]).collect();
        fill_order(pool, &mut rest, ctx.saliency);
        picks.extend(rest.into_iter().take(k - greedy_picks));
    }

    let pick_order: Vec<usize> = picks.iter().map(|&a| pool.as_slice()[a]).collect();
    Ok(DppSelection {
        selected: IndexSet::new(pick_order.clone())?,
        pick_order,
        gains,
        fallback_fills: k - greedy_picks,
    })
}

/// Candidates per kernel-row block.
const ROW_BLOCK: usize = 24;

/// Kernel rows computed on demand, a block at a time, with the Cholesky
/// factor rows known at fill time already subtracted.
struct KernelRows<'a> {
    feats: &'a PoolFeatures,
    slot: Vec<u32>,
    folded: Vec<usize>,
    data: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> KernelRows<'a> {
    const EMPTY: u32 = u32::MAX;

    fn new(feats: &'a PoolFeatures) -> Self {
        Self {
            feats,
            slot: vec![Self::EMPTY; feats.len()],
            folded: Vec::new(),
            data: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Row `j` of `L - C^T C` over the first `folded` rows of the factor
    /// `C`, and `folded`. On a miss, `j` and the uncached active candidates
    /// with the largest residuals are computed together.
    fn get(
        &mut self,
        j: usize,
        residual: &[f64],
        active: &[bool],
        factor: &[f64],
    ) -> (&[f64], usize) {
        let m = self.feats.len();
        if self.slot[j] == Self::EMPTY {
            let mut block: Vec<usize> = (0..m)
                .filter(|&a| a != j && active[a] && self.slot[a] == Self::EMPTY)
                .collect();
            let take = block.len().min(ROW_BLOCK - 1);
            if take < block.len() {
                block.select_nth_unstable_by(take, |&a, &b| residual[b].total_cmp(&residual[a]));
                block.truncate(take);
            }
            block.push(j);
            self.fill(&block, factor);
        }
        let s = self.slot[j] as usize;
        (&self.data[s * m..(s + 1) * m], self.folded[s])
    }

    fn fill(&mut self, block: &[usize], factor: &[f64]) {
        let (m, dim) = (self.feats.len(), self.feats.dim);
        let depth = factor.len() / m;
        let first = self.folded.len();
        self.data.resize((first + block.len()) * m, 0.0);
        let mut dst = MatMut::from_row_major_slice_mut(&mut self.data[first * m..], block.len(), m);

        self.scratch.clear();
        for &a in block {
            self.scratch.extend_from_slice(self.feats.row(a));
        }
        let lhs = MatRef::from_row_major_slice(&self.scratch, block.len(), dim);
        let feats = MatRef::from_row_major_slice(&self.feats.data, m, dim);
        matmul(
            dst.as_mut(),
            Accum::Replace,
            lhs,
            feats.transpose(),
            1.0,
            Par::Seq,
        );

        if depth > 0 {
            self.scratch.clear();
            for &a in block {
                self.scratch
                    .extend(factor.chunks_exact(m).map(|row| row[a]));
            }
            let lhs = MatRef::from_row_major_slice(&self.scratch, block.len(), depth);
            let c = MatRef::from_row_major_slice(factor, depth, m);
            matmul(dst, Accum::Add, lhs, c, -1.0, Par::Seq);
        }
        for (i, &a) in block.iter().enumerate() {
            self.slot[a] = (first + i) as u32;
            self.folded.push(depth);
        }
    }
}
