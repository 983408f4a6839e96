//! Greedy facility-location coverage with unit weights:
//! `F(S) = sum_{i in pool} max_{j in S} s(i, j)`, `s = clip((cos + 1) / 2, 0, 1)`.

use crate::error::Result;
use crate::tensor::{dot, TokenMatrix};

use super::{check_k, DiversityContext, IndexSet, PoolFeatures};

/// Maps a cosine similarity into `[0, 1]`.
#[inline]
pub fn facility_similarity(cosine: f64) -> f64 {
    ((cosine + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// Greedy maximization of the facility-location objective.
pub fn facility_location_select(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    k: usize,
    ctx: &DiversityContext<'_>,
) -> Result<IndexSet> {
    check_k(k, pool)?;
    let feats = PoolFeatures::gather(tokens, pool, ctx.epsilon)?;
    let m = pool.len();
    if k == 0 {
        return Ok(IndexSet::empty());
    }

    // Symmetric, so row j doubles as the column s(., j).
    let sim: Vec<f64> = feats
        .kernel()
        .as_slice()
        .iter()
        .map(|&c| facility_similarity(c))
        .collect();

    let mut coverage = vec![0.0; m];
    let mut active = vec![true; m];
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if !active[j] {
                continue;
            }
            let column = &sim[j * m..(j + 1) * m];
            let gain: f64 = column
                .iter()
                .zip(&coverage)
                .map(|(&s, &c)| (s - c).max(0.0))
                .sum();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let (j, _) = best.expect("k <= pool size leaves a candidate");
        active[j] = false;
        picks.push(pool.as_slice()[j]);
        let column = &sim[j * m..(j + 1) * m];
        for (c, &s) in coverage.iter_mut().zip(column) {
            *c = c.max(s);
        }
    }
    IndexSet::new(picks)
}

/// `F(S)` evaluated pair by pair; an empty `set` scores 0.
pub fn facility_location_value(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    set: &IndexSet,
    epsilon: f64,
) -> Result<f64> {
    let feats = PoolFeatures::gather(tokens, pool, epsilon)?;
    let chosen = PoolFeatures::gather(tokens, set, epsilon)?;
    let mut total = 0.0;
    for a in 0..feats.len() {
        let best = (0..chosen.len())
            .map(|b| facility_similarity(dot(feats.row(a), chosen.row(b))))
            .fold(0.0_f64, f64::max);
        total += best;
    }
    Ok(total)
}
