//! Farthest-point sampling under cosine distance `1 - cos`.

use crate::budget::FpsStart;
use crate::error::{Error, Result};
use crate::tensor::TokenMatrix;

use super::{check_k, DiversityContext, IndexSet, PoolFeatures};

#[derive(Debug, Clone, PartialEq)]
pub struct FpsSelection {
    pub selected: IndexSet,
    pub pick_order: Vec<usize>,
    /// Max-min distance at each pick; the start token records 0.
    pub pick_distances: Vec<f64>,
}

pub fn fps_select(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    k: usize,
    ctx: &DiversityContext<'_>,
) -> Result<FpsSelection> {
    check_k(k, pool)?;
    let feats = PoolFeatures::gather(tokens, pool, ctx.epsilon)?;
    let m = pool.len();
    if k == 0 {
        return Ok(FpsSelection {
            selected: IndexSet::empty(),
            pick_order: Vec::new(),
            pick_distances: Vec::new(),
        });
    }
    let kernel = feats.kernel();
    drop(feats);

    let start = match ctx.fps_start {
        FpsStart::LowestIndex => 0,
        FpsStart::HighestSaliency => {
            let sal = ctx.saliency.ok_or_else(|| {
                Error::invalid("saliency-based FPS start requires a saliency vector")
            })?;
            if sal.len() != tokens.n_tokens() {
                return Err(Error::invalid("saliency length does not match token count"));
            }
            let mut positions: Vec<usize> = (0..m).collect();
            super::fill_order(pool, &mut positions, Some(sal));
            positions[0]
        }
    };

    let mut active = vec![true; m];
    let mut min_dist = vec![f64::INFINITY; m];
    let mut picks = Vec::with_capacity(k);
    let mut distances = Vec::with_capacity(k);
    let mut next = start;
    let mut next_dist = 0.0;
    loop {
        active[next] = false;
        picks.push(next);
        distances.push(next_dist);
        if picks.len() == k {
            break;
        }
        let anchor = kernel.row(next);
        let mut best: Option<usize> = None;
        for a in 0..m {
            if !active[a] {
                continue;
            }
            let d = 1.0 - anchor[a];
            if d < min_dist[a] {
                min_dist[a] = d;
            }
            if best.is_none_or(|b| min_dist[a] > min_dist[b]) {
                best = Some(a);
            }
        }
        next = best.expect("k <= pool size leaves a candidate");
        next_dist = min_dist[next];
    }

    let pick_order: Vec<usize> = picks.iter().map(|&a| pool.as_slice()[a]).collect();
    Ok(FpsSelection {
        selected: IndexSet::new(pick_order.clone())?,
        pick_order,
        pick_distances: distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::SaliencyVector;

    #[test]
    fn planar_angles() {
        // 0, 90 and 180 degrees.
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let s = fps_select(&t, &IndexSet::full(3), 3, &DiversityContext::default()).unwrap();
        assert_eq!(s.pick_order, vec![0, 2, 1]);
        assert!((s.pick_distances[1] - 2.0).abs() < 1e-9);
        assert!((s.pick_distances[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn whole_pool_and_empty() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [0.5, 0.5], [0.0, 1.0], [0.2, 0.9]]).unwrap();
        let pool = IndexSet::new(vec![1, 2, 3]).unwrap();
        let s = fps_select(&t, &pool, 3, &DiversityContext::default()).unwrap();
        assert_eq!(s.selected, pool);
        assert_eq!(s.pick_order[0], 1);
        assert!(fps_select(&t, &pool, 0, &DiversityContext::default())
            .unwrap()
            .selected
            .is_empty());
        assert!(fps_select(&t, &pool, 4, &DiversityContext::default()).is_err());
    }

    #[test]
    fn duplicate_of_start_is_avoided() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [1.0, 0.1]]).unwrap();
        let s = fps_select(&t, &IndexSet::full(3), 2, &DiversityContext::default()).unwrap();
        assert_eq!(s.selected.as_slice(), &[0, 2]);
    }

    #[test]
    fn saliency_start() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let sal = SaliencyVector::new(vec![0.1, 0.8, 0.3]).unwrap();
        let ctx = DiversityContext::default()
            .with_saliency(&sal)
            .with_fps_start(FpsStart::HighestSaliency);
        let s = fps_select(&t, &IndexSet::full(3), 2, &ctx).unwrap();
        assert_eq!(s.pick_order[0], 1);
        let no_sal = DiversityContext::default().with_fps_start(FpsStart::HighestSaliency);
        assert!(fps_select(&t, &IndexSet::full(3), 2, &no_sal).is_err());
    }
}
