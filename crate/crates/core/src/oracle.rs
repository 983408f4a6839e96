//! Reference implementations used to cross-check the fast DPP selector.
//!
//! Nothing here shares code with the incremental Cholesky path beyond the
//! kernel itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::io::sub_seed;
use crate::selection::{
    brute_force_max_logdet, cosine_kernel, dpp_greedy_map, log_det_subset, DiversityContext,
    IndexSet, DPP_JITTER,
};
use crate::tensor::{SquareMatrix, TokenMatrix, DEFAULT_NORM_EPSILON};

fn determinant(kernel: &SquareMatrix, positions: &[usize]) -> f64 {
    let n = positions.len();
    let mut a: Vec<f64> = positions
        .iter()
        .flat_map(|&i| positions.iter().map(move |&j| (i, j)))
        .map(|(i, j)| kernel.get(i, j))
        .collect();
    let mut det = 1.0;
    for c in 0..n {
        let mut p = c;
        for r in (c + 1)..n {
            if a[r * n + c].abs() > a[p * n + c].abs() {
                p = r;
            }
        }
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for col in 0..n {
                a.swap(p * n + col, c * n + col);
            }
            det = -det;
        }
        let pivot = a[c * n + c];
        det *= pivot;
        for r in (c + 1)..n {
            let f = a[r * n + c] / pivot;
            for col in c..n {
                a[r * n + col] -= f * a[c * n + col];
            }
        }
    }
    det
}

/// Greedy selection that recomputes `det(L_{S + i} + jitter I)` from scratch
/// for every candidate at every step. Returns token indices in pick order.
pub fn naive_greedy_max_det(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    k: usize,
    epsilon: f64,
) -> Result<Vec<usize>> {
    if k > pool.len() {
        return Err(crate::error::Error::InvalidBudget(format!(
            "cannot select {k} of {}",
            pool.len()
        )));
    }
    let base = cosine_kernel(tokens, pool, epsilon)?;
    let m = pool.len();
    let kernel = SquareMatrix::from_fn(m, |i, j| {
        base.get(i, j) + if i == j { DPP_JITTER } else { 0.0 }
    });
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..m {
            if chosen.contains(&cand) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(cand);
            let det = determinant(&kernel, &trial);
            if best.is_none_or(|(_, b)| det > b) {
                best = Some((cand, det));
            }
        }
        chosen.push(best.expect("candidate available").0);
    }
    Ok(chosen.into_iter().map(|a| pool.as_slice()[a]).collect())
}

/// `n` random unit vectors of dimension `dim`.
pub fn random_unit_vectors(n: usize, dim: usize, rng: &mut impl Rng) -> TokenMatrix {
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let row: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        data.extend(row.into_iter().map(|v| v / norm));
    }
    TokenMatrix::new(n, dim, data).expect("finite gaussian rows")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DppTrial {
    pub n: usize,
    pub k: usize,
    pub matches_naive: bool,
    /// `det(L_greedy) / det(L_opt)` on the unjittered kernel.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub trials: Vec<DppTrial>,
}

impl OracleSummary {
    pub fn mismatches(&self) -> usize {
        self.trials.iter().filter(|t| !t.matches_naive).count()
    }

    /// Greedy runs whose determinant exceeded the exhaustive optimum.
    pub fn optimum_violations(&self) -> usize {
        self.trials.iter().filter(|t| t.ratio > 1.0 + 1e-9).count()
    }

    fn sorted_ratios(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.trials.iter().map(|t| t.ratio).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    pub fn min_ratio(&self) -> f64 {
        self.sorted_ratios().first().copied().unwrap_or(f64::NAN)
    }

    pub fn median_ratio(&self) -> f64 {
        let r = self.sorted_ratios();
        match r.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => r[n / 2],
            n => 0.5 * (r[n / 2 - 1] + r[n / 2]),
        }
    }
}

/// Runs seeded random instances through the fast greedy, the naive greedy
/// and exhaustive search. Instance `i` draws from `sub_seed(seed, i)`.
pub fn run_dpp_oracle(
    trials: usize,
    max_n: usize,
    max_k: usize,
    seed: u64,
) -> Result<OracleSummary> {
    let max_n = max_n.max(2);
    let max_k = max_k.clamp(1, max_n);
    let dim = max_k.max(8);
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, t as u64));
        let k = rng.random_range(1..=max_k);
        let n = rng.random_range(k.max(2)..=max_n);
        let tokens = random_unit_vectors(n, dim, &mut rng);
        let pool = IndexSet::full(n);
        let fast = dpp_greedy_map(&tokens, &pool, k, &DiversityContext::default())?;
        let naive = naive_greedy_max_det(&tokens, &pool, k, DEFAULT_NORM_EPSILON)?;
        let (_, best) = brute_force_max_logdet(&tokens, &pool, k, DEFAULT_NORM_EPSILON)?;
        let kernel = cosine_kernel(&tokens, &pool, DEFAULT_NORM_EPSILON)?;
        let greedy = log_det_subset(&kernel, fast.selected.as_slice());
        out.push(DppTrial {
            n,
            k,
            matches_naive: fast.pick_order == naive,
            ratio: (greedy - best).exp(),
        });
    }
    Ok(OracleSummary { trials: out })
}
