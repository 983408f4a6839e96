//! Exhaustive log-det maximization, used as an oracle for small pools.

use crate::error::{Error, Result};
use crate::tensor::{SquareMatrix, TokenMatrix};

use super::{check_k, cosine_kernel, IndexSet};

/// Largest number of subsets the exhaustive search will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// `ln det` of the principal submatrix on `positions`, by LU with partial
/// pivoting. Singular or non-positive determinants give `-inf`.
pub fn log_det_subset(kernel: &SquareMatrix, positions: &[usize]) -> f64 {
    let n = positions.len();
    let mut a: Vec<f64> = Vec::with_capacity(n * n);
    for &i in positions {
        for &j in positions {
            a.push(kernel.get(i, j));
        }
    }
    let mut log_det = 0.0;
    let mut negative = false;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x * n + c].abs().total_cmp(&a[y * n + c].abs()))
            .expect("non-empty column");
        let pivot = a[p * n + c];
        if pivot == 0.0 {
            return f64::NEG_INFINITY;
        }
        if p != c {
            for col in 0..n {
                a.swap(p * n + col, c * n + col);
            }
            negative = !negative;
        }
        if pivot < 0.0 {
            negative = !negative;
        }
        log_det += pivot.abs().ln();
        for r in (c + 1)..n {
            let f = a[r * n + c] / pivot;
            if f != 0.0 {
                for col in c..n {
                    a[r * n + col] -= f * a[c * n + col];
                }
            }
        }
    }
    if negative {
        f64::NEG_INFINITY
    } else {
        log_det
    }
}

/// Exact `argmax_{|S| = k} ln det(L_S)` over the pool. Ties go to the
/// lexicographically smallest subset.
pub fn brute_force_max_logdet(
    tokens: &TokenMatrix,
    pool: &IndexSet,
    k: usize,
    epsilon: f64,
) -> Result<(IndexSet, f64)> {
    check_k(k, pool)?;
    let m = pool.len();
    let count = binomial(m, k);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "C({m}, {k}) = {count} subsets exceeds the limit of {BRUTE_FORCE_LIMIT}"
        )));
    }
    if k == 0 {
        pool.check_within(tokens.n_tokens())?;
        return Ok((IndexSet::empty(), 0.0));
    }
    let kernel = cosine_kernel(tokens, pool, epsilon)?;

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = combo.clone();
    let mut best_value = log_det_subset(&kernel, &combo);
    // Advance through the combinations in lexicographic order.
    while let Some(i) = (0..k).rev().find(|&i| combo[i] < m - k + i) {
        combo[i] += 1;
        for t in (i + 1)..k {
            combo[t] = combo[t - 1] + 1;
        }
        let value = log_det_subset(&kernel, &combo);
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&combo);
        }
    }
    let chosen = best.iter().map(|&a| pool.as_slice()[a]).collect();
    Ok((IndexSet::new(chosen)?, best_value))
}
