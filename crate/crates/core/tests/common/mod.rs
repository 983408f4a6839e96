#![allow(dead_code)]

use nalgebra::DMatrix;
use prominence_core::TokenMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_tokens(n: usize, d: usize, rng: &mut impl Rng) -> TokenMatrix {
    let data = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    TokenMatrix::new(n, d, data).unwrap()
}

pub fn to_dmatrix(t: &TokenMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(t.n_tokens(), t.dim(), t.as_slice())
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> TokenMatrix {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    TokenMatrix::from_rows(&rows).unwrap()
}

/// Haar-ish random orthogonal matrix from the Q factor of a Gaussian draw.
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Rows divided by `norm + eps`, computed independently of the library.
pub fn normalized_rows(t: &TokenMatrix, rows: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&i| {
            let r = t.row(i);
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt() + 1e-12;
            r.iter().map(|v| v / n).collect()
        })
        .collect()
}

pub fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine kernel over `rows`, one pair at a time.
pub fn naive_kernel(t: &TokenMatrix, rows: &[usize]) -> DMatrix<f64> {
    let f = normalized_rows(t, rows);
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| naive_dot(&f[i], &f[j]))
}

/// Greedy that evaluates `det(L_{S+i} + jitter I)` from scratch for every
/// candidate. Returns positions into `rows`, in pick order.
pub fn naive_dpp_greedy(t: &TokenMatrix, rows: &[usize], k: usize, jitter: f64) -> Vec<usize> {
    let l = naive_kernel(t, rows) + DMatrix::identity(rows.len(), rows.len()) * jitter;
    let mut chosen: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..rows.len() {
            if chosen.contains(&c) {
                continue;
            }
            let mut s = chosen.clone();
            s.push(c);
            let det = l.select_rows(&s).select_columns(&s).determinant();
            if best.is_none_or(|(_, b)| det > b) {
                best = Some((c, det));
            }
        }
        chosen.push(best.unwrap().0);
    }
    chosen
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Normalized spectral entropy from the singular values of `E`.
pub fn svd_entropy(t: &TokenMatrix) -> f64 {
    let s = to_dmatrix(t).svd(false, false).singular_values;
    let lam: Vec<f64> = s.iter().map(|v| v * v).collect();
    let top = lam.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<f64> = lam.into_iter().filter(|&v| v > 1e-12 * top).collect();
    let total: f64 = kept.iter().sum();
    let h: f64 = kept.iter().map(|v| v / total).map(|p| -p * p.ln()).sum();
    let r = t.n_tokens().min(t.dim());
    if r <= 1 {
        0.0
    } else {
        h / (r as f64).ln()
    }
}
