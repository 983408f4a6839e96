use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::selection::SaliencyVector;
use crate::tensor::{dot, TokenMatrix};

/// Floor added to every synthetic saliency score.
const SALIENCY_NOISE: f64 = 0.05;

/// `k` orthonormal vectors in `R^dim` by Gram-Schmidt on Gaussian draws.
fn orthonormal_directions(k: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        // Two passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Synthetic tokens whose information spreads over `k_directions` orthonormal
/// directions.
///
/// Token `i` sits on direction `i mod k` with a random sign, so every
/// direction carries the same energy, plus isotropic Gaussian noise of
/// standard deviation `noise`. Saliency is `|<e_i, u_1>|` plus a small
/// uniform floor, so tokens aligned with the first direction are the salient
/// ones.
pub fn synth_tokens(
    n: usize,
    dim: usize,
    k_directions: usize,
    noise: f64,
    seed: u64,
) -> Result<(TokenMatrix, SaliencyVector)> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid("synthetic matrix needs n >= 1 and d >= 1"));
    }
    if k_directions == 0 || k_directions > n.min(dim) {
        return Err(Error::invalid(format!(
            "k_directions must lie in [1, {}], got {k_directions}",
            n.min(dim)
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!(
            "noise must be nonnegative, got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = orthonormal_directions(k_directions, dim, &mut rng);

    let mut data = Vec::with_capacity(n * dim);
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let u = &dirs[i % k_directions];
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let row: Vec<f64> = u
            .iter()
            .map(|&x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sign * x + noise * z
            })
            .collect();
        scores.push(dot(&row, &dirs[0]).abs() + SALIENCY_NOISE * rng.random::<f64>());
        data.extend(row);
    }
    Ok((
        TokenMatrix::new(n, dim, data)?,
        SaliencyVector::new(scores)?,
    ))
}
