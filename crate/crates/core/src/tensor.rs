//! Dense linear-algebra substrate: token matrices, Gram products, symmetric
//! spectra and row normalization.
//!
//! Storage is row-major `f64`. Heavy products and the symmetric eigensolver
//! go through `faer` with sequential parallelism.

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, MatMut, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default epsilon added to row norms before dividing.
pub const DEFAULT_NORM_EPSILON: f64 = 1e-12;

/// Relative symmetry tolerance accepted by [`sym_eigenvalues`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// An `n_tokens x dim` matrix of token features, one token per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenMatrix {
    n_tokens: usize,
    dim: usize,
    data: Vec<f64>,
}

impl TokenMatrix {
    /// Builds a matrix from row-major data. Rejects empty shapes,
    /// length mismatches and non-finite entries.
    pub fn new(n_tokens: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if n_tokens == 0 || dim == 0 {
            return Err(Error::invalid(format!(
                "token matrix must be non-empty, got {n_tokens}x{dim}"
            )));
        }
        if data.len() != n_tokens * dim {
            return Err(Error::invalid(format!(
                "expected {} values for a {n_tokens}x{dim} matrix, got {}",
                n_tokens * dim,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at row {}, column {}",
                i / dim,
                i % dim
            )));
        }
        Ok(Self {
            n_tokens,
            dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(n, dim, data)
    }

    #[inline]
    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Returns a copy scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_tokens,
            self.dim,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }

    /// Returns a copy with rows reordered so that output row `i` is input row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_tokens {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &src in order {
            if src >= self.n_tokens {
                return Err(Error::invalid(format!("row {src} out of range")));
            }
            data.extend_from_slice(self.row(src));
        }
        Self::new(self.n_tokens, self.dim, data)
    }

    /// Copies the rows listed in `indices` into a new row-major buffer.
    pub(crate) fn gather_rows(&self, indices: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            out.extend_from_slice(self.row(i));
        }
        out
    }

    fn as_faer(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.n_tokens, self.dim)
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    side: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(side: usize, data: Vec<f64>) -> Result<Self> {
        if side == 0 || data.len() != side * side {
            return Err(Error::invalid(format!(
                "square matrix of side {side} needs {} values, got {}",
                side * side,
                data.len()
            )));
        }
        Ok(Self { side, data })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                data.push(f(i, j));
            }
        }
        Self { side, data }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.side + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.side..(i + 1) * self.side]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.side + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.side).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|G[i][j] - G[j][i]|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.side {
            for j in (i + 1)..self.side {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// In-place `G <- (G + G^T) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.side;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }
}

/// Eigenvalues of a symmetric PSD matrix, sorted descending and clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
    pub rank_bound: usize,
}

impl SymmetricSpectrum {
    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Forms the smaller of `E^T E` (when `dim <= n_tokens`) and `E E^T`.
///
/// The output is symmetrized. Overflowing products are reported as invalid
/// input.
pub fn gram_matrix(tokens: &TokenMatrix) -> Result<SquareMatrix> {
    let (n, d) = (tokens.n_tokens(), tokens.dim());
    let g = if d <= n {
        let et = transpose(tokens.as_slice(), n, d);
        outer_gram(MatRef::from_row_major_slice(&et, d, n))
    } else {
        outer_gram(tokens.as_faer())
    };
    if g.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "gram matrix overflowed to a non-finite value",
        ));
    }
    Ok(g)
}

const TILE: usize = 64;

/// Row-major `rows x cols` to row-major `cols x rows`.
fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    const STRIP: usize = 16;
    let mut out = vec![0.0; data.len()];
    for r0 in (0..rows).step_by(STRIP) {
        let r1 = (r0 + STRIP).min(rows);
        for c in 0..cols {
            for (k, o) in out[c * rows + r0..c * rows + r1].iter_mut().enumerate() {
                *o = data[(r0 + k) * cols + c];
            }
        }
    }
    out
}

/// `A A^T` for an `A` whose rows are contiguous. Only the lower triangle is
/// multiplied; the upper is mirrored, so the result is exactly symmetric.
pub(crate) fn outer_gram(a: MatRef<'_, f64>) -> SquareMatrix {
    let n = a.nrows();
    let mut data = vec![0.0; n * n];
    // Written column-major; the lower triangle read back row-major is the upper.
    triangular::matmul(
        MatMut::from_column_major_slice_mut(&mut data, n, n),
        BlockStructure::TriangularLower,
        Accum::Replace,
        a,
        BlockStructure::Rectangular,
        a.transpose(),
        BlockStructure::Rectangular,
        1.0,
        Par::Seq,
    );
    for i0 in (0..n).step_by(TILE) {
        for j0 in (0..=i0).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                for j in j0..(j0 + TILE).min(i) {
                    data[i * n + j] = data[j * n + i];
                }
            }
        }
    }
    SquareMatrix { side: n, data }
}

/// All eigenvalues of a symmetric matrix, descending, negatives clamped to 0.
pub fn sym_eigenvalues(gram: &SquareMatrix) -> Result<SymmetricSpectrum> {
    if gram.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let scale = gram.max_abs();
    let asym = gram.asymmetry();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::invalid(format!(
            "matrix is not symmetric: max |G - G^T| = {asym:e} exceeds {:e}",
            SYMMETRY_TOLERANCE * scale
        )));
    }
    let n = gram.side;
    let sym;
    let data = if asym == 0.0 {
        &gram.data
    } else {
        let mut copy = gram.clone();
        copy.symmetrize();
        sym = copy;
        &sym.data
    };
    let m = MatRef::from_row_major_slice(data, n, n);
    let ascending = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let eigenvalues = ascending.into_iter().rev().map(|v| v.max(0.0)).collect();
    Ok(SymmetricSpectrum {
        eigenvalues,
        rank_bound: n,
    })
}

/// Divides each row by `||row||_2 + epsilon`. Zero rows stay zero.
pub fn l2_normalize_rows(tokens: &TokenMatrix, epsilon: f64) -> TokenMatrix {
    let mut data = tokens.data.clone();
    for row in data.chunks_exact_mut(tokens.dim) {
        let scale = 1.0 / (norm(row) + epsilon);
        row.iter_mut().for_each(|v| *v *= scale);
    }
    TokenMatrix {
        n_tokens: tokens.n_tokens,
        dim: tokens.dim,
        data,
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
///
/// Every kernel value in the crate goes through this function, which keeps
/// materialized and on-the-fly kernels bit-identical.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0_f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
