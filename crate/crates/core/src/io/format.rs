//! Little-endian binary containers.
//!
//! ```text
//! token file:    "PTM1" | n_tokens: u32 | dim: u32      | n_tokens*dim f32, row-major
//! saliency file: "PSV1" | n_heads: u32  | n_tokens: u32 | n_heads*n_tokens f32, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{FormatError, Result};
use crate::selection::HeadAttention;
use crate::tensor::TokenMatrix;

pub const TOKEN_MAGIC: [u8; 4] = *b"PTM1";
pub const SALIENCY_MAGIC: [u8; 4] = *b"PSV1";

const HEADER_LEN: usize = 12;

fn encode(magic: [u8; 4], rows: usize, cols: usize, values: impl Iterator<Item = f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * rows * cols);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Parses the header and payload, returning `(rows, cols, values)`.
fn decode(magic: [u8; 4], bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), FormatError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != magic {
            return Err(FormatError::BadMagic {
                expected: magic,
                found: bytes[..4].try_into().unwrap(),
            });
        }
        return Err(FormatError::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let found: [u8; 4] = bytes[..4].try_into().unwrap();
    if found != magic {
        return Err(FormatError::BadMagic {
            expected: magic,
            found,
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(FormatError::EmptyShape { rows, cols });
    }
    let expected = HEADER_LEN as u64 + 4 * rows as u64 * cols as u64;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(FormatError::Truncated {
            expected,
            found: actual,
        });
    }
    if actual > expected {
        return Err(FormatError::TrailingBytes {
            extra: actual - expected,
        });
    }
    let values: Vec<f32> = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(FormatError::NonFinite { index });
    }
    Ok((rows as usize, cols as usize, values))
}

pub fn encode_tokens(tokens: &TokenMatrix) -> Vec<u8> {
    encode(
        TOKEN_MAGIC,
        tokens.n_tokens(),
        tokens.dim(),
        tokens.as_slice().iter().copied(),
    )
}

pub fn decode_tokens(bytes: &[u8]) -> Result<TokenMatrix> {
    let (n, d, values) = decode(TOKEN_MAGIC, bytes)?;
    TokenMatrix::new(n, d, values.into_iter().map(f64::from).collect())
}

pub fn encode_saliency(heads: &HeadAttention) -> Vec<u8> {
    encode(
        SALIENCY_MAGIC,
        heads.n_heads,
        heads.n_tokens,
        heads.data.iter().copied(),
    )
}

pub fn decode_saliency(bytes: &[u8]) -> Result<HeadAttention> {
    let (h, n, values) = decode(SALIENCY_MAGIC, bytes)?;
    if let Some(index) = values.iter().position(|v| *v < 0.0) {
        return Err(FormatError::Negative {
            index,
            value: values[index],
        }
        .into());
    }
    HeadAttention::new(h, n, values.into_iter().map(f64::from).collect())
}

pub fn read_tokens(path: impl AsRef<Path>) -> Result<TokenMatrix> {
    decode_tokens(&fs::read(path)?)
}

pub fn write_tokens(tokens: &TokenMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_tokens(tokens))?;
    Ok(())
}

pub fn read_saliency(path: impl AsRef<Path>) -> Result<HeadAttention> {
    decode_saliency(&fs::read(path)?)
}

pub fn write_saliency(heads: &HeadAttention, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_saliency(heads))?;
    Ok(())
}
