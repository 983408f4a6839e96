use prominence_core::io::{
    decode_saliency, decode_tokens, encode_saliency, encode_tokens, estimate_kv_cache_mb,
    read_saliency, read_tokens, sub_seed, write_saliency, write_tokens,
};
use prominence_core::selection::HeadAttention;
use prominence_core::{
    estimate_prefill_flops, synth_tokens, Error, FormatError, ModelCostSpec, TokenMatrix,
};
use proptest::prelude::*;

fn f32_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f32..1e6f32, len).prop_map(|v| v.into_iter().map(f64::from).collect())
}

fn token_case() -> impl Strategy<Value = TokenMatrix> {
    (1usize..20, 1usize..20).prop_flat_map(|(n, d)| {
        f32_values(n * d).prop_map(move |v| TokenMatrix::new(n, d, v).unwrap())
    })
}

proptest! {
    #[test]
    fn token_bytes_round_trip(t in token_case()) {
        let bytes = encode_tokens(&t);
        prop_assert_eq!(bytes.len(), 12 + 4 * t.n_tokens() * t.dim());
        prop_assert_eq!(&bytes[..4], b"PTM1");
        prop_assert_eq!(decode_tokens(&bytes).unwrap(), t);
    }

    #[test]
    fn saliency_bytes_round_trip(h in 1usize..6, n in 1usize..30, seed: u64) {
        let data: Vec<f64> = (0..h * n).map(|i| f64::from((sub_seed(seed, i as u64) % 1000) as f32 / 7.0)).collect();
        let heads = HeadAttention::new(h, n, data).unwrap();
        let bytes = encode_saliency(&heads);
        prop_assert_eq!(&bytes[..4], b"PSV1");
        prop_assert_eq!(decode_saliency(&bytes).unwrap(), heads);
    }

    #[test]
    fn any_truncation_is_reported(t in token_case(), cut in 0.0..1.0f64) {
        let bytes = encode_tokens(&t);
        let keep = (cut * bytes.len() as f64) as usize;
        let err = decode_tokens(&bytes[..keep]).unwrap_err();
        let ok = matches!(err, Error::Format(FormatError::Truncated { .. }) | Error::Format(FormatError::BadMagic { .. }));
        prop_assert!(ok, "{err:?}");
    }

    #[test]
    fn sub_seeds_are_pure(seed: u64, i: u64) {
        prop_assert_eq!(sub_seed(seed, i), sub_seed(seed, i));
        prop_assert_ne!(sub_seed(seed, i), sub_seed(seed, i.wrapping_add(1)));
    }
}

#[test]
fn malformed_files_name_their_fault() {
    let t = TokenMatrix::new(4, 4, (0..16).map(f64::from).collect()).unwrap();
    let mut bytes = encode_tokens(&t);
    bytes.truncate(bytes.len() - 4);
    assert!(matches!(
        decode_tokens(&bytes),
        Err(Error::Format(FormatError::Truncated {
            expected: 76,
            found: 72
        }))
    ));
    let mut long = encode_tokens(&t);
    long.extend_from_slice(&[0; 3]);
    assert!(matches!(
        decode_tokens(&long),
        Err(Error::Format(FormatError::TrailingBytes { extra: 3 }))
    ));
    let mut magic = encode_tokens(&t);
    magic[0] = b'X';
    assert_eq!(
        decode_tokens(&magic).unwrap_err().category(),
        "format-bad-magic"
    );
    let mut nan = encode_tokens(&t);
    nan[12..16].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(
        decode_tokens(&nan),
        Err(Error::Format(FormatError::NonFinite { index: 0 }))
    ));
    // A saliency file is not a token file.
    let heads = HeadAttention::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
    assert!(decode_tokens(&encode_saliency(&heads)).is_err());
    let neg = HeadAttention {
        n_heads: 1,
        n_tokens: 2,
        data: vec![1.0, -1.0],
    };
    assert!(matches!(
        decode_saliency(&encode_saliency(&neg)),
        Err(Error::Format(FormatError::Negative { index: 1, .. }))
    ));
}

#[test]
fn files_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (tokens, _) = synth_tokens(32, 8, 4, 1e-3, 2).unwrap();
    let path = dir.path().join("a.ptm");
    write_tokens(&tokens, &path).unwrap();
    let back = read_tokens(&path).unwrap();
    assert_eq!(back.n_tokens(), 32);
    for (a, b) in back.as_slice().iter().zip(tokens.as_slice()) {
        assert_eq!(*a, f64::from(*b as f32));
    }
    let heads = HeadAttention::new(2, 3, vec![0.5, 0.25, 0.0, 1.0, 2.0, 3.0]).unwrap();
    let spath = dir.path().join("a.psv");
    write_saliency(&heads, &spath).unwrap();
    assert_eq!(read_saliency(&spath).unwrap(), heads);
    let missing = read_tokens(dir.path().join("none.ptm")).unwrap_err();
    assert_eq!(missing.category(), "io");
}

#[test]
fn synthetic_data_is_seeded() {
    let a = synth_tokens(50, 10, 3, 1e-3, 42).unwrap();
    let b = synth_tokens(50, 10, 3, 1e-3, 42).unwrap();
    let c = synth_tokens(50, 10, 3, 1e-3, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn cost_model_reference_points() {
    let spec = ModelCostSpec::llava_next_7b();
    let full = estimate_prefill_flops(2880, &spec).unwrap();
    let pruned = estimate_prefill_flops(320, &spec).unwrap();
    assert!((full / 42.6e12 - 1.0).abs() < 0.20, "{full:e}");
    assert!((pruned / 5.02e12 - 1.0).abs() < 0.25, "{pruned:e}");
    let reduction = 1.0 - pruned / full;
    assert!((reduction - 0.88).abs() < 0.02, "{reduction}");
    let base = estimate_prefill_flops(0, &spec).unwrap();
    assert!(base > 0.0);
    let mut last = base;
    for s in [1, 10, 100, 1000, 5000] {
        let v = estimate_prefill_flops(s, &spec).unwrap();
        assert!(v > last);
        last = v;
    }
    assert!((estimate_kv_cache_mb(2880, &spec, 2).unwrap() - 1440.0).abs() < 1e-9);
}
