use prominence_core::budget::fixed_split;
use prominence_core::{allocate_budget, CompressConfig, Preset};
use proptest::prelude::*;

/// Direct textbook evaluation, no overflow guards.
fn reference_t_cov(h: f64, mu: f64, tau: f64, t: usize) -> usize {
    let s = 1.0 / (1.0 + (-(h - mu) / tau).exp());
    ((t as f64 * s).floor() as usize).min(t - 1)
}

fn preset() -> impl Strategy<Value = Preset> {
    prop_oneof![Just(Preset::Clip), Just(Preset::Qwen25Vl)]
}

proptest! {
    #[test]
    fn split_sums_to_budget(t in 1usize..5000, h in 0.0..=1.0f64, p in preset()) {
        let s = allocate_budget(h, &CompressConfig::new(t, p)).unwrap();
        prop_assert_eq!(s.t_sal + s.t_cov, t);
        prop_assert!(s.t_sal >= 1);
    }

    #[test]
    fn coverage_is_monotone(t in 1usize..2000, a in 0.0..=1.0f64, b in 0.0..=1.0f64, tau in 0.005..0.5f64) {
        let cfg = CompressConfig::new(t, Preset::Clip).with_tau(tau);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = allocate_budget(lo, &cfg).unwrap();
        let y = allocate_budget(hi, &cfg).unwrap();
        prop_assert!(x.t_cov <= y.t_cov);
    }

    #[test]
    fn matches_direct_sigmoid(t in 1usize..1000, h in 0.0..=1.0f64, mu in 0.05..0.95f64) {
        let cfg = CompressConfig::new(t, Preset::Clip).with_mu(mu);
        let s = allocate_budget(h, &cfg).unwrap();
        prop_assert_eq!(s.t_cov, reference_t_cov(h, mu, 0.02, t));
    }

    #[test]
    fn tiny_range_excursions_clamp(t in 1usize..500, e in 0.0..1e-9f64) {
        let cfg = CompressConfig::new(t, Preset::Clip);
        prop_assert_eq!(allocate_budget(-e, &cfg).unwrap(), allocate_budget(0.0, &cfg).unwrap());
        prop_assert_eq!(allocate_budget(1.0 + e, &cfg).unwrap(), allocate_budget(1.0, &cfg).unwrap());
    }

    #[test]
    fn fixed_split_is_exact(t in 1usize..1000, frac in 0.0..=1.0f64) {
        let t_sal = (frac * t as f64) as usize;
        let s = fixed_split(t_sal, 0.5, &CompressConfig::new(t, Preset::Clip)).unwrap();
        prop_assert_eq!((s.t_sal, s.t_cov), (t_sal, t - t_sal));
    }
}

#[test]
fn midpoint_gives_half() {
    for p in [Preset::Clip, Preset::Qwen25Vl] {
        for t in [1, 2, 7, 32, 64, 320, 1001] {
            let s = allocate_budget(p.mu(), &CompressConfig::new(t, p)).unwrap();
            assert_eq!(s.t_cov, t / 2, "T={t}");
        }
    }
}

#[test]
fn regimes_at_the_ends() {
    let cfg = CompressConfig::new(320, Preset::Clip);
    assert_eq!(allocate_budget(0.0, &cfg).unwrap().t_cov, 0);
    let top = allocate_budget(1.0, &cfg).unwrap().t_cov;
    assert!(top == 319 || top == 320);
}

#[test]
fn out_of_range_is_rejected() {
    let cfg = CompressConfig::new(64, Preset::Clip);
    for h in [-1e-6, 1.0 + 1e-6, f64::NAN, f64::INFINITY] {
        assert!(allocate_budget(h, &cfg).is_err());
    }
}

#[test]
fn bad_configs_are_rejected() {
    assert!(allocate_budget(0.5, &CompressConfig::new(0, Preset::Clip)).is_err());
    assert!(allocate_budget(0.5, &CompressConfig::new(8, Preset::Clip).with_tau(0.0)).is_err());
    assert!(allocate_budget(0.5, &CompressConfig::new(8, Preset::Clip).with_mu(1.0)).is_err());
    assert!(fixed_split(9, 0.5, &CompressConfig::new(8, Preset::Clip)).is_err());
}
