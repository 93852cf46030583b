use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use slack_window::hll::HllSketch;
use slack_window::space::{algo_bits, lower_bound_bits, BoundVariant, SpaceMode};
use slack_window::{
    AdditiveSummer, Epsilon, ExactSummer, Ext, MultCompactSummer, MultSummer, SlackConfig, SlackHll, SlackMax,
    SlackStdDev, WindowOracle,
};

fn big(x: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn ratio_big(r: Ratio<i128>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// (W, q, R) with q | W, W <= 64.
fn geometry() -> impl Strategy<Value = (u64, u64, u64)> {
    (prop::sample::select(vec![1u64, 2, 4, 8]), 1u64..=16, 1u64..=16)
        .prop_filter_map("W in [2, 64]", |(q, k, r)| (q * k >= 2 && q * k <= 64).then_some((q * k, q, r)))
}

fn values(r: u64, signed: bool, max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    let lo = if signed { -(r as i64) } else { 0 };
    prop::collection::vec(lo..=r as i64, 0..max_len)
}

fn eps_strategy() -> impl Strategy<Value = Epsilon> {
    prop::sample::select(vec![(1u64, 2u64), (1, 4), (1, 8), (3, 16), (1, 10)])
        .prop_map(|(n, d)| Epsilon::new(n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_matches_oracle(((w, q, r), signed) in (geometry(), any::<bool>()), seed in any::<u64>()) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_signed(signed);
        let xs: Vec<i64> = {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..rng.gen_range(0..6 * w)).map(|_| rng.gen_range(cfg.min_value()..=r as i64)).collect()
        };
        let mut s = ExactSummer::new(cfg.clone());
        let mut o = WindowOracle::new(cfg);
        for x in xs {
            s.update(x).unwrap();
            o.push(x);
            let out = s.output();
            prop_assert_eq!(out.estimate, o.sum(out.slack).unwrap());
            prop_assert_eq!(out.estimate, o.suffix(out.slack).unwrap().iter().map(|&v| i128::from(v)).sum::<i128>());
        }
    }

    #[test]
    fn additive_blocks_stay_in_range((w, q, r) in geometry(), xs in values(16, false, 400)) {
        let eps = Epsilon::new(1, 64).unwrap();
        let cfg = SlackConfig::new(w, q, r).unwrap().with_epsilon(eps);
        let mut s = AdditiveSummer::new(cfg.clone()).unwrap();
        let mut o = WindowOracle::new(cfg.clone());
        let top = 1i128 << s.upsilon2();
        let bound = big(r as i128 * w as i128) / big(64);
        for x in xs.into_iter().map(|x| x.min(r as i64)) {
            s.update(x).unwrap();
            o.push(x);
            for b in s.blocks() {
                prop_assert!((0..=top).contains(&b.units()));
            }
            let out = s.output();
            let err = (ratio_big(out.estimate) - big(o.sum(out.slack).unwrap())).abs();
            prop_assert!(err < bound);
        }
    }

    #[test]
    fn mult_sandwich_holds((w, q, r) in geometry(), eps in eps_strategy(), xs in values(16, false, 400)) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_epsilon(eps);
        let one_eps = ratio_big(eps.as_ratio()) + big(1);
        let mut s = MultSummer::new(cfg.clone()).unwrap();
        let mut o = WindowOracle::new(cfg);
        for x in xs.into_iter().map(|x| x.min(r as i64)) {
            s.update(x).unwrap();
            o.push(x);
            let out = s.output();
            let est = ratio_big(out.estimate);
            let truth = big(o.sum(out.slack).unwrap());
            if truth.is_zero() {
                prop_assert!(est.is_zero());
            } else {
                prop_assert!(&truth / &one_eps < est && est <= truth);
            }
        }
    }

    /// While a block is open with `n` elements summing to `P`, `P / base^(n/bs) < base^y <= P`.
    #[test]
    fn compact_live_exponent_invariant(
        (w, q, r) in geometry(),
        eps in eps_strategy(),
        xs in values(16, false, 300),
    ) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_epsilon(eps);
        let bs = cfg.block_size();
        let mut s = MultCompactSummer::new(cfg).unwrap();
        let base = s.base().clone();
        let (mut p, mut n) = (0u64, 0u64);
        for x in xs.into_iter().map(|x| x.min(r as i64)) {
            s.update(x).unwrap();
            if s.offset() == 0 {
                p = 0;
                n = 0;
                continue;
            }
            p += x as u64;
            n += 1;
            match s.current_exponent() {
                Ext::NegInf => prop_assert_eq!(p, 0),
                Ext::Fin(y) => {
                    let g = y.units() as u64;
                    let p_pow = BigRational::from_integer(BigInt::from(BigUint::from(p).pow(bs as u32)));
                    prop_assert!(base.pow(g) <= p_pow);
                    prop_assert!(p_pow < base.pow(g + n));
                }
            }
        }
    }

    #[test]
    fn compact_fast_path_agrees_with_verified_steps(
        (w, q, r) in geometry(),
        eps in eps_strategy(),
        xs in values(16, false, 300),
    ) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_epsilon(eps);
        let mut fast = MultCompactSummer::new(cfg.clone()).unwrap();
        let mut slow = MultCompactSummer::new(cfg).unwrap().with_verified_steps(true);
        for x in xs.into_iter().map(|x| x.min(r as i64)) {
            fast.update(x).unwrap();
            slow.update(x).unwrap();
            prop_assert_eq!(fast.current_exponent(), slow.current_exponent());
            prop_assert_eq!(fast.blocks(), slow.blocks());
        }
    }

    #[test]
    fn compact_fast_path_agrees_for_large_blocks(
        shift in 10u32..=20,
        eps in eps_strategy(),
        xs in prop::collection::vec(0i64..=1000, 1..150),
    ) {
        let cfg = SlackConfig::new(4 << shift, 4, 1000).unwrap().with_epsilon(eps);
        let mut fast = MultCompactSummer::new(cfg.clone()).unwrap();
        let mut slow = MultCompactSummer::new(cfg).unwrap().with_verified_steps(true);
        for x in xs {
            fast.update(x).unwrap();
            slow.update(x).unwrap();
            prop_assert_eq!(fast.current_exponent(), slow.current_exponent());
        }
    }

    #[test]
    fn max_matches_oracle(((w, q, r), signed) in (geometry(), any::<bool>()), xs in values(16, true, 400)) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_signed(signed);
        let mut m = SlackMax::new(cfg.clone());
        let mut o = WindowOracle::new(cfg.clone());
        for x in xs.into_iter().map(|x| x.clamp(cfg.min_value(), r as i64)) {
            m.update(x).unwrap();
            o.push(x);
            let out = m.output().unwrap();
            prop_assert_eq!(Some(out.estimate), o.max(out.slack).unwrap());
        }
    }

    #[test]
    fn exact_stddev_matches_oracle((w, q, r) in geometry(), xs in values(16, false, 300)) {
        let cfg = SlackConfig::new(w, q, r).unwrap();
        let mut s = SlackStdDev::<ExactSummer>::new(cfg.clone()).unwrap();
        let mut o = WindowOracle::new(cfg);
        for x in xs.into_iter().map(|x| x.min(r as i64)) {
            s.update(x).unwrap();
            o.push(x);
            let out = s.output().unwrap();
            let truth = o.stddev(out.slack).unwrap();
            prop_assert!((out.sigma - truth).abs() <= 1e-9 * truth);
            prop_assert!(!out.clamped);
        }
    }

    #[test]
    fn hll_merge_equals_concatenation(
        a in prop::collection::vec(any::<u32>(), 0..200),
        b in prop::collection::vec(any::<u32>(), 0..200),
        seed in any::<u64>(),
    ) {
        let mut ha = HllSketch::new(5, seed).unwrap();
        let mut hb = HllSketch::new(5, seed).unwrap();
        let mut hab = HllSketch::new(5, seed).unwrap();
        for id in &a {
            ha.update(&id.to_le_bytes());
            hab.update(&id.to_le_bytes());
        }
        for id in &b {
            hb.update(&id.to_le_bytes());
            hab.update(&id.to_le_bytes());
        }
        ha.merge(&hb).unwrap();
        prop_assert_eq!(&ha, &hab);
        let mut rev = HllSketch::new(5, seed).unwrap();
        for id in b.iter().chain(&a).rev() {
            rev.update(&id.to_le_bytes());
        }
        prop_assert_eq!(rev.query(), hab.query());
    }

    #[test]
    fn hll_registers_never_decrease(ids in prop::collection::vec(any::<u64>(), 1..300)) {
        let mut h = HllSketch::new(4, 1).unwrap();
        for id in ids {
            let before = h.registers().to_vec();
            h.update(&id.to_le_bytes());
            for (old, new) in before.iter().zip(h.registers()) {
                prop_assert!(old <= new);
                prop_assert!(new.is_none_or(|v| v <= 60));
            }
        }
    }

    #[test]
    fn slack_hll_tracks_suffix(
        k in 1u64..=8,
        q in prop::sample::select(vec![1u64, 2, 4]),
        ids in prop::collection::vec(0u16..64, 0..200),
        seed in any::<u64>(),
    ) {
        let cfg = SlackConfig::new(q * k * 2, q, 1).unwrap();
        let w = cfg.window();
        let mut s = SlackHll::new(cfg.clone(), 4, seed).unwrap();
        let mut o = WindowOracle::new(cfg.clone());
        for (t, id) in ids.iter().enumerate() {
            s.update(&id.to_le_bytes());
            o.push(id.to_le_bytes());
            let out = s.query();
            prop_assert_eq!(out.slack, (t as u64 + 1) % cfg.block_size());
            let mut fresh = HllSketch::new(4, seed).unwrap();
            let suffix = o.suffix(out.slack).unwrap();
            prop_assert_eq!(suffix.len() as u64, (t as u64 + 1).min(w + out.slack));
            for id in &suffix {
                fresh.update(id);
            }
            prop_assert_eq!(fresh.query(), out.estimate);
        }
    }

    #[test]
    fn space_totals_are_consistent(((w, q, r), signed) in (geometry(), any::<bool>())) {
        let cfg = SlackConfig::new(w, q, r).unwrap().with_signed(signed);
        for mode in [SpaceMode::Exact, SpaceMode::Max, SpaceMode::Shll { bucket_bits: 4 }] {
            let rep = algo_bits(&cfg, mode).unwrap();
            prop_assert_eq!(rep.total_bits, rep.per_variable.iter().map(|v| v.bits).sum::<u64>());
            prop_assert_eq!(&rep, &algo_bits(&cfg, mode).unwrap());
        }
        let lb = lower_bound_bits(&cfg, BoundVariant::Exact).bits().unwrap();
        prop_assert!(lb <= algo_bits(&cfg, SpaceMode::Exact).unwrap().total_bits);
    }
}
