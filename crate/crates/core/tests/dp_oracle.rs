use proptest::prelude::*;

use relaysim::channel::{ChannelDraw, SystemParams};
use relaysim::engine::{fading_trace, policy_dice, replay, DicePolicy};
use relaysim::oracle::dp::{dp_offline_optimum, exhaustive_optimum, replay_packets, EXHAUSTIVE_MAX};
use relaysim::rng::stream;

fn params() -> impl Strategy<Value = SystemParams> {
    (
        0.3f64..3.0,
        0.3f64..3.0,
        -3.0f64..15.0,
        prop::sample::select(vec![0.5, 1.0, 2.0]),
    )
        .prop_map(|(o1, o2, db, r)| SystemParams::new(o1, o2, 10f64.powf(db / 10.0), r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn dp_equals_enumeration(sp in params(), seed in 0u64..10_000, n in 0usize..=6) {
        let f = fading_trace(&sp, n, &mut stream(seed, 0));
        let dp = dp_offline_optimum(&f, sp.thresholds(), sp.rate0, 100).unwrap();
        prop_assert_eq!(dp.delivered, exhaustive_optimum(&f, sp.thresholds(), sp.rate0).unwrap());
        prop_assert_eq!(replay_packets(&f, &dp.modes, sp.thresholds()), dp.delivered_packets);
    }

    #[test]
    fn dp_dominates_the_policy(sp in params(), seed in 0u64..10_000, n in 1usize..400) {
        let f = fading_trace(&sp, n, &mut stream(seed, 1));
        let dp = dp_offline_optimum(&f, sp.thresholds(), sp.rate0, 1000).unwrap();
        let dice = policy_dice(&sp, None).unwrap();
        for k in 0..3 {
            let out = replay(&mut DicePolicy { dice }, &f, sp.thresholds(), sp.rate0, &mut stream(seed, 10 + k)).unwrap();
            prop_assert!(dp.delivered >= out.report.r_sum * n as f64 - 1e-9);
        }
    }
}

#[test]
fn dp_equals_enumeration_at_full_length() {
    for (k, db) in [0.0, 4.0, 8.0, 12.0].into_iter().enumerate() {
        let sp = SystemParams::new(1.0, 1.5, 10f64.powf(db / 10.0), 1.0).unwrap();
        let f = fading_trace(&sp, EXHAUSTIVE_MAX, &mut stream(3, k as u64));
        let dp = dp_offline_optimum(&f, sp.thresholds(), 1.0, 100).unwrap();
        assert_eq!(
            dp.delivered,
            exhaustive_optimum(&f, sp.thresholds(), 1.0).unwrap(),
            "{db} dB"
        );
    }
}

#[test]
fn handcrafted_traces() {
    let thr = SystemParams::symmetric(1.0, 1.0).unwrap().thresholds();
    let d = |a: f64, b: f64| ChannelDraw::new(a, b);
    // R3 then R4: store from user 1, then hand it to user 2.
    let f = [d(2.0, 0.5), d(0.5, 2.0)];
    assert_eq!(dp_offline_optimum(&f, thr, 1.0, 10).unwrap().delivered, 1.0);
    // Nothing is decodable.
    let f = [d(0.1, 0.1); 5];
    assert_eq!(dp_offline_optimum(&f, thr, 1.0, 10).unwrap().delivered, 0.0);
    // Four strong slots: two rounds of store-both then deliver-both.
    let f = [d(5.0, 5.0); 4];
    assert_eq!(dp_offline_optimum(&f, thr, 1.0, 10).unwrap().delivered, 4.0);
}
