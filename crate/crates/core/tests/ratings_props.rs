use conjoint_core::ratings::{
    compute_item_stats, nearest_rank, percentile_levels, synthesize_histogram, MomentTarget, RatingHistogram,
    RatingRecord, SpreadInterpretation,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spread() -> impl Strategy<Value = SpreadInterpretation> {
    prop_oneof![Just(SpreadInterpretation::Variance), Just(SpreadInterpretation::Stddev)]
}

/// Objective of every composition of `n`, and the first (lexicographic) argmin.
fn brute_force(n: u32, t: &MomentTarget) -> ([u32; 5], f64) {
    let mut best = ([0; 5], f64::INFINITY);
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                for d in 0..=n - a - b - c {
                    let h = RatingHistogram::new([a, b, c, d, n - a - b - c - d]);
                    let o = t.objective(&h.moments());
                    if o < best.1 {
                        best = (h.counts, o);
                    }
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthesis_is_a_fixed_point(n in 3u32..40, mean in 1.0f64..5.0, sp in 0.0f64..2.0, sk in -2.0f64..2.0, how in spread()) {
        let t = MomentTarget::new(mean, sp, sk).with_spread(how);
        let h = synthesize_histogram(n, &t).unwrap();
        let m = h.moments();
        let back = MomentTarget::new(m.mean, m.spread(how), m.skewness.unwrap_or(0.0)).with_spread(how);
        prop_assert_eq!(synthesize_histogram(n, &back).unwrap(), h);
    }

    #[test]
    fn synthesis_is_globally_optimal(n in 1u32..25, mean in 1.0f64..5.0, sp in 0.0f64..2.0, sk in -2.0f64..2.0, how in spread()) {
        let t = MomentTarget::new(mean, sp, sk).with_spread(how);
        let h = synthesize_histogram(n, &t).unwrap();
        let (oracle, best) = brute_force(n, &t);
        prop_assert_eq!(h.counts, oracle);
        prop_assert!(t.objective(&h.moments()) <= best);
    }

    #[test]
    fn percentiles_are_monotone(values in prop::collection::vec(-100.0f64..100.0, 1..60), r1 in 0.01f64..100.0, r2 in 0.01f64..100.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(nearest_rank(&values, lo).unwrap() <= nearest_rank(&values, hi).unwrap());
        let e = percentile_levels(&values, [lo, hi], 1).unwrap();
        prop_assert!(e.low <= e.high);
    }

    #[test]
    fn stats_ignore_record_order(ratings in prop::collection::vec((0usize..6, 1u8..=5), 1..80), seed in any::<u64>()) {
        let records: Vec<RatingRecord> = ratings
            .iter()
            .enumerate()
            .map(|(u, (item, r))| RatingRecord::new(format!("u{u}"), format!("i{item}"), *r).unwrap())
            .collect();
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(compute_item_stats(&records).unwrap(), compute_item_stats(&shuffled).unwrap());
    }

    #[test]
    fn stats_match_two_pass(ratings in prop::collection::vec(1u8..=5, 50)) {
        let records: Vec<RatingRecord> = ratings
            .iter()
            .enumerate()
            .map(|(u, r)| RatingRecord::new(format!("u{u}"), "h", *r).unwrap())
            .collect();
        let s = &compute_item_stats(&records).unwrap()["h"];
        let x: Vec<f64> = ratings.iter().map(|&r| r as f64).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        prop_assert_eq!(s.count, 50);
        prop_assert!((s.mean - mean).abs() < 1e-12);
        prop_assert!((s.variance - m2).abs() < 1e-12);
        match s.skewness {
            Some(k) => prop_assert!((k - m3 / m2.powf(1.5)).abs() < 1e-9),
            None => prop_assert!(m2 <= 1e-12),
        }
    }
}

#[test]
fn nearest_rank_matches_sort_oracle_on_1000_items() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values: Vec<f64> = (0..1000).map(|_| rand::Rng::random_range(&mut rng, 0.0..50.0)).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    for rank in [1.0, 10.0, 30.0, 50.0, 70.0, 99.9] {
        let idx = ((rank / 100.0) * 1000.0f64).ceil() as usize;
        assert_eq!(nearest_rank(&values, rank).unwrap(), sorted[idx.max(1) - 1]);
    }
}
