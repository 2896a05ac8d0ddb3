use std::collections::HashSet;

use conjoint_core::design::{
    build_choice_sets, d_efficiency, diagnostics, encode, enumerate_full_factorial, Attribute, ChoiceSet, Coding,
    Design, Profile, SearchConfig,
};
use conjoint_core::presets;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn attrs_with(levels: &[usize]) -> Vec<Attribute> {
    levels
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let vals: Vec<f64> = (0..n).map(|l| l as f64).collect();
            Attribute::numeric(format!("a{k}"), &vals, "").unwrap()
        })
        .collect()
}

fn shuffled_pairing(profiles: &[Profile], m: usize, seed: u64) -> Vec<ChoiceSet> {
    let mut ids: Vec<u32> = profiles.iter().map(|p| p.id).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ids.chunks(m).map(|c| ChoiceSet(c.to_vec())).collect()
}

/// Determinant by cofactor expansion along the first row.
fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
                .collect();
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][c] * cofactor_det(&minor)
        })
        .sum()
}

fn efficiency_oracle(design: &Design) -> Option<f64> {
    // +1 / -1 coding written out directly for two-level attributes
    let rows: Vec<Vec<f64>> = design
        .occurrence_levels()
        .iter()
        .map(|lv| lv.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect())
        .collect();
    let p = rows[0].len();
    let n = rows.len() as f64;
    let xtx: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| rows.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let det = cofactor_det(&xtx);
    if det <= 1e-9 {
        return None;
    }
    Some(100.0 * det.powf(1.0 / p as f64) / n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorial_size_and_distinctness(levels in prop::collection::vec(2usize..5, 1..5)) {
        let attrs = attrs_with(&levels);
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        prop_assert_eq!(profiles.len(), levels.iter().product::<usize>());
        let distinct: HashSet<_> = profiles.iter().map(|p| p.levels.clone()).collect();
        prop_assert_eq!(distinct.len(), profiles.len());
    }

    #[test]
    fn balanced_design_codings(levels in prop::collection::vec(2usize..4, 1..4), seed in any::<u64>()) {
        let attrs = attrs_with(&levels);
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let k = profiles.len();
        let m = if k.is_multiple_of(2) { 2 } else { 3 };
        prop_assume!(k.is_multiple_of(m));
        let sets = shuffled_pairing(&profiles, m, seed);
        let d = Design::new(attrs.clone(), profiles, sets, seed).unwrap();
        let x = encode(&d, Coding::Contrast);
        for c in 0..x.rows.cols() {
            let s: f64 = (0..x.rows.rows()).map(|r| x.rows[(r, c)]).sum();
            prop_assert!(s.abs() < 1e-9);
        }
        let ind = encode(&d, Coding::Indicator);
        for r in 0..ind.rows.rows() {
            let s: f64 = ind.rows.row(r).iter().sum();
            prop_assert_eq!(s, attrs.len() as f64);
        }
    }

    #[test]
    fn efficiency_ignores_order(seed in any::<u64>(), shuffle in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 16)) {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = shuffled_pairing(&profiles, 2, seed);
        let d = Design::new(attrs, profiles, sets.clone(), 0).unwrap();
        let base = d_efficiency(&encode(&d, Coding::Contrast));

        let mut moved = sets;
        moved.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        for (s, f) in moved.iter_mut().zip(&flips) {
            if *f {
                s.0.reverse();
            }
        }
        let d2 = d.with_choice_sets(moved).unwrap();
        let other = d_efficiency(&encode(&d2, Coding::Contrast));
        match (base, other) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0)),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "efficiency defined for only one ordering"),
        }
    }

    #[test]
    fn random_pairing_matches_cofactor_oracle(seed in any::<u64>()) {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = shuffled_pairing(&profiles, 2, seed);
        let d = Design::new(attrs, profiles, sets, 0).unwrap();
        match (d_efficiency(&encode(&d, Coding::Contrast)), efficiency_oracle(&d)) {
            (Ok(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9 * b.max(1.0)),
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn diagnostics_match_counting(levels in prop::collection::vec(2usize..4, 2..4), seed in any::<u64>()) {
        let attrs = attrs_with(&levels);
        let mut profiles = enumerate_full_factorial(&attrs).unwrap();
        profiles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        profiles.truncate(profiles.len() / 2 * 2);
        let sets = shuffled_pairing(&profiles, 2, seed ^ 1);
        let d = Design::new(attrs.clone(), profiles, sets, 0).unwrap();
        let got = diagnostics(&d);

        let mut overlap = 0;
        let mut max_dev = 0;
        for (k, a) in attrs.iter().enumerate() {
            let mut counts = vec![0u32; a.n_levels()];
            for cs in d.choice_sets() {
                let lv: Vec<usize> = cs.0.iter().map(|id| d.profile(*id).unwrap().levels[k]).collect();
                for &l in &lv {
                    counts[l] += 1;
                }
                if lv[0] == lv[1] {
                    overlap += 1;
                }
            }
            let dev = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            max_dev = max_dev.max(dev);
        }
        prop_assert_eq!(got.overlap_total, overlap);
        prop_assert_eq!(got.level_balance_deviation, max_dev);
        prop_assert!(got.orthogonality_max_corr >= 0.0 && got.orthogonality_max_corr <= 1.0 + 1e-12);
    }

    #[test]
    fn search_is_reproducible(seed in 0u64..1000) {
        let attrs = attrs_with(&[3, 3]);
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let cfg = SearchConfig { n_sets: 3, m: 3, seed, max_iters: 50 };
        let a = build_choice_sets(&attrs, &profiles, cfg).unwrap();
        let b = build_choice_sets(&attrs, &profiles, cfg).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}

#[test]
fn complementary_design_is_fully_efficient() {
    let attrs = presets::study_attributes();
    let profiles = enumerate_full_factorial(&attrs).unwrap();
    let d = build_choice_sets(&attrs, &profiles, SearchConfig::default()).unwrap();
    let eff = d_efficiency(&encode(&d, Coding::Contrast)).unwrap();
    assert!((eff - 100.0).abs() <= 1e-9 * 100.0);
    assert_eq!(efficiency_oracle(&d).unwrap().round(), 100.0);
}

#[test]
fn search_beats_random_pairings() {
    let attrs = attrs_with(&[2, 2, 2]);
    let profiles = enumerate_full_factorial(&attrs).unwrap();
    let cfg = SearchConfig { n_sets: 4, m: 2, seed: 5, max_iters: 200 };
    let found = build_choice_sets(&attrs, &profiles, cfg).unwrap();
    let best = d_efficiency(&encode(&found, Coding::Contrast)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let mut ids: Vec<u32> = profiles.iter().map(|p| p.id).collect();
        ids.shuffle(&mut rng);
        let sets = ids.chunks(2).map(|c| ChoiceSet(c.to_vec())).collect();
        let d = Design::new(attrs.clone(), profiles.clone(), sets, 0).unwrap();
        if let Some(e) = efficiency_oracle(&d) {
            assert!(best >= e - 1e-9, "random pairing reached {e}, search {best}");
        }
    }
}

#[test]
fn removing_a_set_never_exceeds_full_efficiency() {
    let attrs = presets::study_attributes();
    let profiles = enumerate_full_factorial(&attrs).unwrap();
    let d = build_choice_sets(&attrs, &profiles, SearchConfig::default()).unwrap();
    for drop in 0..d.n_sets() {
        let mut sets = d.choice_sets().to_vec();
        sets.remove(drop);
        let smaller = d.with_choice_sets(sets).unwrap();
        if let Ok(e) = d_efficiency(&encode(&smaller, Coding::Contrast)) {
            assert!(e <= 100.0 + 1e-9);
        }
    }
}
