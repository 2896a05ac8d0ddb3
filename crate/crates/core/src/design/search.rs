//! Choice-set construction.
//!
//! A complete two-level full factorial split into pairs has an exact answer:
//! pair each profile with its complement. Everything else goes through a
//! seeded swap-improvement search.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::coding::{encode_profiles, Coding};
use super::efficiency::{balance_of_rows, d_efficiency, overlap_of_rows};
use super::{Attribute, ChoiceSet, Design, Profile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_sets: usize,
    pub m: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_sets: 16,
            m: 2,
            seed: 0,
            max_iters: 200,
        }
    }
}

/// True when every attribute has two levels and `profiles` contains each
/// level combination exactly once.
pub fn is_complete_two_level_factorial(attributes: &[Attribute], profiles: &[Profile]) -> bool {
    if attributes.iter().any(|a| a.n_levels() != 2) || attributes.len() >= 32 {
        return false;
    }
    let k = 1usize << attributes.len();
    if profiles.len() != k {
        return false;
    }
    let mut seen = vec![false; k];
    for p in profiles {
        let code = p.levels.iter().fold(0usize, |acc, &l| (acc << 1) | l);
        if p.levels.len() != attributes.len() || seen[code] {
            return false;
        }
        seen[code] = true;
    }
    true
}

/// Partitions profiles into `n_sets` choice sets of `m` alternatives, each
/// profile used at most once.
pub fn build_choice_sets(attributes: &[Attribute], profiles: &[Profile], config: SearchConfig) -> Result<Design> {
    let SearchConfig {
        n_sets,
        m,
        seed,
        max_iters,
    } = config;
    if n_sets == 0 || m < 2 {
        return Err(Error::Infeasible(format!("need n_sets >= 1 and m >= 2 (got {n_sets}, {m})")));
    }
    if n_sets * m > profiles.len() {
        return Err(Error::Infeasible(format!(
            "{n_sets} sets x {m} alternatives = {} slots but only {} profiles",
            n_sets * m,
            profiles.len()
        )));
    }

    if m == 2 && n_sets * 2 == profiles.len() && is_complete_two_level_factorial(attributes, profiles) {
        return complementary_pairing(attributes, profiles, seed);
    }

    let mut ids: Vec<u32> = profiles.iter().map(|p| p.id).collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let slots = n_sets * m;
    let mut state = Layout {
        slots: ids[..slots].to_vec(),
        spare: ids[slots..].to_vec(),
        m,
    };
    let lookup: HashMap<u32, &[usize]> = profiles.iter().map(|p| (p.id, p.levels.as_slice())).collect();
    let score = |layout: &Layout| Score::of(attributes, &lookup, layout);

    let mut current = score(&state);
    for _ in 0..max_iters {
        let mut best: Option<(Score, Move)> = None;
        for mv in state.moves() {
            let cand = state.apply(mv);
            let s = score(&cand);
            let improves = match &best {
                None => s.cmp_quality(&current) == Ordering::Greater,
                Some((b, _)) => s.cmp_quality(b) == Ordering::Greater,
            };
            if improves {
                best = Some((s, mv));
            }
        }
        match best {
            Some((s, mv)) => {
                state = state.apply(mv);
                current = s;
            }
            None => break,
        }
    }

    let sets = state.canonical_sets();
    Design::new(attributes.to_vec(), profiles.to_vec(), sets, seed)
}

fn complementary_pairing(attributes: &[Attribute], profiles: &[Profile], seed: u64) -> Result<Design> {
    let mut by_code = HashMap::new();
    for p in profiles {
        let code = p.levels.iter().fold(0usize, |acc, &l| (acc << 1) | l);
        by_code.insert(code, p.id);
    }
    let full = (1usize << attributes.len()) - 1;
    let mut sets: Vec<ChoiceSet> = Vec::with_capacity(profiles.len() / 2);
    let mut ids: Vec<(u32, usize)> = profiles
        .iter()
        .map(|p| (p.id, p.levels.iter().fold(0usize, |acc, &l| (acc << 1) | l)))
        .collect();
    ids.sort_unstable();
    let mut used = HashSet::new();
    for (id, code) in ids {
        if used.contains(&id) {
            continue;
        }
        let partner = by_code[&(full ^ code)];
        used.insert(id);
        used.insert(partner);
        sets.push(ChoiceSet(vec![id.min(partner), id.max(partner)]));
    }
    Design::new(attributes.to_vec(), profiles.to_vec(), sets, seed)
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Swap(usize, usize),
    Replace(usize, usize),
}

#[derive(Debug, Clone)]
struct Layout {
    slots: Vec<u32>,
    spare: Vec<u32>,
    m: usize,
}

impl Layout {
    fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        let n = self.slots.len();
        let swaps = (0..n).flat_map(move |a| {
            (a + 1..n)
                .filter(move |b| a / self.m != b / self.m)
                .map(move |b| Move::Swap(a, b))
        });
        let replaces = (0..n).flat_map(move |a| (0..self.spare.len()).map(move |u| Move::Replace(a, u)));
        swaps.chain(replaces)
    }

    fn apply(&self, mv: Move) -> Layout {
        let mut out = self.clone();
        match mv {
            Move::Swap(a, b) => out.slots.swap(a, b),
            Move::Replace(a, u) => std::mem::swap(&mut out.slots[a], &mut out.spare[u]),
        }
        out
    }

    fn canonical_sets(&self) -> Vec<ChoiceSet> {
        let mut sets: Vec<ChoiceSet> = self
            .slots
            .chunks(self.m)
            .map(|c| {
                let mut v = c.to_vec();
                v.sort_unstable();
                ChoiceSet(v)
            })
            .collect();
        sets.sort_by(|a, b| a.0.cmp(&b.0));
        sets
    }
}

/// Search objective: efficiency first, then lower overlap, then lower
/// imbalance. Efficiencies within 1e-9 count as equal.
#[derive(Debug, Clone, Copy)]
struct Score {
    efficiency: Option<f64>,
    overlap: u32,
    imbalance: u32,
}

impl Score {
    fn of(attributes: &[Attribute], lookup: &HashMap<u32, &[usize]>, layout: &Layout) -> Score {
        let rows: Vec<&[usize]> = layout.slots.iter().map(|id| lookup[id]).collect();
        let x = encode_profiles(attributes, rows.iter().copied(), Coding::Contrast);
        Score {
            efficiency: d_efficiency(&x).ok(),
            overlap: overlap_of_rows(&rows, layout.m),
            imbalance: balance_of_rows(attributes, &rows),
        }
    }

    fn cmp_quality(&self, other: &Score) -> Ordering {
        let eff = match (self.efficiency, other.efficiency) {
            (Some(a), Some(b)) if (a - b).abs() > 1e-9 => a.partial_cmp(&b).unwrap(),
            (Some(_), None) => Ordering::Greater,
            (None, Some(_)) => Ordering::Less,
            _ => Ordering::Equal,
        };
        eff.then(other.overlap.cmp(&self.overlap))
            .then(other.imbalance.cmp(&self.imbalance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{diagnostics, encode, enumerate_full_factorial};
    use crate::presets;

    #[test]
    fn study_profiles_pair_with_their_complements() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let d = build_choice_sets(&attrs, &profiles, SearchConfig::default()).unwrap();
        assert_eq!(d.n_sets(), 16);
        for (k, cs) in d.choice_sets().iter().enumerate() {
            let k = k as u32 + 1;
            assert_eq!(cs.0, vec![k, 33 - k]);
        }
        let diag = diagnostics(&d);
        assert!((diag.d_efficiency.unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(diag.overlap_total, 0);
        assert_eq!(diag.level_balance_deviation, 0);
    }

    #[test]
    fn two_profiles_form_the_only_set() {
        let attrs = vec![Attribute::numeric("a", &[0.0, 1.0], "").unwrap()];
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let cfg = SearchConfig {
            n_sets: 1,
            ..SearchConfig::default()
        };
        let d = build_choice_sets(&attrs, &profiles, cfg).unwrap();
        assert_eq!(d.choice_sets(), &[ChoiceSet(vec![1, 2])]);
    }

    #[test]
    fn infeasible_slot_counts_are_rejected() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let cfg = SearchConfig {
            n_sets: 17,
            ..SearchConfig::default()
        };
        assert!(matches!(build_choice_sets(&attrs, &profiles, cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn three_level_search_is_reproducible() {
        let attrs = vec![
            Attribute::numeric("a", &[0.0, 1.0, 2.0], "").unwrap(),
            Attribute::numeric("b", &[0.0, 1.0, 2.0], "").unwrap(),
        ];
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let cfg = SearchConfig {
            n_sets: 3,
            m: 3,
            seed: 11,
            max_iters: 50,
        };
        let a = build_choice_sets(&attrs, &profiles, cfg).unwrap();
        let b = build_choice_sets(&attrs, &profiles, cfg).unwrap();
        assert_eq!(a, b);
        // 3x3 full factorial is balanced and orthogonal whichever way it is split
        let eff = d_efficiency(&encode(&a, Coding::Contrast)).unwrap();
        assert!((eff - 100.0).abs() < 1e-9);
        // a Latin-square split removes every overlap
        assert_eq!(diagnostics(&a).overlap_total, 0);
    }
}
