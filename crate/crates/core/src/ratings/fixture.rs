//! Bundled synthetic ratings dataset.
//!
//! Fifty hotels whose per-item statistics have 30th/70th nearest-rank
//! percentiles of 20/70 ratings, mean 3.7/4.3, variance 0.7/1.3 and
//! skewness -1.2/-0.5 (after rounding). The histograms were picked by
//! `scripts/make_fixture_histograms.py`; users are assigned here from a
//! fixed seed so the dataset also has user structure for factorization.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::RatingRecord;

pub const FIXTURE_USERS: usize = 400;
pub const FIXTURE_SEED: u64 = 2018;

/// Per-item counts of ratings 1..5.
pub const FIXTURE_HISTOGRAMS: [[u32; 5]; 50] = [
    [1, 1, 1, 2, 5],
    [2, 1, 6, 1, 0],
    [0, 1, 2, 2, 6],
    [0, 0, 1, 7, 3],
    [0, 0, 2, 3, 7],
    [0, 0, 1, 0, 11],
    [1, 1, 11, 0, 0],
    [0, 2, 1, 5, 5],
    [0, 1, 0, 3, 10],
    [0, 0, 0, 7, 7],
    [2, 0, 1, 7, 5],
    [0, 0, 0, 7, 8],
    [0, 0, 4, 8, 4],
    [1, 0, 1, 8, 6],
    [6, 0, 3, 11, 0],
    [0, 0, 0, 12, 12],
    [5, 1, 0, 20, 0],
    [0, 0, 2, 12, 14],
    [0, 1, 8, 7, 14],
    [0, 12, 18, 2, 0],
    [2, 0, 0, 20, 12],
    [4, 2, 12, 13, 5],
    [0, 0, 2, 16, 20],
    [0, 1, 17, 7, 15],
    [0, 0, 1, 22, 19],
    [4, 3, 0, 21, 16],
    [4, 1, 0, 7, 34],
    [4, 2, 1, 3, 38],
    [0, 0, 0, 15, 35],
    [1, 3, 28, 4, 16],
    [1, 6, 20, 2, 25],
    [2, 3, 7, 26, 18],
    [9, 0, 5, 37, 7],
    [1, 5, 4, 15, 35],
    [0, 31, 34, 5, 0],
    [0, 14, 20, 6, 36],
    [0, 1, 34, 16, 30],
    [7, 10, 12, 21, 36],
    [0, 1, 25, 1, 64],
    [3, 16, 20, 49, 8],
    [26, 39, 0, 36, 0],
    [1, 16, 23, 7, 59],
    [1, 17, 13, 63, 17],
    [22, 8, 15, 46, 25],
    [10, 11, 42, 55, 3],
    [7, 0, 33, 34, 52],
    [5, 5, 7, 16, 98],
    [0, 23, 42, 3, 68],
    [0, 18, 1, 12, 110],
    [7, 25, 29, 77, 8],
];

pub fn item_id(index: usize) -> String {
    format!("hotel{:03}", index + 1)
}

pub fn user_id(index: usize) -> String {
    format!("user{:03}", index + 1)
}

/// Expands the histograms into records, each item rated by distinct users.
pub fn fixture_records() -> Vec<RatingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let mut out = Vec::new();
    for (j, counts) in FIXTURE_HISTOGRAMS.iter().enumerate() {
        let mut ratings: Vec<u8> = counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k as u8 + 1, c as usize))
            .collect();
        ratings.shuffle(&mut rng);
        let mut users = index::sample(&mut rng, FIXTURE_USERS, ratings.len()).into_vec();
        users.sort_unstable();
        for (u, r) in users.into_iter().zip(ratings) {
            out.push(RatingRecord {
                user_id: user_id(u),
                item_id: item_id(j),
                rating: r,
            });
        }
    }
    out
}

/// The bundled CSV rendering of [`fixture_records`].
pub const FIXTURE_CSV: &str = include_str!("../../fixtures/ratings.csv");
