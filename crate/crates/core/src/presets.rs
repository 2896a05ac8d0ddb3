//! Reference attribute set and published part-worths.

use crate::design::Attribute;
use crate::ratings::{LevelEntry, LevelPlan};

fn entry(low: f64, high: f64) -> LevelEntry {
    LevelEntry {
        low,
        high,
        low_rank: 30.0,
        high_rank: 70.0,
    }
}

/// Levels derived from the hotel dataset: 20/70 ratings, mean 3.7/4.3,
/// variance 0.7/1.3, skewness -1.2/-0.5.
pub fn study_level_plan() -> LevelPlan {
    LevelPlan {
        count: entry(20.0, 70.0),
        mean: entry(3.7, 4.3),
        variance: entry(0.7, 1.3),
        skewness: entry(-1.2, -0.5),
    }
}

pub fn study_attributes() -> Vec<Attribute> {
    study_level_plan().to_attributes().expect("static levels are valid")
}

/// Whole-sample estimates in attribute order: similar users, 70 ratings,
/// mean 4.3, variance 1.3, skewness -1.2 (each against its baseline).
pub const WHOLE_SAMPLE_BETAS: [f64; 5] = [0.37, 0.89, 1.18, -0.18, 0.02];
pub const WHOLE_SAMPLE_STD_ERRORS: [f64; 5] = [0.05; 5];

/// Decision-difficulty subscale, high scorers.
pub const DIFFICULTY_HIGH_BETAS: [f64; 5] = [0.29, 0.80, 1.31, -0.24, 0.02];
pub const DIFFICULTY_HIGH_STD_ERRORS: [f64; 5] = [0.08, 0.08, 0.08, 0.08, 0.07];
/// Decision-difficulty subscale, low scorers.
pub const DIFFICULTY_LOW_BETAS: [f64; 5] = [0.42, 0.96, 1.09, -0.14, 0.02];
pub const DIFFICULTY_LOW_STD_ERRORS: [f64; 5] = [0.06, 0.07, 0.07, 0.06, 0.06];

/// Overall maximization median split.
pub const MAXIMIZER_BETAS: [f64; 5] = [0.34, 0.72, 1.14, -0.18, -0.03];
pub const SATISFICER_BETAS: [f64; 5] = [0.39, 1.04, 1.23, -0.17, 0.06];

pub const STUDY_RESPONDENTS: usize = 182;
