//! Published reference values used by the acceptance suite.

/// One published profile row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedProfile {
    /// 0 for similar users, 1 for all users.
    pub origin: usize,
    pub num_ratings: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Terrible, Poor, Average, Very Good, Excellent, in percent.
    pub shares: [u32; 5],
}

const fn row(origin: usize, num_ratings: f64, mean: f64, variance: f64, skewness: f64, shares: [u32; 5]) -> PublishedProfile {
    PublishedProfile {
        origin,
        num_ratings,
        mean,
        variance,
        skewness,
        shares,
    }
}

/// The 32 profiles in published order.
pub const PUBLISHED_PROFILES: [PublishedProfile; 32] = [
    row(0, 20.0, 3.7, 0.7, -1.2, [3, 8, 18, 65, 8]),
    row(0, 20.0, 3.7, 0.7, -0.5, [3, 0, 38, 45, 15]),
    row(0, 20.0, 3.7, 1.3, -1.2, [10, 3, 15, 55, 18]),
    row(0, 20.0, 3.7, 1.3, -0.5, [3, 15, 20, 28, 35]),
    row(0, 20.0, 4.3, 0.7, -1.2, [0, 5, 8, 35, 53]),
    row(0, 20.0, 4.3, 0.7, -0.5, [0, 0, 23, 28, 50]),
    row(0, 20.0, 4.3, 1.3, -1.2, [0, 18, 3, 15, 65]),
    row(0, 20.0, 4.3, 1.3, -0.5, [0, 8, 25, 8, 60]),
    row(0, 70.0, 3.7, 0.7, -1.2, [3, 8, 18, 65, 8]),
    row(0, 70.0, 3.7, 0.7, -0.5, [3, 0, 38, 45, 15]),
    row(0, 70.0, 3.7, 1.3, -1.2, [10, 3, 15, 55, 18]),
    row(0, 70.0, 3.7, 1.3, -0.5, [3, 15, 20, 28, 35]),
    row(0, 70.0, 4.3, 0.7, -1.2, [0, 5, 8, 35, 53]),
    row(0, 70.0, 4.3, 0.7, -0.5, [0, 0, 23, 28, 50]),
    row(0, 70.0, 4.3, 1.3, -1.2, [0, 18, 3, 15, 65]),
    row(0, 70.0, 4.3, 1.3, -0.5, [0, 8, 25, 8, 60]),
    row(1, 20.0, 3.7, 0.7, -1.2, [3, 8, 18, 65, 8]),
    row(1, 20.0, 3.7, 0.7, -0.5, [3, 0, 38, 45, 15]),
    row(1, 20.0, 3.7, 1.3, -1.2, [10, 3, 15, 55, 18]),
    row(1, 20.0, 3.7, 1.3, -0.5, [3, 15, 20, 28, 35]),
    row(1, 20.0, 4.3, 0.7, -1.2, [0, 5, 8, 35, 53]),
    row(1, 20.0, 4.3, 0.7, -0.5, [0, 0, 23, 28, 50]),
    row(1, 20.0, 4.3, 1.3, -1.2, [0, 18, 3, 15, 65]),
    row(1, 20.0, 4.3, 1.3, -0.5, [0, 8, 25, 8, 60]),
    row(1, 70.0, 3.7, 0.7, -1.2, [3, 8, 18, 65, 8]),
    row(1, 70.0, 3.7, 0.7, -0.5, [3, 0, 38, 45, 15]),
    row(1, 70.0, 3.7, 1.3, -1.2, [10, 3, 15, 55, 18]),
    row(1, 70.0, 3.7, 1.3, -0.5, [3, 15, 20, 28, 35]),
    row(1, 70.0, 4.3, 0.7, -1.2, [0, 5, 8, 35, 53]),
    row(1, 70.0, 4.3, 0.7, -0.5, [0, 0, 23, 28, 50]),
    row(1, 70.0, 4.3, 1.3, -1.2, [0, 18, 3, 15, 65]),
    row(1, 70.0, 4.3, 1.3, -0.5, [0, 8, 25, 8, 60]),
];

/// Whole-sample part-worths and the standard error printed with them.
pub const WHOLE_SAMPLE_BETAS: [f64; 5] = [0.37, 0.89, 1.18, -0.18, 0.02];
pub const WHOLE_SAMPLE_SE: f64 = 0.05;

pub const PUBLISHED_LOG_LIKELIHOOD: f64 = -1484.8;
pub const PUBLISHED_NULL_LOG_LIKELIHOOD: f64 = -2018.45;
pub const PUBLISHED_MCFADDEN_R2: f64 = 0.26;

/// Published rating-statistic levels: count, mean, variance, skewness as
/// (low, high).
pub const PUBLISHED_LEVELS: [(f64, f64); 4] = [(20.0, 70.0), (3.7, 4.3), (0.7, 1.3), (-1.2, -0.5)];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_complete() {
        let mut seen = std::collections::HashSet::new();
        for p in PUBLISHED_PROFILES {
            assert!(p.shares.iter().sum::<u32>().abs_diff(100) <= 2, "{p:?}");
            seen.insert((p.origin, p.num_ratings as u32, (p.mean * 10.0) as i32, (p.variance * 10.0) as i32, (p.skewness * 10.0) as i32));
        }
        assert_eq!(seen.len(), 32);
    }
}
