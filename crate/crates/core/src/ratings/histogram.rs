//! Five-point rating histograms and moment-matching synthesis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts for Terrible, Poor, Average, Very Good, Excellent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RatingHistogram {
    pub counts: [u32; 5],
}

/// How the spread target of a synthesized histogram is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadInterpretation {
    #[default]
    Variance,
    #[serde(alias = "sd")]
    Stddev,
}

impl std::str::FromStr for SpreadInterpretation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(Self::Variance),
            "stddev" | "sd" => Ok(Self::Stddev),
            other => Err(Error::invalid(format!("unknown spread interpretation '{other}'"))),
        }
    }
}

/// Population moments of a histogram. `skewness` is `None` when the
/// variance is zero or fewer than three ratings exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: u32,
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
}

impl Moments {
    pub fn spread(&self, how: SpreadInterpretation) -> f64 {
        match how {
            SpreadInterpretation::Variance => self.variance,
            SpreadInterpretation::Stddev => self.variance.sqrt(),
        }
    }
}

impl RatingHistogram {
    pub fn new(counts: [u32; 5]) -> Self {
        Self { counts }
    }

    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::invalid("histogram has no ratings"));
        }
        Ok(())
    }

    pub fn moments(&self) -> Moments {
        histogram_moments(&self.counts)
    }

    /// Whole-percent shares, rounded half away from zero.
    pub fn percentages(&self) -> [u32; 5] {
        let n = self.n().max(1) as f64;
        self.counts.map(|c| (100.0 * c as f64 / n).round() as u32)
    }
}

fn histogram_moments(counts: &[u32; 5]) -> Moments {
    let n: u32 = counts.iter().sum();
    let nf = n as f64;
    let mean = counts.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c as f64).sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        let d = (i + 1) as f64 - mean;
        m2 += c as f64 * d * d;
        m3 += c as f64 * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    let skewness = if n < 3 || m2 <= 1e-12 { None } else { Some(m3 / m2.powf(1.5)) };
    Moments {
        n,
        mean,
        variance: m2,
        skewness,
    }
}

/// Target moments plus the weights of the squared-deviation objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTarget {
    pub mean: f64,
    pub spread: f64,
    pub skewness: f64,
    pub weights: [f64; 3],
    pub spread_as: SpreadInterpretation,
}

impl MomentTarget {
    pub const DEFAULT_WEIGHTS: [f64; 3] = [10.0, 1.0, 1.0];

    pub fn new(mean: f64, spread: f64, skewness: f64) -> Self {
        Self {
            mean,
            spread,
            skewness,
            weights: Self::DEFAULT_WEIGHTS,
            spread_as: SpreadInterpretation::Variance,
        }
    }

    pub fn with_spread(mut self, how: SpreadInterpretation) -> Self {
        self.spread_as = how;
        self
    }

    pub fn with_weights(mut self, weights: [f64; 3]) -> Self {
        self.weights = weights;
        self
    }

    /// Weighted squared deviation. A histogram without a defined skewness
    /// (single-valued, or fewer than three ratings) counts as skewness 0.
    pub fn objective(&self, m: &Moments) -> f64 {
        let [wm, ws, wk] = self.weights;
        let dm = m.mean - self.mean;
        let ds = m.spread(self.spread_as) - self.spread;
        let dk = m.skewness.unwrap_or(0.0) - self.skewness;
        wm * dm * dm + ws * ds * ds + wk * dk * dk
    }
}

/// Exhaustively searches every split of `n` ratings over five categories
/// and returns the best match to `target`; ties go to the lexicographically
/// smallest counts.
pub fn synthesize_histogram(n: u32, target: &MomentTarget) -> Result<RatingHistogram> {
    if n == 0 {
        return Err(Error::invalid("histogram size must be at least 1"));
    }
    if !(1.0..=5.0).contains(&target.mean) {
        return Err(Error::invalid(format!("target mean {} outside [1, 5]", target.mean)));
    }
    let mut best = [0u32; 5];
    let mut best_obj = f64::INFINITY;
    // Lexicographic order, so a strict `<` keeps the smallest tie.
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                for d in 0..=n - a - b - c {
                    let counts = [a, b, c, d, n - a - b - c - d];
                    let obj = target.objective(&histogram_moments(&counts));
                    if obj < best_obj {
                        best_obj = obj;
                        best = counts;
                    }
                }
            }
        }
    }
    Ok(RatingHistogram::new(best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_excellent_is_forced() {
        let t = MomentTarget::new(5.0, 0.0, -0.7);
        assert_eq!(synthesize_histogram(20, &t).unwrap().counts, [0, 0, 0, 0, 20]);
    }

    #[test]
    fn first_profile_targets_hit_the_mean() {
        let h = synthesize_histogram(20, &MomentTarget::new(3.7, 0.7, -1.2)).unwrap();
        assert_eq!(h.n(), 20);
        assert!((h.moments().mean - 3.7).abs() <= 0.1);
    }

    #[test]
    fn moments_of_small_histograms() {
        let m = RatingHistogram::new([1, 0, 0, 0, 1]).moments();
        assert_eq!(m.mean, 3.0);
        assert_eq!(m.variance, 4.0);
        assert_eq!(m.skewness, None);
        let m = RatingHistogram::new([0, 0, 3, 0, 0]).moments();
        assert_eq!(m.skewness, None);
    }

    #[test]
    fn rejects_out_of_range_mean() {
        assert!(synthesize_histogram(10, &MomentTarget::new(5.5, 0.0, 0.0)).is_err());
        assert!(synthesize_histogram(0, &MomentTarget::new(3.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn spread_interpretation_parses() {
        assert_eq!("stddev".parse::<SpreadInterpretation>().unwrap(), SpreadInterpretation::Stddev);
        assert_eq!("variance".parse::<SpreadInterpretation>().unwrap(), SpreadInterpretation::Variance);
        assert!("range".parse::<SpreadInterpretation>().is_err());
    }
}
