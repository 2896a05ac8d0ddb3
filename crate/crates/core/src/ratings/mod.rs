//! User/item/rating ingestion, per-item summary statistics, percentile
//! level derivation and rank distributions.

mod histogram;

pub mod fixture;

pub use histogram::{synthesize_histogram, MomentTarget, Moments, RatingHistogram, SpreadInterpretation};

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::design::{Attribute, LevelValue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub user_id: String,
    pub item_id: String,
    pub rating: u8,
}

impl RatingRecord {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, rating: u8) -> Result<Self> {
        if !(1..=5).contains(&rating) {
            return Err(Error::invalid(format!("rating {rating} outside 1..5")));
        }
        Ok(Self {
            user_id: user_id.into(),
            item_id: item_id.into(),
            rating,
        })
    }
}

/// Reads `user_id,item_id,rating` CSV. Errors carry the 1-based line number.
pub fn read_ratings_csv<R: Read>(reader: R) -> Result<Vec<RatingRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error("ratings", e))?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyInput("ratings file is empty".into()));
    }
    let want = ["user_id", "item_id", "rating"];
    if headers.len() != 3 || headers.iter().zip(want).any(|(h, w)| h.trim() != w) {
        return Err(Error::Parse {
            context: "ratings".into(),
            line: 1,
            message: format!("expected header user_id,item_id,rating, got {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error("ratings", e))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse {
            context: "ratings".into(),
            line,
            message,
        };
        let rating: i64 = row[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("rating '{}' is not an integer", &row[2])))?;
        if !(1..=5).contains(&rating) {
            return Err(bad(format!("rating {rating} outside 1..5")));
        }
        if row[0].trim().is_empty() || row[1].trim().is_empty() {
            return Err(bad("empty user or item id".into()));
        }
        out.push(RatingRecord {
            user_id: row[0].trim().to_string(),
            item_id: row[1].trim().to_string(),
            rating: rating as u8,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("ratings file has no records".into()));
    }
    Ok(out)
}

pub fn write_ratings_csv<W: Write>(writer: W, records: &[RatingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| csv_error("ratings", e))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(context: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            context: context.into(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Keeps only records whose item is in `items`.
pub fn filter_items(records: &[RatingRecord], items: &HashSet<String>) -> Vec<RatingRecord> {
    records.iter().filter(|r| items.contains(&r.item_id)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStats {
    pub item_id: String,
    pub count: u32,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// Population skewness `m3 / m2^1.5`; `None` if variance is 0 or count < 3.
    pub skewness: Option<f64>,
}

/// Per-item statistics keyed by item id.
pub fn compute_item_stats(records: &[RatingRecord]) -> Result<BTreeMap<String, ItemStats>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no rating records".into()));
    }
    let mut hist: BTreeMap<&str, [u32; 5]> = BTreeMap::new();
    for r in records {
        if !(1..=5).contains(&r.rating) {
            return Err(Error::invalid(format!("rating {} outside 1..5", r.rating)));
        }
        hist.entry(&r.item_id).or_default()[r.rating as usize - 1] += 1;
    }
    Ok(hist
        .into_iter()
        .map(|(id, counts)| {
            let m = RatingHistogram::new(counts).moments();
            (
                id.to_string(),
                ItemStats {
                    item_id: id.to_string(),
                    count: m.n,
                    mean: m.mean,
                    variance: m.variance,
                    skewness: m.skewness,
                },
            )
        })
        .collect())
}

pub fn write_item_stats_csv<W: Write>(writer: W, stats: &BTreeMap<String, ItemStats>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["item_id", "count", "mean", "variance", "skewness"])
        .map_err(|e| csv_error("item stats", e))?;
    for s in stats.values() {
        let skew = s.skewness.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            s.item_id.clone(),
            s.count.to_string(),
            s.mean.to_string(),
            s.variance.to_string(),
            skew,
        ])
        .map_err(|e| csv_error("item stats", e))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKey {
    Count,
    Mean,
    Variance,
    Skewness,
}

impl StatKey {
    pub const ALL: [StatKey; 4] = [StatKey::Count, StatKey::Mean, StatKey::Variance, StatKey::Skewness];

    pub fn name(self) -> &'static str {
        match self {
            StatKey::Count => "count",
            StatKey::Mean => "mean",
            StatKey::Variance => "variance",
            StatKey::Skewness => "skewness",
        }
    }

    /// Decimal places the derived level values are rounded to.
    pub fn display_decimals(self) -> u32 {
        match self {
            StatKey::Count => 0,
            _ => 1,
        }
    }

    pub fn value(self, s: &ItemStats) -> Option<f64> {
        match self {
            StatKey::Count => Some(s.count as f64),
            StatKey::Mean => Some(s.mean),
            StatKey::Variance => Some(s.variance),
            StatKey::Skewness => s.skewness,
        }
    }
}

/// Values of one statistic, skipping items where it is undefined.
pub fn stat_values(stats: &BTreeMap<String, ItemStats>, key: StatKey) -> Vec<f64> {
    stats.values().filter_map(|s| key.value(s)).collect()
}

/// Nearest-rank percentile: the value at 1-based position `ceil(rank/100 n)`
/// of the ascending sort.
pub fn nearest_rank(values: &[f64], rank: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values for percentile".into()));
    }
    if !(rank > 0.0 && rank < 100.0) {
        return Err(Error::invalid(format!("percentile rank {rank} outside (0, 100)")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = ((rank / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[pos.clamp(1, sorted.len()) - 1])
}

pub fn round_to(v: f64, decimals: u32) -> f64 {
    let f = 10f64.powi(decimals as i32);
    (v * f).round() / f
}

/// Low and high level for one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub low: f64,
    pub high: f64,
    pub low_rank: f64,
    pub high_rank: f64,
}

pub fn percentile_levels(values: &[f64], ranks: [f64; 2], decimals: u32) -> Result<LevelEntry> {
    if ranks[0] > ranks[1] {
        return Err(Error::invalid("low percentile rank exceeds high rank"));
    }
    Ok(LevelEntry {
        low: round_to(nearest_rank(values, ranks[0])?, decimals),
        high: round_to(nearest_rank(values, ranks[1])?, decimals),
        low_rank: ranks[0],
        high_rank: ranks[1],
    })
}

/// Low/high levels for every rating statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPlan {
    pub count: LevelEntry,
    pub mean: LevelEntry,
    pub variance: LevelEntry,
    pub skewness: LevelEntry,
}

impl LevelPlan {
    pub fn from_stats(stats: &BTreeMap<String, ItemStats>, ranks: [f64; 2]) -> Result<Self> {
        let entry = |k: StatKey| percentile_levels(&stat_values(stats, k), ranks, k.display_decimals());
        Ok(Self {
            count: entry(StatKey::Count)?,
            mean: entry(StatKey::Mean)?,
            variance: entry(StatKey::Variance)?,
            skewness: entry(StatKey::Skewness)?,
        })
    }

    pub fn entry(&self, key: StatKey) -> &LevelEntry {
        match key {
            StatKey::Count => &self.count,
            StatKey::Mean => &self.mean,
            StatKey::Variance => &self.variance,
            StatKey::Skewness => &self.skewness,
        }
    }

    /// Origin of ratings plus the four statistics, each as a two-level
    /// attribute `(low, high)`.
    ///
    /// Reference levels follow the usual reporting baseline: all users,
    /// few ratings, low mean, low variance, and the milder (high) skewness.
    pub fn to_attributes(&self) -> Result<Vec<Attribute>> {
        if !(1.0..=5.0).contains(&self.mean.low) || !(1.0..=5.0).contains(&self.mean.high) {
            return Err(Error::invalid("mean levels must lie in [1, 5]"));
        }
        let two = |name: &str, e: &LevelEntry, unit: &str, reference: usize| -> Result<Attribute> {
            Attribute::new(name, vec![LevelValue::Numeric(e.low), LevelValue::Numeric(e.high)], unit)?
                .with_reference(reference)
        };
        Ok(vec![
            Attribute::categorical("origin", &["Similar users", "All users"])?.with_reference(1)?,
            two("num_ratings", &self.count, "ratings", 0)?,
            two("mean", &self.mean, "stars", 0)?,
            two("variance", &self.variance, "", 0)?,
            two("skewness", &self.skewness, "", 1)?,
        ])
    }
}

/// Values sorted descending with their 1-based rank.
pub fn rank_distribution(stats: &BTreeMap<String, ItemStats>, key: StatKey) -> Vec<(usize, f64)> {
    let mut v = stat_values(stats, key);
    v.sort_by(|a, b| b.total_cmp(a));
    v.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect()
}

pub fn write_rank_csv<W: Write>(writer: W, ranks: &[(usize, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "value"]).map_err(|e| csv_error("rank", e))?;
    for (r, v) in ranks {
        w.write_record([r.to_string(), v.to_string()])
            .map_err(|e| csv_error("rank", e))?;
    }
    w.flush()?;
    Ok(())
}
