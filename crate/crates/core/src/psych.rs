//! Six-item maximization scale: subscale scoring, Cronbach's alpha and
//! median splits.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::csv_error;

/// Answers on a 1..7 agreement scale, ordered as two alternative-search
/// items, two decision-difficulty items, two high-standards items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleResponse {
    pub respondent_id: String,
    pub items: [u8; 6],
}

impl ScaleResponse {
    pub fn new(respondent_id: impl Into<String>, items: [u8; 6]) -> Result<Self> {
        let r = Self {
            respondent_id: respondent_id.into(),
            items,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.items.iter().find(|v| !(1..=7).contains(*v)) {
            return Err(Error::invalid(format!(
                "respondent {}: item value {bad} outside 1..7",
                self.respondent_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    AltSearch,
    DecisionDifficulty,
    HighStandards,
    Overall,
}

impl Dimension {
    pub const SUBSCALES: [Dimension; 3] = [Dimension::AltSearch, Dimension::DecisionDifficulty, Dimension::HighStandards];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::AltSearch => "alt_search",
            Dimension::DecisionDifficulty => "decision_difficulty",
            Dimension::HighStandards => "high_standards",
            Dimension::Overall => "overall",
        }
    }

    /// Item positions (0-based) that make up this dimension.
    pub fn items(self) -> &'static [usize] {
        match self {
            Dimension::AltSearch => &[0, 1],
            Dimension::DecisionDifficulty => &[2, 3],
            Dimension::HighStandards => &[4, 5],
            Dimension::Overall => &[0, 1, 2, 3, 4, 5],
        }
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alt_search" => Ok(Dimension::AltSearch),
            "decision_difficulty" => Ok(Dimension::DecisionDifficulty),
            "high_standards" => Ok(Dimension::HighStandards),
            "overall" => Ok(Dimension::Overall),
            other => Err(Error::invalid(format!("unknown scale dimension '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizationProfile {
    pub respondent_id: String,
    /// Alternative search, decision difficulty, high standards.
    pub subscale_scores: [f64; 3],
    pub overall_score: f64,
}

impl MaximizationProfile {
    pub fn score_for(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::AltSearch => self.subscale_scores[0],
            Dimension::DecisionDifficulty => self.subscale_scores[1],
            Dimension::HighStandards => self.subscale_scores[2],
            Dimension::Overall => self.overall_score,
        }
    }
}

/// Item means per subscale and overall.
pub fn score(responses: &[ScaleResponse]) -> Result<Vec<MaximizationProfile>> {
    responses
        .iter()
        .map(|r| {
            r.validate()?;
            let mean = |idx: &[usize]| idx.iter().map(|&i| r.items[i] as f64).sum::<f64>() / idx.len() as f64;
            Ok(MaximizationProfile {
                respondent_id: r.respondent_id.clone(),
                subscale_scores: Dimension::SUBSCALES.map(|d| mean(d.items())),
                overall_score: mean(Dimension::Overall.items()),
            })
        })
        .collect()
}

fn population_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Cronbach's alpha over `items[respondent][item]`, population variances.
pub fn cronbach_alpha(items: &[Vec<f64>]) -> Result<f64> {
    let n = items.len();
    if n < 2 {
        return Err(Error::invalid("alpha needs at least 2 respondents"));
    }
    let k = items[0].len();
    if k < 2 || items.iter().any(|r| r.len() != k) {
        return Err(Error::invalid("alpha needs at least 2 items and equal-length rows"));
    }
    let item_var_sum: f64 = (0..k)
        .map(|j| population_variance(&items.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .sum();
    let totals: Vec<f64> = items.iter().map(|r| r.iter().sum()).collect();
    let total_var = population_variance(&totals);
    if total_var <= 0.0 {
        return Err(Error::invalid("total-score variance is zero"));
    }
    let kf = k as f64;
    Ok(kf / (kf - 1.0) * (1.0 - item_var_sum / total_var))
}

/// Alpha of one dimension's items across respondents.
pub fn dimension_alpha(responses: &[ScaleResponse], dim: Dimension) -> Result<f64> {
    let rows: Vec<Vec<f64>> = responses
        .iter()
        .map(|r| dim.items().iter().map(|&i| r.items[i] as f64).collect())
        .collect();
    cronbach_alpha(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    High,
    Low,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::High => "High",
            Group::Low => "Low",
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "high" => Ok(Group::High),
            "low" => Ok(Group::Low),
            other => Err(Error::invalid(format!("unknown group '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub groups: BTreeMap<String, Group>,
    pub split_value: f64,
    pub dimension: Dimension,
}

impl SplitAssignment {
    pub fn n_in(&self, g: Group) -> usize {
        self.groups.values().filter(|&&x| x == g).count()
    }

    /// One of the groups is empty.
    pub fn is_degenerate(&self) -> bool {
        self.n_in(Group::High) == 0 || self.n_in(Group::Low) == 0
    }

    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            dimension: self.dimension,
            split_value: self.split_value,
            n_high: self.n_in(Group::High),
            n_low: self.n_in(Group::Low),
            degenerate_flag: self.is_degenerate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub dimension: Dimension,
    pub split_value: f64,
    pub n_high: usize,
    pub n_low: usize,
    pub degenerate_flag: bool,
}

/// Splits at the nearest-rank median; scores equal to it go to Low.
pub fn median_split(profiles: &[MaximizationProfile], dimension: Dimension) -> Result<SplitAssignment> {
    if profiles.len() < 2 {
        return Err(Error::invalid("median split needs at least 2 respondents"));
    }
    let mut scores: Vec<f64> = profiles.iter().map(|p| p.score_for(dimension)).collect();
    scores.sort_by(f64::total_cmp);
    let pos = (scores.len() as f64 * 0.5).ceil() as usize;
    let median = scores[pos.max(1) - 1];
    let groups = profiles
        .iter()
        .map(|p| {
            let g = if p.score_for(dimension) > median { Group::High } else { Group::Low };
            (p.respondent_id.clone(), g)
        })
        .collect();
    Ok(SplitAssignment {
        groups,
        split_value: median,
        dimension,
    })
}

/// Reads `respondent_id,item1..item6`.
pub fn read_responses_csv<R: Read>(reader: R) -> Result<Vec<ScaleResponse>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error("responses", e))?.clone();
    if headers.len() != 7 || headers[0].trim() != "respondent_id" {
        return Err(Error::Parse {
            context: "responses".into(),
            line: 1,
            message: "expected header respondent_id,item1,...,item6".into(),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error("responses", e))?;
        let line = row.position().map_or(0, |p| p.line());
        let mut items = [0u8; 6];
        for (k, slot) in items.iter_mut().enumerate() {
            let v: u8 = row[k + 1].trim().parse().map_err(|_| Error::Parse {
                context: "responses".into(),
                line,
                message: format!("item{} '{}' is not an integer", k + 1, &row[k + 1]),
            })?;
            if !(1..=7).contains(&v) {
                return Err(Error::Parse {
                    context: "responses".into(),
                    line,
                    message: format!("item{} value {v} outside 1..7", k + 1),
                });
            }
            *slot = v;
        }
        out.push(ScaleResponse {
            respondent_id: row[0].trim().to_string(),
            items,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("responses file has no records".into()));
    }
    Ok(out)
}

pub fn write_profiles_csv<W: Write>(writer: W, profiles: &[MaximizationProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["respondent_id", "alt_search", "decision_difficulty", "high_standards", "overall"])
        .map_err(|e| csv_error("profiles", e))?;
    for p in profiles {
        let [a, d, h] = p.subscale_scores;
        w.write_record([
            p.respondent_id.clone(),
            a.to_string(),
            d.to_string(),
            h.to_string(),
            p.overall_score.to_string(),
        ])
        .map_err(|e| csv_error("profiles", e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_split_csv<W: Write>(writer: W, split: &SplitAssignment) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["respondent_id", "group"]).map_err(|e| csv_error("split", e))?;
    for (id, g) in &split.groups {
        w.write_record([id.as_str(), g.name()]).map_err(|e| csv_error("split", e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_split_csv<R: Read>(reader: R) -> Result<BTreeMap<String, Group>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error("split", e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            return Err(Error::Parse {
                context: "split".into(),
                line,
                message: "expected respondent_id,group".into(),
            });
        }
        let g: Group = row[1].trim().parse().map_err(|e: Error| Error::Parse {
            context: "split".into(),
            line,
            message: e.to_string(),
        })?;
        out.insert(row[0].trim().to_string(), g);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("split file has no records".into()));
    }
    Ok(out)
}
