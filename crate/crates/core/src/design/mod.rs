//! Conjoint experiment structure: attributes, profiles, choice sets and
//! designs, plus their JSON document form.

mod coding;
mod efficiency;
mod search;

pub use coding::{contrast_table, encode, encode_profiles, Coding, ColumnLabel, DesignMatrix};
pub use efficiency::{d_efficiency, diagnostics, DesignDiagnostics};
pub use search::{build_choice_sets, is_complete_two_level_factorial, SearchConfig};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::RatingHistogram;

/// A single attribute level: either a label ("Similar Users") or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelValue {
    Numeric(f64),
    Label(String),
}

impl LevelValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            LevelValue::Numeric(v) => Some(*v),
            LevelValue::Label(_) => None,
        }
    }
}

impl fmt::Display for LevelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelValue::Numeric(v) => write!(f, "{v}"),
            LevelValue::Label(s) => f.write_str(s),
        }
    }
}

/// An attribute with at least two distinct, ordered levels.
///
/// `reference` is the baseline level used when part-worths are estimated
/// with reference (dummy) coding; it does not affect the design itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub levels: Vec<LevelValue>,
    #[serde(default)]
    pub display_unit: String,
    #[serde(default)]
    pub reference: usize,
}

impl Attribute {
    pub fn new(name: impl Into<String>, levels: Vec<LevelValue>, display_unit: impl Into<String>) -> Result<Self> {
        let attr = Self {
            name: name.into(),
            levels,
            display_unit: display_unit.into(),
            reference: 0,
        };
        attr.validate()?;
        Ok(attr)
    }

    pub fn numeric(name: impl Into<String>, values: &[f64], display_unit: impl Into<String>) -> Result<Self> {
        Self::new(name, values.iter().map(|&v| LevelValue::Numeric(v)).collect(), display_unit)
    }

    pub fn categorical(name: impl Into<String>, labels: &[&str]) -> Result<Self> {
        Self::new(name, labels.iter().map(|s| LevelValue::Label(s.to_string())).collect(), "")
    }

    pub fn with_reference(mut self, reference: usize) -> Result<Self> {
        self.reference = reference;
        self.validate()?;
        Ok(self)
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::invalid(format!(
                "attribute '{}' needs at least 2 levels, got {}",
                self.name,
                self.levels.len()
            )));
        }
        for (i, a) in self.levels.iter().enumerate() {
            if let LevelValue::Numeric(v) = a {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("attribute '{}' has a non-finite level", self.name)));
                }
            }
            if self.levels[..i].contains(a) {
                return Err(Error::invalid(format!("attribute '{}' repeats level {a}", self.name)));
            }
        }
        if self.reference >= self.levels.len() {
            return Err(Error::invalid(format!(
                "attribute '{}' reference level {} out of range",
                self.name, self.reference
            )));
        }
        Ok(())
    }
}

/// One hypothetical item: a level index per attribute, in attribute order.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub id: u32,
    pub levels: Vec<usize>,
    pub histogram: Option<RatingHistogram>,
}

impl Profile {
    pub fn new(id: u32, levels: Vec<usize>) -> Self {
        Self {
            id,
            levels,
            histogram: None,
        }
    }
}

/// Profile ids shown together in one choice task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChoiceSet(pub Vec<u32>);

impl ChoiceSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated choice design.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    attributes: Vec<Attribute>,
    profiles: Vec<Profile>,
    choice_sets: Vec<ChoiceSet>,
    seed: u64,
    index: HashMap<u32, usize>,
}

impl Design {
    pub fn new(
        attributes: Vec<Attribute>,
        profiles: Vec<Profile>,
        choice_sets: Vec<ChoiceSet>,
        seed: u64,
    ) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::EmptyInput("design has no attributes".into()));
        }
        for a in &attributes {
            a.validate()?;
        }
        let mut index = HashMap::with_capacity(profiles.len());
        for (pos, p) in profiles.iter().enumerate() {
            if p.levels.len() != attributes.len() {
                return Err(Error::invalid(format!(
                    "profile {} has {} levels for {} attributes",
                    p.id,
                    p.levels.len(),
                    attributes.len()
                )));
            }
            for (a, &l) in attributes.iter().zip(&p.levels) {
                if l >= a.n_levels() {
                    return Err(Error::invalid(format!(
                        "profile {} level {l} out of range for '{}'",
                        p.id, a.name
                    )));
                }
            }
            if index.insert(p.id, pos).is_some() {
                return Err(Error::invalid(format!("duplicate profile id {}", p.id)));
            }
        }
        if choice_sets.is_empty() {
            return Err(Error::EmptyInput("design has no choice sets".into()));
        }
        let m = choice_sets[0].len();
        if m < 2 {
            return Err(Error::invalid("choice sets need at least 2 alternatives"));
        }
        for (s, cs) in choice_sets.iter().enumerate() {
            if cs.len() != m {
                return Err(Error::invalid(format!(
                    "choice set {s} has {} alternatives, expected {m}",
                    cs.len()
                )));
            }
            let mut seen = HashSet::new();
            for id in &cs.0 {
                if !index.contains_key(id) {
                    return Err(Error::invalid(format!("choice set {s} references unknown profile {id}")));
                }
                if !seen.insert(*id) {
                    return Err(Error::invalid(format!("choice set {s} repeats profile {id}")));
                }
            }
        }
        Ok(Self {
            attributes,
            profiles,
            choice_sets,
            seed,
            index,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn choice_sets(&self) -> &[ChoiceSet] {
        &self.choice_sets
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Alternatives per choice set.
    pub fn m(&self) -> usize {
        self.choice_sets[0].len()
    }

    pub fn n_sets(&self) -> usize {
        self.choice_sets.len()
    }

    pub fn profile(&self, id: u32) -> Option<&Profile> {
        self.index.get(&id).map(|&i| &self.profiles[i])
    }

    /// Level-index rows in choice-set order, one per profile occurrence.
    pub fn occurrence_levels(&self) -> Vec<&[usize]> {
        self.choice_sets
            .iter()
            .flat_map(|cs| cs.0.iter())
            .map(|id| self.profile(*id).expect("validated").levels.as_slice())
            .collect()
    }

    /// Same attributes and profiles, different choice sets.
    pub fn with_choice_sets(&self, choice_sets: Vec<ChoiceSet>) -> Result<Design> {
        Design::new(self.attributes.clone(), self.profiles.clone(), choice_sets, self.seed)
    }

    pub fn set_histogram(&mut self, id: u32, histogram: RatingHistogram) -> Result<()> {
        let pos = *self
            .index
            .get(&id)
            .ok_or_else(|| Error::invalid(format!("unknown profile {id}")))?;
        self.profiles[pos].histogram = Some(histogram);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DesignDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Design> {
        let doc: DesignDoc = serde_json::from_str(text)?;
        doc.into_design()
    }
}

/// Every combination of levels, last attribute varying fastest, ids from 1.
pub fn enumerate_full_factorial(attributes: &[Attribute]) -> Result<Vec<Profile>> {
    if attributes.is_empty() {
        return Err(Error::EmptyInput("no attributes to enumerate".into()));
    }
    for a in attributes {
        a.validate()?;
    }
    let total: usize = attributes.iter().map(Attribute::n_levels).product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; attributes.len()];
    for k in 0..total {
        out.push(Profile::new(k as u32 + 1, current.clone()));
        for pos in (0..attributes.len()).rev() {
            current[pos] += 1;
            if current[pos] < attributes[pos].n_levels() {
                break;
            }
            current[pos] = 0;
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct DesignDoc {
    attributes: Vec<Attribute>,
    choice_sets: Vec<ChoiceSet>,
    profiles: Vec<ProfileDoc>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    id: u32,
    levels: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    histogram: Option<RatingHistogram>,
}

impl From<&Design> for DesignDoc {
    fn from(d: &Design) -> Self {
        let profiles = d
            .profiles
            .iter()
            .map(|p| ProfileDoc {
                id: p.id,
                levels: d
                    .attributes
                    .iter()
                    .zip(&p.levels)
                    .map(|(a, &l)| (a.name.clone(), l))
                    .collect(),
                histogram: p.histogram,
            })
            .collect();
        DesignDoc {
            attributes: d.attributes.clone(),
            choice_sets: d.choice_sets.clone(),
            profiles,
            seed: d.seed,
        }
    }
}

impl DesignDoc {
    fn into_design(self) -> Result<Design> {
        let profiles = self
            .profiles
            .into_iter()
            .map(|p| {
                let levels = self
                    .attributes
                    .iter()
                    .map(|a| {
                        p.levels.get(&a.name).copied().ok_or_else(|| {
                            Error::invalid(format!("profile {} has no level for '{}'", p.id, a.name))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if p.levels.len() != self.attributes.len() {
                    return Err(Error::invalid(format!("profile {} names unknown attributes", p.id)));
                }
                if let Some(h) = &p.histogram {
                    h.validate()?;
                }
                Ok(Profile {
                    id: p.id,
                    levels,
                    histogram: p.histogram,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Design::new(self.attributes, profiles, self.choice_sets, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn nested_loop_oracle(levels: &[usize]) -> Vec<Vec<usize>> {
        let mut rows = vec![vec![]];
        for &n in levels {
            let mut next = Vec::new();
            for r in &rows {
                for l in 0..n {
                    let mut r2 = r.clone();
                    r2.push(l);
                    next.push(r2);
                }
            }
            rows = next;
        }
        rows
    }

    #[test]
    fn study_attributes_yield_32_profiles_last_varying_fastest() {
        let profiles = enumerate_full_factorial(&presets::study_attributes()).unwrap();
        assert_eq!(profiles.len(), 32);
        // profile 1 is Similar/20/3.7/0.7/-1.2, profile 2 flips skewness, 17 switches to All users
        assert_eq!(profiles[0].levels, vec![0, 0, 0, 0, 0]);
        assert_eq!(profiles[1].levels, vec![0, 0, 0, 0, 1]);
        assert_eq!(profiles[16].levels, vec![1, 0, 0, 0, 0]);
        assert_eq!(profiles[31].levels, vec![1, 1, 1, 1, 1]);
        assert_eq!(profiles.iter().map(|p| p.id).collect::<Vec<_>>(), (1..=32).collect::<Vec<_>>());
    }

    #[test]
    fn single_binary_attribute_gives_two_profiles() {
        let a = vec![Attribute::numeric("x", &[1.0, 2.0], "").unwrap()];
        assert_eq!(enumerate_full_factorial(&a).unwrap().len(), 2);
    }

    #[test]
    fn mixed_levels_match_nested_loops() {
        let attrs = vec![
            Attribute::numeric("a", &[1.0, 2.0], "").unwrap(),
            Attribute::numeric("b", &[1.0, 2.0, 3.0], "").unwrap(),
            Attribute::numeric("c", &[1.0, 2.0], "").unwrap(),
        ];
        let got: Vec<Vec<usize>> = enumerate_full_factorial(&attrs).unwrap().into_iter().map(|p| p.levels).collect();
        assert_eq!(got.len(), 12);
        assert_eq!(got, nested_loop_oracle(&[2, 3, 2]));
    }

    #[test]
    fn enumeration_rejects_bad_attributes() {
        assert!(matches!(enumerate_full_factorial(&[]), Err(Error::EmptyInput(_))));
        let bad = Attribute {
            name: "x".into(),
            levels: vec![LevelValue::Numeric(1.0)],
            display_unit: String::new(),
            reference: 0,
        };
        assert!(enumerate_full_factorial(&[bad]).is_err());
        assert!(Attribute::numeric("dup", &[1.0, 1.0], "").is_err());
    }

    #[test]
    fn design_rejects_unknown_and_repeated_profiles() {
        let attrs = vec![Attribute::numeric("a", &[1.0, 2.0], "").unwrap()];
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        assert!(Design::new(attrs.clone(), profiles.clone(), vec![ChoiceSet(vec![1, 3])], 0).is_err());
        assert!(Design::new(attrs.clone(), profiles.clone(), vec![ChoiceSet(vec![1, 1])], 0).is_err());
        assert!(Design::new(attrs, profiles, vec![ChoiceSet(vec![1, 2])], 0).is_ok());
    }

    #[test]
    fn json_document_round_trips() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = (1..=16).map(|k| ChoiceSet(vec![k, 33 - k])).collect();
        let mut d = Design::new(attrs, profiles, sets, 7).unwrap();
        d.set_histogram(1, RatingHistogram::new([1, 2, 3, 10, 4])).unwrap();
        let text = d.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["profiles"][0]["histogram"]["counts"], serde_json::json!([1, 2, 3, 10, 4]));
        assert_eq!(v["choice_sets"][0], serde_json::json!([1, 32]));
        assert_eq!(Design::from_json(&text).unwrap(), d);
    }
}
