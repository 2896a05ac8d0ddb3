//! Additive utilities, logit choice probabilities, choice simulation and
//! maximum-likelihood estimation of part-worths.

mod estimate;
mod report;
mod simulate;

pub use estimate::{fit_mnl, subgroup_fit, ChoiceData, FitSummary, MnlFit, ParameterRow};
pub use report::{render_summaries, render_table, stars};
pub use simulate::{read_observations_csv, simulate_choices, write_observations_csv, SimConfig};

use serde::{Deserialize, Serialize};

use crate::design::Attribute;
use crate::error::{Error, Result};

/// `(attribute index, level index)` of one free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamKey {
    pub attribute: usize,
    pub level: usize,
}

/// Part-worths relative to one reference level per attribute.
///
/// Parameters are ordered by attribute, then by level, skipping each
/// attribute's reference level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartWorths {
    pub keys: Vec<ParamKey>,
    pub beta: Vec<f64>,
    pub reference_levels: Vec<usize>,
}

impl PartWorths {
    pub fn zeros(attributes: &[Attribute]) -> Self {
        let reference_levels: Vec<usize> = attributes.iter().map(|a| a.reference).collect();
        let keys: Vec<ParamKey> = attributes
            .iter()
            .enumerate()
            .flat_map(|(k, a)| {
                (0..a.n_levels())
                    .filter(move |&l| l != a.reference)
                    .map(move |level| ParamKey { attribute: k, level })
            })
            .collect();
        let beta = vec![0.0; keys.len()];
        Self {
            keys,
            beta,
            reference_levels,
        }
    }

    pub fn from_values(attributes: &[Attribute], values: &[f64]) -> Result<Self> {
        let mut pw = Self::zeros(attributes);
        if values.len() != pw.beta.len() {
            return Err(Error::invalid(format!(
                "expected {} part-worths, got {}",
                pw.beta.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("part-worths must be finite"));
        }
        pw.beta.copy_from_slice(values);
        Ok(pw)
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn label(&self, i: usize, attributes: &[Attribute]) -> String {
        let k = self.keys[i];
        let a = &attributes[k.attribute];
        format!("{}={}", a.name, a.levels[k.level])
    }
}

/// Reference (dummy) coding of a level-index row: 1 in the column of each
/// non-reference level that is present.
pub fn reference_coding(attributes: &[Attribute], levels: &[usize]) -> Vec<f64> {
    let mut row = Vec::new();
    for (a, &l) in attributes.iter().zip(levels) {
        for lv in 0..a.n_levels() {
            if lv != a.reference {
                row.push(if lv == l { 1.0 } else { 0.0 });
            }
        }
    }
    row
}

/// Systematic utility `x . beta`.
pub fn deterministic_utility(row: &[f64], beta: &PartWorths) -> Result<f64> {
    if row.len() != beta.len() {
        return Err(Error::invalid(format!(
            "coded row has {} columns, part-worths have {}",
            row.len(),
            beta.len()
        )));
    }
    Ok(row.iter().zip(&beta.beta).map(|(x, b)| x * b).sum())
}

/// Max-shifted softmax.
pub fn softmax(utilities: &[f64]) -> Vec<f64> {
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = utilities.iter().map(|u| (u - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Logit probabilities of each alternative in one choice set.
pub fn choice_probabilities(rows: &[Vec<f64>], beta: &PartWorths) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::invalid("a choice set needs at least 2 alternatives"));
    }
    let u = rows
        .iter()
        .map(|r| deterministic_utility(r, beta))
        .collect::<Result<Vec<_>>>()?;
    Ok(softmax(&u))
}

/// One respondent's answer to one choice task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceObservation {
    pub respondent_id: String,
    pub choice_set_index: usize,
    pub chosen_alternative: usize,
}
