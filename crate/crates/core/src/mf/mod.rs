//! Utility-aware matrix factorization: per-user multi-attribute item
//! utilities, a factor model whose loss pulls high-utility items towards
//! the user, SGD training and 2-D projections.

mod project;
mod train;

pub use project::{decile_tags, mean_decile_distances, project_latent, write_projection_csv, Projection, ProjectedPoint, Tag};
pub use train::{
    gradient, loss, predict, train_sgd, FactorModel, Hyperparams, RatingMatrix, TrainedModel,
};

use serde::{Deserialize, Serialize};

use crate::choice::PartWorths;
use crate::design::Attribute;
use crate::error::{Error, Result};
use crate::ratings::ItemStats;

/// Attribute order used throughout: rating count, mean, variance.
pub const UTILITY_ATTRIBUTES: [&str; 3] = ["num_ratings", "mean", "variance"];

fn attribute_values(s: &ItemStats) -> [f64; 3] {
    [s.count as f64, s.mean, s.variance]
}

/// Per-attribute z-score parameters over an item population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub shift: [f64; 3],
    pub scale: [f64; 3],
}

impl Normalization {
    /// Population mean and standard deviation of each attribute. A constant
    /// attribute gets scale 1.
    pub fn fit(stats: &[ItemStats]) -> Result<Self> {
        let rows: Vec<[f64; 3]> = stats
            .iter()
            .map(attribute_values)
            .filter(|v| v.iter().all(|x| x.is_finite()))
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyInput("no items with complete statistics".into()));
        }
        let n = rows.len() as f64;
        let mut shift = [0.0; 3];
        let mut scale = [1.0; 3];
        for a in 0..3 {
            let mean = rows.iter().map(|r| r[a]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[a] - mean).powi(2)).sum::<f64>() / n;
            shift[a] = mean;
            if var > 1e-24 {
                scale[a] = var.sqrt();
            }
        }
        Ok(Self { shift, scale })
    }

    /// Converts per-unit weights into weights on z-scored attributes.
    pub fn to_z_units(&self, unit_gamma: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| unit_gamma[a] * self.scale[a])
    }
}

/// Attribute weights for each user plus the shared normalization.
///
/// A single entry in `gammas` applies to every user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    pub gammas: Vec<[f64; 3]>,
    pub normalization: Normalization,
}

impl UtilityParams {
    pub fn new(gammas: Vec<[f64; 3]>, normalization: Normalization) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::invalid("at least one weight triple is required"));
        }
        if gammas.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::invalid("utility weights must be finite"));
        }
        if normalization.scale.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::invalid("normalization scale must be positive"));
        }
        Ok(Self { gammas, normalization })
    }

    /// Same weights for everyone, given per attribute unit.
    pub fn shared_unit_weights(stats: &[ItemStats], unit_gamma: [f64; 3]) -> Result<Self> {
        let normalization = Normalization::fit(stats)?;
        Self::new(vec![normalization.to_z_units(unit_gamma)], normalization)
    }

    pub fn gamma_for(&self, user: usize) -> Result<[f64; 3]> {
        match self.gammas.len() {
            1 => Ok(self.gammas[0]),
            n if user < n => Ok(self.gammas[user]),
            n => Err(Error::invalid(format!("user {user} out of range ({n} weight triples)"))),
        }
    }
}

/// Per-unit weights from part-worths: each estimate divided by the gap
/// between its level and the reference level.
pub fn unit_gammas(attributes: &[Attribute], beta: &PartWorths) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (slot, name) in UTILITY_ATTRIBUTES.iter().enumerate() {
        let k = attributes
            .iter()
            .position(|a| a.name == *name)
            .ok_or_else(|| Error::invalid(format!("attribute '{name}' not found")))?;
        let a = &attributes[k];
        if a.n_levels() != 2 {
            return Err(Error::invalid(format!("attribute '{name}' must have 2 levels")));
        }
        let other = 1 - a.reference;
        let (Some(lo), Some(hi)) = (a.levels[a.reference].as_f64(), a.levels[other].as_f64()) else {
            return Err(Error::invalid(format!("attribute '{name}' must be numeric")));
        };
        let i = beta
            .keys
            .iter()
            .position(|key| key.attribute == k && key.level == other)
            .ok_or_else(|| Error::invalid(format!("no part-worth for '{name}'")))?;
        out[slot] = beta.beta[i] / (hi - lo);
    }
    Ok(out)
}

/// Weighted sum of z-scored attributes before any rescaling; `None` when
/// a statistic is not finite.
pub fn raw_utility(params: &UtilityParams, stats: &ItemStats, user: usize) -> Result<Option<f64>> {
    let g = params.gamma_for(user)?;
    let v = attribute_values(stats);
    if v.iter().any(|x| !x.is_finite()) {
        return Ok(None);
    }
    let n = &params.normalization;
    Ok(Some((0..3).map(|a| g[a] * (v[a] - n.shift[a]) / n.scale[a]).sum()))
}

/// Utilities of every candidate item for one user, min-max rescaled to
/// [0, 1]. All-equal utilities map to 0; excluded items are `None`.
pub fn item_utilities(params: &UtilityParams, stats: &[ItemStats], user: usize) -> Result<Vec<Option<f64>>> {
    let raw = stats
        .iter()
        .map(|s| raw_utility(params, s, user))
        .collect::<Result<Vec<_>>>()?;
    let defined = raw.iter().flatten();
    let lo = defined.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = defined.copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    Ok(raw
        .into_iter()
        .map(|r| r.map(|v| if range > 1e-12 { (v - lo) / range } else { 0.0 }))
        .collect())
}

/// Rescaled utility of item `j` among `stats` for `user`.
pub fn item_utility(params: &UtilityParams, stats: &[ItemStats], user: usize, j: usize) -> Result<f64> {
    if j >= stats.len() {
        return Err(Error::invalid(format!("item {j} out of range")));
    }
    item_utilities(params, stats, user)?[j]
        .ok_or_else(|| Error::invalid(format!("item {} has incomplete statistics", stats[j].item_id)))
}

/// Dense `n_users x n_items` utility table; excluded items get 0.
pub fn utility_matrix(params: &UtilityParams, stats: &[ItemStats], n_users: usize) -> Result<Vec<Vec<f64>>> {
    (0..n_users)
        .map(|i| Ok(item_utilities(params, stats, i)?.into_iter().map(|u| u.unwrap_or(0.0)).collect()))
        .collect()
}
