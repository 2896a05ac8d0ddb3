use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::RatingRecord;

/// Observed ratings on dense user and item indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    entries: Vec<(usize, usize, f64)>,
    n_users: usize,
    n_items: usize,
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
}

impl RatingMatrix {
    pub fn new(n_users: usize, n_items: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(i, j, r) in &entries {
            if i >= n_users || j >= n_items {
                return Err(Error::invalid(format!("rating ({i}, {j}) outside {n_users}x{n_items}")));
            }
            if !(1.0..=5.0).contains(&r) {
                return Err(Error::invalid(format!("rating {r} for ({i}, {j}) outside [1, 5]")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::invalid(format!("duplicate rating for ({i}, {j})")));
            }
        }
        Ok(Self {
            entries,
            n_users,
            n_items,
            user_ids: (0..n_users).map(|i| i.to_string()).collect(),
            item_ids: (0..n_items).map(|j| j.to_string()).collect(),
        })
    }

    /// Users and items are indexed in sorted id order.
    pub fn from_records(records: &[RatingRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput("no ratings".into()));
        }
        let users: BTreeMap<&str, usize> = records.iter().map(|r| (r.user_id.as_str(), 0)).collect();
        let items: BTreeMap<&str, usize> = records.iter().map(|r| (r.item_id.as_str(), 0)).collect();
        let users: BTreeMap<&str, usize> = users.into_keys().enumerate().map(|(i, k)| (k, i)).collect();
        let items: BTreeMap<&str, usize> = items.into_keys().enumerate().map(|(i, k)| (k, i)).collect();
        let entries = records
            .iter()
            .map(|r| (users[r.user_id.as_str()], items[r.item_id.as_str()], r.rating as f64))
            .collect();
        let mut m = Self::new(users.len(), items.len(), entries)?;
        m.user_ids = users.into_keys().map(String::from).collect();
        m.item_ids = items.into_keys().map(String::from).collect();
        Ok(m)
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub phi: f64,
    pub delta: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub k: usize,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            phi: 0.05,
            delta: 0.5,
            learning_rate: 0.01,
            epochs: 200,
            k: 2,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi >= 0.0 && self.phi.is_finite()) {
            return Err(Error::invalid("phi must be a finite value >= 0"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta must be a finite value >= 0"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be > 0"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::invalid("init_scale must be >= 0"));
        }
        Ok(())
    }
}

/// User factors `p` and item factors `q`, one row per user or item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub k: usize,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl FactorModel {
    pub fn new(p: Vec<Vec<f64>>, q: Vec<Vec<f64>>) -> Result<Self> {
        let k = p.first().or(q.first()).map_or(0, |r| r.len());
        if k == 0 {
            return Err(Error::invalid("factor dimension must be >= 1"));
        }
        if p.iter().chain(&q).any(|r| r.len() != k) {
            return Err(Error::invalid("all factor rows must have the same length"));
        }
        if p.iter().chain(&q).flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("factors must be finite"));
        }
        Ok(Self { k, p, q })
    }

    pub fn distance(&self, user: usize, item: usize) -> f64 {
        self.p[user]
            .iter()
            .zip(&self.q[item])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `p_user . q_item`, unclamped.
pub fn predict(model: &FactorModel, user: usize, item: usize) -> Result<f64> {
    let (Some(p), Some(q)) = (model.p.get(user), model.q.get(item)) else {
        return Err(Error::invalid(format!("({user}, {item}) outside the model")));
    };
    Ok(dot(p, q))
}

/// Squared error plus both penalties, accumulated once per observed rating.
pub fn loss(model: &FactorModel, data: &RatingMatrix, u: &[Vec<f64>], h: &Hyperparams) -> f64 {
    let mut total = 0.0;
    for &(i, j, r) in &data.entries {
        let p = &model.p[i];
        let q = &model.q[j];
        let e = r - dot(p, q);
        let diff: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        total += e * e + h.phi / 2.0 * (sq_norm(p) + sq_norm(q)) + h.delta / 2.0 * diff * u[i][j];
    }
    total
}

fn rating_gradient(p: &[f64], q: &[f64], r: f64, uij: f64, h: &Hyperparams) -> (Vec<f64>, Vec<f64>) {
    let e = r - dot(p, q);
    let gp = (0..p.len())
        .map(|d| -2.0 * e * q[d] + h.phi * p[d] + h.delta * uij * (p[d] - q[d]))
        .collect();
    let gq = (0..p.len())
        .map(|d| -2.0 * e * p[d] + h.phi * q[d] - h.delta * uij * (p[d] - q[d]))
        .collect();
    (gp, gq)
}

/// Full gradient of [`loss`] with respect to every factor entry.
pub fn gradient(model: &FactorModel, data: &RatingMatrix, u: &[Vec<f64>], h: &Hyperparams) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut gp = vec![vec![0.0; model.k]; model.p.len()];
    let mut gq = vec![vec![0.0; model.k]; model.q.len()];
    for &(i, j, r) in &data.entries {
        let (a, b) = rating_gradient(&model.p[i], &model.q[j], r, u[i][j], h);
        for d in 0..model.k {
            gp[i][d] += a[d];
            gq[j][d] += b[d];
        }
    }
    (gp, gq)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: FactorModel,
    pub hyperparams: Hyperparams,
    /// Full loss after each epoch.
    pub loss_trace: Vec<f64>,
}

impl TrainedModel {
    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("at least one epoch")
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            k: usize,
            #[serde(rename = "P")]
            p: &'a [Vec<f64>],
            #[serde(rename = "Q")]
            q: &'a [Vec<f64>],
            hyperparams: &'a Hyperparams,
            final_loss: f64,
        }
        Ok(serde_json::to_string_pretty(&Doc {
            k: self.model.k,
            p: &self.model.p,
            q: &self.model.q,
            hyperparams: &self.hyperparams,
            final_loss: self.final_loss(),
        })?)
    }
}

/// Stochastic gradient descent over the observed ratings.
///
/// Factors start uniform in `[-init_scale, init_scale]`; each epoch visits
/// the ratings in a fresh shuffle drawn from the same seeded generator.
pub fn train_sgd(data: &RatingMatrix, u: &[Vec<f64>], h: &Hyperparams) -> Result<TrainedModel> {
    h.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput("no ratings to train on".into()));
    }
    if u.len() != data.n_users || u.iter().any(|row| row.len() != data.n_items) {
        return Err(Error::invalid(format!(
            "utility table must be {}x{}",
            data.n_users, data.n_items
        )));
    }
    if u.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("utilities must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
    let s = h.init_scale;
    let mut init = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..h.k).map(|_| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 }).collect())
            .collect()
    };
    let p = init(data.n_users);
    let q = init(data.n_items);
    let mut model = FactorModel { k: h.k, p, q };

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(h.epochs);
    for epoch in 1..=h.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let (i, j, r) = data.entries[idx];
            let (gp, gq) = rating_gradient(&model.p[i], &model.q[j], r, u[i][j], h);
            for d in 0..h.k {
                model.p[i][d] -= h.learning_rate * gp[d];
                model.q[j][d] -= h.learning_rate * gq[d];
            }
        }
        let l = loss(&model, data, u, h);
        if !l.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        trace.push(l);
    }
    Ok(TrainedModel {
        model,
        hyperparams: *h,
        loss_trace: trace,
    })
}
