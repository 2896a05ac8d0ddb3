use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::{reference_coding, softmax, ChoiceObservation, PartWorths};
use crate::design::{Attribute, Design};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::psych::Group;

const MAX_ITERS: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const SEPARATION_BETA: f64 = 15.0;
const MAX_HALVINGS: usize = 60;

/// Choices aggregated per (set, alternative) with the reference-coded rows.
#[derive(Debug, Clone)]
pub struct ChoiceData {
    rows: Vec<Vec<Vec<f64>>>,
    counts: Vec<Vec<u32>>,
    n_obs: usize,
    p: usize,
    m: usize,
}

impl ChoiceData {
    pub fn new(design: &Design, observations: &[ChoiceObservation]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyInput("no choice observations".into()));
        }
        let attrs = design.attributes();
        let m = design.m();
        let rows: Vec<Vec<Vec<f64>>> = design
            .choice_sets()
            .iter()
            .map(|cs| {
                cs.0.iter()
                    .map(|id| reference_coding(attrs, &design.profile(*id).expect("validated design").levels))
                    .collect()
            })
            .collect();
        let mut counts = vec![vec![0u32; m]; design.n_sets()];
        for o in observations {
            if o.choice_set_index >= design.n_sets() {
                return Err(Error::invalid(format!(
                    "respondent {}: choice set {} out of range (design has {})",
                    o.respondent_id,
                    o.choice_set_index,
                    design.n_sets()
                )));
            }
            if o.chosen_alternative >= m {
                return Err(Error::invalid(format!(
                    "respondent {}: alternative {} out of range (m = {m})",
                    o.respondent_id, o.chosen_alternative
                )));
            }
            counts[o.choice_set_index][o.chosen_alternative] += 1;
        }
        let p = PartWorths::zeros(attrs).len();
        Ok(Self {
            rows,
            counts,
            n_obs: observations.len(),
            p,
            m,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_params(&self) -> usize {
        self.p
    }

    fn utilities(&self, s: usize, beta: &[f64]) -> Vec<f64> {
        self.rows[s]
            .iter()
            .map(|r| r.iter().zip(beta).map(|(x, b)| x * b).sum())
            .collect()
    }

    pub fn log_likelihood(&self, beta: &[f64]) -> f64 {
        let mut ll = 0.0;
        for s in 0..self.rows.len() {
            let n_s: u32 = self.counts[s].iter().sum();
            if n_s == 0 {
                continue;
            }
            let u = self.utilities(s, beta);
            let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + u.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            for (a, &c) in self.counts[s].iter().enumerate() {
                ll += c as f64 * (u[a] - lse);
            }
        }
        ll
    }

    pub fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        self.derivatives(beta).0
    }

    /// Observed information (negative Hessian).
    pub fn information(&self, beta: &[f64]) -> Matrix {
        self.derivatives(beta).1
    }

    fn derivatives(&self, beta: &[f64]) -> (Vec<f64>, Matrix) {
        let p = self.p;
        let mut g = vec![0.0; p];
        let mut info = vec![vec![0.0; p]; p];
        for s in 0..self.rows.len() {
            let n_s: u32 = self.counts[s].iter().sum();
            if n_s == 0 {
                continue;
            }
            let prob = softmax(&self.utilities(s, beta));
            let xbar: Vec<f64> = (0..p)
                .map(|j| self.rows[s].iter().zip(&prob).map(|(r, q)| q * r[j]).sum())
                .collect();
            for (a, row) in self.rows[s].iter().enumerate() {
                let c = self.counts[s][a] as f64;
                for j in 0..p {
                    g[j] += c * (row[j] - xbar[j]);
                }
                let w = n_s as f64 * prob[a];
                for j in 0..p {
                    let dj = row[j] - xbar[j];
                    for k in 0..p {
                        info[j][k] += w * dj * (row[k] - xbar[k]);
                    }
                }
            }
        }
        (g, Matrix::from_rows(&info))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnlFit {
    pub estimates: PartWorths,
    pub std_errors: Vec<f64>,
    pub p_values: Vec<f64>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub mcfadden_r2: f64,
    pub lr_statistic: f64,
    pub lr_p_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    /// Log-likelihood after each accepted step, starting at beta = 0.
    pub ll_trace: Vec<f64>,
    /// Parameters whose magnitude ran past the separation cutoff.
    pub diverging: Vec<String>,
}

/// One line of the exported estimates table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub attribute: String,
    pub level: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub p_value: Option<f64>,
    pub stars: String,
    pub baseline_flag: bool,
}

/// Serializable view of a fit: the estimates table plus fit statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub parameters: Vec<ParameterRow>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub mcfadden_r2: f64,
    pub lr_statistic: f64,
    pub lr_p_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    pub diverging: Vec<String>,
}

impl FitSummary {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl MnlFit {
    /// Rows in attribute order with the baseline level of each attribute
    /// included as a flagged row without estimate.
    pub fn parameter_rows(&self, attributes: &[Attribute]) -> Vec<ParameterRow> {
        let mut out = Vec::new();
        for (k, a) in attributes.iter().enumerate() {
            for l in 0..a.n_levels() {
                let level = a.levels[l].to_string();
                if l == self.estimates.reference_levels[k] {
                    out.push(ParameterRow {
                        attribute: a.name.clone(),
                        level,
                        estimate: None,
                        std_error: None,
                        p_value: None,
                        stars: String::new(),
                        baseline_flag: true,
                    });
                    continue;
                }
                let i = self
                    .estimates
                    .keys
                    .iter()
                    .position(|key| key.attribute == k && key.level == l)
                    .expect("every non-reference level has a parameter");
                out.push(ParameterRow {
                    attribute: a.name.clone(),
                    level,
                    estimate: Some(self.estimates.beta[i]),
                    std_error: Some(self.std_errors[i]),
                    p_value: Some(self.p_values[i]),
                    stars: super::stars(self.p_values[i]).to_string(),
                    baseline_flag: false,
                });
            }
        }
        out
    }

    pub fn summary(&self, attributes: &[Attribute]) -> FitSummary {
        FitSummary {
            parameters: self.parameter_rows(attributes),
            log_likelihood: self.log_likelihood,
            null_log_likelihood: self.null_log_likelihood,
            mcfadden_r2: self.mcfadden_r2,
            lr_statistic: self.lr_statistic,
            lr_p_value: self.lr_p_value,
            converged: self.converged,
            iterations: self.iterations,
            n_obs: self.n_obs,
            diverging: self.diverging.clone(),
        }
    }

    pub fn to_json(&self, attributes: &[Attribute]) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary(attributes))?)
    }
}

/// Names the columns that are linearly dependent on earlier ones.
fn collinear_columns(info: &Matrix, labels: &[String]) -> Vec<String> {
    let p = info.rows();
    let mut kept: Vec<usize> = Vec::new();
    for c in 0..p {
        let mut trial = kept.clone();
        trial.push(c);
        if info.submatrix(&trial).lu().is_some() {
            kept.push(c);
            continue;
        }
        if kept.is_empty() {
            return vec![labels[c].clone()];
        }
        let sub = info.submatrix(&kept);
        let rhs: Vec<f64> = kept.iter().map(|&r| info[(r, c)]).collect();
        let coef = sub.solve(&rhs).unwrap_or_default();
        let scale = coef.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut names: Vec<String> = kept
            .iter()
            .zip(&coef)
            .filter(|(_, v)| v.abs() > 1e-8 * scale)
            .map(|(&j, _)| labels[j].clone())
            .collect();
        names.push(labels[c].clone());
        return names;
    }
    Vec::new()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Maximum-likelihood multinomial logit fit by Newton-Raphson with step
/// halving, starting from beta = 0.
pub fn fit_mnl(design: &Design, observations: &[ChoiceObservation]) -> Result<MnlFit> {
    let data = ChoiceData::new(design, observations)?;
    let attrs = design.attributes();
    let mut estimates = PartWorths::zeros(attrs);
    let labels: Vec<String> = (0..estimates.len()).map(|i| estimates.label(i, attrs)).collect();
    let p = data.p;

    let info0 = data.information(&estimates.beta);
    if info0.lu().is_none() {
        return Err(Error::Singular {
            columns: collinear_columns(&info0, &labels),
        });
    }

    let mut beta = estimates.beta.clone();
    let mut ll = data.log_likelihood(&beta);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut separated = false;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        let (g, info) = data.derivatives(&beta);
        if max_abs(&g) < GRAD_TOL {
            converged = true;
            break;
        }
        if max_abs(&beta) > SEPARATION_BETA {
            separated = true;
            break;
        }
        let Some(delta) = info.solve(&g) else {
            // The design itself is full rank, so this only happens once
            // probabilities saturate.
            separated = true;
            break;
        };
        iterations += 1;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let cand_ll = data.log_likelihood(&cand);
            if cand_ll >= ll {
                beta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No ascent possible in floating point: we are at the optimum.
            converged = max_abs(&g) < 1e-6;
            break;
        }
        trace.push(ll);
    }
    if !converged && !separated && max_abs(&data.gradient(&beta)) < GRAD_TOL {
        converged = true;
    }

    let diverging: Vec<String> = if separated || (!converged && max_abs(&beta) > SEPARATION_BETA) {
        beta.iter()
            .zip(&labels)
            .filter(|(b, _)| b.abs() > SEPARATION_BETA)
            .map(|(_, l)| l.clone())
            .collect()
    } else {
        Vec::new()
    };
    if separated {
        converged = false;
    }

    let std_errors = match data.information(&beta).inverse() {
        Some(inv) => inv.diagonal().into_iter().map(|v| v.max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; p],
    };
    let normal = Normal::standard();
    let p_values: Vec<f64> = beta
        .iter()
        .zip(&std_errors)
        .map(|(b, se)| {
            if !se.is_finite() || *se == 0.0 {
                return f64::NAN;
            }
            2.0 * normal.sf((b / se).abs())
        })
        .collect();

    let null_ll = data.n_obs as f64 * (1.0 / data.m as f64).ln();
    let lr = 2.0 * (ll - null_ll);
    let lr_p_value = ChiSquared::new(p as f64)
        .map(|d| d.sf(lr.max(0.0)))
        .map_err(|e| Error::invalid(format!("chi-squared distribution: {e}")))?;

    estimates.beta = beta;
    Ok(MnlFit {
        estimates,
        std_errors,
        p_values,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        mcfadden_r2: 1.0 - ll / null_ll,
        lr_statistic: lr,
        lr_p_value,
        converged,
        iterations,
        n_obs: data.n_obs,
        ll_trace: trace,
        diverging,
    })
}

/// Separate fits for each group named in `grouping`.
///
/// Every observation's respondent must be in `grouping`, and every group
/// mentioned there must own at least one observation.
pub fn subgroup_fit(
    design: &Design,
    observations: &[ChoiceObservation],
    grouping: &BTreeMap<String, Group>,
) -> Result<BTreeMap<Group, MnlFit>> {
    let mut parts: BTreeMap<Group, Vec<ChoiceObservation>> = BTreeMap::new();
    for g in grouping.values() {
        parts.entry(*g).or_default();
    }
    for o in observations {
        let g = grouping
            .get(&o.respondent_id)
            .ok_or_else(|| Error::invalid(format!("respondent {} has no group", o.respondent_id)))?;
        parts.get_mut(g).expect("group registered").push(o.clone());
    }
    if parts.is_empty() {
        return Err(Error::EmptyInput("grouping is empty".into()));
    }
    let mut out = BTreeMap::new();
    for (g, obs) in parts {
        if obs.is_empty() {
            return Err(Error::EmptyInput(format!("group {} has no observations", g.name())));
        }
        out.insert(g, fit_mnl(design, &obs)?);
    }
    Ok(out)
}
