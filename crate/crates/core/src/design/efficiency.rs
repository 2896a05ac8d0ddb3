use serde::{Deserialize, Serialize};

use super::coding::{encode, Coding, DesignMatrix};
use super::{Attribute, Design};
use crate::error::{Error, Result};

/// D-efficiency in percent: `100 / (N |(X'X)^-1|^(1/p))` on a contrast-coded
/// matrix, which equals `100 det(X'X)^(1/p) / N`.
pub fn d_efficiency(matrix: &DesignMatrix) -> Result<f64> {
    if matrix.coding != Coding::Contrast {
        return Err(Error::invalid("D-efficiency needs contrast coding"));
    }
    let n = matrix.rows.rows();
    let p = matrix.rows.cols();
    if p == 0 || n < p {
        return Err(Error::invalid(format!("D-efficiency needs N >= p (N = {n}, p = {p})")));
    }
    let xtx = matrix.rows.cross_product();
    let lu = xtx.lu().ok_or(Error::EfficiencyUndefined)?;
    let det = lu.determinant();
    if det <= 0.0 {
        return Err(Error::EfficiencyUndefined);
    }
    Ok(100.0 * det.powf(1.0 / p as f64) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    /// Percent; `None` when the contrast cross-product is singular.
    pub d_efficiency: Option<f64>,
    /// Largest (max - min) level count within any attribute.
    pub level_balance_deviation: u32,
    /// Largest |correlation| between contrast columns of different attributes.
    pub orthogonality_max_corr: f64,
    /// (choice set, attribute) pairs where two alternatives share a level.
    pub overlap_total: u32,
}

pub fn diagnostics(design: &Design) -> DesignDiagnostics {
    let x = encode(design, Coding::Contrast);
    DesignDiagnostics {
        d_efficiency: d_efficiency(&x).ok(),
        level_balance_deviation: balance_deviation(design),
        orthogonality_max_corr: max_cross_attribute_corr(&x),
        overlap_total: overlap_total(design),
    }
}

pub(crate) fn balance_deviation(design: &Design) -> u32 {
    balance_of_rows(design.attributes(), &design.occurrence_levels())
}

pub(crate) fn overlap_total(design: &Design) -> u32 {
    overlap_of_rows(&design.occurrence_levels(), design.m())
}

pub(crate) fn balance_of_rows(attributes: &[Attribute], rows: &[&[usize]]) -> u32 {
    attributes
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let mut counts = vec![0u32; a.n_levels()];
            for r in rows {
                counts[r[k]] += 1;
            }
            counts.iter().max().unwrap() - counts.iter().min().unwrap()
        })
        .max()
        .unwrap_or(0)
}

/// `rows` holds consecutive blocks of `m` alternatives.
pub(crate) fn overlap_of_rows(rows: &[&[usize]], m: usize) -> u32 {
    let mut total = 0;
    for set in rows.chunks(m) {
        let n_attr = set.first().map_or(0, |r| r.len());
        for k in 0..n_attr {
            let shared = (0..set.len()).any(|i| (i + 1..set.len()).any(|j| set[i][k] == set[j][k]));
            total += shared as u32;
        }
    }
    total
}

/// A constant column (zero variance) is treated as fully confounded, 1.0.
fn max_cross_attribute_corr(x: &DesignMatrix) -> f64 {
    let n = x.rows.rows();
    let p = x.rows.cols();
    if n == 0 {
        return 0.0;
    }
    let cols: Vec<Vec<f64>> = (0..p).map(|c| (0..n).map(|r| x.rows[(r, c)]).collect()).collect();
    let centered: Vec<(Vec<f64>, f64)> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n as f64;
            let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
            let ss = d.iter().map(|v| v * v).sum::<f64>();
            (d, ss)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..p {
        for j in i + 1..p {
            if x.column_labels[i].0 == x.column_labels[j].0 {
                continue;
            }
            let (di, si) = &centered[i];
            let (dj, sj) = &centered[j];
            let corr = if *si <= 1e-12 || *sj <= 1e-12 {
                1.0
            } else {
                di.iter().zip(dj).map(|(a, b)| a * b).sum::<f64>() / (si * sj).sqrt()
            };
            worst = worst.max(corr.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{enumerate_full_factorial, Attribute, ChoiceSet};
    use crate::presets;

    fn complementary() -> Design {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = (1..=16).map(|k| ChoiceSet(vec![k, 33 - k])).collect();
        Design::new(attrs, profiles, sets, 0).unwrap()
    }

    #[test]
    fn complementary_pairing_is_fully_efficient() {
        let d = complementary();
        let eff = d_efficiency(&encode(&d, Coding::Contrast)).unwrap();
        assert!((eff - 100.0).abs() < 1e-9);
        let diag = diagnostics(&d);
        assert_eq!(diag.level_balance_deviation, 0);
        assert_eq!(diag.overlap_total, 0);
        assert!(diag.orthogonality_max_corr < 1e-12);
    }

    #[test]
    fn identical_level_patterns_are_singular() {
        // a and b always share a level: columns are perfectly correlated
        let attrs = vec![
            Attribute::numeric("a", &[0.0, 1.0], "").unwrap(),
            Attribute::numeric("b", &[0.0, 1.0], "").unwrap(),
        ];
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let d = Design::new(attrs, profiles, vec![ChoiceSet(vec![1, 4]), ChoiceSet(vec![4, 1])], 0).unwrap();
        assert!(matches!(d_efficiency(&encode(&d, Coding::Contrast)), Err(Error::EfficiencyUndefined)));
        assert_eq!(diagnostics(&d).d_efficiency, None);
    }

    #[test]
    fn one_flipped_attribute_overlaps_on_the_rest() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let d = Design::new(attrs, profiles, vec![ChoiceSet(vec![1, 2])], 0).unwrap();
        assert_eq!(diagnostics(&d).overlap_total, 4);
    }

    #[test]
    fn indicator_coding_is_rejected() {
        let d = complementary();
        assert!(d_efficiency(&encode(&d, Coding::Indicator)).is_err());
    }

    #[test]
    fn dropping_a_set_loses_efficiency() {
        let d = complementary();
        for drop in 0..16 {
            let mut sets = d.choice_sets().to_vec();
            sets.remove(drop);
            let d2 = d.with_choice_sets(sets).unwrap();
            let eff = d_efficiency(&encode(&d2, Coding::Contrast)).unwrap();
            assert!(eff < 100.0 - 1e-6);
            // every complementary pair holds both levels of each attribute
            assert_eq!(diagnostics(&d2).level_balance_deviation, 0);
        }
    }

    #[test]
    fn dropping_a_profile_breaks_balance() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = (1..=16).map(|k| ChoiceSet(vec![k, if k == 16 { 1 } else { 33 - k }])).collect();
        let d = Design::new(attrs, profiles, sets, 0).unwrap();
        assert!(diagnostics(&d).level_balance_deviation > 0);
    }
}
