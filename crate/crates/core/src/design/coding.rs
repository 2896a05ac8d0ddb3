use serde::Serialize;

use super::{Attribute, Design};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coding {
    /// One 0/1 column per level (less than full rank).
    Indicator,
    /// Standardized orthogonal contrasts, `levels - 1` columns per attribute.
    Contrast,
}

/// `(attribute name, index)`: a level index for indicator columns, the
/// contrast number (starting at 1) for contrast columns.
pub type ColumnLabel = (String, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub rows: Matrix,
    pub coding: Coding,
    pub column_labels: Vec<ColumnLabel>,
    /// Free parameters, `sum(levels - 1)`.
    pub p: usize,
}

/// Standardized orthogonal contrasts for an attribute with `levels` levels.
///
/// Row `l` is the coding of level `l`. Columns are Helmert contrasts scaled
/// so that each column has zero sum and sum of squares equal to `levels`,
/// so a balanced orthogonal design has `X'X = N I`. With two levels this is
/// `+1` for the first level and `-1` for the second.
pub fn contrast_table(levels: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; levels.saturating_sub(1)]; levels];
    for c in 1..levels {
        let norm = (levels as f64 / (c * c + c) as f64).sqrt();
        for (l, row) in table.iter_mut().enumerate() {
            row[c - 1] = if l < c {
                norm
            } else if l == c {
                -(c as f64) * norm
            } else {
                0.0
            };
        }
    }
    table
}

fn column_labels(attributes: &[Attribute], coding: Coding) -> Vec<ColumnLabel> {
    attributes
        .iter()
        .flat_map(|a| {
            let range = match coding {
                Coding::Indicator => 0..a.n_levels(),
                Coding::Contrast => 1..a.n_levels(),
            };
            range.map(move |i| (a.name.clone(), i))
        })
        .collect()
}

/// Codes arbitrary level-index rows.
pub fn encode_profiles<'a, I>(attributes: &[Attribute], rows: I, coding: Coding) -> DesignMatrix
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let tables: Vec<Vec<Vec<f64>>> = match coding {
        Coding::Contrast => attributes.iter().map(|a| contrast_table(a.n_levels())).collect(),
        Coding::Indicator => Vec::new(),
    };
    let coded: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|levels| {
            let mut row = Vec::new();
            for (k, (a, &l)) in attributes.iter().zip(levels).enumerate() {
                match coding {
                    Coding::Indicator => row.extend((0..a.n_levels()).map(|i| if i == l { 1.0 } else { 0.0 })),
                    Coding::Contrast => row.extend_from_slice(&tables[k][l]),
                }
            }
            row
        })
        .collect();
    let labels = column_labels(attributes, coding);
    let rows = if coded.is_empty() {
        Matrix::zeros(0, labels.len())
    } else {
        Matrix::from_rows(&coded)
    };
    DesignMatrix {
        rows,
        coding,
        column_labels: labels,
        p: attributes.iter().map(|a| a.n_levels() - 1).sum(),
    }
}

/// One row per profile occurrence, in choice-set order.
pub fn encode(design: &Design, coding: Coding) -> DesignMatrix {
    encode_profiles(design.attributes(), design.occurrence_levels(), coding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{enumerate_full_factorial, ChoiceSet};
    use crate::presets;

    #[test]
    fn contrast_columns_are_orthonormal_up_to_level_count() {
        for levels in 2..6 {
            let t = contrast_table(levels);
            for c in 0..levels - 1 {
                let sum: f64 = t.iter().map(|r| r[c]).sum();
                let ss: f64 = t.iter().map(|r| r[c] * r[c]).sum();
                assert!(sum.abs() < 1e-12);
                assert!((ss - levels as f64).abs() < 1e-12);
                for d in 0..c {
                    let dot: f64 = t.iter().map(|r| r[c] * r[d]).sum();
                    assert!(dot.abs() < 1e-12);
                }
            }
        }
        assert_eq!(contrast_table(2), vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn complementary_pair_reproduces_indicator_rows() {
        // levels (L2, L2, L1, L2, L2) is profile 28, its complement is profile 5
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        assert_eq!(profiles[27].levels, vec![1, 1, 0, 1, 1]);
        let d = Design::new(attrs, profiles, vec![ChoiceSet(vec![28, 5])], 0).unwrap();
        let x = encode(&d, Coding::Indicator);
        assert_eq!(x.rows.row(0), &[0., 1., 0., 1., 1., 0., 0., 1., 0., 1.]);
        assert_eq!(x.rows.row(1), &[1., 0., 1., 0., 0., 1., 1., 0., 1., 0.]);
        assert_eq!(x.p, 5);
    }

    #[test]
    fn contrast_coding_of_balanced_design_sums_to_zero() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let sets = (1..=16).map(|k| ChoiceSet(vec![k, 33 - k])).collect();
        let d = Design::new(attrs, profiles, sets, 0).unwrap();
        let x = encode(&d, Coding::Contrast);
        assert_eq!(x.rows.cols(), 5);
        for c in 0..5 {
            let s: f64 = (0..x.rows.rows()).map(|r| x.rows[(r, c)]).sum();
            assert_eq!(s, 0.0);
        }
        let ind = encode(&d, Coding::Indicator);
        for r in 0..ind.rows.rows() {
            assert_eq!(ind.rows.row(r).iter().sum::<f64>(), 5.0);
        }
    }

    #[test]
    fn matches_row_by_row_oracle() {
        let attrs = vec![
            crate::design::Attribute::numeric("a", &[0.0, 1.0], "").unwrap(),
            crate::design::Attribute::numeric("b", &[0.0, 1.0], "").unwrap(),
        ];
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let d = Design::new(attrs, profiles.clone(), vec![ChoiceSet(vec![1, 4]), ChoiceSet(vec![2, 3])], 0).unwrap();
        let x = encode(&d, Coding::Contrast);
        let order = [1u32, 4, 2, 3];
        for (r, id) in order.iter().enumerate() {
            let lv = &profiles[*id as usize - 1].levels;
            let want: Vec<f64> = lv.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
            assert_eq!(x.rows.row(r), want.as_slice());
        }
        let ind = encode(&d, Coding::Indicator);
        for (r, id) in order.iter().enumerate() {
            let lv = &profiles[*id as usize - 1].levels;
            let want: Vec<f64> = lv
                .iter()
                .flat_map(|&l| [(l == 0) as u8 as f64, (l == 1) as u8 as f64])
                .collect();
            assert_eq!(ind.rows.row(r), want.as_slice());
        }
    }
}
