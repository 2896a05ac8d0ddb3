use std::fmt::Write;

use super::{FitSummary, MnlFit};
use crate::design::Attribute;

/// Significance marks for a two-sided p-value.
pub fn stars(p: f64) -> &'static str {
    if p.is_nan() {
        ""
    } else if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn cell(estimate: f64, se: f64, p: f64) -> String {
    let s = stars(p);
    if s.is_empty() {
        format!("{estimate:.2} ({se:.2})")
    } else {
        format!("{estimate:.2} ({se:.2}) {s}")
    }
}

fn p_text(p: f64) -> String {
    if p < 0.001 {
        "p < 0.001".into()
    } else {
        format!("p = {p:.3}")
    }
}

/// Aligned plain-text estimates table with one column per fit.
///
/// Baseline levels show a dash. The footer carries log-likelihood,
/// McFadden R² and the likelihood-ratio test of each fit.
pub fn render_table(attributes: &[Attribute], columns: &[(&str, &MnlFit)]) -> String {
    let summaries: Vec<FitSummary> = columns.iter().map(|(_, f)| f.summary(attributes)).collect();
    let named: Vec<(&str, &FitSummary)> = columns.iter().map(|(n, _)| *n).zip(&summaries).collect();
    render_summaries(&named)
}

/// Same layout as [`render_table`] from already exported fits. Rows are
/// taken from the first column; all columns must share the same rows.
pub fn render_summaries(columns: &[(&str, &FitSummary)]) -> String {
    let mut body: Vec<Vec<String>> = Vec::new();
    let mut head = vec!["Attribute".to_string(), "Level".to_string()];
    head.extend(columns.iter().map(|(name, _)| name.to_string()));
    body.push(head);

    let per_fit: Vec<&[super::ParameterRow]> = columns.iter().map(|(_, f)| f.parameters.as_slice()).collect();
    let n_rows = per_fit.first().map_or(0, |r| r.len());
    for i in 0..n_rows {
        let first = &per_fit[0][i];
        let show_attr = i == 0 || per_fit[0][i - 1].attribute != first.attribute;
        let mut line = vec![
            if show_attr { first.attribute.clone() } else { String::new() },
            first.level.clone(),
        ];
        for rows in &per_fit {
            let r = &rows[i];
            line.push(match (r.estimate, r.std_error, r.p_value) {
                (Some(b), Some(se), Some(p)) => cell(b, se, p),
                _ => "-".into(),
            });
        }
        body.push(line);
    }

    let footer = |label: &str, f: &dyn Fn(&FitSummary) -> String| {
        let mut line = vec![label.to_string(), String::new()];
        line.extend(columns.iter().map(|(_, fit)| f(fit)));
        line
    };
    let n_body = body.len();
    body.push(footer("Observations", &|f| f.n_obs.to_string()));
    body.push(footer("Log-likelihood", &|f| format!("{:.1}", f.log_likelihood)));
    body.push(footer("McFadden R2", &|f| format!("{:.2}", f.mcfadden_r2)));
    body.push(footer("LR test", &|f| format!("{:.1} ({})", f.lr_statistic, p_text(f.lr_p_value))));

    let n_cols = body[0].len();
    let widths: Vec<usize> = (0..n_cols)
        .map(|c| body.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let total: usize = widths.iter().sum::<usize>() + 2 * (n_cols - 1);

    let mut out = String::new();
    for (i, row) in body.iter().enumerate() {
        if i == 1 || i == n_body {
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
        let mut line = String::new();
        for (c, text) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - text.chars().count();
            line.push_str(text);
            line.push_str(&" ".repeat(pad));
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{fit_mnl, simulate_choices, PartWorths, SimConfig};
    use crate::design::{build_choice_sets, enumerate_full_factorial, SearchConfig};
    use crate::presets;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.009), "**");
        assert_eq!(stars(0.04), "*");
        assert_eq!(stars(0.05), "");
        assert_eq!(stars(f64::NAN), "");
    }

    #[test]
    fn table_lists_every_level() {
        let attrs = presets::study_attributes();
        let profiles = enumerate_full_factorial(&attrs).unwrap();
        let d = build_choice_sets(&attrs, &profiles, SearchConfig::default()).unwrap();
        let beta = PartWorths::from_values(&attrs, &presets::WHOLE_SAMPLE_BETAS).unwrap();
        let o = simulate_choices(&d, &beta, SimConfig::new(182, 0)).unwrap();
        let fit = fit_mnl(&d, &o).unwrap();
        let text = render_table(&attrs, &[("Estimates", &fit), ("Again", &fit)]);
        let lines: Vec<&str> = text.lines().collect();
        // header, rule, 10 level rows, rule, 4 footer rows
        assert_eq!(lines.len(), 17);
        assert!(lines[0].starts_with("Attribute"));
        assert!(text.contains("All users"));
        assert!(text.contains("***"));
        assert!(text.contains("McFadden R2"));
        let dash_rows = lines.iter().filter(|l| l.ends_with(" -")).count();
        assert_eq!(dash_rows, 5);
    }
}
