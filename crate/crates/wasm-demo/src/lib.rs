//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions hold the
//! logic and are plain Rust so they can be tested natively.

use conjoint_core::choice::{fit_mnl, render_table, simulate_choices, PartWorths, SimConfig};
use conjoint_core::design::{build_choice_sets, enumerate_full_factorial, SearchConfig};
use conjoint_core::mf::{
    mean_decile_distances, project_latent, train_sgd, unit_gammas, utility_matrix, Hyperparams, RatingMatrix,
    UtilityParams,
};
use conjoint_core::presets;
use conjoint_core::ratings::fixture::fixture_records;
use conjoint_core::ratings::{compute_item_stats, synthesize_histogram, MomentTarget, SpreadInterpretation};
use conjoint_core::{Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Best histogram of `n` ratings for the given moments.
pub fn synthesize_json(n: u32, mean: f64, spread: f64, skewness: f64, stddev: bool) -> Result<String> {
    let how = if stddev {
        SpreadInterpretation::Stddev
    } else {
        SpreadInterpretation::Variance
    };
    let target = MomentTarget::new(mean, spread, skewness).with_spread(how);
    let h = synthesize_histogram(n, &target)?;
    let m = h.moments();
    Ok(json!({
        "counts": h.counts,
        "percentages": h.percentages(),
        "mean": m.mean,
        "variance": m.variance,
        "skewness": m.skewness,
        "objective": target.objective(&m),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn synthesize(n: u32, mean: f64, spread: f64, skewness: f64, stddev: bool) -> std::result::Result<String, JsError> {
    to_js(synthesize_json(n, mean, spread, skewness, stddev))
}

/// Simulates respondents on the 16-set study design and refits the model.
pub fn simulate_and_fit_json(betas: &[f64], respondents: usize, seed: u32) -> Result<String> {
    if respondents == 0 || respondents > 5000 {
        return Err(Error::Invalid("respondents must be between 1 and 5000".into()));
    }
    let attrs = presets::study_attributes();
    let profiles = enumerate_full_factorial(&attrs)?;
    let design = build_choice_sets(&attrs, &profiles, SearchConfig::default())?;
    let beta = PartWorths::from_values(&attrs, betas)?;
    let obs = simulate_choices(&design, &beta, SimConfig::new(respondents, seed as u64))?;
    let fit = fit_mnl(&design, &obs)?;
    let labels: Vec<String> = (0..beta.len()).map(|i| beta.label(i, &attrs)).collect();
    Ok(json!({
        "labels": labels,
        "truth": betas,
        "estimates": fit.estimates.beta,
        "std_errors": fit.std_errors,
        "mcfadden_r2": fit.mcfadden_r2,
        "log_likelihood": fit.log_likelihood,
        "converged": fit.converged,
        "table": render_table(&attrs, &[("Estimate", &fit)]),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn simulate_and_fit(betas: Vec<f64>, respondents: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(simulate_and_fit_json(&betas, respondents, seed))
}

/// Trains the factor model on the bundled ratings and projects one user.
pub fn projection_json(delta: f64, user: usize, epochs: usize, seed: u32) -> Result<String> {
    let records = fixture_records();
    let data = RatingMatrix::from_records(&records)?;
    if user >= data.n_users() {
        return Err(Error::Invalid(format!("user must be below {}", data.n_users())));
    }
    let stats: Vec<_> = compute_item_stats(&records)?.into_values().collect();
    let attrs = presets::study_attributes();
    let beta = PartWorths::from_values(&attrs, &presets::WHOLE_SAMPLE_BETAS)?;
    let params = UtilityParams::shared_unit_weights(&stats, unit_gammas(&attrs, &beta)?)?;
    let u = utility_matrix(&params, &stats, data.n_users())?;
    let h = Hyperparams {
        delta,
        epochs,
        seed: seed as u64,
        ..Hyperparams::default()
    };
    let trained = train_sgd(&data, &u, &h)?;
    let proj = project_latent(&trained.model, user, &u[user])?;
    let (top, bottom) = mean_decile_distances(&trained.model, &u);
    let title = format!("{} (delta = {delta})", data.user_ids[user]);
    Ok(json!({
        "points": proj.points,
        "svg": proj.to_svg(&title),
        "top_decile_distance": top,
        "bottom_decile_distance": bottom,
        "final_loss": trained.final_loss(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn projection(delta: f64, user: usize, epochs: usize, seed: u32) -> std::result::Result<String, JsError> {
    to_js(projection_json(delta, user, epochs, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_respondent_counts() {
        assert!(simulate_and_fit_json(&presets::WHOLE_SAMPLE_BETAS, 0, 1).is_err());
    }
}
