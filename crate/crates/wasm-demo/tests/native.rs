use conjoint_core::presets;
use conjoint_wasm_demo::{projection_json, simulate_and_fit_json, synthesize_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn synthesized_histogram_hits_the_mean() {
    let v = parse(synthesize_json(20, 4.3, 0.7, -1.2, false).unwrap());
    let counts: Vec<u64> = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).collect();
    assert_eq!(counts.iter().sum::<u64>(), 20);
    assert!((v["mean"].as_f64().unwrap() - 4.3).abs() <= 0.1);
    assert!(synthesize_json(0, 4.0, 1.0, 0.0, false).is_err());
    assert!(synthesize_json(10, 6.0, 1.0, 0.0, false).is_err());
}

#[test]
fn fit_recovers_study_betas() {
    let v = parse(simulate_and_fit_json(&presets::WHOLE_SAMPLE_BETAS, 182, 4).unwrap());
    let est = v["estimates"].as_array().unwrap();
    assert_eq!(est.len(), 5);
    for (e, t) in est.iter().zip(presets::WHOLE_SAMPLE_BETAS) {
        assert!((e.as_f64().unwrap() - t).abs() < 0.2);
    }
    assert!(v["table"].as_str().unwrap().contains("McFadden R2"));
    assert!(simulate_and_fit_json(&[1.0, 2.0], 10, 0).is_err());
}

#[test]
fn projection_pulls_high_utility_items_closer() {
    let plain = parse(projection_json(0.0, 0, 200, 0).unwrap());
    let coupled = parse(projection_json(0.5, 0, 200, 0).unwrap());
    let top = |v: &Value| v["top_decile_distance"].as_f64().unwrap();
    assert!(top(&coupled) < top(&plain));
    assert!(top(&coupled) < coupled["bottom_decile_distance"].as_f64().unwrap());
    assert_eq!(coupled["points"].as_array().unwrap().len(), 51);
    assert!(coupled["svg"].as_str().unwrap().starts_with("<svg"));
    assert!(projection_json(0.5, 10_000, 5, 0).is_err());
}
