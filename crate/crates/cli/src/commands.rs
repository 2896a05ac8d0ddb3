//! One function per subcommand. Each reads its inputs, runs the core
//! routine and hands the produced files to [`write_outputs`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use conjoint_core::choice::{
    fit_mnl, read_observations_csv, render_summaries, simulate_choices, subgroup_fit, write_observations_csv,
    FitSummary, PartWorths, SimConfig,
};
use conjoint_core::design::{build_choice_sets, diagnostics, enumerate_full_factorial, Attribute, Design, SearchConfig};
use conjoint_core::mf::{
    project_latent, train_sgd, unit_gammas, utility_matrix, write_projection_csv, Hyperparams, RatingMatrix,
    UtilityParams,
};
use conjoint_core::psych::{
    dimension_alpha, median_split, read_responses_csv, read_split_csv, score, write_profiles_csv, write_split_csv,
    Dimension,
};
use conjoint_core::ratings::{
    compute_item_stats, rank_distribution, read_ratings_csv, synthesize_histogram, write_item_stats_csv,
    write_rank_csv, LevelPlan, MomentTarget, RatingHistogram, StatKey,
};
use conjoint_core::{presets, Error};
use serde_json::json;

use crate::args::{Command, DesignArgs, FitArgs, Global, IngestArgs, MfArgs, ReportArgs, SimulateArgs, SplitArgs};
use crate::manifest::{sha256_hex, write_outputs, Inputs, Manifest};
use crate::{CliError, Result};

/// What a command wrote and a short human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub message: String,
}

pub fn dispatch(global: &Global, command: Command) -> Result<Outcome> {
    match command {
        Command::Ingest(a) => cmd_ingest(global, &a),
        Command::Design(a) => cmd_design(global, &a),
        Command::Simulate(a) => cmd_simulate(global, &a),
        Command::Fit(a) => cmd_fit(global, &a),
        Command::Split(a) => cmd_split(global, &a),
        Command::Mf(a) => cmd_mf(global, &a),
        Command::Report(a) => cmd_report(global, &a),
    }
}

type Files = Vec<(String, Vec<u8>)>;

fn finish(
    global: &Global,
    command: &str,
    parameters: serde_json::Value,
    inputs: Inputs,
    files: Files,
    message: String,
) -> Result<Outcome> {
    let manifest = write_outputs(&global.out, command, global.seed, parameters, inputs, &files)?;
    let mut written: Vec<PathBuf> = files.iter().map(|(name, _)| global.out.join(name)).collect();
    written.push(manifest);
    Ok(Outcome { files: written, message })
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

fn buffer(f: impl FnOnce(&mut Vec<u8>) -> conjoint_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn load_attributes(inputs: &mut Inputs, levels: &Option<PathBuf>) -> Result<Vec<Attribute>> {
    match levels {
        None => Ok(presets::study_attributes()),
        Some(path) => {
            let text = inputs.read_text("levels", path)?;
            let plan: LevelPlan = serde_json::from_str(&text).map_err(|e| CliError::InFile {
                path: path.clone(),
                source: e.into(),
            })?;
            plan.to_attributes().map_err(CliError::in_file(path))
        }
    }
}

pub fn cmd_ingest(global: &Global, args: &IngestArgs) -> Result<Outcome> {
    let path = required(&args.ratings, "ratings")?;
    let ranks = match args.percentiles.as_deref() {
        None => [30.0, 70.0],
        Some([lo, hi]) => [*lo, *hi],
        Some(other) => {
            return Err(CliError::Usage(format!(
                "--percentiles takes two ranks, got {}",
                other.len()
            )))
        }
    };
    let mut inputs = Inputs::default();
    let bytes = inputs.read("ratings", path)?;
    let records = read_ratings_csv(bytes.as_slice()).map_err(CliError::in_file(path))?;
    let stats = compute_item_stats(&records).map_err(CliError::in_file(path))?;
    let plan = LevelPlan::from_stats(&stats, ranks).map_err(CliError::in_file(path))?;

    let mut files: Files = vec![("item_stats.csv".into(), buffer(|b| write_item_stats_csv(b, &stats))?)];
    for key in StatKey::ALL {
        let ranks = rank_distribution(&stats, key);
        files.push((format!("rank_{}.csv", key.name()), buffer(|b| write_rank_csv(b, &ranks))?));
    }
    files.push(("level_plan.json".into(), json_bytes(&plan)?));

    let mut message = format!("{} ratings, {} items\n", records.len(), stats.len());
    for key in StatKey::ALL {
        let e = plan.entry(key);
        let _ = writeln!(message, "{:<9} low {:<6} high {}", key.name(), e.low, e.high);
    }
    let params = json!({ "ratings": path, "percentiles": ranks });
    finish(global, "ingest", params, inputs, files, message)
}

fn level_of(attrs: &[Attribute], profile_levels: &[usize], name: &str) -> Result<f64> {
    let k = attrs
        .iter()
        .position(|a| a.name == name)
        .ok_or_else(|| CliError::Usage(format!("histograms need a numeric '{name}' attribute")))?;
    attrs[k].levels[profile_levels[k]]
        .as_f64()
        .ok_or_else(|| CliError::Usage(format!("attribute '{name}' is not numeric")))
}

fn profile_table(design: &Design) -> String {
    let attrs = design.attributes();
    let mut header: Vec<String> = vec!["id".into()];
    header.extend(attrs.iter().map(|a| a.name.clone()));
    header.extend(["T%", "P%", "A%", "V%", "E%"].map(String::from));
    let mut rows = vec![header];
    for p in design.profiles() {
        let mut row = vec![p.id.to_string()];
        row.extend(attrs.iter().zip(&p.levels).map(|(a, &l)| a.levels[l].to_string()));
        match &p.histogram {
            Some(h) => row.extend(h.percentages().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n("-".to_string(), 5)),
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn cmd_design(global: &Global, args: &DesignArgs) -> Result<Outcome> {
    let mut inputs = Inputs::default();
    let attrs = load_attributes(&mut inputs, &args.levels)?;
    let config = SearchConfig {
        n_sets: args.n_sets.unwrap_or(16),
        m: args.m.unwrap_or(2),
        seed: global.seed,
        max_iters: args.max_iters.unwrap_or(200),
    };
    let weights: [f64; 3] = match args.weights.as_deref() {
        None => MomentTarget::DEFAULT_WEIGHTS,
        Some(&[a, b, c]) => [a, b, c],
        Some(w) => return Err(CliError::Usage(format!("--weights takes three values, got {}", w.len()))),
    };
    let with_histograms = !args.no_histograms.unwrap_or(false);

    let profiles = enumerate_full_factorial(&attrs)?;
    let mut design = build_choice_sets(&attrs, &profiles, config)?;
    if with_histograms {
        let mut cache: BTreeMap<[u64; 4], RatingHistogram> = BTreeMap::new();
        for p in &profiles {
            let n = level_of(&attrs, &p.levels, "num_ratings")?;
            let target = MomentTarget::new(
                level_of(&attrs, &p.levels, "mean")?,
                level_of(&attrs, &p.levels, "variance")?,
                level_of(&attrs, &p.levels, "skewness")?,
            )
            .with_spread(global.spread)
            .with_weights(weights);
            if !(n >= 1.0 && n.fract() == 0.0) {
                return Err(CliError::Usage(format!("num_ratings level {n} is not a positive integer")));
            }
            let key = [n, target.mean, target.spread, target.skewness].map(f64::to_bits);
            let h = match cache.get(&key) {
                Some(h) => *h,
                None => {
                    let h = synthesize_histogram(n as u32, &target)?;
                    cache.insert(key, h);
                    h
                }
            };
            design.set_histogram(p.id, h)?;
        }
    }
    let diag = diagnostics(&design);
    let files: Files = vec![
        ("design.json".into(), {
            let mut text = design.to_json()?;
            text.push('\n');
            text.into_bytes()
        }),
        ("diagnostics.json".into(), json_bytes(&diag)?),
        ("profiles.txt".into(), profile_table(&design).into_bytes()),
    ];
    let message = format!(
        "{} profiles, {} sets x {}: D-efficiency {}, overlap {}, balance deviation {}",
        profiles.len(),
        design.n_sets(),
        design.m(),
        diag.d_efficiency.map_or("undefined".to_string(), |d| format!("{d:.4}%")),
        diag.overlap_total,
        diag.level_balance_deviation
    );
    let params = json!({
        "levels": args.levels,
        "n_sets": config.n_sets,
        "m": config.m,
        "max_iters": config.max_iters,
        "weights": weights,
        "spread": global.spread,
        "histograms": with_histograms,
    });
    finish(global, "design", params, inputs, files, message)
}

fn load_design(inputs: &mut Inputs, path: &Path) -> Result<Design> {
    let text = inputs.read_text("design", path)?;
    Design::from_json(&text).map_err(CliError::in_file(path))
}

pub fn cmd_simulate(global: &Global, args: &SimulateArgs) -> Result<Outcome> {
    let path = required(&args.design, "design")?;
    let mut inputs = Inputs::default();
    let design = load_design(&mut inputs, path)?;
    let values = args.betas.clone().unwrap_or_else(|| presets::WHOLE_SAMPLE_BETAS.to_vec());
    let beta = PartWorths::from_values(design.attributes(), &values)?;
    let config = SimConfig {
        n_respondents: args.respondents.unwrap_or(presets::STUDY_RESPONDENTS),
        seed: global.seed,
        randomize_order: args.randomize_order.unwrap_or(false),
    };
    let obs = simulate_choices(&design, &beta, config)?;
    let files: Files = vec![("observations.csv".into(), buffer(|b| write_observations_csv(b, &obs))?)];
    let message = format!(
        "{} respondents x {} sets = {} observations",
        config.n_respondents,
        design.n_sets(),
        obs.len()
    );
    let params = json!({
        "design": path,
        "betas": values,
        "respondents": config.n_respondents,
        "randomize_order": config.randomize_order,
    });
    finish(global, "simulate", params, inputs, files, message)
}

/// Refuses observations whose simulate manifest names a different design.
fn check_design_hash(args: &FitArgs, observations: &Path, design: &Path, design_sha: &str) -> Result<()> {
    let manifest_path = match &args.observations_manifest {
        Some(p) => p.clone(),
        None => {
            let p = observations
                .parent()
                .unwrap_or(Path::new("."))
                .join(Manifest::file_name("simulate"));
            if !p.exists() {
                return Ok(());
            }
            p
        }
    };
    let manifest = Manifest::load(&manifest_path)?;
    if let Some(rec) = manifest.input("design") {
        if rec.sha256 != design_sha {
            return Err(CliError::Mismatch {
                first: observations.to_path_buf(),
                second: design.to_path_buf(),
                reason: format!(
                    "observations were simulated from a design with sha256 {} (per {}), this design has {}",
                    rec.sha256,
                    manifest_path.display(),
                    design_sha
                ),
            });
        }
    }
    Ok(())
}

pub fn cmd_fit(global: &Global, args: &FitArgs) -> Result<Outcome> {
    let design_path = required(&args.design, "design")?;
    let obs_path = required(&args.observations, "observations")?;
    let mut inputs = Inputs::default();
    let design_bytes = inputs.read("design", design_path)?;
    let design_text = String::from_utf8_lossy(&design_bytes);
    let design = Design::from_json(&design_text).map_err(CliError::in_file(design_path))?;
    check_design_hash(args, obs_path, design_path, &sha256_hex(&design_bytes))?;
    let obs_bytes = inputs.read("observations", obs_path)?;
    let obs = read_observations_csv(obs_bytes.as_slice()).map_err(CliError::in_file(obs_path))?;
    let mismatch = |e: Error| match e {
        Error::Invalid(reason) | Error::EmptyInput(reason) => CliError::Mismatch {
            first: obs_path.to_path_buf(),
            second: design_path.to_path_buf(),
            reason,
        },
        other => other.into(),
    };

    let attrs = design.attributes();
    let mut files: Files = Vec::new();
    let message = match &args.split {
        None => {
            let fit = fit_mnl(&design, &obs).map_err(mismatch)?;
            let summary = fit.summary(attrs);
            let table = render_summaries(&[("Estimate", &summary)]);
            files.push(("fit.json".into(), json_bytes(&summary)?));
            files.push(("table.txt".into(), table.clone().into_bytes()));
            table
        }
        Some(split_path) => {
            let split_bytes = inputs.read("split", split_path)?;
            let grouping = read_split_csv(split_bytes.as_slice()).map_err(CliError::in_file(split_path))?;
            let fits = subgroup_fit(&design, &obs, &grouping).map_err(|e| match e {
                Error::Invalid(reason) | Error::EmptyInput(reason) => CliError::Mismatch {
                    first: obs_path.to_path_buf(),
                    second: split_path.clone(),
                    reason,
                },
                other => other.into(),
            })?;
            let summaries: Vec<(&str, FitSummary)> = fits.iter().map(|(g, f)| (g.name(), f.summary(attrs))).collect();
            for (name, s) in &summaries {
                files.push((format!("fit_{}.json", name.to_lowercase()), json_bytes(s)?));
            }
            let cols: Vec<(&str, &FitSummary)> = summaries.iter().map(|(n, s)| (*n, s)).collect();
            let table = render_summaries(&cols);
            files.push(("table.txt".into(), table.clone().into_bytes()));
            table
        }
    };
    let params = json!({
        "design": design_path,
        "observations": obs_path,
        "split": args.split,
    });
    finish(global, "fit", params, inputs, files, message)
}

pub fn cmd_split(global: &Global, args: &SplitArgs) -> Result<Outcome> {
    let path = required(&args.responses, "responses")?;
    let dimension: Dimension = args.dimension.as_deref().unwrap_or("overall").parse()?;
    let mut inputs = Inputs::default();
    let bytes = inputs.read("responses", path)?;
    let responses = read_responses_csv(bytes.as_slice()).map_err(CliError::in_file(path))?;
    let profiles = score(&responses)?;
    let split = median_split(&profiles, dimension)?;
    let summary = split.summary();
    let alpha: BTreeMap<&str, Option<f64>> = Dimension::SUBSCALES
        .iter()
        .chain([Dimension::Overall].iter())
        .map(|&d| (d.name(), dimension_alpha(&responses, d).ok().filter(|a| a.is_finite())))
        .collect();
    let files: Files = vec![
        ("split.csv".into(), buffer(|b| write_split_csv(b, &split))?),
        ("scale_scores.csv".into(), buffer(|b| write_profiles_csv(b, &profiles))?),
        ("split_summary.json".into(), json_bytes(&json!({ "split": summary, "alpha": alpha }))?),
    ];
    let mut message = format!(
        "{} split at {}: {} High, {} Low",
        dimension.name(),
        summary.split_value,
        summary.n_high,
        summary.n_low
    );
    if summary.degenerate_flag {
        message.push_str(" (degenerate: one group is empty)");
    }
    let params = json!({ "responses": path, "dimension": dimension });
    finish(global, "split", params, inputs, files, message)
}

fn fit_estimates(inputs: &mut Inputs, path: &Path) -> Result<Vec<f64>> {
    let text = inputs.read_text("fit", path)?;
    let summary = FitSummary::from_json(&text).map_err(CliError::in_file(path))?;
    summary
        .parameters
        .iter()
        .filter(|r| !r.baseline_flag)
        .map(|r| {
            r.estimate.ok_or_else(|| CliError::InFile {
                path: path.to_path_buf(),
                source: Error::Invalid(format!("no estimate for {}={}", r.attribute, r.level)),
            })
        })
        .collect()
}

pub fn cmd_mf(global: &Global, args: &MfArgs) -> Result<Outcome> {
    let path = required(&args.ratings, "ratings")?;
    let mut inputs = Inputs::default();
    let bytes = inputs.read("ratings", path)?;
    let records = read_ratings_csv(bytes.as_slice()).map_err(CliError::in_file(path))?;
    let attrs = load_attributes(&mut inputs, &args.levels)?;
    let values = match (&args.fit, &args.betas) {
        (Some(fit), _) => fit_estimates(&mut inputs, fit)?,
        (None, Some(b)) => b.clone(),
        (None, None) => presets::WHOLE_SAMPLE_BETAS.to_vec(),
    };
    let beta = PartWorths::from_values(&attrs, &values)?;

    let d = Hyperparams::default();
    let h = Hyperparams {
        phi: args.phi.unwrap_or(d.phi),
        delta: args.delta.unwrap_or(d.delta),
        learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
        epochs: args.epochs.unwrap_or(d.epochs),
        k: args.k.unwrap_or(d.k),
        init_scale: args.init_scale.unwrap_or(d.init_scale),
        seed: global.seed,
    };
    let data = RatingMatrix::from_records(&records).map_err(CliError::in_file(path))?;
    let stats: Vec<_> = compute_item_stats(&records)
        .map_err(CliError::in_file(path))?
        .into_values()
        .collect();
    let params = UtilityParams::shared_unit_weights(&stats, unit_gammas(&attrs, &beta)?)?;
    let utilities = utility_matrix(&params, &stats, data.n_users())?;
    let user = match args.user.as_deref() {
        None => 0,
        Some(u) => match data.user_ids.iter().position(|id| id == u) {
            Some(i) => i,
            None => u
                .parse::<usize>()
                .ok()
                .filter(|&i| i < data.n_users())
                .ok_or_else(|| CliError::Usage(format!("unknown user '{u}'")))?,
        },
    };
    let trained = train_sgd(&data, &utilities, &h)?;

    let mut trace = String::from("epoch,loss\n");
    for (e, l) in trained.loss_trace.iter().enumerate() {
        let _ = writeln!(trace, "{},{l}", e + 1);
    }
    let mut files: Files = vec![
        ("model.json".into(), {
            let mut text = trained.to_json()?;
            text.push('\n');
            text.into_bytes()
        }),
        ("loss_trace.csv".into(), trace.into_bytes()),
    ];
    let mut message = format!(
        "{} users x {} items, {} ratings; final loss {:.6}",
        data.n_users(),
        data.n_items(),
        data.len(),
        trained.final_loss()
    );
    if h.k == 2 {
        let proj = project_latent(&trained.model, user, &utilities[user])?;
        files.push(("projection.csv".into(), buffer(|b| write_projection_csv(b, &proj, &data.item_ids))?));
        let title = format!("user {} (delta = {})", data.user_ids[user], h.delta);
        files.push(("projection.svg".into(), proj.to_svg(&title).into_bytes()));
    } else {
        message.push_str("; projection skipped (needs k = 2)");
    }
    let params = json!({
        "ratings": path,
        "levels": args.levels,
        "fit": args.fit,
        "betas": values,
        "hyperparams": h,
        "user": data.user_ids[user],
    });
    finish(global, "mf", params, inputs, files, message)
}

pub fn cmd_report(global: &Global, args: &ReportArgs) -> Result<Outcome> {
    if args.fits.is_empty() {
        return Err(CliError::Usage("report needs at least one --fit NAME=PATH".into()));
    }
    let mut inputs = Inputs::default();
    let mut columns: Vec<(String, FitSummary)> = Vec::new();
    for arg in &args.fits {
        let (name, path) = arg
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--fit expects NAME=PATH, got '{arg}'")))?;
        let path = PathBuf::from(path);
        let text = inputs.read_text(name, &path)?;
        let summary = FitSummary::from_json(&text).map_err(CliError::in_file(&path))?;
        columns.push((name.to_string(), summary));
    }
    let first = &columns[0].1.parameters;
    for (name, s) in &columns[1..] {
        let same = s.parameters.len() == first.len()
            && s.parameters.iter().zip(first).all(|(a, b)| a.attribute == b.attribute && a.level == b.level);
        if !same {
            return Err(CliError::Usage(format!(
                "fit '{name}' has different parameters than '{}'",
                columns[0].0
            )));
        }
    }
    let cols: Vec<(&str, &FitSummary)> = columns.iter().map(|(n, s)| (n.as_str(), s)).collect();
    let table = render_summaries(&cols);
    let files: Files = vec![("table.txt".into(), table.clone().into_bytes())];
    let params = json!({ "fits": args.fits });
    finish(global, "report", params, inputs, files, table)
}
