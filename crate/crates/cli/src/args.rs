use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use conjoint_core::ratings::SpreadInterpretation;
use serde::{Deserialize, Serialize};

use crate::{read_text, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "conjoint", version, about = "Conjoint design, choice estimation and utility-aware factorization")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML file with defaults for any option; command-line values win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// How histogram spread targets are read: variance or stddev.
    #[arg(long, global = true)]
    pub spread: Option<SpreadInterpretation>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Per-item statistics, rank distributions and percentile levels.
    Ingest(IngestArgs),
    /// Profiles, synthesized histograms and choice sets.
    Design(DesignArgs),
    /// Simulated respondents choosing from a design.
    Simulate(SimulateArgs),
    /// Multinomial logit estimation, optionally per split group.
    Fit(FitArgs),
    /// Maximization-scale scores and a median split.
    Split(SplitArgs),
    /// Utility-aware matrix factorization and latent projection.
    Mf(MfArgs),
    /// Side-by-side table of exported fits.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Design(_) => "design",
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Split(_) => "split",
            Command::Mf(_) => "mf",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestArgs {
    /// Ratings CSV: user_id,item_id,rating.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Low and high percentile ranks (default 30,70).
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignArgs {
    /// Level plan JSON from `ingest` (default: the built-in study levels).
    #[arg(long)]
    pub levels: Option<PathBuf>,
    #[arg(long)]
    pub n_sets: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Histogram objective weights for mean, spread, skewness.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Skip histogram synthesis.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_histograms: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Part-worths in parameter order (default: the published whole-sample estimates).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub respondents: Option<usize>,
    /// Shuffle task and alternative order per respondent.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub randomize_order: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub observations: Option<PathBuf>,
    /// Group assignments from `split`; fits each group separately.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Manifest of the run that produced the observations
    /// (default: manifest_simulate.json next to them, if present).
    #[arg(long)]
    pub observations_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitArgs {
    /// Scale responses CSV: respondent_id,item1..item6.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// alt_search, decision_difficulty, high_standards or overall.
    #[arg(long)]
    pub dimension: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfArgs {
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Level plan JSON (default: the built-in study levels).
    #[arg(long)]
    pub levels: Option<PathBuf>,
    /// Exported fit whose estimates set the attribute weights.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Part-worths used when no fit is given.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// User id (or index) to project.
    #[arg(long)]
    pub user: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportArgs {
    /// Column as NAME=PATH to an exported fit; repeat for more columns.
    #[arg(long = "fit")]
    pub fits: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    out: Option<PathBuf>,
    spread: Option<SpreadInterpretation>,
    ingest: IngestArgs,
    design: DesignArgs,
    simulate: SimulateArgs,
    fit: FitArgs,
    split: SplitArgs,
    mf: MfArgs,
    report: ReportArgs,
}

/// Global settings after applying the config file and defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Global {
    pub seed: u64,
    pub out: PathBuf,
    pub spread: SpreadInterpretation,
}

macro_rules! fill {
    ($dst:expr, $src:expr; $($f:ident),+) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.take(); } )+
    };
}

/// Merges command-line values over the config file over defaults.
pub fn resolve(cli: Cli) -> Result<(Global, Command)> {
    let mut cfg = match &cli.global.config {
        Some(path) => toml::from_str::<ConfigFile>(&read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let global = Global {
        seed: cli.global.seed.or(cfg.seed).unwrap_or(0),
        out: cli.global.out.or(cfg.out.take()).unwrap_or_else(|| PathBuf::from("out")),
        spread: cli.global.spread.or(cfg.spread).unwrap_or_default(),
    };
    let command = match cli.command {
        Command::Ingest(mut a) => {
            fill!(a, cfg.ingest; ratings, percentiles);
            Command::Ingest(a)
        }
        Command::Design(mut a) => {
            fill!(a, cfg.design; levels, n_sets, m, max_iters, weights, no_histograms);
            Command::Design(a)
        }
        Command::Simulate(mut a) => {
            fill!(a, cfg.simulate; design, betas, respondents, randomize_order);
            Command::Simulate(a)
        }
        Command::Fit(mut a) => {
            fill!(a, cfg.fit; design, observations, split, observations_manifest);
            Command::Fit(a)
        }
        Command::Split(mut a) => {
            fill!(a, cfg.split; responses, dimension);
            Command::Split(a)
        }
        Command::Mf(mut a) => {
            fill!(a, cfg.mf; ratings, levels, fit, betas, k, phi, delta, learning_rate, epochs, init_scale, user);
            Command::Mf(a)
        }
        Command::Report(mut a) => {
            if a.fits.is_empty() {
                a.fits = cfg.report.fits;
            }
            Command::Report(a)
        }
    };
    Ok((global, command))
}
