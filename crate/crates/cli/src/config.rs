use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use leadlag_core::content::BoundsMode;
use leadlag_core::{AnalysisConfig, ContentConfig, Metric, Representation, YearRange};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprChoice {
    Freq,
    Impact,
    Both,
}

impl ReprChoice {
    fn expand(self) -> Vec<Representation> {
        match self {
            ReprChoice::Freq => vec![Representation::Frequency],
            ReprChoice::Impact => vec![Representation::Impact],
            ReprChoice::Both => Representation::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricChoice {
    Tvd,
    Hellinger,
    Both,
}

impl MetricChoice {
    fn expand(self) -> Vec<Metric> {
        match self {
            MetricChoice::Tvd => vec![Metric::Tvd],
            MetricChoice::Hellinger => vec![Metric::Hellinger],
            MetricChoice::Both => Metric::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsChoice {
    PerPair,
    Subject,
}

/// Flags shared by every analysis command. Unset flags fall back to the
/// config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Document file (JSON lines)
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Taxonomy file (JSON lines)
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Embedding file (.jsonl, or .bin with a .ids sidecar)
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Externally computed 2-D coordinates (JSON lines: id, x, y)
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Analysis years, A:B
    #[arg(long)]
    pub years: Option<YearRange>,
    #[arg(long, value_enum)]
    pub repr: Option<ReprChoice>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricChoice>,
    /// Grid bins per axis
    #[arg(long)]
    pub bins: Option<usize>,
    /// Gaussian smoothing bandwidth, in bins
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Largest lag for cross-correlation and Granger tests
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub pareto_fraction: Option<f64>,
    /// Recompute every result on each sliding window
    #[arg(long)]
    pub window_sweep: bool,
    #[arg(long, value_enum)]
    pub bounds: Option<BoundsChoice>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "LEADLAG_THREADS")]
    pub threads: Option<usize>,
    /// TOML file with any of the above keys (flags win)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Optional keys of a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    docs: Option<PathBuf>,
    taxonomy: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    coords: Option<PathBuf>,
    years: Option<String>,
    repr: Option<ReprChoice>,
    metric: Option<MetricChoice>,
    bins: Option<usize>,
    bandwidth: Option<f64>,
    max_lag: Option<usize>,
    pareto_fraction: Option<f64>,
    windows: Option<Vec<usize>>,
    window_sweep: Option<bool>,
    bounds: Option<BoundsChoice>,
    alpha: Option<f64>,
    depth_origin: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

/// Fully resolved configuration, recorded verbatim in every run manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub docs: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub years: String,
    pub representations: Vec<Representation>,
    pub metrics: Vec<Metric>,
    pub bins: [usize; 2],
    pub bandwidth: f64,
    pub max_lag: usize,
    pub pareto_fraction: f64,
    pub windows: Vec<usize>,
    pub window_sweep: bool,
    pub bounds: BoundsChoice,
    pub alpha: f64,
    pub depth_origin: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    #[serde(skip)]
    pub analysis: AnalysisConfig,
}

fn read_file_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::input(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig, Failure> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let defaults = AnalysisConfig::default();
        let years = match (&args.years, &file.years) {
            (Some(y), _) => *y,
            (None, Some(s)) => s.parse().map_err(|e| Failure::usage(format!("config years: {e}")))?,
            (None, None) => defaults.years,
        };
        let repr = args.repr.or(file.repr).unwrap_or(ReprChoice::Both);
        let metric = args.metric.or(file.metric).unwrap_or(MetricChoice::Both);
        let bins = args.bins.or(file.bins).unwrap_or(defaults.content.b1);
        let bandwidth = args.bandwidth.or(file.bandwidth).unwrap_or(defaults.content.bandwidth);
        let bounds = args.bounds.or(file.bounds).unwrap_or(BoundsChoice::PerPair);
        let analysis = AnalysisConfig {
            years,
            representations: repr.expand(),
            metrics: metric.expand(),
            max_lag: args.max_lag.or(file.max_lag).unwrap_or(defaults.max_lag),
            content: ContentConfig {
                b1: bins,
                b2: bins,
                bandwidth,
                bounds: match bounds {
                    BoundsChoice::PerPair => BoundsMode::PerPair,
                    BoundsChoice::Subject => BoundsMode::Subject,
                },
            },
            pareto_fraction: args.pareto_fraction.or(file.pareto_fraction).unwrap_or(defaults.pareto_fraction),
            // default windows shrink with a shorter range: 1..=min(11, len - 1)
            windows: file.windows.clone().unwrap_or_else(|| (1..years.len().min(12)).collect()),
            window_sweep: args.window_sweep || file.window_sweep.unwrap_or(false),
            alpha: file.alpha.unwrap_or(defaults.alpha),
            depth_origin: file.depth_origin.unwrap_or(defaults.depth_origin),
        };
        analysis.check().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(RunConfig {
            docs: args.docs.clone().or(file.docs),
            taxonomy: args.taxonomy.clone().or(file.taxonomy),
            embeddings: args.embeddings.clone().or(file.embeddings),
            coords: args.coords.clone().or(file.coords),
            years: years.to_string(),
            representations: analysis.representations.clone(),
            metrics: analysis.metrics.clone(),
            bins: [bins, bins],
            bandwidth,
            max_lag: analysis.max_lag,
            pareto_fraction: analysis.pareto_fraction,
            windows: analysis.windows.clone(),
            window_sweep: analysis.window_sweep,
            bounds,
            alpha: analysis.alpha,
            depth_origin: analysis.depth_origin,
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            threads: args.threads.or(file.threads).unwrap_or(0),
            analysis,
        })
    }

    pub fn require_docs(&self) -> Result<&Path, Failure> {
        self.docs
            .as_deref()
            .ok_or_else(|| Failure::usage("missing --docs (or `docs` in --config)".into()))
    }

    pub fn require_taxonomy(&self) -> Result<&Path, Failure> {
        self.taxonomy
            .as_deref()
            .ok_or_else(|| Failure::usage("missing --taxonomy (or `taxonomy` in --config)".into()))
    }
}
