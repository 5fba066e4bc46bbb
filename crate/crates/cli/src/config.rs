//! Run configuration: defaults, a TOML config file, and CLI flag overrides,
//! in increasing precedence.

use anyhow::{bail, Context, Result};
use foresight_core::engine::LoopConfig;
use foresight_core::harness::RunOptions;
use foresight_core::select::SelectorKind;
use foresight_core::world::Mode;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Which planning modes a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    AgentOnly,
    Imagine,
    Both,
}

impl ModeSelection {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "agent_only" | "agentonly" => Ok(ModeSelection::AgentOnly),
            "imagine" => Ok(ModeSelection::Imagine),
            "both" => Ok(ModeSelection::Both),
            other => bail!("unknown mode `{other}` (agent-only | imagine | both)"),
        }
    }

    pub fn modes(&self) -> Vec<Mode> {
        match self {
            ModeSelection::AgentOnly => vec![Mode::AgentOnly],
            ModeSelection::Imagine => vec![Mode::Imagine],
            ModeSelection::Both => vec![Mode::AgentOnly, Mode::Imagine],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModeSelection::AgentOnly => "agent_only",
            ModeSelection::Imagine => "imagine",
            ModeSelection::Both => "both",
        }
    }
}

/// Optional values loaded from `--config <file>` (TOML, keys match the long
/// flag names).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<String>,
    pub selector: Option<String>,
    pub theta: Option<f64>,
    pub max_refinements: Option<usize>,
    pub ess: Option<bool>,
    pub tss: Option<bool>,
    pub noise_std: Option<f64>,
    pub seed: Option<u64>,
    pub replan_hz: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
    pub scenarios: Option<String>,
    pub dataset: Option<PathBuf>,
    pub samples: Option<usize>,
    pub l2_at_horizon: Option<bool>,
    pub traces: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("bad config file {}", path.display()))
    }
}

/// Flag values shared by the run commands; `None` means "not given".
#[derive(Debug, Default, clap::Args)]
pub struct CommonFlags {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Planning mode: agent-only, imagine, or both.
    #[arg(long)]
    pub mode: Option<String>,
    /// Trajectory selection strategy: directional, smooth-sel, soft-min,
    /// max-cons, last, first.
    #[arg(long)]
    pub selector: Option<String>,
    /// Early-stop threshold on the trajectory convergence ratio.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Maximum refinement rounds after the initial plan.
    #[arg(long)]
    pub max_refinements: Option<usize>,
    /// Disable the early-stop strategy.
    #[arg(long)]
    pub no_ess: bool,
    /// Disable the trajectory-selection strategy (take the last iterate).
    #[arg(long)]
    pub no_tss: bool,
    /// Imaginer position-noise standard deviation, meters.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Master seed; per-scenario seeds derive from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replanning rate, Hz.
    #[arg(long)]
    pub replan_hz: Option<f64>,
    /// Scenario-level parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report formats (csv, json); default both.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<String>>,
    /// Scenario file, directory, or glob (default: the bundled suite).
    #[arg(long)]
    pub scenarios: Option<String>,
    /// Write per-run ego trace CSVs.
    #[arg(long)]
    pub traces: bool,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: ModeSelection,
    pub selector: SelectorKind,
    pub theta: f64,
    pub max_refinements: usize,
    pub ess: bool,
    pub tss: bool,
    pub noise_std: f64,
    pub seed: u64,
    pub replan_hz: f64,
    pub jobs: usize,
    pub out: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub scenarios: Option<String>,
    pub dataset: Option<PathBuf>,
    pub samples: usize,
    pub l2_at_horizon: bool,
    pub traces: bool,
}

impl RunConfig {
    /// Resolve defaults <- config file <- flags.
    pub fn resolve(flags: &CommonFlags, dataset_flag: Option<&Path>, samples_flag: Option<usize>, l2_at_horizon_flag: bool) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let mode_str = flags
            .mode
            .clone()
            .or(file.mode)
            .unwrap_or_else(|| "both".to_string());
        let selector_str = flags
            .selector
            .clone()
            .or(file.selector)
            .unwrap_or_else(|| "directional".to_string());
        let formats = flags
            .formats
            .clone()
            .or(file.formats)
            .unwrap_or_else(|| vec!["csv".into(), "json".into()]);
        let mut csv = false;
        let mut json = false;
        for f in &formats {
            match f.to_ascii_lowercase().as_str() {
                "csv" => csv = true,
                "json" => json = true,
                other => bail!("unknown report format `{other}` (csv | json)"),
            }
        }

        let config = RunConfig {
            mode: ModeSelection::parse(&mode_str)?,
            selector: selector_str
                .parse::<SelectorKind>()
                .map_err(|e| anyhow::anyhow!("{e}"))?,
            theta: flags.theta.or(file.theta).unwrap_or(0.05),
            max_refinements: flags.max_refinements.or(file.max_refinements).unwrap_or(5),
            ess: if flags.no_ess { false } else { file.ess.unwrap_or(true) },
            tss: if flags.no_tss { false } else { file.tss.unwrap_or(true) },
            noise_std: flags.noise_std.or(file.noise_std).unwrap_or(0.0),
            seed: flags.seed.or(file.seed).unwrap_or(42),
            replan_hz: flags.replan_hz.or(file.replan_hz).unwrap_or(2.0),
            jobs: flags.jobs.or(file.jobs).unwrap_or(1).max(1),
            out: flags
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            csv,
            json,
            scenarios: flags.scenarios.clone().or(file.scenarios),
            dataset: dataset_flag.map(Path::to_path_buf).or(file.dataset),
            samples: samples_flag.or(file.samples).unwrap_or(20),
            l2_at_horizon: l2_at_horizon_flag || file.l2_at_horizon.unwrap_or(false),
            traces: flags.traces || file.traces.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            bail!("theta must be positive");
        }
        if self.max_refinements < 1 {
            bail!("max-refinements must be at least 1");
        }
        if !(self.replan_hz > 0.0) {
            bail!("replan-hz must be positive");
        }
        if self.noise_std < 0.0 {
            bail!("noise-std must be non-negative");
        }
        if self.samples == 0 {
            bail!("samples must be positive");
        }
        if !self.csv && !self.json {
            bail!("at least one report format is required");
        }
        Ok(())
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            theta: self.theta,
            max_refinements: self.max_refinements,
            selector: self.selector,
            ess_enabled: self.ess,
            tss_enabled: self.tss,
            ..LoopConfig::default()
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            loop_config: self.loop_config(),
            replan_hz: self.replan_hz,
            noise_std: self.noise_std,
            master_seed: self.seed,
        }
    }

    /// One-line resolved-config header embedded in every report.
    pub fn header(&self) -> String {
        format!(
            "# mode={} selector={} theta={:.4} max_refinements={} ess={} tss={} \
             noise_std={:.3} seed={} replan_hz={:.2} scenarios={}",
            self.mode.name(),
            self.selector.name(),
            self.theta,
            self.max_refinements,
            self.ess,
            self.tss,
            self.noise_std,
            self.seed,
            self.replan_hz,
            self.scenarios.as_deref().unwrap_or("builtin"),
        )
    }
}
