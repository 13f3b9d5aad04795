//! Command-line front end.
//!
//! Every setting lives in a flat TOML file passed with `--config`; any key can
//! be overridden on the command line with `--<key> <value>`, and `HNILM_SEED`
//! overrides the seed from the file. Relative `hierarchy` paths in a config
//! file are resolved against the file's directory.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 unknown node,
//! 4 too many state combinations, 5 degenerate analysis input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{correlation_matrix, hourwise_matrix, knn_entropy_seeded, EntropyByNode};
use crate::calendar::format_day;
use crate::disagg::{
    co_disaggregate_with_cap, hart_disaggregate, split_halves, train_states, ApplianceModel,
    ApplianceTrack, DisaggResult, HartConfig, TrainConfig, TrainingWarning,
    DEFAULT_COMBINATION_CAP,
};
use crate::error::{Error, Result};
use crate::events::{daily_event_stats, detect_events, write_events_csv};
use crate::hierarchy::MeterHierarchy;
use crate::io::{read_hierarchy, write_atomic, write_corpus, write_with, HIERARCHY_FILE};
use crate::metrics::{evaluate, MetricReport};
use crate::seed::derive_seed;
use crate::series::{resample, PowerSeries};
use crate::simgen::{presets, simulate_building, BuildingSpec};

pub const SEED_ENV: &str = "HNILM_SEED";
/// Config file written next to a simulated corpus.
pub const RUN_CONFIG_FILE: &str = "hnilm.toml";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNKNOWN_NODE: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

const DEFAULT_THRESHOLDS: [f64; 6] = [100.0, 200.0, 500.0, 1_000.0, 2_000.0, 5_000.0];

#[derive(Debug, Parser)]
#[command(name = "hnilm", version, about = "Disaggregation and diagnostics for metered buildings")]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Train on the first half of each feed, disaggregate the second.
    Half,
    /// Use whole feeds for both.
    None,
}

/// Keys shared by the config file and the command line.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Flat TOML config file
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Hierarchy JSON of the corpus
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<PathBuf>,
    /// Sampling period of the series CSVs, seconds
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<i64>,
    /// Offset of local time from UTC, seconds
    #[arg(long = "utc_offset", alias = "utc-offset", global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utc_offset: Option<i64>,
    /// Resample feeds to this period before use, seconds
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resample: Option<i64>,
    /// Event thresholds in watts, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    /// Largest number of state combinations CO may enumerate
    #[arg(long = "co_cap", alias = "co-cap", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub co_cap: Option<u64>,
    /// ON threshold in watts for training and F-score
    #[arg(long = "on_threshold", alias = "on-threshold", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on_threshold: Option<f64>,
    /// Neighbour rank for the entropy estimate
    #[arg(long = "entropy_k", alias = "entropy-k", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy_k: Option<usize>,
    /// Output directory
    #[arg(long = "out_dir", alias = "out-dir", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// States per trained model, OFF included
    #[arg(long = "num_states", alias = "num-states", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_states: Option<usize>,
    /// Edge-matching threshold in watts
    #[arg(long = "event_threshold", alias = "event-threshold", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_threshold: Option<f64>,
    /// Edge-matching relative magnitude tolerance
    #[arg(long = "match_tolerance", alias = "match-tolerance", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub match_tolerance: Option<f64>,
    /// Longest edge-matched activation, seconds
    #[arg(long = "max_on_duration", alias = "max-on-duration", global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_on_duration: Option<i64>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitMode>,
}

impl Settings {
    /// Fills every unset field from `other`.
    fn or(self, other: Settings) -> Settings {
        Settings {
            config: self.config.or(other.config),
            hierarchy: self.hierarchy.or(other.hierarchy),
            period: self.period.or(other.period),
            utc_offset: self.utc_offset.or(other.utc_offset),
            resample: self.resample.or(other.resample),
            thresholds: self.thresholds.or(other.thresholds),
            co_cap: self.co_cap.or(other.co_cap),
            on_threshold: self.on_threshold.or(other.on_threshold),
            entropy_k: self.entropy_k.or(other.entropy_k),
            out_dir: self.out_dir.or(other.out_dir),
            seed: self.seed.or(other.seed),
            num_states: self.num_states.or(other.num_states),
            event_threshold: self.event_threshold.or(other.event_threshold),
            match_tolerance: self.match_tolerance.or(other.match_tolerance),
            max_on_duration: self.max_on_duration.or(other.max_on_duration),
            split: self.split.or(other.split),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus from a building spec or preset
    Simulate {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Corpus directory (defaults to out_dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-day event statistics and a threshold sweep for one feed
    Events { node: String },
    /// Learn state models from sub-metered feeds
    Train {
        #[arg(required = true)]
        nodes: Vec<String>,
    },
    /// Split an aggregate feed into appliance tracks
    Disagg {
        aggregate: String,
        #[arg(long, value_enum, default_value = "co")]
        algorithm: Algorithm,
        /// Model JSON files (required for co)
        #[arg(long, num_args = 1..)]
        models: Vec<PathBuf>,
    },
    /// Correlation, entropy or hour-of-week matrices
    Analyze {
        #[arg(long, value_enum)]
        mode: AnalysisMode,
        nodes: Vec<String>,
    },
    /// Score earlier disaggregation runs against sub-metered truth
    Evaluate {
        #[arg(required = true)]
        aggregates: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Campus,
    CampusTwoState,
    ResidentialFlat,
    MeteringLevels,
    VfdFailure,
}

impl Preset {
    pub fn spec(self, seed: u64) -> BuildingSpec {
        match self {
            Preset::Campus => presets::campus(seed),
            Preset::CampusTwoState => presets::campus_two_state(seed),
            Preset::ResidentialFlat => presets::residential_flat(seed),
            Preset::MeteringLevels => presets::metering_levels(seed),
            Preset::VfdFailure => presets::vfd_failure(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Co,
    Hart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalysisMode {
    Corr,
    Entropy,
    Heatmap,
}

/// Settings after merging flags, environment, file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hierarchy: Option<PathBuf>,
    pub period: i64,
    pub utc_offset: i64,
    pub resample: Option<i64>,
    pub thresholds: Vec<f64>,
    pub co_cap: u64,
    pub on_threshold: f64,
    pub entropy_k: usize,
    pub out_dir: PathBuf,
    /// `None` when no layer set a seed; consumers fall back to their own.
    pub seed: Option<u64>,
    pub num_states: usize,
    pub hart: HartConfig,
    pub split: SplitMode,
}

impl RunConfig {
    /// Merges the layers with precedence flag > `HNILM_SEED` > file > default.
    pub fn resolve(flags: Settings, env_seed: Option<&str>) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => read_settings(path)?,
            None => Settings::default(),
        };
        let env = Settings {
            seed: env_seed
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::InvalidParameter(format!("{SEED_ENV}: {e}")))
                })
                .transpose()?,
            ..Settings::default()
        };
        let s = flags.or(env).or(file);
        let hart_default = HartConfig::default();
        let cfg = RunConfig {
            hierarchy: s.hierarchy,
            period: s.period.unwrap_or(30),
            utc_offset: s.utc_offset.unwrap_or(0),
            resample: s.resample,
            thresholds: s.thresholds.unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()),
            co_cap: s.co_cap.unwrap_or(DEFAULT_COMBINATION_CAP),
            on_threshold: s.on_threshold.unwrap_or(crate::metrics::DEFAULT_ON_THRESHOLD),
            entropy_k: s.entropy_k.unwrap_or(crate::analysis::DEFAULT_K),
            out_dir: s.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: s.seed,
            num_states: s.num_states.unwrap_or(2),
            hart: HartConfig {
                threshold: s.event_threshold.unwrap_or(hart_default.threshold),
                match_tolerance_fraction: s
                    .match_tolerance
                    .unwrap_or(hart_default.match_tolerance_fraction),
                max_on_duration: s.max_on_duration.unwrap_or(hart_default.max_on_duration),
            },
            split: s.split.unwrap_or(SplitMode::Half),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.period <= 0 {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if let Some(r) = self.resample {
            if r <= 0 || r % self.period != 0 {
                return bad(format!("resample must be a positive multiple of period, got {r}"));
            }
        }
        if self.utc_offset.abs() > 14 * 3_600 {
            return bad(format!("utc_offset out of range: {}", self.utc_offset));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("thresholds must be positive".into());
        }
        if self.co_cap == 0 {
            return bad("co_cap must be positive".into());
        }
        if !(self.on_threshold > 0.0 && self.on_threshold.is_finite()) {
            return bad("on_threshold must be positive".into());
        }
        if self.entropy_k == 0 {
            return bad("entropy_k must be at least 1".into());
        }
        if self.num_states < 2 {
            return bad("num_states must be at least 2".into());
        }
        let h = &self.hart;
        if !(h.threshold > 0.0) || !(h.match_tolerance_fraction > 0.0 && h.match_tolerance_fraction < 1.0) {
            return bad("event_threshold must be positive and match_tolerance in (0, 1)".into());
        }
        if h.max_on_duration <= 0 {
            return bad("max_on_duration must be positive".into());
        }
        if let Some(p) = &self.hierarchy {
            if !p.is_file() {
                return bad(format!("hierarchy file not found: {}", p.display()));
            }
        }
        Ok(())
    }

    fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }

    fn load_hierarchy(&self) -> Result<MeterHierarchy> {
        let path = self
            .hierarchy
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("no hierarchy given (set `hierarchy`)".into()))?;
        read_hierarchy(path, self.period)
    }

    /// A node's series, resampled if configured.
    fn feed(&self, h: &MeterHierarchy, id: &str) -> Result<PowerSeries> {
        let s = h.series(id)?;
        match self.resample {
            Some(p) => resample(s, p),
            None => Ok(s.clone()),
        }
    }
}

fn read_settings(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|e| Error::parse(path, e))?;
    let mut s: Settings = toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?;
    if let (Some(h), Some(dir)) = (&s.hierarchy, path.parent()) {
        if h.is_relative() {
            s.hierarchy = Some(dir.join(h));
        }
    }
    Ok(s)
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownNode(_) => EXIT_UNKNOWN_NODE,
        Error::TooManyCombinations { .. } => EXIT_CAPACITY,
        Error::UndefinedCorrelation(_)
        | Error::NoOverlap
        | Error::NoData(_)
        | Error::TooShort { .. }
        | Error::NoOnState(_)
        | Error::ZeroEnergy
        | Error::IncompatiblePeriod(_) => EXIT_DEGENERATE,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Reads `HNILM_SEED` from the process environment.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(SEED_ENV).ok().as_deref())
}

/// [`run`] with an explicit value for `HNILM_SEED`.
pub fn run_with_env<I, T>(args: I, env_seed: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli, env_seed) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            if matches!(e, Error::TooManyCombinations { .. }) {
                eprintln!(
                    "hint: disaggregate a deeper meter (a floor or panel feed) so fewer models share one aggregate"
                );
            }
            exit_code(&e)
        }
    }
}

pub fn execute(cli: Cli, env_seed: Option<&str>) -> Result<()> {
    let cfg = RunConfig::resolve(cli.settings, env_seed)?;
    match cli.command {
        Command::Simulate { spec, preset, out } => {
            let out = out.unwrap_or_else(|| cfg.out_dir.clone());
            cmd_simulate(&cfg, spec.as_deref(), preset, &out).map(|_| ())
        }
        Command::Events { node } => cmd_events(&cfg, &node),
        Command::Train { nodes } => cmd_train(&cfg, &nodes),
        Command::Disagg {
            aggregate,
            algorithm,
            models,
        } => cmd_disagg(&cfg, &aggregate, &models, algorithm),
        Command::Analyze { mode, nodes } => cmd_analyze(&cfg, mode, &nodes),
        Command::Evaluate { aggregates } => cmd_evaluate(&cfg, &aggregates),
    }
}

/// Writes the corpus, the effective spec and a config pointing at the corpus.
pub fn cmd_simulate(
    cfg: &RunConfig,
    spec_path: Option<&Path>,
    preset: Option<Preset>,
    out: &Path,
) -> Result<PathBuf> {
    let mut spec = match (spec_path, preset) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|e| Error::parse(p, e))?;
            BuildingSpec::from_json(&text)?
        }
        (None, Some(p)) => p.spec(0),
        (None, None) => return Err(Error::InvalidParameter("need --spec or --preset".into())),
    };
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    } else if spec_path.is_none() {
        spec.seed = presets::DEFAULT_SEED;
    }
    spec.validate()?;
    let h = simulate_building(&spec)?;
    let path = write_corpus(&h, out)?;
    write_atomic(&out.join("spec.json"), spec.to_json().as_bytes())?;
    let run = Settings {
        hierarchy: Some(PathBuf::from(HIERARCHY_FILE)),
        period: Some(spec.period),
        utc_offset: Some(spec.utc_offset),
        seed: Some(spec.seed),
        ..Settings::default()
    };
    write_atomic(&out.join(RUN_CONFIG_FILE), run.to_toml().as_bytes())?;
    Ok(path)
}

/// `events/<node>/`: events at the first threshold, per-day counts and the
/// threshold sweep.
pub fn cmd_events(cfg: &RunConfig, node: &str) -> Result<()> {
    let h = cfg.load_hierarchy()?;
    let s = cfg.feed(&h, node)?;
    let dir = cfg.out_dir.join("events").join(node);
    let first = cfg.thresholds[0];

    let events = detect_events(&s, first)?;
    write_with(&dir.join("events.csv"), |b| write_events_csv(&events, b))?;

    let stats = daily_event_stats(&s, first, cfg.utc_offset)?;
    let mut daily = String::from("date,events\n");
    for (day, n) in &stats.per_day_counts {
        daily.push_str(&format!("{},{n}\n", format_day(*day)));
    }
    write_atomic(&dir.join("daily.csv"), daily.as_bytes())?;

    let mut sweep = String::from("threshold_watts,median_per_day,max_per_day\n");
    for t in &cfg.thresholds {
        let st = daily_event_stats(&s, *t, cfg.utc_offset)?;
        sweep.push_str(&format!("{t},{},{}\n", st.median, st.max));
    }
    write_atomic(&dir.join("sweep.csv"), sweep.as_bytes())
}

fn training_window(cfg: &RunConfig, s: PowerSeries) -> PowerSeries {
    match cfg.split {
        SplitMode::Half => split_halves(&s).0,
        SplitMode::None => s,
    }
}

fn test_window(cfg: &RunConfig, s: PowerSeries) -> PowerSeries {
    match cfg.split {
        SplitMode::Half => split_halves(&s).1,
        SplitMode::None => s,
    }
}

/// `models/<node>.json` for every node.
pub fn cmd_train(cfg: &RunConfig, nodes: &[String]) -> Result<()> {
    let h = cfg.load_hierarchy()?;
    let tc = TrainConfig {
        num_states: cfg.num_states,
        on_threshold: cfg.on_threshold,
        seed: cfg.seed_or(TrainConfig::default().seed),
    };
    for id in nodes {
        let s = training_window(cfg, cfg.feed(&h, id)?);
        let trained = train_states(id, &s, &tc)?;
        if let Some(TrainingWarning::DegenerateTraining { requested, found }) = trained.warning {
            eprintln!("warning[DegenerateTraining]: `{id}` has {found} distinct ON levels, {requested} requested");
        }
        let path = cfg.out_dir.join("models").join(format!("{id}.json"));
        write_atomic(&path, trained.model.to_json().as_bytes())?;
    }
    Ok(())
}

fn disagg_dir(cfg: &RunConfig, aggregate: &str) -> PathBuf {
    cfg.out_dir.join("disagg").join(aggregate)
}

/// Truth feeds for every appliance, if the hierarchy meters all of them.
fn truth_for<'a>(
    cfg: &RunConfig,
    h: &MeterHierarchy,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<Option<BTreeMap<String, PowerSeries>>> {
    let mut out = BTreeMap::new();
    for name in names {
        match h.node(name).ok().and_then(|n| n.series()) {
            Some(_) => {
                out.insert(name.to_string(), cfg.feed(h, name)?);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

fn write_report(dir: &Path, report: &MetricReport) -> Result<()> {
    write_with(&dir.join("metrics.csv"), |b| report.write_csv(b))?;
    write_atomic(&dir.join("metrics.json"), report.to_json().as_bytes())
}

/// CO writes `appliances/<name>.csv`, `residual.csv` and, when every
/// appliance is metered, `metrics.csv` and `metrics.json`. Edge matching
/// writes `activations.csv` and `unmatched.csv`.
pub fn cmd_disagg(cfg: &RunConfig, aggregate: &str, model_paths: &[PathBuf], algorithm: Algorithm) -> Result<()> {
    let h = cfg.load_hierarchy()?;
    let s = test_window(cfg, cfg.feed(&h, aggregate)?);
    let dir = disagg_dir(cfg, aggregate);
    match algorithm {
        Algorithm::Hart => {
            let r = hart_disaggregate(&s, &cfg.hart)?;
            write_with(&dir.join("activations.csv"), |b| r.write_activations_csv(b))?;
            write_with(&dir.join("unmatched.csv"), |b| write_events_csv(&r.unmatched, b))
        }
        Algorithm::Co => {
            if model_paths.is_empty() {
                return Err(Error::InvalidParameter("co needs at least one --models file".into()));
            }
            let models = model_paths
                .iter()
                .map(|p| ApplianceModel::load(p))
                .collect::<Result<Vec<_>>>()?;
            let r = co_disaggregate_with_cap(&s, &models, cfg.co_cap)?;
            if dir.join("appliances").is_dir() {
                fs::remove_dir_all(dir.join("appliances"))?;
            }
            for t in &r.appliances {
                let path = dir.join("appliances").join(format!("{}.csv", t.name));
                write_with(&path, |b| r.write_track_csv(t, b))?;
            }
            write_with(&dir.join("residual.csv"), |b| r.write_residual_csv(b))?;
            match truth_for(cfg, &h, r.appliances.iter().map(|t| t.name.as_str()))? {
                Some(truth) => write_report(&dir, &evaluate(&truth, &r, cfg.on_threshold)?),
                None => {
                    eprintln!("note: not every appliance is metered; skipping metrics");
                    Ok(())
                }
            }
        }
    }
}

/// Reads the tracks written by [`cmd_disagg`] back into a result.
pub fn read_disagg(dir: &Path) -> Result<DisaggResult> {
    let tracks_dir = dir.join("appliances");
    let mut files: Vec<PathBuf> = fs::read_dir(&tracks_dir)
        .map_err(|e| Error::parse(&tracks_dir, e))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "csv"));
    files.sort();
    let mut tracks = Vec::new();
    for path in &files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        tracks.push(read_track(path, name)?);
    }
    let first = tracks
        .first()
        .ok_or_else(|| Error::NoData(format!("no tracks in {}", tracks_dir.display())))?;
    let (start, period, len) = (first.predicted.start(), first.predicted.period(), first.predicted.len());
    Ok(DisaggResult::new(tracks, vec![None; len], start, period))
}

fn read_track(path: &Path, name: String) -> Result<ApplianceTrack> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let mut rows: Vec<(i64, Option<f64>, Option<usize>)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let t = field(0).parse().map_err(|e| Error::parse(path, format!("timestamp: {e}")))?;
        let p = match field(1) {
            "" => None,
            v => Some(v.parse().map_err(|e| Error::parse(path, format!("predicted_watts: {e}")))?),
        };
        let s = match field(2) {
            "" => None,
            v => Some(v.parse().map_err(|e| Error::parse(path, format!("state_index: {e}")))?),
        };
        rows.push((t, p, s));
    }
    if rows.len() < 2 {
        return Err(Error::parse(path, "need at least two rows"));
    }
    let (start, period) = (rows[0].0, rows[1].0 - rows[0].0);
    if rows.iter().enumerate().any(|(i, r)| r.0 != start + i as i64 * period) {
        return Err(Error::parse(path, "timestamps are not on a uniform grid"));
    }
    let predicted = PowerSeries::new(start, period, rows.iter().map(|r| r.1).collect())?;
    let states = rows.iter().map(|r| r.2).collect();
    Ok(ApplianceTrack {
        name,
        predicted,
        states,
    })
}

/// Rescores each aggregate's tracks and writes `evaluation.csv` with the
/// aggregates side by side.
pub fn cmd_evaluate(cfg: &RunConfig, aggregates: &[String]) -> Result<()> {
    let h = cfg.load_hierarchy()?;
    let mut table = String::from("aggregate,appliance,f_score,precision,recall,nep,tp,fp,fn,tn\n");
    for agg in aggregates {
        h.node(agg)?;
        let dir = disagg_dir(cfg, agg);
        let r = read_disagg(&dir)?;
        let truth = truth_for(cfg, &h, r.appliances.iter().map(|t| t.name.as_str()))?.ok_or_else(|| {
            let missing = r
                .appliances
                .iter()
                .find(|t| h.series(&t.name).is_err())
                .map(|t| t.name.clone())
                .unwrap_or_default();
            Error::MissingTruth(missing)
        })?;
        let report = evaluate(&truth, &r, cfg.on_threshold)?;
        write_report(&dir, &report)?;
        for a in &report.appliances {
            let c = &a.counts;
            table.push_str(&format!(
                "{agg},{},{},{},{},{},{},{},{},{}\n",
                a.appliance, a.f_score, a.precision, a.recall, a.nep, c.tp, c.fp, c.fn_, c.tn
            ));
        }
    }
    write_atomic(&cfg.out_dir.join("evaluation.csv"), table.as_bytes())
}

/// `analysis/correlation.csv`, `analysis/entropy.csv` or
/// `analysis/heatmap_<node>.csv`.
pub fn cmd_analyze(cfg: &RunConfig, mode: AnalysisMode, nodes: &[String]) -> Result<()> {
    let h = cfg.load_hierarchy()?;
    let dir = cfg.out_dir.join("analysis");
    let ids: Vec<String> = if nodes.is_empty() {
        h.iter().filter(|n| n.series().is_some()).map(|n| n.id().to_string()).collect()
    } else {
        nodes.to_vec()
    };
    let feeds = ids
        .iter()
        .map(|id| cfg.feed(&h, id).map(|s| (id.as_str(), s)))
        .collect::<Result<Vec<_>>>()?;
    match mode {
        AnalysisMode::Corr => {
            let refs: Vec<(&str, &PowerSeries)> = feeds.iter().map(|(id, s)| (*id, s)).collect();
            let m = correlation_matrix(&refs)?;
            write_with(&dir.join("correlation.csv"), |b| m.write_csv(b))
        }
        AnalysisMode::Entropy => {
            let base = cfg.seed_or(crate::analysis::DEFAULT_JITTER_SEED);
            let mut out = EntropyByNode::default();
            for (id, s) in &feeds {
                match knn_entropy_seeded(s, cfg.entropy_k, derive_seed(base, id)) {
                    Ok(b) => {
                        out.bits.insert(id.to_string(), b);
                    }
                    Err(e) if nodes.is_empty() => {
                        eprintln!("warning[{}]: skipping `{id}`: {e}", e.name());
                        out.errors.insert(id.to_string(), e);
                    }
                    Err(e) => return Err(e),
                }
            }
            if out.bits.is_empty() {
                return Err(Error::NoData("no node yields an entropy estimate".into()));
            }
            write_with(&dir.join("entropy.csv"), |b| out.write_csv(b))
        }
        AnalysisMode::Heatmap => {
            for (id, s) in &feeds {
                let m = hourwise_matrix(s, cfg.utc_offset);
                write_with(&dir.join(format!("heatmap_{id}.csv")), |b| m.write_csv(b))?;
            }
            Ok(())
        }
    }
}
