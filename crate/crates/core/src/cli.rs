//! The `skillgap` command line.
//!
//! Every subcommand reads its inputs from `--data-dir` (default: the output
//! directory) and writes artifacts plus `run_manifest.json` into `--out-dir`,
//! so a pipeline can run in one directory:
//!
//! ```text
//! skillgap synth --seed 7 --out-dir run
//! skillgap features --out-dir run
//! skillgap ablate --out-dir run --iterations 200
//! skillgap importance --out-dir run
//! skillgap report --out-dir run
//! ```
//!
//! `--seed` is the master seed. It is handed unchanged to each module, and
//! each module derives its own streams from it with [`crate::seed::derive`]
//! under fixed labels (`synth/labels/<code>`, `tune/cv`, `ablation/refit`,
//! `boost/round` and so on), so one number reproduces a whole run.
//!
//! Exit codes: 0 on success, 1 when a module rejects its input, 2 on a usage
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::boost::{self, gain_importance, TreeEnsemble};
use crate::corpus::{
    self, parse_job_ads_with, parse_labor_supply, parse_shortage_labels, IngestOptions,
};
use crate::eval::{
    self, ablation_columns, change_subset, macro_report, matrix_dataset, AblationConfig,
    AblationSettings, EvaluationReport,
};
use crate::features::{
    self, read_design_matrix, temporal_split, write_design_matrix, MatrixOptions, TargetAlignment,
};
use crate::skills::{self, RankMode, SkillCorpusIndex};
use crate::synth::{
    self, SynthParams, JOB_ADS_FILE, LABELS_FILE, MANIFEST_FILE, SUPPLY_FILE, TAXONOMY_FILE,
};
use crate::tune::{self, SearchSettings, SearchSpace, TunedConfig};
use crate::{Error, Result};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";
pub const RANKINGS_FILE: &str = "skill_rankings.csv";
pub const PROFILE_FILE: &str = "profile_report.json";
pub const TRACE_FILE: &str = "search_trace.csv";
pub const TUNED_FILE: &str = "tuned_config.json";
pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const ABLATION_FILE: &str = "ablation_report.csv";
pub const IMPORTANCE_FILE: &str = "importance_report.csv";
pub const REPORT_DIR: &str = "report";

#[derive(Debug, Parser, Serialize)]
#[command(name = "skillgap", version, about = "Occupational skill-shortage pipeline")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Directory for every artifact of this run.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Directory holding the input files; defaults to --out-dir.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Validate the four input files and write rejection reports.
    Ingest(IngestArgs),
    /// Label distribution, major groups and status changes.
    Profile,
    /// Top-k skills per occupation-year by frequency or RCA.
    Skills(SkillsArgs),
    /// Build the occupation-year design matrix.
    Features(FeaturesArgs),
    /// Fit one model on the training years and score the test years.
    Train(TrainArgs),
    /// Random search with k-fold cross-validation.
    Tune(TuneArgs),
    /// Tune, refit and score every feature-subset configuration.
    Ablate(AblateArgs),
    /// Gain importance of a saved model.
    Importance(ImportanceArgs),
    /// Generate a calibrated synthetic dataset.
    Synth(SynthArgs),
    /// Collect the figure data of a run into one folder.
    Report,
}

#[derive(Debug, Args, Serialize)]
struct IngestArgs {
    #[arg(long, default_value_t = 1900)]
    min_year: i32,
    #[arg(long, default_value_t = 2100)]
    max_year: i32,
}

#[derive(Debug, Args, Serialize)]
struct SkillsArgs {
    #[arg(long, value_enum, default_value = "rca")]
    mode: RankMode,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// RCA mode drops skills seen in fewer ads of the occupation-year.
    #[arg(long, default_value_t = skills::DEFAULT_MIN_YEARLY_COUNT)]
    min_count: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum AlignmentArg {
    SameYear,
    NextYear,
}

#[derive(Debug, Args, Serialize)]
struct FeaturesArgs {
    #[arg(long, default_value_t = 2)]
    lags: u32,
    #[arg(long, value_enum, default_value = "same-year")]
    alignment: AlignmentArg,
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    /// Last training year; later years are held out.
    #[arg(long, default_value_t = 2016)]
    train_end: i32,
}

#[derive(Debug, Args, Serialize)]
struct SearchArgs {
    #[arg(long, default_value_t = 2500)]
    iterations: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Evaluate candidates on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    split: SplitArgs,
    /// Feature subset, e.g. `all_in` or `LD_plus_LS`.
    #[arg(long, default_value = "all_in")]
    config: String,
    /// Tuned config JSON; booster defaults and no oversampling otherwise.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TuneArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = "all_in")]
    config: String,
}

#[derive(Debug, Args, Serialize)]
struct AblateArgs {
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Comma-separated config names or `all`.
    #[arg(long, default_value = "all")]
    configs: String,
}

#[derive(Debug, Args, Serialize)]
struct ImportanceArgs {
    /// Defaults to the LD_plus_LS model written by `ablate`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Keep only the strongest features.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    /// JSON file overriding generator parameters; --seed always wins.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Remove every planted shift.
    #[arg(long)]
    no_signal: bool,
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub master_seed: u64,
    pub tool_version: String,
    pub duration_secs: f64,
    pub status: String,
}

struct Run<'a> {
    common: &'a Common,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run<'_> {
    fn input(&mut self, name: &str) -> PathBuf {
        let p = self.common.data_dir.as_ref().unwrap_or(&self.common.out_dir).join(name);
        self.inputs.push(p.clone());
        p
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.common.out_dir.join(name);
        self.outputs.push(p.clone());
        p
    }
}

/// Runs one command line (`argv[0]` is the program name) and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let started = Instant::now();
    let mut run = Run {
        common: &cli.common,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let result = fs::create_dir_all(&cli.common.out_dir)
        .map_err(Error::from)
        .and_then(|_| execute(&cli.command, &mut run));
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    let manifest = RunManifest {
        subcommand: subcommand_name(&cli.command).to_string(),
        argv: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        flags: serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null),
        inputs: run.inputs,
        outputs: run.outputs,
        master_seed: cli.common.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_secs: started.elapsed().as_secs_f64(),
        status: match &result {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("error: {e}"),
        },
    };
    if cli.common.out_dir.is_dir() {
        let path = cli.common.out_dir.join(RUN_MANIFEST_FILE);
        let written = serde_json::to_string_pretty(&manifest)
            .map_err(std::io::Error::other)
            .and_then(|s| fs::write(&path, s + "\n"));
        if let Err(e) = written {
            warn!("could not write {}: {e}", path.display());
        }
    }
    code
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Profile => "profile",
        Command::Skills(_) => "skills",
        Command::Features(_) => "features",
        Command::Train(_) => "train",
        Command::Tune(_) => "tune",
        Command::Ablate(_) => "ablate",
        Command::Importance(_) => "importance",
        Command::Synth(_) => "synth",
        Command::Report => "report",
    }
}

fn execute(command: &Command, run: &mut Run<'_>) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a, run),
        Command::Profile => profile(run),
        Command::Skills(a) => rank_skills(a, run),
        Command::Features(a) => build_features(a, run),
        Command::Train(a) => train(a, run),
        Command::Tune(a) => tune_config(a, run),
        Command::Ablate(a) => ablate(a, run),
        Command::Importance(a) => importance(a, run),
        Command::Synth(a) => synthesize(a, run),
        Command::Report => report(run),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    fs::write(path, s + "\n")?;
    Ok(())
}

fn ingest(a: &IngestArgs, run: &mut Run<'_>) -> Result<()> {
    let opts = IngestOptions {
        min_year: a.min_year,
        max_year: a.max_year,
    };
    let (ads_path, tax_path) = (run.input(JOB_ADS_FILE), run.input(TAXONOMY_FILE));
    let (ads, taxonomy) = parse_job_ads_with(&ads_path, &tax_path, &opts)?;
    let supply = parse_labor_supply(&run.input(SUPPLY_FILE))?;
    let labels = parse_shortage_labels(&run.input(LABELS_FILE))?;

    #[derive(Serialize)]
    struct FileSummary {
        file: &'static str,
        data_rows: usize,
        accepted: usize,
        rejected: usize,
    }
    let summary = vec![
        FileSummary {
            file: JOB_ADS_FILE,
            data_rows: ads.data_rows,
            accepted: ads.records.len(),
            rejected: ads.rejections.len(),
        },
        FileSummary {
            file: SUPPLY_FILE,
            data_rows: supply.data_rows,
            accepted: supply.records.len(),
            rejected: supply.rejections.len(),
        },
        FileSummary {
            file: LABELS_FILE,
            data_rows: labels.len(),
            accepted: labels.len(),
            rejected: 0,
        },
        FileSummary {
            file: TAXONOMY_FILE,
            data_rows: taxonomy.len(),
            accepted: taxonomy.len(),
            rejected: 0,
        },
    ];
    corpus::write_rejections(&run.output("job_ads_rejections.txt"), &ads.rejections)?;
    corpus::write_rejections(&run.output("labor_supply_rejections.txt"), &supply.rejections)?;
    for s in &summary {
        println!("{}: {} accepted, {} rejected", s.file, s.accepted, s.rejected);
    }
    write_json(&run.output("ingest_summary.json"), &summary)
}

fn profile(run: &mut Run<'_>) -> Result<()> {
    let labels = parse_shortage_labels(&run.input(LABELS_FILE))?;
    let report = corpus::profile_dataset(&labels)?;
    println!(
        "{} rows, {} occupations, {} in shortage, {} flips, top two groups {:.1}%",
        report.rows,
        report.occupations,
        report.in_shortage,
        report.total_flips(),
        100.0 * report.top_two_share()
    );
    write_json(&run.output(PROFILE_FILE), &report)
}

fn load_ads(run: &mut Run<'_>) -> Result<(Vec<corpus::JobAd>, corpus::SkillTaxonomy)> {
    let (ads_path, tax_path) = (run.input(JOB_ADS_FILE), run.input(TAXONOMY_FILE));
    let (parsed, taxonomy) = corpus::parse_job_ads(&ads_path, &tax_path)?;
    if !parsed.rejections.is_empty() {
        warn!(
            "{} job-ad rows rejected; run `ingest` for the report",
            parsed.rejections.len()
        );
    }
    Ok((parsed.records, taxonomy))
}

fn rank_skills(a: &SkillsArgs, run: &mut Run<'_>) -> Result<()> {
    let mode = a.mode;
    let (ads, _) = load_ads(run)?;
    let index = SkillCorpusIndex::build(&ads)?;
    let ranked = skills::rank_all(&index, mode, a.top_k, a.min_count)?;
    println!("{} ranked entries", ranked.len());
    skills::write_rankings(&run.output(RANKINGS_FILE), &ranked, mode)?;
    Ok(())
}

fn build_features(a: &FeaturesArgs, run: &mut Run<'_>) -> Result<()> {
    let (ads, taxonomy) = load_ads(run)?;
    let supply = parse_labor_supply(&run.input(SUPPLY_FILE))?;
    if !supply.rejections.is_empty() {
        warn!("{} labour-supply rows rejected", supply.rejections.len());
    }
    let labels = parse_shortage_labels(&run.input(LABELS_FILE))?;
    let options = MatrixOptions {
        lags: a.lags,
        alignment: match a.alignment {
            AlignmentArg::SameYear => TargetAlignment::SameYear,
            AlignmentArg::NextYear => TargetAlignment::NextYear,
        },
    };
    let matrix =
        features::design_matrix_from_corpus(&ads, &taxonomy, &supply.records, &labels, options)?;
    println!("{} rows x {} columns", matrix.len(), matrix.order.len());
    run.output(features::MATRIX_FILE);
    run.output(features::ORDER_FILE);
    write_design_matrix(&run.common.out_dir, &matrix)?;
    Ok(())
}

fn load_matrix(run: &mut Run<'_>) -> Result<features::DesignMatrix> {
    run.input(features::MATRIX_FILE);
    let order = run.input(features::ORDER_FILE);
    let dir = order.parent().unwrap_or(Path::new("."));
    Ok(read_design_matrix(dir)?)
}

fn search_settings(s: &SearchArgs, seed: u64) -> SearchSettings {
    SearchSettings {
        iterations: s.iterations,
        folds: s.folds,
        seed,
        parallel: !s.sequential,
    }
}

fn train(a: &TrainArgs, run: &mut Run<'_>) -> Result<()> {
    let config = AblationConfig::from_name(&a.config)?;
    if config == AblationConfig::Naive {
        return Err(eval::EvalError::NotTrainable(config.name()).into());
    }
    let matrix = load_matrix(run)?;
    let tuned = match &a.params {
        Some(p) => {
            run.inputs.push(p.clone());
            TunedConfig::load(p)?
        }
        None => TunedConfig {
            boost: boost::BoostConfig {
                seed: crate::seed::derive(run.common.seed, "train/boost"),
                ..Default::default()
            },
            oversample_multiplier: 1.0,
        },
    };
    let (train_rows, test_rows) = temporal_split(&matrix, a.split.train_end)?;
    let columns = ablation_columns(&matrix.order, config);
    let labels = train_rows.labels();
    let idx = tune::oversample(
        &labels,
        tuned.oversample_multiplier,
        crate::seed::derive(run.common.seed, "train/oversample"),
    )?;
    let data = matrix_dataset(&train_rows, &columns).select_rows(&idx);
    let y: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
    let model = boost::train(&data, &y, &tuned.boost)?;
    model.save(&run.output(MODEL_FILE))?;

    #[derive(Serialize)]
    struct TrainReport {
        config: &'static str,
        train_rows: usize,
        full_test: EvaluationReport,
        change_subset: EvaluationReport,
    }
    let score = |m: &features::DesignMatrix| -> Result<EvaluationReport> {
        if m.is_empty() {
            return Ok(EvaluationReport::empty());
        }
        let probs = model.predict_dataset(&matrix_dataset(m, &columns))?;
        let preds: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
        Ok(macro_report(&preds, &m.labels())?)
    };
    let report = TrainReport {
        config: config.name(),
        train_rows: data.n_rows(),
        full_test: score(&test_rows)?,
        change_subset: score(&change_subset(&test_rows))?,
    };
    println!(
        "{}: test macro-F1 {:.4}, change-subset macro-F1 {:.4}",
        report.config, report.full_test.macro_f1, report.change_subset.macro_f1
    );
    write_json(&run.output(TRAIN_REPORT_FILE), &report)
}

fn tune_config(a: &TuneArgs, run: &mut Run<'_>) -> Result<()> {
    let config = AblationConfig::from_name(&a.config)?;
    if config == AblationConfig::Naive {
        return Err(eval::EvalError::NotTrainable(config.name()).into());
    }
    let matrix = load_matrix(run)?;
    let (train_rows, _) = temporal_split(&matrix, a.split.train_end)?;
    let labels = train_rows.labels();
    let data = matrix_dataset(&train_rows, &ablation_columns(&matrix.order, config));
    let space = SearchSpace::for_labels(&labels)?;
    let outcome = tune::randomized_search(
        &data,
        &labels,
        &space,
        &search_settings(&a.search, run.common.seed),
    )?;
    println!(
        "best draw {} with cv macro-F1 {:.4}",
        outcome.best_index,
        outcome.best_result().mean_macro_f1
    );
    tune::write_trace(&run.output(TRACE_FILE), &outcome.trace)?;
    outcome.best.save(&run.output(TUNED_FILE))?;
    Ok(())
}

/// Per-config artifact name, e.g. `model_LD_plus_LS.json`.
pub fn config_file(stem: &str, config: AblationConfig, ext: &str) -> String {
    format!("{stem}_{}.{ext}", config.name())
}

fn ablate(a: &AblateArgs, run: &mut Run<'_>) -> Result<()> {
    let configs = AblationConfig::parse_list(&a.configs)?;
    let matrix = load_matrix(run)?;
    let settings = AblationSettings {
        train_end: a.split.train_end,
        search: search_settings(&a.search, run.common.seed),
    };
    let outcome = eval::run_ablation(&matrix, &configs, &settings)?;
    for row in &outcome.rows {
        info!(
            "{} {}: macro-F1 {:.4} over {} rows",
            row.config.name(),
            row.subset.as_str(),
            row.report.macro_f1,
            row.report.n_rows
        );
    }
    eval::write_ablation_report(&run.output(ABLATION_FILE), &outcome.rows)?;
    for f in &outcome.fitted {
        f.model.save(&run.output(&config_file("model", f.config, "json")))?;
        f.search.best.save(&run.output(&config_file("tuned", f.config, "json")))?;
        tune::write_trace(
            &run.output(&config_file("search_trace", f.config, "csv")),
            &f.search.trace,
        )?;
    }
    println!("{} report rows", outcome.rows.len());
    Ok(())
}

fn importance(a: &ImportanceArgs, run: &mut Run<'_>) -> Result<()> {
    let path = match &a.model {
        Some(p) => {
            run.inputs.push(p.clone());
            p.clone()
        }
        None => run.input(&config_file("model", AblationConfig::LD_plus_LS, "json")),
    };
    let model = TreeEnsemble::load(&path)?;
    let mut ranked = gain_importance(&model);
    if let Some(k) = a.top_k {
        ranked.truncate(k);
    }
    for f in ranked.iter().take(5) {
        println!("{:<40} {:.4}", f.feature, f.share);
    }
    eval::write_importance_report(&run.output(IMPORTANCE_FILE), &ranked)?;
    Ok(())
}

fn synthesize(a: &SynthArgs, run: &mut Run<'_>) -> Result<()> {
    let mut params = match &a.params {
        Some(p) => {
            run.inputs.push(p.clone());
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<SynthParams>(&text).map_err(synth::SynthError::from)?
        }
        None => SynthParams::default(),
    };
    if a.no_signal {
        params = params.without_signal();
    }
    params.seed = run.common.seed;
    let data = synth::generate(&params)?;
    for name in [JOB_ADS_FILE, TAXONOMY_FILE, SUPPLY_FILE, LABELS_FILE, MANIFEST_FILE] {
        run.output(name);
    }
    synth::write_dataset(&run.common.out_dir, &data)?;
    let c = &data.manifest.counts;
    println!(
        "{} occupations, {} ads, {} labels ({} in shortage), {} flips",
        c.occupations, c.job_ads, c.labels, c.in_shortage, data.manifest.total_flips
    );
    Ok(())
}

/// Figure bundles: folder name and the artifacts that feed it.
const BUNDLES: [(&str, &[&str]); 4] = [
    ("label_profile", &[PROFILE_FILE]),
    ("skill_ranking", &[RANKINGS_FILE]),
    ("ablation", &[ABLATION_FILE]),
    ("importance", &[IMPORTANCE_FILE]),
];

fn report(run: &mut Run<'_>) -> Result<()> {
    #[derive(Serialize)]
    struct Bundle {
        name: &'static str,
        files: Vec<String>,
        missing: Vec<String>,
    }
    let mut index = Vec::new();
    for (name, files) in BUNDLES {
        let mut bundle = Bundle {
            name,
            files: Vec::new(),
            missing: Vec::new(),
        };
        for &file in files {
            let src = run.common.data_dir.as_ref().unwrap_or(&run.common.out_dir).join(file);
            if src.is_file() {
                run.inputs.push(src.clone());
                let rel = format!("{REPORT_DIR}/{name}/{file}");
                fs::create_dir_all(run.common.out_dir.join(REPORT_DIR).join(name))?;
                fs::copy(&src, run.output(&rel))?;
                bundle.files.push(rel);
            } else {
                bundle.missing.push(file.to_string());
            }
        }
        println!(
            "{name}: {}",
            if bundle.missing.is_empty() { "complete" } else { "incomplete" }
        );
        index.push(bundle);
    }
    fs::create_dir_all(run.common.out_dir.join(REPORT_DIR))?;
    write_json(&run.output(&format!("{REPORT_DIR}/index.json")), &index)
}
