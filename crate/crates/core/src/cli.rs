//! Command-line front end. Every command writes its outputs plus a
//! `manifest.json` into `--out`.
//!
//! Settings resolve as flags, then the TOML file given by `--config`, then
//! built-in defaults. The effective settings are echoed in the manifest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::bank::{load_item_bank, BankFormat};
use crate::data::responses::read_logs_jsonl;
use crate::data::{aggregate, GradingRule, LabeledMatrix, ResponseMatrix, DEFAULT_REPEATS};
use crate::error::{Error, Result};
use crate::mcf::io::{save_factors, save_mastery_csv, save_mastery_json, save_trace_csv, ClippingDiagnostics, FitBundle};
use crate::mcf::sweep::{sweep_csv, DEFAULT_SKILL_GRID};
use crate::mcf::{mastery, multistart_fit, predict_scores, sweep, GammaPrior, InitMode, McfConfig, Normalization, Observations};
use crate::metrics::agreement::read_annotations_csv;
use crate::metrics::{
    cluster_models, concept_counts, krippendorff_alpha, reconstruction_metrics, Distance, DEFAULT_BINARIZE_THRESHOLD,
    DEFAULT_MASTERY_THRESHOLD,
};
use crate::report::{HeatmapGrid, RunManifest};
use crate::sim::{simulate, QMode, ResponseMode, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "cogdiag", version, about = "Concept-level diagnosis of model responses via weighted co-factorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic item bank, response matrix and planted truth.
    Simulate(SimulateArgs),
    /// Grade JSONL response logs against an item bank into X and W.
    Grade(GradeArgs),
    /// Fit the co-factorization and derive model × concept mastery.
    Fit(FitArgs),
    /// Concept counts, heatmap and clustering from a mastery file.
    Diagnose(DiagnoseArgs),
    /// Krippendorff's alpha over an annotation CSV.
    Agreement(AgreementArgs),
    /// Fit over a grid of latent-skill counts and β values.
    Sweep(SweepArgs),
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// `SHAPE:RATE`
fn gamma_prior(s: &str) -> std::result::Result<GammaPrior, String> {
    let (a, b) = s.split_once(':').ok_or("expected SHAPE:RATE")?;
    let p = GammaPrior::new(
        a.trim().parse().map_err(|e| format!("shape: {e}"))?,
        b.trim().parse().map_err(|e| format!("rate: {e}"))?,
    );
    if !(p.shape > 0.0 && p.rate > 0.0 && p.shape.is_finite() && p.rate.is_finite()) {
        return Err("shape and rate must be positive".into());
    }
    Ok(p)
}

fn load_settings<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Items (rows of X and Q).
    #[arg(long, value_parser = positive)]
    pub m: Option<usize>,
    /// Models (columns of X).
    #[arg(long, value_parser = positive)]
    pub n: Option<usize>,
    /// Concepts (columns of Q).
    #[arg(long, value_parser = positive)]
    pub k: Option<usize>,
    /// Planted latent skills.
    #[arg(long, value_parser = positive)]
    pub t: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub q_mode: Option<QMode>,
    #[arg(long)]
    pub q_threshold: Option<f64>,
    /// Single Bernoulli draw per cell instead of the mean of `--repeats`.
    #[arg(long, conflicts_with = "repeats")]
    pub bernoulli: bool,
    #[arg(long, value_parser = positive)]
    pub repeats: Option<usize>,
    #[arg(long, value_parser = gamma_prior, value_name = "SHAPE:RATE")]
    pub prior_e: Option<GammaPrior>,
    #[arg(long, value_parser = gamma_prior, value_name = "SHAPE:RATE")]
    pub prior_u: Option<GammaPrior>,
    #[arg(long, value_parser = gamma_prior, value_name = "SHAPE:RATE")]
    pub prior_v: Option<GammaPrior>,
    /// TOML file with `SimConfig` keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg: SimConfig = load_settings(args.config.as_deref())?;
    cfg.items = args.m.unwrap_or(cfg.items);
    cfg.models = args.n.unwrap_or(cfg.models);
    cfg.concepts = args.k.unwrap_or(cfg.concepts);
    cfg.true_skills = args.t.unwrap_or(cfg.true_skills);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.q_mode = args.q_mode.unwrap_or(cfg.q_mode);
    cfg.q_threshold = args.q_threshold.unwrap_or(cfg.q_threshold);
    cfg.prior_e = args.prior_e.unwrap_or(cfg.prior_e);
    cfg.prior_u = args.prior_u.unwrap_or(cfg.prior_u);
    cfg.prior_v = args.prior_v.unwrap_or(cfg.prior_v);
    if args.bernoulli {
        cfg.response_mode = ResponseMode::Bernoulli;
    } else if let Some(r) = args.repeats {
        cfg.response_mode = ResponseMode::Mean { repeats: r };
    }
    cfg.validate()?;

    let mut manifest = RunManifest::start("simulate", &cfg, Some(cfg.seed));
    if let Some(c) = &args.config {
        manifest.add_input(c)?;
    }
    let out = simulate(&cfg)?;
    create_out(&args.out)?;
    out.save(&args.out)?;
    println!(
        "simulated {} items × {} models × {} concepts (Q density {:.3}) into {}",
        cfg.items,
        cfg.models,
        cfg.concepts,
        out.q.mean().unwrap_or(0.0),
        args.out.display()
    );
    manifest.finish(&args.out)
}

// ------------------------------------------------------------------- grade

#[derive(Debug, Args)]
pub struct GradeArgs {
    /// Item bank (`.json`, or `.csv` with a sibling `concepts.csv`).
    #[arg(long)]
    pub bank: PathBuf,
    /// Glob matching JSONL response logs.
    #[arg(long)]
    pub logs: String,
    #[arg(long)]
    pub rule: Option<GradingRule>,
    /// Expected attempts per (item, model) cell.
    #[arg(long, value_parser = positive)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GradeSettings {
    pub rule: GradingRule,
    pub repeats: usize,
}

impl Default for GradeSettings {
    fn default() -> Self {
        Self {
            rule: GradingRule::default(),
            repeats: DEFAULT_REPEATS,
        }
    }
}

fn bank_format(path: &Path) -> BankFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => BankFormat::Csv,
        _ => BankFormat::Json,
    }
}

pub fn cmd_grade(args: &GradeArgs) -> Result<()> {
    let mut settings: GradeSettings = load_settings(args.config.as_deref())?;
    settings.rule = args.rule.unwrap_or(settings.rule);
    settings.repeats = args.repeats.unwrap_or(settings.repeats);

    let mut manifest = RunManifest::start("grade", &settings, None);
    let bank = load_item_bank(&args.bank, bank_format(&args.bank))?;
    manifest.add_input(&args.bank)?;
    let mut paths: Vec<PathBuf> = glob::glob(&args.logs)
        .map_err(|e| Error::Validation(format!("bad log glob {:?}: {e}", args.logs)))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io {
            path: e.path().to_path_buf(),
            source: e.into(),
        })?;
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Validation(format!("no response logs match {:?}", args.logs)));
    }
    let mut logs = Vec::new();
    for p in &paths {
        logs.extend(read_logs_jsonl(p)?);
        manifest.add_input(p)?;
    }
    let agg = aggregate(&logs, &bank, settings.rule.grader(), settings.repeats)?;
    create_out(&args.out)?;
    agg.matrix.save_csv(&args.out.join("X.csv"), &args.out.join("W.csv"))?;
    let mut warn_text = agg.warnings.join("\n");
    if !warn_text.is_empty() {
        warn_text.push('\n');
    }
    write_text(&args.out.join("grading_warnings.log"), &warn_text)?;
    println!(
        "graded {} logs into a {}×{} response matrix ({} warnings)",
        paths.len(),
        agg.matrix.n_items(),
        agg.matrix.n_models(),
        agg.warnings.len()
    );
    manifest.finish(&args.out)
}

// --------------------------------------------------------------------- fit

/// Solver flags shared by `fit` and `sweep`.
#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Latent skill count T.
    #[arg(long, short = 't', value_parser = positive)]
    pub skills: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sets λ_E, λ_U and λ_V together.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambda_e: Option<f64>,
    #[arg(long)]
    pub lambda_u: Option<f64>,
    #[arg(long)]
    pub lambda_v: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init: Option<InitMode>,
    /// Random restarts; the lowest final objective wins.
    #[arg(long, value_parser = positive)]
    pub starts: Option<usize>,
    /// Score threshold separating positives from negatives for accuracy/AUC.
    #[arg(long)]
    pub binarize_threshold: Option<f64>,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut McfConfig) {
        cfg.latent_skills = self.skills.unwrap_or(cfg.latent_skills);
        cfg.beta = self.beta.unwrap_or(cfg.beta);
        if let Some(l) = self.lambda {
            cfg.lambda_e = l;
            cfg.lambda_u = l;
            cfg.lambda_v = l;
        }
        cfg.lambda_e = self.lambda_e.unwrap_or(cfg.lambda_e);
        cfg.lambda_u = self.lambda_u.unwrap_or(cfg.lambda_u);
        cfg.lambda_v = self.lambda_v.unwrap_or(cfg.lambda_v);
        cfg.max_iters = self.max_iters.unwrap_or(cfg.max_iters);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.init = self.init.unwrap_or(cfg.init);
    }
}

/// Response matrix and Q-matrix inputs shared by `fit` and `sweep`.
#[derive(Debug, Args)]
pub struct MatrixInputs {
    /// Item × model scores.
    #[arg(long)]
    pub x: PathBuf,
    /// Item × model observation weights (all ones when omitted).
    #[arg(long)]
    pub w: Option<PathBuf>,
    /// Item × concept Q-matrix CSV, or an item bank `.json`.
    #[arg(long)]
    pub q: PathBuf,
}

struct Loaded {
    responses: ResponseMatrix,
    q: LabeledMatrix,
}

impl MatrixInputs {
    fn load(&self, manifest: &mut RunManifest) -> Result<Loaded> {
        let responses = ResponseMatrix::load_csv(&self.x, self.w.as_deref())?;
        manifest.add_input(&self.x)?;
        if let Some(w) = &self.w {
            manifest.add_input(w)?;
        }
        let q = if self.q.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            let bank = load_item_bank(&self.q, BankFormat::Json)?;
            LabeledMatrix::new(bank.item_ids(), bank.catalog().ids(), bank.qmatrix())?
        } else {
            LabeledMatrix::read_csv(&self.q)?
        };
        manifest.add_input(&self.q)?;
        if q.row_ids != responses.item_ids {
            return Err(Error::Dimension(format!(
                "{} has {} items but {} has {} (item ids must match in order)",
                self.x.display(),
                responses.n_items(),
                self.q.display(),
                q.row_ids.len()
            )));
        }
        Ok(Loaded { responses, q })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub inputs: MatrixInputs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// How raw mastery is mapped into [0, 1].
    #[arg(long)]
    pub normalization: Option<Normalization>,
    /// TOML file: `starts`, `normalization`, `binarize_threshold` and a `[solver]` table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSettings {
    pub starts: usize,
    pub normalization: Normalization,
    pub binarize_threshold: f64,
    pub solver: McfConfig,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            starts: 1,
            normalization: Normalization::default(),
            binarize_threshold: DEFAULT_BINARIZE_THRESHOLD,
            solver: McfConfig::default(),
        }
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let mut s: FitSettings = load_settings(args.config.as_deref())?;
    args.solver.apply(&mut s.solver);
    s.starts = args.solver.starts.unwrap_or(s.starts);
    s.binarize_threshold = args.solver.binarize_threshold.unwrap_or(s.binarize_threshold);
    s.normalization = args.normalization.unwrap_or(s.normalization);
    s.solver.validate()?;

    let mut manifest = RunManifest::start("fit", &s, Some(s.solver.seed));
    if let Some(c) = &args.config {
        manifest.add_input(c)?;
    }
    let data = args.inputs.load(&mut manifest)?;
    let r = &data.responses;
    let obs = Observations::new(r.x.view(), r.w.view(), data.q.values.view())?;
    let fit = multistart_fit(&obs, &s.solver, s.starts)?;

    create_out(&args.out)?;
    save_factors(&fit.factors, &r.item_ids, &r.model_ids, &data.q.col_ids, &args.out)?;
    let m = mastery(&fit.factors, s.normalization).with_ids(r.model_ids.clone(), data.q.col_ids.clone())?;
    save_mastery_json(&m, &args.out.join("mastery.json"))?;
    save_mastery_csv(&m, &args.out)?;
    let pred = predict_scores(&fit.factors);
    let report = reconstruction_metrics(pred.scores.view(), r.x.view(), r.w.view(), s.binarize_threshold)?;
    crate::mcf::io::write_json(&report, &args.out.join("report.json"))?;
    save_trace_csv(&fit.objective_trace, &args.out.join("trace.csv"))?;
    let clipping = ClippingDiagnostics {
        clipped_cells: pred.clipped,
        total_cells: pred.scores.len(),
    };
    FitBundle::new(&s.solver, s.starts, &fit, clipping, s.normalization).save(&args.out.join("fit.json"))?;
    for w in &m.warnings {
        manifest.notes.push(w.clone());
    }
    if !fit.converged {
        let note = format!("not converged after {} iterations", fit.iterations_run);
        eprintln!("warning: {note}");
        manifest.notes.push(note);
    }
    println!(
        "objective {:.6} after {} iterations (seed {}); accuracy {:.4}, auc {}, rmse {:.4}",
        fit.final_objective(),
        fit.iterations_run,
        fit.seed,
        report.accuracy,
        report.auc.map_or("n/a".to_string(), |a| format!("{a:.4}")),
        report.rmse
    );
    manifest.finish(&args.out)
}

// ---------------------------------------------------------------- diagnose

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// `mastery.json` written by `fit`.
    #[arg(long)]
    pub mastery: PathBuf,
    /// A concept counts as mastered when its probability is strictly above this.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Number of model clusters.
    #[arg(long, value_parser = positive)]
    pub clusters: Option<usize>,
    /// Optional X CSV adding each model's mean score to the table.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnoseSettings {
    pub threshold: f64,
    pub clusters: usize,
}

impl Default for DiagnoseSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_MASTERY_THRESHOLD,
            clusters: 3,
        }
    }
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let mut s: DiagnoseSettings = load_settings(args.config.as_deref())?;
    s.threshold = args.threshold.unwrap_or(s.threshold);
    s.clusters = args.clusters.unwrap_or(s.clusters);
    if !(0.0..=1.0).contains(&s.threshold) {
        return Err(Error::InvalidConfig(format!("threshold must lie in [0, 1], got {}", s.threshold)));
    }

    let mut manifest = RunManifest::start("diagnose", &s, None);
    if let Some(c) = &args.config {
        manifest.add_input(c)?;
    }
    let m = crate::mcf::io::load_mastery_json(&args.mastery)?;
    manifest.add_input(&args.mastery)?;
    let mut counts = concept_counts(&m, s.threshold);
    if let Some(x) = &args.responses {
        let r = ResponseMatrix::load_csv(x, None)?;
        manifest.add_input(x)?;
        counts = counts.with_responses(&r);
    }

    create_out(&args.out)?;
    let table = counts.render_table();
    write_text(&args.out.join("counts.txt"), &table)?;
    write_text(&args.out.join("counts.csv"), &counts.to_csv_string())?;
    crate::mcf::io::write_json(&counts, &args.out.join("counts.json"))?;
    let grid = HeatmapGrid::from_mastery(&m)?;
    grid.to_labeled().write_csv(&args.out.join("heatmap.csv"), "model_id")?;
    write_text(&args.out.join("heatmap.svg"), &grid.to_svg())?;

    if m.n_models() < 2 {
        let note = format!("clustering skipped: {} model(s)", m.n_models());
        eprintln!("notice: {note}");
        manifest.notes.push(note);
    } else {
        let clusters = cluster_models(&m, s.clusters.min(m.n_models()))?;
        if s.clusters > m.n_models() {
            manifest
                .notes
                .push(format!("requested {} clusters for {} models", s.clusters, m.n_models()));
        }
        manifest.notes.extend(clusters.warnings.iter().cloned());
        crate::mcf::io::write_json(&clusters, &args.out.join("clusters.json"))?;
    }
    print!("{table}");
    manifest.finish(&args.out)
}

// --------------------------------------------------------------- agreement

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// CSV with a unit column followed by one column per coder;
    /// multi-label cells separate labels with `;`.
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub distance: Option<Distance>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementSettings {
    pub distance: Distance,
}

pub fn cmd_agreement(args: &AgreementArgs) -> Result<()> {
    let mut s: AgreementSettings = load_settings(args.config.as_deref())?;
    s.distance = args.distance.unwrap_or(s.distance);
    let mut manifest = RunManifest::start("agreement", &s, None);
    if let Some(c) = &args.config {
        manifest.add_input(c)?;
    }
    let (_, units) = read_annotations_csv(&args.annotations)?;
    manifest.add_input(&args.annotations)?;
    let report = krippendorff_alpha(&units, s.distance)?;
    create_out(&args.out)?;
    crate::mcf::io::write_json(&report, &args.out.join("agreement.json"))?;
    println!(
        "alpha {:.6} ({} units, {} coders, {} distance)",
        report.krippendorff_alpha, report.n_units, report.n_coders, report.distance
    );
    manifest.finish(&args.out)
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inputs: MatrixInputs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated latent skill counts.
    #[arg(long, value_delimiter = ',')]
    pub skill_grid: Option<Vec<usize>>,
    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    /// TOML file: `starts`, `skill_grid`, `beta_grid`, `binarize_threshold` and a `[solver]` table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub starts: usize,
    pub skill_grid: Vec<usize>,
    pub beta_grid: Vec<f64>,
    pub binarize_threshold: f64,
    pub solver: McfConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            starts: 1,
            skill_grid: DEFAULT_SKILL_GRID.to_vec(),
            beta_grid: vec![1.0],
            binarize_threshold: DEFAULT_BINARIZE_THRESHOLD,
            solver: McfConfig::default(),
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut s: SweepSettings = load_settings(args.config.as_deref())?;
    args.solver.apply(&mut s.solver);
    s.starts = args.solver.starts.unwrap_or(s.starts);
    s.binarize_threshold = args.solver.binarize_threshold.unwrap_or(s.binarize_threshold);
    if let Some(g) = &args.skill_grid {
        s.skill_grid = g.clone();
    }
    if let Some(g) = &args.beta_grid {
        s.beta_grid = g.clone();
    }
    if s.skill_grid.is_empty() || s.beta_grid.is_empty() || s.skill_grid.contains(&0) {
        return Err(Error::InvalidConfig("sweep grids must be non-empty with skill counts >= 1".into()));
    }
    s.solver.validate()?;

    let mut manifest = RunManifest::start("sweep", &s, Some(s.solver.seed));
    if let Some(c) = &args.config {
        manifest.add_input(c)?;
    }
    let data = args.inputs.load(&mut manifest)?;
    let r = &data.responses;
    let obs = Observations::new(r.x.view(), r.w.view(), data.q.values.view())?;
    let rows = sweep(&obs, &s.solver, &s.skill_grid, &s.beta_grid, s.starts, s.binarize_threshold)?;
    create_out(&args.out)?;
    let csv = sweep_csv(&rows);
    write_text(&args.out.join("sweep.csv"), &csv)?;
    print!("{csv}");
    manifest.finish(&args.out)
}

// --------------------------------------------------------------------- run

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Grade(a) => cmd_grade(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Agreement(a) => cmd_agreement(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 success, 1 runtime failure, 2 usage or input error.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
