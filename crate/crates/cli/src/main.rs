//! `hlsmm` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

mod model_file;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlsmm::data::{self, CsvOptions, DataFormat, DatasetManifest, Normalization, SplitSpec};
use hlsmm::experiments::{self, Grids, NoiseKind, NoiseTarget, Validation};
use hlsmm::model::{heaviside_count, InitialStep};
use hlsmm::par::Execution;
use hlsmm::synthetic::{self, SyntheticSpec};
use hlsmm::{kkt, linalg, solver, Dataset, Hyperparams, ModelState, StepPolicy, ZUpdate};
use serde_json::json;

use model_file::{ModelFile, ModelFileError};

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<hlsmm::Error> for Failure {
    fn from(e: hlsmm::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<ModelFileError> for Failure {
    fn from(e: ModelFileError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "hlsmm",
    version,
    about = "Heaviside-loss support matrix machine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model and write it as JSON.
    Train(TrainArgs),
    /// Print one predicted label (1 or -1) per sample.
    Predict(ModelDataArgs),
    /// Print confusion counts and accuracy as JSON.
    Eval(ModelDataArgs),
    /// Grid search over hyperparameter candidates.
    Sweep(SweepArgs),
    /// Accuracy under injected test-time noise.
    NoiseBench(NoiseArgs),
    /// Accuracy surface over rank and beta.
    Sensitivity(SensitivityArgs),
    /// Fit, then report KKT residuals of the result.
    KktCheck(KktArgs),
    /// Write W as CSV and as a PGM heatmap.
    ExportWeights(ExportArgs),
    /// Write the low-rank synthetic benchmark dataset.
    GenSynthetic(SynthArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Smm1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormalizeArg {
    None,
    PerSample,
    Feature,
}

impl From<NormalizeArg> for Normalization {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::PerSample => Normalization::PerSampleZscore,
            NormalizeArg::Feature => Normalization::FeatureZscore,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Dataset manifest (JSON); replaces the other data flags.
    #[arg(long, conflicts_with_all = ["data", "format"])]
    manifest: Option<PathBuf>,
    /// Dataset file.
    #[arg(long, required_unless_present = "manifest")]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Zero-based CSV column holding the label.
    #[arg(long, default_value_t = 0)]
    label_column: usize,
    /// The CSV file starts with a header row.
    #[arg(long)]
    header: bool,
    /// Zero-pad feature vectors to this length before reshaping.
    #[arg(long)]
    pad_to: Option<usize>,
    /// Reshape each sample row-major to P x Q.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    reshape: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    normalize: NormalizeArg,
    /// Stratified train fraction; commands that fit use the train side and
    /// evaluate on the rest.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, default_value_t = 1)]
    split_seed: u64,
}

struct Loaded {
    raw: Dataset,
    normalization: Normalization,
    split: Option<SplitSpec>,
}

impl DataArgs {
    fn load(&self) -> Result<Loaded, Failure> {
        if let Some(path) = &self.manifest {
            let m = DatasetManifest::from_file(path)?;
            return Ok(Loaded {
                raw: m.load()?,
                normalization: m.normalization,
                split: m.split,
            });
        }
        let path = self.data.as_ref().expect("clap enforces --data");
        let reshape = self.reshape.as_ref().map(|v| (v[0], v[1]));
        let raw = match self.format {
            FormatArg::Csv => data::load_csv(
                path,
                &CsvOptions {
                    label_column: self.label_column,
                    has_header: self.header,
                    pad_to: self.pad_to,
                    reshape,
                },
            )?,
            FormatArg::Smm1 => {
                let d = data::load_smm1(path)?;
                match reshape {
                    Some((p, q)) => data::reshape(&d, p, q, self.pad_to)?,
                    None => d,
                }
            }
        };
        Ok(Loaded {
            raw,
            normalization: self.normalize.into(),
            split: self.split.map(|ratio| SplitSpec {
                ratio,
                stratified: true,
                seed: self.split_seed,
            }),
        })
    }

    fn prepare(&self) -> Result<(data::Prepared, Normalization), Failure> {
        let l = self.load()?;
        Ok((
            data::prepare(l.raw, l.normalization, l.split)?,
            l.normalization,
        ))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ZUpdateArg {
    Exact,
    Paper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    /// W = 0, b = 0, z = 0.
    Zero,
    /// W = 0, b = 0, z = 1.
    Residual,
}

fn parse_step(s: &str) -> Result<StepPolicy, String> {
    let positive = |v: &str| -> Result<f64, String> {
        match v.parse::<f64>() {
            Ok(a) if a > 0.0 && a.is_finite() => Ok(a),
            _ => Err(format!("step size must be a positive number, got {v:?}")),
        }
    };
    let backtracking = |alpha0| StepPolicy::Backtracking {
        alpha0,
        shrink: 0.5,
        max_halvings: 30,
    };
    match s.split_once(':') {
        None if s == "backtracking" => Ok(backtracking(InitialStep::Spectral)),
        Some(("backtracking", "frobenius")) => Ok(backtracking(InitialStep::Frobenius)),
        Some(("backtracking", a)) => Ok(backtracking(InitialStep::Value(positive(a)?))),
        Some(("fixed", a)) => Ok(StepPolicy::Fixed { alpha: positive(a)? }),
        _ => Err(format!(
            "expected backtracking, backtracking:ALPHA, backtracking:frobenius or fixed:ALPHA, got {s:?}"
        )),
    }
}

#[derive(Args, Debug, Clone)]
struct HpArgs {
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Rank bound r, 1 <= r < min(p, q).
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 1e-3)]
    tau1: f64,
    #[arg(long, default_value_t = 1e-3)]
    tau2: f64,
    #[arg(long, default_value_t = 1e-3)]
    tau3: f64,
    #[arg(long, default_value_t = 1000)]
    maxit: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol_step: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_obj: f64,
    /// backtracking | backtracking:ALPHA | backtracking:frobenius | fixed:ALPHA
    #[arg(long, default_value = "backtracking", value_parser = parse_step)]
    step: StepPolicy,
    #[arg(long, value_enum, default_value_t = ZUpdateArg::Exact)]
    z_update: ZUpdateArg,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    init: InitArg,
    #[arg(long, env = "HLSMM_SEED", default_value_t = 1)]
    seed: u64,
}

impl HpArgs {
    fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            beta: self.beta,
            sigma: self.sigma,
            rank: self.rank,
            tau1: self.tau1,
            tau2: self.tau2,
            tau3: self.tau3,
            maxit: self.maxit,
            tol_step: self.tol_step,
            tol_obj: self.tol_obj,
            step_policy: self.step,
            z_update: match self.z_update {
                ZUpdateArg::Exact => ZUpdate::Exact,
                ZUpdateArg::Paper => ZUpdate::Paper,
            },
            seed: self.seed,
        }
    }

    fn initial_state(&self, data: &Dataset) -> ModelState {
        match self.init {
            InitArg::Zero => ModelState::initial(data),
            InitArg::Residual => ModelState::residual_start(data),
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hp: HpArgs,
    /// Model file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence trace CSV to write.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Include wall time in the summary.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct ModelDataArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hp: HpArgs,
    /// Comma-separated candidates; each defaults to the published grid.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 0.5])]
    betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1])]
    sigmas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [4, 10])]
    ranks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2])]
    tau1s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2])]
    tau2s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2])]
    tau3s: Vec<f64>,
    /// Score candidates on the held-out split instead of cross-validating on train.
    #[arg(long)]
    tune_on_test: bool,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Sweep cells run concurrently; 0 uses every core, 1 is sequential.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Results table CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Best-configuration JSON.
    #[arg(long)]
    best: Option<PathBuf>,
    /// Append a wall_time column to the table.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseArg {
    Gaussian,
    SaltPepper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Test,
    Both,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hp: HpArgs,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    kind: NoiseArg,
    #[arg(long, value_delimiter = ',', default_values_t = experiments::GAUSSIAN_LEVELS)]
    levels: Vec<f64>,
    #[arg(long = "seeds", value_delimiter = ',', default_values_t = experiments::DEFAULT_NOISE_SEEDS)]
    noise_seeds: Vec<u64>,
    #[arg(long, value_enum, default_value_t = TargetArg::Test)]
    target: TargetArg,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Per-seed rows CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SensitivityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hp: HpArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    ranks: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KktArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hp: HpArgs,
    /// |z_i| below this counts as zero.
    #[arg(long, default_value_t = 1e-8)]
    zero_tol: f64,
    /// Residual tolerance reported as pass/fail.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Output stem; writes STEM.csv and STEM.pgm.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthFormat {
    Smm1,
    Csv,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    p: usize,
    #[arg(long, default_value_t = 6)]
    q: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0.1)]
    bias: f64,
    #[arg(long, default_value_t = 0.5)]
    min_margin: f64,
    #[arg(long, env = "HLSMM_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SynthFormat::Smm1)]
    format: SynthFormat,
    #[arg(long)]
    out: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn print_json(v: &serde_json::Value) -> CmdResult {
    let text = serde_json::to_string_pretty(v).expect("json value serializes") + "\n";
    emit(None, &text)
}

fn status_str(s: hlsmm::Status) -> &'static str {
    match s {
        hlsmm::Status::Converged => "converged",
        hlsmm::Status::MaxIter => "max_iter",
    }
}

fn cmd_train(a: &TrainArgs) -> CmdResult {
    let (prep, normalization) = a.data.prepare()?;
    let hp = a.hp.hyperparams();
    let init = a.hp.initial_state(&prep.train);
    let res = solver::fit(&prep.train, &hp, Some(init))?;
    let train_metrics = experiments::evaluate(&res.model, &prep.train)?;
    let test_metrics = prep
        .test
        .as_ref()
        .map(|t| experiments::evaluate(&res.model, t))
        .transpose()?;
    if let Some(path) = &a.out {
        ModelFile::new(
            &res.model.w,
            res.model.b,
            &hp,
            normalization,
            prep.scaler.clone(),
            prep.train.name.clone(),
        )
        .save(path)?;
    }
    if let Some(path) = &a.trace {
        experiments::export_convergence_trace(&res.trace, path)?;
    }
    let mut summary = json!({
        "status": status_str(res.trace.status),
        "iterations": res.trace.iterations(),
        "final_objective": res.trace.final_objective(),
        "heaviside_count": heaviside_count(&res.model.z),
        "rank": linalg::numerical_rank(&res.model.w)?,
        "b": res.model.b,
        "train": train_metrics,
        "test": test_metrics,
        "hyperparams": hp,
    });
    if a.timing {
        summary["wall_time"] = json!(res.wall_time);
    }
    print_json(&summary)
}

/// Loads data for a stored model: same split, the model's own preprocessing.
fn model_and_data(
    model: &Path,
    args: &DataArgs,
) -> Result<(ModelFile, hlsmm::linalg::Matrix, Dataset), Failure> {
    let mf = ModelFile::load(model)?;
    let w = mf.weights()?;
    let l = args.load()?;
    let d = match l.split {
        Some(s) => data::split(&l.raw, s.ratio, s.stratified, s.seed)?.1,
        None => l.raw,
    };
    d.check_shape((mf.p, mf.q)).map_err(|_| {
        let (p, q) = d.shape();
        Failure::Data(format!(
            "model expects {}x{} samples but the data is {p}x{q}",
            mf.p, mf.q
        ))
    })?;
    let d = match (&mf.normalization, &mf.scaler) {
        (Normalization::FeatureZscore, Some(s)) => s.apply(&d)?,
        (Normalization::FeatureZscore, None) => {
            return Err(Failure::Data(
                "model lists feature z-score but stores no scaler".into(),
            ))
        }
        (Normalization::PerSampleZscore, _) => data::normalize_per_sample(&d),
        (Normalization::None, _) => d,
    };
    Ok((mf, w, d))
}

fn cmd_predict(a: &ModelDataArgs) -> CmdResult {
    let (mf, w, d) = model_and_data(&a.model, &a.data)?;
    let mut text = String::with_capacity(d.len() * 3);
    for s in d.samples() {
        text.push_str(&hlsmm::model::predict(&w, mf.b, &s.x)?.to_string());
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}

fn cmd_eval(a: &ModelDataArgs) -> CmdResult {
    let (mf, w, d) = model_and_data(&a.model, &a.data)?;
    let m = experiments::evaluate_weights(&w, mf.b, &d)?;
    let mut text = serde_json::to_string_pretty(&m).expect("metrics serialize");
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

fn require_test(prep: &data::Prepared, what: &str) -> Result<Dataset, Failure> {
    prep.test
        .clone()
        .ok_or_else(|| Failure::Usage(format!("{what} needs a held-out set: pass --split RATIO")))
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let (prep, _) = a.data.prepare()?;
    let grids = Grids {
        beta: a.betas.clone(),
        sigma: a.sigmas.clone(),
        rank: a.ranks.clone(),
        tau1: a.tau1s.clone(),
        tau2: a.tau2s.clone(),
        tau3: a.tau3s.clone(),
    };
    let test;
    let validation = if a.tune_on_test {
        test = require_test(&prep, "--tune-on-test")?;
        Validation::Holdout(&test)
    } else {
        Validation::CrossValidation {
            folds: a.folds,
            seed: a.hp.seed,
        }
    };
    let gs = experiments::grid_search(
        &prep.train,
        validation,
        &grids,
        &a.hp.hyperparams(),
        Execution::from_jobs(a.jobs),
    )?;
    let mut table = Vec::new();
    gs.table.write_csv(&mut table, a.timing)?;
    match &a.out {
        Some(p) => fs::write(p, &table)?,
        None => std::io::stdout().lock().write_all(&table)?,
    }
    let mut summary = serde_json::to_value(gs.summary()).expect("summary serializes");
    summary["protocol"] = json!(if a.tune_on_test {
        "tune-on-test".to_string()
    } else {
        gs.protocol.clone()
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match &a.best {
        Some(p) => fs::write(p, text)?,
        None if a.out.is_some() => emit(None, &text)?,
        None => eprint!("{text}"),
    }
    Ok(())
}

fn cmd_noise(a: &NoiseArgs) -> CmdResult {
    let (prep, _) = a.data.prepare()?;
    let test = require_test(&prep, "noise-bench")?;
    let s = experiments::noise_sweep(
        &prep.train,
        &test,
        &a.hp.hyperparams(),
        match a.kind {
            NoiseArg::Gaussian => NoiseKind::Gaussian,
            NoiseArg::SaltPepper => NoiseKind::SaltPepper,
        },
        &a.levels,
        &a.noise_seeds,
        match a.target {
            TargetArg::Test => NoiseTarget::Test,
            TargetArg::Both => NoiseTarget::Both,
        },
        Execution::from_jobs(a.jobs),
    )?;
    if let Some(p) = &a.out {
        s.table.save_csv(p, false)?;
    }
    let rows: Vec<_> = s
        .table
        .rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(o) => json!({"level": r.level, "seed": r.seed, "metrics": o.metrics}),
            Err(e) => json!({"level": r.level, "seed": r.seed, "error": e}),
        })
        .collect();
    print_json(&json!({
        "kind": s.kind,
        "target": s.target,
        "means": s.means,
        "rows": rows,
    }))
}

fn cmd_sensitivity(a: &SensitivityArgs) -> CmdResult {
    let (prep, _) = a.data.prepare()?;
    let test = require_test(&prep, "sensitivity")?;
    let s = experiments::sensitivity_grid(
        &prep.train,
        &test,
        &a.hp.hyperparams(),
        &a.ranks,
        &a.betas,
        Execution::from_jobs(a.jobs),
    )?;
    let mut out = Vec::new();
    s.write_csv(&mut out)?;
    match &a.out {
        Some(p) => fs::write(p, out)?,
        None => std::io::stdout().lock().write_all(&out)?,
    }
    Ok(())
}

fn cmd_kkt(a: &KktArgs) -> CmdResult {
    let (prep, _) = a.data.prepare()?;
    let hp = a.hp.hyperparams();
    let res = solver::fit(&prep.train, &hp, Some(a.hp.initial_state(&prep.train)))?;
    let r = kkt::kkt_report(&res.model, &prep.train, &hp, a.zero_tol)?;
    print_json(&json!({
        "status": status_str(res.trace.status),
        "iterations": res.trace.iterations(),
        "w_residual": r.w_residual,
        "z_residual": r.z_residual,
        "b_residual": r.b_residual,
        "feasibility_residual": r.feasibility_residual,
        "rank_at_solution": r.rank_at_solution,
        "rank_deficient": r.rank_deficient,
        "projection_ambiguous": r.projection_ambiguous,
        "tolerance": a.tol,
        "w_within_tol": r.w_residual <= a.tol,
        "z_within_tol": r.z_residual <= a.tol,
        "b_within_tol": r.b_residual <= a.tol,
    }))
}

fn cmd_export(a: &ExportArgs) -> CmdResult {
    let mf = ModelFile::load(&a.model)?;
    let (csv, pgm) = experiments::export_weight_heatmap(&mf.weights()?, &a.out)?;
    print_json(&json!({"csv": csv, "pgm": pgm}))
}

fn cmd_gen(a: &SynthArgs) -> CmdResult {
    let (d, w_star) = synthetic::generate(&SyntheticSpec {
        p: a.p,
        q: a.q,
        rank: a.rank,
        samples: a.samples,
        bias: a.bias,
        min_margin: a.min_margin,
        seed: a.seed,
    })?;
    match a.format {
        SynthFormat::Smm1 => data::save_smm1(&d, &a.out)?,
        SynthFormat::Csv => {
            let mut text = String::new();
            for s in d.samples() {
                text.push_str(&s.y.as_i8().to_string());
                for v in s.x.transpose().iter() {
                    text.push_str(&format!(",{v:e}"));
                }
                text.push('\n');
            }
            fs::write(&a.out, text)?;
        }
    }
    let (pos, neg) = d.class_counts();
    print_json(&json!({
        "path": a.out,
        "format": match a.format { SynthFormat::Smm1 => DataFormat::Smm1, SynthFormat::Csv => DataFormat::Csv },
        "samples": d.len(),
        "shape": [a.p, a.q],
        "positives": pos,
        "negatives": neg,
        "w_star_rank": linalg::numerical_rank(&w_star)?,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::NoiseBench(a) => cmd_noise(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::KktCheck(a) => cmd_kkt(a),
        Command::ExportWeights(a) => cmd_export(a),
        Command::GenSynthetic(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hlsmm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
