//! Metrics, grid search, noise and sensitivity sweeps, and result exports.
//!
//! Every sweep enumerates its cells up front, runs them through
//! [`par::map_cells`], and assembles tables in enumeration order, so output
//! is identical whatever the execution mode.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{self, Dataset, Hyperparams, Label, ModelState};
use crate::par::{self, Execution};
use crate::rng;
use crate::solver::{self, SolverTrace, Status};

/// Confusion counts with `+1` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn correct(&self) -> usize {
        self.tp + self.tn
    }

    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub counts: Counts,
    /// Percent.
    pub accuracy: f64,
}

impl From<Counts> for Metrics {
    fn from(counts: Counts) -> Self {
        let total = counts.total();
        let accuracy = if total == 0 {
            0.0
        } else {
            100.0 * counts.correct() as f64 / total as f64
        };
        Metrics { counts, accuracy }
    }
}

pub fn evaluate(model: &ModelState, test: &Dataset) -> Result<Metrics> {
    evaluate_weights(&model.w, model.b, test)
}

pub fn evaluate_weights(w: &Matrix, b: f64, test: &Dataset) -> Result<Metrics> {
    test.check_shape(w.shape()).map_err(|e| match e {
        Error::ShapeMismatch { expected, found } => Error::invalid_arg(format!(
            "model is {}x{} but data is {}x{}",
            expected.0, expected.1, found.0, found.1
        )),
        other => other,
    })?;
    let mut c = Counts {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
    };
    for s in test.samples() {
        match (model::predict(w, b, &s.x)?, s.y) {
            (Label::Pos, Label::Pos) => c.tp += 1,
            (Label::Neg, Label::Neg) => c.tn += 1,
            (Label::Pos, Label::Neg) => c.fp += 1,
            (Label::Neg, Label::Pos) => c.fn_ += 1,
        }
    }
    Ok(c.into())
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rank: Vec<usize>,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
    pub tau3: Vec<f64>,
}

impl Grids {
    /// The published candidate sets: 3·2·2·3·3·3 = 324 configurations.
    pub fn paper() -> Self {
        let tau = vec![1e-4, 1e-3, 1e-2];
        Grids {
            beta: vec![0.01, 0.1, 0.5],
            sigma: vec![0.01, 0.1],
            rank: vec![4, 10],
            tau1: tau.clone(),
            tau2: tau.clone(),
            tau3: tau,
        }
    }

    pub fn singleton(hp: &Hyperparams) -> Self {
        Grids {
            beta: vec![hp.beta],
            sigma: vec![hp.sigma],
            rank: vec![hp.rank],
            tau1: vec![hp.tau1],
            tau2: vec![hp.tau2],
            tau3: vec![hp.tau3],
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
            * self.sigma.len()
            * self.rank.len()
            * self.tau1.len()
            * self.tau2.len()
            * self.tau3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product in (β, σ, r, τ₁, τ₂, τ₃) order, last varying fastest.
    /// Fields not on the grid come from `base`.
    pub fn configurations(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.len());
        for &beta in &self.beta {
            for &sigma in &self.sigma {
                for &rank in &self.rank {
                    for &tau1 in &self.tau1 {
                        for &tau2 in &self.tau2 {
                            for &tau3 in &self.tau3 {
                                out.push(Hyperparams {
                                    beta,
                                    sigma,
                                    rank,
                                    tau1,
                                    tau2,
                                    tau3,
                                    ..base.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
}

impl NoiseKind {
    pub fn apply(self, data: &Dataset, level: f64, seed: u64) -> Result<Dataset> {
        match self {
            NoiseKind::Gaussian => data::add_gaussian_noise(data, level, seed),
            NoiseKind::SaltPepper => data::add_salt_pepper_noise(data, level, seed),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt_pepper",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "salt_pepper" | "salt-pepper" => Ok(NoiseKind::SaltPepper),
            _ => Err(Error::invalid_arg(format!("unknown noise kind {s:?}"))),
        }
    }
}

/// A completed cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub metrics: Metrics,
    pub final_objective: f64,
    pub iterations: usize,
    pub status: Status,
    /// Seconds spent in the fit.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub hyperparams: Hyperparams,
    pub noise: Option<NoiseKind>,
    pub level: f64,
    pub seed: u64,
    /// Failures keep their message so no row is dropped.
    pub outcome: std::result::Result<CellOutcome, String>,
}

impl SweepRow {
    pub fn accuracy(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.metrics.accuracy)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

const SWEEP_HEADER: &str = "index,beta,sigma,rank,tau1,tau2,tau3,z_update,step,noise,level,seed,\
tp,tn,fp,fn,accuracy,objective,iterations,status,error";

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Writes one line per row. Wall time is machine-dependent, so it is only
    /// appended as a last column when `with_timing` is set.
    pub fn write_csv<W: Write>(&self, mut out: W, with_timing: bool) -> std::io::Result<()> {
        write!(out, "{SWEEP_HEADER}")?;
        if with_timing {
            write!(out, ",wall_time")?;
        }
        writeln!(out)?;
        for (i, r) in self.rows.iter().enumerate() {
            let hp = &r.hyperparams;
            let z = match hp.z_update {
                model::ZUpdate::Exact => "exact",
                model::ZUpdate::Paper => "paper",
            };
            let noise = r
                .noise
                .map_or_else(|| "none".to_string(), |k| k.to_string());
            write!(
                out,
                "{i},{},{},{},{},{},{},{z},{},{noise},{},{},",
                hp.beta,
                hp.sigma,
                hp.rank,
                hp.tau1,
                hp.tau2,
                hp.tau3,
                hp.step_policy,
                r.level,
                r.seed
            )?;
            match &r.outcome {
                Ok(o) => {
                    let c = o.metrics.counts;
                    let status = match o.status {
                        Status::Converged => "converged",
                        Status::MaxIter => "max_iter",
                    };
                    write!(
                        out,
                        "{},{},{},{},{:.2},{:e},{},{status},",
                        c.tp,
                        c.tn,
                        c.fp,
                        c.fn_,
                        o.metrics.accuracy,
                        o.final_objective,
                        o.iterations
                    )?;
                    if with_timing {
                        write!(out, ",{:.6}", o.wall_time)?;
                    }
                }
                Err(msg) => {
                    write!(out, ",,,,,,,error,{}", csv_escape(msg))?;
                    if with_timing {
                        write!(out, ",")?;
                    }
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, with_timing: bool) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out, with_timing)?;
        out.flush()?;
        Ok(())
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fit_and_score(train: &Dataset, test: &Dataset, hp: &Hyperparams) -> Result<CellOutcome> {
    let fit = solver::fit(train, hp, None)?;
    let metrics = evaluate(&fit.model, test)?;
    Ok(CellOutcome {
        metrics,
        final_objective: fit.trace.final_objective(),
        iterations: fit.trace.iterations(),
        status: fit.trace.status,
        wall_time: fit.wall_time,
    })
}

/// How grid-search candidates are scored.
#[derive(Debug, Clone, Copy)]
pub enum Validation<'a> {
    /// Score on a held-out set. Passing the test split here is the
    /// tune-on-test protocol used for table reproduction.
    Holdout(&'a Dataset),
    /// Stratified k-fold cross-validation on the training set; the reported
    /// counts pool every fold's held-out predictions.
    CrossValidation { folds: usize, seed: u64 },
}

impl Validation<'_> {
    pub fn label(&self) -> String {
        match self {
            Validation::Holdout(_) => "holdout".into(),
            Validation::CrossValidation { folds, .. } => format!("cv{folds}"),
        }
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    use rand::seq::SliceRandom;
    if folds < 2 || folds > data.len() {
        return Err(Error::invalid_arg(format!(
            "{folds} folds for {} samples",
            data.len()
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut assignment = vec![0; data.len()];
    for class in [Label::Pos, Label::Neg] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.samples()[i].y == class)
            .collect();
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

fn cross_validate(
    data: &Dataset,
    hp: &Hyperparams,
    assignment: &[usize],
    folds: usize,
) -> Result<CellOutcome> {
    let mut pooled = Counts {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
    };
    let (mut objective, mut iterations, mut wall_time) = (0.0, 0, 0.0);
    let mut status = Status::Converged;
    for f in 0..folds {
        let tr: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != f).collect();
        let va: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == f).collect();
        let o = fit_and_score(
            &data.subset(&tr, format!("{}-fold{f}-train", data.name))?,
            &data.subset(&va, format!("{}-fold{f}-val", data.name))?,
            hp,
        )?;
        pooled = pooled.add(o.metrics.counts);
        objective += o.final_objective / folds as f64;
        iterations = iterations.max(o.iterations);
        wall_time += o.wall_time;
        if o.status == Status::MaxIter {
            status = Status::MaxIter;
        }
    }
    Ok(CellOutcome {
        metrics: pooled.into(),
        final_objective: objective,
        iterations,
        status,
        wall_time,
    })
}

#[derive(Debug, Clone)]
pub struct GridSearch {
    pub best: Hyperparams,
    /// Row of `table` holding the winner.
    pub best_index: usize,
    pub best_metrics: Metrics,
    pub protocol: String,
    pub table: SweepResult,
}

/// JSON summary of a grid search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSummary {
    pub protocol: String,
    pub configurations: usize,
    pub failures: usize,
    pub best_index: usize,
    pub best: Hyperparams,
    pub best_metrics: Metrics,
}

impl GridSearch {
    pub fn summary(&self) -> GridSummary {
        GridSummary {
            protocol: self.protocol.clone(),
            configurations: self.table.rows.len(),
            failures: self.table.failures(),
            best_index: self.best_index,
            best: self.best.clone(),
            best_metrics: self.best_metrics,
        }
    }
}

/// Tie-break order after accuracy: lower rank, lower β, then (σ, τ₁, τ₂, τ₃).
fn tie_key(hp: &Hyperparams) -> (usize, f64, f64, f64, f64, f64) {
    (hp.rank, hp.beta, hp.sigma, hp.tau1, hp.tau2, hp.tau3)
}

fn better(a: &(usize, &Hyperparams), b: &(usize, &Hyperparams)) -> bool {
    // Correct counts are integers over a fixed validation size, so they tie exactly.
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    tie_key(a.1)
        .partial_cmp(&tie_key(b.1))
        .is_some_and(|o| o.is_lt())
}

/// Exhaustive search over `grids`; every configuration becomes a row, failed
/// ones (including ranks infeasible for the sample shape) carry their error.
pub fn grid_search(
    train: &Dataset,
    validation: Validation<'_>,
    grids: &Grids,
    base: &Hyperparams,
    mode: Execution,
) -> Result<GridSearch> {
    if grids.is_empty() {
        return Err(Error::invalid_arg("every grid needs at least one value"));
    }
    let configs = grids.configurations(base);
    let assignment = match validation {
        Validation::CrossValidation { folds, seed } => Some(stratified_folds(train, folds, seed)?),
        Validation::Holdout(v) => {
            v.check_shape(train.shape())?;
            None
        }
    };
    let outcomes = par::map_cells(&configs, mode, |hp| {
        let r = match (&validation, &assignment) {
            (Validation::Holdout(v), _) => fit_and_score(train, v, hp),
            (Validation::CrossValidation { folds, .. }, Some(a)) => {
                cross_validate(train, hp, a, *folds)
            }
            (Validation::CrossValidation { .. }, None) => unreachable!("folds assigned above"),
        };
        r.map_err(|e| e.to_string())
    });
    let rows: Vec<SweepRow> = configs
        .into_iter()
        .zip(outcomes)
        .map(|(hyperparams, outcome)| SweepRow {
            seed: hyperparams.seed,
            hyperparams,
            noise: None,
            level: 0.0,
            outcome,
        })
        .collect();

    let mut best: Option<(usize, usize)> = None;
    for (i, row) in rows.iter().enumerate() {
        if let Ok(o) = &row.outcome {
            let cand = (o.metrics.counts.correct(), &row.hyperparams);
            let replace = match best {
                None => true,
                Some((j, correct)) => better(&cand, &(correct, &rows[j].hyperparams)),
            };
            if replace {
                best = Some((i, cand.0));
            }
        }
    }
    let (best_index, _) = best.ok_or_else(|| {
        let first = rows
            .iter()
            .find_map(|r| r.outcome.as_ref().err().cloned())
            .unwrap_or_default();
        Error::invalid_arg(format!(
            "every grid configuration failed; first error: {first}"
        ))
    })?;
    let winner = &rows[best_index];
    Ok(GridSearch {
        best: winner.hyperparams.clone(),
        best_index,
        best_metrics: winner
            .outcome
            .as_ref()
            .expect("chosen row succeeded")
            .metrics,
        protocol: validation.label(),
        table: SweepResult { rows },
    })
}

/// Which side of the split the noise is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    /// Fit once on clean training data, corrupt only the test set.
    #[default]
    Test,
    /// Corrupt both sides with the same level and seed, refitting per cell.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMean {
    pub level: f64,
    pub mean_accuracy: f64,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct NoiseSweep {
    pub kind: NoiseKind,
    pub target: NoiseTarget,
    pub table: SweepResult,
    pub means: Vec<LevelMean>,
}

pub const DEFAULT_NOISE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const GAUSSIAN_LEVELS: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];

/// One row per `(level, seed)` in level-major order, plus per-level means.
#[allow(clippy::too_many_arguments)]
pub fn noise_sweep(
    train: &Dataset,
    test: &Dataset,
    hp: &Hyperparams,
    kind: NoiseKind,
    levels: &[f64],
    seeds: &[u64],
    target: NoiseTarget,
    mode: Execution,
) -> Result<NoiseSweep> {
    if levels.is_empty() || seeds.is_empty() {
        return Err(Error::invalid_arg(
            "noise sweep needs at least one level and one seed",
        ));
    }
    if let Some(l) = levels.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid_arg(format!("noise level {l} must be >= 0")));
    }
    let cells: Vec<(f64, u64)> = levels
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();

    let clean_fit = match target {
        NoiseTarget::Test => Some(solver::fit(train, hp, None).map_err(|e| e.to_string())),
        NoiseTarget::Both => None,
    };
    let outcomes = par::map_cells(
        &cells,
        mode,
        |&(level, seed)| -> std::result::Result<_, String> {
            let noisy_test = kind.apply(test, level, seed).map_err(|e| e.to_string())?;
            match &clean_fit {
                Some(fit) => {
                    let fit = fit.as_ref().map_err(Clone::clone)?;
                    Ok(CellOutcome {
                        metrics: evaluate(&fit.model, &noisy_test).map_err(|e| e.to_string())?,
                        final_objective: fit.trace.final_objective(),
                        iterations: fit.trace.iterations(),
                        status: fit.trace.status,
                        wall_time: fit.wall_time,
                    })
                }
                None => {
                    let noisy_train = kind.apply(train, level, seed).map_err(|e| e.to_string())?;
                    fit_and_score(&noisy_train, &noisy_test, hp).map_err(|e| e.to_string())
                }
            }
        },
    );
    let rows: Vec<SweepRow> = cells
        .iter()
        .zip(outcomes)
        .map(|(&(level, seed), outcome)| SweepRow {
            hyperparams: hp.clone(),
            noise: Some(kind),
            level,
            seed,
            outcome,
        })
        .collect();
    let means = levels
        .iter()
        .enumerate()
        .map(|(li, &level)| {
            let block = &rows[li * seeds.len()..(li + 1) * seeds.len()];
            let accs: Vec<f64> = block.iter().filter_map(SweepRow::accuracy).collect();
            LevelMean {
                level,
                mean_accuracy: if accs.is_empty() {
                    f64::NAN
                } else {
                    accs.iter().sum::<f64>() / accs.len() as f64
                },
                completed: accs.len(),
                failed: block.len() - accs.len(),
            }
        })
        .collect();
    Ok(NoiseSweep {
        kind,
        target,
        table: SweepResult { rows },
        means,
    })
}

/// Accuracy surface over `(r, β)` with everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivity {
    pub r_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    /// Row-major: `cells[i * beta_values.len() + j]` is `(r_values[i], beta_values[j])`.
    pub cells: Vec<std::result::Result<Metrics, String>>,
}

impl Sensitivity {
    pub fn cell(&self, i: usize, j: usize) -> &std::result::Result<Metrics, String> {
        &self.cells[i * self.beta_values.len() + j]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank,beta,tp,tn,fp,fn,accuracy,error")?;
        for (i, r) in self.r_values.iter().enumerate() {
            for (j, beta) in self.beta_values.iter().enumerate() {
                match self.cell(i, j) {
                    Ok(m) => {
                        let c = m.counts;
                        writeln!(
                            out,
                            "{r},{beta},{},{},{},{},{:.2},",
                            c.tp, c.tn, c.fp, c.fn_, m.accuracy
                        )?
                    }
                    Err(e) => writeln!(out, "{r},{beta},,,,,,{}", csv_escape(e))?,
                }
            }
        }
        Ok(())
    }
}

pub fn sensitivity_grid(
    train: &Dataset,
    test: &Dataset,
    base: &Hyperparams,
    r_values: &[usize],
    beta_values: &[f64],
    mode: Execution,
) -> Result<Sensitivity> {
    if r_values.is_empty() || beta_values.is_empty() {
        return Err(Error::invalid_arg(
            "sensitivity grid needs at least one r and one beta",
        ));
    }
    let configs: Vec<Hyperparams> = r_values
        .iter()
        .flat_map(|&rank| {
            beta_values.iter().map(move |&beta| Hyperparams {
                rank,
                beta,
                ..base.clone()
            })
        })
        .collect();
    let cells = par::map_cells(&configs, mode, |hp| {
        fit_and_score(train, test, hp)
            .map(|o| o.metrics)
            .map_err(|e| e.to_string())
    });
    Ok(Sensitivity {
        r_values: r_values.to_vec(),
        beta_values: beta_values.to_vec(),
        cells,
    })
}

/// Writes `W` as `<stem>.csv` (17 significant digits, row-major) and as an
/// 8-bit binary PGM `<stem>.pgm` min-max scaled over W's range. A constant
/// `W` renders as uniform 128.
pub fn export_weight_heatmap(w: &Matrix, stem: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let stem = stem.as_ref();
    let csv_path = stem.with_extension("csv");
    let pgm_path = stem.with_extension("pgm");
    let mut out = BufWriter::new(File::create(&csv_path)?);
    write_weight_csv(w, &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(&pgm_path)?);
    out.write_all(&weight_pgm(w))?;
    out.flush()?;
    Ok((csv_path, pgm_path))
}

pub fn write_weight_csv<W: Write>(w: &Matrix, mut out: W) -> std::io::Result<()> {
    for i in 0..w.nrows() {
        let row: Vec<String> = (0..w.ncols())
            .map(|j| format!("{:.16e}", w[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn weight_pixels(w: &Matrix) -> Vec<u8> {
    let (lo, hi) = (w.min(), w.max());
    let mut px = Vec::with_capacity(w.len());
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            px.push(if hi > lo {
                (255.0 * (w[(i, j)] - lo) / (hi - lo)).round() as u8
            } else {
                128
            });
        }
    }
    px
}

pub fn weight_pgm(w: &Matrix) -> Vec<u8> {
    let mut bytes = format!("P5\n{} {}\n255\n", w.ncols(), w.nrows()).into_bytes();
    bytes.extend(weight_pixels(w));
    bytes
}

pub fn export_convergence_trace(trace: &SolverTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
