//! Dataset ingestion, reshaping, normalization, splitting and noise injection.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Dataset, Label, MatrixSample};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub label_column: usize,
    pub has_header: bool,
    /// Zero-pad the feature vector to this length before reshaping.
    pub pad_to: Option<usize>,
    /// Row-major reshape of the (padded) feature vector; `1×d` otherwise.
    pub reshape: Option<(usize, usize)>,
}

/// Label encodings accepted in CSV files, tried in this order.
const ENCODINGS: [(f64, f64); 3] = [(1.0, -1.0), (1.0, 0.0), (1.0, 2.0)];

fn ingestion(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn features_to_matrix(
    mut features: Vec<f64>,
    pad_to: Option<usize>,
    reshape: Option<(usize, usize)>,
) -> std::result::Result<Matrix, String> {
    if let Some(n) = pad_to {
        if n < features.len() {
            return Err(format!(
                "cannot pad {} features down to {n}",
                features.len()
            ));
        }
        features.resize(n, 0.0);
    }
    match reshape {
        Some((p, q)) if p * q != features.len() => Err(format!(
            "reshape {p}x{q} needs {} features, row has {}",
            p * q,
            features.len()
        )),
        Some((p, q)) => Ok(Matrix::from_row_slice(p, q, &features)),
        None => Ok(Matrix::from_row_slice(1, features.len(), &features)),
    }
}

/// Reads a comma-separated file with one sample per row.
///
/// Labels may be encoded as `{−1, 1}`, `{0, 1}` (0 → −1) or `{1, 2}` (2 → −1);
/// the first encoding consistent with every row wins.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ingestion(path, 0, e.to_string()))?;

    let mut rows: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    let mut width = None;
    let mut feasible = [true; 3];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ingestion(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(ingestion(
                    path,
                    line,
                    format!("row has {} fields, expected {w}", record.len()),
                ))
            }
            _ => {}
        }
        if opts.label_column >= record.len() {
            return Err(ingestion(
                path,
                line,
                format!("label column {} out of range", opts.label_column),
            ));
        }
        let mut label = 0.0;
        let mut features = Vec::with_capacity(record.len() - 1);
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                ingestion(
                    path,
                    line,
                    format!("field {} is not a number: {field:?}", j + 1),
                )
            })?;
            if !value.is_finite() {
                return Err(ingestion(
                    path,
                    line,
                    format!("field {} is not finite", j + 1),
                ));
            }
            if j == opts.label_column {
                label = value;
            } else {
                features.push(value);
            }
        }
        for (k, &(pos, neg)) in ENCODINGS.iter().enumerate() {
            feasible[k] &= label == pos || label == neg;
        }
        if !feasible.iter().any(|&f| f) {
            return Err(ingestion(
                path,
                line,
                format!("label {label} does not fit the {{-1,1}}, {{0,1}} or {{1,2}} encodings"),
            ));
        }
        rows.push((line, label, features));
    }
    if rows.is_empty() {
        return Err(ingestion(path, 0, "no data rows"));
    }
    let encoding = ENCODINGS[feasible.iter().position(|&f| f).expect("checked above")];

    let mut samples = Vec::with_capacity(rows.len());
    for (line, label, features) in rows {
        let x = features_to_matrix(features, opts.pad_to, opts.reshape)
            .map_err(|reason| ingestion(path, line, reason))?;
        let y = if label == encoding.0 {
            Label::Pos
        } else {
            Label::Neg
        };
        samples.push(MatrixSample { x, y });
    }
    let name = path
        .file_stem()
        .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
    let mut provenance = format!("csv:{}", path.display());
    if let Some(n) = opts.pad_to {
        provenance.push_str(&format!("; pad_to({n})"));
    }
    if let Some((p, q)) = opts.reshape {
        provenance.push_str(&format!("; reshape({p}x{q})"));
    }
    Dataset::new(samples, name, provenance)
}

/// Reshapes every sample row-major to `p×q`, zero-padding first when `pad_to` is set.
pub fn reshape(data: &Dataset, p: usize, q: usize, pad_to: Option<usize>) -> Result<Dataset> {
    let samples = data
        .samples()
        .iter()
        .map(|s| {
            let flat: Vec<f64> = s.x.transpose().iter().copied().collect();
            features_to_matrix(flat, pad_to, Some((p, q)))
                .map(|x| MatrixSample { x, y: s.y })
                .map_err(Error::InvalidArgument)
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_samples(samples, &format!("reshape({p}x{q})"))
}

const SMM1_MAGIC: &[u8; 4] = b"SMM1";
const SMM1_VERSION: u32 = 1;
const SMM1_HEADER: usize = 4 + 4 + 24;

/// Writes the little-endian SMM1 container: magic, version, `m`, `p`, `q`,
/// `m` label bytes, then `m·p·q` f64 values sample-major and row-major.
pub fn save_smm1(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_smm1(data, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_smm1<W: Write>(data: &Dataset, out: &mut W) -> Result<()> {
    let (p, q) = data.shape();
    out.write_all(SMM1_MAGIC)?;
    out.write_all(&SMM1_VERSION.to_le_bytes())?;
    for n in [data.len(), p, q] {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    for s in data.samples() {
        out.write_all(&s.y.as_i8().to_le_bytes())?;
    }
    for s in data.samples() {
        for i in 0..p {
            for j in 0..q {
                out.write_all(&s.x[(i, j)].to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn load_smm1(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let name = path
        .file_stem()
        .map_or_else(|| "smm1".to_string(), |s| s.to_string_lossy().into_owned());
    parse_smm1(&bytes, name, format!("smm1:{}", path.display()))
}

pub fn parse_smm1(bytes: &[u8], name: String, provenance: String) -> Result<Dataset> {
    if bytes.len() < SMM1_HEADER {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != SMM1_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SMM1_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (m, p, q) = (read_u64(8), read_u64(16), read_u64(24));
    if m == 0 {
        return Err(Error::Format("file holds no samples".into()));
    }
    if p == 0 || q == 0 {
        return Err(Error::Format(format!("empty sample shape {p}x{q}")));
    }
    let expected = m
        .checked_mul(p)
        .and_then(|n| n.checked_mul(q))
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(m))
        .and_then(|n| n.checked_add(SMM1_HEADER as u64))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if bytes.len() as u64 != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for m={m}, p={p}, q={q}, found {}",
            bytes.len()
        )));
    }
    let (m, p, q) = (m as usize, p as usize, q as usize);
    let labels = &bytes[SMM1_HEADER..SMM1_HEADER + m];
    let mut at = SMM1_HEADER + m;
    let mut samples = Vec::with_capacity(m);
    for (i, &raw) in labels.iter().enumerate() {
        let y = Label::from_i8(raw as i8)
            .ok_or_else(|| Error::Format(format!("label {} of sample {i}", raw as i8)))?;
        let mut x = Matrix::zeros(p, q);
        for r in 0..p {
            for c in 0..q {
                x[(r, c)] = f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
                at += 8;
            }
        }
        samples.push(MatrixSample::new(x, y)?);
    }
    Dataset::new(samples, name, provenance)
}

fn mean_and_std(x: &Matrix) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scales every sample to zero mean and unit population standard deviation.
/// Constant samples become all zeros.
pub fn normalize_per_sample(data: &Dataset) -> Dataset {
    let samples = data
        .samples()
        .iter()
        .map(|s| {
            let (mean, std) = mean_and_std(&s.x);
            let x = if std > 0.0 {
                s.x.map(|v| (v - mean) / std)
            } else {
                Matrix::zeros(s.x.nrows(), s.x.ncols())
            };
            MatrixSample { x, y: s.y }
        })
        .collect();
    data.with_samples(samples, "normalize_per_sample")
        .expect("shape and count unchanged")
}

/// Entry-wise z-score with statistics taken from a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub mean: Vec<f64>,
    /// Row-major; zero marks a constant entry, which maps to 0.
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(train: &Dataset) -> Self {
        let (p, q) = train.shape();
        let n = train.len() as f64;
        let mut mean = vec![0.0; p * q];
        let mut std = vec![0.0; p * q];
        for s in train.samples() {
            for i in 0..p {
                for j in 0..q {
                    mean[i * q + j] += s.x[(i, j)] / n;
                }
            }
        }
        for s in train.samples() {
            for i in 0..p {
                for j in 0..q {
                    std[i * q + j] += (s.x[(i, j)] - mean[i * q + j]).powi(2) / n;
                }
            }
        }
        std.iter_mut().for_each(|v| *v = v.sqrt());
        FeatureScaler {
            rows: p,
            cols: q,
            mean,
            std,
        }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        data.check_shape((self.rows, self.cols))?;
        let q = self.cols;
        let samples = data
            .samples()
            .iter()
            .map(|s| MatrixSample {
                x: Matrix::from_fn(self.rows, q, |i, j| {
                    let k = i * q + j;
                    if self.std[k] > 0.0 {
                        (s.x[(i, j)] - self.mean[k]) / self.std[k]
                    } else {
                        0.0
                    }
                }),
                y: s.y,
            })
            .collect();
        data.with_samples(samples, "feature_zscore")
    }
}

/// Deterministic train/test partition. Both sides keep the input order.
///
/// Stratified mode shuffles each class separately (positives first) and
/// assigns `round(ratio·n_class)` of each to training.
pub fn split(
    data: &Dataset,
    ratio: f64,
    stratified: bool,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid_arg(format!(
            "split ratio {ratio} outside (0, 1)"
        )));
    }
    let mut rng = rng::seeded(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        data.check_trainable()?;
        [Label::Pos, Label::Neg]
            .iter()
            .map(|&c| {
                (0..data.len())
                    .filter(|&i| data.samples()[i].y == c)
                    .collect()
            })
            .collect()
    } else {
        vec![(0..data.len()).collect()]
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let n = (ratio * group.len() as f64).round() as usize;
        train.extend_from_slice(&group[..n]);
        test.extend_from_slice(&group[n..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid_arg(format!(
            "ratio {ratio} leaves an empty side for {} samples",
            data.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    let tag = format!("split(ratio={ratio}, stratified={stratified}, seed={seed})");
    let mut tr = data.subset(&train, format!("{}-train", data.name))?;
    let mut te = data.subset(&test, format!("{}-test", data.name))?;
    tr.provenance = format!("{}; {tag} train", data.provenance);
    te.provenance = format!("{}; {tag} test", data.provenance);
    Ok((tr, te))
}

/// Adds `N(0, (level·s)²)` to every entry, where `s` is the sample's entry
/// standard deviation.
pub fn add_gaussian_noise(data: &Dataset, level: f64, seed: u64) -> Result<Dataset> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::invalid_arg(format!(
            "noise level {level} must be >= 0"
        )));
    }
    if level == 0.0 {
        return Ok(data.clone());
    }
    let mut rng = rng::seeded(seed);
    let samples = data
        .samples()
        .iter()
        .map(|s| {
            let (_, std) = mean_and_std(&s.x);
            let scale = level * std;
            let mut x = s.x.clone();
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    let e: f64 = rng.sample(StandardNormal);
                    x[(i, j)] += scale * e;
                }
            }
            MatrixSample { x, y: s.y }
        })
        .collect();
    data.with_samples(
        samples,
        &format!("gaussian_noise(level={level}, seed={seed})"),
    )
}

/// Replaces `round(level·n)` entries per sample, chosen without replacement,
/// by the sample's min or max (probability ½ each).
pub fn add_salt_pepper_noise(data: &Dataset, level: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::invalid_arg(format!(
            "salt-and-pepper level {level} outside [0, 1]"
        )));
    }
    if level == 0.0 {
        return Ok(data.clone());
    }
    let mut rng = rng::seeded(seed);
    let samples = data
        .samples()
        .iter()
        .map(|s| {
            let (p, q) = s.x.shape();
            let n = p * q;
            let count = ((level * n as f64).round() as usize).min(n);
            let (lo, hi) = (s.x.min(), s.x.max());
            let mut x = s.x.clone();
            for k in index::sample(&mut rng, n, count) {
                x[(k / q, k % q)] = if rng.random_bool(0.5) { hi } else { lo };
            }
            MatrixSample { x, y: s.y }
        })
        .collect();
    data.with_samples(
        samples,
        &format!("salt_pepper_noise(level={level}, seed={seed})"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Smm1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    PerSampleZscore,
    /// Entry-wise z-score fit on the training split.
    FeatureZscore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorShape {
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeSpec {
    Matrix([usize; 2]),
    Vector(VectorShape),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratio: f64,
    pub stratified: bool,
    pub seed: u64,
}

/// JSON description of a dataset and its preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: DataFormat,
    pub path: PathBuf,
    pub shape: ShapeSpec,
    #[serde(default)]
    pub reshape: Option<[usize; 2]>,
    #[serde(default)]
    pub pad_to: Option<usize>,
    #[serde(default)]
    pub label_column: usize,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub split: Option<SplitSpec>,
}

/// Train/test pair after the manifest's preprocessing.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub scaler: Option<FeatureScaler>,
}

impl DatasetManifest {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| ingestion(path, e.line(), format!("manifest: {e}")))?;
        if manifest.path.is_relative() {
            if let Some(dir) = path.parent() {
                manifest.path = dir.join(&manifest.path);
            }
        }
        Ok(manifest)
    }

    /// Loads the raw dataset (reshaped, not normalized or split).
    pub fn load(&self) -> Result<Dataset> {
        let data = match self.format {
            DataFormat::Csv => load_csv(
                &self.path,
                &CsvOptions {
                    label_column: self.label_column,
                    has_header: self.has_header,
                    pad_to: self.pad_to,
                    reshape: self.reshape.map(|[p, q]| (p, q)),
                },
            )?,
            DataFormat::Smm1 => {
                let d = load_smm1(&self.path)?;
                match self.reshape {
                    Some([p, q]) => reshape(&d, p, q, self.pad_to)?,
                    None => d,
                }
            }
        };
        if let ShapeSpec::Matrix([p, q]) = self.shape {
            data.check_shape((p, q))?;
        }
        Ok(data)
    }

    pub fn prepare(&self) -> Result<Prepared> {
        prepare(self.load()?, self.normalization, self.split)
    }
}

/// Split, then normalize (feature statistics come from the training side).
pub fn prepare(
    data: Dataset,
    normalization: Normalization,
    split_spec: Option<SplitSpec>,
) -> Result<Prepared> {
    let (train, test) = match split_spec {
        Some(s) => {
            let (a, b) = split(&data, s.ratio, s.stratified, s.seed)?;
            (a, Some(b))
        }
        None => (data, None),
    };
    Ok(match normalization {
        Normalization::None => Prepared {
            train,
            test,
            scaler: None,
        },
        Normalization::PerSampleZscore => Prepared {
            train: normalize_per_sample(&train),
            test: test.as_ref().map(normalize_per_sample),
            scaler: None,
        },
        Normalization::FeatureZscore => {
            let scaler = FeatureScaler::fit(&train);
            Prepared {
                train: scaler.apply(&train)?,
                test: test.map(|t| scaler.apply(&t)).transpose()?,
                scaler: Some(scaler),
            }
        }
    })
}
