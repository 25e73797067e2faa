//! JSON model container with a checksummed base-64 weight blob.

use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use hlsmm::data::{FeatureScaler, Normalization};
use hlsmm::linalg::Matrix;
use hlsmm::Hyperparams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FORMAT_VERSION: u32 = 1;
pub const WEIGHT_ENCODING: &str = "base64:f64le:row-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBlob {
    pub encoding: String,
    pub data: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub seed: u64,
    pub build: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub p: usize,
    pub q: usize,
    pub rank_bound: usize,
    pub b: f64,
    pub hyperparams_echo: Hyperparams,
    pub w: WeightBlob,
    /// Preprocessing that predict/eval must repeat on new data.
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaler: Option<FeatureScaler>,
    pub provenance: Provenance,
}

#[derive(Debug)]
pub enum ModelFileError {
    Io(std::io::Error),
    Malformed(String),
}

impl std::fmt::Display for ModelFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelFileError::Io(e) => write!(f, "{e}"),
            ModelFileError::Malformed(m) => write!(f, "bad model file: {m}"),
        }
    }
}

pub fn build_id() -> String {
    format!(
        "hlsmm-cli/{}+{}",
        env!("CARGO_PKG_VERSION"),
        option_env!("HLSMM_GIT_REV").unwrap_or("unknown")
    )
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn encode(w: &Matrix) -> WeightBlob {
    let mut raw = Vec::with_capacity(w.len() * 8);
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            raw.extend_from_slice(&w[(i, j)].to_le_bytes());
        }
    }
    WeightBlob {
        encoding: WEIGHT_ENCODING.to_string(),
        data: STANDARD.encode(&raw),
        sha256: hex(&Sha256::digest(&raw)),
    }
}

impl ModelFile {
    pub fn new(
        w: &Matrix,
        b: f64,
        hp: &Hyperparams,
        normalization: Normalization,
        scaler: Option<FeatureScaler>,
        dataset: String,
    ) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            p: w.nrows(),
            q: w.ncols(),
            rank_bound: hp.rank,
            b,
            hyperparams_echo: hp.clone(),
            w: encode(w),
            normalization,
            scaler,
            provenance: Provenance {
                dataset,
                seed: hp.seed,
                build: build_id(),
            },
        }
    }

    /// Decodes `W`, checking the encoding, payload size and digest.
    pub fn weights(&self) -> Result<Matrix, ModelFileError> {
        let bad = |m: String| ModelFileError::Malformed(m);
        if self.w.encoding != WEIGHT_ENCODING {
            return Err(bad(format!(
                "unknown weight encoding {:?}",
                self.w.encoding
            )));
        }
        let raw = STANDARD
            .decode(&self.w.data)
            .map_err(|e| bad(format!("weights are not base-64: {e}")))?;
        if raw.len() != self.p * self.q * 8 {
            return Err(bad(format!(
                "{} weight bytes for a {}x{} model",
                raw.len(),
                self.p,
                self.q
            )));
        }
        let digest = hex(&Sha256::digest(&raw));
        if digest != self.w.sha256 {
            return Err(bad(format!(
                "weight digest {digest} does not match recorded {}",
                self.w.sha256
            )));
        }
        let values: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Matrix::from_row_slice(self.p, self.q, &values))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelFileError> {
        std::fs::write(path, self.to_json()).map_err(ModelFileError::Io)
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path).map_err(ModelFileError::Io)?;
        let m: ModelFile = serde_json::from_str(&text)
            .map_err(|e| ModelFileError::Malformed(format!("{}: {e}", path.display())))?;
        if m.format_version != FORMAT_VERSION {
            return Err(ModelFileError::Malformed(format!(
                "unsupported format_version {}",
                m.format_version
            )));
        }
        m.weights()?;
        Ok(m)
    }
}
