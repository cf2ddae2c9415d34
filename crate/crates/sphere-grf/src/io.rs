//! Model documents (JSON, schema `aps-v1`), CSV emitters for samples and
//! ratio series, run sidecars, and atomic file writes.

use crate::analysis::RatioSeries;
use crate::covariance::{SpaceTimeCovarianceModel, TemporalCf};
use crate::error::{Error, Result};
use crate::sampler::FieldSample;
use crate::specfun::GegenbauerIndex;
use crate::spectrum::{AngularPowerSpectrum, TailDescriptor};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub const SCHEMA: &str = "aps-v1";

/// `lambda` accepts a number or the word `"infinite"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaField {
    Finite(f64),
    Named(String),
}

/// Tail descriptor as written in a document.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TailField {
    #[serde(rename = "NONE")]
    None,
    #[serde(rename = "POWER")]
    Power {
        gamma: f64,
        #[serde(default)]
        k: f64,
    },
    #[serde(rename = "LOG_ONLY")]
    LogOnly { k: f64 },
    #[serde(rename = "GEOMETRIC")]
    Geometric { r: f64 },
}

/// Temporal characteristic-function entry of a space-time document.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TemporalField {
    #[serde(rename = "GAUSS")]
    Gauss { b: f64 },
    #[serde(rename = "EXP_DECAY")]
    ExpDecay { b: f64 },
    #[serde(rename = "RATIONAL")]
    Rational { b: f64 },
}

impl From<TemporalField> for TemporalCf {
    fn from(t: TemporalField) -> TemporalCf {
        match t {
            TemporalField::Gauss { b } => TemporalCf::Gauss { b },
            TemporalField::ExpDecay { b } => TemporalCf::ExpDecay { b },
            TemporalField::Rational { b } => TemporalCf::Rational { b },
        }
    }
}

impl From<TemporalCf> for TemporalField {
    fn from(t: TemporalCf) -> TemporalField {
        match t {
            TemporalCf::Gauss { b } => TemporalField::Gauss { b },
            TemporalCf::ExpDecay { b } => TemporalField::ExpDecay { b },
            TemporalCf::Rational { b } => TemporalField::Rational { b },
        }
    }
}

/// A model document: the spectrum config, and for space-time models the
/// per-degree temporal kinds and coupling constants. Exactly one of `lambda`
/// and `dimension` names the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u64>,
    pub scale: f64,
    pub head: Vec<f64>,
    pub tail: TailField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<Vec<TemporalField>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_l: Option<Vec<f64>>,
}

impl ModelDocument {
    fn index(&self) -> Result<GegenbauerIndex> {
        match (&self.lambda, self.dimension) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either lambda or dimension, not both".into(),
            )),
            (None, None) => Err(Error::Config("one of lambda or dimension is required".into())),
            (Some(LambdaField::Finite(l)), None) => GegenbauerIndex::finite(*l),
            (Some(LambdaField::Named(w)), None) => {
                if w == "infinite" {
                    Ok(GegenbauerIndex::Infinite)
                } else {
                    Err(Error::Config(format!(
                        "lambda must be a number or \"infinite\", got \"{w}\""
                    )))
                }
            }
            (None, Some(d)) => {
                if d < 2 {
                    return Err(Error::Config(format!(
                        "dimension must be at least 2, got {d}"
                    )));
                }
                GegenbauerIndex::finite((d as f64 - 1.0) / 2.0)
            }
        }
    }

    fn tail_descriptor(&self) -> TailDescriptor {
        match self.tail {
            TailField::None => TailDescriptor::None,
            TailField::Power { gamma, k } => TailDescriptor::Power { gamma, k },
            TailField::LogOnly { k } => TailDescriptor::LogOnly { k },
            TailField::Geometric { r } => TailDescriptor::Geometric { r },
        }
    }

    /// The document's spectrum, validated and normalized.
    pub fn spectrum(&self) -> Result<AngularPowerSpectrum> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema \"{}\", expected \"{SCHEMA}\"",
                self.schema
            )));
        }
        AngularPowerSpectrum::new(
            self.index()?,
            self.scale,
            self.head.clone(),
            self.tail_descriptor(),
            self.tail_scale,
        )?
        .normalize()
    }

    /// The document's space-time model; requires a `temporal` array.
    pub fn spacetime(&self) -> Result<SpaceTimeCovarianceModel> {
        let temporal = self
            .temporal
            .as_ref()
            .ok_or_else(|| Error::Config("this model has no temporal part".into()))?
            .iter()
            .map(|&t| t.into())
            .collect();
        SpaceTimeCovarianceModel::new(
            self.spectrum()?,
            temporal,
            self.c_l.clone().unwrap_or_default(),
        )
    }

    pub fn has_temporal(&self) -> bool {
        self.temporal.as_ref().is_some_and(|t| !t.is_empty())
    }

    /// Document for a spectrum (spatial part only), e.g. after a transform.
    pub fn from_spectrum(spec: &AngularPowerSpectrum) -> ModelDocument {
        let lambda = match spec.lambda() {
            GegenbauerIndex::Finite(l) => LambdaField::Finite(l),
            GegenbauerIndex::Infinite => LambdaField::Named("infinite".into()),
        };
        let tail = match spec.tail() {
            TailDescriptor::None => TailField::None,
            TailDescriptor::Power { gamma, k } => TailField::Power { gamma, k },
            TailDescriptor::LogOnly { k } => TailField::LogOnly { k },
            TailDescriptor::Geometric { r } => TailField::Geometric { r },
        };
        let tail_scale = match spec.tail() {
            TailDescriptor::None => None,
            _ => Some(spec.tail_scale()),
        };
        ModelDocument {
            schema: SCHEMA.into(),
            lambda: Some(lambda),
            dimension: None,
            scale: spec.scale(),
            head: spec.head().to_vec(),
            tail,
            tail_scale,
            temporal: None,
            c_l: None,
        }
    }
}

/// Parse a model document from JSON text.
pub fn parse_model(text: &str) -> Result<ModelDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Read and parse a model document.
pub fn read_model(path: &Path) -> Result<ModelDocument> {
    parse_model(&std::fs::read_to_string(path)?)
}

/// Pretty JSON for a document.
pub fn model_json(doc: &ModelDocument) -> Result<String> {
    Ok(serde_json::to_string_pretty(doc)?)
}

/// SHA-256 of the document's canonical (field-ordered) JSON, hex-encoded.
pub fn model_hash(doc: &ModelDocument) -> Result<String> {
    let canonical = serde_json::to_string(doc)?;
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    Ok(format!("{:x}", h.finalize()))
}

/// Metadata written next to stochastic outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSidecar {
    pub seed: u64,
    pub method: String,
    pub truncation_l: u64,
    pub jitter: f64,
    pub model_hash: String,
}

impl RunSidecar {
    pub fn for_sample(sample: &FieldSample, model_hash: String) -> RunSidecar {
        RunSidecar {
            seed: sample.seed,
            method: sample.method.to_string(),
            truncation_l: sample.truncation_l,
            jitter: sample.jitter_added,
            model_hash,
        }
    }

    pub fn json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// CSV for a sample: `replicate,point_id,value`, with a `time` column when
/// the sample carries a time grid. Floats print in shortest round-trip form.
pub fn sample_csv(sample: &FieldSample) -> String {
    let mut out = String::new();
    match &sample.times {
        None => {
            out.push_str("replicate,point_id,value\n");
            for r in 0..sample.replicates {
                for p in 0..sample.n_points {
                    out.push_str(&format!("{r},{p},{}\n", sample.value(r, p)));
                }
            }
        }
        Some(times) => {
            out.push_str("replicate,point_id,time,value\n");
            for r in 0..sample.replicates {
                for p in 0..sample.n_points {
                    for (j, t) in times.iter().enumerate() {
                        out.push_str(&format!("{r},{p},{t},{}\n", sample.value_at(r, p, j)));
                    }
                }
            }
        }
    }
    out
}

/// CSV for a ratio series: `v,ratio`.
pub fn ratio_csv(rs: &RatioSeries) -> String {
    let mut out = String::from("v,ratio\n");
    for (v, r) in rs.v.iter().zip(&rs.ratios) {
        out.push_str(&format!("{v},{r}\n"));
    }
    out
}

/// Write bytes atomically: a temporary file in the destination directory is
/// fully written, then renamed over the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
