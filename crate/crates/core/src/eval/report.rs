use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::io::load_png;

use super::{psnr, ssim};

/// JSON has no infinity; non-finite values are written as strings.
pub(crate) mod lossless_f64 {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// One metric value and what it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    #[serde(with = "lossless_f64")]
    pub value: f64,
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageScore {
    pub name: String,
    #[serde(with = "lossless_f64")]
    pub psnr: f64,
    /// `None` when the image is smaller than the SSIM window.
    pub ssim: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub images: Vec<ImageScore>,
    #[serde(with = "lossless_f64")]
    pub mean_psnr: f64,
    pub mean_ssim: Option<f64>,
}

impl MetricSummary {
    pub fn from_scores(images: Vec<ImageScore>) -> Self {
        let n = images.len().max(1) as f64;
        let mean_psnr = images.iter().map(|s| s.psnr).sum::<f64>() / n;
        let mean_ssim = images
            .iter()
            .map(|s| s.ssim)
            .collect::<Option<Vec<f64>>>()
            .filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64);
        Self {
            images,
            mean_psnr,
            mean_ssim,
        }
    }

    /// Flattened `{metric, value, inputs}` records, per image then aggregates.
    pub fn records(&self, rendered: &Path, reference: &Path) -> Vec<MetricRecord> {
        let mut out = Vec::new();
        for s in &self.images {
            let inputs = vec![
                rendered.join(&s.name).display().to_string(),
                reference.join(&s.name).display().to_string(),
            ];
            out.push(MetricRecord {
                metric: "psnr".into(),
                value: s.psnr,
                inputs: inputs.clone(),
            });
            if let Some(v) = s.ssim {
                out.push(MetricRecord {
                    metric: "ssim".into(),
                    value: v,
                    inputs,
                });
            }
        }
        let dirs = vec![rendered.display().to_string(), reference.display().to_string()];
        out.push(MetricRecord {
            metric: "mean_psnr".into(),
            value: self.mean_psnr,
            inputs: dirs.clone(),
        });
        if let Some(v) = self.mean_ssim {
            out.push(MetricRecord {
                metric: "mean_ssim".into(),
                value: v,
                inputs: dirs,
            });
        }
        out
    }
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
            let path = entry.map_err(|e| Error::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Scores every PNG under `reference` against the file at the same relative
/// path under `rendered`.
pub fn compare_directories(rendered: &Path, reference: &Path) -> Result<MetricSummary> {
    let refs = png_files(reference)?;
    if refs.is_empty() {
        return Err(Error::load(reference, "no PNG images found"));
    }
    let mut scores = Vec::with_capacity(refs.len());
    for r in refs {
        let rel = r.strip_prefix(reference).unwrap_or(&r).to_path_buf();
        let candidate = rendered.join(&rel);
        if !candidate.is_file() {
            return Err(Error::load(&candidate, "no rendered image for this reference"));
        }
        let a = load_png(&candidate, [1.0; 3])?;
        let b = load_png(&r, [1.0; 3])?;
        let p = psnr(&a, &b).map_err(|e| Error::load(&candidate, e.to_string()))?;
        let s = ssim(&a, &b).ok();
        scores.push(ImageScore {
            name: rel.display().to_string(),
            psnr: p,
            ssim: s,
        });
    }
    Ok(MetricSummary::from_scores(scores))
}
