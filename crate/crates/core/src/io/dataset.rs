//! Dataset layout on disk, frame ingestion, and label files.
//!
//! A stored sample set is a directory:
//!
//! ```text
//! <dir>/
//!   meta.json            d, p, m, source description, label presence
//!   labels.csv           one integer per line (only when labeled)
//!   points/point_0000.gmx ...
//! ```
//!
//! Raw image sets enter through a JSON-lines manifest, one set per line:
//! `{"id": "...", "frames": ["a.pgm", ...], "label": 3}` with frame paths
//! resolved relative to the manifest file.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{orthonormalize, GrassmannPoint};
use crate::io::matrix::{load_matrix_gmx, save_matrix_gmx};
use crate::io::netpbm::load_gray_frame;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetMeta {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub sample_count: usize,
    pub source: String,
}

/// A Grassmann sample set with optional ground-truth labels.
#[derive(Debug, Clone)]
pub struct LabeledGrassmannSet {
    pub points: Vec<GrassmannPoint>,
    pub labels: Option<Vec<usize>>,
    pub meta: SetMeta,
}

impl LabeledGrassmannSet {
    pub fn validate(&self) -> Result<()> {
        let m = self.points.len();
        if m != self.meta.sample_count {
            return Err(Error::data(format!(
                "meta says {} samples, found {m}",
                self.meta.sample_count
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != m {
                return Err(Error::data(format!(
                    "{} labels for {m} points",
                    labels.len()
                )));
            }
        }
        for (i, pt) in self.points.iter().enumerate() {
            if pt.ambient_dim() != self.meta.ambient_dim
                || pt.subspace_dim() != self.meta.subspace_dim
            {
                return Err(Error::data(format!(
                    "point {i} has shape ({},{}), meta says ({},{})",
                    pt.ambient_dim(),
                    pt.subspace_dim(),
                    self.meta.ambient_dim,
                    self.meta.subspace_dim
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    ambient_dim: usize,
    subspace_dim: usize,
    sample_count: usize,
    source: String,
    labeled: bool,
}

pub fn save_set(dir: &Path, set: &LabeledGrassmannSet) -> Result<()> {
    set.validate()?;
    let points_dir = dir.join("points");
    fs::create_dir_all(&points_dir)?;
    let meta = MetaFile {
        ambient_dim: set.meta.ambient_dim,
        subspace_dim: set.meta.subspace_dim,
        sample_count: set.meta.sample_count,
        source: set.meta.source.clone(),
        labeled: set.labels.is_some(),
    };
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::data(format!("cannot serialize meta: {e}")))?;
    fs::write(dir.join("meta.json"), meta_json + "\n")?;
    if let Some(labels) = &set.labels {
        save_labels(&dir.join("labels.csv"), labels)?;
    }
    for (i, pt) in set.points.iter().enumerate() {
        save_matrix_gmx(&points_dir.join(format!("point_{i:04}.gmx")), pt.basis())?;
    }
    Ok(())
}

pub fn load_set(dir: &Path) -> Result<LabeledGrassmannSet> {
    let meta_text = fs::read_to_string(dir.join("meta.json"))
        .map_err(|e| Error::data(format!("{}: {e}", dir.join("meta.json").display())))?;
    let meta: MetaFile = serde_json::from_str(&meta_text)
        .map_err(|e| Error::data(format!("malformed meta.json: {e}")))?;

    let mut points = Vec::with_capacity(meta.sample_count);
    for i in 0..meta.sample_count {
        let path = dir.join("points").join(format!("point_{i:04}.gmx"));
        let basis = load_matrix_gmx(&path)?;
        points.push(GrassmannPoint::new(basis)?);
    }
    let labels = if meta.labeled {
        Some(load_labels(&dir.join("labels.csv"))?)
    } else {
        None
    };
    let set = LabeledGrassmannSet {
        points,
        labels,
        meta: SetMeta {
            ambient_dim: meta.ambient_dim,
            subspace_dim: meta.subspace_dim,
            sample_count: meta.sample_count,
            source: meta.source,
        },
    };
    set.validate()?;
    Ok(set)
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for label in labels {
        writeln!(out, "{label}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let file = BufReader::new(
        fs::File::open(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?,
    );
    let mut labels = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        labels.push(trimmed.parse().map_err(|_| {
            Error::data(format!(
                "{}:{}: cannot parse '{trimmed}' as a label",
                path.display(),
                lineno + 1
            ))
        })?);
    }
    if labels.is_empty() {
        return Err(Error::data(format!("{}: no labels", path.display())));
    }
    Ok(labels)
}

/// Options for frame ingestion.
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Standardize the stacked frame matrix to zero mean and unit variance
    /// over the whole set before orthonormalization. On by default; turn
    /// off to preserve the exact column span of the raw frames.
    pub normalize: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { normalize: true }
    }
}

/// Builds a Grassmann point from in-memory grayscale frames: flattens each
/// frame column-major into one column of a d×M matrix, optionally
/// standardizes the set, and orthonormalizes to rank p.
pub fn ingest_frames(
    frames: &[DMatrix<f64>],
    p: usize,
    options: &IngestOptions,
) -> Result<GrassmannPoint> {
    if frames.is_empty() {
        return Err(Error::data("no frames supplied".to_string()));
    }
    let shape = frames[0].shape();
    for (i, f) in frames.iter().enumerate() {
        if f.shape() != shape {
            return Err(Error::data(format!(
                "frame {i} has shape {:?}, expected {:?}",
                f.shape(),
                shape
            )));
        }
    }
    if frames.len() < p {
        return Err(Error::dimension(format!(
            "need at least p = {p} frames, got {}",
            frames.len()
        )));
    }

    let d = shape.0 * shape.1;
    let mut stacked = DMatrix::<f64>::zeros(d, frames.len());
    for (col, frame) in frames.iter().enumerate() {
        // nalgebra stores column-major, so the raw slice is already the
        // column-major flattening.
        for (row, &v) in frame.as_slice().iter().enumerate() {
            stacked[(row, col)] = v;
        }
    }

    if options.normalize {
        let n = (d * frames.len()) as f64;
        let mean = stacked.iter().sum::<f64>() / n;
        let var = stacked.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std < 1e-12 {
            return Err(Error::data(
                "constant image set cannot be normalized".to_string(),
            ));
        }
        stacked.apply(|v| *v = (*v - mean) / std);
    }

    orthonormalize(&stacked, p)
}

/// One line of a frame manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub frames: Vec<String>,
    #[serde(default)]
    pub label: Option<usize>,
}

pub fn read_frame_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = BufReader::new(
        fs::File::open(path).map_err(|e| Error::data(format!("{}: {e}", path.display())))?,
    );
    let mut entries = Vec::new();
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(&line).map_err(|e| {
            Error::data(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        if entry.frames.is_empty() {
            return Err(Error::data(format!(
                "{}:{}: set '{}' has no frames",
                path.display(),
                lineno + 1,
                entry.id
            )));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::data(format!("{}: empty manifest", path.display())));
    }
    Ok(entries)
}

/// Ingests every set listed in a JSON-lines manifest. Labels are attached
/// only when every entry carries one.
pub fn ingest_manifest(
    manifest_path: &Path,
    p: usize,
    options: &IngestOptions,
) -> Result<LabeledGrassmannSet> {
    let entries = read_frame_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut points = Vec::with_capacity(entries.len());
    let mut labels = Vec::new();
    let all_labeled = entries.iter().all(|e| e.label.is_some());
    for entry in &entries {
        let frames: Vec<DMatrix<f64>> = entry
            .frames
            .iter()
            .map(|f| load_gray_frame(&base.join(f)))
            .collect::<Result<_>>()?;
        points.push(ingest_frames(&frames, p, options)?);
        if all_labeled {
            labels.push(entry.label.unwrap());
        }
    }

    let d = points[0].ambient_dim();
    for (i, pt) in points.iter().enumerate() {
        if pt.ambient_dim() != d {
            return Err(Error::data(format!(
                "set '{}' has ambient dimension {}, expected {d}",
                entries[i].id,
                pt.ambient_dim()
            )));
        }
    }

    let meta = SetMeta {
        ambient_dim: d,
        subspace_dim: p,
        sample_count: points.len(),
        source: format!("ingest {}", manifest_path.display()),
    };
    Ok(LabeledGrassmannSet {
        points,
        labels: all_labeled.then_some(labels),
        meta,
    })
}
