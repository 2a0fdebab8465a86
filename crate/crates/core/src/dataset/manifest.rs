//! JSON manifests listing videos, their class and optional ground truth.
//!
//! Feature paths are relative to the directory holding the manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::features::{read_features, read_header, FeatureSequence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoRecord {
    pub video_id: String,
    pub class_label: String,
    pub feature_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_keyframes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    root: PathBuf,
    entries: Vec<VideoRecord>,
    frames: Vec<usize>,
}

impl Manifest {
    /// Validate `entries` against the feature files under `root`.
    pub fn new(root: impl Into<PathBuf>, entries: Vec<VideoRecord>) -> Result<Self> {
        let root = root.into();
        let mut seen = HashSet::new();
        let mut frames = Vec::with_capacity(entries.len());
        for rec in &entries {
            if rec.video_id.is_empty() {
                return Err(Error::Manifest("empty video_id".into()));
            }
            if !seen.insert(rec.video_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate video_id {:?}",
                    rec.video_id
                )));
            }
            let path = root.join(&rec.feature_path);
            if !path.is_file() {
                return Err(Error::Manifest(format!(
                    "{}: feature_path {} does not resolve",
                    rec.video_id,
                    path.display()
                )));
            }
            let (k, _) = read_header(&path)?;
            validate_ground_truth(rec, k)?;
            frames.push(k);
        }
        Ok(Self {
            root,
            entries,
            frames,
        })
    }

    pub fn entries(&self) -> &[VideoRecord] {
        &self.entries
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frame count of entry `i`, taken from its feature file header.
    pub fn frames(&self, i: usize) -> usize {
        self.frames[i]
    }

    /// Distinct class labels in order of first appearance.
    pub fn class_set(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|r| seen.insert(r.class_label.as_str()))
            .map(|r| r.class_label.clone())
            .collect()
    }

    pub fn get(&self, video_id: &str) -> Option<&VideoRecord> {
        self.entries.iter().find(|r| r.video_id == video_id)
    }

    pub fn feature_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.entries[i].feature_path)
    }

    /// Load every feature file, in manifest order.
    pub fn load_features(&self) -> Result<Vec<FeatureSequence>> {
        (0..self.len())
            .map(|i| read_features(self.feature_path(i)))
            .collect()
    }

    /// Entries whose `video_id` satisfies `keep`, same root.
    pub fn filter(&self, mut keep: impl FnMut(&VideoRecord) -> bool) -> Manifest {
        let (entries, frames) = self
            .entries
            .iter()
            .zip(&self.frames)
            .filter(|(r, _)| keep(r))
            .map(|(r, &k)| (r.clone(), k))
            .unzip();
        Manifest {
            root: self.root.clone(),
            entries,
            frames,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.entries).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn validate_ground_truth(rec: &VideoRecord, k: usize) -> Result<()> {
    if let Some(scores) = &rec.gt_scores {
        if scores.len() != k {
            return Err(Error::Manifest(format!(
                "{}: gt_scores has length {} but the feature file has K={k}",
                rec.video_id,
                scores.len()
            )));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::Manifest(format!(
                "{}: non-finite gt_scores",
                rec.video_id
            )));
        }
    }
    if let Some(kf) = &rec.gt_keyframes {
        if kf.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Manifest(format!(
                "{}: gt_keyframes not strictly increasing",
                rec.video_id
            )));
        }
        if let Some(&last) = kf.last() {
            if last >= k {
                return Err(Error::Manifest(format!(
                    "{}: gt keyframe {last} outside [0, {}]",
                    rec.video_id,
                    k - 1
                )));
            }
        }
    }
    Ok(())
}

pub fn parse_manifest(root: impl Into<PathBuf>, json: &str) -> Result<Manifest> {
    let entries: Vec<VideoRecord> =
        serde_json::from_str(json).map_err(|e| Error::Manifest(e.to_string()))?;
    Manifest::new(root, entries)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let root = if root.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        root
    };
    parse_manifest(root, &text)
}
