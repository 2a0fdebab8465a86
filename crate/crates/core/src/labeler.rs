//! Automatic frame-level labels from a class-versus-rest Fisher discriminant.
//!
//! For each class A, every frame of every class-A video forms `V_A` and all
//! remaining frames form `V_B`. The regularized Fisher direction
//! `w ∝ (S_W + lambda * tr(S_W)/d * I)^-1 (mu_A - mu_B)` is computed from the
//! within-class scatter, and each frame of a class-A video is scored by the
//! norm of its component orthogonal to `w`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::{FeatureSequence, Manifest};
use crate::error::{Error, Result};

pub const DEFAULT_SHRINKAGE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// Norm of the feature's component orthogonal to the discriminant.
    #[default]
    Residual,
    /// Absolute projection onto the discriminant.
    Projection,
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residual" => Ok(ScoreMode::Residual),
            "projection" => Ok(ScoreMode::Projection),
            other => Err(Error::Config(format!(
                "score_mode must be residual|projection, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMode::Residual => "residual",
            ScoreMode::Projection => "projection",
        })
    }
}

/// Frames of one class (rows of `target`) against all other frames (`rest`).
#[derive(Debug, Clone)]
pub struct ClassMatrices {
    pub class_label: String,
    pub target: DMatrix<f64>,
    pub rest: DMatrix<f64>,
}

impl ClassMatrices {
    pub fn new(
        class_label: impl Into<String>,
        target: DMatrix<f64>,
        rest: DMatrix<f64>,
    ) -> Result<Self> {
        let class_label = class_label.into();
        if target.ncols() != rest.ncols() || target.ncols() == 0 {
            return Err(Error::Data(format!(
                "class {class_label}: dimension mismatch {} vs {}",
                target.ncols(),
                rest.ncols()
            )));
        }
        if target.nrows() < 2 || rest.nrows() < 2 {
            return Err(Error::InsufficientData(format!(
                "class {class_label}: need >= 2 frames on each side, have {} and {}",
                target.nrows(),
                rest.nrows()
            )));
        }
        Ok(Self {
            class_label,
            target,
            rest,
        })
    }

    pub fn dim(&self) -> usize {
        self.target.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminant {
    pub class_label: String,
    /// Unit-norm direction; its first non-negligible component is positive.
    pub w: Vec<f64>,
    /// Shrinkage weight actually used.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub video_id: String,
    pub values: Vec<f64>,
    pub normalized: bool,
}

fn stack(rows: Vec<&[f32]>, dim: usize) -> DMatrix<f64> {
    DMatrix::from_row_iterator(
        rows.len(),
        dim,
        rows.into_iter()
            .flat_map(|r| r.iter().map(|&v| f64::from(v))),
    )
}

/// Stack target-class frames and rest-of-classes frames, in manifest order.
///
/// `features` runs parallel to `manifest.entries()`.
pub fn assemble_class_matrices(
    manifest: &Manifest,
    features: &[FeatureSequence],
    target_class: &str,
) -> Result<ClassMatrices> {
    if features.len() != manifest.len() {
        return Err(Error::Data(format!(
            "{} feature sequences for {} manifest entries",
            features.len(),
            manifest.len()
        )));
    }
    if !manifest
        .entries()
        .iter()
        .any(|r| r.class_label == target_class)
    {
        return Err(Error::Class(target_class.to_string()));
    }
    let dim = features.first().map_or(0, FeatureSequence::dim);
    if let Some((r, f)) = manifest
        .entries()
        .iter()
        .zip(features)
        .find(|(_, f)| f.dim() != dim)
    {
        return Err(Error::Data(format!(
            "{} has dimension {}, expected {dim}",
            r.video_id,
            f.dim()
        )));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (rec, seq) in manifest.entries().iter().zip(features) {
        let side = if rec.class_label == target_class {
            &mut a
        } else {
            &mut b
        };
        side.extend(seq.rows());
    }
    ClassMatrices::new(target_class, stack(a, dim), stack(b, dim))
}

fn mean_and_scatter(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let scatter = centered.tr_mul(&centered);
    (mean, scatter)
}

/// Flip `w` so its first component with magnitude above 1e-12 is positive.
pub fn canonical_sign(w: &mut [f64]) {
    if let Some(&lead) = w.iter().find(|v| v.abs() > 1e-12) {
        if lead < 0.0 {
            w.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

pub fn lda_direction(cm: &ClassMatrices, lambda: f64) -> Result<Discriminant> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!(
            "shrinkage must be finite and >= 0, got {lambda}"
        )));
    }
    if cm
        .target
        .iter()
        .chain(cm.rest.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::Data(format!(
            "class {}: non-finite features",
            cm.class_label
        )));
    }
    let d = cm.dim();
    let (mu_a, s_a) = mean_and_scatter(&cm.target);
    let (mu_b, s_b) = mean_and_scatter(&cm.rest);
    let within = s_a + s_b;
    let diff = mu_a - mu_b;

    let trace = within.trace();
    let ridge = if trace > 0.0 {
        lambda * trace / d as f64
    } else {
        lambda
    };
    let mut system = within;
    for i in 0..d {
        system[(i, i)] += ridge;
    }

    let degenerate = || {
        Error::Degenerate(format!(
            "class {}: discriminant direction undefined (identical class means or singular scatter)",
            cm.class_label
        ))
    };
    let raw = match system.clone().cholesky() {
        Some(ch) => ch.solve(&diff),
        None => system.lu().solve(&diff).ok_or_else(degenerate)?,
    };
    let norm = raw.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(degenerate());
    }
    let mut w: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    canonical_sign(&mut w);
    Ok(Discriminant {
        class_label: cm.class_label.clone(),
        w,
        lambda,
    })
}

pub fn frame_score(disc: &Discriminant, frame: &[f64], mode: ScoreMode) -> Result<f64> {
    if frame.len() != disc.w.len() {
        return Err(Error::Data(format!(
            "frame has dimension {}, discriminant has {}",
            frame.len(),
            disc.w.len()
        )));
    }
    let proj: f64 = disc.w.iter().zip(frame).map(|(w, f)| w * f).sum();
    Ok(match mode {
        ScoreMode::Projection => proj.abs(),
        ScoreMode::Residual => disc
            .w
            .iter()
            .zip(frame)
            .map(|(w, f)| (f - w * proj).powi(2))
            .sum::<f64>()
            .sqrt(),
    })
}

/// Min-max map to [0, 1]; a constant series maps to 0.5 everywhere.
pub fn normalize_scores(s: &ScoreSeries) -> Result<ScoreSeries> {
    if s.values.is_empty() {
        return Err(Error::Data(format!("{}: empty score series", s.video_id)));
    }
    if s.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("{}: non-finite score", s.video_id)));
    }
    let lo = s.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let values = if hi > lo {
        s.values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.5; s.values.len()]
    };
    Ok(ScoreSeries {
        video_id: s.video_id.clone(),
        values,
        normalized: true,
    })
}

pub fn score_video(
    disc: &Discriminant,
    video_id: &str,
    seq: &FeatureSequence,
    mode: ScoreMode,
) -> Result<ScoreSeries> {
    let values = (0..seq.frames())
        .map(|i| frame_score(disc, &seq.row_f64(i), mode))
        .collect::<Result<_>>()?;
    Ok(ScoreSeries {
        video_id: video_id.to_string(),
        values,
        normalized: false,
    })
}

#[derive(Debug, Clone)]
pub struct Labeling {
    pub discriminants: Vec<Discriminant>,
    pub scores: BTreeMap<String, ScoreSeries>,
}

/// One discriminant per class; each class's videos scored against it and
/// normalized per video. Classes run in parallel on the current rayon pool.
pub fn label_dataset(
    manifest: &Manifest,
    features: &[FeatureSequence],
    lambda: f64,
    mode: ScoreMode,
) -> Result<Labeling> {
    let classes = manifest.class_set();
    let per_class: Vec<(Discriminant, Vec<ScoreSeries>)> = classes
        .par_iter()
        .map(|class| {
            let cm = assemble_class_matrices(manifest, features, class)?;
            let disc = lda_direction(&cm, lambda)?;
            let series = manifest
                .entries()
                .iter()
                .zip(features)
                .filter(|(r, _)| &r.class_label == class)
                .map(|(r, seq)| normalize_scores(&score_video(&disc, &r.video_id, seq, mode)?))
                .collect::<Result<Vec<_>>>()?;
            Ok((disc, series))
        })
        .collect::<Result<_>>()?;

    let mut discriminants = Vec::with_capacity(per_class.len());
    let mut scores = BTreeMap::new();
    for (disc, series) in per_class {
        discriminants.push(disc);
        for s in series {
            scores.insert(s.video_id.clone(), s);
        }
    }
    Ok(Labeling {
        discriminants,
        scores,
    })
}
