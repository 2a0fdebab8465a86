//! Stage orchestration behind the `kfd` CLI.
//!
//! The in-memory stage functions here are what the commands call after
//! loading their inputs; tests and the C API drive them directly.

pub mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{FeatureSequence, Manifest};
use crate::error::{Error, Result};
use crate::labeler::{label_dataset, Labeling};
use crate::regressor::{fit, init_model, predict_video, MlpModel, Sample, TrainReport};
use crate::rng::derive_seed;
use crate::selector::{select_keyframes, KeyframeSet, MIN_FRAMES};
use crate::smoother::{fit_spline, select_alpha, SplineFit};

pub use config::PipelineConfig;

pub type Labels = BTreeMap<String, Vec<f64>>;
pub type Detections = BTreeMap<String, KeyframeSet>;

const INIT_STREAM: u64 = 0x1417;

/// Run `f` on a rayon pool capped by `KFD_THREADS` (default 1).
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match std::env::var("KFD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Error::Config(format!("KFD_THREADS must be a positive integer, got {v:?}"))
            })?,
        Err(_) => 1,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn label(
    manifest: &Manifest,
    features: &[FeatureSequence],
    cfg: &PipelineConfig,
) -> Result<Labeling> {
    label_dataset(manifest, features, cfg.lambda, cfg.score_mode)
}

pub fn labels_from(labeling: &Labeling) -> Labels {
    labeling
        .scores
        .iter()
        .map(|(id, s)| (id.clone(), s.values.clone()))
        .collect()
}

/// One sample per frame of every manifest video, in manifest order.
pub fn training_samples(
    manifest: &Manifest,
    features: &[FeatureSequence],
    labels: &Labels,
) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    for (rec, seq) in manifest.entries().iter().zip(features) {
        let targets = labels
            .get(&rec.video_id)
            .ok_or_else(|| Error::Data(format!("no labels for video {:?}", rec.video_id)))?;
        if targets.len() != seq.frames() {
            return Err(Error::Data(format!(
                "{}: {} labels for {} frames",
                rec.video_id,
                targets.len(),
                seq.frames()
            )));
        }
        samples.extend(targets.iter().enumerate().map(|(i, &t)| Sample {
            features: seq.row_f64(i),
            target: t,
        }));
    }
    Ok(samples)
}

pub fn train(
    manifest: &Manifest,
    features: &[FeatureSequence],
    labels: &Labels,
    cfg: &PipelineConfig,
) -> Result<(MlpModel, TrainReport)> {
    let samples = training_samples(manifest, features, labels)?;
    let dim = features
        .first()
        .map(FeatureSequence::dim)
        .ok_or_else(|| Error::Data("empty training manifest".into()))?;
    let mut model = init_model(dim, cfg.hidden_dim, derive_seed(cfg.seed, INIT_STREAM))?;
    model.activation = cfg.activation;
    fit(&model, &samples, &cfg.train)
}

/// Everything computed for one video during detection.
#[derive(Debug, Clone)]
pub struct VideoDetection {
    pub raw: Vec<f64>,
    pub fit: SplineFit,
    pub keyframes: KeyframeSet,
}

/// Smooth a score series with the frame-count-dependent weight and pick its
/// extrema.
pub fn detect_from_scores(
    video_id: &str,
    raw: Vec<f64>,
    cfg: &PipelineConfig,
) -> Result<VideoDetection> {
    if raw.len() < MIN_FRAMES {
        return Err(Error::TooShort {
            len: raw.len(),
            min: MIN_FRAMES,
        });
    }
    let fit = fit_spline(&raw, select_alpha(raw.len(), &cfg.smoother))?;
    let keyframes = select_keyframes(video_id, &fit, cfg.selector_mode)?;
    Ok(VideoDetection {
        raw,
        fit,
        keyframes,
    })
}

pub fn detect_video(
    model: &MlpModel,
    video_id: &str,
    seq: &FeatureSequence,
    cfg: &PipelineConfig,
) -> Result<VideoDetection> {
    let raw = predict_video(model, video_id, seq)?.values;
    detect_from_scores(video_id, raw, cfg)
}

#[derive(Debug, Clone, Default)]
pub struct DetectOutcome {
    pub videos: BTreeMap<String, VideoDetection>,
    /// Videos too short for extrema detection, with their frame counts.
    pub skipped: Vec<(String, usize)>,
}

impl DetectOutcome {
    pub fn detections(&self) -> Detections {
        self.videos
            .iter()
            .map(|(id, v)| (id.clone(), v.keyframes.clone()))
            .collect()
    }
}

/// Run detection on every manifest video; videos per pool thread.
pub fn detect(
    manifest: &Manifest,
    features: &[FeatureSequence],
    model: &MlpModel,
    cfg: &PipelineConfig,
) -> Result<DetectOutcome> {
    if let Some((rec, seq)) = manifest
        .entries()
        .iter()
        .zip(features)
        .find(|(_, f)| f.dim() != model.input_dim)
    {
        return Err(Error::Data(format!(
            "{}: features have dimension {}, model expects {}",
            rec.video_id,
            seq.dim(),
            model.input_dim
        )));
    }
    let results: Vec<(String, Result<VideoDetection>)> = manifest
        .entries()
        .par_iter()
        .zip(features.par_iter())
        .map(|(rec, seq)| {
            (
                rec.video_id.clone(),
                detect_video(model, &rec.video_id, seq, cfg),
            )
        })
        .collect();
    let mut out = DetectOutcome::default();
    for (id, res) in results {
        match res {
            Ok(v) => {
                out.videos.insert(id, v);
            }
            Err(Error::TooShort { len, .. }) => out.skipped.push((id, len)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

pub fn labels_to_json(labels: &Labels) -> String {
    let mut s = serde_json::to_string_pretty(labels).expect("labels serialize");
    s.push('\n');
    s
}

pub fn labels_from_json(text: &str) -> Result<Labels> {
    let labels: Labels =
        serde_json::from_str(text).map_err(|e| Error::Data(format!("labels file: {e}")))?;
    if let Some((id, _)) = labels
        .iter()
        .find(|(_, v)| v.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::Data(format!(
            "labels for {id:?} contain non-finite values"
        )));
    }
    Ok(labels)
}

pub fn detections_to_json(d: &Detections) -> String {
    let mut s = serde_json::to_string_pretty(d).expect("detections serialize");
    s.push('\n');
    s
}

pub fn detections_from_json(text: &str) -> Result<Detections> {
    let mut d: Detections =
        serde_json::from_str(text).map_err(|e| Error::Data(format!("detections file: {e}")))?;
    for (id, set) in d.iter_mut() {
        if set.indices.len() != set.kinds.len() {
            return Err(Error::Data(format!(
                "{id:?}: indices and kinds differ in length"
            )));
        }
        if set.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "{id:?}: indices not strictly increasing"
            )));
        }
        set.video_id = id.clone();
    }
    Ok(d)
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros trimmed.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.8e}");
        let (mant, e) = s.split_once('e').unwrap();
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{e}")
    }
}

/// Curve dump: `frame,raw,fitted,keyframe` where keyframe is 1 (maximum),
/// -1 (minimum) or 0.
pub fn curve_csv(det: &VideoDetection) -> String {
    use crate::selector::ExtremumKind;
    let mut out = String::from("frame,raw,fitted,keyframe\n");
    for (i, (r, f)) in det.raw.iter().zip(det.fit.fitted()).enumerate() {
        let mark = match det.keyframes.kind_at(i) {
            Some(ExtremumKind::Maximum) => 1,
            Some(ExtremumKind::Minimum) => -1,
            None => 0,
        };
        let _ = writeln!(out, "{i},{},{},{mark}", sig9(*r), sig9(*f));
    }
    out
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
