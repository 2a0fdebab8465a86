//! Keyframe count and location errors, aggregated per class.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::selector::KeyframeSet;

/// `predicted - ground_truth`.
pub fn number_error(predicted: usize, ground_truth: usize) -> i64 {
    predicted as i64 - ground_truth as i64
}

/// Mean absolute frame offset over order-matched pairs.
///
/// Both lists are sorted; the first `k = min(|P|, |G|)` entries of each are
/// paired in order. Returns `f64::INFINITY` when exactly one list is empty
/// (nothing to pair).
pub fn location_error(predicted: &[usize], ground_truth: &[usize]) -> Result<f64> {
    if predicted.is_empty() && ground_truth.is_empty() {
        return Err(Error::Data(
            "location error of two empty keyframe lists".into(),
        ));
    }
    for (name, list) in [("predicted", predicted), ("ground truth", ground_truth)] {
        if list.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Data(format!("{name} keyframes not sorted")));
        }
    }
    let k = predicted.len().min(ground_truth.len());
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let total: f64 = predicted
        .iter()
        .zip(ground_truth)
        .map(|(&p, &g)| (p as f64 - g as f64).abs())
        .sum();
    Ok(total / k as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMatch {
    pub video_id: String,
    pub class_label: String,
    pub number_error: i64,
    /// `None` when one side had no keyframes to pair.
    pub location_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class_label: String,
    pub videos: usize,
    pub mean_abs_number_error: f64,
    /// Mean over matched videos; `None` if none were matched.
    pub mean_location_error: Option<f64>,
    pub unmatched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallSummary {
    pub mean_abs_number_error: f64,
    pub mean_location_error: Option<f64>,
    pub unmatched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub per_video: Vec<VideoMatch>,
    pub per_class: Vec<ClassSummary>,
    /// Arithmetic mean of the per-class means.
    pub overall: OverallSummary,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Compare detections against the manifest's ground-truth keyframes.
///
/// Videos without a detection entry are skipped. Videos where one side is
/// empty count as unmatched and are left out of the location means; videos
/// where both sides are empty have zero location error.
pub fn evaluate(
    detections: &BTreeMap<String, KeyframeSet>,
    manifest: &Manifest,
) -> Result<MatchReport> {
    for id in detections.keys() {
        let rec = manifest
            .get(id)
            .ok_or_else(|| Error::Data(format!("detection for unknown video {id:?}")))?;
        if rec.gt_keyframes.is_none() {
            return Err(Error::Data(format!(
                "video {id:?} has no ground-truth keyframes"
            )));
        }
    }

    let mut per_video = Vec::new();
    for rec in manifest.entries() {
        let Some(det) = detections.get(&rec.video_id) else {
            continue;
        };
        let gt = rec.gt_keyframes.as_deref().unwrap_or_default();
        let location = if det.indices.is_empty() && gt.is_empty() {
            Some(0.0)
        } else {
            Some(location_error(&det.indices, gt)?).filter(|e| e.is_finite())
        };
        per_video.push(VideoMatch {
            video_id: rec.video_id.clone(),
            class_label: rec.class_label.clone(),
            number_error: number_error(det.indices.len(), gt.len()),
            location_error: location,
        });
    }

    let mut grouped: BTreeMap<&str, Vec<&VideoMatch>> = BTreeMap::new();
    for v in &per_video {
        grouped.entry(&v.class_label).or_default().push(v);
    }
    let per_class: Vec<ClassSummary> = manifest
        .class_set()
        .into_iter()
        .filter_map(|class| {
            let rows = grouped.get(class.as_str())?;
            Some(ClassSummary {
                videos: rows.len(),
                mean_abs_number_error: mean(
                    rows.iter().map(|v| v.number_error.unsigned_abs() as f64),
                )
                .unwrap_or(0.0),
                mean_location_error: mean(rows.iter().filter_map(|v| v.location_error)),
                unmatched: rows.iter().filter(|v| v.location_error.is_none()).count(),
                class_label: class,
            })
        })
        .collect();

    let overall = OverallSummary {
        mean_abs_number_error: mean(per_class.iter().map(|c| c.mean_abs_number_error))
            .unwrap_or(0.0),
        mean_location_error: mean(per_class.iter().filter_map(|c| c.mean_location_error)),
        unmatched: per_class.iter().map(|c| c.unmatched).sum(),
    };
    Ok(MatchReport {
        per_video,
        per_class,
        overall,
    })
}

fn fmt_number(v: f64) -> String {
    format!("±{v:.2}")
}

fn fmt_location(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("±{v:.3}"))
}

/// Fixed-width text table: one row per class plus an "Average accuracy" row.
pub fn format_report(r: &MatchReport) -> String {
    const AVERAGE: &str = "Average accuracy";
    let mut rows: Vec<(String, String, String)> = r
        .per_class
        .iter()
        .map(|c| {
            (
                c.class_label.clone(),
                fmt_number(c.mean_abs_number_error),
                fmt_location(c.mean_location_error),
            )
        })
        .collect();
    rows.push((
        AVERAGE.to_string(),
        fmt_number(r.overall.mean_abs_number_error),
        fmt_location(r.overall.mean_location_error),
    ));

    let width = |f: fn(&(String, String, String)) -> &String| {
        rows.iter()
            .map(|row| f(row).chars().count())
            .max()
            .unwrap_or(0)
    };
    let name_w = width(|r| &r.0);
    let num_w = width(|r| &r.1);
    let loc_w = width(|r| &r.2);

    let mut out = String::from("Average Error in Keyframe (number, position)\n");
    out.push_str(&"-".repeat(name_w + num_w + loc_w + 4));
    out.push('\n');
    for (name, num, loc) in &rows {
        if name == AVERAGE && rows.len() > 1 {
            out.push_str(&"-".repeat(name_w + num_w + loc_w + 4));
            out.push('\n');
        }
        out.push_str(&format!("{name:<name_w$}  {num:>num_w$}  {loc:>loc_w$}\n"));
    }
    if r.overall.unmatched > 0 {
        out.push_str(&format!(
            "unmatched videos (excluded from position means): {}\n",
            r.overall.unmatched
        ));
    }
    out
}
