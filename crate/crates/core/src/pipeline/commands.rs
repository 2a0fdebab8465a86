//! `kfd` subcommands. Each loads and validates every input before it
//! writes anything.

use std::path::{Path, PathBuf};

use crate::dataset::synth::{generate_synthetic, SynthSpec};
use crate::dataset::{load_manifest, Manifest};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, format_report};
use crate::regressor::{load_model, save_model};

use super::{
    curve_csv, detect, detections_from_json, detections_to_json, label, labels_from,
    labels_from_json, labels_to_json, train, with_thread_cap, write_text, PipelineConfig,
};

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Generate a synthetic dataset. With `holdout_per_class > 0`, the last
/// `holdout_per_class` videos of each class go to `test.json` and the rest to
/// `train.json`; `manifest.json` always lists everything.
pub fn cmd_synth(spec: &SynthSpec, holdout_per_class: usize, out_dir: &Path) -> Result<Manifest> {
    let full = SynthSpec {
        videos_per_class: spec.videos_per_class + holdout_per_class,
        ..spec.clone()
    };
    full.validate()?;
    let manifest = generate_synthetic(&full, out_dir)?;
    if holdout_per_class > 0 {
        let split = |train: bool| {
            manifest.filter(|r| {
                let idx: usize = r
                    .video_id
                    .rsplit("_v")
                    .next()
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(0);
                (idx < spec.videos_per_class) == train
            })
        };
        split(true).save(out_dir.join("train.json"))?;
        split(false).save(out_dir.join("test.json"))?;
    }
    println!(
        "wrote {} videos ({} classes) to {}",
        manifest.len(),
        manifest.class_set().len(),
        out_dir.display()
    );
    Ok(manifest)
}

pub fn cmd_label(manifest: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let manifest = load_manifest(manifest)?;
    let features = manifest.load_features()?;
    let labeling = with_thread_cap(|| label(&manifest, &features, &cfg))??;
    write_text(out, &labels_to_json(&labels_from(&labeling)))?;
    println!(
        "labeled {} videos with {} discriminants",
        labeling.scores.len(),
        labeling.discriminants.len()
    );
    Ok(())
}

/// Train report path next to the model: `model.json` -> `model.report.json`.
pub fn report_path(model_out: &Path) -> PathBuf {
    model_out.with_extension("report.json")
}

pub fn cmd_train(
    manifest: &Path,
    labels: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.set("seed", &seed.to_string())?;
    }
    let manifest = load_manifest(manifest)?;
    let labels = labels_from_json(&read_text(labels)?)?;
    let features = manifest.load_features()?;
    let (model, report) = train(&manifest, &features, &labels, &cfg)?;
    save_model(&model, out)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_text(&report_path(out), &text)?;
    println!(
        "trained {} iterations: loss {:.6} -> {:.6}",
        report.iterations, report.initial_loss, report.final_loss
    );
    Ok(())
}

pub fn cmd_detect(
    manifest: &Path,
    model: &Path,
    config: Option<&Path>,
    out: &Path,
    emit_curve: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let manifest = load_manifest(manifest)?;
    let model = load_model(model)?;
    let features = manifest.load_features()?;
    let outcome = with_thread_cap(|| detect(&manifest, &features, &model, &cfg))??;
    for (id, k) in &outcome.skipped {
        eprintln!("skipped {id}: {k} frames (need at least 5)");
    }
    if outcome.videos.is_empty() && !outcome.skipped.is_empty() {
        return Err(Error::TooShort {
            len: outcome.skipped.iter().map(|s| s.1).max().unwrap_or(0),
            min: 5,
        });
    }
    write_text(out, &detections_to_json(&outcome.detections()))?;
    if let Some(dir) = emit_curve {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (id, det) in &outcome.videos {
            write_text(&dir.join(format!("{id}.csv")), &curve_csv(det))?;
        }
    }
    println!(
        "detected keyframes in {} videos ({} skipped)",
        outcome.videos.len(),
        outcome.skipped.len()
    );
    Ok(())
}

/// Text rendering goes next to the JSON report: `report.json` -> `report.txt`.
pub fn text_report_path(out: &Path) -> PathBuf {
    out.with_extension("txt")
}

pub fn cmd_eval(detections: &Path, manifest: &Path, out: &Path) -> Result<()> {
    let manifest = load_manifest(manifest)?;
    let detections = detections_from_json(&read_text(detections)?)?;
    let report = evaluate(&detections, &manifest)?;
    let text = format_report(&report);
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_text(out, &json)?;
    write_text(&text_report_path(out), &text)?;
    print!("{text}");
    Ok(())
}
