//! Deterministic synthetic datasets with planted score curves.
//!
//! Each class `c` owns a mean direction `u_c` and a unit score axis `v_c`,
//! all mutually orthonormal. Class means form a centred simplex,
//! `mu_c = 4.0 * (u_c - mean_k u_k)`, and frame `t` of a video is
//! `mu_c + s(t) * v_c + noise` with
//! `s(t) = |sum_j a_j sin(2 pi f_j t / K + phi_j)|` over three components.
//! Every `v_c` is orthogonal to every class-mean difference. With zero noise
//! the class-vs-rest discriminant is, up to the ridge term, parallel to the
//! class mean, and the frame residual is a monotone function of `s(t)` away
//! from its zeros.
//! When `dim < 2 * num_classes` the means fall back to one shared axis `w0`
//! (`mu_c = c * 4.0 * w0`) with each `v_c` orthogonal to `w0`.
//!
//! Latent curves are redrawn until their extrema are resolvable: none within
//! [`EDGE_MARGIN`] frames of either end, consecutive extrema at least
//! [`MIN_EXTREMUM_GAP`] frames apart and differing by at least
//! [`MIN_EXTREMUM_STEP`].
//!
//! Every video draws from its own stream keyed by (seed, class, index), so a
//! video is identical no matter how many siblings are generated with it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{write_features, FeatureSequence};
use super::manifest::{Manifest, VideoRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Prng};
use crate::selector::local_extrema;

pub const CLASS_SPACING: f64 = 4.0;
pub const EDGE_MARGIN: usize = 3;
pub const MIN_EXTREMUM_GAP: usize = 4;
pub const MIN_EXTREMUM_STEP: f64 = 0.05;
const MAX_CURVE_DRAWS: usize = 256;
const GEOMETRY_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub videos_per_class: usize,
    pub frames_min: usize,
    pub frames_max: usize,
    pub dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            num_classes: 5,
            videos_per_class: 10,
            frames_min: 40,
            frames_max: 200,
            dim: 32,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.num_classes < 2 {
            return fail(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            ));
        }
        if self.videos_per_class < 1 {
            return fail("videos_per_class must be >= 1".into());
        }
        if self.frames_min < 8 {
            return fail(format!(
                "frames_min (K_min) must be >= 8, got {}",
                self.frames_min
            ));
        }
        if self.frames_max < self.frames_min {
            return fail(format!(
                "frames_max ({}) must be >= frames_min ({})",
                self.frames_max, self.frames_min
            ));
        }
        if self.frames_max > u32::MAX as usize {
            return fail("frames_max exceeds u32".into());
        }
        if self.dim < 3 {
            return fail(format!("dim must be >= 3, got {}", self.dim));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            ));
        }
        Ok(())
    }
}

pub fn class_label(c: usize) -> String {
    format!("class_{c:02}")
}

pub fn video_id(c: usize, j: usize) -> String {
    format!("class_{c:02}_v{j:03}")
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shared class geometry derived from the seed and dimension only.
#[derive(Debug, Clone)]
pub struct SynthGeometry {
    pub class_means: Vec<Vec<f64>>,
    pub score_axes: Vec<Vec<f64>>,
}

/// Extend `basis` with random unit vectors until it holds `count` of them.
fn extend_orthonormal(
    rng: &mut Prng,
    dim: usize,
    mut basis: Vec<Vec<f64>>,
    count: usize,
) -> Vec<Vec<f64>> {
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, w)| *x -= p * w);
            }
            normalize(&mut v);
        }
        basis.push(v);
    }
    basis
}

impl SynthGeometry {
    pub fn new(seed: u64, dim: usize, num_classes: usize) -> Self {
        let mut rng = Prng::new(derive_seed(seed, GEOMETRY_STREAM));
        if dim >= 2 * num_classes {
            let mut basis = extend_orthonormal(&mut rng, dim, Vec::new(), 2 * num_classes);
            let score_axes = basis.split_off(num_classes);
            let class_means = (0..num_classes)
                .map(|c| {
                    let mut m = vec![0.0; dim];
                    for (k, u) in basis.iter().enumerate() {
                        let hit = if k == c { 1.0 } else { 0.0 };
                        let coef = CLASS_SPACING * (hit - 1.0 / num_classes as f64);
                        m.iter_mut().zip(u).for_each(|(x, y)| *x += coef * y);
                    }
                    m
                })
                .collect();
            return Self {
                class_means,
                score_axes,
            };
        }
        let w0 = extend_orthonormal(&mut rng, dim, Vec::new(), 1).remove(0);
        let score_axes = (0..num_classes)
            .map(|_| extend_orthonormal(&mut rng, dim, vec![w0.clone()], 2).remove(1))
            .collect();
        let class_means = (0..num_classes)
            .map(|c| w0.iter().map(|w| c as f64 * CLASS_SPACING * w).collect())
            .collect();
        Self {
            class_means,
            score_axes,
        }
    }

    pub fn class_mean(&self, c: usize) -> Vec<f64> {
        self.class_means[c].clone()
    }
}

/// Parameters of one planted curve `|sum_j a_j sin(2 pi f_j t / K + phi_j)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentCurve {
    pub amplitudes: [f64; 3],
    pub frequencies: [u32; 3],
    pub phases: [f64; 3],
}

impl LatentCurve {
    pub fn draw(rng: &mut Prng) -> Self {
        let mut c = LatentCurve {
            amplitudes: [0.0; 3],
            frequencies: [0; 3],
            phases: [0.0; 3],
        };
        for j in 0..3 {
            c.amplitudes[j] = rng.uniform_range(0.5, 1.5);
            c.frequencies[j] = 1 + rng.below(3) as u32;
            c.phases[j] = rng.uniform_range(0.0, 2.0 * std::f64::consts::PI);
        }
        c
    }

    pub fn sample(&self, frames: usize) -> Vec<f64> {
        let k = frames as f64;
        (0..frames)
            .map(|t| {
                let t = t as f64;
                (0..3)
                    .map(|j| {
                        self.amplitudes[j]
                            * (2.0 * std::f64::consts::PI * f64::from(self.frequencies[j]) * t / k
                                + self.phases[j])
                                .sin()
                    })
                    .sum::<f64>()
                    .abs()
            })
            .collect()
    }
}

/// Whether the extrema of a clean curve are well separated from each other
/// and from the ends.
pub fn resolvable(scores: &[f64]) -> bool {
    let Ok(ext) = local_extrema(scores) else {
        return false;
    };
    let k = scores.len();
    ext.iter()
        .all(|e| e.index >= EDGE_MARGIN && e.index + EDGE_MARGIN < k)
        && ext.windows(2).all(|w| {
            w[1].index - w[0].index >= MIN_EXTREMUM_GAP
                && (scores[w[1].index] - scores[w[0].index]).abs() >= MIN_EXTREMUM_STEP
        })
}

/// One generated video before it is written to disk.
#[derive(Debug, Clone)]
pub struct SynthVideo {
    pub class_index: usize,
    pub video_index: usize,
    pub curve: LatentCurve,
    pub scores: Vec<f64>,
    pub features: FeatureSequence,
}

pub fn synth_video(spec: &SynthSpec, geom: &SynthGeometry, c: usize, j: usize) -> SynthVideo {
    let mut rng = Prng::new(derive_seed(derive_seed(spec.seed, c as u64), j as u64));
    let span = (spec.frames_max - spec.frames_min + 1) as u64;
    let frames = spec.frames_min + rng.below(span) as usize;
    let mut curve = LatentCurve::draw(&mut rng);
    let mut scores = curve.sample(frames);
    for _ in 1..MAX_CURVE_DRAWS {
        if resolvable(&scores) {
            break;
        }
        curve = LatentCurve::draw(&mut rng);
        scores = curve.sample(frames);
    }
    let mean = geom.class_mean(c);
    let axis = &geom.score_axes[c];
    let mut data = Vec::with_capacity(frames * spec.dim);
    for &s in &scores {
        for i in 0..spec.dim {
            let noise = rng.normal() * spec.noise_sigma;
            data.push((mean[i] + s * axis[i] + noise) as f32);
        }
    }
    let features =
        FeatureSequence::new(frames, spec.dim, data).expect("generated features are valid");
    SynthVideo {
        class_index: c,
        video_index: j,
        curve,
        scores,
        features,
    }
}

/// Generate every video of `spec` in memory, class-major order.
pub fn synth_videos(spec: &SynthSpec) -> Result<Vec<SynthVideo>> {
    spec.validate()?;
    let geom = SynthGeometry::new(spec.seed, spec.dim, spec.num_classes);
    Ok((0..spec.num_classes)
        .flat_map(|c| (0..spec.videos_per_class).map(move |j| (c, j)))
        .map(|(c, j)| synth_video(spec, &geom, c, j))
        .collect())
}

/// Write one feature file per video under `out_dir/features/` plus
/// `out_dir/manifest.json`.
pub fn generate_synthetic(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    let videos = synth_videos(spec)?;
    let feat_dir = out_dir.join("features");
    std::fs::create_dir_all(&feat_dir).map_err(|e| Error::io(&feat_dir, e))?;
    let mut records = Vec::with_capacity(videos.len());
    for v in &videos {
        let id = video_id(v.class_index, v.video_index);
        let rel = format!("features/{id}.kfdf");
        write_features(&v.features, out_dir.join(&rel))?;
        let keyframes = local_extrema(&v.scores)?
            .into_iter()
            .map(|e| e.index)
            .collect();
        records.push(VideoRecord {
            video_id: id,
            class_label: class_label(v.class_index),
            feature_path: rel,
            gt_scores: Some(v.scores.clone()),
            gt_keyframes: Some(keyframes),
        });
    }
    let manifest = Manifest::new(out_dir, records)?;
    manifest.save(out_dir.join("manifest.json"))?;
    Ok(manifest)
}
