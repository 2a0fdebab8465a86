//! One-hidden-layer regression head trained with momentum SGD.
//!
//! `y = W2 · act(W1 x + b1) + b2` with a scalar output and the squared-error
//! loss `(1/n) sum ½ (y - t)^2`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureSequence;
use crate::error::{Error, Result};
use crate::labeler::ScoreSeries;
use crate::rng::Prng;

/// Hidden width of the full-scale head.
pub const FULL_SCALE_HIDDEN_DIM: usize = 1024;
/// Step interval of the full-scale head schedule (lr0 = 1e-2, /10 every 3400).
/// The two-stream fine-tuning stage used lr0 = 1e-3 with a 1600-iteration step.
pub const FULL_SCALE_DECAY_EVERY: usize = 3400;
pub const DEFAULT_HIDDEN_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    // Subgradient of the rectifier at 0 is taken as 0.
    fn slope(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Config(format!(
                "activation must be relu|identity, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    /// Row-major `hidden_dim × input_dim`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// Gradients (or any other quantity) shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradients {
    pub fn zeros_like(m: &MlpModel) -> Self {
        Self {
            w1: vec![0.0; m.w1.len()],
            b1: vec![0.0; m.b1.len()],
            w2: vec![0.0; m.w2.len()],
            b2: 0.0,
        }
    }

    pub fn slices(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, std::slice::from_ref(&self.b2)]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            std::slice::from_mut(&mut self.b2),
        ]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }
}

impl MlpModel {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            activation: Activation::Relu,
            w1: vec![0.0; input_dim * hidden_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; hidden_dim],
            b2: 0.0,
        }
    }

    pub fn num_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn param_slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            std::slice::from_mut(&mut self.b2),
        ]
    }

    /// All parameters in the order W1, b1, W2, b2.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &[self.b2]].concat()
    }

    pub fn set_parameters(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_parameters(), "parameter count");
        let mut rest = flat;
        for dst in self.param_slices_mut() {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        }
    }

    fn validate(&self) -> Result<()> {
        let h = self.hidden_dim;
        if self.input_dim == 0 || h == 0 {
            return Err(Error::Data("model dimensions must be positive".into()));
        }
        if self.w1.len() != h * self.input_dim || self.b1.len() != h || self.w2.len() != h {
            return Err(Error::Data(
                "model parameter shapes inconsistent with d, h".into(),
            ));
        }
        if self.parameters().iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite model parameter".into()));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Data(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn pre_activations(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .chunks_exact(self.input_dim)
            .zip(&self.b1)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn output(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.w2)
            .map(|(&z, w)| w * self.activation.apply(z))
            .sum::<f64>()
            + self.b2
    }
}

/// Glorot-uniform weights from the seeded generator; zero biases.
pub fn init_model(input_dim: usize, hidden_dim: usize, seed: u64) -> Result<MlpModel> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::Config("model dimensions must be positive".into()));
    }
    let mut rng = Prng::new(seed);
    let mut m = MlpModel::zeros(input_dim, hidden_dim);
    let limit1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
    m.w1.iter_mut()
        .for_each(|w| *w = rng.uniform_range(-limit1, limit1));
    let limit2 = (6.0 / (hidden_dim + 1) as f64).sqrt();
    m.w2.iter_mut()
        .for_each(|w| *w = rng.uniform_range(-limit2, limit2));
    Ok(m)
}

pub fn forward(m: &MlpModel, x: &[f64]) -> Result<f64> {
    m.check_input(x)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite input".into()));
    }
    Ok(m.output(&m.pre_activations(x)))
}

/// One training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: f64,
}

/// Mean half-squared error over `batch` and its exact gradient.
pub fn loss_and_grad(m: &MlpModel, batch: &[&Sample]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros_like(m);
    let mut loss = 0.0;
    let mut hidden_grad = vec![0.0; m.hidden_dim];
    for sample in batch {
        let x = &sample.features;
        m.check_input(x)?;
        if !sample.target.is_finite() {
            return Err(Error::Data("non-finite target".into()));
        }
        let z = m.pre_activations(x);
        let err = m.output(&z) - sample.target;
        loss += 0.5 * err * err * scale;

        let dy = err * scale;
        grads.b2 += dy;
        for j in 0..m.hidden_dim {
            grads.w2[j] += dy * m.activation.apply(z[j]);
            hidden_grad[j] = dy * m.w2[j] * m.activation.slope(z[j]);
        }
        for (j, row) in grads.w1.chunks_exact_mut(m.input_dim).enumerate() {
            let g = hidden_grad[j];
            if g != 0.0 {
                row.iter_mut().zip(x).for_each(|(r, v)| *r += g * v);
            }
            grads.b1[j] += g;
        }
    }
    Ok((loss, grads))
}

/// Mean loss over a whole dataset.
pub fn dataset_loss(m: &MlpModel, data: &[Sample]) -> Result<f64> {
    let refs: Vec<&Sample> = data.iter().collect();
    Ok(loss_and_grad(m, &refs)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr0: f64,
    pub decay_factor: f64,
    pub decay_every: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 1e-2,
            decay_factor: 10.0,
            decay_every: 500,
            batch_size: 16,
            momentum: 0.9,
            epochs: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return fail(format!("lr0 must be > 0, got {}", self.lr0));
        }
        if !(self.decay_factor.is_finite() && self.decay_factor > 0.0) {
            return fail(format!(
                "decay_factor must be > 0, got {}",
                self.decay_factor
            ));
        }
        if self.decay_every == 0 {
            return fail("decay_every must be >= 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            ));
        }
        Ok(())
    }

    /// Step-decayed learning rate for (zero-based) iteration `iter`.
    pub fn learning_rate(&self, iter: usize) -> f64 {
        let steps = (iter / self.decay_every) as i32;
        self.lr0 / self.decay_factor.powi(steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_loss: f64,
    /// Mean per-sample loss seen during each epoch.
    pub epoch_losses: Vec<f64>,
    /// Full-dataset loss of the returned model.
    pub final_loss: f64,
    pub iterations: usize,
    /// Learning rate applied at each iteration.
    pub learning_rates: Vec<f64>,
}

/// Mini-batch SGD with momentum: `v <- momentum v - lr g`, `params <- params + v`.
pub fn fit(
    initial: &MlpModel,
    data: &[Sample],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    initial.validate()?;
    if data.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    let mut model = initial.clone();
    let mut velocity = Gradients::zeros_like(&model);
    let mut rng = Prng::new(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let initial_loss = dataset_loss(&model, data)?;

    let mut iter = 0;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut learning_rates = Vec::new();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut epoch_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &data[i]).collect();
            let (loss, grads) = loss_and_grad(&model, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    iteration: iter,
                    loss,
                });
            }
            epoch_sum += loss * batch.len() as f64;

            let lr = cfg.learning_rate(iter);
            learning_rates.push(lr);
            let mut finite = true;
            for ((p, v), g) in model
                .param_slices_mut()
                .into_iter()
                .zip(velocity.slices_mut())
                .zip(grads.slices())
            {
                for ((p, v), g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *v = cfg.momentum * *v - lr * g;
                    *p += *v;
                    finite &= p.is_finite();
                }
            }
            if !finite {
                return Err(Error::Divergence {
                    iteration: iter,
                    loss: f64::INFINITY,
                });
            }
            iter += 1;
        }
        epoch_losses.push(epoch_sum / data.len() as f64);
    }

    let final_loss = dataset_loss(&model, data)?;
    if !final_loss.is_finite() {
        return Err(Error::Divergence {
            iteration: iter,
            loss: final_loss,
        });
    }
    Ok((
        model,
        TrainReport {
            initial_loss,
            epoch_losses,
            final_loss,
            iterations: iter,
            learning_rates,
        },
    ))
}

pub fn predict_video(m: &MlpModel, video_id: &str, seq: &FeatureSequence) -> Result<ScoreSeries> {
    if seq.dim() != m.input_dim {
        return Err(Error::Data(format!(
            "{video_id}: features have dimension {}, model expects {}",
            seq.dim(),
            m.input_dim
        )));
    }
    let values = (0..seq.frames())
        .map(|i| forward(m, &seq.row_f64(i)))
        .collect::<Result<_>>()?;
    Ok(ScoreSeries {
        video_id: video_id.to_string(),
        values,
        normalized: false,
    })
}

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    d: usize,
    h: usize,
    activation: Activation,
    #[serde(rename = "W1")]
    w1: Vec<f64>,
    b1: Vec<f64>,
    #[serde(rename = "W2")]
    w2: Vec<f64>,
    b2: f64,
}

pub fn model_to_json(m: &MlpModel) -> String {
    let file = ModelFile {
        version: MODEL_VERSION,
        d: m.input_dim,
        h: m.hidden_dim,
        activation: m.activation,
        w1: m.w1.clone(),
        b1: m.b1.clone(),
        w2: m.w2.clone(),
        b2: m.b2,
    };
    let mut s = serde_json::to_string(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<MlpModel> {
    let f: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Data(format!("model file: {e}")))?;
    if f.version != MODEL_VERSION {
        return Err(Error::Data(format!(
            "unsupported model version {}",
            f.version
        )));
    }
    let m = MlpModel {
        input_dim: f.d,
        hidden_dim: f.h,
        activation: f.activation,
        w1: f.w1,
        b1: f.b1,
        w2: f.w2,
        b2: f.b2,
    };
    m.validate()?;
    Ok(m)
}

pub fn save_model(m: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(m)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
