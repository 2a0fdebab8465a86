//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected.

use std::path::Path;

use crate::error::{Error, Result};
use crate::labeler::{ScoreMode, DEFAULT_SHRINKAGE};
use crate::regressor::{Activation, TrainConfig, DEFAULT_HIDDEN_DIM};
use crate::selector::SelectMode;
use crate::smoother::SmootherConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub score_mode: ScoreMode,
    pub lambda: f64,
    pub hidden_dim: usize,
    pub activation: Activation,
    pub train: TrainConfig,
    pub smoother: SmootherConfig,
    pub selector_mode: SelectMode,
    /// Seeds model initialization and batch shuffling.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            score_mode: ScoreMode::Residual,
            lambda: DEFAULT_SHRINKAGE,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            activation: Activation::Relu,
            train: TrainConfig::default(),
            smoother: SmootherConfig::default(),
            selector_mode: SelectMode::Both,
            seed: 0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be >= 1".into()));
        }
        self.train.validate()?;
        self.smoother.validate()
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "score_mode" => self.score_mode = value.parse()?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "hidden_dim" => self.hidden_dim = parse_value(key, value)?,
            "activation" => self.activation = value.parse()?,
            "lr0" => self.train.lr0 = parse_value(key, value)?,
            "decay_factor" => self.train.decay_factor = parse_value(key, value)?,
            "decay_every" => self.train.decay_every = parse_value(key, value)?,
            "batch_size" => self.train.batch_size = parse_value(key, value)?,
            "momentum" => self.train.momentum = parse_value(key, value)?,
            "epochs" => self.train.epochs = parse_value(key, value)?,
            "alpha_small" => self.smoother.alpha_small = parse_value(key, value)?,
            "alpha_mid" => self.smoother.alpha_mid = parse_value(key, value)?,
            "alpha_large" => self.smoother.alpha_large = parse_value(key, value)?,
            "threshold_low" => self.smoother.threshold_low = parse_value(key, value)?,
            "threshold_high" => self.smoother.threshold_high = parse_value(key, value)?,
            "selector_mode" => self.selector_mode = value.parse()?,
            "seed" => {
                self.seed = parse_value(key, value)?;
                self.train.seed = self.seed;
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Render as a config file that parses back to `self`.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let s = &self.smoother;
        format!(
            "score_mode = {}\nlambda = {:?}\nhidden_dim = {}\nactivation = {}\n\
             lr0 = {:?}\ndecay_factor = {:?}\ndecay_every = {}\nbatch_size = {}\n\
             momentum = {:?}\nepochs = {}\nalpha_small = {:?}\nalpha_mid = {:?}\n\
             alpha_large = {:?}\nthreshold_low = {}\nthreshold_high = {}\n\
             selector_mode = {}\nseed = {}\n",
            self.score_mode,
            self.lambda,
            self.hidden_dim,
            self.activation,
            t.lr0,
            t.decay_factor,
            t.decay_every,
            t.batch_size,
            t.momentum,
            t.epochs,
            s.alpha_small,
            s.alpha_mid,
            s.alpha_large,
            s.threshold_low,
            s.threshold_high,
            self.selector_mode,
            self.seed,
        )
    }
}
