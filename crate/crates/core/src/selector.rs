//! Keyframe selection from interior extrema of a score curve.
//!
//! Runs of equal values are collapsed into plateaus. A plateau whose
//! neighbouring runs are both lower is a maximum (both higher: a minimum),
//! reported at `(first + last) / 2`. Runs touching either end of the series
//! are never reported.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smoother::SplineFit;

pub const MIN_FRAMES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extremum {
    pub index: usize,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectMode {
    #[default]
    Both,
    Maxima,
    Minima,
}

impl SelectMode {
    fn keeps(self, kind: ExtremumKind) -> bool {
        match self {
            SelectMode::Both => true,
            SelectMode::Maxima => kind == ExtremumKind::Maximum,
            SelectMode::Minima => kind == ExtremumKind::Minimum,
        }
    }
}

impl FromStr for SelectMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(SelectMode::Both),
            "maxima" => Ok(SelectMode::Maxima),
            "minima" => Ok(SelectMode::Minima),
            other => Err(Error::Config(format!(
                "selector mode must be both|maxima|minima, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SelectMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectMode::Both => "both",
            SelectMode::Maxima => "maxima",
            SelectMode::Minima => "minima",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyframeSet {
    #[serde(skip)]
    pub video_id: String,
    pub indices: Vec<usize>,
    pub kinds: Vec<ExtremumKind>,
}

impl KeyframeSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn kind_at(&self, frame: usize) -> Option<ExtremumKind> {
        self.indices
            .binary_search(&frame)
            .ok()
            .map(|i| self.kinds[i])
    }
}

pub fn local_extrema(series: &[f64]) -> Result<Vec<Extremum>> {
    if series.len() < MIN_FRAMES {
        return Err(Error::TooShort {
            len: series.len(),
            min: MIN_FRAMES,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in score series".into()));
    }

    // (value, first, last) for each maximal run of equal values.
    let mut runs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &v) in series.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.0 == v => run.2 = i,
            _ => runs.push((v, i, i)),
        }
    }

    let mut out = Vec::new();
    for w in runs.windows(3) {
        let (prev, (v, first, last), next) = (w[0].0, w[1], w[2].0);
        let kind = if v > prev && v > next {
            ExtremumKind::Maximum
        } else if v < prev && v < next {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        out.push(Extremum {
            index: (first + last) / 2,
            kind,
        });
    }
    Ok(out)
}

pub fn select_keyframes(
    video_id: impl Into<String>,
    fit: &SplineFit,
    mode: SelectMode,
) -> Result<KeyframeSet> {
    let (indices, kinds) = local_extrema(fit.fitted())?
        .into_iter()
        .filter(|e| mode.keeps(e.kind))
        .map(|e| (e.index, e.kind))
        .unzip();
    Ok(KeyframeSet {
        video_id: video_id.into(),
        indices,
        kinds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoother::fit_spline;
    use ExtremumKind::*;

    fn pairs(s: &[f64]) -> Vec<(usize, ExtremumKind)> {
        local_extrema(s)
            .unwrap()
            .into_iter()
            .map(|e| (e.index, e.kind))
            .collect()
    }

    #[test]
    fn zigzag() {
        assert_eq!(
            pairs(&[0.0, 1.0, 0.0, 1.0, 0.0]),
            vec![(1, Maximum), (2, Minimum), (3, Maximum)]
        );
    }

    #[test]
    fn monotone_has_none() {
        assert!(pairs(&[0.0, 1.0, 2.0, 3.0, 4.0]).is_empty());
    }

    #[test]
    fn plateau_midpoint() {
        assert_eq!(pairs(&[0.0, 1.0, 1.0, 0.0, 0.0]), vec![(1, Maximum)]);
        assert_eq!(pairs(&[5.0, 2.0, 2.0, 2.0, 2.0, 7.0]), vec![(2, Minimum)]);
    }

    #[test]
    fn plateau_at_edge_not_reported() {
        assert!(pairs(&[3.0, 3.0, 1.0, 0.0, -1.0]).is_empty());
        assert!(pairs(&[0.0, 1.0, 2.0, 2.0, 2.0]).is_empty());
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            local_extrema(&[0.0, 1.0, 0.0, 1.0]),
            Err(Error::TooShort { len: 4, min: 5 })
        ));
    }

    #[test]
    fn constant_curve_yields_nothing() {
        let fit = fit_spline(&[2.0; 9], 0.5).unwrap();
        assert!(select_keyframes("v", &fit, SelectMode::Both)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn maxima_mode_filters() {
        let fit = fit_spline(&[0.0, 1.0, 0.0, 1.0, 0.0], 1.0).unwrap();
        let set = select_keyframes("v", &fit, SelectMode::Maxima).unwrap();
        assert_eq!(set.indices, vec![1, 3]);
        assert!(set.kinds.iter().all(|&k| k == Maximum));
        let set = select_keyframes("v", &fit, SelectMode::Minima).unwrap();
        assert_eq!(set.indices, vec![2]);
    }

    #[test]
    fn mode_parse() {
        assert_eq!("maxima".parse::<SelectMode>().unwrap(), SelectMode::Maxima);
        assert!("max".parse::<SelectMode>().is_err());
    }
}
