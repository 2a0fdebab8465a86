//! Natural cubic smoothing splines on unit-spaced frame indices.
//!
//! `fit_spline(y, p)` minimizes
//! `p * sum_i (y_i - f(i))^2 + (1 - p) * integral f''(t)^2 dt`
//! over natural cubic splines with knots at `0..K`, using the Reinsch
//! formulation: with `lambda = (1 - p) / p`, the interior second derivatives
//! solve the pentadiagonal system `(R + lambda Q'Q) gamma = Q'y` and the
//! fitted values are `y - lambda Q gamma`. For unit spacing `R` is
//! tridiagonal with `2/3` on the diagonal and `1/6` off it, and `Q` is the
//! second-difference operator.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    pub alpha_small: f64,
    pub alpha_mid: f64,
    pub alpha_large: f64,
    /// Clips with fewer frames than this use `alpha_small`.
    pub threshold_low: usize,
    /// Clips with more frames than this use `alpha_large`.
    pub threshold_high: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            alpha_small: 0.8,
            alpha_mid: 0.6,
            alpha_large: 0.1,
            threshold_low: 60,
            threshold_high: 170,
        }
    }
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold_low == 0 || self.threshold_low >= self.threshold_high {
            return Err(Error::Config(format!(
                "need 0 < threshold_low < threshold_high, got {} and {}",
                self.threshold_low, self.threshold_high
            )));
        }
        for (name, a) in [
            ("alpha_small", self.alpha_small),
            ("alpha_mid", self.alpha_mid),
            ("alpha_large", self.alpha_large),
        ] {
            check_weight(a)
                .map_err(|_| Error::Config(format!("{name} must lie in (0, 1], got {a}")))?;
        }
        Ok(())
    }
}

/// Smoothing weight for a clip of `frames` frames.
pub fn select_alpha(frames: usize, cfg: &SmootherConfig) -> f64 {
    if frames < cfg.threshold_low {
        cfg.alpha_small
    } else if frames > cfg.threshold_high {
        cfg.alpha_large
    } else {
        cfg.alpha_mid
    }
}

fn check_weight(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "smoothing weight must lie in (0, 1], got {p}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit {
    fitted: Vec<f64>,
    second_derivs: Vec<f64>,
    p: f64,
}

impl SplineFit {
    pub fn len(&self) -> usize {
        self.fitted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitted.is_empty()
    }

    /// Knot abscissae, in frames.
    pub fn knots(&self) -> impl Iterator<Item = f64> {
        (0..self.fitted.len()).map(|i| i as f64)
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn second_derivs(&self) -> &[f64] {
        &self.second_derivs
    }

    pub fn weight(&self) -> f64 {
        self.p
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let hi = (self.fitted.len() - 1) as f64;
        if !(0.0..=hi).contains(&t) {
            return Err(Error::Range {
                value: t,
                lo: 0.0,
                hi,
            });
        }
        let i = (t.floor() as usize).min(self.fitted.len() - 2);
        Ok((i, t - i as f64))
    }

    /// Value of the spline at `t` in `[0, K-1]`.
    pub fn eval_at(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        let (f0, f1) = (self.fitted[i], self.fitted[i + 1]);
        let (g0, g1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        Ok((1.0 - u) * f0 + u * f1 - u * (1.0 - u) / 6.0 * ((2.0 - u) * g0 + (1.0 + u) * g1))
    }

    /// Second derivative at `t`; linear between knots.
    pub fn second_derivative_at(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        Ok((1.0 - u) * self.second_derivs[i] + u * self.second_derivs[i + 1])
    }
}

/// Solve a symmetric positive-definite pentadiagonal system by banded LDL'.
///
/// `diag[i] = A[i][i]`, `off1[i] = A[i][i+1]`, `off2[i] = A[i][i+2]`.
fn solve_pentadiagonal(diag: &[f64], off1: &[f64], off2: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut di = diag[i];
        if i >= 1 {
            di -= e[i - 1] * e[i - 1] * d[i - 1];
        }
        if i >= 2 {
            di -= f[i - 2] * f[i - 2] * d[i - 2];
        }
        d[i] = di;
        if i + 1 < n {
            let mut a = off1[i];
            if i >= 1 {
                a -= f[i - 1] * e[i - 1] * d[i - 1];
            }
            e[i] = a / di;
        }
        if i + 2 < n {
            f[i] = off2[i] / di;
        }
    }

    let mut z = rhs.to_vec();
    for i in 0..n {
        if i >= 1 {
            z[i] -= e[i - 1] * z[i - 1];
        }
        if i >= 2 {
            z[i] -= f[i - 2] * z[i - 2];
        }
    }
    for i in 0..n {
        z[i] /= d[i];
    }
    for i in (0..n).rev() {
        if i + 1 < n {
            z[i] -= e[i] * z[i + 1];
        }
        if i + 2 < n {
            z[i] -= f[i] * z[i + 2];
        }
    }
    z
}

pub fn fit_spline(y: &[f64], p: f64) -> Result<SplineFit> {
    check_weight(p)?;
    let k = y.len();
    if k < 2 {
        return Err(Error::TooShort { len: k, min: 2 });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in series to smooth".into()));
    }
    if k == 2 {
        return Ok(SplineFit {
            fitted: y.to_vec(),
            second_derivs: vec![0.0; 2],
            p,
        });
    }

    let lambda = (1.0 - p) / p;
    let n = k - 2;
    let diag = vec![2.0 / 3.0 + 6.0 * lambda; n];
    let off1 = vec![1.0 / 6.0 - 4.0 * lambda; n.saturating_sub(1)];
    let off2 = vec![lambda; n.saturating_sub(2)];
    let rhs: Vec<f64> = y.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let interior = solve_pentadiagonal(&diag, &off1, &off2, &rhs);

    let mut gamma = Vec::with_capacity(k);
    gamma.push(0.0);
    gamma.extend(interior);
    gamma.push(0.0);

    let at = |i: isize| -> f64 {
        if i < 0 {
            0.0
        } else {
            gamma.get(i as usize).copied().unwrap_or(0.0)
        }
    };
    let fitted = (0..k)
        .map(|i| {
            let i = i as isize;
            y[i as usize] - lambda * (at(i - 1) - 2.0 * at(i) + at(i + 1))
        })
        .collect();

    Ok(SplineFit {
        fitted,
        second_derivs: gamma,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Prng;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn alpha_schedule() {
        let cfg = SmootherConfig::default();
        assert_eq!(select_alpha(59, &cfg), 0.8);
        assert_eq!(select_alpha(60, &cfg), 0.6);
        assert_eq!(select_alpha(170, &cfg), 0.6);
        assert_eq!(select_alpha(171, &cfg), 0.1);
        assert_eq!(select_alpha(2, &cfg), 0.8);
    }

    #[test]
    fn config_validation() {
        assert!(SmootherConfig::default().validate().is_ok());
        let bad = SmootherConfig {
            threshold_low: 170,
            threshold_high: 60,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SmootherConfig {
            alpha_mid: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn linear_data_reproduced() {
        let y = [0.0, 1.0, 2.0, 3.0, 4.0];
        for p in [0.01, 0.1, 0.6, 1.0] {
            let fit = fit_spline(&y, p).unwrap();
            assert!(max_abs_diff(fit.fitted(), &y) < 1e-8, "p={p}");
        }
    }

    #[test]
    fn p_one_interpolates() {
        let mut rng = Prng::new(5);
        let y: Vec<f64> = (0..37).map(|_| rng.normal()).collect();
        let fit = fit_spline(&y, 1.0).unwrap();
        assert!(max_abs_diff(fit.fitted(), &y) < 1e-8);
    }

    #[test]
    fn two_points_is_a_line() {
        let fit = fit_spline(&[1.0, 3.0], 0.2).unwrap();
        assert_eq!(fit.fitted(), &[1.0, 3.0]);
        assert!((fit.eval_at(0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_points_smooth_toward_line() {
        let fit = fit_spline(&[0.0, 1.0, 0.0], 0.5).unwrap();
        let f = fit.fitted();
        assert!(f[1] < 1.0 && f[1] > 0.0);
        // Symmetric data gives a symmetric fit.
        assert!((f[0] - f[2]).abs() < 1e-12);
    }

    #[test]
    fn constant_preserved() {
        for p in [0.1, 0.5, 1.0] {
            let fit = fit_spline(&[3.5; 12], p).unwrap();
            assert!(max_abs_diff(fit.fitted(), &[3.5; 12]) < 1e-12);
        }
    }

    #[test]
    fn natural_boundary() {
        let mut rng = Prng::new(8);
        let y: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let fit = fit_spline(&y, 0.3).unwrap();
        assert!(fit.second_derivative_at(0.0).unwrap().abs() < 1e-8);
        assert!(fit.second_derivative_at(19.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn eval_matches_knots() {
        let mut rng = Prng::new(2);
        let y: Vec<f64> = (0..15).map(|_| rng.normal()).collect();
        let fit = fit_spline(&y, 0.4).unwrap();
        for (i, &f) in fit.fitted().iter().enumerate() {
            assert_eq!(fit.eval_at(i as f64).unwrap(), f);
        }
    }

    #[test]
    fn eval_midpoint_of_line() {
        let fit = fit_spline(&[2.0, 4.0, 6.0, 8.0], 0.3).unwrap();
        assert!((fit.eval_at(1.5).unwrap() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn eval_out_of_range() {
        let fit = fit_spline(&[0.0, 1.0, 0.0], 0.5).unwrap();
        assert!(matches!(fit.eval_at(-0.1), Err(Error::Range { .. })));
        assert!(matches!(fit.eval_at(2.01), Err(Error::Range { .. })));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            fit_spline(&[0.0, f64::NAN, 1.0], 0.5),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            fit_spline(&[0.0, 1.0, 2.0], 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            fit_spline(&[0.0, 1.0, 2.0], 1.5),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            fit_spline(&[0.0, 1.0, 2.0], f64::NAN),
            Err(Error::Config(_))
        ));
        assert!(fit_spline(&[0.0], 0.5).is_err());
    }

    // Dense oracle: minimize the same objective directly over the fitted
    // values g, using the dense normal equations
    // (I + lambda Q R^-1 Q') g = y solved by Gaussian elimination.
    fn dense_oracle(y: &[f64], p: f64) -> Vec<f64> {
        let k = y.len();
        let n = k - 2;
        let lambda = (1.0 - p) / p;
        let mut q = vec![vec![0.0; n]; k];
        let mut r = vec![vec![0.0; n]; n];
        for j in 0..n {
            q[j][j] = 1.0;
            q[j + 1][j] = -2.0;
            q[j + 2][j] = 1.0;
            r[j][j] = 2.0 / 3.0;
            if j + 1 < n {
                r[j][j + 1] = 1.0 / 6.0;
                r[j + 1][j] = 1.0 / 6.0;
            }
        }
        // X = R^-1 Q'
        let qt: Vec<Vec<f64>> = (0..n).map(|j| (0..k).map(|i| q[i][j]).collect()).collect();
        let x = gauss_solve_multi(r, qt);
        let mut a = vec![vec![0.0; k]; k];
        for i in 0..k {
            for l in 0..k {
                let s: f64 = (0..n).map(|j| q[i][j] * x[j][l]).sum();
                a[i][l] = lambda * s + if i == l { 1.0 } else { 0.0 };
            }
        }
        let g = gauss_solve_multi(a, y.iter().map(|&v| vec![v]).collect());
        g.into_iter().map(|row| row[0]).collect()
    }

    fn gauss_solve_multi(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let n = a.len();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap();
            a.swap(c, piv);
            b.swap(c, piv);
            let pivot_row = a[c].clone();
            for r in c + 1..n {
                let m = a[r][c] / pivot_row[c];
                for (x, p) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *x -= m * p;
                }
                for k in 0..b[r].len() {
                    b[r][k] -= m * b[c][k];
                }
            }
        }
        for c in (0..n).rev() {
            for k in 0..b[c].len() {
                let mut s = b[c][k];
                for j in c + 1..n {
                    s -= a[c][j] * b[j][k];
                }
                b[c][k] = s / a[c][c];
            }
        }
        b
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = Prng::new(17);
        for k in [3usize, 4, 5, 9, 30] {
            for p in [0.05, 0.3, 0.8] {
                let y: Vec<f64> = (0..k).map(|_| rng.normal()).collect();
                let fit = fit_spline(&y, p).unwrap();
                let oracle = dense_oracle(&y, p);
                assert!(max_abs_diff(fit.fitted(), &oracle) < 1e-9, "k={k} p={p}");
            }
        }
    }

    #[test]
    fn noisy_sine_recovered() {
        let mut rng = Prng::new(2024);
        let clean: Vec<f64> = (0..200)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 40.0).sin())
            .collect();
        let noisy: Vec<f64> = clean.iter().map(|c| c + 0.05 * rng.normal()).collect();
        let fit = fit_spline(&noisy, 0.1).unwrap();
        let dev = max_abs_diff(fit.fitted(), &clean);
        assert!(dev < 0.05, "max deviation {dev}");
    }
}
