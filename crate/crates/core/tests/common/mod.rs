//! Reference implementations used as test oracles. Each one is written from
//! the defining formula and shares no code with the library.

#![allow(dead_code)]

use kfd::regressor::{Activation, MlpModel, Sample};
use kfd::rng::Prng;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let f = a[row][col] / pivot_row[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows[0].len();
    let mut m = vec![0.0; d];
    for r in rows {
        for i in 0..d {
            m[i] += r[i];
        }
    }
    m.iter().map(|v| v / rows.len() as f64).collect()
}

/// Unit Fisher direction from the regularized normal equations, no sign fixing.
pub fn lda_oracle(a: &[Vec<f64>], b: &[Vec<f64>], lambda: f64) -> Vec<f64> {
    let d = a[0].len();
    let (ma, mb) = (mean(a), mean(b));
    let mut sw = vec![vec![0.0; d]; d];
    for (rows, m) in [(a, &ma), (b, &mb)] {
        for r in rows {
            for i in 0..d {
                for j in 0..d {
                    sw[i][j] += (r[i] - m[i]) * (r[j] - m[j]);
                }
            }
        }
    }
    let tr: f64 = (0..d).map(|i| sw[i][i]).sum();
    let ridge = if tr > 0.0 {
        lambda * tr / d as f64
    } else {
        lambda
    };
    for (i, row) in sw.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let rhs: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| x - y).collect();
    let w = dense_solve(sw, rhs);
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter().map(|v| v / n).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Naive extremum scan: for each frame, walk outwards across equal values to
/// find the plateau, then compare with the first differing value on each side.
/// Returns `(index, is_max)`.
pub fn brute_extrema(s: &[f64]) -> Vec<(usize, bool)> {
    let n = s.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let mut lo = i;
        while lo > 0 && s[lo - 1] == s[i] {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < n && s[hi + 1] == s[i] {
            hi += 1;
        }
        if lo == 0 || hi == n - 1 || (lo + hi) / 2 != i {
            continue;
        }
        let (l, r) = (s[lo - 1], s[hi + 1]);
        if l < s[i] && r < s[i] {
            out.push((i, true));
        } else if l > s[i] && r > s[i] {
            out.push((i, false));
        }
    }
    out
}

/// Natural cubic spline through `(i, y[i])`, built from its 4(K-1) polynomial
/// coefficients by a dense solve, then evaluated at `t`.
pub fn natural_cubic_eval(y: &[f64], t: f64) -> f64 {
    let segs = y.len() - 1;
    let n = 4 * segs;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    let mut row = 0;
    // Segment j: c0 + c1 u + c2 u^2 + c3 u^3 with u = t - j.
    for j in 0..segs {
        let c = 4 * j;
        a[row][c] = 1.0;
        b[row] = y[j];
        row += 1;
        a[row][c..c + 4].copy_from_slice(&[1.0, 1.0, 1.0, 1.0]);
        b[row] = y[j + 1];
        row += 1;
    }
    for j in 0..segs - 1 {
        let (c, e) = (4 * j, 4 * (j + 1));
        a[row][c + 1] = 1.0;
        a[row][c + 2] = 2.0;
        a[row][c + 3] = 3.0;
        a[row][e + 1] = -1.0;
        row += 1;
        a[row][c + 2] = 2.0;
        a[row][c + 3] = 6.0;
        a[row][e + 2] = -2.0;
        row += 1;
    }
    a[row][2] = 2.0;
    row += 1;
    let c = 4 * (segs - 1);
    a[row][c + 2] = 2.0;
    a[row][c + 3] = 6.0;
    let coef = dense_solve(a, b);
    let j = (t.floor() as usize).min(segs - 1);
    let u = t - j as f64;
    let c = &coef[4 * j..4 * j + 4];
    c[0] + u * (c[1] + u * (c[2] + u * c[3]))
}

/// Model output written straight from the two-layer formula.
pub fn reference_forward(m: &MlpModel, x: &[f64]) -> f64 {
    let mut y = m.b2;
    for j in 0..m.hidden_dim {
        let z: f64 = m.b1[j]
            + (0..m.input_dim)
                .map(|i| m.w1[j * m.input_dim + i] * x[i])
                .sum::<f64>();
        let h = match m.activation {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        };
        y += m.w2[j] * h;
    }
    y
}

pub fn reference_loss(m: &MlpModel, batch: &[&Sample]) -> f64 {
    batch
        .iter()
        .map(|s| 0.5 * (reference_forward(m, &s.features) - s.target).powi(2))
        .sum::<f64>()
        / batch.len() as f64
}

/// Central differences of `reference_loss` over the flat parameter vector.
pub fn numeric_gradient(m: &MlpModel, batch: &[&Sample], eps: f64) -> Vec<f64> {
    let base = m.parameters();
    let mut probe = m.clone();
    (0..base.len())
        .map(|k| {
            let mut p = base.clone();
            p[k] = base[k] + eps;
            probe.set_parameters(&p);
            let up = reference_loss(&probe, batch);
            p[k] = base[k] - eps;
            probe.set_parameters(&p);
            let down = reference_loss(&probe, batch);
            (up - down) / (2.0 * eps)
        })
        .collect()
}

pub fn random_rows(rng: &mut Prng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.normal() + shift).collect())
        .collect()
}

/// Random series with occasional plateaus (values drawn from a small set).
pub fn random_series(rng: &mut Prng, len: usize) -> Vec<f64> {
    let levels = 2 + rng.below(6);
    if rng.below(2) == 0 {
        (0..len).map(|_| rng.below(levels) as f64).collect()
    } else {
        (0..len).map(|_| rng.normal()).collect()
    }
}

/// Average-rank Spearman correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let ma = ra.iter().sum::<f64>() / ra.len() as f64;
    let mb = rb.iter().sum::<f64>() / rb.len() as f64;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
