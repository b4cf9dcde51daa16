//! Reference implementations used as test oracles. They favor obviousness
//! over speed and share no code with the library beyond plain data types.

#![allow(dead_code)]

use annodyn::utility::UtilityParams;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------- percentiles

/// Percentile of a sorted list read off the piecewise-linear curve through
/// the points `(i / (m - 1), v_i)`.
pub fn percentile_oracle(sorted: &[f64], pct: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let t = pct / 100.0;
    for i in 0..m - 1 {
        let x0 = i as f64 / (m - 1) as f64;
        let x1 = (i + 1) as f64 / (m - 1) as f64;
        if t >= x0 && t <= x1 {
            let w = (t - x0) * (m - 1) as f64;
            return sorted[i] * (1.0 - w) + sorted[i + 1] * w;
        }
    }
    sorted[m - 1]
}

pub fn l_estimator_oracle(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (percentile_oracle(&v, 60.0) + percentile_oracle(&v, 75.0) + percentile_oracle(&v, 90.0)) / 3.0
}

// ------------------------------------------------------------------- coverage

pub fn normalize_oracle(raw: &str) -> String {
    let mut words = Vec::new();
    for line in raw.split('\n') {
        let t = line.trim();
        let header = t.chars().count() >= 2 && t.starts_with('[') && t.ends_with(']');
        if !header {
            words.extend(line.split_whitespace());
        }
    }
    words.join(" ")
}

/// `(A, L)` by marking character positions of every non-overlapping
/// left-to-right occurrence of each segment.
pub fn coverage_oracle(raw_lyrics: &str, segments: &[String]) -> (usize, usize) {
    let lyrics: Vec<char> = normalize_oracle(raw_lyrics).chars().collect();
    let l = lyrics.len();
    let mut marked = vec![false; l];
    let mut extra = 0;
    for seg in segments {
        let needle: Vec<char> = normalize_oracle(seg).chars().collect();
        let k = needle.len();
        if k == 0 {
            continue;
        }
        let mut found = false;
        let mut i = 0;
        while i + k <= l {
            if lyrics[i..i + k] == needle[..] {
                found = true;
                for m in &mut marked[i..i + k] {
                    *m = true;
                }
                i += k;
            } else {
                i += 1;
            }
        }
        if !found {
            extra += k;
        }
    }
    let a = marked.iter().filter(|&&m| m).count() + extra;
    (a.min(l), l)
}

// ----------------------------------------------------------- constrained fit

fn design_row(x: f64) -> [f64; 5] {
    [1.0, -x * x, x, x * x, -x]
}

pub fn residual_of(theta: &[f64; 5], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = design_row(x);
            let pred: f64 = (0..5).map(|j| r[j] * theta[j]).sum();
            (pred - y) * (pred - y)
        })
        .sum()
}

/// Projection onto the cone `{(p, q): p >= 0, q >= 2 p}`, whose boundary is
/// the two rays through `(0, 1)` and `(1, 2)`.
fn project_cone(p: f64, q: f64) -> (f64, f64) {
    if p >= 0.0 && q >= 2.0 * p {
        return (p, q);
    }
    let mut best = (0.0, 0.0);
    let mut best_d = p * p + q * q;
    for (rp, rq) in [(0.0, 1.0), (1.0, 2.0)] {
        let t = ((p * rp + q * rq) / (rp * rp + rq * rq)).max(0.0);
        let (cp, cq) = (t * rp, t * rq);
        let d = (p - cp).powi(2) + (q - cq).powi(2);
        if d < best_d {
            best_d = d;
            best = (cp, cq);
        }
    }
    best
}

fn project(theta: &mut [f64; 5]) {
    theta[0] = theta[0].max(0.0);
    let (a1, a2) = project_cone(theta[1], theta[2]);
    let (c1, c2) = project_cone(theta[3], theta[4]);
    theta[1] = a1;
    theta[2] = a2;
    theta[3] = c1;
    theta[4] = c2;
}

/// Accelerated projected gradient with adaptive restart. Returns the
/// parameters and residual.
pub fn projected_gradient_fit(xs: &[f64], ys: &[f64], iters: usize) -> ([f64; 5], f64) {
    let mut g = [[0.0; 5]; 5];
    let mut h = [0.0; 5];
    for (&x, &y) in xs.iter().zip(ys) {
        let r = design_row(x);
        for i in 0..5 {
            h[i] += r[i] * y;
            for j in 0..5 {
                g[i][j] += r[i] * r[j];
            }
        }
    }
    // Largest eigenvalue of the Gram matrix by power iteration.
    let mut v = [1.0; 5];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mut w = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 {
                w[i] += g[i][j] * v[j];
            }
        }
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        lambda = n;
        for i in 0..5 {
            v[i] = w[i] / n;
        }
    }
    let step = 1.0 / (2.0 * lambda * 1.01);
    let grad = |t: &[f64; 5]| {
        let mut out = [0.0; 5];
        for i in 0..5 {
            let gt: f64 = (0..5).map(|j| g[i][j] * t[j]).sum();
            out[i] = 2.0 * (gt - h[i]);
        }
        out
    };
    let mut theta = [0.0; 5];
    let mut y = theta;
    let mut t = 1.0f64;
    let mut f_prev = residual_of(&theta, xs, ys);
    for _ in 0..iters {
        let gy = grad(&y);
        let mut next = y;
        for i in 0..5 {
            next[i] -= step * gy[i];
        }
        project(&mut next);
        let f_next = residual_of(&next, xs, ys);
        if f_next > f_prev {
            // Restart momentum.
            y = theta;
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        for i in 0..5 {
            y[i] = next[i] + (t - 1.0) / t_next * (next[i] - theta[i]);
        }
        theta = next;
        t = t_next;
        f_prev = f_next;
    }
    (theta, residual_of(&theta, xs, ys))
}

pub fn random_feasible_params(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 5] {
    let b = rng.gen::<f64>() * scale;
    let a1 = rng.gen::<f64>() * scale;
    let a2 = 2.0 * a1 + rng.gen::<f64>() * scale;
    let c1 = rng.gen::<f64>() * scale;
    let c2 = 2.0 * c1 + rng.gen::<f64>() * scale;
    [b, a1, a2, c1, c2]
}

pub fn params_array(p: &UtilityParams) -> [f64; 5] {
    [p.b, p.a1, p.a2, p.c1, p.c2]
}

// ------------------------------------------------------------------ simulator

fn utility(p: &UtilityParams, x: f64) -> f64 {
    p.b + (p.a2 - p.c2) * x + (p.c1 - p.a1) * x * x
}

fn class_weight(h: &UtilityParams, l: &UtilityParams, mix: (f64, f64), high: bool, x: f64) -> f64 {
    let wh = mix.0 * utility(h, x);
    let wl = mix.1 * utility(l, x);
    if high {
        wh / (wh + wl)
    } else {
        wl / (wh + wl)
    }
}

/// Bin masses of the continuous coverage density of one class, proportional
/// to its selection probability, integrated by the midpoint rule on `grid`
/// points.
pub fn analytic_bin_masses(
    h: &UtilityParams,
    l: &UtilityParams,
    mix: (f64, f64),
    high: bool,
    bins: usize,
    grid: usize,
) -> Vec<f64> {
    let mut mass = vec![0.0; bins];
    for g in 0..grid {
        let x = (g as f64 + 0.5) / grid as f64;
        let bin = ((x * bins as f64) as usize).min(bins - 1);
        mass[bin] += class_weight(h, l, mix, high, x);
    }
    let total: f64 = mass.iter().sum();
    mass.iter().map(|m| m / total).collect()
}

/// Expected bin masses of one class under the slot model itself: slot `i`
/// sits at `i / (m - 1)` and bins are right-closed.
pub fn slot_bin_masses(
    h: &UtilityParams,
    l: &UtilityParams,
    mix: (f64, f64),
    high: bool,
    m: usize,
    bins: usize,
) -> Vec<f64> {
    let mut mass = vec![0.0; bins];
    for i in 0..m {
        // Exact rational bin: smallest j with i/(m-1) <= (j+1)/bins.
        let j = (i * bins).div_ceil(m - 1).saturating_sub(1).min(bins - 1);
        mass[j] += class_weight(h, l, mix, high, i as f64 / (m - 1) as f64);
    }
    let total: f64 = mass.iter().sum();
    mass.iter().map(|v| v / total).collect()
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Smallest achievable max relative error of `s * fit` against `truth` over
/// a grid on `[lo, hi]`, minimized over the scale `s > 0`.
pub fn shape_deviation(
    fit: impl Fn(f64) -> f64,
    truth: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let n = 901;
    let ratios: Vec<f64> = (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            fit(x) / truth(x)
        })
        .collect();
    let rmax = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::MAX, f64::min);
    if rmin <= 0.0 {
        return f64::INFINITY;
    }
    (rmax - rmin) / (rmax + rmin)
}

// ----------------------------------------------------------------- prediction

pub fn auc_pairs(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Plain gradient descent on the ridge-penalized logistic loss. Rows get an
/// implicit leading 1 for the intercept.
pub fn logistic_gd(rows: &[Vec<f64>], y: &[u8], ridge: f64, tol: f64) -> Vec<f64> {
    let d = rows[0].len() + 1;
    let aug: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    // Lipschitz bound: 0.25 * trace(X^T X) + ridge.
    let trace: f64 = aug.iter().flatten().map(|v| v * v).sum();
    let step = 1.0 / (0.25 * trace + ridge);
    let mut beta = vec![0.0; d];
    for _ in 0..5_000_000 {
        let mut grad: Vec<f64> = beta.iter().map(|b| ridge * b).collect();
        for (r, &yi) in aug.iter().zip(y) {
            let z: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let e = sigmoid(z) - yi as f64;
            for j in 0..d {
                grad[j] += e * r[j];
            }
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < tol {
            break;
        }
        for j in 0..d {
            beta[j] -= step * grad[j];
        }
    }
    beta
}

// ------------------------------------------------------------------- pagerank

/// Solves `(I - d M) r = (1 - d) / n` by Gaussian elimination, where column
/// `j` of `M` spreads node `j`'s rank over its out-links, or uniformly if it
/// has none.
pub fn pagerank_dense(n: usize, edges: &[(usize, usize)], d: f64) -> Vec<f64> {
    let mut out = vec![0usize; n];
    for &(a, _) in edges {
        out[a] += 1;
    }
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b) in edges {
        m[b][a] += 1.0 / out[a] as f64;
    }
    for j in 0..n {
        if out[j] == 0 {
            for row in m.iter_mut() {
                row[j] = 1.0 / n as f64;
            }
        }
    }
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - d * m[i][j])
                .collect();
            row.push((1.0 - d) / n as f64);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}
