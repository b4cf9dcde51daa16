//! Logistic regression by damped Newton iterations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ExpertiseError;

/// Per-column centering and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant columns get 1.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, ExpertiseError> {
        let d = check_shape(rows)?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for j in 0..d {
                let c = r[j] - mean[j];
                var[j] += c * c;
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

fn check_shape(rows: &[Vec<f64>]) -> Result<usize, ExpertiseError> {
    let d = rows.first().ok_or(ExpertiseError::BadShape)?.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(ExpertiseError::BadShape);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// L2 penalty on every coefficient, intercept included.
    pub ridge: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            ridge: 1e-6,
            grad_tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    /// Intercept first, then one weight per column.
    pub coef: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn design(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows[0].len();
    DMatrix::from_fn(
        rows.len(),
        d + 1,
        |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] },
    )
}

/// Penalized negative log-likelihood
/// `sum log(1 + e^z) - y z + ridge / 2 * |beta|^2`.
pub fn objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, ridge: f64) -> f64 {
    let z = x * beta;
    let nll: f64 = z
        .iter()
        .zip(y.iter())
        .map(|(&z, &y)| log1pexp(z) - y * z)
        .sum();
    nll + 0.5 * ridge * beta.norm_squared()
}

/// Minimizes the penalized negative log-likelihood. Steps are halved until
/// the objective does not increase.
pub fn fit_newton(
    rows: &[Vec<f64>],
    outcomes: &[u8],
    opts: NewtonOptions,
) -> Result<LogitFit, ExpertiseError> {
    check_shape(rows)?;
    if rows.len() != outcomes.len() {
        return Err(ExpertiseError::BadShape);
    }
    let x = design(rows);
    let y = DVector::from_iterator(outcomes.len(), outcomes.iter().map(|&v| v as f64));
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    let mut f = objective(&x, &y, &beta, opts.ridge);
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let z = &x * &beta;
        let mu = z.map(sigmoid);
        let grad = x.transpose() * (&mu - &y) + &beta * opts.ridge;
        grad_norm = grad.norm();
        if grad_norm < opts.grad_tol {
            break;
        }
        let w = mu.map(|m| m * (1.0 - m));
        let mut xw = x.clone();
        for (i, mut row) in xw.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let hess = x.transpose() * xw + DMatrix::identity(p, p) * opts.ridge;
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => hess.lu().solve(&grad).unwrap_or_else(|| grad.clone()),
        };
        // Near the optimum the decrease drops below the rounding error of the
        // summed objective; changes at that level count as no increase.
        let slack = 1e-12 * (1.0 + f.abs());
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &beta - &step * t;
            let fc = objective(&x, &y, &cand, opts.ridge);
            if fc <= f + slack {
                beta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    if grad_norm >= opts.grad_tol {
        let mu = (&x * &beta).map(sigmoid);
        grad_norm = (x.transpose() * (&mu - &y) + &beta * opts.ridge).norm();
    }
    Ok(LogitFit {
        coef: beta.iter().copied().collect(),
        iterations,
        grad_norm,
        converged: grad_norm < opts.grad_tol,
    })
}

/// Standardizer plus coefficients on the standardized scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub standardizer: Standardizer,
    /// Intercept first.
    pub coef: Vec<f64>,
}

impl LogitModel {
    /// Standardizes on `rows`, then fits.
    pub fn fit(
        rows: &[Vec<f64>],
        outcomes: &[u8],
        opts: NewtonOptions,
    ) -> Result<Self, ExpertiseError> {
        let standardizer = Standardizer::fit(rows)?;
        let fit = fit_newton(&standardizer.apply_all(rows), outcomes, opts)?;
        Ok(Self {
            standardizer,
            coef: fit.coef,
        })
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let z: f64 = self.coef[0]
            + self
                .standardizer
                .apply(row)
                .iter()
                .zip(&self.coef[1..])
                .map(|(x, b)| x * b)
                .sum::<f64>();
        sigmoid(z)
    }
}
