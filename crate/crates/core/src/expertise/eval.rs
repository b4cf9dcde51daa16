//! Bootstrap confidence intervals and split-sample evaluation.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logit::{fit_newton, LogitModel, NewtonOptions, Standardizer};
use super::ExpertiseError;
use crate::seeds;
use crate::stats::{mean, percentile_sorted, sample_std};

/// Attempts per replicate or split before giving up on drawing both classes.
const MAX_REDRAWS: usize = 10_000;

/// Area under the ROC curve via the Mann-Whitney rank statistic, with tied
/// scores counted as half. `None` unless both classes are present.
pub fn auc(scores: &[f64], outcomes: &[u8]) -> Option<f64> {
    assert_eq!(scores.len(), outcomes.len());
    let n_pos = outcomes.iter().filter(|&&y| y == 1).count();
    let n_neg = outcomes.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if outcomes[k] == 1 {
                rank_sum += avg;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

fn has_both(outcomes: &[u8], idx: &[usize]) -> bool {
    let ones = idx.iter().filter(|&&i| outcomes[i] == 1).count();
    ones > 0 && ones < idx.len()
}

fn check_inputs(rows: &[Vec<f64>], outcomes: &[u8]) -> Result<(), ExpertiseError> {
    if rows.is_empty() || rows.len() != outcomes.len() {
        return Err(ExpertiseError::BadShape);
    }
    let all: Vec<usize> = (0..rows.len()).collect();
    if !has_both(outcomes, &all) {
        return Err(ExpertiseError::SingleClass);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// Intercept first.
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub n_boot: usize,
    /// Resamples discarded because they contained a single class.
    pub redraws: usize,
}

/// Standardizes the full sample, then refits the logit on `n_boot` user
/// resamples. Reports mean coefficients and 2.5/97.5 percentile intervals.
pub fn fit_logit_bootstrap(
    rows: &[Vec<f64>],
    outcomes: &[u8],
    n_boot: usize,
    seed: u64,
) -> Result<BootstrapSummary, ExpertiseError> {
    check_inputs(rows, outcomes)?;
    let z = Standardizer::fit(rows)?.apply_all(rows);
    let n = rows.len();
    let replicates: Vec<(Vec<f64>, usize)> = (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds::stream(seed, r as u64);
            let mut redraws = 0;
            let idx = loop {
                let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                if has_both(outcomes, &idx) {
                    break idx;
                }
                redraws += 1;
                if redraws >= MAX_REDRAWS {
                    return Err(ExpertiseError::ResampleExhausted(redraws));
                }
            };
            let xs: Vec<Vec<f64>> = idx.iter().map(|&i| z[i].clone()).collect();
            let ys: Vec<u8> = idx.iter().map(|&i| outcomes[i]).collect();
            let fit = fit_newton(&xs, &ys, NewtonOptions::default())?;
            Ok((fit.coef, redraws))
        })
        .collect::<Result<_, _>>()?;

    let p = rows[0].len() + 1;
    let mut mean_c = Vec::with_capacity(p);
    let mut lo = Vec::with_capacity(p);
    let mut hi = Vec::with_capacity(p);
    for j in 0..p {
        let mut col: Vec<f64> = replicates.iter().map(|(c, _)| c[j]).collect();
        mean_c.push(mean(&col).unwrap_or(f64::NAN));
        col.sort_by(f64::total_cmp);
        lo.push(percentile_sorted(&col, 2.5).unwrap_or(f64::NAN));
        hi.push(percentile_sorted(&col, 97.5).unwrap_or(f64::NAN));
    }
    Ok(BootstrapSummary {
        mean: mean_c,
        ci_low: lo,
        ci_high: hi,
        n_boot,
        redraws: replicates.iter().map(|(_, r)| r).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        MeanStd {
            mean: mean(values).unwrap_or(f64::NAN),
            std: sample_std(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: MeanStd,
    pub auc: MeanStd,
    /// Accuracy of guessing each test split's most common label.
    pub majority: MeanStd,
    pub n_splits: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// Splits discarded because train or test lacked a class.
    pub redraws: usize,
}

/// Repeated random train/test splits. Each split standardizes and fits on
/// its training part, classifies test users at probability 0.5 and scores
/// the test AUC.
pub fn evaluate(
    rows: &[Vec<f64>],
    outcomes: &[u8],
    n_splits: usize,
    train_frac: f64,
    seed: u64,
) -> Result<Evaluation, ExpertiseError> {
    check_inputs(rows, outcomes)?;
    let n = rows.len();
    let n_train = ((n as f64 * train_frac).round() as usize).clamp(1, n.saturating_sub(1));
    if n_train == 0 || n_train >= n {
        return Err(ExpertiseError::BadShape);
    }

    let per_split: Vec<(f64, f64, f64, usize)> = (0..n_splits)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeds::stream(seed, s as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            let mut redraws = 0;
            loop {
                perm.shuffle(&mut rng);
                let (train, test) = perm.split_at(n_train);
                if has_both(outcomes, train) && has_both(outcomes, test) {
                    break;
                }
                redraws += 1;
                if redraws >= MAX_REDRAWS {
                    return Err(ExpertiseError::ResampleExhausted(redraws));
                }
            }
            let (train, test) = perm.split_at(n_train);
            let xs: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let ys: Vec<u8> = train.iter().map(|&i| outcomes[i]).collect();
            let model = LogitModel::fit(&xs, &ys, NewtonOptions::default())?;
            let scores: Vec<f64> = test
                .iter()
                .map(|&i| model.predict_proba(&rows[i]))
                .collect();
            let truth: Vec<u8> = test.iter().map(|&i| outcomes[i]).collect();
            let correct = scores
                .iter()
                .zip(&truth)
                .filter(|(&p, &y)| u8::from(p >= 0.5) == y)
                .count();
            let ones = truth.iter().filter(|&&y| y == 1).count();
            let majority = ones.max(truth.len() - ones) as f64 / truth.len() as f64;
            let area = auc(&scores, &truth).expect("test split has both classes");
            Ok((correct as f64 / truth.len() as f64, area, majority, redraws))
        })
        .collect::<Result<_, _>>()?;

    let acc: Vec<f64> = per_split.iter().map(|s| s.0).collect();
    let aucs: Vec<f64> = per_split.iter().map(|s| s.1).collect();
    let maj: Vec<f64> = per_split.iter().map(|s| s.2).collect();
    Ok(Evaluation {
        accuracy: MeanStd::of(&acc),
        auc: MeanStd::of(&aucs),
        majority: MeanStd::of(&maj),
        n_splits,
        train_size: n_train,
        test_size: n - n_train,
        redraws: per_split.iter().map(|s| s.3).sum(),
    })
}
