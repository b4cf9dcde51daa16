//! Small descriptive-statistics helpers shared across modules.

/// Percentile of an ascending-sorted slice with linear interpolation between
/// order statistics at rank position `(m - 1) * pct / 100`.
///
/// Returns `None` for an empty slice.
pub fn percentile_sorted(sorted: &[f64], pct: f64) -> Option<f64> {
    let m = sorted.len();
    if m == 0 {
        return None;
    }
    let pos = (m - 1) as f64 * pct / 100.0;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    })
}

/// `(p60 + p75 + p90) / 3` of the given values.
pub fn upper_l_estimator(values: &mut [f64]) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    let p60 = percentile_sorted(values, 60.0)?;
    let p75 = percentile_sorted(values, 75.0)?;
    let p90 = percentile_sorted(values, 90.0)?;
    Some((p60 + p75 + p90) / 3.0)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Total variation distance between two discrete distributions given as
/// (not necessarily normalized) nonnegative masses over the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "supports differ");
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a / sp - b / sq).abs())
        .sum::<f64>()
}
