//! Utility model for annotating a song at coverage `x`:
//!
//! ```text
//! u(x) = b + f(x) - g(x),   f(x) = -a1 x^2 + a2 x,   g(x) = -c1 x^2 + c2 x
//! ```
//!
//! with `b >= 0`, `a1 >= 0`, `a2 >= 2 a1`, `c1 >= 0`, `c2 >= 2 c1`, fitted by
//! least squares to a density histogram of proportional time ranks.
//!
//! Only `(b, c1 - a1, a2 - c2)` affect `u`; the five raw coefficients are not
//! identifiable. [`fit_utility`] returns the minimum-norm raw vector among the
//! optimal ones together with the effective triple.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dynamics::unit_bin;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UtilityError {
    #[error("coverage {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("user class {0:?} has no members")]
    EmptyClass(UserClass),
    #[error("{events} event(s) cannot fill {bins} bins; use fewer bins")]
    TooFewEvents { events: usize, bins: usize },
    #[error("fitting needs at least {min} histogram bins, got {bins}")]
    TooFewBins { bins: usize, min: usize },
    #[error("histogram has mismatched lengths")]
    MalformedHistogram,
}

/// Minimum number of histogram bins accepted by [`fit_utility`].
pub const MIN_FIT_BINS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserClass {
    HighIq,
    LowIq,
}

impl UserClass {
    pub fn name(self) -> &'static str {
        match self {
            UserClass::HighIq => "high_iq",
            UserClass::LowIq => "low_iq",
        }
    }
}

/// Users with at least `min_annotations` annotations split into IQ thirds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserClasses {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
}

impl UserClasses {
    pub fn members(&self, class: UserClass) -> &[usize] {
        match class {
            UserClass::HighIq => &self.high,
            UserClass::LowIq => &self.low,
        }
    }
}

pub fn classify_users(corpus: &Corpus, min_annotations: usize) -> UserClasses {
    let eligible: Vec<usize> = (0..corpus.users().len())
        .filter(|&u| corpus.user_annotations(u).len() >= min_annotations)
        .collect();
    let (low, high) = corpus.iq_thirds(&eligible);
    UserClasses { high, low }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// The identifiable part of [`UtilityParams`]: `u(x) = b + d2 x^2 + d1 x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub b: f64,
    /// `c1 - a1`
    pub d2: f64,
    /// `a2 - c2`
    pub d1: f64,
}

impl EffectiveParams {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.b + self.d2 * x * x + self.d1 * x
    }
}

impl UtilityParams {
    pub const ZERO: UtilityParams = UtilityParams {
        b: 0.0,
        a1: 0.0,
        a2: 0.0,
        c1: 0.0,
        c2: 0.0,
    };

    fn to_vec(self) -> [f64; 5] {
        [self.b, self.a1, self.a2, self.c1, self.c2]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self {
            b: v[0],
            a1: v[1],
            a2: v[2],
            c1: v[3],
            c2: v[4],
        }
    }

    /// Constraint slacks `[b, a1, a2 - 2 a1, c1, c2 - 2 c1]`; all must be
    /// nonnegative.
    pub fn slacks(&self) -> [f64; 5] {
        [
            self.b,
            self.a1,
            self.a2 - 2.0 * self.a1,
            self.c1,
            self.c2 - 2.0 * self.c1,
        ]
    }

    pub fn is_feasible(&self) -> bool {
        self.slacks().iter().all(|&s| s >= 0.0)
    }

    pub fn network(&self, x: f64) -> f64 {
        -self.a1 * x * x + self.a2 * x
    }

    pub fn congestion(&self, x: f64) -> f64 {
        -self.c1 * x * x + self.c2 * x
    }

    pub fn effective(&self) -> EffectiveParams {
        EffectiveParams {
            b: self.b,
            d2: self.c1 - self.a1,
            d1: self.a2 - self.c2,
        }
    }

    /// `b + f(x) - g(x)` for `x` in `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64, UtilityError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(UtilityError::OutOfDomain(x));
        }
        Ok(self.b + self.network(x) - self.congestion(x))
    }

    pub fn norm(&self) -> f64 {
        self.to_vec().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Density histogram over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankHistogram {
    pub edges: Vec<f64>,
    pub midpoints: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RankHistogram {
    /// Equal-width density histogram; bins follow [`unit_bin`].
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self, UtilityError> {
        if values.len() < bins || values.is_empty() {
            return Err(UtilityError::TooFewEvents {
                events: values.len(),
                bins,
            });
        }
        let mut counts = vec![0usize; bins];
        for &q in values {
            counts[unit_bin(q, bins)] += 1;
        }
        let w = 1.0 / bins as f64;
        let n = values.len() as f64;
        Ok(Self {
            edges: (0..=bins).map(|j| j as f64 * w).collect(),
            midpoints: (0..bins).map(|j| (j as f64 + 0.5) * w).collect(),
            densities: counts.iter().map(|&c| c as f64 / (n * w)).collect(),
            counts,
        })
    }

    pub fn bins(&self) -> usize {
        self.midpoints.len()
    }

    /// `sum(density * width)`; 1 for a histogram built from data.
    pub fn mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}

/// Density histogram of proportional time ranks of annotations made by a
/// user class (users with at least 10 annotations, IQ thirds). Each
/// annotation carries equal weight.
pub fn class_histogram(
    corpus: &Corpus,
    class: UserClass,
    bins: usize,
) -> Result<RankHistogram, UtilityError> {
    let classes = classify_users(corpus, 10);
    class_histogram_for(corpus, classes.members(class), class, bins)
}

pub fn class_histogram_for(
    corpus: &Corpus,
    members: &[usize],
    class: UserClass,
    bins: usize,
) -> Result<RankHistogram, UtilityError> {
    if members.is_empty() {
        return Err(UtilityError::EmptyClass(class));
    }
    let mut qs = Vec::new();
    for &u in members {
        for &a in corpus.user_annotations(u) {
            let n = corpus.song_annotations(corpus.annotation_song(a)).len();
            if n >= 2 {
                let r = corpus.annotation_rank(a) as f64;
                qs.push((r - 1.0) / (n as f64 - 1.0));
            }
        }
    }
    RankHistogram::from_values(&qs, bins)
}

/// Which constraints hold with equality at the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveConstraints {
    /// `b = 0`
    pub b_zero: bool,
    /// `a1 = 0`
    pub a1_zero: bool,
    /// `a2 = 2 a1`
    pub a2_at_bound: bool,
    /// `c1 = 0`
    pub c1_zero: bool,
    /// `c2 = 2 c1`
    pub c2_at_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFit {
    pub params: UtilityParams,
    pub effective: EffectiveParams,
    /// Sum of squared residuals at the bin midpoints.
    pub residual: f64,
    pub active: ActiveConstraints,
}

const ACTIVE_TOL: f64 = 1e-9;

fn constraint_rows() -> DMatrix<f64> {
    #[rustfmt::skip]
    let rows = DMatrix::from_row_slice(5, 5, &[
        1.0,  0.0, 0.0, 0.0,  0.0,
        0.0,  1.0, 0.0, 0.0,  0.0,
        0.0, -2.0, 1.0, 0.0,  0.0,
        0.0,  0.0, 0.0, 1.0,  0.0,
        0.0,  0.0, 0.0, -2.0, 1.0,
    ]);
    rows
}

/// Orthonormal basis (as columns) of the null space of `a`.
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = a.transpose() * a;
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm solution of `min ||z_mat w - y||` from the normal equations,
/// using a spectral pseudo-inverse so rank-deficient systems are handled.
fn min_norm_least_squares(z_mat: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let r = z_mat.ncols();
    if r == 0 {
        return DVector::zeros(0);
    }
    let g = z_mat.transpose() * z_mat;
    let h = z_mat.transpose() * y;
    let eig = SymmetricEigen::new(g);
    let scale = eig.eigenvalues.amax();
    let mut w = DVector::zeros(r);
    if scale == 0.0 {
        return w;
    }
    for i in 0..r {
        let lambda = eig.eigenvalues[i];
        if lambda > 1e-11 * scale {
            let v = eig.eigenvectors.column(i);
            w += v * (v.dot(&h) / lambda);
        }
    }
    w
}

fn residual_of(p: &UtilityParams, xs: &[f64], ys: &[f64]) -> f64 {
    let e = p.effective();
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let d = e.evaluate(x) - y;
            d * d
        })
        .sum()
}

/// Snaps constraint violations at rounding level onto the boundary.
fn project_tiny(p: UtilityParams) -> UtilityParams {
    let b = p.b.max(0.0);
    let a1 = p.a1.max(0.0);
    let a2 = p.a2.max(2.0 * a1);
    let c1 = p.c1.max(0.0);
    let c2 = p.c2.max(2.0 * c1);
    UtilityParams { b, a1, a2, c1, c2 }
}

/// Constrained least-squares fit of the utility model to a histogram.
///
/// Enumerates all 32 subsets of the five inequality constraints. For each
/// subset the constraints are imposed as equalities, the problem is reduced to
/// the null space of the active rows, and the minimum-norm least-squares
/// solution is taken from the normal equations. Feasible candidates are
/// compared by residual; near-ties go to the smaller parameter norm.
pub fn fit_utility(hist: &RankHistogram) -> Result<UtilityFit, UtilityError> {
    let t = hist.bins();
    if hist.densities.len() != t {
        return Err(UtilityError::MalformedHistogram);
    }
    if t < MIN_FIT_BINS {
        return Err(UtilityError::TooFewBins {
            bins: t,
            min: MIN_FIT_BINS,
        });
    }
    fit_points(&hist.midpoints, &hist.densities)
}

/// [`fit_utility`] on arbitrary `(x, y)` samples.
pub fn fit_points(xs: &[f64], ys: &[f64]) -> Result<UtilityFit, UtilityError> {
    if xs.len() != ys.len() {
        return Err(UtilityError::MalformedHistogram);
    }
    let t = xs.len();
    let design = DMatrix::from_fn(t, 5, |i, j| {
        let x = xs[i];
        match j {
            0 => 1.0,
            1 => -x * x,
            2 => x,
            3 => x * x,
            _ => -x,
        }
    });
    let y = DVector::from_column_slice(ys);
    let rows = constraint_rows();
    let y_scale = 1.0 + y.norm_squared();

    let mut best: Option<(f64, f64, UtilityParams)> = None;
    for mask in 0u32..32 {
        let active: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
        let a = rows.select_rows(&active);
        let basis = null_space(&a);
        let w = min_norm_least_squares(&(&design * &basis), &y);
        let theta = &basis * w;
        let raw = UtilityParams::from_slice(theta.as_slice());
        let scale = 1.0 + raw.norm();
        if raw.slacks().iter().any(|&s| s < -1e-10 * scale) {
            continue;
        }
        let cand = project_tiny(raw);
        let res = residual_of(&cand, xs, ys);
        let norm = cand.norm();
        let better = match &best {
            None => true,
            Some((best_res, best_norm, _)) => {
                let tie = 1e-10 * y_scale;
                res < best_res - tie || (res <= best_res + tie && norm < *best_norm)
            }
        };
        if better {
            best = Some((res, norm, cand));
        }
    }
    // b = a = c = 0 is always feasible, so some subset qualifies.
    let (residual, _, params) = best.expect("origin is feasible");
    let slack = params.slacks();
    let is_active = |i: usize| slack[i] <= ACTIVE_TOL * (1.0 + params.norm());
    Ok(UtilityFit {
        params,
        effective: params.effective(),
        residual,
        active: ActiveConstraints {
            b_zero: is_active(0),
            a1_zero: is_active(1),
            a2_at_bound: is_active(2),
            c1_zero: is_active(3),
            c2_at_bound: is_active(4),
        },
    })
}

/// Histogram of a user class's annotation ranks and its utility fit.
pub fn fit_class_utility(
    corpus: &Corpus,
    class: UserClass,
    bins: usize,
) -> Result<(RankHistogram, UtilityFit), UtilityError> {
    if bins < MIN_FIT_BINS {
        return Err(UtilityError::TooFewBins {
            bins,
            min: MIN_FIT_BINS,
        });
    }
    let hist = class_histogram(corpus, class, bins)?;
    let fit = fit_utility(&hist)?;
    Ok((hist, fit))
}

/// Reference coefficients for the high- and low-IQ classes of the full Genius
/// corpus; useful as simulator inputs.
pub fn reference_params(class: UserClass) -> UtilityParams {
    match class {
        UserClass::HighIq => UtilityParams {
            b: 1.25,
            a1: 0.003,
            a2: 2.02,
            c1: 1.84,
            c2: 3.74,
        },
        UserClass::LowIq => UtilityParams {
            b: 1.06,
            a1: 0.79,
            a2: 1.83,
            c1: 0.04,
            c2: 1.44,
        },
    }
}
