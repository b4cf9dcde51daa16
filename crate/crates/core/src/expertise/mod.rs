//! Early prediction of super experts from a user's first annotations and
//! edits.

mod eval;
mod graph;
mod logit;

pub use eval::{auc, evaluate, fit_logit_bootstrap, BootstrapSummary, Evaluation, MeanStd};
pub use graph::{in_degree, pagerank, pagerank_indexed, social_in_degree, social_pagerank};
pub use logit::{fit_newton, LogitFit, LogitModel, NewtonOptions, Standardizer};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dynamics::{EventSource, ValueContext};

/// Minimum number of annotations and of edits for a labeled user.
pub const MIN_CONTRIBUTIONS: usize = 30;
/// Number of early annotations and edits the features look at.
pub const EARLY_EVENTS: usize = 15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpertiseError {
    #[error("need at least 3 eligible users, found {0}")]
    TooFewEligible(usize),
    #[error("user {0} has fewer than {MIN_CONTRIBUTIONS} annotations or edits")]
    Ineligible(String),
    #[error("no song originality available for the early annotations of user {0}")]
    MissingOriginality(String),
    #[error("both classes must be present")]
    SingleClass,
    #[error("feature matrix is empty or ragged")]
    BadShape,
    #[error("could not draw a usable resample after {0} attempts")]
    ResampleExhausted(usize),
    #[error("unknown predictor '{0}'")]
    UnknownFeature(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertClass {
    SuperExpert,
    NormalExpert,
}

impl ExpertClass {
    /// Outcome coding: super experts are the positive class.
    pub fn outcome(self) -> u8 {
        match self {
            ExpertClass::SuperExpert => 1,
            ExpertClass::NormalExpert => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertLabel {
    pub user: usize,
    pub user_id: String,
    pub label: ExpertClass,
}

pub fn is_eligible(corpus: &Corpus, user: usize) -> bool {
    corpus.user_annotations(user).len() >= MIN_CONTRIBUTIONS
        && corpus.user_edits(user).len() >= MIN_CONTRIBUTIONS
}

/// Top and bottom IQ thirds of eligible users, ordered by user index.
pub fn build_labels(corpus: &Corpus) -> Result<Vec<ExpertLabel>, ExpertiseError> {
    let eligible: Vec<usize> = (0..corpus.users().len())
        .filter(|&u| is_eligible(corpus, u))
        .collect();
    if eligible.len() < 3 {
        return Err(ExpertiseError::TooFewEligible(eligible.len()));
    }
    let (low, high) = corpus.iq_thirds(&eligible);
    let mut labels: Vec<ExpertLabel> = high
        .iter()
        .map(|&u| (u, ExpertClass::SuperExpert))
        .chain(low.iter().map(|&u| (u, ExpertClass::NormalExpert)))
        .map(|(user, label)| ExpertLabel {
            user,
            user_id: corpus.users()[user].user_id.clone(),
            label,
        })
        .collect();
    labels.sort_by_key(|l| l.user);
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    A1,
    A2,
    A3,
    A4,
    E1,
    E2,
    Pagerank,
    InDegree,
}

impl Feature {
    pub const EARLY: [Feature; 6] = [
        Feature::A1,
        Feature::A2,
        Feature::A3,
        Feature::A4,
        Feature::E1,
        Feature::E2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::A1 => "a1",
            Feature::A2 => "a2",
            Feature::A3 => "a3",
            Feature::A4 => "a4",
            Feature::E1 => "e1",
            Feature::E2 => "e2",
            Feature::Pagerank => "pagerank",
            Feature::InDegree => "in_degree",
        }
    }

    pub fn parse(s: &str) -> Result<Feature, ExpertiseError> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "a1" | "alpha1" => Feature::A1,
            "a2" | "alpha2" => Feature::A2,
            "a3" | "alpha3" => Feature::A3,
            "a4" | "alpha4" => Feature::A4,
            "e1" => Feature::E1,
            "e2" => Feature::E2,
            "pagerank" => Feature::Pagerank,
            "in_degree" | "indegree" | "in-degree" => Feature::InDegree,
            other => return Err(ExpertiseError::UnknownFeature(other.to_string())),
        })
    }

    pub fn parse_list(s: &str) -> Result<Vec<Feature>, ExpertiseError> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Feature::parse)
            .collect()
    }
}

/// Early-behavior predictors of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Mean quality tags per early annotation.
    pub a1: f64,
    /// Mean gap in seconds between consecutive early annotations.
    pub a2: f64,
    /// Early annotations that were their song's first.
    pub a3: f64,
    /// Mean song originality over early annotations.
    pub a4: f64,
    /// Mean gap in seconds between consecutive early edits.
    pub e1: f64,
    /// Early edits that were their annotation's first.
    pub e2: f64,
    pub pagerank: Option<f64>,
    pub in_degree: Option<f64>,
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::A1 => Some(self.a1),
            Feature::A2 => Some(self.a2),
            Feature::A3 => Some(self.a3),
            Feature::A4 => Some(self.a4),
            Feature::E1 => Some(self.e1),
            Feature::E2 => Some(self.e2),
            Feature::Pagerank => self.pagerank,
            Feature::InDegree => self.in_degree,
        }
    }
}

fn mean_gap(times: &[i64]) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    let gaps: f64 = times.windows(2).map(|w| (w[1] - w[0]) as f64).sum();
    gaps / (times.len() - 1) as f64
}

/// Early-behavior features of an eligible user. `ctx` must carry an
/// originality model for `a4`.
pub fn extract_features(ctx: &ValueContext, user: usize) -> Result<FeatureVector, ExpertiseError> {
    let corpus = ctx.corpus();
    let uid = || corpus.users()[user].user_id.clone();
    if !is_eligible(corpus, user) {
        return Err(ExpertiseError::Ineligible(uid()));
    }
    let anns = &corpus.user_annotations(user)[..EARLY_EVENTS];
    let edits = &corpus.user_edits(user)[..EARLY_EVENTS];

    let k = EARLY_EVENTS as f64;
    let a1 = anns
        .iter()
        .map(|&a| ctx.quality_tags(EventSource::Annotation(a)))
        .sum::<f64>()
        / k;
    let ann_times: Vec<i64> = anns
        .iter()
        .map(|&a| corpus.annotations()[a].created_at)
        .collect();
    let a3 = anns
        .iter()
        .filter(|&&a| corpus.annotation_rank(a) == 1)
        .count() as f64;
    let orig: Vec<f64> = anns
        .iter()
        .filter_map(|&a| ctx.song_originality(corpus.annotation_song(a)))
        .collect();
    if orig.is_empty() {
        return Err(ExpertiseError::MissingOriginality(uid()));
    }
    let a4 = orig.iter().sum::<f64>() / orig.len() as f64;

    let edit_times: Vec<i64> = edits
        .iter()
        .map(|&e| corpus.edits()[e].created_at)
        .collect();
    let e2 = edits.iter().filter(|&&e| corpus.edit_rank(e) == 1).count() as f64;

    Ok(FeatureVector {
        a1,
        a2: mean_gap(&ann_times),
        a3,
        a4,
        e1: mean_gap(&edit_times),
        e2,
        pagerank: None,
        in_degree: None,
    })
}

/// Labeled users with their features, in user-index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFeatures {
    pub labels: Vec<ExpertLabel>,
    pub features: Vec<FeatureVector>,
}

impl LabeledFeatures {
    pub fn outcomes(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.label.outcome()).collect()
    }

    /// Row-major design matrix for `subset`. Errors if a requested graph
    /// feature was not computed.
    pub fn matrix(&self, subset: &[Feature]) -> Result<Vec<Vec<f64>>, ExpertiseError> {
        self.features
            .iter()
            .map(|fv| {
                subset
                    .iter()
                    .map(|&f| fv.get(f).ok_or(ExpertiseError::BadShape))
                    .collect()
            })
            .collect()
    }
}

/// Labels every eligible user's third and extracts features, optionally
/// attaching social-graph scores computed over all users.
pub fn labeled_features(
    ctx: &ValueContext,
    with_graph: bool,
) -> Result<LabeledFeatures, ExpertiseError> {
    let corpus = ctx.corpus();
    let labels = build_labels(corpus)?;
    let mut features: Vec<FeatureVector> = labels
        .par_iter()
        .map(|l| extract_features(ctx, l.user))
        .collect::<Result<_, _>>()?;
    if with_graph {
        let pr = social_pagerank(corpus, 0.85, 1e-10);
        let deg = social_in_degree(corpus);
        for (fv, l) in features.iter_mut().zip(&labels) {
            fv.pagerank = Some(pr[l.user]);
            fv.in_degree = Some(deg[l.user] as f64);
        }
    }
    Ok(LabeledFeatures { labels, features })
}
