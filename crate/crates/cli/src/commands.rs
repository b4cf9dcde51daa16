use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use annodyn::corpus::{self, Corpus, CountKey, SnapshotMeta};
use annodyn::dynamics::{
    curve_vs_proportional_rank, edit_strata_curves, lifespan_curves, rank_events, BinnedCurve,
    Bootstrap, EventValue, LifespanConfig, LifespanValue, RankOptions, ValueContext,
};
use annodyn::expertise::{
    evaluate, fit_logit_bootstrap, labeled_features, Evaluation, Feature, LabeledFeatures,
};
use annodyn::simulate::{class_conditional_density, simulate as run_simulation, Mix};
use annodyn::textmetrics::{
    build_idf, song_coverage, OriginalityModel, QualityTagSet, TagCountMode,
};
use annodyn::utility::{
    fit_class_utility, reference_params, EffectiveParams, RankHistogram, UserClass, UtilityFit,
    UtilityParams,
};

use crate::output::{csv_writer, opt, write_json, Meta, TOOL_VERSION};
use crate::{
    ClassArg, CurveName, DynamicsArgs, FitArgs, IngestArgs, MetricsArgs, PredictArgs, ReportArgs,
    SimulateArgs, TagMode,
};

fn load(path: &Path, meta: &mut Meta) -> Result<Corpus> {
    meta.add_input(path)?;
    let (corpus, _) =
        Corpus::load(path).with_context(|| format!("loading corpus {}", path.display()))?;
    Ok(corpus)
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let mut meta = Meta::new("ingest", None);
    let digest = meta.add_input(&a.input)?;
    let corpus =
        corpus::ingest(&a.input).with_context(|| format!("ingesting {}", a.input.display()))?;
    corpus
        .save(
            &a.out,
            &SnapshotMeta {
                tool_version: TOOL_VERSION.into(),
                input_digest: digest,
            },
        )
        .with_context(|| format!("writing {}", a.out.display()))?;
    let (u, s, g, an, e) = corpus.counts();
    eprintln!(
        "{u} users, {s} songs, {g} segments, {an} annotations, {e} edits, {} follow edges",
        corpus.social_edges().len()
    );
    Ok(())
}

fn tag_setup(tags: Option<&str>, mode: TagMode) -> (QualityTagSet, TagCountMode) {
    let set = match tags {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .fold(QualityTagSet::empty(), |s, t| s.with_tag(t)),
        None => QualityTagSet::default(),
    };
    let mode = match mode {
        TagMode::Occurrences => TagCountMode::Occurrences,
        TagMode::Unique => TagCountMode::Unique,
    };
    (set, mode)
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let mut meta = Meta::new("metrics", None);
    let corpus = load(&a.corpus, &mut meta)?;
    let model = build_idf(&corpus)?;
    let (tags, mode) = tag_setup(a.tags.as_deref(), a.tag_mode);
    let ctx = ValueContext::new(&corpus, Some(&model)).with_tags(tags, mode);

    let mut w = csv_writer(&a.out, &meta)?;
    w.write_record([
        "row_kind",
        "id",
        "song_id",
        "quality_tags",
        "length",
        "segment_originality",
        "song_originality",
        "coverage",
        "views",
        "annotations",
    ])?;
    use annodyn::dynamics::EventSource;
    for (i, ann) in corpus.annotations().iter().enumerate() {
        let song = corpus.annotation_song(i);
        w.write_record([
            "annotation".to_string(),
            ann.annotation_id.clone(),
            corpus.songs()[song].song_id.clone(),
            ctx.quality_tags(EventSource::Annotation(i)).to_string(),
            ctx.length(EventSource::Annotation(i)).to_string(),
            opt(ctx.segment_originality(i)),
            opt(ctx.song_originality(song)),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    for (s, song) in corpus.songs().iter().enumerate() {
        let coverage = song_coverage(&corpus, s).ok().map(|c| c.coverage);
        w.write_record([
            "song".to_string(),
            song.song_id.clone(),
            song.song_id.clone(),
            String::new(),
            String::new(),
            String::new(),
            opt(ctx.song_originality(s)),
            opt(coverage),
            song.view_count.map(|v| v.to_string()).unwrap_or_default(),
            corpus.song_annotations(s).len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_curve(
    w: &mut csv::Writer<impl std::io::Write>,
    series: &str,
    curve: &BinnedCurve,
) -> Result<()> {
    for b in &curve.bins {
        w.write_record([
            series.to_string(),
            b.lo.to_string(),
            b.hi.to_string(),
            opt(b.mean),
            b.count.to_string(),
            opt(b.boot_std),
        ])?;
    }
    Ok(())
}

fn needs_originality(c: CurveName) -> bool {
    matches!(
        c,
        CurveName::AnnotationOriginality
            | CurveName::LifespanSegmentOriginality
            | CurveName::LifespanSongOriginality
    )
}

pub fn dynamics(a: &DynamicsArgs) -> Result<()> {
    let mut meta = Meta::new("dynamics", Some(a.seed));
    let corpus = load(&a.corpus, &mut meta)?;
    if a.bins == 0 {
        bail!("--bins must be at least 1");
    }
    let model: Option<OriginalityModel> = if needs_originality(a.curve) {
        Some(build_idf(&corpus)?)
    } else {
        None
    };
    let ctx = ValueContext::new(&corpus, model.as_ref());
    let boot = (a.boot > 0).then_some(Bootstrap {
        n_boot: a.boot,
        seed: a.seed,
    });
    let events = rank_events(
        &corpus,
        RankOptions {
            collapse_self_edits: a.collapse_self_edits,
        },
    );

    let mut series: Vec<(String, BinnedCurve)> = Vec::new();
    let proportional = |v: EventValue| curve_vs_proportional_rank(&events, &ctx, v, a.bins, boot);
    let strata = |v: EventValue| {
        let s = edit_strata_curves(&events, |e| ctx.value(e, v), a.max_edits, boot);
        s.curves
            .into_iter()
            .enumerate()
            .map(|(k, c)| (format!("k={k}"), c))
            .collect::<Vec<_>>()
    };
    let lifespan = |v: LifespanValue| {
        let cfg = LifespanConfig {
            horizon_days: a.horizon_days,
            min_events: a.min_events,
            step_days: a.step_days.max(1),
            n_boot: a.boot,
            seed: a.seed,
        };
        lifespan_curves(&ctx, v, &cfg)
            .into_iter()
            .filter_map(|c| {
                let name = format!("{} (users={})", c.stratum.name(), c.users);
                c.curve.map(|curve| (name, curve))
            })
            .collect::<Vec<_>>()
    };
    match a.curve {
        CurveName::AnnotationIq => series.push(("all".into(), proportional(EventValue::ActorIq))),
        CurveName::AnnotationTotalAnnotations => series.push((
            "all".into(),
            proportional(EventValue::ActorTotalAnnotations),
        )),
        CurveName::AnnotationTags => {
            series.push(("all".into(), proportional(EventValue::QualityTags)))
        }
        CurveName::AnnotationLength => {
            series.push(("all".into(), proportional(EventValue::Length)))
        }
        CurveName::AnnotationOriginality => {
            series.push(("all".into(), proportional(EventValue::SegmentOriginality)))
        }
        CurveName::EditStrataIq => series = strata(EventValue::ActorIq),
        CurveName::EditStrataTags => series = strata(EventValue::QualityTags),
        CurveName::EditStrataLength => series = strata(EventValue::Length),
        CurveName::LifespanFirstAnnotation => {
            series = lifespan(LifespanValue::FirstAnnotationOnSong)
        }
        CurveName::LifespanFirstEdit => series = lifespan(LifespanValue::FirstEditOnAnnotation),
        CurveName::LifespanTags => series = lifespan(LifespanValue::QualityTags),
        CurveName::LifespanLength => series = lifespan(LifespanValue::Length),
        CurveName::LifespanSegmentOriginality => {
            series = lifespan(LifespanValue::SegmentOriginality)
        }
        CurveName::LifespanSongOriginality => series = lifespan(LifespanValue::SongOriginality),
    }

    let mut w = csv_writer(&a.out, &meta)?;
    w.write_record(["series", "bin_lo", "bin_hi", "mean", "count", "boot_std"])?;
    for (name, curve) in &series {
        write_curve(&mut w, name, curve)?;
    }
    w.flush()?;
    Ok(())
}

fn user_class(c: ClassArg) -> UserClass {
    match c {
        ClassArg::High => UserClass::HighIq,
        ClassArg::Low => UserClass::LowIq,
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    class: UserClass,
    bins: usize,
    n_events: usize,
    raw: UtilityParams,
    effective: EffectiveParams,
    residual: f64,
    active: annodyn::utility::ActiveConstraints,
    histogram: &'a RankHistogram,
}

impl<'a> FitReport<'a> {
    fn new(class: UserClass, hist: &'a RankHistogram, fit: &UtilityFit) -> Self {
        Self {
            class,
            bins: hist.bins(),
            n_events: hist.counts.iter().sum(),
            raw: fit.params,
            effective: fit.effective,
            residual: fit.residual,
            active: fit.active,
            histogram: hist,
        }
    }
}

pub fn fit_utility(a: &FitArgs) -> Result<()> {
    let mut meta = Meta::new("fit-utility", None);
    let corpus = load(&a.corpus, &mut meta)?;
    let class = user_class(a.class);
    let (hist, fit) = fit_class_utility(&corpus, class, a.bins)
        .with_context(|| format!("fitting utility for {}", class.name()))?;
    write_json(&a.out, &meta, &FitReport::new(class, &hist, &fit))
}

/// Accepts a bare coefficient object or a fit-utility report.
fn read_params(path: &Path, meta: &mut Meta) -> Result<UtilityParams> {
    meta.add_input(path)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = value.get("raw").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .with_context(|| format!("{} must hold numbers b, a1, a2, c1, c2", path.display()))
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut meta = Meta::new("simulate", Some(a.seed));
    let (high, low) = if a.reference {
        (
            reference_params(UserClass::HighIq),
            reference_params(UserClass::LowIq),
        )
    } else {
        match (&a.params_high, &a.params_low) {
            (Some(h), Some(l)) => (read_params(h, &mut meta)?, read_params(l, &mut meta)?),
            _ => bail!("--params-high and --params-low are required without --reference"),
        }
    };
    let mix = Mix {
        high: a.mix_high,
        low: a.mix_low,
    };
    let run = run_simulation(&high, &low, a.m, a.s, a.seed, mix)?;

    let mut w = csv_writer(&a.out, &meta)?;
    w.write_record(["song", "slot", "x", "class"])?;
    for e in &run.events {
        w.write_record([
            e.song.to_string(),
            e.slot.to_string(),
            e.x.to_string(),
            e.class.name().to_string(),
        ])?;
    }
    w.flush()?;

    if let Some(path) = &a.density_out {
        let mut w = csv_writer(path, &meta)?;
        w.write_record(["class", "bin_lo", "bin_hi", "density", "count"])?;
        for class in [UserClass::HighIq, UserClass::LowIq] {
            let hist = match class_conditional_density(&run, class, a.density_bins) {
                Ok(h) => h,
                Err(e) => {
                    eprintln!("warning: {}: {e}", class.name());
                    continue;
                }
            };
            for j in 0..hist.bins() {
                w.write_record([
                    class.name().to_string(),
                    hist.edges[j].to_string(),
                    hist.edges[j + 1].to_string(),
                    hist.densities[j].to_string(),
                    hist.counts[j].to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Coefficient {
    predictor: String,
    mean: f64,
    ci_low: f64,
    ci_high: f64,
}

#[derive(Serialize)]
struct EvalRow {
    predictors: Vec<String>,
    #[serde(flatten)]
    evaluation: Evaluation,
}

#[derive(Serialize)]
struct PredictReport {
    labeled_users: usize,
    super_experts: usize,
    normal_experts: usize,
    predictors: Vec<String>,
    n_boot: usize,
    bootstrap_redraws: usize,
    coefficients: Vec<Coefficient>,
    evaluation: EvalRow,
    incremental: Vec<EvalRow>,
    baselines: Vec<EvalRow>,
}

fn names(fs: &[Feature]) -> Vec<String> {
    fs.iter().map(|f| f.name().to_string()).collect()
}

fn eval_row(data: &LabeledFeatures, fs: &[Feature], a: &PredictArgs) -> Result<EvalRow> {
    let x = data.matrix(fs)?;
    let evaluation = evaluate(&x, &data.outcomes(), a.splits, a.train_frac, a.seed)?;
    Ok(EvalRow {
        predictors: names(fs),
        evaluation,
    })
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let mut meta = Meta::new("predict", Some(a.seed));
    let corpus = load(&a.corpus, &mut meta)?;
    let features = Feature::parse_list(&a.features)?;
    if features.is_empty() {
        bail!("--features is empty");
    }
    if !(a.train_frac > 0.0 && a.train_frac < 1.0) {
        bail!("--train-frac must lie strictly between 0 and 1");
    }
    let uses_graph = features
        .iter()
        .any(|f| matches!(f, Feature::Pagerank | Feature::InDegree));
    let model = build_idf(&corpus)?;
    let ctx = ValueContext::new(&corpus, Some(&model));
    let data = labeled_features(&ctx, uses_graph || !a.no_baselines)?;
    let y = data.outcomes();

    let x = data.matrix(&features)?;
    let boot = fit_logit_bootstrap(&x, &y, a.boot, a.seed)?;
    let coefficients = std::iter::once("intercept".to_string())
        .chain(names(&features))
        .enumerate()
        .map(|(j, predictor)| Coefficient {
            predictor,
            mean: boot.mean[j],
            ci_low: boot.ci_low[j],
            ci_high: boot.ci_high[j],
        })
        .collect();

    let evaluation = eval_row(&data, &features, a)?;
    let mut incremental = Vec::new();
    if !a.no_incremental {
        for k in (1..features.len()).rev() {
            incremental.push(eval_row(&data, &features[..k], a)?);
        }
    }
    let mut baselines = Vec::new();
    if !a.no_baselines {
        for f in [Feature::Pagerank, Feature::InDegree] {
            baselines.push(eval_row(&data, &[f], a)?);
        }
    }
    let supers = y.iter().filter(|&&v| v == 1).count();
    let report = PredictReport {
        labeled_users: y.len(),
        super_experts: supers,
        normal_experts: y.len() - supers,
        predictors: names(&features),
        n_boot: boot.n_boot,
        bootstrap_redraws: boot.redraws,
        coefficients,
        evaluation,
        incremental,
        baselines,
    };
    write_json(&a.out, &meta, &report)
}

#[derive(Serialize)]
struct CountSummary {
    users: usize,
    songs: usize,
    segments: usize,
    annotations: usize,
    edits: usize,
    follow_edges: usize,
}

#[derive(Serialize)]
struct DistributionSummary {
    name: &'static str,
    mean: f64,
    max: usize,
    zeros: usize,
}

#[derive(Serialize)]
struct CurveSummary {
    bins: usize,
    means: Vec<Option<f64>>,
    /// Both end bins exceed the smallest interior bin mean.
    u_shape: Option<bool>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitOutcome {
    Fit {
        class: UserClass,
        n_events: usize,
        raw: UtilityParams,
        effective: EffectiveParams,
        residual: f64,
    },
    Failed {
        class: UserClass,
        error: String,
    },
}

#[derive(Serialize)]
struct Report {
    counts: CountSummary,
    distributions: Vec<DistributionSummary>,
    vocabulary_size: usize,
    max_idf: Option<f64>,
    mean_song_coverage: Option<f64>,
    annotation_iq_curve: CurveSummary,
    utility_fits: Vec<FitOutcome>,
    expert_labels: LabelSummary,
}

#[derive(Serialize)]
#[serde(untagged)]
enum LabelSummary {
    Labeled { labeled_users: usize },
    Failed { error: String },
}

fn u_shape(means: &[Option<f64>]) -> Option<bool> {
    let n = means.len();
    if n < 3 {
        return None;
    }
    let first = means[0]?;
    let last = means[n - 1]?;
    let interior_min = means[1..n - 1]
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !interior_min.is_finite() {
        return None;
    }
    Some(first > interior_min && last > interior_min)
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut meta = Meta::new("report", Some(a.seed));
    let corpus = load(&a.corpus, &mut meta)?;
    if a.bins == 0 {
        bail!("--bins must be at least 1");
    }
    let (users, songs, segments, annotations, edits) = corpus.counts();

    let distributions = [
        ("annotations_per_user", CountKey::AnnotationsPerUser),
        ("annotations_per_song", CountKey::AnnotationsPerSong),
        ("edits_per_annotation", CountKey::EditsPerAnnotation),
    ]
    .into_iter()
    .map(|(name, key)| {
        let d = corpus.count_distribution(key);
        let total: usize = d.iter().map(|(_, f)| f).sum();
        let sum: usize = d.iter().map(|(v, f)| v * f).sum();
        DistributionSummary {
            name,
            mean: if total == 0 {
                0.0
            } else {
                sum as f64 / total as f64
            },
            max: d.last().map_or(0, |(v, _)| *v),
            zeros: d.iter().find(|(v, _)| *v == 0).map_or(0, |(_, f)| *f),
        }
    })
    .collect();

    let model = build_idf(&corpus).ok();
    let max_idf = model.as_ref().and_then(|m| {
        m.iter_df()
            .map(|(w, _)| m.idf(w).unwrap_or(0.0))
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    });
    let coverages: Vec<f64> = (0..songs)
        .filter(|&s| !corpus.song_annotations(s).is_empty())
        .filter_map(|s| song_coverage(&corpus, s).ok().map(|c| c.coverage))
        .collect();

    let ctx = ValueContext::new(&corpus, None);
    let events = rank_events(&corpus, RankOptions::default());
    let curve = curve_vs_proportional_rank(&events, &ctx, EventValue::ActorIq, a.bins, None);
    let means = curve.means();

    let utility_fits = [UserClass::HighIq, UserClass::LowIq]
        .into_iter()
        .map(|class| match fit_class_utility(&corpus, class, a.bins) {
            Ok((hist, fit)) => FitOutcome::Fit {
                class,
                n_events: hist.counts.iter().sum(),
                raw: fit.params,
                effective: fit.effective,
                residual: fit.residual,
            },
            Err(e) => FitOutcome::Failed {
                class,
                error: e.to_string(),
            },
        })
        .collect();

    let report = Report {
        counts: CountSummary {
            users,
            songs,
            segments,
            annotations,
            edits,
            follow_edges: corpus.social_edges().len(),
        },
        distributions,
        vocabulary_size: model.as_ref().map_or(0, |m| m.vocabulary_size()),
        max_idf,
        mean_song_coverage: annodyn::stats::mean(&coverages),
        annotation_iq_curve: CurveSummary {
            bins: a.bins,
            u_shape: u_shape(&means),
            means,
        },
        utility_fits,
        expert_labels: match annodyn::expertise::build_labels(&corpus) {
            Ok(l) => LabelSummary::Labeled {
                labeled_users: l.len(),
            },
            Err(e) => LabelSummary::Failed {
                error: e.to_string(),
            },
        },
    };
    write_json(&a.out, &meta, &report)
}
