//! Temporal-order analytics: time ranks, proportional-rank curves, edit
//! strata and lifespan cumulative averages.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Timestamp};
use crate::seeds;
use crate::stats;
use crate::textmetrics::{self, OriginalityModel, QualityTagSet, TagCountMode};

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Annotation,
    Edit,
}

/// Corpus record behind an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventSource {
    Annotation(usize),
    Edit(usize),
}

/// An annotation ranked within its song, or an action ranked within an
/// annotation's edit chain (rank 0 is the annotation itself).
///
/// Actor and subject are corpus indexes: the subject is a song for
/// annotation events and an annotation for edit events.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedEvent {
    pub kind: EventKind,
    pub source: EventSource,
    pub actor: usize,
    pub subject: usize,
    pub time_rank: u32,
    /// Annotations on the song (`n`) or edits on the annotation (`k`).
    pub subject_total: u32,
    /// `(R - 1) / (n - 1)` for annotations when `n >= 2`; `R / k` for edit
    /// chains when `k >= 1`.
    pub proportional_rank: Option<f64>,
    pub timestamp: Timestamp,
}

impl RankedEvent {
    pub fn actor_id<'c>(&self, corpus: &'c Corpus) -> &'c str {
        &corpus.users()[self.actor].user_id
    }

    pub fn subject_id<'c>(&self, corpus: &'c Corpus) -> &'c str {
        match self.kind {
            EventKind::Annotation => &corpus.songs()[self.subject].song_id,
            EventKind::Edit => &corpus.annotations()[self.subject].annotation_id,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RankOptions {
    /// Drop edits whose author also made the immediately preceding action on
    /// the same annotation; ranks are reassigned afterwards.
    pub collapse_self_edits: bool,
}

/// Ranks every annotation within its song and every edit within its
/// annotation. Annotation events come first (songs in id order), then edit
/// chains (annotations in id order).
pub fn rank_events(corpus: &Corpus, options: RankOptions) -> Vec<RankedEvent> {
    let mut events = Vec::with_capacity(corpus.annotations().len() * 2 + corpus.edits().len());
    for song in 0..corpus.songs().len() {
        let seq = corpus.song_annotations(song);
        let n = seq.len() as u32;
        for (pos, &a) in seq.iter().enumerate() {
            let r = pos as u32 + 1;
            events.push(RankedEvent {
                kind: EventKind::Annotation,
                source: EventSource::Annotation(a),
                actor: corpus.annotation_author(a),
                subject: song,
                time_rank: r,
                subject_total: n,
                proportional_rank: (n >= 2).then(|| (r - 1) as f64 / (n - 1) as f64),
                timestamp: corpus.annotations()[a].created_at,
            });
        }
    }
    for a in 0..corpus.annotations().len() {
        let mut chain: Vec<EventSource> = vec![EventSource::Annotation(a)];
        let mut prev_author = corpus.annotation_author(a);
        for &e in corpus.annotation_edits(a) {
            let author = corpus.edit_author(e);
            if !(options.collapse_self_edits && author == prev_author) {
                chain.push(EventSource::Edit(e));
            }
            prev_author = author;
        }
        let k = chain.len() as u32 - 1;
        for (r, src) in chain.into_iter().enumerate() {
            let (actor, timestamp) = match src {
                EventSource::Annotation(i) => (
                    corpus.annotation_author(i),
                    corpus.annotations()[i].created_at,
                ),
                EventSource::Edit(i) => (corpus.edit_author(i), corpus.edits()[i].created_at),
            };
            events.push(RankedEvent {
                kind: EventKind::Edit,
                source: src,
                actor,
                subject: a,
                time_rank: r as u32,
                subject_total: k,
                proportional_rank: (k >= 1).then(|| r as f64 / k as f64),
                timestamp,
            });
        }
    }
    events
}

/// Per-event quantity plotted against time rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventValue {
    ActorIq,
    ActorTotalAnnotations,
    QualityTags,
    Length,
    SegmentOriginality,
}

/// Lookups needed to turn events into values.
pub struct ValueContext<'a> {
    corpus: &'a Corpus,
    tags: QualityTagSet,
    tag_mode: TagCountMode,
    segment_originality: Option<Vec<Option<f64>>>,
    song_originality: Option<Vec<Option<f64>>>,
}

impl<'a> ValueContext<'a> {
    /// Originality-based values are unavailable (`None`) without a model.
    pub fn new(corpus: &'a Corpus, model: Option<&OriginalityModel>) -> Self {
        let segment_originality = model.map(|m| {
            corpus
                .segments()
                .par_iter()
                .map(|s| m.originality(&s.segment_text).ok())
                .collect()
        });
        let song_originality = model.map(|m| {
            corpus
                .songs()
                .par_iter()
                .map(|s| m.originality(&s.raw_lyrics).ok())
                .collect()
        });
        Self {
            corpus,
            tags: QualityTagSet::default(),
            tag_mode: TagCountMode::Occurrences,
            segment_originality,
            song_originality,
        }
    }

    pub fn with_tags(mut self, tags: QualityTagSet, mode: TagCountMode) -> Self {
        self.tags = tags;
        self.tag_mode = mode;
        self
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    fn body(&self, src: EventSource) -> &'a str {
        match src {
            EventSource::Annotation(a) => &self.corpus.annotations()[a].body_html,
            EventSource::Edit(e) => &self.corpus.edits()[e].body_html,
        }
    }

    fn annotation_of(&self, src: EventSource) -> usize {
        match src {
            EventSource::Annotation(a) => a,
            EventSource::Edit(e) => self.corpus.edit_annotation(e),
        }
    }

    pub fn quality_tags(&self, src: EventSource) -> f64 {
        self.tags.count(self.body(src), self.tag_mode) as f64
    }

    pub fn length(&self, src: EventSource) -> f64 {
        textmetrics::annotation_length(self.body(src)) as f64
    }

    pub fn segment_originality(&self, annotation: usize) -> Option<f64> {
        let seg = self.corpus.annotation_segment(annotation);
        self.segment_originality.as_ref()?[seg]
    }

    pub fn song_originality(&self, song: usize) -> Option<f64> {
        self.song_originality.as_ref()?[song]
    }

    pub fn value(&self, event: &RankedEvent, value: EventValue) -> Option<f64> {
        let c = self.corpus;
        match value {
            EventValue::ActorIq => Some(c.users()[event.actor].iq as f64),
            EventValue::ActorTotalAnnotations => Some(c.user_annotations(event.actor).len() as f64),
            EventValue::QualityTags => Some(self.quality_tags(event.source)),
            EventValue::Length => Some(self.length(event.source)),
            EventValue::SegmentOriginality => {
                self.segment_originality(self.annotation_of(event.source))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub n_boot: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub mean: Option<f64>,
    pub count: usize,
    pub boot_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub bins: Vec<Bin>,
}

impl BinnedCurve {
    pub fn means(&self) -> Vec<Option<f64>> {
        self.bins.iter().map(|b| b.mean).collect()
    }

    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Bin of `q` among `bins` equal-width bins over `[0, 1]`.
///
/// Bins are closed on the right: bin 0 is `[0, w]`, bin `j > 0` is
/// `(j w, (j + 1) w]`. Products within 1e-9 of an edge snap to it so that
/// rational ranks such as `0.3` land deterministically.
pub fn unit_bin(q: f64, bins: usize) -> usize {
    let t = q * bins as f64;
    let snapped = if (t - t.round()).abs() < 1e-9 {
        t.round()
    } else {
        t
    };
    (snapped.ceil() as isize - 1).clamp(0, bins as isize - 1) as usize
}

fn summarize(mut values: Vec<f64>, lo: f64, hi: f64, boot: Option<(Bootstrap, u64)>) -> Bin {
    // Sorting makes the sum, and the resampling, independent of input order.
    values.sort_by(f64::total_cmp);
    let count = values.len();
    let mean = stats::mean(&values);
    let boot_std = match boot {
        Some((b, stream_id)) if count > 0 && b.n_boot > 0 => {
            let mut rng = seeds::stream(b.seed, stream_id);
            let reps: Vec<f64> = (0..b.n_boot)
                .map(|_| {
                    (0..count)
                        .map(|_| values[rng.gen_range(0..count)])
                        .sum::<f64>()
                        / count as f64
                })
                .collect();
            Some(stats::sample_std(&reps))
        }
        _ => None,
    };
    Bin {
        lo,
        hi,
        mean,
        count,
        boot_std,
    }
}

/// Per-bin means of `(q, value)` points over `[0, 1]`. Empty bins report no
/// mean. With `boot`, each bin gets the standard deviation of its mean over
/// resampled points.
pub fn proportional_curve(
    points: &[(f64, f64)],
    bins: usize,
    boot: Option<Bootstrap>,
) -> BinnedCurve {
    assert!(bins >= 1, "need at least one bin");
    let mut per_bin = vec![Vec::new(); bins];
    for &(q, v) in points {
        per_bin[unit_bin(q, bins)].push(v);
    }
    let w = 1.0 / bins as f64;
    BinnedCurve {
        bins: per_bin
            .into_par_iter()
            .enumerate()
            .map(|(j, vals)| {
                summarize(
                    vals,
                    j as f64 * w,
                    (j + 1) as f64 * w,
                    boot.map(|b| (b, j as u64)),
                )
            })
            .collect(),
    }
}

/// Mean of `value` against proportional time rank over annotation events with
/// a defined rank. Events whose value is undefined are skipped.
pub fn curve_vs_proportional_rank(
    events: &[RankedEvent],
    ctx: &ValueContext<'_>,
    value: EventValue,
    bins: usize,
    boot: Option<Bootstrap>,
) -> BinnedCurve {
    let points: Vec<(f64, f64)> = events
        .iter()
        .filter(|e| e.kind == EventKind::Annotation)
        .filter_map(|e| Some((e.proportional_rank?, ctx.value(e, value)?)))
        .collect();
    proportional_curve(&points, bins, boot)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditStrata {
    /// Curve `k` covers annotations with exactly `k` edits, over ranks `0..=k`.
    pub curves: Vec<BinnedCurve>,
    pub annotations_per_stratum: Vec<usize>,
    /// Annotations with more edits than the largest stratum.
    pub beyond_max: usize,
}

/// Mean of `value` against edit time rank, one curve per total edit count.
pub fn edit_strata_curves(
    events: &[RankedEvent],
    value: impl Fn(&RankedEvent) -> Option<f64>,
    max_total_edits: u32,
    boot: Option<Bootstrap>,
) -> EditStrata {
    let strata = max_total_edits as usize + 1;
    let mut values: Vec<Vec<Vec<f64>>> = (0..strata).map(|k| vec![Vec::new(); k + 1]).collect();
    let mut annotations_per_stratum = vec![0usize; strata];
    let mut beyond_max = 0usize;
    for e in events.iter().filter(|e| e.kind == EventKind::Edit) {
        let k = e.subject_total as usize;
        if e.time_rank == 0 {
            if k < strata {
                annotations_per_stratum[k] += 1;
            } else {
                beyond_max += 1;
            }
        }
        if k < strata {
            if let Some(v) = value(e) {
                values[k][e.time_rank as usize].push(v);
            }
        }
    }
    let curves = values
        .into_iter()
        .enumerate()
        .map(|(k, ranks)| BinnedCurve {
            bins: ranks
                .into_iter()
                .enumerate()
                .map(|(r, vals)| {
                    let stream_id = ((k as u64) << 32) | r as u64;
                    summarize(vals, r as f64, r as f64, boot.map(|b| (b, stream_id)))
                })
                .collect(),
        })
        .collect();
    EditStrata {
        curves,
        annotations_per_stratum,
        beyond_max,
    }
}

/// User groups for lifespan curves, by snapshot IQ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IqStratum {
    /// IQ of at least 100,000.
    HighIq,
    /// IQ between 10,000 and 50,000 inclusive.
    MidIq,
    All,
}

impl IqStratum {
    pub const ALL: [IqStratum; 3] = [IqStratum::HighIq, IqStratum::MidIq, IqStratum::All];

    pub fn contains(self, iq: u64) -> bool {
        match self {
            IqStratum::HighIq => iq >= 100_000,
            IqStratum::MidIq => (10_000..=50_000).contains(&iq),
            IqStratum::All => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IqStratum::HighIq => "high_iq",
            IqStratum::MidIq => "mid_iq",
            IqStratum::All => "all",
        }
    }
}

/// Per-event quantity averaged over a user's lifespan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifespanValue {
    /// 1 if the annotation was its song's first, else 0.
    FirstAnnotationOnSong,
    /// 1 if the edit was its annotation's first, else 0.
    FirstEditOnAnnotation,
    QualityTags,
    Length,
    SegmentOriginality,
    SongOriginality,
}

impl LifespanValue {
    pub fn uses_edits(self) -> bool {
        matches!(self, LifespanValue::FirstEditOnAnnotation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanConfig {
    pub horizon_days: u32,
    /// Users need at least this many events of the value's family.
    pub min_events: usize,
    /// Spacing of the reported day grid.
    pub step_days: u32,
    pub n_boot: usize,
    pub seed: u64,
}

impl Default for LifespanConfig {
    fn default() -> Self {
        Self {
            horizon_days: 1500,
            min_events: 10,
            step_days: 10,
            n_boot: 100,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifespanCurve {
    pub stratum: IqStratum,
    pub users: usize,
    /// Points at day offsets `0, step, 2 step, ..., horizon`; `lo == hi` is
    /// the day. `None` when the stratum has no qualifying users.
    pub curve: Option<BinnedCurve>,
}

/// Cumulative running sums of one user's values at each grid day.
struct UserTrack {
    sums: Vec<f64>,
    counts: Vec<u32>,
}

fn lifespan_grid(cfg: &LifespanConfig) -> Vec<u32> {
    let step = cfg.step_days.max(1);
    let mut grid: Vec<u32> = (0..=cfg.horizon_days / step).map(|i| i * step).collect();
    if *grid.last().unwrap() != cfg.horizon_days {
        grid.push(cfg.horizon_days);
    }
    grid
}

fn user_track(
    ctx: &ValueContext<'_>,
    user: usize,
    value: LifespanValue,
    grid: &[u32],
    cfg: &LifespanConfig,
) -> Option<UserTrack> {
    let c = ctx.corpus();
    let items: Vec<(Timestamp, Option<f64>)> = if value.uses_edits() {
        c.user_edits(user)
            .iter()
            .map(|&e| {
                let v = (c.edit_rank(e) == 1) as u8 as f64;
                (c.edits()[e].created_at, Some(v))
            })
            .collect()
    } else {
        c.user_annotations(user)
            .iter()
            .map(|&a| {
                let src = EventSource::Annotation(a);
                let v = match value {
                    LifespanValue::FirstAnnotationOnSong => {
                        Some((c.annotation_rank(a) == 1) as u8 as f64)
                    }
                    LifespanValue::QualityTags => Some(ctx.quality_tags(src)),
                    LifespanValue::Length => Some(ctx.length(src)),
                    LifespanValue::SegmentOriginality => ctx.segment_originality(a),
                    LifespanValue::SongOriginality => ctx.song_originality(c.annotation_song(a)),
                    LifespanValue::FirstEditOnAnnotation => unreachable!(),
                };
                (c.annotations()[a].created_at, v)
            })
            .collect()
    };
    if items.len() < cfg.min_events {
        return None;
    }
    let t0 = items[0].0;
    let mut sums = vec![0.0; grid.len()];
    let mut counts = vec![0u32; grid.len()];
    // Events are in time order; sweep the grid once.
    let mut g = 0;
    let (mut s, mut n) = (0.0, 0u32);
    for (t, v) in &items {
        let day = (t - t0).div_euclid(SECONDS_PER_DAY);
        if day > cfg.horizon_days as i64 {
            break;
        }
        while g < grid.len() && (grid[g] as i64) < day {
            sums[g] = s;
            counts[g] = n;
            g += 1;
        }
        if let Some(v) = v {
            s += v;
            n += 1;
        }
    }
    for i in g..grid.len() {
        sums[i] = s;
        counts[i] = n;
    }
    Some(UserTrack { sums, counts })
}

fn pooled(tracks: &[&UserTrack], points: usize) -> (Vec<f64>, Vec<u64>) {
    let mut s = vec![0.0; points];
    let mut n = vec![0u64; points];
    for t in tracks {
        for i in 0..points {
            s[i] += t.sums[i];
            n[i] += t.counts[i] as u64;
        }
    }
    (s, n)
}

/// Cumulative averages over each user's first `horizon_days`, pooled over the
/// events of every qualifying user in a stratum. Bands come from resampling
/// users with replacement.
pub fn lifespan_curves(
    ctx: &ValueContext<'_>,
    value: LifespanValue,
    cfg: &LifespanConfig,
) -> Vec<LifespanCurve> {
    let c = ctx.corpus();
    let grid = lifespan_grid(cfg);
    let tracks: Vec<Option<UserTrack>> = (0..c.users().len())
        .into_par_iter()
        .map(|u| user_track(ctx, u, value, &grid, cfg))
        .collect();

    IqStratum::ALL
        .iter()
        .enumerate()
        .map(|(si, &stratum)| {
            let members: Vec<&UserTrack> = tracks
                .iter()
                .enumerate()
                .filter(|(u, _)| stratum.contains(c.users()[*u].iq))
                .filter_map(|(_, t)| t.as_ref())
                .collect();
            if members.is_empty() {
                return LifespanCurve {
                    stratum,
                    users: 0,
                    curve: None,
                };
            }
            let (s, n) = pooled(&members, grid.len());
            let replicates: Vec<Vec<Option<f64>>> = (0..cfg.n_boot)
                .into_par_iter()
                .map(|r| {
                    let mut rng = seeds::stream(cfg.seed, ((si as u64) << 32) | r as u64);
                    let sample: Vec<&UserTrack> = (0..members.len())
                        .map(|_| members[rng.gen_range(0..members.len())])
                        .collect();
                    let (bs, bn) = pooled(&sample, grid.len());
                    bs.iter()
                        .zip(&bn)
                        .map(|(&x, &k)| (k > 0).then(|| x / k as f64))
                        .collect()
                })
                .collect();
            let bins = grid
                .iter()
                .enumerate()
                .map(|(i, &day)| {
                    let reps: Vec<f64> = replicates.iter().filter_map(|r| r[i]).collect();
                    Bin {
                        lo: day as f64,
                        hi: day as f64,
                        mean: (n[i] > 0).then(|| s[i] / n[i] as f64),
                        count: n[i] as usize,
                        boot_std: (!reps.is_empty()).then(|| stats::sample_std(&reps)),
                    }
                })
                .collect();
            LifespanCurve {
                stratum,
                users: members.len(),
                curve: Some(BinnedCurve { bins }),
            }
        })
        .collect()
}
