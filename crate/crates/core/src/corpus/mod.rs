//! Canonical data model for an annotation corpus.
//!
//! A [`Corpus`] is built once from JSON-lines records (see [`ingest`]) and is
//! immutable afterwards. All derived indexes (per-song annotation sequences,
//! per-user event sequences, per-annotation edit sequences) are computed at
//! construction time and ordered by `(created_at, id)`.

mod ingest;
mod snapshot;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use ingest::{ingest, ingest_reader, ingest_str};
pub use snapshot::{SnapshotMeta, SNAPSHOT_VERSION};

/// Integer UTC seconds.
pub type Timestamp = i64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: String,
    /// Reputation snapshot taken at collection time.
    pub iq: u64,
    #[serde(default)]
    pub registered_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Song {
    pub song_id: String,
    pub raw_lyrics: String,
    /// Absent when the platform does not list a view count for the song.
    #[serde(default)]
    pub view_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyricSegment {
    pub segment_id: String,
    pub song_id: String,
    pub segment_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotation_id: String,
    pub segment_id: String,
    pub author_id: String,
    pub created_at: Timestamp,
    pub body_html: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub edit_id: String,
    pub annotation_id: String,
    pub author_id: String,
    pub created_at: Timestamp,
    /// Full post-edit content of the annotation.
    pub body_html: String,
}

/// Directed "following" relationship.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SocialEdge {
    pub follower_id: String,
    pub followee_id: String,
}

/// One line of the canonical JSON-lines format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    User(User),
    Song(Song),
    Segment(LyricSegment),
    Annotation(Annotation),
    Edit(Edit),
    SocialEdge(SocialEdge),
}

/// Which per-entity count to tabulate in [`Corpus::count_distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKey {
    AnnotationsPerUser,
    AnnotationsPerSong,
    EditsPerAnnotation,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("integrity check failed ({} issue(s)): {}", .0.len(), format_issues(.0))]
    Integrity(Vec<IntegrityIssue>),
    #[error("snapshot error: {0}")]
    Snapshot(String),
}

fn format_issues(issues: &[IntegrityIssue]) -> String {
    const SHOWN: usize = 20;
    let mut parts: Vec<String> = issues.iter().take(SHOWN).map(|i| i.to_string()).collect();
    if issues.len() > SHOWN {
        parts.push(format!("... and {} more", issues.len() - SHOWN));
    }
    parts.join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntegrityIssue {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{kind} `{id}` references unknown {target} `{missing}`")]
    DanglingReference {
        kind: &'static str,
        id: String,
        target: &'static str,
        missing: String,
    },
    #[error("segment `{segment_id}` has more than one annotation: `{first}`, `{second}`")]
    SegmentAnnotatedTwice {
        segment_id: String,
        first: String,
        second: String,
    },
    #[error("segment `{segment_id}` has empty text")]
    EmptySegment { segment_id: String },
    #[error("edit `{edit_id}` at {edit_time} predates its annotation `{annotation_id}` at {annotation_time}")]
    EditBeforeAnnotation {
        edit_id: String,
        annotation_id: String,
        edit_time: Timestamp,
        annotation_time: Timestamp,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
}

/// Validated, indexed corpus. Immutable after construction.
///
/// Entity vectors are sorted by id, so two corpora built from the same
/// records in any line order compare equal.
#[derive(Debug, Clone)]
pub struct Corpus {
    users: Vec<User>,
    songs: Vec<Song>,
    segments: Vec<LyricSegment>,
    annotations: Vec<Annotation>,
    edits: Vec<Edit>,
    social_edges: Vec<SocialEdge>,
    index: Index,
}

#[derive(Debug, Clone, Default)]
struct Index {
    user: HashMap<String, usize>,
    song: HashMap<String, usize>,
    segment: HashMap<String, usize>,
    annotation: HashMap<String, usize>,
    segment_song: Vec<usize>,
    segment_annotation: Vec<Option<usize>>,
    annotation_segment: Vec<usize>,
    annotation_song: Vec<usize>,
    annotation_author: Vec<usize>,
    edit_annotation: Vec<usize>,
    edit_author: Vec<usize>,
    song_segments: Vec<Vec<usize>>,
    song_annotations: Vec<Vec<usize>>,
    annotation_edits: Vec<Vec<usize>>,
    user_annotations: Vec<Vec<usize>>,
    user_edits: Vec<Vec<usize>>,
    /// 1-based position of each annotation within its song.
    annotation_rank: Vec<u32>,
    /// 1-based position of each edit within its annotation.
    edit_rank: Vec<u32>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users
            && self.songs == other.songs
            && self.segments == other.segments
            && self.annotations == other.annotations
            && self.edits == other.edits
            && self.social_edges == other.social_edges
    }
}

impl Default for Corpus {
    fn default() -> Self {
        Self::from_records(Vec::new()).expect("empty corpus is valid")
    }
}

impl Corpus {
    /// Validates records and builds all indexes.
    ///
    /// Every violation is collected before returning, so one error lists all
    /// offending ids.
    pub fn from_records(records: Vec<Record>) -> Result<Self, CorpusError> {
        let mut users = Vec::new();
        let mut songs = Vec::new();
        let mut segments = Vec::new();
        let mut annotations = Vec::new();
        let mut edits = Vec::new();
        let mut social_edges = Vec::new();
        for record in records {
            match record {
                Record::User(u) => users.push(u),
                Record::Song(s) => songs.push(s),
                Record::Segment(s) => segments.push(s),
                Record::Annotation(a) => annotations.push(a),
                Record::Edit(e) => edits.push(e),
                Record::SocialEdge(e) => social_edges.push(e),
            }
        }
        users.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        songs.sort_by(|a, b| a.song_id.cmp(&b.song_id));
        segments.sort_by(|a, b| a.segment_id.cmp(&b.segment_id));
        annotations.sort_by(|a, b| a.annotation_id.cmp(&b.annotation_id));
        edits.sort_by(|a, b| a.edit_id.cmp(&b.edit_id));
        social_edges.retain(|e| e.follower_id != e.followee_id);
        social_edges.sort();
        social_edges.dedup();

        let mut issues = Vec::new();
        let user = id_map(
            "user",
            users.iter().map(|u| u.user_id.as_str()),
            &mut issues,
        );
        let song = id_map(
            "song",
            songs.iter().map(|s| s.song_id.as_str()),
            &mut issues,
        );
        let segment = id_map(
            "segment",
            segments.iter().map(|s| s.segment_id.as_str()),
            &mut issues,
        );
        let annotation = id_map(
            "annotation",
            annotations.iter().map(|a| a.annotation_id.as_str()),
            &mut issues,
        );
        id_map(
            "edit",
            edits.iter().map(|e| e.edit_id.as_str()),
            &mut issues,
        );

        let lookup = |map: &HashMap<String, usize>,
                      kind: &'static str,
                      id: &str,
                      target: &'static str,
                      missing: &str,
                      issues: &mut Vec<IntegrityIssue>| {
            match map.get(missing) {
                Some(&i) => i,
                None => {
                    issues.push(IntegrityIssue::DanglingReference {
                        kind,
                        id: id.to_string(),
                        target,
                        missing: missing.to_string(),
                    });
                    usize::MAX
                }
            }
        };

        let segment_song: Vec<usize> = segments
            .iter()
            .map(|s| {
                if s.segment_text.trim().is_empty() {
                    issues.push(IntegrityIssue::EmptySegment {
                        segment_id: s.segment_id.clone(),
                    });
                }
                lookup(
                    &song,
                    "segment",
                    &s.segment_id,
                    "song",
                    &s.song_id,
                    &mut issues,
                )
            })
            .collect();
        let annotation_segment: Vec<usize> = annotations
            .iter()
            .map(|a| {
                lookup(
                    &segment,
                    "annotation",
                    &a.annotation_id,
                    "segment",
                    &a.segment_id,
                    &mut issues,
                )
            })
            .collect();
        let annotation_author: Vec<usize> = annotations
            .iter()
            .map(|a| {
                lookup(
                    &user,
                    "annotation",
                    &a.annotation_id,
                    "user",
                    &a.author_id,
                    &mut issues,
                )
            })
            .collect();
        let edit_annotation: Vec<usize> = edits
            .iter()
            .map(|e| {
                lookup(
                    &annotation,
                    "edit",
                    &e.edit_id,
                    "annotation",
                    &e.annotation_id,
                    &mut issues,
                )
            })
            .collect();
        let edit_author: Vec<usize> = edits
            .iter()
            .map(|e| lookup(&user, "edit", &e.edit_id, "user", &e.author_id, &mut issues))
            .collect();

        let mut segment_annotation: Vec<Option<usize>> = vec![None; segments.len()];
        for (ai, &si) in annotation_segment.iter().enumerate() {
            if si == usize::MAX {
                continue;
            }
            match segment_annotation[si] {
                Some(first) => issues.push(IntegrityIssue::SegmentAnnotatedTwice {
                    segment_id: segments[si].segment_id.clone(),
                    first: annotations[first].annotation_id.clone(),
                    second: annotations[ai].annotation_id.clone(),
                }),
                None => segment_annotation[si] = Some(ai),
            }
        }
        for (e, &ai) in edits.iter().zip(&edit_annotation) {
            if ai != usize::MAX && e.created_at < annotations[ai].created_at {
                issues.push(IntegrityIssue::EditBeforeAnnotation {
                    edit_id: e.edit_id.clone(),
                    annotation_id: e.annotation_id.clone(),
                    edit_time: e.created_at,
                    annotation_time: annotations[ai].created_at,
                });
            }
        }
        if !issues.is_empty() {
            return Err(CorpusError::Integrity(issues));
        }

        let annotation_song: Vec<usize> = annotation_segment
            .iter()
            .map(|&s| segment_song[s])
            .collect();

        let mut song_segments = vec![Vec::new(); songs.len()];
        for (si, &song_idx) in segment_song.iter().enumerate() {
            song_segments[song_idx].push(si);
        }
        let mut song_annotations = vec![Vec::new(); songs.len()];
        let mut user_annotations = vec![Vec::new(); users.len()];
        for ai in 0..annotations.len() {
            song_annotations[annotation_song[ai]].push(ai);
            user_annotations[annotation_author[ai]].push(ai);
        }
        let mut annotation_edits = vec![Vec::new(); annotations.len()];
        let mut user_edits = vec![Vec::new(); users.len()];
        for ei in 0..edits.len() {
            annotation_edits[edit_annotation[ei]].push(ei);
            user_edits[edit_author[ei]].push(ei);
        }
        // Ids are unique and sorted, so sorting by (time, index) is the
        // (time, id) order.
        let by_annotation_time = |v: &mut Vec<usize>| {
            v.sort_by_key(|&i| (annotations[i].created_at, i));
        };
        let by_edit_time = |v: &mut Vec<usize>| {
            v.sort_by_key(|&i| (edits[i].created_at, i));
        };
        song_annotations.iter_mut().for_each(by_annotation_time);
        user_annotations.iter_mut().for_each(by_annotation_time);
        annotation_edits.iter_mut().for_each(by_edit_time);
        user_edits.iter_mut().for_each(by_edit_time);

        let mut annotation_rank = vec![0u32; annotations.len()];
        for seq in &song_annotations {
            for (pos, &ai) in seq.iter().enumerate() {
                annotation_rank[ai] = pos as u32 + 1;
            }
        }
        let mut edit_rank = vec![0u32; edits.len()];
        for seq in &annotation_edits {
            for (pos, &ei) in seq.iter().enumerate() {
                edit_rank[ei] = pos as u32 + 1;
            }
        }

        Ok(Self {
            users,
            songs,
            segments,
            annotations,
            edits,
            social_edges,
            index: Index {
                user,
                song,
                segment,
                annotation,
                segment_song,
                segment_annotation,
                annotation_segment,
                annotation_song,
                annotation_author,
                edit_annotation,
                edit_author,
                song_segments,
                song_annotations,
                annotation_edits,
                user_annotations,
                user_edits,
                annotation_rank,
                edit_rank,
            },
        })
    }

    /// All records in canonical order (users, songs, segments, annotations,
    /// edits, social edges).
    pub fn to_records(&self) -> Vec<Record> {
        let mut out = Vec::with_capacity(self.record_count());
        out.extend(self.users.iter().cloned().map(Record::User));
        out.extend(self.songs.iter().cloned().map(Record::Song));
        out.extend(self.segments.iter().cloned().map(Record::Segment));
        out.extend(self.annotations.iter().cloned().map(Record::Annotation));
        out.extend(self.edits.iter().cloned().map(Record::Edit));
        out.extend(self.social_edges.iter().cloned().map(Record::SocialEdge));
        out
    }

    fn record_count(&self) -> usize {
        self.users.len()
            + self.songs.len()
            + self.segments.len()
            + self.annotations.len()
            + self.edits.len()
            + self.social_edges.len()
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }
    pub fn songs(&self) -> &[Song] {
        &self.songs
    }
    pub fn segments(&self) -> &[LyricSegment] {
        &self.segments
    }
    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }
    pub fn edits(&self) -> &[Edit] {
        &self.edits
    }
    pub fn social_edges(&self) -> &[SocialEdge] {
        &self.social_edges
    }

    /// `(users, songs, segments, annotations, edits)`.
    pub fn counts(&self) -> (usize, usize, usize, usize, usize) {
        (
            self.users.len(),
            self.songs.len(),
            self.segments.len(),
            self.annotations.len(),
            self.edits.len(),
        )
    }

    pub fn user_index(&self, user_id: &str) -> Option<usize> {
        self.index.user.get(user_id).copied()
    }
    pub fn song_index(&self, song_id: &str) -> Option<usize> {
        self.index.song.get(song_id).copied()
    }
    pub fn segment_index(&self, segment_id: &str) -> Option<usize> {
        self.index.segment.get(segment_id).copied()
    }
    pub fn annotation_index(&self, annotation_id: &str) -> Option<usize> {
        self.index.annotation.get(annotation_id).copied()
    }

    pub fn segment_song(&self, segment: usize) -> usize {
        self.index.segment_song[segment]
    }
    pub fn segment_annotation(&self, segment: usize) -> Option<usize> {
        self.index.segment_annotation[segment]
    }
    pub fn annotation_segment(&self, annotation: usize) -> usize {
        self.index.annotation_segment[annotation]
    }
    pub fn annotation_song(&self, annotation: usize) -> usize {
        self.index.annotation_song[annotation]
    }
    pub fn annotation_author(&self, annotation: usize) -> usize {
        self.index.annotation_author[annotation]
    }
    pub fn edit_annotation(&self, edit: usize) -> usize {
        self.index.edit_annotation[edit]
    }
    pub fn edit_author(&self, edit: usize) -> usize {
        self.index.edit_author[edit]
    }

    pub fn song_segments(&self, song: usize) -> &[usize] {
        &self.index.song_segments[song]
    }
    /// Annotations on a song in arrival order.
    pub fn song_annotations(&self, song: usize) -> &[usize] {
        &self.index.song_annotations[song]
    }
    /// Edits on an annotation in arrival order.
    pub fn annotation_edits(&self, annotation: usize) -> &[usize] {
        &self.index.annotation_edits[annotation]
    }
    /// A user's annotations in arrival order.
    pub fn user_annotations(&self, user: usize) -> &[usize] {
        &self.index.user_annotations[user]
    }
    /// A user's edits in arrival order.
    pub fn user_edits(&self, user: usize) -> &[usize] {
        &self.index.user_edits[user]
    }

    /// Time rank of an annotation within its song (1 = first).
    pub fn annotation_rank(&self, annotation: usize) -> u32 {
        self.index.annotation_rank[annotation]
    }
    /// Time rank of an edit within its annotation (1 = first edit; the
    /// annotation itself is rank 0).
    pub fn edit_rank(&self, edit: usize) -> u32 {
        self.index.edit_rank[edit]
    }

    /// Histogram of a per-entity count as `(value, frequency)` pairs sorted by
    /// value. Frequencies sum to the number of entities.
    pub fn count_distribution(&self, key: CountKey) -> Vec<(usize, usize)> {
        let counts: Box<dyn Iterator<Item = usize> + '_> = match key {
            CountKey::AnnotationsPerUser => {
                Box::new(self.index.user_annotations.iter().map(Vec::len))
            }
            CountKey::AnnotationsPerSong => {
                Box::new(self.index.song_annotations.iter().map(Vec::len))
            }
            CountKey::EditsPerAnnotation => {
                Box::new(self.index.annotation_edits.iter().map(Vec::len))
            }
        };
        let mut freq = std::collections::BTreeMap::new();
        for c in counts {
            *freq.entry(c).or_insert(0usize) += 1;
        }
        freq.into_iter().collect()
    }

    /// Splits `users` by IQ (ties broken by user id) and returns the bottom
    /// and top thirds, each of size `floor(n / 3)`. Both are ordered by
    /// ascending user index.
    pub fn iq_thirds(&self, users: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut sorted = users.to_vec();
        sorted.sort_by(|&a, &b| {
            let (ua, ub) = (&self.users[a], &self.users[b]);
            ua.iq.cmp(&ub.iq).then_with(|| ua.user_id.cmp(&ub.user_id))
        });
        let k = sorted.len() / 3;
        let mut low = sorted[..k].to_vec();
        let mut high = sorted[sorted.len() - k..].to_vec();
        low.sort_unstable();
        high.sort_unstable();
        (low, high)
    }
}

fn id_map<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
    issues: &mut Vec<IntegrityIssue>,
) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.to_string(), i).is_some() {
            issues.push(IntegrityIssue::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    map
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
