//! Content metrics for annotations and lyrics: quality tags, annotation
//! length, lyric header stripping, annotation coverage, document frequencies
//! and the originality score.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::html::{self, Token};
use crate::stats;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("lyrics are empty after removing headers")]
    EmptyLyrics,
    #[error("text has no tokens known to the originality model")]
    NoKnownTokens,
    #[error("corpus has no songs")]
    NoSongs,
}

/// Tag names that mark rich annotation content.
pub const DEFAULT_QUALITY_TAGS: [&str; 8] = [
    "a",
    "img",
    "iframe",
    "blockquote",
    "twitter-widget",
    "ul",
    "ol",
    "embedly-embed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagCountMode {
    /// Every opening tag instance counts.
    #[default]
    Occurrences,
    /// Each distinct tag name counts once.
    Unique,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityTagSet {
    tags: BTreeSet<String>,
}

impl Default for QualityTagSet {
    fn default() -> Self {
        Self {
            tags: DEFAULT_QUALITY_TAGS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl QualityTagSet {
    /// A set with no tags; build it up with [`QualityTagSet::with_tag`].
    pub fn empty() -> Self {
        Self {
            tags: BTreeSet::new(),
        }
    }

    pub fn with_tag(mut self, name: &str) -> Self {
        self.tags.insert(name.to_ascii_lowercase());
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tags.contains(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    pub fn count(&self, body_html: &str, mode: TagCountMode) -> usize {
        let names = html::Tokenizer::new(body_html).filter_map(|t| match t {
            Token::StartTag { name, .. } if self.contains(&name) => Some(name),
            _ => None,
        });
        match mode {
            TagCountMode::Occurrences => names.count(),
            TagCountMode::Unique => names.collect::<HashSet<_>>().len(),
        }
    }
}

/// Number of quality tags in an annotation body using the default tag set.
pub fn quality_tag_count(body_html: &str, mode: TagCountMode) -> usize {
    QualityTagSet::default().count(body_html, mode)
}

/// Character count of the visible text of an annotation body.
pub fn annotation_length(body_html: &str) -> usize {
    html::text_content(body_html).chars().count()
}

fn is_header_line(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 2 && t.starts_with('[') && t.ends_with(']')
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes bracketed header lines such as `[Verse 1: ...]` and normalizes
/// whitespace in what remains.
pub fn strip_headers(raw_lyrics: &str) -> String {
    let kept: Vec<&str> = raw_lyrics.lines().filter(|l| !is_header_line(l)).collect();
    normalize_whitespace(&kept.join("\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Annotated characters `A`.
    pub covered_chars: usize,
    /// Characters available for annotation `L`.
    pub total_chars: usize,
    /// `min(A / L, 1)`.
    pub coverage: f64,
    /// Indices of segments with no exact occurrence in the lyrics.
    pub unmatched: Vec<usize>,
}

/// Fraction of header-stripped lyric characters covered by annotated
/// segments.
///
/// Each segment covers every non-overlapping occurrence of its normalized text
/// in the normalized lyrics, so an annotated chorus also covers its repeats.
/// Positions covered by several segments count once. A segment that cannot be
/// located contributes its own length (the total stays capped at `L`) and is
/// listed in [`CoverageResult::unmatched`].
pub fn annotation_coverage<S: AsRef<str>>(
    raw_lyrics: &str,
    segments: &[S],
) -> Result<CoverageResult, MetricsError> {
    let lyrics = strip_headers(raw_lyrics);
    if lyrics.is_empty() {
        return Err(MetricsError::EmptyLyrics);
    }
    let byte_to_char: Vec<usize> = {
        let mut map = vec![0usize; lyrics.len() + 1];
        let mut ci = 0;
        for (bi, ch) in lyrics.char_indices() {
            for slot in &mut map[bi..bi + ch.len_utf8()] {
                *slot = ci;
            }
            ci += 1;
        }
        map[lyrics.len()] = ci;
        map
    };
    let total = byte_to_char[lyrics.len()];
    let mut covered = vec![false; total];
    let mut unmatched = Vec::new();
    let mut unmatched_chars = 0usize;
    for (i, seg) in segments.iter().enumerate() {
        let needle = strip_headers(seg.as_ref());
        if needle.is_empty() {
            continue;
        }
        let mut found = false;
        for (start, m) in lyrics.match_indices(needle.as_str()) {
            found = true;
            let (a, b) = (byte_to_char[start], byte_to_char[start + m.len()]);
            covered[a..b].iter_mut().for_each(|c| *c = true);
        }
        if !found {
            unmatched.push(i);
            unmatched_chars += needle.chars().count();
        }
    }
    let a = (covered.iter().filter(|&&c| c).count() + unmatched_chars).min(total);
    Ok(CoverageResult {
        covered_chars: a,
        total_chars: total,
        coverage: (a as f64 / total as f64).min(1.0),
        unmatched,
    })
}

/// Coverage of one corpus song by the segments that carry an annotation.
pub fn song_coverage(corpus: &Corpus, song: usize) -> Result<CoverageResult, MetricsError> {
    let texts: Vec<&str> = corpus
        .song_segments(song)
        .iter()
        .filter(|&&s| corpus.segment_annotation(s).is_some())
        .map(|&s| corpus.segments()[s].segment_text.as_str())
        .collect();
    annotation_coverage(&corpus.songs()[song].raw_lyrics, &texts)
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '\u{02bc}')
}

/// Word tokens used for document frequencies.
///
/// Headers are removed, text is lowercased and split on anything that is not
/// alphanumeric. An apostrophe directly after a letter or digit stays in the
/// token (`don't`, `adjustin'`); leading apostrophes are dropped. Curly
/// apostrophes are folded to `'`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in strip_headers(text).chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            cur.push(c);
        } else if is_apostrophe(c) && cur.chars().last().is_some_and(char::is_alphanumeric) {
            cur.push('\'');
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

fn unique_tokens(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

/// Corpus-wide document frequencies with songs as documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalityModel {
    n_songs: usize,
    df: BTreeMap<String, u32>,
}

impl OriginalityModel {
    pub fn from_documents<'a>(
        docs: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, MetricsError> {
        let mut n_songs = 0usize;
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        for doc in docs {
            n_songs += 1;
            for tok in unique_tokens(doc) {
                *df.entry(tok).or_insert(0) += 1;
            }
        }
        if n_songs == 0 {
            return Err(MetricsError::NoSongs);
        }
        Ok(Self { n_songs, df })
    }

    pub fn n_songs(&self) -> usize {
        self.n_songs
    }

    pub fn vocabulary_size(&self) -> usize {
        self.df.len()
    }

    pub fn df(&self, word: &str) -> Option<u32> {
        self.df.get(word).copied()
    }

    /// `ln(N / df(w))`, or `None` for words never seen.
    pub fn idf(&self, word: &str) -> Option<f64> {
        self.df(word)
            .map(|df| (self.n_songs as f64 / df as f64).ln())
    }

    pub fn iter_df(&self) -> impl Iterator<Item = (&str, u32)> {
        self.df.iter().map(|(w, &d)| (w.as_str(), d))
    }

    /// Originality of a lyric: `(p60 + p75 + p90) / 3` over the idf values of
    /// its unique known tokens. Unknown tokens are skipped.
    pub fn originality(&self, lyric_text: &str) -> Result<f64, MetricsError> {
        let mut idfs: Vec<f64> = unique_tokens(lyric_text)
            .iter()
            .filter_map(|w| self.idf(w))
            .collect();
        stats::upper_l_estimator(&mut idfs).ok_or(MetricsError::NoKnownTokens)
    }
}

/// Document frequencies over every song's header-stripped lyrics.
///
/// idf uses the natural log. Under base 10 no word in a corpus of 223,257
/// songs could score above `log10(223257)`, yet scores of 8.06 are observed
/// at that size:
///
/// ```
/// use annodyn::textmetrics::OriginalityModel;
///
/// assert!(8.06 > 223_257f64.log10());
/// let m = OriginalityModel::from_documents(["a b", "a c", "d", "e"]).unwrap();
/// assert!((m.idf("a").unwrap() - 2f64.ln()).abs() <= 1e-12);
/// ```
pub fn build_idf(corpus: &Corpus) -> Result<OriginalityModel, MetricsError> {
    OriginalityModel::from_documents(corpus.songs().iter().map(|s| s.raw_lyrics.as_str()))
}

/// Originality of a lyric under a fitted model.
pub fn originality(lyric_text: &str, model: &OriginalityModel) -> Result<f64, MetricsError> {
    model.originality(lyric_text)
}
