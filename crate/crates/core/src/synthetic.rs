//! Seeded generator of small but structurally realistic corpora, used by
//! tests and demos.
//!
//! Users carry a latent skill in `[0, 1]`. Skill drives IQ, the number of
//! quality tags, a preference for annotating songs early or late, and how
//! many followers a user attracts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Annotation, Edit, LyricSegment, Record, SocialEdge, Song, User};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub users: usize,
    pub songs: usize,
    pub segments_per_song: usize,
    pub vocabulary: usize,
    pub mean_edits: f64,
    pub follows_per_user: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            users: 60,
            songs: 150,
            segments_per_song: 12,
            vocabulary: 400,
            mean_edits: 2.5,
            follows_per_user: 4,
            seed: 1,
        }
    }
}

const TAGS: [&str; 5] = [
    "a href=\"https://example.org\"",
    "img src=\"x.png\"",
    "blockquote",
    "ul",
    "twitter-widget",
];

fn word(i: usize) -> String {
    const SYL: [&str; 12] = [
        "la", "ro", "mi", "ta", "ke", "zu", "no", "vi", "sa", "de", "po", "fy",
    ];
    let mut s = String::new();
    let mut k = i + 1;
    while k > 0 {
        s.push_str(SYL[k % SYL.len()]);
        k /= SYL.len();
    }
    s
}

/// Zipf-like index in `0..n`.
fn zipf(rng: &mut ChaCha8Rng, n: usize) -> usize {
    let u: f64 = rng.gen();
    ((n as f64).powf(u) - 1.0).floor().min(n as f64 - 1.0) as usize
}

fn weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut t = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        t -= w;
        if t < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn body(rng: &mut ChaCha8Rng, skill: f64) -> String {
    let mut html = String::from("<p>");
    let words = 5 + rng.gen_range(0..20);
    for w in 0..words {
        if w > 0 {
            html.push(' ');
        }
        html.push_str(&word(rng.gen_range(0..200)));
    }
    html.push_str("</p>");
    let mut lambda = 0.2 + 2.0 * skill;
    while rng.gen::<f64>() < lambda / (1.0 + lambda) {
        let tag = TAGS[rng.gen_range(0..TAGS.len())];
        let name = tag.split(' ').next().unwrap_or(tag);
        html.push_str(&format!("<{tag}>ref</{name}>"));
        lambda *= 0.6;
    }
    html
}

/// Generates a consistent record set. Output order is deterministic for a
/// given configuration.
pub fn generate(cfg: &SyntheticConfig) -> Vec<Record> {
    let mut rng = seeds::stream(cfg.seed, 0);
    let mut records = Vec::new();

    let skill: Vec<f64> = (0..cfg.users).map(|_| rng.gen()).collect();
    let activity: Vec<f64> = (0..cfg.users)
        .map(|u| (0.3 + skill[u]) * (1.0 + 3.0 * rng.gen::<f64>().powi(3)))
        .collect();
    for (u, &s) in skill.iter().enumerate() {
        let iq = (100.0 * 10f64.powf(3.5 * s + 0.3 * rng.gen::<f64>())) as u64;
        records.push(Record::User(User {
            user_id: format!("user{u:04}"),
            iq,
            registered_at: Some(0),
        }));
    }

    let year = 365 * 86_400;
    let mut next_edit = 0usize;
    for song in 0..cfg.songs {
        let mut srng = seeds::stream(cfg.seed, 1 + song as u64);
        let lines: Vec<String> = (0..cfg.segments_per_song)
            .map(|_| {
                let n = 3 + srng.gen_range(0..6);
                (0..n)
                    .map(|_| word(zipf(&mut srng, cfg.vocabulary)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let song_id = format!("song{song:04}");
        let lyrics = format!("[Verse 1]\n{}", lines.join("\n"));
        records.push(Record::Song(Song {
            song_id: song_id.clone(),
            raw_lyrics: lyrics,
            view_count: Some(srng.gen_range(100..100_000)),
        }));

        let m = cfg.segments_per_song.max(2);
        let mut t = srng.gen_range(0..3 * year) as i64;
        for (i, line) in lines.iter().enumerate() {
            let seg_id = format!("{song_id}-{i:02}");
            records.push(Record::Segment(LyricSegment {
                segment_id: seg_id.clone(),
                song_id: song_id.clone(),
                segment_text: line.clone(),
            }));
            // Skilled users favor the beginning and end of a song's life.
            let x = i as f64 / (m - 1) as f64;
            let edge = 4.0 * (x - 0.5) * (x - 0.5);
            let weights: Vec<f64> = (0..cfg.users)
                .map(|u| {
                    activity[u] * (skill[u] * (0.2 + 3.0 * edge) + (1.0 - skill[u]) * (1.2 - edge))
                })
                .collect();
            let author = weighted(&mut srng, &weights);
            t += 60 + srng.gen_range(0..(1 + 2 * 86_400 * (1 + author % 5) as i64));
            let ann_id = format!("ann-{seg_id}");
            records.push(Record::Annotation(Annotation {
                annotation_id: ann_id.clone(),
                segment_id: seg_id,
                author_id: format!("user{author:04}"),
                created_at: t,
                body_html: body(&mut srng, skill[author]),
            }));

            let mut te = t;
            while srng.gen::<f64>() < cfg.mean_edits / (1.0 + cfg.mean_edits) {
                let eweights: Vec<f64> = (0..cfg.users)
                    .map(|u| activity[u] * (0.5 + skill[u]))
                    .collect();
                let editor = weighted(&mut srng, &eweights);
                te += 30 + srng.gen_range(0..(1 + 86_400 * (1 + (cfg.users - editor) % 4) as i64));
                records.push(Record::Edit(Edit {
                    edit_id: format!("edit{next_edit:06}"),
                    annotation_id: ann_id.clone(),
                    author_id: format!("user{editor:04}"),
                    created_at: te,
                    body_html: body(&mut srng, skill[editor]),
                }));
                next_edit += 1;
            }
        }
    }

    let mut grng = seeds::stream(cfg.seed, u64::MAX);
    let pull: Vec<f64> = skill.iter().map(|s| 0.05 + s * s * s).collect();
    let mut edges = std::collections::BTreeSet::new();
    for u in 0..cfg.users {
        for _ in 0..cfg.follows_per_user {
            let v = weighted(&mut grng, &pull);
            if v != u {
                edges.insert((u, v));
            }
        }
    }
    for (u, v) in edges {
        records.push(Record::SocialEdge(SocialEdge {
            follower_id: format!("user{u:04}"),
            followee_id: format!("user{v:04}"),
        }));
    }
    records
}

/// One JSON object per line.
pub fn to_jsonl(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}
