//! Writes a synthetic corpus as JSONL to stdout.
//!
//! `cargo run --example synth_jsonl -- [seed] > corpus.jsonl`

use annodyn::synthetic::{generate, to_jsonl, SyntheticConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let cfg = SyntheticConfig {
        seed,
        ..Default::default()
    };
    print!("{}", to_jsonl(&generate(&cfg)));
}
