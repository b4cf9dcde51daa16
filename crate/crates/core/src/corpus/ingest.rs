use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::{Corpus, CorpusError, Record};

/// Reads a JSON-lines file. Blank lines are skipped; every other line must be
/// one [`Record`] with a `kind` discriminator.
pub fn ingest(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn ingest_str(text: &str) -> Result<Corpus, CorpusError> {
    ingest_reader(text.as_bytes())
}

pub fn ingest_reader<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: "<reader>".into(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(trimmed).map_err(|e| CorpusError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Corpus::from_records(records)
}
