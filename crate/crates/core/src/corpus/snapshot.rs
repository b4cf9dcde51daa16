use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Annotation, Corpus, CorpusError, Edit, LyricSegment, SocialEdge, Song, User};

pub const SNAPSHOT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"ANNODYN\0";

/// Provenance stored alongside a persisted corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub tool_version: String,
    /// Hex SHA-256 of the ingested source file.
    pub input_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    meta: SnapshotMeta,
    users: Vec<User>,
    songs: Vec<Song>,
    segments: Vec<LyricSegment>,
    annotations: Vec<Annotation>,
    edits: Vec<Edit>,
    social_edges: Vec<SocialEdge>,
}

impl Corpus {
    /// Writes a binary snapshot that [`Corpus::load`] restores with indexes
    /// rebuilt.
    pub fn save(&self, path: impl AsRef<Path>, meta: &SnapshotMeta) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let snapshot = Snapshot {
            version: SNAPSHOT_VERSION,
            meta: meta.clone(),
            users: self.users.clone(),
            songs: self.songs.clone(),
            segments: self.segments.clone(),
            annotations: self.annotations.clone(),
            edits: self.edits.clone(),
            social_edges: self.social_edges.clone(),
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        out.write_all(MAGIC).map_err(io_err)?;
        bincode::serialize_into(&mut out, &snapshot)
            .map_err(|e| CorpusError::Snapshot(e.to_string()))?;
        out.flush().map_err(io_err)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Corpus, SnapshotMeta), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut input = BufReader::new(File::open(path).map_err(io_err)?);
        let mut magic = [0u8; 8];
        std::io::Read::read_exact(&mut input, &mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(CorpusError::Snapshot(format!(
                "{} is not a corpus snapshot",
                path.display()
            )));
        }
        let snap: Snapshot = bincode::deserialize_from(&mut input)
            .map_err(|e| CorpusError::Snapshot(e.to_string()))?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(CorpusError::Snapshot(format!(
                "unsupported snapshot version {}",
                snap.version
            )));
        }
        let mut records = Vec::new();
        records.extend(snap.users.into_iter().map(super::Record::User));
        records.extend(snap.songs.into_iter().map(super::Record::Song));
        records.extend(snap.segments.into_iter().map(super::Record::Segment));
        records.extend(snap.annotations.into_iter().map(super::Record::Annotation));
        records.extend(snap.edits.into_iter().map(super::Record::Edit));
        records.extend(snap.social_edges.into_iter().map(super::Record::SocialEdge));
        Ok((Corpus::from_records(records)?, snap.meta))
    }
}
