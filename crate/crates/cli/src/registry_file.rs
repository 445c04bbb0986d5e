//! Registry persistence.
//!
//! A single JSON document `{version, players, history, checksum}` where
//! `checksum` is the SHA-256 (lowercase hex) of the compact serialization of
//! `{version, players, history}`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use postal_rps_core::federation::{MatchRecord, PlayerRecord, Registry};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace_file::digest_bytes;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RegistryFileError {
    #[error("registry file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt registry file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
}

#[derive(Serialize)]
struct Body<'a> {
    version: u32,
    players: &'a [PlayerRecord],
    history: &'a [MatchRecord],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u32,
    players: Vec<PlayerRecord>,
    history: Vec<MatchRecord>,
    checksum: String,
}

fn checksum(version: u32, registry_players: &[PlayerRecord], history: &[MatchRecord]) -> String {
    let body = Body {
        version,
        players: registry_players,
        history,
    };
    digest_bytes(&serde_json::to_vec(&body).expect("registry serializes"))
}

pub fn to_json(registry: &Registry) -> String {
    let doc = Document {
        version: FORMAT_VERSION,
        players: registry.players.clone(),
        history: registry.history.clone(),
        checksum: checksum(FORMAT_VERSION, &registry.players, &registry.history),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("registry serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Registry, String> {
    let doc: Document = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.version != FORMAT_VERSION {
        return Err(format!("unsupported version {}", doc.version));
    }
    if checksum(doc.version, &doc.players, &doc.history) != doc.checksum {
        return Err("checksum mismatch".into());
    }
    Ok(Registry {
        players: doc.players,
        history: doc.history,
    })
}

/// Writes to a sibling temp file and renames it into place.
pub fn save_registry(registry: &Registry, path: &Path) -> Result<(), RegistryFileError> {
    let io_err = |source| RegistryFileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, to_json(registry)).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn load_registry(path: &Path) -> Result<Registry, RegistryFileError> {
    let text = fs::read_to_string(path).map_err(|source| RegistryFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text).map_err(|reason| RegistryFileError::CorruptFile {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use postal_rps_core::federation::{MatchReport, MatchStatus};
    use postal_rps_core::protocol::GameRecord;
    use postal_rps_core::rules::{GameOutcome, Move};
    use postal_rps_core::MatchId;

    fn sample() -> Registry {
        let mut r = Registry::new();
        r.register_player("alice".into(), "Alice").unwrap();
        r.register_player("bob".into(), "Bob").unwrap();
        let games = (0..10)
            .map(|i| GameRecord {
                index: i,
                committer: if i % 2 == 0 { "alice".into() } else { "bob".into() },
                committer_move: Move::ROCK,
                responder_move: Move::SCISSORS,
                outcome: GameOutcome::FirstWins,
            })
            .collect();
        r.record_match(MatchReport {
            match_id: MatchId([3; 16]),
            player_a: "alice".into(),
            player_b: "bob".into(),
            games,
            status: MatchStatus::MatchComplete,
        })
        .unwrap();
        let _ = r.record_match(MatchReport {
            match_id: MatchId([4; 16]),
            player_a: "bob".into(),
            player_b: "alice".into(),
            games: vec![],
            status: MatchStatus::Aborted("SwapDetected".into()),
        });
        r
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.json");
        for r in [Registry::new(), sample()] {
            save_registry(&r, &path).unwrap();
            assert_eq!(load_registry(&path).unwrap(), r);
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.json");
        let text = to_json(&sample());
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_registry(&path), Err(RegistryFileError::CorruptFile { .. })));
    }

    #[test]
    fn edited_ranking_breaks_checksum() {
        let text = to_json(&sample()).replacen("\"ranking_halves\": 2", "\"ranking_halves\": 3", 1);
        assert_eq!(from_json(&text).unwrap_err(), "checksum mismatch");
    }

    #[test]
    fn unknown_fields_and_versions_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&Registry::new())).unwrap();
        v["extra"] = 1.into();
        assert!(from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&Registry::new())).unwrap();
        v["version"] = 2.into();
        assert!(from_json(&v.to_string()).unwrap_err().contains("version"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_registry(&dir.path().join("nope.json")),
            Err(RegistryFileError::Io { .. })
        ));
    }
}
