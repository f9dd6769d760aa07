//! Episode logs: one JSON object per line.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use stackel_core::bridge::EpisodeRecord;

#[derive(Debug, thiserror::Error)]
pub enum EpisodeLogError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

pub fn episode_line(rec: &EpisodeRecord) -> String {
    let mut s = serde_json::to_string(rec).expect("record serializes");
    s.push('\n');
    s
}

pub fn episodes_to_jsonl(records: &[EpisodeRecord]) -> String {
    records.iter().map(episode_line).collect()
}

/// Parses log text; `path` only labels errors.
pub fn parse_episodes(text: &str, path: &str) -> Result<Vec<EpisodeRecord>, EpisodeLogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EpisodeLogError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_episodes(path: &Path) -> Result<Vec<EpisodeRecord>, EpisodeLogError> {
    let text = std::fs::read_to_string(path).map_err(|source| EpisodeLogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_episodes(&text, &path.display().to_string())
}

pub fn write_episodes(records: &[EpisodeRecord], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, episodes_to_jsonl(records))
}

/// Appends one record and syncs it to disk before returning.
pub fn append_episode(rec: &EpisodeRecord, path: &Path) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(episode_line(rec).as_bytes())?;
    f.sync_all()
}
