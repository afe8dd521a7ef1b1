//! Per-learner append-only event logs with a state snapshot beside each.
//!
//! Layout under the store root:
//!
//! ```text
//! sessions/<id>/events.jsonl   one Event per line, fsynced per append
//! sessions/<id>/snapshot.json  LearnerState after the last append
//! ```
//!
//! The log is authoritative; snapshots are rewritten atomically after each
//! append and are only used to cross-check a replay.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use qgen_core::quizengine::{replay, EstimatorConfig, Event, LearnerState, StateError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("session {session}: replay failed: {source}")]
    Replay {
        session: String,
        #[source]
        source: StateError,
    },
    #[error("session {0} already exists")]
    Exists(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Number of log events folded into `state`.
    pub events: usize,
    pub state: LearnerState,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

/// Open handle on one session's log.
#[derive(Debug)]
pub struct SessionLog {
    dir: PathBuf,
    file: File,
    events: usize,
}

/// A session recovered from disk.
#[derive(Debug)]
pub struct Recovered {
    pub id: String,
    pub state: LearnerState,
    pub events: Vec<Event>,
    pub log: SessionLog,
    /// False when a snapshot exists but disagrees with the replayed state.
    pub snapshot_consistent: bool,
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<SessionStore, StoreError> {
        let root = root.into();
        let sessions = root.join("sessions");
        fs::create_dir_all(&sessions).map_err(io_err(&sessions))?;
        Ok(SessionStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn create(&self, id: &str) -> Result<SessionLog, StoreError> {
        let dir = self.session_dir(id);
        match fs::create_dir(&dir) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::Exists(id.into())),
            Err(e) => return Err(io_err(&dir)(e)),
        }
        let path = dir.join("events.jsonl");
        let file = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        sync_dir(&self.root.join("sessions"))?;
        Ok(SessionLog { dir, file, events: 0 })
    }

    /// Replays every session log under the root, sorted by id.
    pub fn recover(&self, cfg: &EstimatorConfig) -> Result<Vec<Recovered>, StoreError> {
        let sessions = self.root.join("sessions");
        let mut ids: Vec<String> = fs::read_dir(&sessions)
            .map_err(io_err(&sessions))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        ids.sort();
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let dir = self.session_dir(&id);
            let events = read_log(&dir.join("events.jsonl"))?;
            if events.is_empty() {
                // created but never acknowledged
                continue;
            }
            let state = replay(&events, cfg).map_err(|source| StoreError::Replay {
                session: id.clone(),
                source,
            })?;
            let snapshot_consistent = match read_snapshot(&dir)? {
                Some(s) if s.events == events.len() => s.state == state,
                _ => true,
            };
            let path = dir.join("events.jsonl");
            let file = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
            out.push(Recovered {
                id,
                state,
                log: SessionLog {
                    dir,
                    file,
                    events: events.len(),
                },
                events,
                snapshot_consistent,
            });
        }
        Ok(out)
    }
}

impl SessionLog {
    pub fn len(&self) -> usize {
        self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events == 0
    }

    /// Appends events and syncs them to disk.
    pub fn append(&mut self, events: &[Event]) -> Result<(), StoreError> {
        let path = self.dir.join("events.jsonl");
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e).expect("events serialize");
            buf.push(b'\n');
        }
        self.file.write_all(&buf).map_err(io_err(&path))?;
        self.file.sync_data().map_err(io_err(&path))?;
        self.events += events.len();
        Ok(())
    }

    pub fn snapshot(&self, state: &LearnerState) -> Result<(), StoreError> {
        let snap = Snapshot {
            events: self.events,
            state: state.clone(),
        };
        let tmp = self.dir.join("snapshot.json.tmp");
        let dest = self.dir.join("snapshot.json");
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        serde_json::to_writer(&mut f, &snap).expect("snapshot serializes");
        f.sync_data().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &dest).map_err(io_err(&dest))?;
        Ok(())
    }
}

/// Reads a log. A final line without its newline is a write that was never
/// acknowledged; it is cut off so later appends start on a clean line.
pub fn read_log(path: &Path) -> Result<Vec<Event>, StoreError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = match text.rfind('\n') {
        Some(i) => i + 1,
        None => 0,
    };
    if complete < text.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        f.set_len(complete as u64).map_err(io_err(path))?;
        f.sync_data().map_err(io_err(path))?;
    }
    text[..complete]
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                path: path.display().to_string(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_snapshot(dir: &Path) -> Result<Option<Snapshot>, StoreError> {
    let path = dir.join("snapshot.json");
    match fs::read_to_string(&path) {
        Ok(t) => serde_json::from_str(&t).map(Some).map_err(|e| StoreError::Corrupt {
            path: path.display().to_string(),
            line: 1,
            message: e.to_string(),
        }),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(&path)(e)),
    }
}

fn sync_dir(dir: &Path) -> Result<(), StoreError> {
    File::open(dir).and_then(|d| d.sync_all()).map_err(io_err(dir))
}
