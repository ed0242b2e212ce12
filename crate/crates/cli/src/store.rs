//! Event-sourced session persistence: one append-only JSON-lines file per
//! session under `<data_dir>/sessions/`.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xshuffle_core::experiment::{
    write_response_log, Advance, Schedule, Session, SessionError, SessionEvent, SessionState,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    Created { agent_id: String, schedule: Schedule },
    Event { payload: SessionEvent },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub seq: u64,
    /// Server clock when the entry was accepted, for audit.
    pub received_at_ms: u64,
    #[serde(flatten)]
    pub entry: LogEntry,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

struct Slot {
    session: Session,
    file: File,
    seq: u64,
}

impl Slot {
    fn append(&mut self, entry: LogEntry) -> Result<(), StoreError> {
        let line = LogLine {
            seq: self.seq,
            received_at_ms: now_ms(),
            entry,
        };
        let mut bytes = serde_json::to_vec(&line)?;
        bytes.push(b'\n');
        self.file.write_all(&bytes)?;
        self.file.sync_data()?;
        self.seq += 1;
        Ok(())
    }
}

/// Sessions keyed by id. Writes to one session are serialized by its own
/// lock; each accepted event is appended and synced before the in-memory
/// state changes, so a crash loses at most the event being written.
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
}

impl SessionStore {
    /// Opens `data_dir`, replaying every session log found there.
    pub fn open(data_dir: &Path) -> Result<Self, StoreError> {
        let dir = data_dir.join("sessions");
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let (session, seq) = replay_file(&path)?;
            let file = OpenOptions::new().append(true).open(&path)?;
            sessions.insert(session.session_id.clone(), Arc::new(Mutex::new(Slot { session, file, seq })));
        }
        Ok(Self {
            dir,
            sessions: RwLock::new(sessions),
        })
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, StoreError> {
        self.sessions
            .read()
            .expect("session map lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSession(id.to_string()))
    }

    pub fn create(&self, session_id: &str, agent_id: &str, schedule: Schedule) -> Result<Session, StoreError> {
        let file = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(self.path_for(session_id))?;
        let session = Session::new(session_id, agent_id, schedule.clone());
        let mut slot = Slot {
            session: session.clone(),
            file,
            seq: 0,
        };
        slot.append(LogEntry::Created {
            agent_id: agent_id.to_string(),
            schedule,
        })?;
        self.sessions
            .write()
            .expect("session map lock poisoned")
            .insert(session_id.to_string(), Arc::new(Mutex::new(slot)));
        Ok(session)
    }

    /// Applies `event`, persisting it first. Rejected events are not logged.
    pub fn apply(&self, id: &str, event: SessionEvent) -> Result<Advance, StoreError> {
        Ok(self.apply_if(id, event, |_| true)?.expect("guard always passes"))
    }

    /// Like [`apply`](Self::apply) but only when `guard` accepts the current
    /// state; returns `None` otherwise.
    pub fn apply_if(
        &self,
        id: &str,
        event: SessionEvent,
        guard: impl FnOnce(&Session) -> bool,
    ) -> Result<Option<Advance>, StoreError> {
        let slot = self.slot(id)?;
        let mut slot = slot.lock().expect("session lock poisoned");
        if !guard(&slot.session) {
            return Ok(None);
        }
        let mut next = slot.session.clone();
        let adv = next.advance(event.clone())?;
        slot.append(LogEntry::Event { payload: event })?;
        slot.session = next;
        Ok(Some(adv))
    }

    /// Applies the confirmation timeout if the session still sits on the
    /// confirmation screen for the trial at `cursor`.
    pub fn expire_confirmation(&self, id: &str, cursor: usize) -> Result<Option<Advance>, StoreError> {
        self.apply_if(id, SessionEvent::Timeout, |s| {
            s.state == SessionState::Confirmation && s.cursor == cursor
        })
    }

    pub fn snapshot(&self, id: &str) -> Result<Session, StoreError> {
        Ok(self.slot(id)?.lock().expect("session lock poisoned").session.clone())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map lock poisoned").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// The session's responses as a JSON-lines response log.
    pub fn export(&self, id: &str) -> Result<Vec<u8>, StoreError> {
        let session = self.snapshot(id)?;
        let mut out = Vec::new();
        write_response_log(&mut out, &session.responses)?;
        Ok(out)
    }
}

/// Rebuilds one session from its log. A trailing partial line (a write cut
/// short by a crash) is dropped and the file truncated back to the last
/// complete entry.
pub fn replay_file(path: &Path) -> Result<(Session, u64), StoreError> {
    let bytes = fs::read(path)?;
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(complete as u64)?;
    }
    let corrupt = |line: usize, message: String| StoreError::Corrupt {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut session: Option<Session> = None;
    let mut seq = 0u64;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    for (i, raw) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
        if raw.is_empty() {
            continue;
        }
        let line: LogLine = serde_json::from_slice(raw).map_err(|e| corrupt(i + 1, e.to_string()))?;
        if line.seq != seq {
            return Err(corrupt(i + 1, format!("sequence {} where {seq} was expected", line.seq)));
        }
        match (line.entry, session.as_mut()) {
            (LogEntry::Created { agent_id, schedule }, None) => {
                session = Some(Session::new(id.clone(), agent_id, schedule));
            }
            (LogEntry::Event { payload }, Some(s)) => {
                s.advance(payload).map_err(|e| corrupt(i + 1, e.to_string()))?;
            }
            (LogEntry::Created { .. }, Some(_)) => return Err(corrupt(i + 1, "second creation entry".into())),
            (LogEntry::Event { .. }, None) => return Err(corrupt(i + 1, "event before creation".into())),
        }
        seq += 1;
    }
    session
        .map(|s| (s, seq))
        .ok_or_else(|| corrupt(1, "log has no creation entry".into()))
}
