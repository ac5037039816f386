//! On-disk store for the user registry and finished sessions.
//!
//! Layout under the store root:
//!
//! ```text
//! registry.json
//! registry.lock
//! sessions/<session_id>/transcript.jsonl
//! sessions/<session_id>/report.json      (when feedback was reached)
//! sessions/<session_id>/survey.json
//! ```
//!
//! Every file is written to a temporary name and renamed into place, so a
//! session directory is either complete or absent and the registry is never
//! half-written. Writers serialize on an exclusive lock of `registry.lock`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{FeedbackReport, Transcript};

const REGISTRY_FILE: &str = "registry.json";
const LOCK_FILE: &str = "registry.lock";
const SESSIONS_DIR: &str = "sessions";
const TRANSCRIPT_FILE: &str = "transcript.jsonl";
const REPORT_FILE: &str = "report.json";
const SURVEY_FILE: &str = "survey.json";

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is corrupt: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("refusing to record an empty transcript")]
    EmptyTranscript,
    #[error("session {0} already exists")]
    SessionExists(String),
    #[error("invalid session id {0:?}")]
    InvalidSessionId(String),
    #[error("session {0} not found")]
    SessionNotFound(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistenceError + '_ {
    move |source| PersistenceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Registry key for a name: trimmed and case-folded. Blank names have no key.
pub fn fold_name(name: &str) -> Option<String> {
    let folded = name.trim().to_lowercase();
    (!folded.is_empty()).then_some(folded)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyAnswer {
    pub question: String,
    pub answer: String,
    pub timestamp: DateTime<Utc>,
}

/// Survey outcome for one session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub answers: Vec<SurveyAnswer>,
    /// Overall 1–5 rating, absent when it could not be parsed.
    pub rating: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    /// Case-folded registry key.
    pub name: String,
    /// Name as the user last gave it.
    pub display_name: String,
    pub sessions: Vec<String>,
    pub last_rating: Option<u8>,
    pub survey_answers: Vec<SurveyAnswer>,
}

impl UserProfile {
    pub fn new(display_name: &str) -> Option<Self> {
        Some(Self {
            name: fold_name(display_name)?,
            display_name: display_name.trim().to_string(),
            sessions: Vec::new(),
            last_rating: None,
            survey_answers: Vec::new(),
        })
    }
}

/// Lookup of previously seen users by name.
pub trait KnownUsers {
    fn find_user(&self, name: &str) -> Option<UserProfile>;
}

/// In-memory registry of user profiles keyed by case-folded name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRegistry {
    profiles: BTreeMap<String, UserProfile>,
}

impl UserRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, name: &str) -> Option<&UserProfile> {
        self.profiles.get(&fold_name(name)?)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> impl Iterator<Item = &UserProfile> {
        self.profiles.values()
    }

    /// Inserts or replaces a profile under its own key.
    pub fn upsert(&mut self, profile: UserProfile) {
        self.profiles.insert(profile.name.clone(), profile);
    }

    /// Adds a session to the named user's profile, creating it if needed.
    pub fn apply_session(&mut self, display_name: &str, session_id: &str, survey: &SurveyRecord) {
        let Some(key) = fold_name(display_name) else {
            return;
        };
        let profile = self
            .profiles
            .entry(key)
            .or_insert_with(|| UserProfile::new(display_name).expect("non-blank name"));
        profile.display_name = display_name.trim().to_string();
        profile.sessions.push(session_id.to_string());
        if let Some(rating) = survey.rating {
            profile.last_rating = Some(rating);
        }
        profile.survey_answers.extend(survey.answers.iter().cloned());
    }

    pub fn load(path: &Path) -> Result<Self, PersistenceError> {
        match fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| PersistenceError::Corrupt {
                path: path.to_path_buf(),
                reason: e.to_string(),
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(io_err(path)(e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), PersistenceError> {
        let json = serde_json::to_string_pretty(self).expect("registry serializes");
        write_atomic(path, json.as_bytes())
    }
}

impl KnownUsers for UserRegistry {
    fn find_user(&self, name: &str) -> Option<UserProfile> {
        self.lookup(name).cloned()
    }
}

fn unique_suffix() -> String {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos());
    format!("{}-{nanos}", std::process::id())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PersistenceError> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", unique_suffix()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

fn valid_session_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Artifacts of one stored session.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSession {
    pub transcript: Transcript,
    pub report: Option<FeedbackReport>,
    pub survey: SurveyRecord,
}

/// Durable registry plus session archive rooted at one directory.
#[derive(Debug)]
pub struct RegistryStore {
    root: PathBuf,
    registry: Mutex<UserRegistry>,
}

impl RegistryStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, PersistenceError> {
        let root = root.into();
        let sessions = root.join(SESSIONS_DIR);
        fs::create_dir_all(&sessions).map_err(io_err(&sessions))?;
        let registry = UserRegistry::load(&root.join(REGISTRY_FILE))?;
        Ok(Self {
            root,
            registry: Mutex::new(registry),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn registry_path(&self) -> PathBuf {
        self.root.join(REGISTRY_FILE)
    }

    pub fn session_dir(&self, session_id: &str) -> PathBuf {
        self.root.join(SESSIONS_DIR).join(session_id)
    }

    /// Re-reads the committed registry, picking up writes from other processes.
    pub fn refresh(&self) -> Result<(), PersistenceError> {
        let fresh = UserRegistry::load(&self.registry_path())?;
        *self.registry.lock().expect("registry mutex poisoned") = fresh;
        Ok(())
    }

    pub fn snapshot(&self) -> UserRegistry {
        self.registry.lock().expect("registry mutex poisoned").clone()
    }

    /// Case-insensitive exact lookup against the last committed registry.
    pub fn lookup(&self, name: &str) -> Option<UserProfile> {
        if let Err(err) = self.refresh() {
            tracing::warn!(error = %err, "registry refresh failed; using cached copy");
        }
        self.registry
            .lock()
            .expect("registry mutex poisoned")
            .lookup(name)
            .cloned()
    }

    /// Persists a finished session and, when a name is known, updates that
    /// user's profile. Returns the session id.
    pub fn record_session(
        &self,
        name: Option<&str>,
        transcript: &Transcript,
        report: Option<&FeedbackReport>,
        survey: &SurveyRecord,
    ) -> Result<String, PersistenceError> {
        if transcript.is_empty() {
            return Err(PersistenceError::EmptyTranscript);
        }
        let id = transcript.session_id.clone();
        if !valid_session_id(&id) {
            return Err(PersistenceError::InvalidSessionId(id));
        }

        let mut guard = self.registry.lock().expect("registry mutex poisoned");
        let lock_path = self.root.join(LOCK_FILE);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_err(&lock_path))?;
        lock.lock().map_err(io_err(&lock_path))?;

        self.write_session_dir(&id, transcript, report, survey)?;

        if let Some(name) = name.filter(|n| fold_name(n).is_some()) {
            let mut updated = UserRegistry::load(&self.registry_path())?;
            updated.apply_session(name, &id, survey);
            updated.save(&self.registry_path())?;
            *guard = updated;
        }
        drop(lock);
        Ok(id)
    }

    fn write_session_dir(
        &self,
        id: &str,
        transcript: &Transcript,
        report: Option<&FeedbackReport>,
        survey: &SurveyRecord,
    ) -> Result<(), PersistenceError> {
        let target = self.session_dir(id);
        if target.exists() {
            return Err(PersistenceError::SessionExists(id.to_string()));
        }
        let tmp = self
            .root
            .join(SESSIONS_DIR)
            .join(format!(".tmp-{id}-{}", unique_suffix()));
        let result = (|| {
            fs::create_dir(&tmp).map_err(io_err(&tmp))?;
            let file = tmp.join(TRANSCRIPT_FILE);
            fs::write(&file, transcript.to_jsonl()).map_err(io_err(&file))?;
            if let Some(report) = report {
                let file = tmp.join(REPORT_FILE);
                fs::write(&file, report.to_json_pretty()).map_err(io_err(&file))?;
            }
            let file = tmp.join(SURVEY_FILE);
            let json = serde_json::to_string_pretty(survey).expect("survey serializes");
            fs::write(&file, json).map_err(io_err(&file))?;
            File::open(&tmp)
                .and_then(|dir| dir.sync_all())
                .map_err(io_err(&tmp))?;
            fs::rename(&tmp, &target).map_err(io_err(&target))
        })();
        if result.is_err() {
            let _ = fs::remove_dir_all(&tmp);
        }
        result
    }

    pub fn load_session(&self, id: &str) -> Result<StoredSession, PersistenceError> {
        if !valid_session_id(id) {
            return Err(PersistenceError::InvalidSessionId(id.to_string()));
        }
        let dir = self.session_dir(id);
        if !dir.is_dir() {
            return Err(PersistenceError::SessionNotFound(id.to_string()));
        }
        let corrupt = |path: &Path, reason: String| PersistenceError::Corrupt {
            path: path.to_path_buf(),
            reason,
        };

        let path = dir.join(TRANSCRIPT_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let transcript = Transcript::from_jsonl(id, &text).map_err(|e| corrupt(&path, e.to_string()))?;

        let path = dir.join(REPORT_FILE);
        let report = if path.exists() {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            Some(serde_json::from_str(&text).map_err(|e| corrupt(&path, e.to_string()))?)
        } else {
            None
        };

        let path = dir.join(SURVEY_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let survey = serde_json::from_str(&text).map_err(|e| corrupt(&path, e.to_string()))?;

        Ok(StoredSession {
            transcript,
            report,
            survey,
        })
    }
}

impl KnownUsers for RegistryStore {
    fn find_user(&self, name: &str) -> Option<UserProfile> {
        self.lookup(name)
    }
}
