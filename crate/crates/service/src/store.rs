//! One JSON file per user and per session, replaced atomically.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use adaptree_core::context::UserProfile;
use chrono::{DateTime, Utc};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use adaptree_core::game::Question;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: corrupt record: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
    #[error("user `{0}` already exists")]
    Exists(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a fresh temporary file next to `path`, flushes it to
/// disk and renames it over `path`, so readers see the old record or the
/// new one and never a partial write.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("record");
    let tmp = dir.join(format!(".{name}.{:016x}.tmp", rand::rng().random::<u64>()));
    let write = || -> io::Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
        Ok(())
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(path)(e)),
    };
    serde_json::from_slice(&bytes).map(Some).map_err(|e| StoreError::Corrupt {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let bytes = serde_json::to_vec_pretty(value).expect("records serialize");
    atomic_write(path, &bytes)
}

/// Usernames double as file names: 1 to 32 ASCII letters, digits, `_`
/// or `-`.
pub fn valid_username(name: &str) -> bool {
    (1..=32).contains(&name.len()) && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

#[derive(Debug, Clone)]
pub struct ProfileStore {
    dir: PathBuf,
}

impl ProfileStore {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let dir = dir.join("users");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(ProfileStore { dir })
    }

    fn path(&self, username: &str) -> PathBuf {
        debug_assert!(valid_username(username));
        self.dir.join(format!("{username}.json"))
    }

    pub fn load(&self, username: &str) -> Result<Option<UserProfile>, StoreError> {
        if !valid_username(username) {
            return Ok(None);
        }
        read_json(&self.path(username))
    }

    pub fn save(&self, profile: &UserProfile) -> Result<(), StoreError> {
        write_json(&self.path(&profile.username), profile)
    }

    /// Saves a new profile; fails when the username is taken. Callers
    /// serialize creation per username.
    pub fn create(&self, profile: &UserProfile) -> Result<(), StoreError> {
        if self.path(&profile.username).exists() {
            return Err(StoreError::Exists(profile.username.clone()));
        }
        self.save(profile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Standard,
    Review,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveQuestion {
    pub question: Question,
    pub mode: Mode,
    pub issued_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub username: String,
    pub last_seen: DateTime<Utc>,
    pub requests: u64,
    pub active: Option<ActiveQuestion>,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

fn valid_token(token: &str) -> bool {
    token.len() == 32 && token.bytes().all(|b| b.is_ascii_hexdigit())
}

impl SessionStore {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let dir = dir.join("sessions");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(SessionStore { dir })
    }

    fn path(&self, token: &str) -> PathBuf {
        debug_assert!(valid_token(token));
        self.dir.join(format!("{token}.json"))
    }

    /// Every stored session. Leftover temporary files are ignored.
    pub fn load_all(&self) -> Result<Vec<(String, SessionRecord)>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let path = entry.map_err(io_err(&self.dir))?.path();
            let Some(token) = path.file_name().and_then(|n| n.to_str()).and_then(|n| n.strip_suffix(".json")) else {
                continue;
            };
            if !valid_token(token) {
                continue;
            }
            if let Some(record) = read_json(&path)? {
                out.push((token.to_string(), record));
            }
        }
        Ok(out)
    }

    pub fn save(&self, token: &str, record: &SessionRecord) -> Result<(), StoreError> {
        write_json(&self.path(token), record)
    }

    pub fn remove(&self, token: &str) -> Result<(), StoreError> {
        let path = self.path(token);
        match fs::remove_file(&path) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(io_err(&path)(e)),
            _ => Ok(()),
        }
    }
}
