use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use landscape::corpus::{load_corpus, Corpus, CorpusFormat, PreprocessConfig};
use landscape::session::{load_session, save_session, SessionState};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorCode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: CorpusFormat,
    pub documents: usize,
}

/// Session directories plus an in-memory snapshot per session.
pub struct Store {
    root: PathBuf,
    snapshots: RwLock<HashMap<String, Arc<SessionState>>>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    corpora: Mutex<BTreeMap<String, CorpusEntry>>,
}

pub(crate) fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= 64
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        && !s.starts_with('.')
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::internal(e.to_string())
}

impl Store {
    pub fn open(root: &Path) -> Result<Self, ApiError> {
        std::fs::create_dir_all(root.join("sessions"))
            .map_err(|e| internal(format!("{}: {e}", root.display())))?;
        let index = root.join("corpora.json");
        let corpora = if index.exists() {
            let text = std::fs::read_to_string(&index).map_err(internal)?;
            let list: Vec<CorpusEntry> = serde_json::from_str(&text).map_err(internal)?;
            list.into_iter().map(|c| (c.name.clone(), c)).collect()
        } else {
            BTreeMap::new()
        };
        Ok(Store {
            root: root.to_path_buf(),
            snapshots: RwLock::default(),
            locks: Mutex::default(),
            corpora: Mutex::new(corpora),
        })
    }

    fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_name(id) && self.session_dir(id).join("manifest.json").exists()
    }

    /// Latest saved state of a session.
    pub fn snapshot(&self, id: &str) -> Result<Arc<SessionState>, ApiError> {
        if !valid_name(id) {
            return Err(ApiError::not_found(format!("session {id}")));
        }
        if let Some(s) = self.snapshots.read().expect("snapshot map").get(id) {
            return Ok(s.clone());
        }
        let dir = self.session_dir(id);
        if !dir.join("manifest.json").exists() {
            return Err(ApiError::not_found(format!("session {id}")));
        }
        let state = Arc::new(load_session(&dir)?);
        self.snapshots
            .write()
            .expect("snapshot map")
            .insert(id.to_string(), state.clone());
        Ok(state)
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks
            .lock()
            .expect("lock map")
            .entry(id.to_string())
            .or_default()
            .clone()
    }

    /// Save a new session; fails if the id is taken.
    pub async fn create(
        self: &Arc<Self>,
        state: SessionState,
    ) -> Result<Arc<SessionState>, ApiError> {
        let lock = self.lock_for(&state.id);
        let _guard = lock.lock().await;
        if self.exists(&state.id) {
            return Err(ApiError::new(
                ErrorCode::Conflict,
                format!("session {} already exists", state.id),
            ));
        }
        self.persist(state).await
    }

    /// Apply `f` to a copy of the session under its exclusive guard, save, and
    /// publish the new snapshot. Nothing is saved if `f` fails.
    pub async fn mutate<T, F>(
        self: &Arc<Self>,
        id: &str,
        f: F,
    ) -> Result<(Arc<SessionState>, T), ApiError>
    where
        F: FnOnce(&mut SessionState) -> landscape::Result<T> + Send + 'static,
        T: Send + 'static,
    {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut state = (*self.snapshot(id)?).clone();
        let (state, out) =
            tokio::task::spawn_blocking(move || f(&mut state).map(|out| (state, out)))
                .await
                .map_err(internal)??;
        Ok((self.persist(state).await?, out))
    }

    async fn persist(self: &Arc<Self>, state: SessionState) -> Result<Arc<SessionState>, ApiError> {
        let dir = self.session_dir(&state.id);
        let state = Arc::new(state);
        let saved = state.clone();
        tokio::task::spawn_blocking(move || save_session(&saved, &dir))
            .await
            .map_err(internal)??;
        self.snapshots
            .write()
            .expect("snapshot map")
            .insert(state.id.clone(), state.clone());
        Ok(state)
    }

    pub fn corpora(&self) -> Vec<CorpusEntry> {
        self.corpora
            .lock()
            .expect("corpora")
            .values()
            .cloned()
            .collect()
    }

    pub fn corpus_entry(&self, name: &str) -> Result<CorpusEntry, ApiError> {
        self.corpora
            .lock()
            .expect("corpora")
            .get(name)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("corpus {name}")))
    }

    pub fn register_corpus(&self, entry: CorpusEntry) -> Result<(), ApiError> {
        let mut map = self.corpora.lock().expect("corpora");
        if map.contains_key(&entry.name) {
            return Err(ApiError::new(
                ErrorCode::Conflict,
                format!("corpus {} already registered", entry.name),
            ));
        }
        map.insert(entry.name.clone(), entry);
        let list: Vec<&CorpusEntry> = map.values().collect();
        let text = serde_json::to_string_pretty(&list).map_err(internal)?;
        std::fs::write(self.root.join("corpora.json"), text).map_err(internal)
    }

    /// Load and preprocess a registered corpus.
    pub fn load_corpus(
        &self,
        name: &str,
        preprocess: &PreprocessConfig,
    ) -> Result<Corpus, ApiError> {
        let entry = self.corpus_entry(name)?;
        let raw = load_corpus(&entry.path, entry.format)
            .map_err(|e| ApiError::new(ErrorCode::InvalidData, e.to_string()))?;
        Ok(raw.preprocess(preprocess)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_path_safe() {
        assert!(valid_name("run-2024_a.1"));
        for bad in ["", ".hidden", "../x", "a/b", "a b"] {
            assert!(!valid_name(bad), "{bad}");
        }
    }

    #[test]
    fn corpus_index_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let entry = CorpusEntry {
            name: "c".into(),
            path: "/tmp/c.jsonl".into(),
            format: CorpusFormat::Jsonl,
            documents: 3,
        };
        store.register_corpus(entry.clone()).unwrap();
        assert_eq!(
            store.register_corpus(entry.clone()).unwrap_err().code,
            ErrorCode::Conflict
        );
        assert_eq!(Store::open(dir.path()).unwrap().corpora(), vec![entry]);
        assert_eq!(
            store.snapshot("missing").unwrap_err().code,
            ErrorCode::NotFound
        );
    }
}
