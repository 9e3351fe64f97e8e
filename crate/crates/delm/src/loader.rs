//! Loading app directories and fixture corpora from disk.

use std::fs;
use std::path::{Path, PathBuf};

use delm_core::manifest::ManifestError;
use delm_core::sim::SpecError;
use delm_core::{AppSpec, Manifest, SenderTrace, SimApp};
use thiserror::Error;

use crate::manifest_xml::parse_manifest;

pub const SPEC_FILE: &str = "app.spec";
pub const FIXTURES_ENV: &str = "DELM_FIXTURES";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Manifest {
        path: PathBuf,
        source: ManifestError,
    },
    #[error("{path}: {source}")]
    Spec { path: PathBuf, source: SpecError },
}

pub(crate) fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.into(),
        source,
    })
}

pub fn load_manifest(path: &Path) -> Result<Manifest, LoadError> {
    parse_manifest(&read(path)?).map_err(|source| LoadError::Manifest {
        path: path.into(),
        source,
    })
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    serde_json::from_str(&read(path)?).map_err(|source| LoadError::Json {
        path: path.into(),
        source,
    })
}

/// Sender traces in `dir`, one per `*.json` file, in file name order. A
/// trace without an `id` takes its file stem.
pub fn load_traces(dir: &Path) -> Result<Vec<SenderTrace>, LoadError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let io = |source| LoadError::Io {
        path: dir.into(),
        source,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    files
        .iter()
        .map(|p| {
            let mut t: SenderTrace = load_json(p)?;
            if t.id.is_empty() {
                t.id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
            }
            Ok(t)
        })
        .collect()
}

/// Reads `app.spec`, the manifest and the traces it names, and links them.
pub fn load_app(dir: &Path) -> Result<SimApp, LoadError> {
    let spec_path = dir.join(SPEC_FILE);
    let spec: AppSpec = load_json(&spec_path)?;
    let manifest = load_manifest(&dir.join(&spec.manifest_file))?;
    let traces = load_traces(&dir.join(&spec.traces_dir))?;
    SimApp::link(manifest, traces, spec).map_err(|source| LoadError::Spec {
        path: spec_path,
        source,
    })
}

/// App directories (those holding an `app.spec`) directly under `corpus`,
/// sorted by name.
pub fn corpus_apps(corpus: &Path) -> Result<Vec<(String, PathBuf)>, LoadError> {
    let entries = fs::read_dir(corpus).map_err(|source| LoadError::Io {
        path: corpus.into(),
        source,
    })?;
    let mut apps: Vec<(String, PathBuf)> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.join(SPEC_FILE).is_file())
        .map(|p| {
            let name = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (name, p)
        })
        .collect();
    apps.sort();
    Ok(apps)
}

/// `$DELM_FIXTURES`, or the `fixtures/` directory of this workspace.
pub fn fixtures_dir() -> PathBuf {
    match std::env::var_os(FIXTURES_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"),
    }
}
