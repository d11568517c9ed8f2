//! Sandboxed file access for agents (the agent–benchmark interface).

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use benchkeeper_core::BenchmarkCase;
use regex::Regex;

use crate::suite::{self, write_atomic, CaseMeta};

pub const GENERATED: &str = "generated_code.sv";

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("`{0}` resolves outside the workspace")]
    PathEscape(String),
    #[error("`{0}` not found")]
    NotFound(String),
    #[error("`{0}` is read-only in this workspace")]
    ReadOnlyPath(String),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("invalid search pattern: {0}")]
    BadPattern(String),
    #[error("workspace is bound to case `{bound}`, not `{asked}`")]
    WrongCase { bound: String, asked: String },
    #[error("{0}: {1}")]
    Io(String, io::Error),
}

struct UndoSlot {
    rel: String,
    previous: Option<Vec<u8>>,
}

pub struct Workspace {
    root: PathBuf,
    case_id: String,
    writable: BTreeSet<String>,
    undo: Option<UndoSlot>,
}

impl Workspace {
    pub fn new(root: &Path, case_id: &str, writable: &[&str]) -> Result<Self, WorkspaceError> {
        let root = root.canonicalize().map_err(|e| WorkspaceError::Io(root.display().to_string(), e))?;
        Ok(Workspace {
            root,
            case_id: case_id.into(),
            writable: writable.iter().map(|s| normalize(s).unwrap_or_default()).collect(),
            undo: None,
        })
    }

    /// Copies a case into `dir` (plus the generated code, if any) and opens
    /// a workspace over it.
    pub fn stage(dir: &Path, case: &BenchmarkCase, generated: Option<&str>, reference: Option<&str>, writable: &[&str]) -> Result<Self, WorkspaceError> {
        let io = |p: &Path| {
            let p = p.display().to_string();
            move |e| WorkspaceError::Io(p, e)
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files: Vec<(&str, String)> =
            vec![(suite::DESCRIPTION, case.description.clone()), (suite::TESTBENCH, case.testbench_source.clone())];
        if let Some(r) = reference.or(case.reference_source.as_deref()) {
            files.push((suite::REFERENCE, r.into()));
        }
        if let Some(v) = &case.vectors_source {
            files.push((suite::VECTORS, v.clone()));
        }
        if case.expected_module_name.is_some() || !case.tags.is_empty() {
            let meta = CaseMeta { expected_module_name: case.expected_module_name.clone(), tags: case.tags.clone() };
            files.push((suite::META, serde_json::to_string_pretty(&meta).expect("serializable")));
        }
        if let Some(g) = generated {
            files.push((GENERATED, g.into()));
        }
        for (name, body) in files {
            let p = dir.join(name);
            fs::write(&p, body).map_err(io(&p))?;
        }
        Self::new(dir, &case.case_id, writable)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    /// Resolves `rel` inside the root, rejecting anything that escapes it
    /// either lexically or through symlinks.
    pub fn resolve(&self, rel: &str) -> Result<PathBuf, WorkspaceError> {
        let norm = normalize(rel).ok_or_else(|| WorkspaceError::PathEscape(rel.into()))?;
        let path = self.root.join(&norm);
        match path.canonicalize() {
            Ok(real) if !real.starts_with(&self.root) => Err(WorkspaceError::PathEscape(rel.into())),
            Ok(real) => Ok(real),
            Err(_) => {
                let parent = path.parent().unwrap_or(&self.root);
                match parent.canonicalize() {
                    Ok(real) if !real.starts_with(&self.root) => Err(WorkspaceError::PathEscape(rel.into())),
                    _ => Ok(path),
                }
            }
        }
    }

    pub fn view_file(&self, rel: &str) -> Result<String, WorkspaceError> {
        let path = self.resolve(rel)?;
        fs::read_to_string(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => WorkspaceError::NotFound(rel.into()),
            _ => WorkspaceError::Io(rel.into(), e),
        })
    }

    /// Atomically replaces a writable file, keeping its old contents for one
    /// `undo`.
    pub fn edit_file(&mut self, rel: &str, contents: &str) -> Result<(), WorkspaceError> {
        let norm = normalize(rel).ok_or_else(|| WorkspaceError::PathEscape(rel.into()))?;
        let path = self.resolve(rel)?;
        if !self.writable.contains(&norm) {
            return Err(WorkspaceError::ReadOnlyPath(rel.into()));
        }
        let previous = match fs::read(&path) {
            Ok(b) => Some(b),
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(e) => return Err(WorkspaceError::Io(rel.into(), e)),
        };
        write_atomic(&path, contents.as_bytes()).map_err(|e| WorkspaceError::Io(rel.into(), e))?;
        self.undo = Some(UndoSlot { rel: norm, previous });
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), WorkspaceError> {
        let slot = self.undo.take().ok_or(WorkspaceError::NothingToUndo)?;
        let path = self.root.join(&slot.rel);
        let res = match &slot.previous {
            Some(bytes) => write_atomic(&path, bytes),
            None => fs::remove_file(&path),
        };
        res.map_err(|e| WorkspaceError::Io(slot.rel.clone(), e))
    }

    /// Relative paths of files whose contents match `pattern`, sorted.
    pub fn search_files(&self, pattern: &str) -> Result<Vec<String>, WorkspaceError> {
        let re = Regex::new(pattern).map_err(|e| WorkspaceError::BadPattern(e.to_string()))?;
        Ok(self.list_files()?.into_iter().filter(|f| self.view_file(f).is_ok_and(|t| re.is_match(&t))).collect())
    }

    pub fn list_files(&self) -> Result<Vec<String>, WorkspaceError> {
        let mut out = Vec::new();
        let mut stack = vec![self.root.clone()];
        while let Some(dir) = stack.pop() {
            let entries = fs::read_dir(&dir).map_err(|e| WorkspaceError::Io(dir.display().to_string(), e))?;
            for entry in entries.flatten() {
                let p = entry.path();
                if p.is_dir() {
                    stack.push(p);
                } else if let Ok(rel) = p.strip_prefix(&self.root) {
                    out.push(rel.to_string_lossy().replace('\\', "/"));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn locate_case(&self, case_id: &str) -> Result<Vec<String>, WorkspaceError> {
        if case_id != self.case_id {
            return Err(WorkspaceError::WrongCase { bound: self.case_id.clone(), asked: case_id.into() });
        }
        self.list_files()
    }
}

/// Lexically normalizes a relative path; `None` if it is absolute or climbs
/// above its start.
fn normalize(rel: &str) -> Option<String> {
    let mut parts: Vec<&str> = Vec::new();
    for c in Path::new(rel).components() {
        match c {
            Component::Normal(s) => parts.push(s.to_str()?),
            Component::CurDir => {}
            Component::ParentDir => {
                parts.pop()?;
            }
            Component::RootDir | Component::Prefix(_) => return None,
        }
    }
    (!parts.is_empty()).then(|| parts.join("/"))
}
