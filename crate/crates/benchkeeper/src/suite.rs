//! On-disk suite layout.
//!
//! ```text
//! <root>/manifest.json          {"suite_id", "source_label"?, "cases": [{"case_id", "dir"}]}
//! <root>/<dir>/description.txt
//! <root>/<dir>/testbench.sv
//! <root>/<dir>/reference.sv     optional
//! <root>/<dir>/vectors.json     optional, built-in backend only
//! <root>/<dir>/meta.json        optional {"expected_module_name", "tags"}
//! <root>/<dir>/history.jsonl    optional, one RevisionRecord per line
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use benchkeeper_core::case::CaseError;
use benchkeeper_core::{BenchmarkCase, BenchmarkSuite, RevisionRecord};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const DESCRIPTION: &str = "description.txt";
pub const TESTBENCH: &str = "testbench.sv";
pub const REFERENCE: &str = "reference.sv";
pub const VECTORS: &str = "vectors.json";
pub const META: &str = "meta.json";
pub const HISTORY: &str = "history.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub suite_id: String,
    #[serde(default)]
    pub source_label: String,
    pub cases: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub case_id: String,
    pub dir: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_module_name: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("no {MANIFEST} in {0}")]
    MissingManifest(PathBuf),
    #[error("malformed {file} at line {line}, column {col}: {msg}")]
    MalformedManifest { file: PathBuf, line: usize, col: usize, msg: String },
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("case `{0}` has an empty description")]
    EmptyDescription(String),
    #[error("case `{case_id}`: {source}")]
    Case { case_id: String, source: CaseError },
    #[error("case `{case_id}`: missing {file}")]
    MissingFile { case_id: String, file: &'static str },
    #[error("case directory `{0}` escapes the suite root")]
    BadCaseDir(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io { path: path.to_path_buf(), source }
}

fn malformed(file: &Path, e: &serde_json::Error) -> SuiteError {
    SuiteError::MalformedManifest { file: file.to_path_buf(), line: e.line(), col: e.column(), msg: e.to_string() }
}

fn read_optional(path: &Path) -> Result<Option<String>, SuiteError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(SuiteError::Io { path: path.to_path_buf(), source: e }),
    }
}

fn check_case_dir(dir: &str) -> Result<(), SuiteError> {
    let p = Path::new(dir);
    if dir.is_empty() || p.is_absolute() || p.components().any(|c| !matches!(c, std::path::Component::Normal(_))) {
        return Err(SuiteError::BadCaseDir(dir.into()));
    }
    Ok(())
}

pub fn read_manifest(root: &Path) -> Result<Manifest, SuiteError> {
    let path = root.join(MANIFEST);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(SuiteError::MissingManifest(root.to_path_buf())),
        Err(e) => return Err(SuiteError::Io { path, source: e }),
    };
    serde_json::from_str(&text).map_err(|e| malformed(&path, &e))
}

pub fn load_case(root: &Path, entry: &ManifestEntry) -> Result<BenchmarkCase, SuiteError> {
    check_case_dir(&entry.dir)?;
    let dir = root.join(&entry.dir);
    let missing = |file| SuiteError::MissingFile { case_id: entry.case_id.clone(), file };
    let description = read_optional(&dir.join(DESCRIPTION))?.ok_or_else(|| missing(DESCRIPTION))?;
    let testbench_source = read_optional(&dir.join(TESTBENCH))?.ok_or_else(|| missing(TESTBENCH))?;
    let meta: CaseMeta = match read_optional(&dir.join(META))? {
        Some(t) => serde_json::from_str(&t).map_err(|e| malformed(&dir.join(META), &e))?,
        None => CaseMeta::default(),
    };
    let revision_history = match dir.join(HISTORY) {
        p if p.exists() => read_jsonl::<RevisionRecord>(&p)?,
        _ => Vec::new(),
    };
    Ok(BenchmarkCase {
        case_id: entry.case_id.clone(),
        dir: entry.dir.clone(),
        description,
        testbench_source,
        reference_source: read_optional(&dir.join(REFERENCE))?,
        vectors_source: read_optional(&dir.join(VECTORS))?,
        expected_module_name: meta.expected_module_name,
        tags: meta.tags,
        revision_history,
    })
}

pub fn load_suite(root: &Path) -> Result<BenchmarkSuite, SuiteError> {
    let manifest = read_manifest(root)?;
    let mut seen = std::collections::BTreeSet::new();
    for e in &manifest.cases {
        if !seen.insert(e.case_id.as_str()) {
            return Err(SuiteError::DuplicateCaseId(e.case_id.clone()));
        }
    }
    let cases = manifest.cases.iter().map(|e| load_case(root, e)).collect::<Result<Vec<_>, _>>()?;
    BenchmarkSuite::new(manifest.suite_id, manifest.source_label, cases).map_err(|e| match e {
        CaseError::DuplicateCaseId(id) => SuiteError::DuplicateCaseId(id),
        CaseError::EmptyDescription(id) => SuiteError::EmptyDescription(id),
        other => SuiteError::Case { case_id: case_of(&other), source: other },
    })
}

fn case_of(e: &CaseError) -> String {
    match e {
        CaseError::EmptyTestbench(id) | CaseError::BrokenHistory { case_id: id, .. } => id.clone(),
        _ => String::new(),
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|i| serde_json::to_string(i).expect("serializable") + "\n").collect()
}

fn remove_if_present(path: &Path) -> Result<(), SuiteError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != io::ErrorKind::NotFound => Err(SuiteError::Io { path: path.to_path_buf(), source: e }),
        _ => Ok(()),
    }
}

pub fn save_case(root: &Path, case: &BenchmarkCase) -> Result<(), SuiteError> {
    check_case_dir(&case.dir)?;
    let dir = root.join(&case.dir);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        write_atomic(&p, body.as_bytes()).map_err(io_err(&p))
    };
    write(DESCRIPTION, &case.description)?;
    write(TESTBENCH, &case.testbench_source)?;
    for (name, body) in [(REFERENCE, &case.reference_source), (VECTORS, &case.vectors_source)] {
        match body {
            Some(b) => write(name, b)?,
            None => remove_if_present(&dir.join(name))?,
        }
    }
    if case.expected_module_name.is_some() || !case.tags.is_empty() {
        let meta = CaseMeta { expected_module_name: case.expected_module_name.clone(), tags: case.tags.clone() };
        write(META, &(serde_json::to_string_pretty(&meta).expect("serializable") + "\n"))?;
    } else {
        remove_if_present(&dir.join(META))?;
    }
    if case.revision_history.is_empty() {
        remove_if_present(&dir.join(HISTORY))?;
    } else {
        write(HISTORY, &write_jsonl(&case.revision_history))?;
    }
    Ok(())
}

pub fn save_suite(root: &Path, suite: &BenchmarkSuite) -> Result<(), SuiteError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let manifest = Manifest {
        suite_id: suite.suite_id.clone(),
        source_label: suite.source_label.clone(),
        cases: suite.cases.iter().map(|c| ManifestEntry { case_id: c.case_id.clone(), dir: c.dir.clone() }).collect(),
    };
    for case in &suite.cases {
        save_case(root, case)?;
    }
    let path = root.join(MANIFEST);
    let body = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    write_atomic(&path, body.as_bytes()).map_err(io_err(&path))
}

/// Persists an approved revision: the new description and its history line.
pub fn persist_revision(root: &Path, case: &BenchmarkCase) -> Result<(), SuiteError> {
    let dir = root.join(&case.dir);
    let desc = dir.join(DESCRIPTION);
    write_atomic(&desc, case.description.as_bytes()).map_err(io_err(&desc))?;
    let hist = dir.join(HISTORY);
    write_atomic(&hist, write_jsonl(&case.revision_history).as_bytes()).map_err(io_err(&hist))
}

/// Reads a JSONL file into values, reporting the failing line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, SuiteError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| SuiteError::MalformedManifest {
                file: path.to_path_buf(),
                line: i + 1,
                col: e.column(),
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, items: &[T]) -> Result<(), SuiteError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_atomic(path, write_jsonl(items).as_bytes()).map_err(io_err(path))
}
