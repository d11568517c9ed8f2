//! Run directories and transcript files.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use benchkeeper_core::transcript::{AgentStep, AgentTranscript, Observation, Role, Terminal};
use serde::{Deserialize, Serialize};

use crate::suite::{io_err, write_atomic, SuiteError};

pub const TRANSCRIPTS_DIR: &str = "transcripts";

/// Creates `<runs_dir>/<UTC timestamp>/`, adding `-2`, `-3`, ... when two
/// runs start within the same second.
pub fn create_run_dir(runs_dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(runs_dir)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string();
    let mut n = 1;
    loop {
        let name = if n == 1 { stamp.clone() } else { format!("{stamp}-{n}") };
        let dir = runs_dir.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => n += 1,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    transcript_ref: String,
    role: Role,
    initial_observation: Observation,
    terminal: Option<Terminal>,
    error: Option<String>,
    steps: usize,
}

/// Header line first, then one line per step.
pub fn transcript_jsonl(transcript_ref: &str, t: &AgentTranscript) -> String {
    let header = Header {
        transcript_ref: transcript_ref.into(),
        role: t.role,
        initial_observation: t.initial_observation.clone(),
        terminal: t.terminal,
        error: t.error.clone(),
        steps: t.steps.len(),
    };
    let mut out = serde_json::to_string(&header).expect("serializable");
    out.push('\n');
    for step in &t.steps {
        out.push_str(&serde_json::to_string(step).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn write_transcript(dir: &Path, transcript_ref: &str, t: &AgentTranscript) -> Result<PathBuf, SuiteError> {
    let tdir = dir.join(TRANSCRIPTS_DIR);
    fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;
    let path = tdir.join(format!("{transcript_ref}.jsonl"));
    write_atomic(&path, transcript_jsonl(transcript_ref, t).as_bytes()).map_err(io_err(&path))?;
    Ok(path)
}

/// Reads a transcript file back; returns its reference and contents.
pub fn read_transcript(path: &Path) -> Result<(String, AgentTranscript), SuiteError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let bad = |line: usize, e: serde_json::Error| SuiteError::MalformedManifest {
        file: path.to_path_buf(),
        line,
        col: e.column(),
        msg: e.to_string(),
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines.next().transpose().map_err(io_err(path))?.unwrap_or_default();
    let header: Header = serde_json::from_str(&first).map_err(|e| bad(1, e))?;
    let mut steps = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        steps.push(serde_json::from_str::<AgentStep>(&line).map_err(|e| bad(i + 2, e))?);
    }
    let t = AgentTranscript {
        role: header.role,
        initial_observation: header.initial_observation,
        steps,
        terminal: header.terminal,
        error: header.error,
    };
    Ok((header.transcript_ref, t))
}

/// Appends one line of text to `path`, creating it if needed.
pub fn append_line(path: &Path, line: &str) -> Result<(), SuiteError> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    writeln!(f, "{line}").map_err(io_err(path))
}
