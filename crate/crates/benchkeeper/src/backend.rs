//! EDA sessions over the built-in mini-HDL simulator or an external tool
//! driven by command templates.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use benchkeeper_core::hdl::{self, ModuleAst, VectorTestbench};
use benchkeeper_core::session::{SessionOp, SessionState, SessionTracker, StateOrderViolation};
use benchkeeper_core::SimResult;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::suite::{self, CaseMeta};
use crate::workspace::GENERATED;

pub const COMPILE_LOG: &str = "compile.log";
pub const SIM_LOG: &str = "sim.log";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub backend_id: String,
    pub kind: BackendKind,
    #[serde(default)]
    pub compile_cmd: Vec<String>,
    #[serde(default)]
    pub simulate_cmd: Vec<String>,
    #[serde(default)]
    pub pass_regex: Option<String>,
    #[serde(default)]
    pub fail_regex: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub connect_retries: u32,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    3
}

impl BackendConfig {
    pub fn builtin() -> Self {
        BackendConfig {
            backend_id: "builtin".into(),
            kind: BackendKind::Builtin,
            compile_cmd: Vec::new(),
            simulate_cmd: Vec::new(),
            pass_regex: None,
            fail_regex: None,
            timeout_s: default_timeout(),
            connect_retries: default_retries(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path).map_err(|e| BackendError::Io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error(transparent)]
    StateOrder(#[from] StateOrderViolation),
    #[error("backend `{backend_id}` unavailable after {attempts} connection attempts: {detail}")]
    BackendUnavailable { backend_id: String, attempts: u32, detail: String },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileResult {
    pub ok: bool,
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub result: SimResult,
    /// Log files by name; `sim.log` is always present.
    pub files: BTreeMap<String, String>,
}

pub struct EdaSession {
    pub session_id: String,
    config: BackendConfig,
    staged: Option<tempfile::TempDir>,
    tracker: SessionTracker,
    design: Option<ModuleAst>,
    result: Option<SimResult>,
    logs: BTreeMap<String, String>,
}

static SESSION_COUNTER: AtomicU64 = AtomicU64::new(1);

fn program_available(program: &str) -> bool {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file();
    }
    std::env::var_os("PATH").is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
}

pub fn connect(config: &BackendConfig) -> Result<EdaSession, BackendError> {
    for re in [&config.pass_regex, &config.fail_regex].into_iter().flatten() {
        Regex::new(re).map_err(|e| BackendError::Config(format!("bad regex `{re}`: {e}")))?;
    }
    if config.kind == BackendKind::External {
        let program = config
            .compile_cmd
            .first()
            .or(config.simulate_cmd.first())
            .ok_or_else(|| BackendError::Config("external backend needs compile_cmd or simulate_cmd".into()))?;
        let attempts = config.connect_retries.max(1);
        let mut ok = false;
        for i in 0..attempts {
            if program_available(program) {
                ok = true;
                break;
            }
            if i + 1 < attempts {
                std::thread::sleep(Duration::from_millis(50));
            }
        }
        if !ok {
            return Err(BackendError::BackendUnavailable {
                backend_id: config.backend_id.clone(),
                attempts,
                detail: format!("`{program}` not found"),
            });
        }
    }
    Ok(EdaSession {
        session_id: format!("{}-{}", config.backend_id, SESSION_COUNTER.fetch_add(1, Ordering::Relaxed)),
        config: config.clone(),
        staged: None,
        tracker: SessionTracker::default(),
        design: None,
        result: None,
        logs: BTreeMap::new(),
    })
}

impl EdaSession {
    pub fn state(&self) -> SessionState {
        self.tracker.state()
    }

    pub fn tracker(&self) -> &SessionTracker {
        &self.tracker
    }

    pub fn staged_dir(&self) -> Option<&Path> {
        self.staged.as_ref().map(|d| d.path())
    }

    fn dir(&self) -> &Path {
        self.staged.as_ref().expect("staged after upload").path()
    }

    /// Copies the regular files of `dir` into a private staging directory.
    pub fn upload(&mut self, dir: &Path) -> Result<(), BackendError> {
        self.tracker.check(SessionOp::Upload)?;
        let io = |p: &Path| {
            let p = p.display().to_string();
            move |e| BackendError::Io(p, e)
        };
        let staged = tempfile::Builder::new().prefix("eda-").tempdir().map_err(io(dir))?;
        for entry in fs::read_dir(dir).map_err(io(dir))? {
            let entry = entry.map_err(io(dir))?;
            if entry.file_type().map_err(io(dir))?.is_file() {
                fs::copy(entry.path(), staged.path().join(entry.file_name())).map_err(io(&entry.path()))?;
            }
        }
        self.staged = Some(staged);
        self.tracker.commit(SessionOp::Upload)?;
        Ok(())
    }

    /// A failed compile leaves the session in UPLOADED.
    pub fn compile(&mut self) -> Result<CompileResult, BackendError> {
        self.tracker.check(SessionOp::Compile)?;
        let (ok, log) = match self.config.kind {
            BackendKind::Builtin => match self.builtin_compile() {
                Ok(m) => {
                    self.design = Some(m);
                    (true, String::from("compile ok\n"))
                }
                Err(log) => (false, log),
            },
            BackendKind::External => {
                if self.config.compile_cmd.is_empty() {
                    (true, String::from("no compile step configured\n"))
                } else {
                    let run = self.run_cmd(&self.config.compile_cmd.clone(), COMPILE_LOG)?;
                    (run.exit_ok && !run.timed_out, run.log)
                }
            }
        };
        self.write_log(COMPILE_LOG, &log)?;
        if ok {
            self.tracker.commit(SessionOp::Compile)?;
        }
        Ok(CompileResult { ok, log })
    }

    pub fn simulate(&mut self) -> Result<SimResult, BackendError> {
        self.tracker.check(SessionOp::Simulate)?;
        let result = match self.config.kind {
            BackendKind::Builtin => self.builtin_simulate(),
            BackendKind::External => self.external_simulate()?,
        };
        self.write_log(SIM_LOG, &result.log)?;
        self.result = Some(result.clone());
        self.tracker.commit(SessionOp::Simulate)?;
        Ok(result)
    }

    pub fn download(&mut self) -> Result<Artifacts, BackendError> {
        self.tracker.commit(SessionOp::Download)?;
        Ok(Artifacts { result: self.result.clone().expect("set by simulate"), files: self.logs.clone() })
    }

    pub fn close(&mut self) -> Result<(), BackendError> {
        self.tracker.commit(SessionOp::Close)?;
        self.staged = None;
        Ok(())
    }

    fn write_log(&mut self, name: &str, body: &str) -> Result<(), BackendError> {
        let p = self.dir().join(name);
        fs::write(&p, body).map_err(|e| BackendError::Io(p.display().to_string(), e))?;
        self.logs.insert(name.into(), body.into());
        Ok(())
    }

    fn read_staged(&self, name: &str) -> Option<String> {
        fs::read_to_string(self.dir().join(name)).ok()
    }

    fn builtin_compile(&self) -> Result<ModuleAst, String> {
        let src = self.read_staged(GENERATED).ok_or_else(|| format!("compile error: no {GENERATED} uploaded\n"))?;
        let design = hdl::parse_module(&src).map_err(|e| format!("compile error: {e}\n"))?;
        let reference = self.read_staged(suite::REFERENCE).and_then(|r| hdl::parse_modules(&r).ok()).and_then(|mut v| {
            if v.is_empty() { None } else { Some(v.remove(0)) }
        });
        let meta: CaseMeta = self.read_staged(suite::META).and_then(|t| serde_json::from_str(&t).ok()).unwrap_or_default();
        let expected = meta.expected_module_name.or_else(|| reference.as_ref().map(|r| r.name.clone()));
        if let Some(expected) = expected {
            if design.name != expected {
                return Err(format!("compile error: testbench instantiates module `{expected}` but the design defines `{}`\n", design.name));
            }
        }
        if let Some(r) = &reference {
            check_interface(&design, r)?;
        }
        Ok(design)
    }

    fn builtin_simulate(&self) -> SimResult {
        let design = self.design.as_ref().expect("compiled");
        let Some(text) = self.read_staged(suite::VECTORS) else {
            return SimResult::opaque_failure(format!("no {} available to the built-in simulator\n", suite::VECTORS));
        };
        let tb: VectorTestbench = match serde_json::from_str(&text) {
            Ok(tb) => tb,
            Err(e) => return SimResult::opaque_failure(format!("unreadable {}: {e}\n", suite::VECTORS)),
        };
        match hdl::run_vectors(design, &tb) {
            Ok(r) => r,
            Err(e) => SimResult::syntax_failure(format!("testbench does not match design interface: {e}\n")),
        }
    }

    fn external_simulate(&self) -> Result<SimResult, BackendError> {
        let run = self.run_cmd(&self.config.simulate_cmd.clone(), SIM_LOG)?;
        let mut log = run.log;
        if run.timed_out {
            return Ok(SimResult::opaque_failure(log));
        }
        let matches = |re: &Option<String>| re.as_deref().is_some_and(|r| Regex::new(r).expect("checked at connect").is_match(&log));
        if matches(&self.config.fail_regex) || !run.exit_ok {
            return Ok(SimResult::opaque_failure(log));
        }
        if matches(&self.config.pass_regex) {
            return Ok(SimResult::passed(log));
        }
        log.push_str("AMBIGUOUS_VERDICT: neither pass_regex nor fail_regex matched\n");
        Ok(SimResult::opaque_failure(log))
    }

    fn run_cmd(&self, template: &[String], log_name: &str) -> Result<CmdRun, BackendError> {
        let dir = self.dir().to_path_buf();
        let args = expand(template, &dir);
        let (program, rest) = args.split_first().ok_or_else(|| BackendError::Config("empty command".into()))?;
        let out_path = dir.join(format!("{log_name}.raw"));
        let io = |e| BackendError::Io(out_path.display().to_string(), e);
        let out = File::create(&out_path).map_err(io)?;
        let err = out.try_clone().map_err(io)?;
        let mut child = match Command::new(program).args(rest).current_dir(&dir).stdin(Stdio::null()).stdout(out).stderr(err).spawn() {
            Ok(c) => c,
            Err(e) => {
                return Ok(CmdRun { exit_ok: false, timed_out: false, log: format!("failed to start `{program}`: {e}\n") });
            }
        };
        let deadline = Instant::now() + Duration::from_secs_f64(self.config.timeout_s.max(0.0));
        let (status, timed_out) = loop {
            match child.try_wait().map_err(io)? {
                Some(status) => break (Some(status), false),
                None if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    break (None, true);
                }
                None => std::thread::sleep(Duration::from_millis(10)),
            }
        };
        let mut log = fs::read_to_string(&out_path).unwrap_or_default();
        if timed_out {
            log.push_str(&format!("TIMEOUT after {}s\n", self.config.timeout_s));
        } else if let Some(code) = status.and_then(|s| s.code()).filter(|c| *c != 0) {
            log.push_str(&format!("exit status {code}\n"));
        }
        Ok(CmdRun { exit_ok: status.is_some_and(|s| s.success()), timed_out, log })
    }
}

struct CmdRun {
    exit_ok: bool,
    timed_out: bool,
    log: String,
}

fn expand(template: &[String], dir: &Path) -> Vec<String> {
    let file = |name: &str| dir.join(name).display().to_string();
    let mut out = Vec::new();
    for tok in template {
        if tok == "{sources}" {
            out.push(file(GENERATED));
            continue;
        }
        out.push(
            tok.replace("{workdir}", &dir.display().to_string())
                .replace("{sources}", &file(GENERATED))
                .replace("{testbench}", &file(suite::TESTBENCH))
                .replace("{reference}", &file(suite::REFERENCE)),
        );
    }
    out
}

/// Port-by-port comparison against the reference: same names, directions
/// and declared ranges.
fn check_interface(design: &ModuleAst, reference: &ModuleAst) -> Result<(), String> {
    let mut problems = Vec::new();
    for rp in &reference.ports {
        match design.port(&rp.name) {
            None => problems.push(format!("missing port `{}`", rp.name)),
            Some(dp) if dp.direction != rp.direction => problems.push(format!("port `{}` has the wrong direction", rp.name)),
            Some(dp) if (dp.msb, dp.lsb) != (rp.msb, rp.lsb) => problems.push(format!(
                "port `{}` declared [{}:{}], testbench expects [{}:{}]",
                rp.name, dp.msb, dp.lsb, rp.msb, rp.lsb
            )),
            _ => {}
        }
    }
    for dp in &design.ports {
        if reference.port(&dp.name).is_none() {
            problems.push(format!("unexpected port `{}`", dp.name));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.iter().map(|p| format!("compile error: {p}\n")).collect())
    }
}

/// Runs the full connect → upload → compile → simulate → download → close
/// sequence, recording each interface call in `trace`.
pub fn run_evaluation(config: &BackendConfig, dir: &Path, trace: &mut Vec<&'static str>) -> Result<Artifacts, BackendError> {
    trace.push("connect");
    let mut s = connect(config)?;
    trace.push("upload");
    s.upload(dir)?;
    trace.push("compile");
    let c = s.compile()?;
    if !c.ok {
        let mut files = BTreeMap::new();
        files.insert(COMPILE_LOG.to_string(), c.log.clone());
        // Close requires SIMULATED; dropping the session discards its staging.
        return Ok(Artifacts { result: SimResult::syntax_failure(c.log), files });
    }
    trace.push("simulate");
    s.simulate()?;
    trace.push("download");
    let artifacts = s.download()?;
    trace.push("close");
    s.close()?;
    Ok(artifacts)
}
