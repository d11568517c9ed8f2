//! Composite actions and the case environment agents act on.

use benchkeeper_core::transcript::{FileView, Observation};
use benchkeeper_core::{ActionInvocation, ActionName};

use crate::agent::{Admission, Control, Environment};
use crate::backend::{run_evaluation, BackendConfig};
use crate::suite;
use crate::workspace::{Workspace, GENERATED};

/// Interface calls made by composite actions, in order.
pub type CallTrace = Vec<String>;

fn view(ws: &Workspace, path: &str, trace: &mut CallTrace) -> Result<FileView, String> {
    trace.push(format!("view_file({path})"));
    ws.view_file(path).map(|contents| FileView { path: path.into(), contents }).map_err(|e| e.to_string())
}

/// Expands `inv` into interface calls. Failures are returned as
/// `Observation::Failed`, never raised.
pub fn run_composite_action(inv: &ActionInvocation, ws: &mut Workspace, backend: &BackendConfig, trace: &mut CallTrace) -> Observation {
    let failed = |message: String| Observation::Failed { message };
    match inv.name {
        ActionName::CompareCodes => {
            let mut files = Vec::new();
            for path in [GENERATED, suite::TESTBENCH] {
                match view(ws, path, trace) {
                    Ok(f) => files.push(f),
                    Err(e) => return failed(e),
                }
            }
            if ws.resolve(suite::REFERENCE).is_ok_and(|p| p.exists()) {
                match view(ws, suite::REFERENCE, trace) {
                    Ok(f) => files.push(f),
                    Err(e) => return failed(e),
                }
            }
            Observation::Files { files }
        }
        ActionName::CheckInstruction => match view(ws, suite::DESCRIPTION, trace) {
            Ok(f) => Observation::Files { files: vec![f] },
            Err(e) => failed(e),
        },
        ActionName::ViewFile => {
            let path = inv.arg("path").unwrap_or_default();
            match view(ws, path, trace) {
                Ok(f) => Observation::Files { files: vec![f] },
                Err(e) => failed(e),
            }
        }
        ActionName::Revise | ActionName::EditFile => {
            let (path, mut text) = match inv.name {
                ActionName::Revise => (suite::DESCRIPTION, inv.arg("text").unwrap_or_default().to_string()),
                _ => (inv.arg("path").unwrap_or_default(), inv.arg("content").unwrap_or_default().to_string()),
            };
            // Argument values lose trailing whitespace; descriptions end with a newline.
            if inv.name == ActionName::Revise && !text.ends_with('\n') {
                text.push('\n');
            }
            trace.push(format!("edit_file({path})"));
            match ws.edit_file(path, &text) {
                Ok(()) => Observation::Edited { path: path.into() },
                Err(e) => failed(e.to_string()),
            }
        }
        ActionName::SearchFiles => {
            trace.push("search_files".into());
            match ws.search_files(inv.arg("pattern").unwrap_or_default()) {
                Ok(paths) => Observation::Matches { paths },
                Err(e) => failed(e.to_string()),
            }
        }
        ActionName::LocateCase => {
            let case_id = inv.arg("case_id").unwrap_or_default();
            trace.push(format!("locate_case({case_id})"));
            match ws.locate_case(case_id) {
                Ok(files) => Observation::Case { case_id: case_id.into(), files },
                Err(e) => failed(e.to_string()),
            }
        }
        ActionName::Evaluation => {
            let mut calls = Vec::new();
            let res = run_evaluation(backend, ws.root(), &mut calls);
            trace.extend(calls.iter().map(|c| c.to_string()));
            match res {
                Ok(a) => Observation::Simulation { result: a.result, artifacts: a.files },
                Err(e) => failed(e.to_string()),
            }
        }
        // Reasoning is a provider call made by the agent loop.
        ActionName::Reason => Observation::Text { text: String::new() },
    }
}

type AdmitFn<'a> = Box<dyn FnMut(usize, &str, &ActionInvocation) -> Admission + 'a>;

/// A workspace-backed environment with optional admission rules.
pub struct CaseEnv<'a> {
    pub ws: Workspace,
    pub backend: BackendConfig,
    pub trace: CallTrace,
    admit: Option<AdmitFn<'a>>,
    complete_on: Vec<ActionName>,
}

impl<'a> CaseEnv<'a> {
    pub fn new(ws: Workspace, backend: BackendConfig) -> Self {
        CaseEnv { ws, backend, trace: Vec::new(), admit: None, complete_on: Vec::new() }
    }

    pub fn with_admission(mut self, f: impl FnMut(usize, &str, &ActionInvocation) -> Admission + 'a) -> Self {
        self.admit = Some(Box::new(f));
        self
    }

    /// End the run once `action` has produced its observation.
    pub fn complete_on(mut self, action: ActionName) -> Self {
        self.complete_on.push(action);
        self
    }
}

impl Environment for CaseEnv<'_> {
    fn admit(&mut self, step: usize, thought: &str, action: &ActionInvocation) -> Admission {
        match &mut self.admit {
            Some(f) => f(step, thought, action),
            None => Admission::Accept,
        }
    }

    fn execute(&mut self, action: &ActionInvocation) -> Observation {
        run_composite_action(action, &mut self.ws, &self.backend, &mut self.trace)
    }

    fn after(&mut self, action: ActionName) -> Control {
        if self.complete_on.contains(&action) {
            Control::Complete
        } else {
            Control::Continue
        }
    }
}
