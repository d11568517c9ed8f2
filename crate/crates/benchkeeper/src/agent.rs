//! The thought → action → observation loop.

use std::fmt::Write as _;

use benchkeeper_core::reply::{parse_reply, Reply, ReplyError};
use benchkeeper_core::transcript::{AgentStep, AgentTranscript, Observation, Role, StepAction, Terminal};
use benchkeeper_core::{ActionInvocation, ActionName};

use crate::provider::{ModelProvider, ProviderError};

pub const DEFAULT_MAX_ITERS: usize = 8;

/// Environment verdict on a proposed action, checked before dispatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admission {
    Accept,
    /// Refuse this action; the refusal becomes the next observation.
    Reject(String),
    /// Stop the run without executing the action.
    Halt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Complete,
}

pub trait Environment {
    fn admit(&mut self, _step: usize, _thought: &str, _action: &ActionInvocation) -> Admission {
        Admission::Accept
    }

    fn execute(&mut self, action: &ActionInvocation) -> Observation;

    /// Whether the run ends once `action` has produced its observation.
    fn after(&mut self, _action: ActionName) -> Control {
        Control::Continue
    }
}

#[derive(Debug, Clone)]
pub struct AgentSpec<'a> {
    pub role: Role,
    pub instructions: &'a str,
    pub action_set: &'a [ActionName],
    pub max_iters: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("max_iters must be at least 1")]
    NoIterations,
    #[error("{action} is not allowed for role {role}")]
    ActionNotAllowed { role: &'static str, action: ActionName },
    #[error("transcript is already terminal")]
    Terminal,
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("malformed reply after retry: {0}")]
    MalformedReply(ReplyError),
}

#[derive(Clone, Copy)]
pub enum Mode {
    Act,
    Reason,
    Retry,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Act => "ACT",
            Mode::Reason => "REASON",
            Mode::Retry => "RETRY",
        }
    }
}

const REPLY_FORMAT: &str = "Reply format:\n\
THOUGHT: <your reasoning>\n\
ACTION: <NAME> { key=value; key=value }\n\
or, when the task is finished:\n\
THOUGHT: <your reasoning>\n\
FINAL: <result>\n\
Inside argument values write \\n for a newline and escape ; } \\ with a backslash.";

pub fn render_prompt(spec: &AgentSpec, transcript: &AgentTranscript, mode: Mode, note: Option<&str>) -> String {
    let step = transcript.next_index();
    let mut p = String::new();
    let _ = writeln!(p, "ROLE: {}", spec.role.as_str());
    let _ = writeln!(p, "STEP: {step}");
    let _ = writeln!(p, "MODE: {}", mode.as_str());
    let allowed: Vec<&str> = spec.action_set.iter().map(|a| a.as_str()).collect();
    let _ = writeln!(p, "ALLOWED_ACTIONS: {}", allowed.join(", "));
    let _ = writeln!(p, "\n{}\n", spec.instructions.trim_end());
    match mode {
        Mode::Reason => p.push_str("Reason over all observations below and answer with a single FINAL: line followed by the result.\n"),
        _ => p.push_str(REPLY_FORMAT),
    }
    let _ = write!(p, "\n\n## O0\n{}\n", transcript.initial_observation.render().trim_end());
    for s in &transcript.steps {
        let _ = write!(
            p,
            "\n## Step {}\nTHOUGHT: {}\nACTION: {}\nOBSERVATION:\n{}\n",
            s.index,
            s.thought,
            s.action.render(),
            s.observation.render().trim_end()
        );
    }
    let _ = write!(p, "\n## Latest observation (O{})\n{}\n", step - 1, transcript.last_observation().render().trim_end());
    if let Some(note) = note {
        let _ = write!(p, "\n## Retry\n{note}\n");
    }
    p
}

fn ask(spec: &AgentSpec, transcript: &AgentTranscript, provider: &dyn ModelProvider, mode: Mode) -> Result<Reply, AgentError> {
    let first = provider.complete(&render_prompt(spec, transcript, mode, None))?;
    let err = match parse(&first, mode) {
        Ok(r) => return Ok(r),
        Err(e) => e,
    };
    let note = format!(
        "Your previous reply could not be parsed ({err}). Reply again using the exact format.\nPrevious reply:\n{first}"
    );
    let second = provider.complete(&render_prompt(spec, transcript, Mode::Retry, Some(&note)))?;
    parse(&second, mode).map_err(AgentError::MalformedReply)
}

fn parse(text: &str, mode: Mode) -> Result<Reply, ReplyError> {
    match mode {
        // Reasoning output is free text; a FINAL marker is optional.
        Mode::Reason => match parse_reply(text) {
            Ok(r @ Reply::Final { .. }) => Ok(r),
            _ if text.trim().is_empty() => Err(ReplyError::Empty),
            _ => Ok(Reply::Final { thought: None, payload: text.trim().to_string() }),
        },
        _ => parse_reply(text),
    }
}

/// Asks the provider for the next thought and action, retrying once on a
/// malformed reply.
pub fn propose_step(spec: &AgentSpec, transcript: &AgentTranscript, provider: &dyn ModelProvider) -> Result<Reply, AgentError> {
    if transcript.terminal.is_some() {
        return Err(AgentError::Terminal);
    }
    ask(spec, transcript, provider, Mode::Act)
}

fn push(t: &mut AgentTranscript, thought: String, action: StepAction, observation: Observation) {
    let index = t.next_index();
    t.push(AgentStep { index, thought, action, observation }).expect("loop appends in order");
}

fn finish(t: &mut AgentTranscript, terminal: Terminal, error: Option<String>) {
    t.finish(terminal, error).expect("loop finishes once");
}

pub fn run_agent(
    spec: &AgentSpec,
    initial_observation: Observation,
    provider: &dyn ModelProvider,
    env: &mut dyn Environment,
) -> Result<AgentTranscript, AgentError> {
    if spec.max_iters == 0 {
        return Err(AgentError::NoIterations);
    }
    if let Some(a) = spec.action_set.iter().find(|a| !spec.role.allowed_actions().contains(a)) {
        return Err(AgentError::ActionNotAllowed { role: spec.role.as_str(), action: *a });
    }
    let mut t = AgentTranscript::new(spec.role, initial_observation);
    while t.steps.len() < spec.max_iters {
        let reply = match propose_step(spec, &t, provider) {
            Ok(r) => r,
            Err(e @ (AgentError::Provider(_) | AgentError::MalformedReply(_))) => {
                finish(&mut t, Terminal::ProviderError, Some(e.to_string()));
                return Ok(t);
            }
            Err(e) => return Err(e),
        };
        let (thought, name, args) = match reply {
            Reply::Final { thought, payload } => {
                push(&mut t, thought.unwrap_or_default(), StepAction::Final, Observation::Final { payload });
                finish(&mut t, Terminal::Completed, None);
                return Ok(t);
            }
            Reply::Act { thought, action, args } => (thought, action, args),
        };
        let reject = |t: &mut AgentTranscript, reason: String| {
            push(
                t,
                thought.clone(),
                StepAction::Rejected { name: name.clone(), args: args.clone(), reason: reason.clone() },
                Observation::Rejected { reason },
            )
        };
        let action = match name.parse::<ActionName>() {
            Ok(a) => a,
            Err(e) => {
                reject(&mut t, e.to_string());
                continue;
            }
        };
        if !spec.action_set.contains(&action) {
            reject(&mut t, format!("{action} is not in the allowed action set"));
            continue;
        }
        let inv = ActionInvocation { name: action, args: args.clone() };
        if let Err(msg) = inv.validate() {
            reject(&mut t, msg);
            continue;
        }
        match env.admit(t.next_index(), &thought, &inv) {
            Admission::Accept => {}
            Admission::Reject(reason) => {
                reject(&mut t, reason);
                continue;
            }
            Admission::Halt(reason) => {
                push(&mut t, thought, StepAction::Halted { name: action.as_str().into() }, Observation::Halted { reason });
                finish(&mut t, Terminal::Completed, None);
                return Ok(t);
            }
        }
        let observation = if action == ActionName::Reason {
            match ask(spec, &t, provider, Mode::Reason) {
                Ok(Reply::Final { payload, .. }) => Observation::Reasoning { payload },
                Ok(Reply::Act { .. }) => unreachable!("reason mode only yields FINAL"),
                Err(e) => {
                    finish(&mut t, Terminal::ProviderError, Some(e.to_string()));
                    return Ok(t);
                }
            }
        } else {
            env.execute(&inv)
        };
        push(&mut t, thought, StepAction::Invoke { invocation: inv }, observation);
        if env.after(action) == Control::Complete {
            finish(&mut t, Terminal::Completed, None);
            return Ok(t);
        }
    }
    finish(&mut t, Terminal::MaxIters, None);
    Ok(t)
}
