//! Agent actions and the plain-text reply grammar.
//!
//! A provider reply is either
//!
//! ```text
//! THOUGHT: <text>
//! ACTION: <NAME> { key=value; key=value }
//! ```
//!
//! or a terminal reply, optionally preceded by a thought:
//!
//! ```text
//! THOUGHT: <text>
//! FINAL: <payload, may continue over following lines>
//! ```
//!
//! Argument values are single-line; `\n`, `\;`, `\}` and `\\` escape a
//! newline, separator, closing brace and backslash.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionName {
    CompareCodes,
    CheckInstruction,
    Reason,
    Evaluation,
    Revise,
    ViewFile,
    EditFile,
    SearchFiles,
    LocateCase,
}

impl ActionName {
    pub const ALL: [ActionName; 9] = [
        ActionName::CompareCodes,
        ActionName::CheckInstruction,
        ActionName::Reason,
        ActionName::Evaluation,
        ActionName::Revise,
        ActionName::ViewFile,
        ActionName::EditFile,
        ActionName::SearchFiles,
        ActionName::LocateCase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionName::CompareCodes => "COMPARE_CODES",
            ActionName::CheckInstruction => "CHECK_INSTRUCTION",
            ActionName::Reason => "REASON",
            ActionName::Evaluation => "EVALUATION",
            ActionName::Revise => "REVISE",
            ActionName::ViewFile => "VIEW_FILE",
            ActionName::EditFile => "EDIT_FILE",
            ActionName::SearchFiles => "SEARCH_FILES",
            ActionName::LocateCase => "LOCATE_CASE",
        }
    }

    /// `(required, optional)` argument keys.
    pub fn schema(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ActionName::CompareCodes | ActionName::CheckInstruction | ActionName::Reason | ActionName::Evaluation => (&[], &[]),
            ActionName::Revise => (&["text"], &[]),
            ActionName::ViewFile => (&["path"], &[]),
            ActionName::EditFile => (&["path", "content"], &[]),
            ActionName::SearchFiles => (&["pattern"], &[]),
            ActionName::LocateCase => (&["case_id"], &[]),
        }
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for ActionName {
    type Err = UnknownAction;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionName::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| UnknownAction(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionInvocation {
    pub name: ActionName,
    pub args: BTreeMap<String, String>,
}

impl ActionInvocation {
    pub fn new(name: ActionName) -> Self {
        ActionInvocation { name, args: BTreeMap::new() }
    }

    pub fn with_arg(mut self, key: &str, value: impl Into<String>) -> Self {
        self.args.insert(key.into(), value.into());
        self
    }

    pub fn arg(&self, key: &str) -> Option<&str> {
        self.args.get(key).map(String::as_str)
    }

    /// Checks the arguments against the action's schema.
    pub fn validate(&self) -> Result<(), String> {
        let (required, optional) = self.name.schema();
        if let Some(missing) = required.iter().find(|k| !self.args.contains_key(**k)) {
            return Err(format!("{} requires argument `{missing}`", self.name));
        }
        if let Some(extra) = self.args.keys().find(|k| !required.contains(&k.as_str()) && !optional.contains(&k.as_str())) {
            return Err(format!("{} does not accept argument `{extra}`", self.name));
        }
        Ok(())
    }

    /// Renders in the reply grammar, e.g. `VIEW_FILE { path=description.txt }`.
    pub fn render(&self) -> String {
        render_action(self.name.as_str(), &self.args)
    }
}

pub fn render_action(name: &str, args: &BTreeMap<String, String>) -> String {
    if args.is_empty() {
        return format!("{name} {{}}");
    }
    let body: Vec<String> = args.iter().map(|(k, v)| format!("{k}={}", escape_value(v))).collect();
    format!("{name} {{ {} }}", body.join("; "))
}

pub fn escape_value(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for c in v.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            ';' => out.push_str("\\;"),
            '}' => out.push_str("\\}"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reply {
    /// A thought and a requested action. The action name is not yet
    /// validated; unknown names are rejected by the agent loop.
    Act { thought: String, action: String, args: BTreeMap<String, String> },
    Final { thought: Option<String>, payload: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplyError {
    #[error("reply is empty")]
    Empty,
    #[error("reply has no THOUGHT line before ACTION")]
    MissingThought,
    #[error("reply has neither an ACTION nor a FINAL line")]
    MissingAction,
    #[error("malformed action line: {0}")]
    MalformedAction(String),
}

const THOUGHT: &str = "THOUGHT:";
const ACTION: &str = "ACTION:";
const FINAL: &str = "FINAL:";

fn strip_marker<'a>(line: &'a str, marker: &str) -> Option<&'a str> {
    line.trim_start().strip_prefix(marker).map(|rest| rest.strip_prefix(' ').unwrap_or(rest))
}

pub fn parse_reply(text: &str) -> Result<Reply, ReplyError> {
    let lines: Vec<&str> = text.lines().collect();
    let Some(first) = lines.iter().position(|l| !l.trim().is_empty()) else {
        return Err(ReplyError::Empty);
    };
    let mut idx = first;
    let mut thought: Option<String> = None;
    if let Some(t) = strip_marker(lines[idx], THOUGHT) {
        let mut buf = String::from(t.trim_end());
        idx += 1;
        while idx < lines.len() && strip_marker(lines[idx], ACTION).is_none() && strip_marker(lines[idx], FINAL).is_none() {
            buf.push('\n');
            buf.push_str(lines[idx].trim_end());
            idx += 1;
        }
        thought = Some(buf.trim().to_string());
    }
    let Some(line) = lines.get(idx) else {
        return Err(ReplyError::MissingAction);
    };
    if let Some(rest) = strip_marker(line, FINAL) {
        let mut payload = String::from(rest);
        for l in &lines[idx + 1..] {
            payload.push('\n');
            payload.push_str(l);
        }
        return Ok(Reply::Final { thought, payload: payload.trim_end().to_string() });
    }
    if let Some(rest) = strip_marker(line, ACTION) {
        let Some(thought) = thought else {
            return Err(ReplyError::MissingThought);
        };
        let (action, args) = parse_action_line(rest)?;
        return Ok(Reply::Act { thought, action, args });
    }
    if thought.is_some() {
        Err(ReplyError::MissingAction)
    } else {
        Err(ReplyError::MissingThought)
    }
}

/// Parses `NAME { k1=v1; k2=v2 }`; the braces may be omitted when there are
/// no arguments.
pub fn parse_action_line(line: &str) -> Result<(String, BTreeMap<String, String>), ReplyError> {
    let line = line.trim();
    let (name, rest) = match line.find(|c: char| c.is_whitespace() || c == '{') {
        Some(i) => (&line[..i], line[i..].trim_start()),
        None => (line, ""),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ReplyError::MalformedAction(format!("bad action name `{name}`")));
    }
    let mut args = BTreeMap::new();
    if rest.is_empty() {
        return Ok((name.into(), args));
    }
    let Some(body) = rest.strip_prefix('{') else {
        return Err(ReplyError::MalformedAction(format!("expected `{{` after {name}")));
    };
    let mut chars = body.chars();
    let mut key = String::new();
    let mut value = String::new();
    let mut in_value = false;
    let mut closed = false;
    while let Some(c) = chars.next() {
        match c {
            '\\' if in_value => match chars.next() {
                Some('n') => value.push('\n'),
                Some(c @ ('\\' | ';' | '}' | '=')) => value.push(c),
                other => return Err(ReplyError::MalformedAction(format!("bad escape `\\{}`", other.unwrap_or(' ')))),
            },
            '=' if !in_value => in_value = true,
            ';' | '}' => {
                let k = key.trim();
                if !k.is_empty() || in_value {
                    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(ReplyError::MalformedAction(format!("bad argument key `{k}`")));
                    }
                    if !in_value {
                        return Err(ReplyError::MalformedAction(format!("argument `{k}` has no value")));
                    }
                    if args.insert(k.to_string(), value.trim().to_string()).is_some() {
                        return Err(ReplyError::MalformedAction(format!("duplicate argument `{k}`")));
                    }
                }
                key.clear();
                value.clear();
                in_value = false;
                if c == '}' {
                    closed = true;
                    break;
                }
            }
            c if in_value => value.push(c),
            c => key.push(c),
        }
    }
    if !closed {
        return Err(ReplyError::MalformedAction("missing closing `}`".into()));
    }
    if !chars.as_str().trim().is_empty() {
        return Err(ReplyError::MalformedAction("trailing text after `}`".into()));
    }
    Ok((name.into(), args))
}
