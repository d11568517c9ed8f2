//! Model providers: scripted (deterministic, rule based) and HTTP chat.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider `{provider}`: {msg}")]
    Failed { provider: String, msg: String },
    #[error("provider `{provider}`: no scripted reply matches the prompt")]
    NoScriptedReply { provider: String },
    #[error("provider `{provider}`: credential variable `{var}` is not set")]
    MissingCredential { provider: String, var: String },
    #[error("provider `{0}` is not configured")]
    Unknown(String),
    #[error("provider `{provider}`: bad configuration: {msg}")]
    Config { provider: String, msg: String },
}

pub trait ModelProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProviderKind {
    HttpChat,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderParams {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_max_tokens() -> u32 {
    2048
}

impl Default for ProviderParams {
    fn default() -> Self {
        ProviderParams { temperature: 0.0, max_tokens: default_max_tokens(), seed: Some(0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub provider_id: String,
    pub kind: ProviderKind,
    #[serde(default)]
    pub params: ProviderParams,
    #[serde(default)]
    pub credential_env_var: Option<String>,
    /// Chat-completions URL for HTTP providers.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    /// Script file for scripted providers, relative to the config file.
    #[serde(default)]
    pub script: Option<String>,
    #[serde(default)]
    pub timeout_s: Option<u64>,
}

impl ProviderSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Box<dyn ModelProvider>, ProviderError> {
        match self.kind {
            ProviderKind::Scripted => {
                let rel = self.script.as_deref().ok_or_else(|| self.config_err("scripted provider needs `script`"))?;
                let script = Script::load(&base_dir.join(rel)).map_err(|msg| self.config_err(&msg))?;
                Ok(Box::new(ScriptedProvider::new(&self.provider_id, script).map_err(|msg| self.config_err(&msg))?))
            }
            ProviderKind::HttpChat => Ok(Box::new(HttpChatProvider::new(self.clone())?)),
        }
    }

    fn config_err(&self, msg: &str) -> ProviderError {
        ProviderError::Config { provider: self.provider_id.clone(), msg: msg.into() }
    }
}

/// One scripted rule: fires when the prompt contains every `when` substring
/// and none of the `unless` substrings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default)]
    pub when: Vec<String>,
    #[serde(default)]
    pub unless: Vec<String>,
    /// Regex applied to the prompt; `{{1}}`, `{{2}}`... in `reply` are
    /// replaced by its capture groups.
    #[serde(default)]
    pub capture: Option<String>,
    pub reply: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub rules: Vec<Rule>,
    #[serde(default)]
    pub fallback: Option<String>,
}

impl Script {
    pub fn load(path: &Path) -> Result<Script, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Stateless and deterministic: the reply depends only on the prompt.
pub struct ScriptedProvider {
    id: String,
    rules: Vec<(Rule, Option<Regex>)>,
    fallback: Option<String>,
}

impl ScriptedProvider {
    pub fn new(id: &str, script: Script) -> Result<Self, String> {
        let rules = script
            .rules
            .into_iter()
            .map(|r| {
                let re = r.capture.as_deref().map(Regex::new).transpose().map_err(|e| e.to_string())?;
                Ok((r, re))
            })
            .collect::<Result<_, String>>()?;
        Ok(ScriptedProvider { id: id.into(), rules, fallback: script.fallback })
    }

    pub fn from_rules(id: &str, rules: Vec<Rule>) -> Self {
        Self::new(id, Script { rules, fallback: None }).expect("rules without bad regexes")
    }
}

impl ModelProvider for ScriptedProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        for (rule, re) in &self.rules {
            if !rule.when.iter().all(|w| prompt.contains(w.as_str())) || rule.unless.iter().any(|u| prompt.contains(u.as_str())) {
                continue;
            }
            let Some(re) = re else { return Ok(rule.reply.clone()) };
            let Some(caps) = re.captures(prompt) else { continue };
            let mut reply = rule.reply.clone();
            for i in 1..caps.len() {
                reply = reply.replace(&format!("{{{{{i}}}}}"), caps.get(i).map_or("", |m| m.as_str()));
            }
            return Ok(reply);
        }
        self.fallback.clone().ok_or_else(|| ProviderError::NoScriptedReply { provider: self.id.clone() })
    }
}

/// Wraps a provider and keeps every prompt it was sent.
pub struct RecordingProvider<P> {
    inner: P,
    prompts: Mutex<Vec<String>>,
}

impl<P: ModelProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        RecordingProvider { inner, prompts: Mutex::new(Vec::new()) }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().expect("not poisoned").clone()
    }
}

impl<P: ModelProvider> ModelProvider for RecordingProvider<P> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        self.prompts.lock().expect("not poisoned").push(prompt.into());
        self.inner.complete(prompt)
    }
}

/// OpenAI-compatible chat-completions client.
pub struct HttpChatProvider {
    spec: ProviderSpec,
    agent: ureq::Agent,
}

impl HttpChatProvider {
    pub fn new(spec: ProviderSpec) -> Result<Self, ProviderError> {
        if spec.endpoint.is_none() {
            return Err(spec.config_err("HTTP provider needs `endpoint`"));
        }
        let timeout = Duration::from_secs(spec.timeout_s.unwrap_or(120));
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().new_agent();
        Ok(HttpChatProvider { spec, agent })
    }

    fn fail(&self, msg: impl std::fmt::Display) -> ProviderError {
        ProviderError::Failed { provider: self.spec.provider_id.clone(), msg: msg.to_string() }
    }
}

impl ModelProvider for HttpChatProvider {
    fn id(&self) -> &str {
        &self.spec.provider_id
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let mut body = serde_json::json!({
            "model": self.spec.model.as_deref().unwrap_or(&self.spec.provider_id),
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.spec.params.temperature,
            "max_tokens": self.spec.params.max_tokens,
        });
        if let Some(seed) = self.spec.params.seed {
            body["seed"] = seed.into();
        }
        let url = self.spec.endpoint.as_deref().expect("checked in new");
        let mut req = self.agent.post(url);
        if let Some(var) = &self.spec.credential_env_var {
            let key = std::env::var(var)
                .map_err(|_| ProviderError::MissingCredential { provider: self.spec.provider_id.clone(), var: var.clone() })?;
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let value: serde_json::Value = req
            .send_json(&body)
            .map_err(|e| self.fail(e))?
            .body_mut()
            .read_json()
            .map_err(|e| self.fail(e))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| self.fail("response has no choices[0].message.content"))
    }
}
