//! Style rewrites of descriptions for overfitting detection.

use std::fs;
use std::path::Path;

use benchkeeper_core::style::{builtin_styles, find_style, StyleTemplate, UnknownStyle};
use benchkeeper_core::transcript::{AgentTranscript, Observation, Role, Terminal};
use benchkeeper_core::verdict::ReviewResult;
use benchkeeper_core::{ActionName, BenchmarkCase};
use serde::{Deserialize, Serialize};

use crate::actions::CaseEnv;
use crate::agent::{run_agent, AgentSpec};
use crate::eval::EvalTask;
use crate::flaw::{review_text, AgentOptions, FlawError};
use crate::provider::ModelProvider;
use crate::suite::{self, io_err, write_atomic, SuiteError};
use crate::workspace::Workspace;

pub const VARIANTS_DIR: &str = "variants";
pub const VARIANTS_INDEX: &str = "variants.json";

/// A style given by id or spelled out in full.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StyleEntry {
    Id(String),
    Template(StyleTemplate),
}

pub type StyleSet = Vec<StyleEntry>;

pub fn resolve_styles(set: Option<&StyleSet>) -> Result<Vec<StyleTemplate>, UnknownStyle> {
    let Some(set) = set else { return Ok(builtin_styles()) };
    let custom: Vec<StyleTemplate> = set
        .iter()
        .filter_map(|e| match e {
            StyleEntry::Template(t) => Some(t.clone()),
            StyleEntry::Id(_) => None,
        })
        .collect();
    set.iter()
        .map(|e| match e {
            StyleEntry::Template(t) => Ok(t.clone()),
            StyleEntry::Id(id) => find_style(id, &custom),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewritePlan {
    pub case_id: String,
    pub style_id: String,
    pub plan: String,
    pub provider_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewrittenDescription {
    pub case_id: String,
    pub variant_id: String,
    pub style_id: String,
    pub text: String,
    pub review: ReviewResult,
}

const UPDATE_INSTRUCTIONS: &str = "\
You rewrite benchmark design descriptions in a different style while keeping their semantics and
functionality. Module names, port names, widths and behaviour must stay exactly as they are, and no
requirement may be added or removed. Reply with FINAL: followed by the requested result.";

fn update_spec(max_iters: usize) -> AgentSpec<'static> {
    const ACTIONS: [ActionName; 3] = [ActionName::CheckInstruction, ActionName::Revise, ActionName::Reason];
    AgentSpec { role: Role::DescriptionUpdate, instructions: UPDATE_INSTRUCTIONS, action_set: &ACTIONS, max_iters }
}

fn agent_failed(t: &AgentTranscript) -> Option<FlawError> {
    (t.terminal == Some(Terminal::ProviderError)).then(|| FlawError::Provider(t.error.clone().unwrap_or_default()))
}

fn stage(case: &BenchmarkCase, opts: &AgentOptions) -> Result<(tempfile::TempDir, CaseEnv<'static>), FlawError> {
    let dir = tempfile::Builder::new().prefix("bk-rewrite-").tempdir()?;
    let ws = Workspace::stage(dir.path(), case, None, None, &[suite::DESCRIPTION])?;
    Ok((dir, CaseEnv::new(ws, opts.backend.clone())))
}

/// Produces the rewriting plan for `style`.
pub fn plan_rewrite(
    case: &BenchmarkCase,
    style: &StyleTemplate,
    styles: &[StyleTemplate],
    provider: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<(RewritePlan, Option<AgentTranscript>), FlawError> {
    let plan = |text: String| RewritePlan { case_id: case.case_id.clone(), style_id: style.style_id.clone(), plan: text, provider_id: provider.id().into() };
    if style.is_identity() {
        return Ok((plan("no changes".into()), None));
    }
    let listing: String = styles.iter().map(|s| format!("- {}: {}\n", s.name, s.instruction)).collect();
    let o0 = Observation::text(format!(
        "TASK: PLAN\nAvailable styles:\n{listing}Chosen style: {} ({})\nWrite a plan for rewriting the description below in the chosen style.\n\
         DESCRIPTION:\n{}\nEND DESCRIPTION",
        style.name,
        style.style_id,
        case.description.trim_end()
    ));
    let (_dir, mut env) = stage(case, opts)?;
    let t = run_agent(&update_spec(opts.max_iters), o0, provider, &mut env)?;
    if let Some(e) = agent_failed(&t) {
        return Err(e);
    }
    let text = t.final_payload().unwrap_or_default().trim().to_string();
    Ok((plan(if text.is_empty() { format!("rewrite in the {} style", style.name) } else { text }), Some(t)))
}

/// Carries out a plan. The result is either the rewritten description.txt
/// or, if the agent did not edit it, its FINAL payload.
pub fn rewrite_description(
    case: &BenchmarkCase,
    plan: &RewritePlan,
    style: &StyleTemplate,
    provider: &dyn ModelProvider,
    opts: &AgentOptions,
    reviewer_notes: Option<&str>,
) -> Result<(String, Option<AgentTranscript>), FlawError> {
    if style.is_identity() {
        return Ok((case.description.clone(), None));
    }
    let mut task = format!(
        "TASK: REWRITE\nStyle: {} ({})\nPlan:\n{}\nRewrite the description below following the plan.\n\
         DESCRIPTION:\n{}\nEND DESCRIPTION",
        style.name,
        style.style_id,
        plan.plan.trim_end(),
        case.description.trim_end()
    );
    if let Some(notes) = reviewer_notes {
        task.push_str(&format!("\nA previous attempt was rejected by the reviewer: {notes}"));
    }
    let (_dir, mut env) = stage(case, opts)?;
    let t = run_agent(&update_spec(opts.max_iters), Observation::text(task), provider, &mut env)?;
    if let Some(e) = agent_failed(&t) {
        return Err(e);
    }
    let edited = env.ws.view_file(suite::DESCRIPTION)?;
    let text = if edited != case.description {
        edited
    } else {
        t.final_payload().map(|p| p.trim().to_string() + "\n").unwrap_or_default()
    };
    Ok((text, Some(t)))
}

#[derive(Debug, Default)]
pub struct VariantBatch {
    pub variants: Vec<RewrittenDescription>,
    pub log: Vec<String>,
    pub transcripts: Vec<(String, AgentTranscript)>,
}

/// Rewrites `case` once per style (at most `k`), reviewing each candidate.
/// A rejected candidate is retried once with the reviewer's notes and then
/// dropped. Variant ids are positional: `v1` is the first style.
pub fn generate_variants(
    case: &BenchmarkCase,
    styles: &[StyleTemplate],
    k: usize,
    updater: &dyn ModelProvider,
    reviewer: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<VariantBatch, FlawError> {
    let mut batch = VariantBatch::default();
    for (i, style) in styles.iter().take(k).enumerate() {
        let variant_id = format!("v{}", i + 1);
        let tag = format!("{}-{variant_id}", case.case_id);
        if style.is_identity() {
            batch.variants.push(RewrittenDescription {
                case_id: case.case_id.clone(),
                variant_id,
                style_id: style.style_id.clone(),
                text: case.description.clone(),
                review: ReviewResult::new(true, Vec::new(), "identity rewrite"),
            });
            continue;
        }
        let (plan, t) = plan_rewrite(case, style, styles, updater, opts)?;
        batch.transcripts.extend(t.map(|t| (format!("plan-{tag}"), t)));
        let mut notes: Option<String> = None;
        let mut accepted = None;
        for attempt in 1..=2 {
            let (text, t) = rewrite_description(case, &plan, style, updater, opts, notes.as_deref())?;
            batch.transcripts.extend(t.map(|t| (format!("rewrite-{tag}-{attempt}"), t)));
            let review = review_text(case, &text, reviewer, opts)?;
            batch.transcripts.extend(review.transcript.map(|t| (format!("review-{tag}-{attempt}"), t)));
            if review.result.approved && !text.trim().is_empty() {
                accepted = Some(RewrittenDescription {
                    case_id: case.case_id.clone(),
                    variant_id: variant_id.clone(),
                    style_id: style.style_id.clone(),
                    text,
                    review: review.result,
                });
                break;
            }
            notes = Some(review.result.reviewer_notes.clone());
        }
        match accepted {
            Some(v) => batch.variants.push(v),
            None => batch.log.push(format!(
                "dropped {variant_id} ({}) of case `{}` after retry: {}",
                style.style_id,
                case.case_id,
                notes.unwrap_or_default()
            )),
        }
    }
    Ok(batch)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct IndexEntry {
    variant_id: String,
    style_id: String,
    file: String,
    review: ReviewResult,
}

/// Writes `variants/<id>.txt` and `variants.json` beside the case.
pub fn write_variants(case_dir: &Path, variants: &[RewrittenDescription]) -> Result<(), SuiteError> {
    let vdir = case_dir.join(VARIANTS_DIR);
    fs::create_dir_all(&vdir).map_err(io_err(&vdir))?;
    let mut index = Vec::new();
    for v in variants {
        let file = format!("{VARIANTS_DIR}/{}.txt", v.variant_id);
        let path = case_dir.join(&file);
        write_atomic(&path, v.text.as_bytes()).map_err(io_err(&path))?;
        index.push(IndexEntry { variant_id: v.variant_id.clone(), style_id: v.style_id.clone(), file, review: v.review.clone() });
    }
    let path = case_dir.join(VARIANTS_INDEX);
    let body = serde_json::to_string_pretty(&index).expect("serializable") + "\n";
    write_atomic(&path, body.as_bytes()).map_err(io_err(&path))
}

pub fn load_variants(case_dir: &Path, case_id: &str) -> Result<Vec<RewrittenDescription>, SuiteError> {
    let path = case_dir.join(VARIANTS_INDEX);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let index: Vec<IndexEntry> = serde_json::from_str(&text).map_err(|e| SuiteError::MalformedManifest {
        file: path.clone(),
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    index
        .into_iter()
        .map(|e| {
            let p = case_dir.join(&e.file);
            let text = fs::read_to_string(&p).map_err(io_err(&p))?;
            Ok(RewrittenDescription { case_id: case_id.into(), variant_id: e.variant_id, style_id: e.style_id, text, review: e.review })
        })
        .collect()
}

/// Evaluation tasks for the approved variants of a case.
pub fn variant_tasks<'a>(case: &'a BenchmarkCase, variants: &[RewrittenDescription]) -> Vec<EvalTask<'a>> {
    variants
        .iter()
        .filter(|v| v.review.approved)
        .map(|v| EvalTask { case, variant_id: v.variant_id.clone(), description: v.text.clone() })
        .collect()
}
