mod common;

use benchkeeper::agent::{run_agent, Admission, AgentError, AgentSpec, Control, Environment};
use benchkeeper::provider::{ModelProvider, RecordingProvider};
use benchkeeper_core::transcript::{AgentTranscript, Observation, Role, StepAction, Terminal};
use benchkeeper_core::{ActionInvocation, ActionName};
use common::{rule, scripted};

#[derive(Default)]
struct Echo {
    executed: Vec<ActionName>,
    halt_on: Option<ActionName>,
    complete_on: Option<ActionName>,
}

impl Environment for Echo {
    fn admit(&mut self, _step: usize, _thought: &str, action: &ActionInvocation) -> Admission {
        if Some(action.name) == self.halt_on {
            Admission::Halt("stop here".into())
        } else {
            Admission::Accept
        }
    }

    fn execute(&mut self, action: &ActionInvocation) -> Observation {
        self.executed.push(action.name);
        Observation::text(format!("did {}", action.name))
    }

    fn after(&mut self, action: ActionName) -> Control {
        if Some(action) == self.complete_on {
            Control::Complete
        } else {
            Control::Continue
        }
    }
}

const ACTIONS: [ActionName; 3] = [ActionName::CompareCodes, ActionName::CheckInstruction, ActionName::Reason];

fn spec(max_iters: usize) -> AgentSpec<'static> {
    AgentSpec { role: Role::FailureAnalysis, instructions: "test", action_set: &ACTIONS, max_iters }
}

fn run(p: &dyn ModelProvider, env: &mut Echo, max_iters: usize) -> AgentTranscript {
    let t = run_agent(&spec(max_iters), Observation::text("start"), p, env).unwrap();
    assert!(t.is_well_formed());
    t
}

#[test]
fn final_reply_completes() {
    let p = scripted("m", vec![rule(&["STEP: 1\n"], "THOUGHT: look\nACTION: COMPARE_CODES"), rule(&["STEP: 2\n"], "FINAL: done")]);
    let mut env = Echo::default();
    let t = run(&p, &mut env, 8);
    assert_eq!(t.terminal, Some(Terminal::Completed));
    assert_eq!(t.action_names(), [ActionName::CompareCodes]);
    assert_eq!(t.final_payload(), Some("done"));
    assert_eq!(env.executed, [ActionName::CompareCodes]);
}

#[test]
fn malformed_reply_is_retried_once() {
    let p = scripted(
        "m",
        vec![rule(&["MODE: RETRY", "could not be parsed"], "THOUGHT: fixed\nFINAL: ok"), rule(&["MODE: ACT"], "garbage without markers")],
    );
    let p = RecordingProvider::new(p);
    let t = run(&p, &mut Echo::default(), 8);
    assert_eq!(t.terminal, Some(Terminal::Completed));
    assert_eq!(t.final_payload(), Some("ok"));
    assert_eq!(p.prompts().len(), 2);
}

#[test]
fn second_malformed_reply_is_a_provider_error() {
    let p = scripted("m", vec![rule(&[], "still garbage")]);
    let t = run(&p, &mut Echo::default(), 8);
    assert_eq!(t.terminal, Some(Terminal::ProviderError));
    assert!(t.steps.is_empty());
    assert!(t.error.as_deref().unwrap().contains("malformed"));
}

#[test]
fn provider_failure_is_terminal() {
    let p = scripted("m", vec![]);
    let t = run(&p, &mut Echo::default(), 8);
    assert_eq!(t.terminal, Some(Terminal::ProviderError));
}

#[test]
fn unknown_and_disallowed_actions_are_rejected_and_loop_continues() {
    let p = scripted(
        "m",
        vec![
            rule(&["STEP: 1\n"], "THOUGHT: x\nACTION: LAUNCH_ROCKET"),
            rule(&["STEP: 2\n"], "THOUGHT: x\nACTION: EVALUATION"),
            rule(&["STEP: 3\n"], "THOUGHT: x\nACTION: CHECK_INSTRUCTION { bogus=1 }"),
            rule(&["STEP: 4\n"], "FINAL: end"),
        ],
    );
    let mut env = Echo::default();
    let t = run(&p, &mut env, 8);
    assert!(matches!(t.steps[0].action, StepAction::Rejected { .. }));
    assert!(matches!(t.steps[1].action, StepAction::Rejected { .. }));
    assert!(matches!(t.steps[2].action, StepAction::Rejected { .. }));
    assert!(env.executed.is_empty());
    assert_eq!(t.terminal, Some(Terminal::Completed));
}

#[test]
fn max_iters_bounds_the_run() {
    let p = scripted("m", vec![rule(&[], "THOUGHT: again\nACTION: CHECK_INSTRUCTION")]);
    let t = run(&p, &mut Echo::default(), 3);
    assert_eq!(t.steps.len(), 3);
    assert_eq!(t.terminal, Some(Terminal::MaxIters));
}

#[test]
fn reason_is_a_provider_call_in_reason_mode() {
    let p = scripted(
        "m",
        vec![rule(&["MODE: REASON"], "IS_FLAW: NO\nREASON: fine"), rule(&["STEP: 1\n"], "THOUGHT: think\nACTION: REASON")],
    );
    let mut env = Echo { complete_on: Some(ActionName::Reason), ..Echo::default() };
    let t = run(&p, &mut env, 8);
    assert!(env.executed.is_empty());
    assert_eq!(t.steps[0].observation, Observation::Reasoning { payload: "IS_FLAW: NO\nREASON: fine".into() });
    assert_eq!(t.final_payload(), Some("IS_FLAW: NO\nREASON: fine"));
}

#[test]
fn halt_stops_without_executing() {
    let p = scripted("m", vec![rule(&[], "THOUGHT: go\nACTION: COMPARE_CODES")]);
    let mut env = Echo { halt_on: Some(ActionName::CompareCodes), ..Echo::default() };
    let t = run(&p, &mut env, 8);
    assert!(env.executed.is_empty());
    assert!(matches!(t.steps[0].action, StepAction::Halted { .. }));
    assert_eq!(t.terminal, Some(Terminal::Completed));
}

#[test]
fn prompt_carries_history() {
    let p = RecordingProvider::new(scripted(
        "m",
        vec![rule(&["STEP: 1\n"], "THOUGHT: first look\nACTION: COMPARE_CODES"), rule(&["STEP: 2\n"], "FINAL: done")],
    ));
    run(&p, &mut Echo::default(), 8);
    let prompts = p.prompts();
    let second = &prompts[1];
    assert!(second.starts_with("ROLE: FAILURE_ANALYSIS\nSTEP: 2\nMODE: ACT\nALLOWED_ACTIONS: COMPARE_CODES, CHECK_INSTRUCTION, REASON\n"));
    assert!(second.contains("## O0\nstart"));
    assert!(second.contains("## Step 1\nTHOUGHT: first look"));
    assert!(second.contains("## Latest observation (O1)\ndid COMPARE_CODES"));
}

#[test]
fn spec_errors() {
    let p = scripted("m", vec![]);
    assert!(matches!(run_agent(&spec(0), Observation::text("s"), &p, &mut Echo::default()), Err(AgentError::NoIterations)));
    let bad = AgentSpec { role: Role::DescriptionReview, instructions: "", action_set: &[ActionName::Revise], max_iters: 3 };
    assert!(matches!(run_agent(&bad, Observation::text("s"), &p, &mut Echo::default()), Err(AgentError::ActionNotAllowed { .. })));
}
