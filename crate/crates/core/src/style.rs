//! Description rewriting styles.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleTemplate {
    pub style_id: String,
    pub name: String,
    pub instruction: String,
}

pub const IDENTITY_STYLE: &str = "identity";

const BUILTINS: [(&str, &str, &str); 4] = [
    (
        "technical",
        "Technical/Formal",
        "Rewrite the description in a precise, formal engineering register. Use exact terminology, \
         enumerate ports and behaviour in a structured way and keep every name, width and condition unchanged.",
    ),
    (
        "educational",
        "Educational/Tutorial",
        "Rewrite the description as a step-by-step explanation for a student. Introduce the purpose first, \
         then walk through the inputs, outputs and behaviour, keeping every name, width and condition unchanged.",
    ),
    (
        "problem",
        "Problem/Task-Solving",
        "Rewrite the description as a task to be solved: a problem statement, the constraints the design must meet, \
         and the expected result. Keep every name, width and condition unchanged.",
    ),
    (
        "specification",
        "Specification/Documentation",
        "Rewrite the description as a specification document with the sections Purpose, Functional Requirements, \
         Interface Specification and Design Notes. Keep every name, width and condition unchanged.",
    ),
];

/// The four built-in styles, in their canonical order.
pub fn builtin_styles() -> Vec<StyleTemplate> {
    BUILTINS
        .iter()
        .map(|(id, name, instruction)| StyleTemplate { style_id: (*id).into(), name: (*name).into(), instruction: (*instruction).into() })
        .collect()
}

pub fn identity_style() -> StyleTemplate {
    StyleTemplate {
        style_id: IDENTITY_STYLE.into(),
        name: "Identity".into(),
        instruction: "Return the description unchanged.".into(),
    }
}

impl StyleTemplate {
    pub fn is_identity(&self) -> bool {
        self.style_id == IDENTITY_STYLE
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown style `{0}`")]
pub struct UnknownStyle(pub String);

/// Looks `style_id` up among `extra`, the built-ins and the identity style.
pub fn find_style(style_id: &str, extra: &[StyleTemplate]) -> Result<StyleTemplate, UnknownStyle> {
    extra
        .iter()
        .cloned()
        .chain(builtin_styles())
        .chain(core::iter::once(identity_style()))
        .find(|s| s.style_id == style_id)
        .ok_or_else(|| UnknownStyle(style_id.into()))
}
