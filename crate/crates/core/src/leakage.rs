//! Verbatim code-leakage detection between a revised description and the
//! reference implementation.
//!
//! Texts are tokenized into identifiers, literals and operators, so matching
//! ignores whitespace and layout. A leak is a maximal run of at least `n`
//! consecutive revision tokens that also appears contiguously in the
//! reference.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Default minimum run length, in tokens.
pub const DEFAULT_MIN_TOKENS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexToken<'a> {
    pub text: &'a str,
    pub start: usize,
}

/// Byte span `(start, len)` into the revised text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

/// Token-index run `revised[start..start + len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TokenRun {
    pub start: usize,
    pub len: usize,
}

const OPERATORS: &[&str] = &[
    "===", "!==", "<<<", ">>>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "~^", "^~", "~&", "~|", "->", "::", "+:", "-:",
];

pub fn tokenize(text: &str) -> Vec<LexToken<'_>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$') {
                i += 1;
            }
        } else if c.is_ascii_digit() || (c == b'\'' && bytes.get(i + 1).is_some_and(|b| b"bBoOdDhHsS".contains(b))) {
            // Numbers, optionally sized/based: 4'b1010, 'hFF, 32
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
            if bytes.get(i) == Some(&b'\'') {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
            }
        } else if let Some(op) = OPERATORS.iter().find(|op| text[i..].starts_with(**op)) {
            i += op.len();
        } else {
            // Any other single character, including non-ASCII.
            i += text[i..].chars().next().map_or(1, char::len_utf8);
        }
        out.push(LexToken { text: &text[start..i], start });
    }
    out
}

/// Maximal shared runs of at least `min_tokens` tokens, by token index.
pub fn shared_runs(revised: &[&str], reference: &[&str], min_tokens: usize) -> Vec<TokenRun> {
    let min_tokens = min_tokens.max(1);
    let (m, k) = (revised.len(), reference.len());
    if m == 0 || k == 0 {
        return Vec::new();
    }
    // longest[i] = longest prefix of revised[i..] occurring anywhere in reference.
    let mut longest = alloc::vec![0usize; m];
    let mut next_row = alloc::vec![0usize; k + 1];
    let mut row = alloc::vec![0usize; k + 1];
    for i in (0..m).rev() {
        for j in (0..k).rev() {
            row[j] = if revised[i] == reference[j] { next_row[j + 1] + 1 } else { 0 };
        }
        longest[i] = row[..k].iter().copied().max().unwrap_or(0);
        core::mem::swap(&mut row, &mut next_row);
    }
    // A run starting at i is left-maximal unless the run at i-1 covers it.
    (0..m)
        .filter(|&i| longest[i] >= min_tokens && (i == 0 || longest[i - 1] != longest[i] + 1))
        .map(|i| TokenRun { start: i, len: longest[i] })
        .collect()
}

/// Spans of `revised` that copy at least `min_tokens` consecutive tokens of
/// `reference` verbatim. An empty reference yields no spans.
pub fn detect_leakage(revised: &str, reference: &str, min_tokens: usize) -> Vec<Span> {
    let rev = tokenize(revised);
    let rev_text: Vec<&str> = rev.iter().map(|t| t.text).collect();
    let ref_text: Vec<&str> = tokenize(reference).into_iter().map(|t| t.text).collect();
    shared_runs(&rev_text, &ref_text, min_tokens)
        .into_iter()
        .map(|run| {
            let first = rev[run.start];
            let last = rev[run.start + run.len - 1];
            Span { start: first.start, len: last.start + last.text.len() - first.start }
        })
        .collect()
}
