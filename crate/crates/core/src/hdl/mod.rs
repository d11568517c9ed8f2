//! A restricted combinational Verilog subset: one module of `assign`
//! statements over two-state bit vectors of at most 64 bits.
//!
//! Supported: ANSI and non-ANSI port lists, `#(parameter ...)` headers,
//! `parameter`/`localparam`, `wire` declarations (with optional initializer),
//! continuous assignments, and the operators `~ ! & | ^ ~^ + - * << >> == !=
//! < <= > >= && || ?:` plus bit-select, part-select, concatenation and
//! replication. Anything sequential (`always`, `reg`, instances) is rejected
//! with a parse error; such designs belong on the external backend.

mod ast;
mod eval;
mod lexer;
mod parser;
mod vectors;

use alloc::string::String;
use core::fmt;

pub use ast::{Assign, BinaryOp, Direction, Expr, LValue, ModuleAst, Net, Parameter, Port, UnaryOp};
pub use eval::{evaluate, schedule, EvalError, Values};
pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse_module, parse_modules};
pub use vectors::{
    parse_bit_literal, run_source, run_vectors, BitLiteral, BitVec, TestVector, VectorError,
    VectorTestbench,
};

/// Maximum supported vector width.
pub const MAX_WIDTH: u32 = 64;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct Location {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HdlError {
    #[error("lex error at {loc}: {msg}")]
    Lex { loc: Location, msg: String },
    #[error("parse error at {loc}: {msg}")]
    Parse { loc: Location, msg: String },
    #[error("undeclared identifier `{name}` at {loc}")]
    UndeclaredIdentifier { loc: Location, name: String },
    #[error("combinational cycle through `{net}` at {loc}")]
    CombinationalCycle { loc: Location, net: String },
    #[error("multiple drivers for `{net}` at {loc}")]
    MultipleDrivers { loc: Location, net: String },
}

impl HdlError {
    pub fn location(&self) -> Location {
        match self {
            HdlError::Lex { loc, .. }
            | HdlError::Parse { loc, .. }
            | HdlError::UndeclaredIdentifier { loc, .. }
            | HdlError::CombinationalCycle { loc, .. }
            | HdlError::MultipleDrivers { loc, .. } => *loc,
        }
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}
