use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    In,
    Out,
}

/// Declared range `[msb:lsb]`. Scalars are `[0:0]`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub msb: i64,
    pub lsb: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Net {
    pub name: String,
    pub msb: i64,
    pub lsb: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: u64,
    pub local: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Assign {
    pub target: LValue,
    pub expr: Expr,
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LValue {
    Whole(String),
    Bit(String, i64),
    Part(String, i64, i64),
    Concat(Vec<LValue>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum UnaryOp {
    Not,
    LogicalNot,
    Neg,
    Plus,
    ReduceAnd,
    ReduceNand,
    ReduceOr,
    ReduceNor,
    ReduceXor,
    ReduceXnor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    Xnor,
    Add,
    Sub,
    Mul,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogicalAnd,
    LogicalOr,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Expr {
    Ident {
        name: String,
        loc: Location,
    },
    /// `width` is 32 for unsized literals.
    Literal {
        value: u64,
        width: u32,
    },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Bit {
        name: String,
        index: Box<Expr>,
        loc: Location,
    },
    Part {
        name: String,
        msb: i64,
        lsb: i64,
        loc: Location,
    },
    Concat(Vec<Expr>),
    Replicate(u32, Vec<Expr>),
}

impl Expr {
    /// Names of every signal read by this expression.
    pub fn reads<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ident { name, .. } | Expr::Part { name, .. } => out.push(name),
            Expr::Bit { name, index, .. } => {
                out.push(name);
                index.reads(out);
            }
            Expr::Literal { .. } => {}
            Expr::Unary(_, e) => e.reads(out),
            Expr::Binary(_, l, r) => {
                l.reads(out);
                r.reads(out);
            }
            Expr::Ternary(c, t, f) => {
                c.reads(out);
                t.reads(out);
                f.reads(out);
            }
            Expr::Concat(items) | Expr::Replicate(_, items) => {
                for e in items {
                    e.reads(out);
                }
            }
        }
    }
}

impl LValue {
    pub fn targets<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            LValue::Whole(n) | LValue::Bit(n, _) | LValue::Part(n, _, _) => out.push(n),
            LValue::Concat(items) => {
                for lv in items {
                    lv.targets(out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModuleAst {
    pub name: String,
    pub params: Vec<Parameter>,
    pub ports: Vec<Port>,
    pub nets: Vec<Net>,
    pub assigns: Vec<Assign>,
}

pub(crate) fn range_width(msb: i64, lsb: i64) -> u32 {
    (msb - lsb).unsigned_abs() as u32 + 1
}

/// Offset of index `i` from the least significant bit of a `[msb:lsb]` range.
pub(crate) fn bit_offset(msb: i64, lsb: i64, i: i64) -> Option<u32> {
    if msb >= lsb {
        (lsb..=msb).contains(&i).then(|| (i - lsb) as u32)
    } else {
        (msb..=lsb).contains(&i).then(|| (lsb - i) as u32)
    }
}

impl Port {
    pub fn width(&self) -> u32 {
        range_width(self.msb, self.lsb)
    }
}

impl Net {
    pub fn width(&self) -> u32 {
        range_width(self.msb, self.lsb)
    }
}

impl ModuleAst {
    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.direction == Direction::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.direction == Direction::Out)
    }

    /// Declared `(msb, lsb)` of a port or net.
    pub fn signal_range(&self, name: &str) -> Option<(i64, i64)> {
        self.ports
            .iter()
            .find(|p| p.name == name)
            .map(|p| (p.msb, p.lsb))
            .or_else(|| self.nets.iter().find(|n| n.name == name).map(|n| (n.msb, n.lsb)))
    }
}
