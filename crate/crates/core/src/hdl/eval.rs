use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{bit_offset, range_width, BinaryOp, Direction, Expr, LValue, ModuleAst, UnaryOp};
use super::vectors::BitVec;
use super::{mask, HdlError};

/// Port name to value.
pub type Values = BTreeMap<String, BitVec>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("missing value for input `{0}`")]
    MissingInput(String),
    #[error("width mismatch on `{port}`: declared {expected}, got {actual}")]
    WidthMismatch { port: String, expected: u32, actual: u32 },
    #[error("`{0}` is not an input port")]
    UnknownPort(String),
    #[error(transparent)]
    Hdl(#[from] HdlError),
}

type Lookup<'a> = dyn Fn(&str) -> Option<(u64, i64, i64)> + 'a;

/// Self-determined width of `e`; `None` if it reads an unknown signal.
pub(crate) fn self_width(e: &Expr, width_of: &dyn Fn(&str) -> Option<u32>) -> Option<u32> {
    Some(match e {
        Expr::Ident { name, .. } => width_of(name)?,
        Expr::Literal { width, .. } => *width,
        Expr::Unary(op, a) => match op {
            UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => self_width(a, width_of)?,
            _ => {
                self_width(a, width_of)?;
                1
            }
        },
        Expr::Binary(op, l, r) => {
            let (lw, rw) = (self_width(l, width_of)?, self_width(r, width_of)?);
            match op {
                BinaryOp::And | BinaryOp::Or | BinaryOp::Xor | BinaryOp::Xnor | BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
                    lw.max(rw)
                }
                BinaryOp::Shl | BinaryOp::Shr => lw,
                _ => 1,
            }
        }
        Expr::Ternary(c, t, f) => {
            self_width(c, width_of)?;
            self_width(t, width_of)?.max(self_width(f, width_of)?)
        }
        Expr::Bit { index, .. } => {
            self_width(index, width_of)?;
            1
        }
        Expr::Part { msb, lsb, .. } => range_width(*msb, *lsb),
        Expr::Concat(items) => items.iter().map(|i| self_width(i, width_of)).sum::<Option<u32>>()?,
        Expr::Replicate(n, items) => n * items.iter().map(|i| self_width(i, width_of)).sum::<Option<u32>>()?,
    })
}

fn shl(v: u64, n: u64) -> u64 {
    if n >= 64 {
        0
    } else {
        v << n
    }
}

fn shr(v: u64, n: u64) -> u64 {
    if n >= 64 {
        0
    } else {
        v >> n
    }
}

/// Evaluates `e` in a context of at least `ctx` bits.
fn eval(e: &Expr, ctx: u32, lookup: &Lookup<'_>) -> Option<u64> {
    let width_of = |n: &str| lookup(n).map(|(_, msb, lsb)| range_width(msb, lsb));
    let sw = |x: &Expr| self_width(x, &width_of);
    let w = ctx.max(sw(e)?);
    let m = mask(w);
    Some(match e {
        Expr::Ident { name, .. } => lookup(name)?.0,
        Expr::Literal { value, .. } => *value,
        Expr::Unary(op, a) => match op {
            UnaryOp::Not => !eval(a, w, lookup)? & m,
            UnaryOp::Neg => eval(a, w, lookup)?.wrapping_neg() & m,
            UnaryOp::Plus => eval(a, w, lookup)?,
            UnaryOp::LogicalNot => (eval(a, 0, lookup)? == 0) as u64,
            _ => {
                let aw = sw(a)?;
                let v = eval(a, aw, lookup)?;
                let bit = match op {
                    UnaryOp::ReduceAnd | UnaryOp::ReduceNand => v == mask(aw),
                    UnaryOp::ReduceOr | UnaryOp::ReduceNor => v != 0,
                    _ => v.count_ones() % 2 == 1,
                };
                let invert = matches!(op, UnaryOp::ReduceNand | UnaryOp::ReduceNor | UnaryOp::ReduceXnor);
                (bit ^ invert) as u64
            }
        },
        Expr::Binary(op, l, r) => match op {
            BinaryOp::And => eval(l, w, lookup)? & eval(r, w, lookup)?,
            BinaryOp::Or => eval(l, w, lookup)? | eval(r, w, lookup)?,
            BinaryOp::Xor => eval(l, w, lookup)? ^ eval(r, w, lookup)?,
            BinaryOp::Xnor => !(eval(l, w, lookup)? ^ eval(r, w, lookup)?) & m,
            BinaryOp::Add => eval(l, w, lookup)?.wrapping_add(eval(r, w, lookup)?) & m,
            BinaryOp::Sub => eval(l, w, lookup)?.wrapping_sub(eval(r, w, lookup)?) & m,
            BinaryOp::Mul => eval(l, w, lookup)?.wrapping_mul(eval(r, w, lookup)?) & m,
            BinaryOp::Shl => shl(eval(l, w, lookup)?, eval(r, 0, lookup)?) & m,
            BinaryOp::Shr => shr(eval(l, w, lookup)?, eval(r, 0, lookup)?),
            BinaryOp::LogicalAnd => (eval(l, 0, lookup)? != 0 && eval(r, 0, lookup)? != 0) as u64,
            BinaryOp::LogicalOr => (eval(l, 0, lookup)? != 0 || eval(r, 0, lookup)? != 0) as u64,
            cmp => {
                let ow = sw(l)?.max(sw(r)?);
                let (a, b) = (eval(l, ow, lookup)?, eval(r, ow, lookup)?);
                (match cmp {
                    BinaryOp::Eq => a == b,
                    BinaryOp::Ne => a != b,
                    BinaryOp::Lt => a < b,
                    BinaryOp::Le => a <= b,
                    BinaryOp::Gt => a > b,
                    _ => a >= b,
                }) as u64
            }
        },
        Expr::Ternary(c, t, f) => {
            if eval(c, 0, lookup)? != 0 {
                eval(t, w, lookup)?
            } else {
                eval(f, w, lookup)?
            }
        }
        Expr::Bit { name, index, .. } => {
            let (v, msb, lsb) = lookup(name)?;
            let i = eval(index, 0, lookup)?;
            match i64::try_from(i).ok().and_then(|i| bit_offset(msb, lsb, i)) {
                Some(off) => (v >> off) & 1,
                None => 0,
            }
        }
        Expr::Part { name, msb: hi, lsb: lo, .. } => {
            let (v, msb, lsb) = lookup(name)?;
            let lo_off = bit_offset(msb, lsb, *lo)?;
            (v >> lo_off) & mask(range_width(*hi, *lo))
        }
        Expr::Concat(items) => concat(items, lookup)?,
        Expr::Replicate(n, items) => {
            let unit_w: u32 = items.iter().map(sw).sum::<Option<u32>>()?;
            let unit = concat(items, lookup)?;
            (0..*n).fold(0, |acc, _| shl(acc, unit_w as u64) | unit)
        }
    })
}

fn concat(items: &[Expr], lookup: &Lookup<'_>) -> Option<u64> {
    let width_of = |n: &str| lookup(n).map(|(_, msb, lsb)| range_width(msb, lsb));
    let mut acc = 0u64;
    for item in items {
        let iw = self_width(item, &width_of)?;
        acc = shl(acc, iw as u64) | (eval(item, iw, lookup)? & mask(iw));
    }
    Some(acc)
}

pub(crate) fn eval_const(e: &Expr, width: u32) -> Option<u64> {
    eval(e, width, &|_| None).map(|v| v & mask(width))
}

/// Orders the assigns so every signal is written before it is read.
pub fn schedule(m: &ModuleAst) -> Result<Vec<usize>, HdlError> {
    let mut writers: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, a) in m.assigns.iter().enumerate() {
        let mut targets = Vec::new();
        a.target.targets(&mut targets);
        for t in targets {
            writers.entry(t).or_default().push(i);
        }
    }
    // Dependencies are tracked per signal, not per bit.
    let n = m.assigns.len();
    let mut indegree = alloc::vec![0usize; n];
    let mut dependents: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); n];
    for (i, a) in m.assigns.iter().enumerate() {
        let mut reads = Vec::new();
        a.expr.reads(&mut reads);
        let deps: BTreeSet<usize> = reads.iter().filter_map(|r| writers.get(r)).flatten().copied().collect();
        indegree[i] = deps.len();
        for d in deps {
            dependents[d].insert(i);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &d in &dependents[i] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.insert(d);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|i| indegree[*i] > 0).expect("some assign remains");
        let a = &m.assigns[stuck];
        let mut targets = Vec::new();
        a.target.targets(&mut targets);
        return Err(HdlError::CombinationalCycle { loc: a.loc, net: targets.first().map(|s| s.to_string()).unwrap_or_default() });
    }
    Ok(order)
}

fn lvalue_width(lv: &LValue, m: &ModuleAst) -> u32 {
    match lv {
        LValue::Whole(n) => m.signal_range(n).map(|(a, b)| range_width(a, b)).unwrap_or(0),
        LValue::Bit(..) => 1,
        LValue::Part(_, hi, lo) => range_width(*hi, *lo),
        LValue::Concat(items) => items.iter().map(|i| lvalue_width(i, m)).sum(),
    }
}

fn write(lv: &LValue, value: u64, m: &ModuleAst, state: &mut BTreeMap<String, u64>) {
    match lv {
        LValue::Whole(n) => {
            let w = lvalue_width(lv, m);
            state.insert(n.clone(), value & mask(w));
        }
        LValue::Bit(n, i) => {
            let (msb, lsb) = m.signal_range(n).expect("validated");
            let off = bit_offset(msb, lsb, *i).expect("validated");
            let slot = state.entry(n.clone()).or_insert(0);
            *slot = (*slot & !(1 << off)) | ((value & 1) << off);
        }
        LValue::Part(n, hi, lo) => {
            let (msb, lsb) = m.signal_range(n).expect("validated");
            let off = bit_offset(msb, lsb, *lo).expect("validated");
            let field = mask(range_width(*hi, *lo));
            let slot = state.entry(n.clone()).or_insert(0);
            *slot = (*slot & !shl(field, off as u64)) | shl(value & field, off as u64);
        }
        LValue::Concat(items) => {
            let mut shift = 0u32;
            for item in items.iter().rev() {
                let w = lvalue_width(item, m);
                write(item, shr(value, shift as u64) & mask(w), m, state);
                shift += w;
            }
        }
    }
}

/// Computes every output port from the given input values.
pub fn evaluate(m: &ModuleAst, inputs: &Values) -> Result<Values, EvalError> {
    for name in inputs.keys() {
        if !m.port(name).is_some_and(|p| p.direction == Direction::In) {
            return Err(EvalError::UnknownPort(name.clone()));
        }
    }
    let mut state: BTreeMap<String, u64> = BTreeMap::new();
    for port in m.inputs() {
        let v = inputs.get(&port.name).ok_or_else(|| EvalError::MissingInput(port.name.clone()))?;
        if v.width != port.width() {
            return Err(EvalError::WidthMismatch { port: port.name.clone(), expected: port.width(), actual: v.width });
        }
        state.insert(port.name.clone(), v.value & mask(v.width));
    }
    for i in schedule(m)? {
        let a = &m.assigns[i];
        let tw = lvalue_width(&a.target, m);
        let value = {
            let lookup = |n: &str| {
                let (msb, lsb) = m.signal_range(n)?;
                Some((state.get(n).copied().unwrap_or(0), msb, lsb))
            };
            eval(&a.expr, tw, &lookup).unwrap_or(0) & mask(tw)
        };
        write(&a.target, value, m, &mut state);
    }
    Ok(m
        .outputs()
        .map(|p| (p.name.clone(), BitVec::new(p.width(), state.get(&p.name).copied().unwrap_or(0))))
        .collect())
}
