use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::{bit_offset, range_width, Assign, BinaryOp, Direction, Expr, LValue, ModuleAst, Net, Parameter, Port, UnaryOp};
use super::eval::{schedule, self_width};
use super::lexer::{lex, Token, TokenKind};
use super::{mask, HdlError, Location, MAX_WIDTH};

/// Parses the first module in `source` and validates it.
pub fn parse_module(source: &str) -> Result<ModuleAst, HdlError> {
    let mut modules = parse_modules(source)?;
    if modules.is_empty() {
        return Err(HdlError::Parse { loc: Location { line: 1, col: 1 }, msg: "no module found".into() });
    }
    Ok(modules.swap_remove(0))
}

/// Parses and validates every module in `source`.
pub fn parse_modules(source: &str) -> Result<Vec<ModuleAst>, HdlError> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0, params: BTreeMap::new() };
    let mut out = Vec::new();
    while !p.at_eof() {
        p.params.clear();
        let start = p.loc();
        let module = p.module()?;
        check_module(&module, start)?;
        out.push(module);
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    params: BTreeMap<String, u64>,
}

const RESERVED: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "logic", "assign", "parameter",
    "localparam", "always", "always_comb", "always_ff", "initial", "begin", "end", "signed",
];

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn loc(&self) -> Location {
        self.tokens[self.pos].loc
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), TokenKind::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, HdlError> {
        Err(HdlError::Parse { loc: self.loc(), msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number { .. } => "number".into(),
            TokenKind::Sym(s) => format!("`{s}`"),
            TokenKind::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), TokenKind::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(t) if t == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), HdlError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), HdlError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Location), HdlError> {
        let loc = self.loc();
        match self.peek().clone() {
            TokenKind::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok((s, loc))
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn module(&mut self) -> Result<ModuleAst, HdlError> {
        self.expect_kw("module")?;
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        if self.eat_sym("#") {
            self.expect_sym("(")?;
            if !self.is_sym(")") {
                loop {
                    self.eat_kw("parameter");
                    params.push(self.param_assignment(false)?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }

        // Header ports; direction is filled in later for non-ANSI lists.
        let mut header: Vec<(String, Option<Port>, Location)> = Vec::new();
        if self.eat_sym("(") {
            if !self.is_sym(")") {
                if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                    let mut current: Option<(Direction, i64, i64)> = None;
                    loop {
                        if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                            current = Some(self.port_head()?);
                        }
                        let (dir, msb, lsb) = current.expect("set by first iteration");
                        let (pname, loc) = self.ident()?;
                        header.push((pname.clone(), Some(Port { name: pname, direction: dir, msb, lsb }), loc));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                } else {
                    loop {
                        let (pname, loc) = self.ident()?;
                        header.push((pname, None, loc));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
            }
            self.expect_sym(")")?;
        }
        self.expect_sym(";")?;

        let mut nets = Vec::new();
        let mut assigns = Vec::new();
        loop {
            let loc = self.loc();
            if self.eat_kw("endmodule") {
                break;
            }
            if self.at_eof() {
                return self.error("missing `endmodule`");
            }
            if self.is_kw("input") || self.is_kw("output") || self.is_kw("inout") {
                let (dir, msb, lsb) = self.port_head()?;
                loop {
                    let (pname, ploc) = self.ident()?;
                    let Some(slot) = header.iter_mut().find(|(n, _, _)| *n == pname) else {
                        return Err(HdlError::Parse { loc: ploc, msg: format!("`{pname}` is not in the port list") });
                    };
                    if slot.1.is_some() {
                        return Err(HdlError::Parse { loc: ploc, msg: format!("port `{pname}` declared twice") });
                    }
                    slot.1 = Some(Port { name: pname, direction: dir, msb, lsb });
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.is_kw("wire") || self.is_kw("logic") {
                self.advance();
                let (msb, lsb) = self.opt_range()?;
                loop {
                    let (nname, nloc) = self.ident()?;
                    nets.push(Net { name: nname.clone(), msb, lsb });
                    if self.eat_sym("=") {
                        let expr = self.expr()?;
                        assigns.push(Assign { target: LValue::Whole(nname), expr, loc: nloc });
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.eat_kw("assign") {
                loop {
                    let aloc = self.loc();
                    let target = self.lvalue()?;
                    self.expect_sym("=")?;
                    let expr = self.expr()?;
                    assigns.push(Assign { target, expr, loc: aloc });
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.is_kw("parameter") || self.is_kw("localparam") {
                let local = self.is_kw("localparam");
                self.advance();
                loop {
                    params.push(self.param_assignment(local)?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else {
                return Err(HdlError::Parse {
                    loc,
                    msg: format!("unsupported construct {} in combinational subset", self.describe()),
                });
            }
        }

        let mut ports = Vec::with_capacity(header.len());
        for (pname, port, loc) in header {
            match port {
                Some(p) => ports.push(p),
                None => return Err(HdlError::Parse { loc, msg: format!("port `{pname}` has no direction declaration") }),
            }
        }
        Ok(ModuleAst { name, params, ports, nets, assigns })
    }

    fn port_head(&mut self) -> Result<(Direction, i64, i64), HdlError> {
        let dir = if self.eat_kw("input") {
            Direction::In
        } else if self.eat_kw("output") {
            Direction::Out
        } else {
            return self.error("inout ports are not supported");
        };
        if self.is_kw("reg") {
            return self.error("`reg` ports require procedural blocks, which this subset does not support");
        }
        if !self.eat_kw("wire") {
            self.eat_kw("logic");
        }
        if self.is_kw("signed") {
            return self.error("signed ports are not supported");
        }
        let (msb, lsb) = self.opt_range()?;
        Ok((dir, msb, lsb))
    }

    fn param_assignment(&mut self, local: bool) -> Result<Parameter, HdlError> {
        let (name, loc) = self.ident()?;
        if !self.is_sym("=") {
            return self.error(format!("expected `=` after parameter `{name}`, found {}", self.describe()));
        }
        self.advance();
        let value = self.const_expr()?;
        if self.params.insert(name.clone(), value).is_some() {
            return Err(HdlError::Parse { loc, msg: format!("parameter `{name}` redefined") });
        }
        Ok(Parameter { name, value, local })
    }

    fn opt_range(&mut self) -> Result<(i64, i64), HdlError> {
        if !self.eat_sym("[") {
            return Ok((0, 0));
        }
        let msb = self.const_expr()? as i64;
        self.expect_sym(":")?;
        let lsb = self.const_expr()? as i64;
        self.expect_sym("]")?;
        if range_width(msb, lsb) > MAX_WIDTH {
            return self.error(format!("range [{msb}:{lsb}] wider than {MAX_WIDTH} bits"));
        }
        Ok((msb, lsb))
    }

    fn const_expr(&mut self) -> Result<u64, HdlError> {
        let loc = self.loc();
        let e = self.expr()?;
        const_value(&e).ok_or(HdlError::Parse { loc, msg: "expected a constant expression".into() })
    }

    fn lvalue(&mut self) -> Result<LValue, HdlError> {
        if self.eat_sym("{") {
            let mut items = Vec::new();
            loop {
                items.push(self.lvalue()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            return Ok(LValue::Concat(items));
        }
        let (name, _) = self.ident()?;
        if !self.eat_sym("[") {
            return Ok(LValue::Whole(name));
        }
        let hi = self.const_expr()? as i64;
        let lv = if self.eat_sym(":") {
            let lo = self.const_expr()? as i64;
            LValue::Part(name, hi, lo)
        } else {
            LValue::Bit(name, hi)
        };
        self.expect_sym("]")?;
        Ok(lv)
    }

    fn expr(&mut self) -> Result<Expr, HdlError> {
        let cond = self.binary(1)?;
        if self.eat_sym("?") {
            let t = self.expr()?;
            self.expect_sym(":")?;
            let f = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(t), Box::new(f)));
        }
        Ok(cond)
    }

    fn binary_op(&self) -> Option<(BinaryOp, u8)> {
        let TokenKind::Sym(s) = self.peek() else { return None };
        Some(match *s {
            "||" => (BinaryOp::LogicalOr, 1),
            "&&" => (BinaryOp::LogicalAnd, 2),
            "|" => (BinaryOp::Or, 3),
            "^" => (BinaryOp::Xor, 4),
            "~^" | "^~" => (BinaryOp::Xnor, 4),
            "&" => (BinaryOp::And, 5),
            "==" => (BinaryOp::Eq, 6),
            "!=" => (BinaryOp::Ne, 6),
            "<" => (BinaryOp::Lt, 7),
            "<=" => (BinaryOp::Le, 7),
            ">" => (BinaryOp::Gt, 7),
            ">=" => (BinaryOp::Ge, 7),
            "<<" => (BinaryOp::Shl, 8),
            ">>" => (BinaryOp::Shr, 8),
            "+" => (BinaryOp::Add, 9),
            "-" => (BinaryOp::Sub, 9),
            "*" => (BinaryOp::Mul, 10),
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, HdlError> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binary_op() {
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, HdlError> {
        let op = match self.peek() {
            TokenKind::Sym("~") => Some(UnaryOp::Not),
            TokenKind::Sym("!") => Some(UnaryOp::LogicalNot),
            TokenKind::Sym("-") => Some(UnaryOp::Neg),
            TokenKind::Sym("+") => Some(UnaryOp::Plus),
            TokenKind::Sym("&") => Some(UnaryOp::ReduceAnd),
            TokenKind::Sym("~&") => Some(UnaryOp::ReduceNand),
            TokenKind::Sym("|") => Some(UnaryOp::ReduceOr),
            TokenKind::Sym("~|") => Some(UnaryOp::ReduceNor),
            TokenKind::Sym("^") => Some(UnaryOp::ReduceXor),
            TokenKind::Sym("~^") | TokenKind::Sym("^~") => Some(UnaryOp::ReduceXnor),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.unary()?;
            return Ok(Expr::Unary(op, Box::new(operand)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, HdlError> {
        let loc = self.loc();
        match self.peek().clone() {
            TokenKind::Number { value, width } => {
                self.advance();
                Ok(Expr::Literal { value, width: width.unwrap_or(32) })
            }
            TokenKind::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            TokenKind::Sym("{") => {
                self.advance();
                let first = self.expr()?;
                if self.is_sym("{") {
                    let count = const_value(&first)
                        .ok_or(HdlError::Parse { loc, msg: "replication count must be constant".into() })?;
                    if count == 0 || count > MAX_WIDTH as u64 {
                        return Err(HdlError::Parse { loc, msg: format!("replication count {count} out of range") });
                    }
                    self.advance();
                    let items = self.expr_list()?;
                    self.expect_sym("}")?;
                    self.expect_sym("}")?;
                    return Ok(Expr::Replicate(count as u32, items));
                }
                let mut items = alloc::vec![first];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym("}")?;
                Ok(Expr::Concat(items))
            }
            TokenKind::Ident(_) => {
                let (name, loc) = self.ident()?;
                if let Some(&value) = self.params.get(&name) {
                    return Ok(Expr::Literal { value: value & mask(32), width: 32 });
                }
                if !self.eat_sym("[") {
                    return Ok(Expr::Ident { name, loc });
                }
                let index = self.expr()?;
                if self.eat_sym(":") {
                    let msb = const_value(&index)
                        .ok_or(HdlError::Parse { loc, msg: "part-select bounds must be constant".into() })?;
                    let lsb = self.const_expr()?;
                    self.expect_sym("]")?;
                    return Ok(Expr::Part { name, msb: msb as i64, lsb: lsb as i64, loc });
                }
                self.expect_sym("]")?;
                Ok(Expr::Bit { name, index: Box::new(index), loc })
            }
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>, HdlError> {
        let mut items = alloc::vec![self.expr()?];
        while self.eat_sym(",") {
            items.push(self.expr()?);
        }
        Ok(items)
    }
}

/// Value of an expression built only from literals, at its own width.
/// Expressions stay unfolded in the tree: their value can depend on the
/// width of the context they are used in.
fn const_value(e: &Expr) -> Option<u64> {
    let width = self_width(e, &|_| None)?;
    super::eval::eval_const(e, width)
}

fn check_module(m: &ModuleAst, start: Location) -> Result<(), HdlError> {
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    let names = m.ports.iter().map(|p| p.name.as_str()).chain(m.nets.iter().map(|n| n.name.as_str()));
    for name in names.chain(m.params.iter().map(|p| p.name.as_str())) {
        if seen.insert(name, ()).is_some() {
            return Err(HdlError::Parse { loc: start, msg: format!("`{name}` declared more than once") });
        }
    }

    let width_of = |name: &str| m.signal_range(name).map(|(a, b)| range_width(a, b));
    let mut driven: BTreeMap<&str, u64> = BTreeMap::new();
    for assign in &m.assigns {
        check_lvalue(m, &assign.target, assign.loc, &mut driven)?;
        check_expr(m, &assign.expr)?;
        match self_width(&assign.expr, &width_of) {
            Some(w) if w <= MAX_WIDTH => {}
            _ => {
                return Err(HdlError::Parse { loc: assign.loc, msg: format!("expression wider than {MAX_WIDTH} bits") })
            }
        }
    }
    schedule(m)?;
    Ok(())
}

fn check_lvalue<'a>(
    m: &'a ModuleAst,
    lv: &'a LValue,
    loc: Location,
    driven: &mut BTreeMap<&'a str, u64>,
) -> Result<(), HdlError> {
    let (name, bits) = match lv {
        LValue::Concat(items) => {
            for item in items {
                check_lvalue(m, item, loc, driven)?;
            }
            return Ok(());
        }
        LValue::Whole(n) | LValue::Bit(n, _) | LValue::Part(n, _, _) => (n, lv),
    };
    let Some((msb, lsb)) = m.signal_range(name) else {
        return Err(HdlError::UndeclaredIdentifier { loc, name: name.to_string() });
    };
    if m.port(name).is_some_and(|p| p.direction == Direction::In) {
        return Err(HdlError::Parse { loc, msg: format!("cannot assign to input `{name}`") });
    }
    let bits = match bits {
        LValue::Whole(_) => mask(range_width(msb, lsb)),
        LValue::Bit(_, i) => {
            let off = bit_offset(msb, lsb, *i)
                .ok_or_else(|| HdlError::Parse { loc, msg: format!("bit {i} outside `{name}`[{msb}:{lsb}]") })?;
            1u64 << off
        }
        LValue::Part(_, hi, lo) => part_mask(msb, lsb, *hi, *lo)
            .ok_or_else(|| HdlError::Parse { loc, msg: format!("part-select [{hi}:{lo}] invalid for `{name}`[{msb}:{lsb}]") })?,
        LValue::Concat(_) => unreachable!(),
    };
    let entry = driven.entry(name.as_str()).or_insert(0);
    if *entry & bits != 0 {
        return Err(HdlError::MultipleDrivers { loc, net: name.clone() });
    }
    *entry |= bits;
    Ok(())
}

pub(crate) fn part_mask(msb: i64, lsb: i64, hi: i64, lo: i64) -> Option<u64> {
    let a = bit_offset(msb, lsb, hi)?;
    let b = bit_offset(msb, lsb, lo)?;
    if a < b {
        return None;
    }
    Some(mask(a - b + 1) << b)
}

fn check_expr(m: &ModuleAst, e: &Expr) -> Result<(), HdlError> {
    match e {
        Expr::Ident { name, loc } => {
            if m.signal_range(name).is_none() {
                return Err(HdlError::UndeclaredIdentifier { loc: *loc, name: name.clone() });
            }
        }
        Expr::Bit { name, index, loc } => {
            let Some((msb, lsb)) = m.signal_range(name) else {
                return Err(HdlError::UndeclaredIdentifier { loc: *loc, name: name.clone() });
            };
            if let Some(i) = const_value(index) {
                if bit_offset(msb, lsb, i as i64).is_none() {
                    return Err(HdlError::Parse { loc: *loc, msg: format!("bit {i} outside `{name}`[{msb}:{lsb}]") });
                }
            }
            check_expr(m, index)?;
        }
        Expr::Part { name, msb: hi, lsb: lo, loc } => {
            let Some((msb, lsb)) = m.signal_range(name) else {
                return Err(HdlError::UndeclaredIdentifier { loc: *loc, name: name.clone() });
            };
            if part_mask(msb, lsb, *hi, *lo).is_none() {
                return Err(HdlError::Parse {
                    loc: *loc,
                    msg: format!("part-select [{hi}:{lo}] invalid for `{name}`[{msb}:{lsb}]"),
                });
            }
        }
        Expr::Literal { .. } => {}
        Expr::Unary(_, a) => check_expr(m, a)?,
        Expr::Binary(_, a, b) => {
            check_expr(m, a)?;
            check_expr(m, b)?;
        }
        Expr::Ternary(c, t, f) => {
            check_expr(m, c)?;
            check_expr(m, t)?;
            check_expr(m, f)?;
        }
        Expr::Concat(items) | Expr::Replicate(_, items) => {
            for item in items {
                check_expr(m, item)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_module() {
        let m = parse_module("module m(input a, output y); assign y = a; endmodule").unwrap();
        assert_eq!(m.name, "m");
        assert_eq!(m.ports.len(), 2);
        assert_eq!(m.assigns.len(), 1);
    }

    #[test]
    fn non_ansi_ports_and_params() {
        let src = "module g #(parameter W = 4) (b, g);\n input [W-1:0] b;\n output [W-1:0] g;\n localparam S = 1;\n assign g = b ^ (b >> S);\nendmodule";
        let m = parse_module(src).unwrap();
        assert_eq!(m.port("b").unwrap().width(), 4);
        assert_eq!(m.params.len(), 2);
    }

    #[test]
    fn malformed_parameter_is_located() {
        // A template whose parameter list uses `;` where `)` or `,` is required.
        let src = "module binary_to_gray #(\n  parameter WIDTH = 6;\n) (input [WIDTH-1:0] binary_in, output [WIDTH-1:0] gray_out);\n  assign gray_out = binary_in ^ (binary_in >> 1);\nendmodule";
        match parse_module(src) {
            Err(HdlError::Parse { loc, .. }) => assert_eq!(loc, Location { line: 2, col: 22 }),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parameter_without_value_is_rejected() {
        let src = "module b2g #(parameter WIDTH) (input [3:0] b, output [3:0] g); assign g = b; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::Parse { .. })));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let src = "module m(input b, output y); wire a; assign a = a; assign y = a & b; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::CombinationalCycle { .. })));
    }

    #[test]
    fn two_net_cycle() {
        let src = "module m(input b, output y); wire p, q; assign p = q | b; assign q = p; assign y = q; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::CombinationalCycle { .. })));
    }

    #[test]
    fn undeclared_identifier_located() {
        let src = "module m(input a, output y);\nassign y = a & bogus;\nendmodule";
        match parse_module(src) {
            Err(HdlError::UndeclaredIdentifier { loc, name }) => {
                assert_eq!(name, "bogus");
                assert_eq!(loc, Location { line: 2, col: 16 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlapping_drivers() {
        let src = "module m(input a, output [1:0] y); assign y[0] = a; assign y = {a, a}; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::MultipleDrivers { .. })));
        let ok = "module m(input a, output [1:0] y); assign y[0] = a; assign y[1] = ~a; endmodule";
        parse_module(ok).unwrap();
    }

    #[test]
    fn sequential_constructs_rejected() {
        let src = "module m(input clk, output reg q); always @(posedge clk) q <= 1; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::Parse { .. })));
    }

    #[test]
    fn assigning_input_rejected() {
        let src = "module m(input a, output y); assign a = 1'b0; assign y = a; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::Parse { .. })));
    }

    #[test]
    fn bit_select_out_of_range() {
        let src = "module m(input [3:0] x, output y); assign y = x[4]; endmodule";
        assert!(matches!(parse_module(src), Err(HdlError::Parse { .. })));
    }

    #[test]
    fn multiple_modules() {
        let src = "module a(input i, output o); assign o = i; endmodule\nmodule b(input i, output o); assign o = ~i; endmodule";
        let ms = parse_modules(src).unwrap();
        assert_eq!(ms.iter().map(|m| m.name.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn net_declaration_assignment() {
        let m = parse_module("module m(input a, input b, output y); wire t = a & b; assign y = ~t; endmodule").unwrap();
        assert_eq!(m.assigns.len(), 2);
    }
}
