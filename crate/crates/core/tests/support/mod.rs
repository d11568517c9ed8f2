//! Independent oracles shared by the property and acceptance tests.
//!
//! Nothing here calls into the code under test except to build inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;

fn mask(w: u32) -> u64 {
    if w >= 64 { u64::MAX } else { (1u64 << w) - 1 }
}

#[derive(Debug, Clone)]
pub enum NExpr {
    In(usize),
    Wire(usize),
    Lit { width: u32, value: u64 },
    Not(Box<NExpr>),
    LNot(Box<NExpr>),
    Bin(&'static str, Box<NExpr>, Box<NExpr>),
    Cmp(&'static str, Box<NExpr>, Box<NExpr>),
    Logic(&'static str, Box<NExpr>, Box<NExpr>),
    Tern(Box<NExpr>, Box<NExpr>, Box<NExpr>),
    Concat(Vec<NExpr>),
    Reduce(&'static str, Box<NExpr>),
}

/// A random assign-only module over one-bit inputs.
#[derive(Debug, Clone)]
pub struct NModule {
    pub inputs: usize,
    pub wires: Vec<(u32, NExpr)>,
    pub outputs: Vec<(u32, NExpr)>,
}

pub const INPUT_NAMES: [&str; 4] = ["a", "b", "c", "d"];

impl NModule {
    pub fn random(rng: &mut StdRng, max_inputs: usize) -> NModule {
        let inputs = rng.random_range(1..=max_inputs);
        let mut m = NModule { inputs, wires: Vec::new(), outputs: Vec::new() };
        for _ in 0..rng.random_range(0..=2) {
            let width = rng.random_range(1..=2);
            let e = m.random_expr(rng, 3);
            m.wires.push((width, e));
        }
        for _ in 0..rng.random_range(1..=2) {
            let width = rng.random_range(1..=3);
            let e = m.random_expr(rng, 3);
            m.outputs.push((width, e));
        }
        m
    }

    fn random_expr(&self, rng: &mut StdRng, depth: u32) -> NExpr {
        if depth == 0 || rng.random_bool(0.25) {
            return match rng.random_range(0..10) {
                0 => {
                    let width = rng.random_range(1..=2);
                    NExpr::Lit { width, value: rng.random_range(0..=mask(width)) }
                }
                1 | 2 if !self.wires.is_empty() => NExpr::Wire(rng.random_range(0..self.wires.len())),
                _ => NExpr::In(rng.random_range(0..self.inputs)),
            };
        }
        let kind = rng.random_range(0..11);
        let d = depth - 1;
        let sub = |rng: &mut StdRng| Box::new(self.random_expr(rng, d));
        match kind {
            0 => NExpr::Not(sub(rng)),
            1 => NExpr::LNot(sub(rng)),
            2 | 3 => {
                let op = ["&", "|", "^", "+", "-"][rng.random_range(0..5)];
                NExpr::Bin(op, sub(rng), sub(rng))
            }
            4 => {
                let op = ["&", "|", "^"][rng.random_range(0..3)];
                NExpr::Bin(op, sub(rng), sub(rng))
            }
            5 => {
                let op = ["==", "!="][rng.random_range(0..2)];
                NExpr::Cmp(op, sub(rng), sub(rng))
            }
            6 => {
                let op = ["&&", "||"][rng.random_range(0..2)];
                NExpr::Logic(op, sub(rng), sub(rng))
            }
            7 => NExpr::Tern(sub(rng), sub(rng), sub(rng)),
            8 => NExpr::Concat(vec![*sub(rng), *sub(rng)]),
            _ => {
                let op = ["&", "|", "^"][rng.random_range(0..3)];
                NExpr::Reduce(op, Box::new(NExpr::Concat(vec![*sub(rng), *sub(rng)])))
            }
        }
    }

    pub fn source(&self) -> String {
        let mut ports: Vec<String> = (0..self.inputs).map(|i| format!("input {}", INPUT_NAMES[i])).collect();
        for (i, (w, _)) in self.outputs.iter().enumerate() {
            ports.push(format!("output {}y{i}", range(*w)));
        }
        let mut s = format!("module rnd({});\n", ports.join(", "));
        for (i, (w, e)) in self.wires.iter().enumerate() {
            s += &format!("  wire {}w{i};\n  assign w{i} = {};\n", range(*w), render(e));
        }
        for (i, (_, e)) in self.outputs.iter().enumerate() {
            s += &format!("  assign y{i} = {};\n", render(e));
        }
        s + "endmodule\n"
    }

    fn self_width(&self, e: &NExpr) -> u32 {
        match e {
            NExpr::In(_) => 1,
            NExpr::Wire(i) => self.wires[*i].0,
            NExpr::Lit { width, .. } => *width,
            NExpr::Not(a) => self.self_width(a),
            NExpr::LNot(_) | NExpr::Cmp(..) | NExpr::Logic(..) | NExpr::Reduce(..) => 1,
            NExpr::Bin(_, a, b) | NExpr::Tern(_, a, b) => self.self_width(a).max(self.self_width(b)),
            NExpr::Concat(parts) => parts.iter().map(|p| self.self_width(p)).sum(),
        }
    }

    /// Value of `e` evaluated in a context `w` bits wide.
    fn eval(&self, e: &NExpr, w: u32, ins: &[u64], wires: &[u64]) -> u64 {
        let m = mask(w);
        match e {
            NExpr::In(i) => ins[*i],
            NExpr::Wire(i) => wires[*i],
            NExpr::Lit { value, .. } => *value,
            NExpr::Not(a) => !self.eval(a, w, ins, wires) & m,
            NExpr::LNot(a) => (self.eval(a, self.self_width(a), ins, wires) == 0) as u64,
            NExpr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a, w, ins, wires), self.eval(b, w, ins, wires));
                let r = match *op {
                    "&" => x & y,
                    "|" => x | y,
                    "^" => x ^ y,
                    "+" => x.wrapping_add(y),
                    "-" => x.wrapping_sub(y),
                    _ => unreachable!(),
                };
                r & m
            }
            NExpr::Cmp(op, a, b) => {
                let cw = self.self_width(a).max(self.self_width(b));
                let eq = self.eval(a, cw, ins, wires) == self.eval(b, cw, ins, wires);
                (if *op == "==" { eq } else { !eq }) as u64
            }
            NExpr::Logic(op, a, b) => {
                let x = self.eval(a, self.self_width(a), ins, wires) != 0;
                let y = self.eval(b, self.self_width(b), ins, wires) != 0;
                (if *op == "&&" { x && y } else { x || y }) as u64
            }
            NExpr::Tern(c, a, b) => {
                if self.eval(c, self.self_width(c), ins, wires) != 0 {
                    self.eval(a, w, ins, wires)
                } else {
                    self.eval(b, w, ins, wires)
                }
            }
            NExpr::Concat(parts) => parts.iter().fold(0, |acc, p| {
                let pw = self.self_width(p);
                (acc << pw) | self.eval(p, pw, ins, wires)
            }),
            NExpr::Reduce(op, a) => {
                let aw = self.self_width(a);
                let v = self.eval(a, aw, ins, wires);
                let ones = v.count_ones();
                (match *op {
                    "&" => ones == aw,
                    "|" => ones > 0,
                    _ => ones % 2 == 1,
                }) as u64
            }
        }
    }

    /// Output values for one input row, in output order.
    pub fn run(&self, ins: &[u64]) -> Vec<u64> {
        let mut wires = Vec::new();
        for (w, e) in &self.wires {
            let cw = (*w).max(self.self_width(e));
            let v = self.eval(e, cw, ins, &wires) & mask(*w);
            wires.push(v);
        }
        self.outputs
            .iter()
            .map(|(w, e)| self.eval(e, (*w).max(self.self_width(e)), ins, &wires) & mask(*w))
            .collect()
    }
}

fn range(w: u32) -> String {
    if w == 1 { String::new() } else { format!("[{}:0] ", w - 1) }
}

fn render(e: &NExpr) -> String {
    match e {
        NExpr::In(i) => INPUT_NAMES[*i].to_string(),
        NExpr::Wire(i) => format!("w{i}"),
        NExpr::Lit { width, value } => format!("{width}'b{value:0w$b}", w = *width as usize),
        NExpr::Not(a) => format!("(~{})", render(a)),
        NExpr::LNot(a) => format!("(!{})", render(a)),
        NExpr::Bin(op, a, b) | NExpr::Cmp(op, a, b) | NExpr::Logic(op, a, b) => {
            format!("({} {op} {})", render(a), render(b))
        }
        NExpr::Tern(c, a, b) => format!("({} ? {} : {})", render(c), render(a), render(b)),
        NExpr::Concat(parts) => format!("{{{}}}", parts.iter().map(render).collect::<Vec<_>>().join(", ")),
        NExpr::Reduce(op, a) => format!("({op}{})", render(a)),
    }
}

/// Maximal shared runs `(start, len)` with `len >= n`, by enumerating every
/// substring of `revised` and searching for it in `reference`.
pub fn brute_force_runs(revised: &[String], reference: &[String], n: usize) -> BTreeSet<(usize, usize)> {
    let occurs = |s: &[String]| reference.windows(s.len()).any(|w| w == s);
    let shared = |i: usize, len: usize| i + len <= revised.len() && len > 0 && occurs(&revised[i..i + len]);
    let mut out = BTreeSet::new();
    for i in 0..revised.len() {
        for len in n.max(1)..=revised.len() - i {
            if !shared(i, len) {
                continue;
            }
            let right_max = !shared(i, len + 1);
            let left_max = i == 0 || !shared(i - 1, len + 1);
            if right_max && left_max {
                out.insert((i, len));
            }
        }
    }
    out
}

/// Direct 2x2 enumeration over a pass table `[model][case][variant]`, where
/// variant 0 is the original description. Returns `[TP, FN, FP, TN]`.
pub fn enumerate_classes(table: &[Vec<Vec<bool>>], model: usize) -> [usize; 4] {
    let mut counts = [0; 4];
    for case in &table[model] {
        for &variant in &case[1..] {
            let idx = match (case[0], variant) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            counts[idx] += 1;
        }
    }
    counts
}

/// Legal session transitions: (state before, op) -> state after. States and
/// ops are spelled as strings to stay independent of the library enums.
pub fn legal_transition(state: &str, op: &str) -> Option<&'static str> {
    match (state, op) {
        ("NEW", "upload") => Some("UPLOADED"),
        ("UPLOADED", "compile") => Some("COMPILED"),
        ("COMPILED", "simulate") => Some("SIMULATED"),
        ("SIMULATED", "download") => Some("SIMULATED"),
        ("SIMULATED", "close") => Some("CLOSED"),
        _ => None,
    }
}
