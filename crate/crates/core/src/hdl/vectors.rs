use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ast::{Direction, ModuleAst};
use super::eval::{evaluate, Values};
use super::{mask, parse_module, MAX_WIDTH};
use crate::sim::SimResult;

/// A two-state value of a fixed width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVec {
    pub width: u32,
    pub value: u64,
}

impl BitVec {
    pub fn new(width: u32, value: u64) -> Self {
        BitVec { width, value: value & mask(width) }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'b", self.width)?;
        for i in (0..self.width).rev() {
            f.write_char(if self.value >> i & 1 == 1 { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A literal from a vector file: `<width>'b<bits>`, `<width>'h<hex>`,
/// `<width>'d<dec>`, or a bare decimal that takes the port's width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLiteral {
    pub width: Option<u32>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VectorError {
    #[error("invalid bit literal `{0}`")]
    BadLiteral(String),
    #[error("testbench has no vectors")]
    Empty,
    #[error("vector {vector}: `{port}` is not an {expected} port of the design")]
    UnknownPort { vector: usize, port: String, expected: &'static str },
    #[error("vector {vector}: missing value for input `{port}`")]
    MissingInput { vector: usize, port: String },
    #[error("vector {vector}: `{port}` is {declared} bits wide but the literal is {given}")]
    WidthMismatch { vector: usize, port: String, declared: u32, given: u32 },
    #[error("vector {vector}: value {value} does not fit in {width}-bit `{port}`")]
    Overflow { vector: usize, port: String, value: u64, width: u32 },
}

pub fn parse_bit_literal(text: &str) -> Result<BitLiteral, VectorError> {
    let bad = || VectorError::BadLiteral(text.to_string());
    let s: String = text.trim().chars().filter(|c| *c != '_').collect();
    let Some((size, rest)) = s.split_once('\'') else {
        let value = s.parse::<u64>().map_err(|_| bad())?;
        return Ok(BitLiteral { width: None, value });
    };
    let width: u32 = size.parse().map_err(|_| bad())?;
    if width == 0 || width > MAX_WIDTH {
        return Err(bad());
    }
    let mut chars = rest.chars();
    let radix = match chars.next() {
        Some('b' | 'B') => 2,
        Some('h' | 'H') => 16,
        Some('d' | 'D') => 10,
        Some('o' | 'O') => 8,
        _ => return Err(bad()),
    };
    let digits = chars.as_str();
    if digits.is_empty() {
        return Err(bad());
    }
    let value = u64::from_str_radix(digits, radix).map_err(|_| bad())?;
    if value & !mask(width) != 0 {
        return Err(bad());
    }
    Ok(BitLiteral { width: Some(width), value })
}

impl Serialize for BitLiteral {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.width {
            Some(w) => s.serialize_str(&BitVec::new(w, self.value).to_string()),
            None => s.serialize_u64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for BitLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct LiteralVisitor;
        impl Visitor<'_> for LiteralVisitor {
            type Value = BitLiteral;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a bit literal string or a non-negative integer")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<BitLiteral, E> {
                Ok(BitLiteral { width: None, value: v })
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<BitLiteral, E> {
                u64::try_from(v).map(|value| BitLiteral { width: None, value }).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<BitLiteral, E> {
                parse_bit_literal(v).map_err(E::custom)
            }
        }
        d.deserialize_any(LiteralVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVector {
    pub inputs: BTreeMap<String, BitLiteral>,
    pub expected: BTreeMap<String, BitLiteral>,
}

/// Truth-table style testbench for the built-in backend (`vectors.json`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorTestbench {
    pub vectors: Vec<TestVector>,
}

fn resolve(
    vector: usize,
    port: &str,
    lit: &BitLiteral,
    m: &ModuleAst,
    direction: Direction,
) -> Result<super::vectors::BitVec, VectorError> {
    let expected = if direction == Direction::In { "input" } else { "output" };
    let p = m
        .port(port)
        .filter(|p| p.direction == direction)
        .ok_or_else(|| VectorError::UnknownPort { vector, port: port.to_string(), expected })?;
    let width = p.width();
    if let Some(given) = lit.width {
        if given != width {
            return Err(VectorError::WidthMismatch { vector, port: port.to_string(), declared: width, given });
        }
    }
    if lit.value & !mask(width) != 0 {
        return Err(VectorError::Overflow { vector, port: port.to_string(), value: lit.value, width });
    }
    Ok(BitVec::new(width, lit.value))
}

impl VectorTestbench {
    /// Resolves every literal against the design's ports.
    pub fn resolve(&self, m: &ModuleAst) -> Result<Vec<(Values, Values)>, VectorError> {
        if self.vectors.is_empty() {
            return Err(VectorError::Empty);
        }
        self.vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let inputs = v
                    .inputs
                    .iter()
                    .map(|(p, lit)| Ok((p.clone(), resolve(i, p, lit, m, Direction::In)?)))
                    .collect::<Result<Values, VectorError>>()?;
                if let Some(missing) = m.inputs().find(|p| !inputs.contains_key(&p.name)) {
                    return Err(VectorError::MissingInput { vector: i, port: missing.name.clone() });
                }
                let expected = v
                    .expected
                    .iter()
                    .map(|(p, lit)| Ok((p.clone(), resolve(i, p, lit, m, Direction::Out)?)))
                    .collect::<Result<Values, VectorError>>()?;
                Ok((inputs, expected))
            })
            .collect()
    }
}

/// Applies every vector; a vector fails if any expected output differs.
pub fn run_vectors(m: &ModuleAst, tb: &VectorTestbench) -> Result<SimResult, VectorError> {
    let resolved = tb.resolve(m)?;
    let mut failed = Vec::new();
    let mut log = String::new();
    for (i, (inputs, expected)) in resolved.iter().enumerate() {
        // Inputs were validated against the ports above, so evaluation cannot fail.
        let outputs = evaluate(m, inputs).expect("validated inputs");
        let mut ok = true;
        for (port, want) in expected {
            let got = outputs[port];
            if got != *want {
                ok = false;
                let _ = writeln!(log, "vector {i}: {port} expected {want} got {got}");
            }
        }
        if !ok {
            failed.push(i);
        }
    }
    let _ = writeln!(log, "{} of {} vectors passed", resolved.len() - failed.len(), resolved.len());
    Ok(SimResult::from_failures(failed, log))
}

/// Parses `source` and runs `tb`; parse and interface errors count as
/// syntax failures.
pub fn run_source(source: &str, tb: &VectorTestbench) -> SimResult {
    let m = match parse_module(source) {
        Ok(m) => m,
        Err(e) => return SimResult::syntax_failure(format!("compile error: {e}\n")),
    };
    match run_vectors(&m, tb) {
        Ok(r) => r,
        Err(e) => SimResult::syntax_failure(format!("testbench does not match design interface: {e}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn literal_forms() {
        assert_eq!(parse_bit_literal("1'b1"), Ok(BitLiteral { width: Some(1), value: 1 }));
        assert_eq!(parse_bit_literal("8'hA_5"), Ok(BitLiteral { width: Some(8), value: 0xA5 }));
        assert_eq!(parse_bit_literal("12"), Ok(BitLiteral { width: None, value: 12 }));
        assert!(parse_bit_literal("2'b111").is_err());
        assert!(parse_bit_literal("0'b0").is_err());
        assert!(parse_bit_literal("4'bx").is_err());
    }

    #[test]
    fn display_is_binary_literal() {
        assert_eq!(BitVec::new(4, 5).to_string(), "4'b0101");
    }

    fn tb(rows: &[(u64, u64, u64)]) -> VectorTestbench {
        VectorTestbench {
            vectors: rows
                .iter()
                .map(|(a, b, y)| TestVector {
                    inputs: [("a".into(), BitLiteral { width: Some(1), value: *a }), ("b".into(), BitLiteral { width: None, value: *b })]
                        .into_iter()
                        .collect(),
                    expected: [("y".into(), BitLiteral { width: Some(1), value: *y })].into_iter().collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn correct_module_passes_and_mutant_fails() {
        let table = tb(&[(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1)]);
        let good = run_source("module m(input a, input b, output y); assign y = a & b; endmodule", &table);
        assert!(good.functional_pass && good.failed_vector_indices.is_empty());
        let mutant = run_source("module m(input a, input b, output y); assign y = a | b; endmodule", &table);
        assert!(mutant.syntax_pass && !mutant.functional_pass);
        assert_eq!(mutant.failed_vector_indices, vec![1, 2]);
        assert!(good.is_consistent() && mutant.is_consistent());
    }

    #[test]
    fn unparseable_source_short_circuits() {
        let r = run_source("module m(input a, output y) assign y = a; endmodule", &tb(&[(0, 0, 0)]));
        assert!(!r.syntax_pass && !r.functional_pass);
        assert!(r.is_consistent());
    }

    #[test]
    fn interface_mismatch_is_reported() {
        let m = parse_module("module m(input a, output y); assign y = a; endmodule").unwrap();
        assert!(matches!(tb(&[(0, 0, 0)]).resolve(&m), Err(VectorError::UnknownPort { .. })));
        assert_eq!(VectorTestbench { vectors: vec![] }.resolve(&m), Err(VectorError::Empty));
    }
}
