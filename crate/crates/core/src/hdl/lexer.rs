use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{mask, HdlError, Location, MAX_WIDTH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Numeric literal; `width` is `None` for unsized literals.
    Number { value: u64, width: Option<u32> },
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: Location,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "~^", "^~", "~&", "~|", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "(", ")", "[", "]", "{",
    "}", ",", ";", ":", "=", "?", "#", "~", "!", "&", "|", "^", "+", "-", "*", "<", ">", ".", "@",
];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn loc(&self) -> Location {
        Location { line: self.line, col: self.col }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

pub fn lex(src: &str) -> Result<Vec<Token>, HdlError> {
    let mut cur = Cursor { src, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let loc = cur.loc();
        let Some(c) = cur.peek() else {
            out.push(Token { kind: TokenKind::Eof, loc });
            return Ok(out);
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let start = cur.pos;
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '$') {
                cur.bump();
            }
            TokenKind::Ident(src[start..cur.pos].to_string())
        } else if c.is_ascii_digit() || c == '\'' {
            lex_number(&mut cur, loc)?
        } else if let Some(sym) = SYMBOLS.iter().find(|s| cur.rest().starts_with(**s)) {
            for _ in 0..sym.len() {
                cur.bump();
            }
            TokenKind::Sym(sym)
        } else {
            return Err(HdlError::Lex { loc, msg: format!("unexpected character `{c}`") });
        };
        out.push(Token { kind, loc });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) -> Result<(), HdlError> {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek_at(1) == Some('/') => {
                while !matches!(cur.peek(), None | Some('\n')) {
                    cur.bump();
                }
            }
            Some('/') if cur.peek_at(1) == Some('*') => {
                let loc = cur.loc();
                cur.bump();
                cur.bump();
                loop {
                    match cur.peek() {
                        None => return Err(HdlError::Lex { loc, msg: "unterminated block comment".into() }),
                        Some('*') if cur.peek_at(1) == Some('/') => {
                            cur.bump();
                            cur.bump();
                            break;
                        }
                        _ => {
                            cur.bump();
                        }
                    }
                }
            }
            // Compiler directives such as `timescale are ignored to end of line.
            Some('`') => {
                while !matches!(cur.peek(), None | Some('\n')) {
                    cur.bump();
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>, loc: Location) -> Result<TokenKind, HdlError> {
    let mut size_digits = String::new();
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit() || c == '_') {
        let c = cur.bump().unwrap();
        if c != '_' {
            size_digits.push(c);
        }
    }
    if cur.peek() != Some('\'') {
        let value = parse_radix(&size_digits, 10, loc)?;
        if value > u32::MAX as u64 {
            return Err(HdlError::Lex { loc, msg: "unsized literal exceeds 32 bits".into() });
        }
        return Ok(TokenKind::Number { value, width: None });
    }
    cur.bump();
    if matches!(cur.peek(), Some('s' | 'S')) {
        cur.bump();
    }
    let radix = match cur.bump() {
        Some('b' | 'B') => 2,
        Some('o' | 'O') => 8,
        Some('d' | 'D') => 10,
        Some('h' | 'H') => 16,
        other => {
            return Err(HdlError::Lex {
                loc,
                msg: format!("expected base specifier after `'`, found {other:?}"),
            })
        }
    };
    while matches!(cur.peek(), Some(' ' | '\t')) {
        cur.bump();
    }
    let mut digits = String::new();
    while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '?') {
        let c = cur.bump().unwrap();
        if matches!(c, 'x' | 'X' | 'z' | 'Z' | '?') {
            return Err(HdlError::Lex { loc, msg: "four-state literal digits are not supported".into() });
        }
        if c != '_' {
            digits.push(c);
        }
    }
    if digits.is_empty() {
        return Err(HdlError::Lex { loc, msg: "literal has no digits".into() });
    }
    let value = parse_radix(&digits, radix, loc)?;
    let width = if size_digits.is_empty() {
        None
    } else {
        let w = parse_radix(&size_digits, 10, loc)?;
        if w == 0 || w > MAX_WIDTH as u64 {
            return Err(HdlError::Lex { loc, msg: format!("literal width {w} outside 1..={MAX_WIDTH}") });
        }
        Some(w as u32)
    };
    let value = match width {
        Some(w) => value & mask(w),
        None => value,
    };
    Ok(TokenKind::Number { value, width })
}

fn parse_radix(digits: &str, radix: u32, loc: Location) -> Result<u64, HdlError> {
    let mut value: u64 = 0;
    for c in digits.chars() {
        let d = c
            .to_digit(radix)
            .ok_or_else(|| HdlError::Lex { loc, msg: format!("invalid digit `{c}` for base {radix}") })?;
        value = value
            .checked_mul(radix as u64)
            .and_then(|v| v.checked_add(d as u64))
            .ok_or_else(|| HdlError::Lex { loc, msg: "literal exceeds 64 bits".into() })?;
    }
    Ok(value)
}
