//! Recursive-descent parser for the textual LTL syntax.
//!
//! Precedence, tightest first: unary (`!`, `X`, `F`, `G`, `<>`, `[]`),
//! `U` (right associative), `&`, `|`, `->` (right associative).

use super::LtlFormula;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown token {token:?} at offset {offset}")]
    UnknownToken { offset: usize, token: String },
    #[error("unbalanced parenthesis at offset {offset}")]
    Unbalanced { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownToken { offset, .. }
            | ParseError::Unbalanced { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Eventually,
    Always,
    Until,
    LParen,
    RParen,
}

const MAX_DEPTH: usize = 256;
const MAX_TOKENS: usize = 4096;

const RESERVED: &[&str] = &["G", "F", "X", "U", "true", "false"];

pub(super) fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
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
        let two = bytes.get(i..i + 2);
        let tok = match c {
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'!' | b'~' => {
                i += 1;
                Tok::Not
            }
            b'&' => {
                i += if two == Some(b"&&") { 2 } else { 1 };
                Tok::And
            }
            b'|' => {
                i += if two == Some(b"||") { 2 } else { 1 };
                Tok::Or
            }
            b'-' if two == Some(b"->") => {
                i += 2;
                Tok::Implies
            }
            b'=' if two == Some(b"=>") => {
                i += 2;
                Tok::Implies
            }
            b'<' if two == Some(b"<>") => {
                i += 2;
                Tok::Eventually
            }
            b'[' if two == Some(b"[]") => {
                i += 2;
                Tok::Always
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                match &text[start..i] {
                    "G" => Tok::Always,
                    "F" => Tok::Eventually,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    word => Tok::Ident(word.to_string()),
                }
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::UnknownToken {
                    offset: start,
                    token: ch.to_string(),
                });
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<LtlFormula, ParseError> {
        let mut parts = vec![self.disjunction()?];
        while self.eat(&Tok::Implies) {
            parts.push(self.disjunction()?);
        }
        Ok(fold_right(parts, LtlFormula::implies))
    }

    fn disjunction(&mut self) -> Result<LtlFormula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(LtlFormula::or_all(parts))
    }

    fn conjunction(&mut self) -> Result<LtlFormula, ParseError> {
        let mut parts = vec![self.until()?];
        while self.eat(&Tok::And) {
            parts.push(self.until()?);
        }
        Ok(LtlFormula::and_all(parts))
    }

    fn until(&mut self) -> Result<LtlFormula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Until) {
            parts.push(self.unary()?);
        }
        Ok(fold_right(parts, LtlFormula::until))
    }

    fn unary(&mut self) -> Result<LtlFormula, ParseError> {
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::Syntax {
                offset,
                message: "expected a formula, found end of input".into(),
            });
        };
        self.pos += 1;
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                offset,
                message: "formula nested too deeply".into(),
            });
        }
        let parsed = self.unary_after(tok, offset);
        self.depth -= 1;
        parsed
    }

    fn unary_after(&mut self, tok: Tok, offset: usize) -> Result<LtlFormula, ParseError> {
        Ok(match tok {
            Tok::Not => LtlFormula::not(self.unary()?),
            Tok::Next => LtlFormula::next(self.unary()?),
            Tok::Eventually => LtlFormula::eventually(self.unary()?),
            Tok::Always => LtlFormula::always(self.unary()?),
            Tok::True => LtlFormula::True,
            Tok::False => LtlFormula::False,
            Tok::Ident(name) => LtlFormula::Atom(name),
            Tok::LParen => {
                let inner = self.implication()?;
                if !self.eat(&Tok::RParen) {
                    if self.peek().is_none() {
                        return Err(ParseError::Unbalanced { offset });
                    }
                    return Err(ParseError::Syntax {
                        offset: self.offset(),
                        message: "expected ')'".into(),
                    });
                }
                inner
            }
            Tok::RParen => return Err(ParseError::Unbalanced { offset }),
            other => {
                return Err(ParseError::Syntax {
                    offset,
                    message: format!("unexpected {other:?}"),
                })
            }
        })
    }
}

fn fold_right(mut parts: Vec<LtlFormula>, op: fn(LtlFormula, LtlFormula) -> LtlFormula) -> LtlFormula {
    let mut acc = parts.pop().expect("at least one operand");
    while let Some(lhs) = parts.pop() {
        acc = op(lhs, acc);
    }
    acc
}

/// Parses LTL text into a formula tree.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, ParseError> {
    let toks = lex(text)?;
    if toks.len() > MAX_TOKENS {
        return Err(ParseError::Syntax {
            offset: toks[MAX_TOKENS].0,
            message: format!("formula longer than {MAX_TOKENS} tokens"),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        depth: 0,
    };
    let f = p.implication()?;
    if let Some(t) = p.peek() {
        let offset = p.offset();
        if *t == Tok::RParen {
            return Err(ParseError::Unbalanced { offset });
        }
        return Err(ParseError::Syntax {
            offset,
            message: format!("trailing input {t:?}"),
        });
    }
    Ok(f)
}
