//! Import and export of deterministic Rabin automata in the HOA v1 format.
//!
//! Only state-based acceptance is supported, with an `Acceptance:` condition
//! that is a disjunction of `Fin(i) & Inf(j)` pairs. Edge labels may be any
//! boolean combination of AP indices; implicit labels are accepted as well.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{AutomatonError, Dra, Letter, RabinPair, MAX_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Header(String),
    Ident(String),
    Int(usize),
    Str(String),
    Body,
    End,
    Abort,
    Punct(char),
}

struct Lexed {
    toks: Vec<Tok>,
    lines: Vec<usize>,
}

fn syntax(line: usize, message: impl Into<String>) -> AutomatonError {
    AutomatonError::Syntax {
        line,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Lexed, AutomatonError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut lines = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = line;
            i += 2;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(start, "unterminated comment")),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        break;
                    }
                    Some('\n') => line += 1,
                    _ => {}
                }
                i += 1;
            }
            continue;
        }
        let tok_line = line;
        let tok = if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(tok_line, "unterminated string")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = chars.get(i + 1).ok_or_else(|| syntax(line, "dangling escape"))?;
                        s.push(*esc);
                        i += 2;
                    }
                    Some(ch) => {
                        if *ch == '\n' {
                            line += 1;
                        }
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            let start = i;
            i += 2;
            while i < chars.len() && chars[i] != '\n' && !chars[i].is_whitespace() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "--BODY--" => Tok::Body,
                "--END--" => Tok::End,
                "--ABORT--" => Tok::Abort,
                _ => return Err(syntax(tok_line, format!("unknown marker {word}"))),
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits
                .parse::<usize>()
                .map_err(|_| syntax(tok_line, format!("integer {digits} out of range")))?;
            Tok::Int(n)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&':') {
                i += 1;
                Tok::Header(word)
            } else {
                Tok::Ident(word)
            }
        } else if "[]{}()!&|@".contains(c) {
            i += 1;
            Tok::Punct(c)
        } else {
            return Err(syntax(tok_line, format!("unexpected character {c:?}")));
        };
        toks.push(tok);
        lines.push(tok_line);
    }
    Ok(Lexed { toks, lines })
}

/// Boolean expression over AP indices (edge labels) or acceptance sets.
#[derive(Debug, Clone)]
enum Expr {
    Const(bool),
    Var(usize),
    Fin(usize),
    Inf(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    fn eval(&self, assignment: usize) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(i) => assignment >> i & 1 == 1,
            Expr::Not(e) => !e.eval(assignment),
            Expr::And(es) => es.iter().all(|e| e.eval(assignment)),
            Expr::Or(es) => es.iter().any(|e| e.eval(assignment)),
            Expr::Fin(_) | Expr::Inf(_) => unreachable!("acceptance atoms are not evaluated"),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Not(e) => e.max_var(),
            Expr::And(es) | Expr::Or(es) => es.iter().filter_map(Expr::max_var).max(),
            Expr::Const(_) | Expr::Fin(_) | Expr::Inf(_) => None,
        }
    }
}

struct Cursor<'a> {
    toks: &'a [Tok],
    lines: &'a [usize],
    pos: usize,
    depth: usize,
}

const MAX_EXPR_DEPTH: usize = 128;
const MAX_TABLE: usize = 1 << 24;

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn line(&self) -> usize {
        self.lines
            .get(self.pos)
            .or_else(|| self.lines.last())
            .copied()
            .unwrap_or(1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), AutomatonError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(syntax(self.line(), format!("expected '{c}'")))
        }
    }

    fn int(&mut self, what: &str) -> Result<usize, AutomatonError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            _ => {
                self.pos -= 1;
                Err(syntax(self.line(), format!("expected integer for {what}")))
            }
        }
    }

    /// `acceptance` switches atoms from AP indices to `Fin`/`Inf` terms.
    fn or_expr(&mut self, acceptance: bool) -> Result<Expr, AutomatonError> {
        self.depth += 1;
        if self.depth > MAX_EXPR_DEPTH {
            return Err(syntax(self.line(), "expression nested too deeply"));
        }
        let mut parts = vec![self.and_expr(acceptance)?];
        while self.eat_punct('|') {
            parts.push(self.and_expr(acceptance)?);
        }
        self.depth -= 1;
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::Or(parts) })
    }

    fn and_expr(&mut self, acceptance: bool) -> Result<Expr, AutomatonError> {
        let mut parts = vec![self.not_expr(acceptance)?];
        while self.eat_punct('&') {
            parts.push(self.not_expr(acceptance)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Expr::And(parts) })
    }

    fn not_expr(&mut self, acceptance: bool) -> Result<Expr, AutomatonError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Punct('!')) if !acceptance => {
                self.depth += 1;
                if self.depth > MAX_EXPR_DEPTH {
                    return Err(syntax(line, "expression nested too deeply"));
                }
                let inner = self.not_expr(acceptance)?;
                self.depth -= 1;
                Ok(Expr::Not(Box::new(inner)))
            }
            Some(Tok::Punct('(')) => {
                let e = self.or_expr(acceptance)?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(Tok::Ident(w)) if w == "t" => Ok(Expr::Const(true)),
            Some(Tok::Ident(w)) if w == "f" => Ok(Expr::Const(false)),
            Some(Tok::Int(n)) if !acceptance => Ok(Expr::Var(n)),
            Some(Tok::Ident(w)) if acceptance && (w == "Fin" || w == "Inf") => {
                self.expect_punct('(')?;
                if self.peek() == Some(&Tok::Punct('!')) {
                    return Err(AutomatonError::Unsupported("negated acceptance sets".into()));
                }
                let set = self.int("acceptance set")?;
                self.expect_punct(')')?;
                Ok(if w == "Fin" { Expr::Fin(set) } else { Expr::Inf(set) })
            }
            Some(Tok::Punct('@')) => Err(AutomatonError::Unsupported("aliases".into())),
            _ => Err(syntax(line, "malformed boolean expression")),
        }
    }

    fn acc_sig(&mut self) -> Result<Option<Vec<usize>>, AutomatonError> {
        if !self.eat_punct('{') {
            return Ok(None);
        }
        let mut sets = Vec::new();
        while let Some(Tok::Int(n)) = self.peek() {
            sets.push(*n);
            self.pos += 1;
        }
        self.expect_punct('}')?;
        Ok(Some(sets))
    }
}

struct Edge {
    label: Option<Expr>,
    target: usize,
}

struct StateDecl {
    acc: Vec<usize>,
    edges: Vec<Edge>,
}

/// Splits a parsed acceptance condition into `(fin_set, inf_set)` pairs.
fn rabin_pairs(cond: &Expr) -> Result<Vec<(usize, usize)>, AutomatonError> {
    let disjuncts: Vec<&Expr> = match cond {
        Expr::Or(parts) => {
            let mut out = Vec::new();
            let mut stack: Vec<&Expr> = parts.iter().rev().collect();
            while let Some(e) = stack.pop() {
                match e {
                    Expr::Or(inner) => stack.extend(inner.iter().rev()),
                    other => out.push(other),
                }
            }
            out
        }
        other => vec![other],
    };
    disjuncts
        .into_iter()
        .map(|d| {
            let mut leaves = Vec::new();
            let mut stack = vec![d];
            while let Some(e) = stack.pop() {
                match e {
                    Expr::And(inner) => stack.extend(inner.iter()),
                    other => leaves.push(other),
                }
            }
            let fins: Vec<usize> = leaves
                .iter()
                .filter_map(|e| if let Expr::Fin(s) = e { Some(*s) } else { None })
                .collect();
            let infs: Vec<usize> = leaves
                .iter()
                .filter_map(|e| if let Expr::Inf(s) = e { Some(*s) } else { None })
                .collect();
            if leaves.len() != 2 || fins.len() != 1 || infs.len() != 1 {
                return Err(AutomatonError::NotRabin(
                    "each disjunct must be Fin(i) & Inf(j)".into(),
                ));
            }
            Ok((fins[0], infs[0]))
        })
        .collect()
}

/// Parses an HOA v1 automaton into a [`Dra`] reading letters over `atom_order`.
///
/// The automaton's AP list must be a subset of `atom_order`; atoms it does not
/// mention are ignored when reading a letter.
pub fn parse_hoa(text: &str, atom_order: &[String]) -> Result<Dra, AutomatonError> {
    if atom_order.len() > MAX_ATOMS {
        return Err(AutomatonError::TooManyAtoms(atom_order.len()));
    }
    let lexed = lex(text)?;
    let mut cur = Cursor {
        toks: &lexed.toks,
        lines: &lexed.lines,
        pos: 0,
        depth: 0,
    };

    let mut version = None;
    let mut num_states = None;
    let mut start = None;
    let mut aps: Option<Vec<String>> = None;
    let mut acceptance: Option<(usize, Expr)> = None;
    let mut acc_name: Option<(String, Vec<Tok>)> = None;

    loop {
        let line = cur.line();
        match cur.next() {
            Some(Tok::Body) => break,
            Some(Tok::Header(name)) => match name.as_str() {
                "HOA" => match cur.next() {
                    Some(Tok::Ident(v)) if v == "v1" => version = Some(v),
                    _ => return Err(syntax(line, "only HOA v1 is supported")),
                },
                "States" => {
                    if num_states.replace(cur.int("States")?).is_some() {
                        return Err(syntax(line, "duplicate States header"));
                    }
                }
                "Start" => {
                    let s = cur.int("Start")?;
                    if cur.peek() == Some(&Tok::Punct('&')) {
                        return Err(AutomatonError::Unsupported("conjunctive initial states".into()));
                    }
                    if start.replace(s).is_some() {
                        return Err(AutomatonError::Validation(
                            "multiple initial states (nondeterministic)".into(),
                        ));
                    }
                }
                "AP" => {
                    let n = cur.int("AP")?;
                    let mut names = Vec::with_capacity(n.min(64));
                    for _ in 0..n {
                        match cur.next() {
                            Some(Tok::Str(s)) => names.push(s),
                            _ => return Err(syntax(line, "AP expects quoted names")),
                        }
                    }
                    aps = Some(names);
                }
                "Acceptance" => {
                    let sets = cur.int("Acceptance")?;
                    let cond = cur.or_expr(true)?;
                    acceptance = Some((sets, cond));
                }
                "acc-name" => {
                    let id = match cur.next() {
                        Some(Tok::Ident(id)) => id,
                        _ => return Err(syntax(line, "acc-name expects an identifier")),
                    };
                    let mut args = Vec::new();
                    while let Some(t @ (Tok::Int(_) | Tok::Ident(_))) = cur.peek() {
                        args.push(t.clone());
                        cur.pos += 1;
                    }
                    acc_name = Some((id, args));
                }
                "Alias" => return Err(AutomatonError::Unsupported("aliases".into())),
                _ => {
                    // name, tool, properties and other informational headers
                    while matches!(
                        cur.peek(),
                        Some(Tok::Ident(_) | Tok::Int(_) | Tok::Str(_) | Tok::Punct(_))
                    ) {
                        cur.pos += 1;
                    }
                }
            },
            Some(Tok::Abort) => return Err(syntax(line, "automaton aborted")),
            Some(_) => return Err(syntax(line, "expected a header")),
            None => return Err(syntax(line, "missing --BODY--")),
        }
    }

    if version.is_none() {
        return Err(syntax(1, "missing HOA: v1 header"));
    }
    let num_states = num_states.ok_or_else(|| syntax(1, "missing States header"))?;
    let start = start.ok_or_else(|| syntax(1, "missing Start header"))?;
    let aps = aps.ok_or_else(|| syntax(1, "missing AP header"))?;
    let (num_sets, cond) = acceptance.ok_or_else(|| syntax(1, "missing Acceptance header"))?;
    if num_states == 0 || start >= num_states {
        return Err(AutomatonError::Validation(format!(
            "start state {start} outside 0..{num_states}"
        )));
    }

    if aps.len() > MAX_ATOMS {
        return Err(AutomatonError::TooManyAtoms(aps.len()));
    }
    if num_states.saturating_mul(1 << atom_order.len()) > MAX_TABLE {
        return Err(AutomatonError::Validation(format!(
            "{num_states} states is beyond the supported table size"
        )));
    }

    let pairs = rabin_pairs(&cond)?;
    let mut used = BTreeSet::new();
    for &(fin, inf) in &pairs {
        if fin >= num_sets || inf >= num_sets {
            return Err(AutomatonError::NotRabin(format!(
                "acceptance set index beyond declared count {num_sets}"
            )));
        }
        if !used.insert(fin) || !used.insert(inf) {
            return Err(AutomatonError::NotRabin("acceptance set used twice".into()));
        }
    }
    if let Some((name, args)) = &acc_name {
        if name == "Rabin" && args.first() != Some(&Tok::Int(pairs.len())) {
            return Err(AutomatonError::NotRabin(format!(
                "acc-name declares a different pair count than the {} found",
                pairs.len()
            )));
        }
    }

    let ap_positions: Vec<usize> = aps
        .iter()
        .map(|a| {
            atom_order
                .iter()
                .position(|b| b == a)
                .ok_or_else(|| AutomatonError::UnknownAtom(a.clone()))
        })
        .collect::<Result<_, _>>()?;

    // Body
    let mut decls: Vec<Option<StateDecl>> = (0..num_states).map(|_| None).collect();
    let mut current: Option<usize> = None;
    loop {
        let line = cur.line();
        match cur.peek().cloned() {
            Some(Tok::End) => break,
            Some(Tok::Header(h)) if h == "State" => {
                cur.pos += 1;
                if cur.peek() == Some(&Tok::Punct('[')) {
                    return Err(AutomatonError::Unsupported("state labels".into()));
                }
                let id = cur.int("State")?;
                if id >= num_states {
                    return Err(AutomatonError::Validation(format!("state {id} out of range")));
                }
                if let Some(Tok::Str(_)) = cur.peek() {
                    cur.pos += 1;
                }
                let acc = cur.acc_sig()?.unwrap_or_default();
                if let Some(&s) = acc.iter().find(|&&s| s >= num_sets) {
                    return Err(AutomatonError::Validation(format!(
                        "state {id} uses undeclared acceptance set {s}"
                    )));
                }
                if decls[id].is_some() {
                    return Err(AutomatonError::Validation(format!("state {id} declared twice")));
                }
                decls[id] = Some(StateDecl {
                    acc,
                    edges: Vec::new(),
                });
                current = Some(id);
            }
            Some(Tok::Punct('[')) | Some(Tok::Int(_)) => {
                let id = current.ok_or_else(|| syntax(line, "edge before any State:"))?;
                let label = if cur.eat_punct('[') {
                    let e = cur.or_expr(false)?;
                    cur.expect_punct(']')?;
                    if let Some(v) = e.max_var().filter(|&v| v >= aps.len()) {
                        return Err(AutomatonError::Validation(format!(
                            "edge label references AP {v} but only {} declared",
                            aps.len()
                        )));
                    }
                    Some(e)
                } else {
                    None
                };
                let target = cur.int("edge target")?;
                if cur.peek() == Some(&Tok::Punct('&')) {
                    return Err(AutomatonError::Unsupported("alternating edges".into()));
                }
                if target >= num_states {
                    return Err(AutomatonError::Validation(format!(
                        "edge target {target} out of range"
                    )));
                }
                if cur.acc_sig()?.is_some() {
                    return Err(AutomatonError::Unsupported(
                        "transition-based acceptance".into(),
                    ));
                }
                decls[id].as_mut().unwrap().edges.push(Edge { label, target });
            }
            Some(Tok::Abort) => return Err(syntax(line, "automaton aborted")),
            None => return Err(syntax(line, "missing --END--")),
            Some(_) => return Err(syntax(line, "unexpected token in body")),
        }
    }

    let ap_letters = 1usize << aps.len();
    // Successor per (state, AP assignment).
    let mut local_delta = vec![0usize; num_states * ap_letters];
    for (q, decl) in decls.iter().enumerate() {
        let decl = decl
            .as_ref()
            .ok_or_else(|| AutomatonError::Validation(format!("state {q} has no declaration")))?;
        let labeled = decl.edges.iter().filter(|e| e.label.is_some()).count();
        if labeled == 0 {
            if decl.edges.len() != ap_letters {
                return Err(AutomatonError::Validation(format!(
                    "state {q} is incomplete: {} implicit edges for {ap_letters} letters",
                    decl.edges.len()
                )));
            }
            for (l, e) in decl.edges.iter().enumerate() {
                local_delta[q * ap_letters + l] = e.target;
            }
            continue;
        }
        if labeled != decl.edges.len() {
            return Err(syntax(1, format!("state {q} mixes labeled and implicit edges")));
        }
        for l in 0..ap_letters {
            let mut hit = decl
                .edges
                .iter()
                .filter(|e| e.label.as_ref().unwrap().eval(l));
            let first = hit.next().ok_or_else(|| {
                AutomatonError::Validation(format!("state {q} has no edge for letter {l:#b}"))
            })?;
            if hit.next().is_some() {
                return Err(AutomatonError::Validation(format!(
                    "state {q} is nondeterministic on letter {l:#b}"
                )));
            }
            local_delta[q * ap_letters + l] = first.target;
        }
    }

    let letters = 1usize << atom_order.len();
    let mut delta = Vec::with_capacity(num_states * letters);
    for q in 0..num_states {
        for l in 0..letters {
            let local = ap_positions
                .iter()
                .enumerate()
                .filter(|(_, &p)| l >> p & 1 == 1)
                .fold(0usize, |acc, (i, _)| acc | 1 << i);
            delta.push(local_delta[q * ap_letters + local]);
        }
    }

    let members = |set: usize| -> BTreeSet<usize> {
        decls
            .iter()
            .enumerate()
            .filter(|(_, d)| d.as_ref().is_some_and(|d| d.acc.contains(&set)))
            .map(|(q, _)| q)
            .collect()
    };
    let rabin = pairs
        .iter()
        .map(|&(fin, inf)| RabinPair {
            good: members(inf),
            bad: members(fin),
        })
        .collect();
    Dra::new(atom_order.to_vec(), num_states, start, delta, rabin)
}

/// Writes `dra` as HOA v1 with state-based Rabin acceptance. Pair `i` uses
/// `Fin(2i)` for its bad set and `Inf(2i+1)` for its good set.
pub fn to_hoa(dra: &Dra, name: &str) -> String {
    let mut out = String::new();
    let pairs = dra.pairs();
    let _ = writeln!(out, "HOA: v1");
    let _ = writeln!(out, "name: \"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""));
    let _ = writeln!(out, "States: {}", dra.num_states());
    let _ = writeln!(out, "Start: {}", dra.initial());
    let quoted: Vec<String> = dra.atoms().iter().map(|a| format!("\"{a}\"")).collect();
    let _ = writeln!(out, "AP: {} {}", dra.atoms().len(), quoted.join(" "));
    let _ = writeln!(out, "acc-name: Rabin {}", pairs.len());
    let cond: Vec<String> = (0..pairs.len())
        .map(|i| format!("(Fin({}) & Inf({}))", 2 * i, 2 * i + 1))
        .collect();
    let _ = writeln!(out, "Acceptance: {} {}", 2 * pairs.len(), cond.join(" | "));
    let _ = writeln!(out, "properties: state-acc explicit-labels deterministic complete");
    let _ = writeln!(out, "--BODY--");
    for q in 0..dra.num_states() {
        let sets: Vec<String> = pairs
            .iter()
            .enumerate()
            .flat_map(|(i, p)| {
                let mut v = Vec::new();
                if p.bad.contains(&q) {
                    v.push((2 * i).to_string());
                }
                if p.good.contains(&q) {
                    v.push((2 * i + 1).to_string());
                }
                v
            })
            .collect();
        if sets.is_empty() {
            let _ = writeln!(out, "State: {q}");
        } else {
            let _ = writeln!(out, "State: {q} {{{}}}", sets.join(" "));
        }
        for l in 0..dra.num_letters() {
            let lits: Vec<String> = (0..dra.atoms().len())
                .map(|i| if l >> i & 1 == 1 { i.to_string() } else { format!("!{i}") })
                .collect();
            let label = if lits.is_empty() { "t".to_string() } else { lits.join("&") };
            let _ = writeln!(out, "[{label}] {}", dra.step(q, Letter(l as u32)));
        }
    }
    let _ = writeln!(out, "--END--");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GF_A: &str = r#"HOA: v1
name: "GF a"
States: 2
Start: 0
AP: 1 "a"
acc-name: Rabin 1
Acceptance: 2 Fin(0) & Inf(1)
--BODY--
State: 0
[!0] 0
[0] 1
State: 1 {1}
[!0] 0
[0] 1
--END--
"#;

    fn order(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_gf_a() {
        let d = parse_hoa(GF_A, &order(&["a"])).unwrap();
        assert_eq!(d.num_states(), 2);
        assert_eq!(d.pairs()[0].good, BTreeSet::from([1]));
        assert!(d.pairs()[0].bad.is_empty());
        assert_eq!(d.step(0, Letter(1)), 1);
    }

    #[test]
    fn universal_automaton() {
        let text = "HOA: v1 States: 1 Start: 0 AP: 0 Acceptance: 2 Inf(1) & Fin(0) \
                    --BODY-- State: 0 {1} [t] 0 --END--";
        let d = parse_hoa(text, &order(&["x"])).unwrap();
        assert_eq!(d.pairs()[0].good, BTreeSet::from([0]));
        assert_eq!(d.step(0, Letter(1)), 0);
    }

    #[test]
    fn buchi_is_not_rabin() {
        let text = "HOA: v1 States: 1 Start: 0 AP: 0 Acceptance: 1 Inf(0) \
                    --BODY-- State: 0 {0} [t] 0 --END--";
        assert!(matches!(parse_hoa(text, &[]), Err(AutomatonError::NotRabin(_))));
    }

    #[test]
    fn transition_acceptance_is_unsupported() {
        let text = "HOA: v1 States: 1 Start: 0 AP: 0 Acceptance: 2 Fin(0)&Inf(1) \
                    --BODY-- State: 0 [t] 0 {1} --END--";
        assert!(matches!(parse_hoa(text, &[]), Err(AutomatonError::Unsupported(_))));
    }

    #[test]
    fn nondeterminism_and_incompleteness() {
        let nondet = "HOA: v1 States: 2 Start: 0 AP: 1 \"a\" Acceptance: 2 Fin(0)&Inf(1) \
                      --BODY-- State: 0 [t] 0 [0] 1 State: 1 [t] 1 --END--";
        assert!(matches!(
            parse_hoa(nondet, &order(&["a"])),
            Err(AutomatonError::Validation(_))
        ));
        let incomplete = "HOA: v1 States: 1 Start: 0 AP: 1 \"a\" Acceptance: 2 Fin(0)&Inf(1) \
                          --BODY-- State: 0 [0] 0 --END--";
        assert!(matches!(
            parse_hoa(incomplete, &order(&["a"])),
            Err(AutomatonError::Validation(_))
        ));
    }

    #[test]
    fn permuted_sets_and_multiple_pairs() {
        let text = "HOA: v1 States: 1 Start: 0 AP: 0 acc-name: Rabin 2 \
                    Acceptance: 4 (Inf(3) & Fin(2)) | (Fin(1) & Inf(0)) \
                    --BODY-- State: 0 {0 2} [t] 0 --END--";
        let d = parse_hoa(text, &[]).unwrap();
        assert_eq!(d.pairs().len(), 2);
        assert!(d.pairs()[0].good.is_empty());
        assert_eq!(d.pairs()[0].bad, BTreeSet::from([0]));
        assert_eq!(d.pairs()[1].good, BTreeSet::from([0]));
    }

    #[test]
    fn implicit_labels() {
        let text = "HOA: v1 States: 2 Start: 0 AP: 1 \"a\" Acceptance: 2 Fin(0)&Inf(1) \
                    --BODY-- State: 0 0 1 State: 1 {1} 0 1 --END--";
        let d = parse_hoa(text, &order(&["a"])).unwrap();
        assert_eq!(d, parse_hoa(GF_A, &order(&["a"])).unwrap());
    }

    #[test]
    fn unknown_ap_is_rejected() {
        assert_eq!(
            parse_hoa(GF_A, &order(&["b"])),
            Err(AutomatonError::UnknownAtom("a".into()))
        );
    }

    #[test]
    fn export_round_trips() {
        let d = parse_hoa(GF_A, &order(&["b", "a"])).unwrap();
        let text = to_hoa(&d, "gf \"a\"");
        assert_eq!(parse_hoa(&text, d.atoms()).unwrap(), d);
    }
}
