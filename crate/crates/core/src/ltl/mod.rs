//! Linear temporal logic formulas: syntax tree, parser and fragment classification.

mod fragment;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use fragment::{to_fragment, FragmentSpec};
pub use parser::{parse_ltl, ParseError};

/// Abstract syntax tree of an LTL formula.
///
/// Conjunction and disjunction are n-ary. The parser only produces them with
/// at least two children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlFormula {
    True,
    False,
    Atom(String),
    Not(Box<LtlFormula>),
    And(Vec<LtlFormula>),
    Or(Vec<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        LtlFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        LtlFormula::Not(Box::new(f))
    }

    pub fn next(f: LtlFormula) -> Self {
        LtlFormula::Next(Box::new(f))
    }

    pub fn eventually(f: LtlFormula) -> Self {
        LtlFormula::Eventually(Box::new(f))
    }

    pub fn always(f: LtlFormula) -> Self {
        LtlFormula::Always(Box::new(f))
    }

    pub fn until(lhs: LtlFormula, rhs: LtlFormula) -> Self {
        LtlFormula::Until(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: LtlFormula, rhs: LtlFormula) -> Self {
        LtlFormula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction of `parts`, collapsing the zero- and one-element cases.
    pub fn and_all(mut parts: Vec<LtlFormula>) -> Self {
        match parts.len() {
            0 => LtlFormula::True,
            1 => parts.pop().unwrap(),
            _ => LtlFormula::And(parts),
        }
    }

    pub fn or_all(mut parts: Vec<LtlFormula>) -> Self {
        match parts.len() {
            0 => LtlFormula::False,
            1 => parts.pop().unwrap(),
            _ => LtlFormula::Or(parts),
        }
    }

    pub fn children(&self) -> Vec<&LtlFormula> {
        use LtlFormula::*;
        match self {
            True | False | Atom(_) => Vec::new(),
            Not(f) | Next(f) | Eventually(f) | Always(f) => vec![f],
            And(fs) | Or(fs) => fs.iter().collect(),
            Implies(a, b) | Until(a, b) => vec![a, b],
        }
    }

    /// True when the formula uses only boolean connectives.
    pub fn is_propositional(&self) -> bool {
        use LtlFormula::*;
        match self {
            True | False | Atom(_) => true,
            Not(_) | And(_) | Or(_) | Implies(..) => {
                self.children().into_iter().all(LtlFormula::is_propositional)
            }
            Next(_) | Until(..) | Eventually(_) | Always(_) => false,
        }
    }

    /// Maximum nesting of `X`, or `None` if the formula uses `U`, `F` or `G`.
    pub fn next_depth(&self) -> Option<usize> {
        use LtlFormula::*;
        match self {
            True | False | Atom(_) => Some(0),
            Next(f) => f.next_depth().map(|d| d + 1),
            Not(_) | And(_) | Or(_) | Implies(..) => self
                .children()
                .into_iter()
                .map(LtlFormula::next_depth)
                .try_fold(0, |acc, d| d.map(|d| acc.max(d))),
            Until(..) | Eventually(_) | Always(_) => None,
        }
    }

    /// Evaluates a propositional formula on a single letter.
    ///
    /// Temporal operators are rejected with `None`.
    pub fn eval_propositional(&self, holds: &dyn Fn(&str) -> bool) -> Option<bool> {
        use LtlFormula::*;
        Some(match self {
            True => true,
            False => false,
            Atom(a) => holds(a),
            Not(f) => !f.eval_propositional(holds)?,
            And(fs) => {
                let mut v = true;
                for f in fs {
                    v &= f.eval_propositional(holds)?;
                }
                v
            }
            Or(fs) => {
                let mut v = false;
                for f in fs {
                    v |= f.eval_propositional(holds)?;
                }
                v
            }
            Implies(a, b) => !a.eval_propositional(holds)? || b.eval_propositional(holds)?,
            Next(_) | Until(..) | Eventually(_) | Always(_) => return None,
        })
    }

    fn precedence(&self) -> u8 {
        use LtlFormula::*;
        match self {
            Implies(..) => 0,
            Or(_) => 1,
            And(_) => 2,
            Until(..) => 3,
            _ => 4,
        }
    }
}

/// Atom names occurring in `f`, in lexicographic order.
pub fn atoms(f: &LtlFormula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_atoms(f, &mut out);
    out
}

fn collect_atoms(f: &LtlFormula, out: &mut BTreeSet<String>) {
    if let LtlFormula::Atom(a) = f {
        out.insert(a.clone());
    }
    for c in f.children() {
        collect_atoms(c, out);
    }
}

/// Whether `name` is a valid atom identifier (and not a reserved word).
pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    let first_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !parser::is_reserved(name)
}

// Every compound child is parenthesized, so printing then parsing gives back
// the same tree, including nested n-ary nodes.
impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LtlFormula::*;
        let wrap = |g: &LtlFormula, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if g.precedence() == 4 {
                write!(f, "{g}")
            } else {
                write!(f, "({g})")
            }
        };
        let wrap_strict = |g: &LtlFormula, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if matches!(g, True | False | Atom(_)) || g.precedence() == 4 {
                write!(f, "{g}")
            } else {
                write!(f, "({g})")
            }
        };
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(a) => write!(f, "{a}"),
            Not(g) => {
                write!(f, "!")?;
                wrap(g, f)
            }
            Next(g) => {
                write!(f, "X ")?;
                wrap(g, f)
            }
            Eventually(g) => {
                write!(f, "F ")?;
                wrap(g, f)
            }
            Always(g) => {
                write!(f, "G ")?;
                wrap(g, f)
            }
            And(gs) | Or(gs) => {
                let op = if matches!(self, And(_)) { " & " } else { " | " };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    wrap_strict(g, f)?;
                }
                Ok(())
            }
            Until(a, b) | Implies(a, b) => {
                let op = if matches!(self, Until(..)) { " U " } else { " -> " };
                wrap_strict(a, f)?;
                f.write_str(op)?;
                wrap_strict(b, f)
            }
        }
    }
}
