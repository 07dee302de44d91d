use super::LtlFormula;

/// Maximum `X` nesting accepted inside the safety conjunct.
pub const MAX_SAFETY_DEPTH: usize = 3;

/// A formula of the shape `GF p1 & .. & GF pn & FG q1 & .. & FG qm & G safe`.
///
/// The `p` and `q` are propositional; `safe` is propositional over `X` terms
/// nested at most [`MAX_SAFETY_DEPTH`] deep.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FragmentSpec {
    pub recurrence: Vec<LtlFormula>,
    pub stability: Vec<LtlFormula>,
    pub safety: Option<LtlFormula>,
}

impl FragmentSpec {
    pub fn is_empty(&self) -> bool {
        self.recurrence.is_empty() && self.stability.is_empty() && self.safety.is_none()
    }

    /// Rebuilds the conjunction this spec stands for.
    pub fn to_formula(&self) -> LtlFormula {
        let mut parts = Vec::new();
        parts.extend(
            self.recurrence
                .iter()
                .map(|p| LtlFormula::always(LtlFormula::eventually(p.clone()))),
        );
        parts.extend(
            self.stability
                .iter()
                .map(|p| LtlFormula::eventually(LtlFormula::always(p.clone()))),
        );
        if let Some(s) = &self.safety {
            parts.push(LtlFormula::always(s.clone()));
        }
        LtlFormula::and_all(parts)
    }

    pub fn safety_depth(&self) -> usize {
        self.safety
            .as_ref()
            .and_then(LtlFormula::next_depth)
            .unwrap_or(0)
    }
}

fn flatten_and<'a>(f: &'a LtlFormula, out: &mut Vec<&'a LtlFormula>) {
    match f {
        LtlFormula::And(parts) => parts.iter().for_each(|p| flatten_and(p, out)),
        other => out.push(other),
    }
}

/// Classifies `f` into the directly translatable fragment.
///
/// Returns `None` when `f` is not such a conjunction; callers then need an
/// externally produced automaton.
pub fn to_fragment(f: &LtlFormula) -> Option<FragmentSpec> {
    let mut conjuncts = Vec::new();
    flatten_and(f, &mut conjuncts);
    let mut spec = FragmentSpec::default();
    for c in conjuncts {
        match c {
            LtlFormula::Always(inner) => match inner.as_ref() {
                LtlFormula::Eventually(p) if p.is_propositional() => {
                    spec.recurrence.push(p.as_ref().clone())
                }
                safe => {
                    let depth = safe.next_depth()?;
                    if depth > MAX_SAFETY_DEPTH || spec.safety.is_some() {
                        return None;
                    }
                    spec.safety = Some(safe.clone());
                }
            },
            LtlFormula::Eventually(inner) => match inner.as_ref() {
                LtlFormula::Always(p) if p.is_propositional() => {
                    spec.stability.push(p.as_ref().clone())
                }
                _ => return None,
            },
            _ => return None,
        }
    }
    Some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn frag(text: &str) -> Option<FragmentSpec> {
        to_fragment(&parse_ltl(text).unwrap())
    }

    #[test]
    fn grid_objective_splits() {
        let spec = frag("G F a & G F b & G ! c").unwrap();
        assert_eq!(spec.recurrence, vec![LtlFormula::atom("a"), LtlFormula::atom("b")]);
        assert!(spec.stability.is_empty());
        assert_eq!(spec.safety, Some(LtlFormula::not(LtlFormula::atom("c"))));
    }

    #[test]
    fn until_is_rejected() {
        assert_eq!(frag("a U b"), None);
        assert_eq!(frag("G F a & G (a U b)"), None);
        assert_eq!(frag("a"), None);
        assert_eq!(frag("G F (X a)"), None);
        assert_eq!(frag("G X X X X a"), None);
        assert_eq!(frag("G a & G b"), None);
    }

    #[test]
    fn min_green_safety_has_depth_three() {
        let spec = frag(
            "F G (x1le30 & x2le30) & G F x3le10 & G F x4le10 \
             & G ((sv2 & X !sv2) -> (X X !sv2 & X X X !sv2))",
        )
        .unwrap();
        assert_eq!(spec.safety_depth(), 3);
        assert_eq!(spec.recurrence.len(), 2);
        assert_eq!(spec.stability.len(), 1);
    }

    #[test]
    fn nested_conjunctions_flatten() {
        let spec = frag("(G F a & (F G b)) & G c").unwrap();
        assert_eq!(spec.recurrence.len(), 1);
        assert_eq!(spec.stability.len(), 1);
        assert_eq!(spec.safety, Some(LtlFormula::atom("c")));
        assert_eq!(
            spec.to_formula(),
            parse_ltl("G F a & F G b & G c").unwrap()
        );
    }
}
