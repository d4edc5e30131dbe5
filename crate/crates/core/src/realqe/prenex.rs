//! Prenex normalization: hoists quantifiers out of a negation-normal
//! formula, merging blocks where the logic permits and refusing (rather
//! than renaming) when hoisting would capture or conflate variables.

use std::collections::BTreeSet;

use crate::logic::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    Forall,
    Exists,
}

/// A formula in prenex form: quantifier prefix (outermost first) over a
/// quantifier-free matrix.
#[derive(Clone, Debug)]
pub struct Prenexed {
    pub prefix: Vec<(Quant, String)>,
    pub matrix: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrenexError {
    /// Hoisting would require renaming a bound variable; the caller should
    /// fall back to another decision method.
    NeedsRenaming(String),
}

impl std::fmt::Display for PrenexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrenexError::NeedsRenaming(v) => {
                write!(f, "prenexing would need to rename the variable {v}")
            }
        }
    }
}

impl std::error::Error for PrenexError {}

/// Prenexes a formula that is already in negation normal form (the output
/// of `Formula::simplify`). Same-name blocks merge when sound: repeated
/// universals under a conjunction and repeated existentials under a
/// disjunction; every other collision is refused.
pub fn prenex(fm: &Formula) -> Result<Prenexed, PrenexError> {
    match fm {
        Formula::True | Formula::False | Formula::Atom(_) => {
            Ok(Prenexed { prefix: Vec::new(), matrix: fm.clone() })
        }
        Formula::Not(inner) => {
            if inner.is_quantifier_free() {
                Ok(Prenexed { prefix: Vec::new(), matrix: fm.clone() })
            } else {
                // Simplified input keeps negations on atoms only.
                Err(PrenexError::NeedsRenaming(format!("negated block {inner}")))
            }
        }
        Formula::Forall(vars, body) => hoist_block(Quant::Forall, vars, body),
        Formula::Exists(vars, body) => hoist_block(Quant::Exists, vars, body),
        Formula::And(parts) => merge_parts(parts, true),
        Formula::Or(parts) => merge_parts(parts, false),
    }
}

fn hoist_block(q: Quant, vars: &[String], body: &Formula) -> Result<Prenexed, PrenexError> {
    let inner = prenex(body)?;
    let mut prefix: Vec<(Quant, String)> = Vec::new();
    for v in vars {
        if prefix.iter().any(|(_, n)| n == v) {
            // Duplicate name inside one block: the later binding is the
            // real one, the earlier is vacuous; keep a single entry.
            continue;
        }
        if inner.prefix.iter().any(|(_, n)| n == v) {
            // An inner quantifier shadows this variable; hoisting both
            // would conflate two distinct bindings.
            return Err(PrenexError::NeedsRenaming(v.clone()));
        }
        prefix.push((q, v.clone()));
    }
    prefix.extend(inner.prefix);
    Ok(Prenexed { prefix, matrix: inner.matrix })
}

/// Merges the prenexed children of a conjunction (`conj` true) or
/// disjunction. A variable bound by several children merges into one
/// quantifier only for forall-under-and and exists-under-or, and only when
/// the merge cannot reorder that variable across a non-mergeable quantifier
/// of its own child (merging the v of `exists w forall v` into an earlier
/// slot would weaken it to `forall v exists w`). Captures of a sibling's
/// free variable are refused outright.
fn merge_parts(parts: &[Formula], conj: bool) -> Result<Prenexed, PrenexError> {
    let mergeable = if conj { Quant::Forall } else { Quant::Exists };
    let frees: Vec<BTreeSet<String>> = parts.iter().map(|p| p.free_vars()).collect();
    let subs: Vec<Prenexed> = parts.iter().map(prenex).collect::<Result<_, _>>()?;
    let mut bind_children: std::collections::BTreeMap<&str, usize> =
        std::collections::BTreeMap::new();
    for sub in &subs {
        for (_, v) in &sub.prefix {
            *bind_children.entry(v.as_str()).or_insert(0) += 1;
        }
    }
    let mut prefix: Vec<(Quant, String)> = Vec::new();
    for (i, sub) in subs.iter().enumerate() {
        for (pos, (q, v)) in sub.prefix.iter().enumerate() {
            for (j, fset) in frees.iter().enumerate() {
                if j != i && fset.contains(v) {
                    return Err(PrenexError::NeedsRenaming(v.clone()));
                }
            }
            if bind_children[v.as_str()] > 1 {
                // Shared name: only the mergeable quantifier may merge, and
                // nothing non-mergeable may precede it within its child.
                if *q != mergeable
                    || sub.prefix[..pos].iter().any(|(pq, _)| *pq != mergeable)
                {
                    return Err(PrenexError::NeedsRenaming(v.clone()));
                }
                if !prefix.iter().any(|(_, n)| n == v) {
                    prefix.push((*q, v.clone()));
                }
            } else {
                prefix.push((*q, v.clone()));
            }
        }
    }
    let matrices: Vec<Formula> = subs.into_iter().map(|s| s.matrix).collect();
    let matrix = if conj { Formula::And(matrices) } else { Formula::Or(matrices) };
    Ok(Prenexed { prefix, matrix })
}
