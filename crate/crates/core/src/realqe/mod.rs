//! Decision procedures for sentences of ordered real arithmetic over
//! polynomial atoms: an exact cylindrical-decomposition engine with an
//! optional external solver fallback, witness extraction, and quantifier
//! elimination. Every verdict is either exact or an explicit unknown; nothing
//! is ever guessed.

pub mod algnum;
pub mod cad;
pub mod extfield;
pub mod prenex;
pub mod projection;
pub mod smt;
pub mod unipoly;

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::logic::Formula;
use crate::rational::{int, rat, Rational};

use cad::{cad_decide, cad_enumerate, cad_qe, CadLimits};
use prenex::{prenex, PrenexError, Prenexed, Quant};

/// Which engine answers decision questions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QeBackend {
    Cad,
    Smt,
    Auto,
}

/// Limits and strategy for the decision procedures.
#[derive(Clone, Debug)]
pub struct QeConfig {
    pub backend: QeBackend,
    pub max_vars: usize,
    pub max_degree: u32,
    pub budget_cells: usize,
    pub budget_ms: u64,
    pub seed: u64,
}

impl Default for QeConfig {
    fn default() -> Self {
        QeConfig {
            backend: QeBackend::Auto,
            max_vars: 4,
            max_degree: 8,
            budget_cells: 50_000,
            budget_ms: 30_000,
            seed: 0,
        }
    }
}

impl QeConfig {
    fn limits(&self) -> CadLimits {
        CadLimits {
            max_vars: self.max_vars,
            max_degree: self.max_degree,
            budget_cells: self.budget_cells,
            budget_ms: self.budget_ms,
        }
    }
}

/// Verdict on a closed sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QeAnswer {
    True,
    False,
    Unknown(String),
}

impl QeAnswer {
    pub fn is_true(&self) -> bool {
        matches!(self, QeAnswer::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, QeAnswer::False)
    }
}

/// Outcome of a witness search over named free variables.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessAnswer {
    Found(BTreeMap<String, Rational>),
    NoneExists,
    Unknown(String),
}

/// Outcome of quantifier elimination.
#[derive(Clone, Debug, PartialEq)]
pub enum QeFormula {
    Eliminated(Formula),
    Unknown(String),
}

const GRID_EVAL_CAP: usize = 10_000;
const RANDOM_SAMPLES: usize = 128;

fn grid_values() -> Vec<Rational> {
    vec![
        int(-2),
        rat(-3, 2),
        int(-1),
        rat(-1, 2),
        int(0),
        rat(1, 2),
        int(1),
        rat(3, 2),
        int(2),
    ]
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-24..=24);
    let den: i64 = *[1, 2, 3, 4, 6, 8].get(rng.gen_range(0..6)).expect("index in range");
    rat(num, den)
}

/// Searches rational sample points for one where the quantifier-free matrix
/// evaluates to `target`. Deterministic for a fixed seed.
fn sample_matrix(
    matrix: &Formula,
    vars: &[String],
    target: bool,
    seed: u64,
) -> Option<BTreeMap<String, Rational>> {
    let grid = grid_values();
    let combos = grid.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
    if combos <= GRID_EVAL_CAP {
        let mut idx = vec![0usize; vars.len()];
        loop {
            let point: BTreeMap<String, Rational> = vars
                .iter()
                .zip(&idx)
                .map(|(v, &i)| (v.clone(), grid[i].clone()))
                .collect();
            if matrix.eval(&point).ok() == Some(target) {
                return Some(point);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    idx.clear();
                    break;
                }
                idx[k] += 1;
                if idx[k] < grid.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if idx.is_empty() {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_SAMPLES {
        let point: BTreeMap<String, Rational> =
            vars.iter().map(|v| (v.clone(), random_rational(&mut rng))).collect();
        if matrix.eval(&point).ok() == Some(target) {
            return Some(point);
        }
    }
    None
}

/// Finds a rational counterexample to a purely universal closed sentence by
/// sampling. `None` proves nothing; `Some` is an exact refutation.
pub fn falsify_universal(fm: &Formula, cfg: &QeConfig) -> Option<BTreeMap<String, Rational>> {
    let fm = fm.simplify();
    if !fm.free_vars().is_empty() {
        return None;
    }
    let pre = prenex(&fm).ok()?;
    if pre.prefix.is_empty() || pre.prefix.iter().any(|(q, _)| *q != Quant::Forall) {
        return None;
    }
    let vars: Vec<String> = pre.prefix.iter().map(|(_, v)| v.clone()).collect();
    sample_matrix(&pre.matrix, &vars, false, cfg.seed)
}

/// Splits a prefix into maximal same-quantifier blocks, outermost first.
fn quantifier_blocks(pre: &Prenexed) -> Vec<(Quant, Vec<String>)> {
    let mut blocks: Vec<(Quant, Vec<String>)> = Vec::new();
    for (q, v) in &pre.prefix {
        match blocks.last_mut() {
            Some((bq, vars)) if bq == q => vars.push(v.clone()),
            _ => blocks.push((*q, vec![v.clone()])),
        }
    }
    blocks
}

/// Sound pre-passes for an exists-block-over-forall-block sentence.
/// Refutation: instantiating the universal variables at sample points
/// weakens the sentence, so an exact False of the weakened form refutes the
/// original. Witness: an exact True of the inner universal sentence at a
/// sampled outer point proves the original.
fn exists_forall_prepass(
    outer: &[String],
    inner: &[String],
    matrix: &Formula,
    cfg: &QeConfig,
) -> Option<(QeAnswer, &'static str)> {
    // Refutation: conjoin the matrix over sampled inner points. Any subset
    // of instantiations is a sound weakening, so the conjunction is capped
    // by its count of distinct atom polynomials to keep the outer
    // decomposition small.
    let mut conj: Vec<Formula> = Vec::new();
    let mut distinct: BTreeSet<String> = BTreeSet::new();
    for point in instantiation_points(inner, cfg.seed) {
        if let Ok(fm) = matrix.substitute(&point) {
            let fm = fm.simplify();
            for atom in fm.atoms() {
                distinct.insert(format!("{}", crate::realqe::projection::canonical(&atom.poly)));
            }
            if distinct.len() > 16 {
                break;
            }
            conj.push(fm);
        }
    }
    if !conj.is_empty() {
        let weakened = Formula::exists(outer.to_vec(), Formula::and(conj)).simplify();
        if let Ok(pre) = prenex(&weakened) {
            if let Ok(false) = cad_decide(&pre, &cfg.limits()) {
                return Some((QeAnswer::False, "sampling"));
            }
        }
    }
    // Witness: decide the inner universal sentence at sampled outer points.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let grid = grid_values();
    let mut outer_points: Vec<BTreeMap<String, Rational>> = Vec::new();
    if grid.len().checked_pow(outer.len() as u32).unwrap_or(usize::MAX) <= 100 {
        let mut idx = vec![0usize; outer.len()];
        loop {
            outer_points.push(
                outer.iter().zip(&idx).map(|(v, &i)| (v.clone(), grid[i].clone())).collect(),
            );
            if !advance_indices(&mut idx, grid.len()) {
                break;
            }
        }
    }
    for _ in 0..24 {
        outer_points
            .push(outer.iter().map(|v| (v.clone(), random_rational(&mut rng))).collect());
    }
    // Full decompositions are reserved for points that survive sampling,
    // and capped so the pre-pass cannot eat the whole budget.
    let mut full_decides = 0usize;
    for point in outer_points {
        if let Ok(fm) = matrix.substitute(&point) {
            let inner_sentence = Formula::forall(inner.to_vec(), fm).simplify();
            if let Ok(pre) = prenex(&inner_sentence) {
                let vars: Vec<String> = pre.prefix.iter().map(|(_, v)| v.clone()).collect();
                if !pre.prefix.is_empty()
                    && sample_matrix(&pre.matrix, &vars, false, cfg.seed).is_some()
                {
                    continue;
                }
                if full_decides >= 6 {
                    break;
                }
                full_decides += 1;
                if let Ok(true) = cad_decide(&pre, &cfg.limits()) {
                    return Some((QeAnswer::True, "sampling"));
                }
            }
        }
    }
    None
}

/// Small sample set for universal instantiation: a low-denominator grid
/// capped in size, then seeded random points.
fn instantiation_points(vars: &[String], seed: u64) -> Vec<BTreeMap<String, Rational>> {
    let grid = [int(0), rat(1, 2), rat(-1, 2), int(1), int(-1)];
    let mut points = Vec::new();
    if grid.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX) <= 25 {
        let mut idx = vec![0usize; vars.len()];
        loop {
            points.push(
                vars.iter().zip(&idx).map(|(v, &i)| (v.clone(), grid[i].clone())).collect(),
            );
            if !advance_indices(&mut idx, grid.len()) {
                break;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    for _ in 0..8 {
        points.push(vars.iter().map(|v| (v.clone(), random_rational(&mut rng))).collect());
    }
    points
}

/// Advances a mixed-radix counter; false when it wraps to all zeros.
fn advance_indices(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

fn decide_prenexed(pre: &Prenexed, cfg: &QeConfig) -> (QeAnswer, &'static str) {
    // Sampling settles one-block prefixes quickly and exactly.
    let all_forall = !pre.prefix.is_empty() && pre.prefix.iter().all(|(q, _)| q == &Quant::Forall);
    let all_exists = !pre.prefix.is_empty() && pre.prefix.iter().all(|(q, _)| q == &Quant::Exists);
    let vars: Vec<String> = pre.prefix.iter().map(|(_, v)| v.clone()).collect();
    if all_forall && sample_matrix(&pre.matrix, &vars, false, cfg.seed).is_some() {
        return (QeAnswer::False, "sampling");
    }
    if all_exists && sample_matrix(&pre.matrix, &vars, true, cfg.seed).is_some() {
        return (QeAnswer::True, "sampling");
    }
    let blocks = quantifier_blocks(pre);
    if blocks.len() == 2 && blocks[0].0 == Quant::Exists && blocks[1].0 == Quant::Forall {
        if let Some(hit) = exists_forall_prepass(&blocks[0].1, &blocks[1].1, &pre.matrix, cfg) {
            return hit;
        }
    }

    let run_cad = |reasons: &mut Vec<String>| -> Option<QeAnswer> {
        match cad_decide(pre, &cfg.limits()) {
            Ok(true) => Some(QeAnswer::True),
            Ok(false) => Some(QeAnswer::False),
            Err(e) => {
                reasons.push(e.to_string());
                None
            }
        }
    };
    let run_smt = |reasons: &mut Vec<String>| -> Option<QeAnswer> {
        match smt::decide(pre, cfg.budget_ms) {
            Ok(true) => Some(QeAnswer::True),
            Ok(false) => Some(QeAnswer::False),
            Err(e) => {
                reasons.push(e.to_string());
                None
            }
        }
    };

    let mut reasons = Vec::new();
    match cfg.backend {
        QeBackend::Cad => {
            if let Some(a) = run_cad(&mut reasons) {
                return (a, "cad");
            }
        }
        QeBackend::Smt => {
            if let Some(a) = run_smt(&mut reasons) {
                return (a, "smt");
            }
        }
        QeBackend::Auto => {
            if let Some(a) = run_cad(&mut reasons) {
                return (a, "cad");
            }
            if smt::solver_command().is_some() {
                if let Some(a) = run_smt(&mut reasons) {
                    return (a, "smt");
                }
            } else {
                reasons.push(smt::SmtFail::NoSolver.to_string());
            }
        }
    }
    (QeAnswer::Unknown(reasons.join("; ")), "none")
}

fn uniform_engine(engines: &[&'static str]) -> &'static str {
    match engines.first() {
        None => "evaluation",
        Some(first) if engines.iter().all(|e| e == first) => first,
        Some(_) => "split",
    }
}

/// Decides a closed sentence, also naming the engine that settled it:
/// "sampling", "cad", "smt", "evaluation", "split" for mixed-engine
/// conjunction splits, or "none" for unknown verdicts.
pub fn decide_closed_traced(fm: &Formula, cfg: &QeConfig) -> (QeAnswer, &'static str) {
    let fm = fm.simplify();
    if !fm.free_vars().is_empty() {
        return (
            QeAnswer::Unknown(format!(
                "sentence is not closed: {} free",
                fm.free_vars().into_iter().collect::<Vec<_>>().join(", ")
            )),
            "none",
        );
    }
    match &fm {
        Formula::True => return (QeAnswer::True, "evaluation"),
        Formula::False => return (QeAnswer::False, "evaluation"),
        // Closed conjunctions and disjunctions decide part by part, keeping
        // each decomposition small and avoiding prenex renaming entirely.
        Formula::And(parts) => {
            let mut engines: Vec<&'static str> = Vec::new();
            let mut pending: Option<String> = None;
            for part in parts {
                let (ans, engine) = decide_closed_traced(part, cfg);
                match ans {
                    QeAnswer::False => return (QeAnswer::False, engine),
                    QeAnswer::True => engines.push(engine),
                    QeAnswer::Unknown(u) => pending = Some(u),
                }
            }
            return match pending {
                Some(u) => (QeAnswer::Unknown(u), "none"),
                None => (QeAnswer::True, uniform_engine(&engines)),
            };
        }
        Formula::Or(parts) => {
            let mut engines: Vec<&'static str> = Vec::new();
            let mut pending: Option<String> = None;
            for part in parts {
                let (ans, engine) = decide_closed_traced(part, cfg);
                match ans {
                    QeAnswer::True => return (QeAnswer::True, engine),
                    QeAnswer::False => engines.push(engine),
                    QeAnswer::Unknown(u) => pending = Some(u),
                }
            }
            return match pending {
                Some(u) => (QeAnswer::Unknown(u), "none"),
                None => (QeAnswer::False, uniform_engine(&engines)),
            };
        }
        // A universal block distributes over a conjunction (and dually an
        // existential one over a disjunction), splitting the matrix.
        Formula::Forall(vars, body) => {
            if let Formula::And(parts) = body.as_ref() {
                let split = Formula::And(
                    parts.iter().map(|p| Formula::forall(vars.clone(), p.clone())).collect(),
                );
                return decide_closed_traced(&split, cfg);
            }
        }
        Formula::Exists(vars, body) => {
            if let Formula::Or(parts) = body.as_ref() {
                let split = Formula::Or(
                    parts.iter().map(|p| Formula::exists(vars.clone(), p.clone())).collect(),
                );
                return decide_closed_traced(&split, cfg);
            }
        }
        _ => {}
    }
    match prenex(&fm) {
        Ok(pre) => decide_prenexed(&pre, cfg),
        Err(PrenexError::NeedsRenaming(v)) => {
            // The decomposition needs a prenex form; an external solver does
            // not.
            if cfg.backend != QeBackend::Cad {
                match smt::decide_sentence(&fm, cfg.budget_ms) {
                    Ok(true) => (QeAnswer::True, "smt"),
                    Ok(false) => (QeAnswer::False, "smt"),
                    Err(e) => (
                        QeAnswer::Unknown(format!("prenex form needs renaming of {v}; {e}")),
                        "none",
                    ),
                }
            } else {
                (QeAnswer::Unknown(format!("prenex form needs renaming of {v}")), "none")
            }
        }
    }
}

/// Decides a closed sentence.
pub fn decide_closed(fm: &Formula, cfg: &QeConfig) -> QeAnswer {
    decide_closed_traced(fm, cfg).0
}

/// Searches for exact rational values of `free` making the remaining
/// (possibly quantified) formula true. `NoneExists` is a proof of emptiness;
/// `Found` witnesses are re-verified before being returned.
pub fn find_witness(fm: &Formula, free: &[String], cfg: &QeConfig) -> WitnessAnswer {
    let fm = fm.simplify();
    for v in fm.free_vars() {
        if !free.contains(&v) {
            return WitnessAnswer::Unknown(format!("unexpected free variable {v}"));
        }
    }
    match &fm {
        Formula::True => {
            return WitnessAnswer::Found(free.iter().map(|v| (v.clone(), int(0))).collect())
        }
        Formula::False => return WitnessAnswer::NoneExists,
        _ => {}
    }
    let pre = match prenex(&fm) {
        Ok(p) => p,
        Err(PrenexError::NeedsRenaming(v)) => {
            return WitnessAnswer::Unknown(format!("prenex form needs renaming of {v}"))
        }
    };
    let cells = match cad_enumerate(&pre, free, &cfg.limits()) {
        Ok(cells) => cells,
        Err(e) => return WitnessAnswer::Unknown(e.to_string()),
    };
    let mut algebraic_only = false;
    let mut candidate: Option<Vec<Rational>> = None;
    for cell in cells.iter().filter(|c| c.truth) {
        match cell.rational_sample() {
            Some(values) => {
                if cell.full_dim() {
                    candidate = Some(values);
                    break;
                }
                if candidate.is_none() {
                    candidate = Some(values);
                }
            }
            None => algebraic_only = true,
        }
    }
    match candidate {
        Some(values) => {
            let binding: BTreeMap<String, Rational> =
                free.iter().cloned().zip(values).collect();
            match fm.substitute(&binding) {
                Ok(closed) => match decide_closed(&closed, cfg) {
                    QeAnswer::True => WitnessAnswer::Found(binding),
                    QeAnswer::False => WitnessAnswer::Unknown(
                        "candidate witness failed re-verification".to_string(),
                    ),
                    QeAnswer::Unknown(r) => {
                        WitnessAnswer::Unknown(format!("witness re-verification: {r}"))
                    }
                },
                Err(e) => WitnessAnswer::Unknown(format!("witness substitution: {e}")),
            }
        }
        None if algebraic_only => WitnessAnswer::Unknown(
            "the true region contains only irrational points".to_string(),
        ),
        None => WitnessAnswer::NoneExists,
    }
}

/// Eliminates the quantifiers of `fm`, producing an equivalent
/// quantifier-free description of its free variables.
pub fn qe(fm: &Formula, cfg: &QeConfig) -> QeFormula {
    let fm = fm.simplify();
    let free: Vec<String> = fm.free_vars().into_iter().collect();
    if free.is_empty() {
        return match decide_closed(&fm, cfg) {
            QeAnswer::True => QeFormula::Eliminated(Formula::True),
            QeAnswer::False => QeFormula::Eliminated(Formula::False),
            QeAnswer::Unknown(r) => QeFormula::Unknown(r),
        };
    }
    if fm.is_quantifier_free() {
        return QeFormula::Eliminated(fm);
    }
    let pre = match prenex(&fm) {
        Ok(p) => p,
        Err(PrenexError::NeedsRenaming(v)) => {
            return QeFormula::Unknown(format!("prenex form needs renaming of {v}"))
        }
    };
    match cad_qe(&pre, &free, &cfg.limits()) {
        Ok(out) => QeFormula::Eliminated(out),
        Err(e) => QeFormula::Unknown(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Rel;
    use crate::parse::parse_polynomial;
    use crate::poly::Ring;

    fn cfg() -> QeConfig {
        QeConfig { backend: QeBackend::Cad, ..QeConfig::default() }
    }

    fn atom(s: &str, rel: Rel) -> Formula {
        let ring = Ring::new(vec!["a", "x", "y"]).unwrap();
        Formula::atom(parse_polynomial(s, &ring).unwrap(), rel)
    }

    #[test]
    fn decides_closed_sentences() {
        let t = Formula::forall(
            vec!["x".into(), "y".into()],
            atom("x^2 + y^2", Rel::Ge),
        );
        assert_eq!(decide_closed(&t, &cfg()), QeAnswer::True);
        let f = Formula::forall(
            vec!["x".into(), "y".into()],
            atom("x^2 + y^2 - 1", Rel::Gt),
        );
        assert_eq!(decide_closed(&f, &cfg()), QeAnswer::False);
    }

    #[test]
    fn sampling_refutes_before_decomposing() {
        // Variable count above the decomposition limit, but a grid sample
        // refutes it outright.
        let ring = Ring::new(vec!["v", "w", "x", "y", "z"]).unwrap();
        let p = parse_polynomial("v + w + x + y + z", &ring).unwrap();
        let fm = Formula::forall(
            vec!["v".into(), "w".into(), "x".into(), "y".into(), "z".into()],
            Formula::atom(p, Rel::Gt),
        );
        assert_eq!(decide_closed(&fm, &cfg()), QeAnswer::False);
    }

    #[test]
    fn unsupported_problems_answer_unknown() {
        // Nontrivially true with five variables: past the variable limit and
        // not settled by sampling.
        let ring = Ring::new(vec!["v", "w", "x", "y", "z"]).unwrap();
        let p = parse_polynomial("v^2 + w^2 + x^2 + y^2 + z^2 + 1", &ring).unwrap();
        let fm = Formula::forall(
            vec!["v".into(), "w".into(), "x".into(), "y".into(), "z".into()],
            Formula::atom(p, Rel::Gt),
        );
        // The universal sentence is true, so sampling finds no refutation and
        // the decomposition refuses the variable count.
        assert!(matches!(decide_closed(&fm, &cfg()), QeAnswer::Unknown(_)));
    }

    #[test]
    fn witness_search_prefers_full_cells() {
        // forall x. x^2 + a > 0 has witnesses exactly at a > 0.
        let fm = Formula::forall(vec!["x".into()], atom("x^2 + a", Rel::Gt));
        match find_witness(&fm, &["a".to_string()], &cfg()) {
            WitnessAnswer::Found(binding) => {
                assert!(binding["a"] > int(0));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        let none = Formula::forall(vec!["x".into()], atom("x^2 + a", Rel::Lt));
        assert_eq!(find_witness(&none, &["a".to_string()], &cfg()), WitnessAnswer::NoneExists);
    }

    #[test]
    fn qe_round_trips_through_eval() {
        // exists x. x^2 + x + a = 0 holds exactly when 1 - 4a >= 0.
        let fm = Formula::exists(vec!["x".into()], atom("x^2 + x + a", Rel::Eq));
        let out = match qe(&fm, &cfg()) {
            QeFormula::Eliminated(f) => f,
            QeFormula::Unknown(r) => panic!("elimination failed: {r}"),
        };
        assert!(out.is_quantifier_free());
        for (v, expect) in [(int(0), true), (rat(1, 4), true), (int(1), false), (int(-2), true)] {
            let mut b = BTreeMap::new();
            b.insert("a".to_string(), v);
            assert_eq!(out.eval(&b).unwrap(), expect);
        }
    }

    #[test]
    fn exists_forall_refutation_beats_the_variable_limit() {
        // No quadratic form x^2 + a*x*y + b*y^2 descends strictly everywhere
        // off the origin for the cubic field: along x = 0 the derivative is
        // a*y^3, whose sign flips with y. Four variables and degree-4 atoms
        // push the decomposition hard; the instantiation pre-pass refutes it
        // outright.
        let ring = Ring::new(vec!["a", "b", "x", "y"]).unwrap();
        let guard = Formula::atom(parse_polynomial("x^2 + y^2", &ring).unwrap(), Rel::Gt);
        let pos = Formula::atom(
            parse_polynomial("x^2 + a*x*y + b*y^2", &ring).unwrap(),
            Rel::Gt,
        );
        let descent = Formula::atom(
            parse_polynomial(
                "-2*x^2 + 2*x*y^2 - a*x*y + a*y^3 - a*x^2*y - 2*b*x*y^2",
                &ring,
            )
            .unwrap(),
            Rel::Lt,
        );
        let fm = Formula::exists(
            vec!["a".into(), "b".into()],
            Formula::forall(
                vec!["x".into(), "y".into()],
                Formula::implies(guard, Formula::and(vec![pos, descent])),
            ),
        );
        assert_eq!(decide_closed(&fm, &cfg()), QeAnswer::False);
    }

    #[test]
    fn falsification_returns_exact_points() {
        let fm = Formula::forall(
            vec!["x".into(), "y".into()],
            atom("x^2 + y^2 - 1", Rel::Gt),
        );
        let point = falsify_universal(&fm, &cfg()).expect("refutable");
        let matrix = atom("x^2 + y^2 - 1", Rel::Gt);
        assert!(!matrix.eval(&point).unwrap());
    }
}
