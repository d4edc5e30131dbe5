//! Cylindrical decomposition over the projection levels: stack construction
//! above rational and singly-extended sample points, recursive lifting with
//! quantifier collapse, free-cell enumeration, and sign-vector quantifier
//! elimination verified against the decomposition itself.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use crate::logic::{Formula, Rel};
use crate::poly::{Polynomial, Ring};
use crate::rational::{simplest_between, to_f64, Rational};

use super::algnum::{rational_between, AlgNum, Coord};
use super::extfield::{isolate_ext_roots, ExtCtx, ExtPoly, ExtRoot, ExtRootLoc};
use super::prenex::{Prenexed, Quant};
use super::projection::{canonical, project, uni_coeffs};
use super::unipoly::{isolate_roots, sign, RootLoc, UniPoly};

/// Resource and applicability limits for the decomposition.
#[derive(Clone, Debug)]
pub struct CadLimits {
    pub max_vars: usize,
    pub max_degree: u32,
    pub budget_cells: usize,
    pub budget_ms: u64,
}

impl Default for CadLimits {
    fn default() -> Self {
        CadLimits { max_vars: 4, max_degree: 8, budget_cells: 50_000, budget_ms: 30_000 }
    }
}

/// Failure to decide: either the problem leaves the supported fragment or a
/// resource budget ran out. Both surface as an unknown verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CadFail {
    Unsupported(String),
    Budget(String),
}

impl std::fmt::Display for CadFail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CadFail::Unsupported(s) => write!(f, "unsupported: {s}"),
            CadFail::Budget(s) => write!(f, "budget exhausted: {s}"),
        }
    }
}

impl std::error::Error for CadFail {}

/// Matrix in indexed form: atoms refer to projection-table entries by id,
/// with a sign flip relating the original atom polynomial to its canonical
/// table representative.
#[derive(Clone, Debug)]
enum IForm {
    T,
    F,
    Atom { pid: usize, flip: i8, rel: Rel },
    Not(Box<IForm>),
    And(Vec<IForm>),
    Or(Vec<IForm>),
}

fn rel_holds(rel: Rel, s: i8) -> bool {
    match rel {
        Rel::Lt => s < 0,
        Rel::Le => s <= 0,
        Rel::Eq => s == 0,
        Rel::Ne => s != 0,
        Rel::Gt => s > 0,
        Rel::Ge => s >= 0,
    }
}

fn eval_iform(f: &IForm, signs: &[i8]) -> bool {
    match f {
        IForm::T => true,
        IForm::F => false,
        IForm::Atom { pid, flip, rel } => rel_holds(*rel, signs[*pid] * flip),
        IForm::Not(inner) => !eval_iform(inner, signs),
        IForm::And(parts) => parts.iter().all(|p| eval_iform(p, signs)),
        IForm::Or(parts) => parts.iter().any(|p| eval_iform(p, signs)),
    }
}

/// One coordinate of a constructed cell.
#[derive(Clone, Debug)]
enum CellCoord {
    /// Rational sample strictly inside an open sector.
    SectorRat(Rational),
    /// Section at an exact rational value.
    SectionRat(Rational),
    /// Section at a real algebraic value over a rational base.
    SectionAlg(AlgNum),
    /// Section that is algebraic over an already-extended base; only its
    /// signs are materialized, so no further lifting can pass through it.
    SectionExt,
}

#[derive(Clone, Debug)]
struct StackCell {
    coord: CellCoord,
    approx: f64,
    is_section: bool,
    level_signs: Vec<(usize, i8)>,
}

/// Extension state: the one algebraic coordinate of the current base point.
#[derive(Clone, Debug)]
struct ExtState {
    var: usize,
    ctx: ExtCtx,
}

/// Partial sample point and sign environment carried through the lift.
#[derive(Clone, Debug)]
struct Env {
    rat: BTreeMap<String, Rational>,
    ext: Option<ExtState>,
    has_sector: bool,
    signs: Vec<i8>,
    trace: Vec<FreeVal>,
    trace_sections: Vec<bool>,
}

/// Exact-or-approximate coordinate of an enumerated free-space cell.
#[derive(Clone, Debug)]
pub enum FreeVal {
    Rat(Rational),
    Approx(f64),
}

impl FreeVal {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            FreeVal::Rat(q) => Some(q),
            FreeVal::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            FreeVal::Rat(q) => to_f64(q),
            FreeVal::Approx(x) => *x,
        }
    }
}

/// A cell of the free-variable space with the truth of the quantified part
/// over it.
#[derive(Clone, Debug)]
pub struct FreeCell {
    pub values: Vec<FreeVal>,
    pub sections: Vec<bool>,
    pub truth: bool,
    sign_key: Vec<i8>,
}

impl FreeCell {
    pub fn full_dim(&self) -> bool {
        self.sections.iter().all(|s| !s)
    }

    pub fn rational_sample(&self) -> Option<Vec<Rational>> {
        self.values.iter().map(|v| v.as_rational().cloned()).collect()
    }
}

struct Run {
    var_names: Vec<String>,
    free_count: usize,
    prefix: Vec<Quant>,
    table: Vec<Polynomial>,
    level_ids: Vec<Vec<usize>>,
    matrix: IForm,
    limits: CadLimits,
    started: Instant,
    cells: usize,
}

impl Run {
    fn nvars(&self) -> usize {
        self.var_names.len()
    }

    fn charge(&mut self, n: usize) -> Result<(), CadFail> {
        self.cells += n;
        if self.cells > self.limits.budget_cells {
            return Err(CadFail::Budget(format!("{} cells", self.cells)));
        }
        if self.started.elapsed().as_millis() as u64 > self.limits.budget_ms {
            return Err(CadFail::Budget(format!("{} ms", self.started.elapsed().as_millis())));
        }
        Ok(())
    }

    /// Builds the stack of cells over the base point in `env` at `level`.
    fn build_stack(&mut self, level: usize, env: &mut Env) -> Result<Vec<StackCell>, CadFail> {
        let ids = self.level_ids[level].clone();
        let polys: Vec<(usize, Polynomial)> =
            ids.iter().map(|&id| (id, self.table[id].clone())).collect();
        let stack = match env.ext {
            None => self.stack_rational(level, env, &polys)?,
            Some(_) => self.stack_extended(level, env, &polys)?,
        };
        self.charge(stack.len())?;
        Ok(stack)
    }

    fn stack_rational(
        &mut self,
        level: usize,
        env: &Env,
        polys: &[(usize, Polynomial)],
    ) -> Result<Vec<StackCell>, CadFail> {
        let var = level;
        let mut fixed: Vec<(usize, i8)> = Vec::new();
        let mut unis: Vec<(usize, UniPoly)> = Vec::new();
        for (id, p) in polys {
            let u = to_unipoly(p, var, &env.rat);
            if u.is_zero() {
                if env.has_sector {
                    return Err(CadFail::Unsupported(format!(
                        "{p} vanishes identically over a positive-dimensional cell"
                    )));
                }
                fixed.push((*id, 0));
            } else if u.is_constant() {
                fixed.push((*id, sign(&u.coeff(0))));
            } else {
                unis.push((*id, u));
            }
        }

        // Merge the roots of all contributors into one ordered list.
        struct Entry {
            coord: Coord,
            owners: Vec<usize>,
        }
        let mut entries: Vec<Entry> = Vec::new();
        for (k, (_, u)) in unis.iter().enumerate() {
            let sf = u.squarefree_part();
            for loc in isolate_roots(u) {
                let mut coord = match loc {
                    RootLoc::Rat(q) => Coord::Rat(q),
                    RootLoc::Interval(lo, hi) => Coord::Alg(AlgNum::new(sf.clone(), lo, hi)),
                };
                let mut pos = entries.len();
                let mut merged = false;
                for (i, e) in entries.iter_mut().enumerate() {
                    match coord.compare(&mut e.coord) {
                        std::cmp::Ordering::Less => {
                            pos = i;
                            break;
                        }
                        std::cmp::Ordering::Equal => {
                            e.owners.push(k);
                            merged = true;
                            break;
                        }
                        std::cmp::Ordering::Greater => {}
                    }
                }
                if !merged {
                    entries.insert(pos, Entry { coord, owners: vec![k] });
                }
            }
        }

        // Sector samples: below, between, above.
        let mut sector_samples: Vec<Rational> = Vec::new();
        if entries.is_empty() {
            sector_samples.push(Rational::from_integer(0.into()));
        } else {
            sector_samples.push(match &entries[0].coord {
                Coord::Rat(q) => q.clone() - Rational::from_integer(1.into()),
                Coord::Alg(a) => a.lo().clone(),
            });
            for i in 0..entries.len() - 1 {
                let (left, right) = entries.split_at_mut(i + 1);
                sector_samples.push(rational_between(&mut left[i].coord, &mut right[0].coord));
            }
            sector_samples.push(match &entries[entries.len() - 1].coord {
                Coord::Rat(q) => q.clone() + Rational::from_integer(1.into()),
                Coord::Alg(a) => a.hi().clone(),
            });
        }

        let mut cells: Vec<StackCell> = Vec::new();
        let n = entries.len();
        for i in 0..=n {
            // Sector below entry i.
            let sample = &sector_samples[i];
            let mut level_signs = fixed.clone();
            for (id, u) in &unis {
                let s = sign(&u.eval(sample));
                debug_assert!(s != 0, "sector sample must avoid all roots");
                level_signs.push((*id, s));
            }
            cells.push(StackCell {
                coord: CellCoord::SectorRat(sample.clone()),
                approx: to_f64(sample),
                is_section: false,
                level_signs,
            });
            if i == n {
                break;
            }
            // Section at entry i.
            let entry = &mut entries[i];
            let mut level_signs = fixed.clone();
            for (k, (id, u)) in unis.iter().enumerate() {
                let s = if entry.owners.contains(&k) {
                    0
                } else {
                    match &mut entry.coord {
                        Coord::Rat(q) => sign(&u.eval(q)),
                        Coord::Alg(a) => a.sign_of(u),
                    }
                };
                level_signs.push((*id, s));
            }
            let (coord, approx) = match &entry.coord {
                Coord::Rat(q) => (CellCoord::SectionRat(q.clone()), to_f64(q)),
                Coord::Alg(a) => (CellCoord::SectionAlg(a.clone()), a.to_f64()),
            };
            cells.push(StackCell { coord, approx, is_section: true, level_signs });
        }
        Ok(cells)
    }

    fn stack_extended(
        &mut self,
        level: usize,
        env: &mut Env,
        polys: &[(usize, Polynomial)],
    ) -> Result<Vec<StackCell>, CadFail> {
        let var = level;
        let ExtState { var: avar, ctx } = env.ext.as_mut().expect("extended base");
        let mut fixed: Vec<(usize, i8)> = Vec::new();
        let mut exts: Vec<(usize, ExtPoly)> = Vec::new();
        for (id, p) in polys {
            let e = to_extpoly(p, var, *avar, &env.rat, ctx);
            if e.is_zero() {
                if env.has_sector {
                    return Err(CadFail::Unsupported(format!(
                        "{p} vanishes identically over a positive-dimensional cell"
                    )));
                }
                fixed.push((*id, 0));
            } else if e.is_constant() {
                fixed.push((*id, ctx.sign(&e.coeff(0))));
            } else {
                exts.push((*id, e));
            }
        }

        enum ECoord {
            Rat(Rational),
            Root(ExtRoot),
        }
        impl ECoord {
            fn lo(&self) -> Rational {
                match self {
                    ECoord::Rat(q) => q.clone(),
                    ECoord::Root(r) => r.lo().clone(),
                }
            }
            fn hi(&self) -> Rational {
                match self {
                    ECoord::Rat(q) => q.clone(),
                    ECoord::Root(r) => r.hi().clone(),
                }
            }
            fn refine(&mut self, ctx: &mut ExtCtx) {
                if let ECoord::Root(r) = self {
                    if let Some(q) = r.refine_step(ctx) {
                        *self = ECoord::Rat(q);
                    }
                }
            }
            fn approx(&self) -> f64 {
                match self {
                    ECoord::Rat(q) => to_f64(q),
                    ECoord::Root(r) => r.to_f64(),
                }
            }
        }

        fn compare_ecoords(
            ctx: &mut ExtCtx,
            a: &mut ECoord,
            b: &mut ECoord,
            a_def: Option<&ExtPoly>,
            b_def: Option<&ExtPoly>,
        ) -> std::cmp::Ordering {
            use std::cmp::Ordering;
            loop {
                match (&mut *a, &mut *b) {
                    (ECoord::Rat(x), ECoord::Rat(y)) => return (*x).cmp(y),
                    (ECoord::Rat(q), ECoord::Root(r)) => {
                        if *q <= *r.lo() {
                            return Ordering::Less;
                        }
                        if *q >= *r.hi() {
                            return Ordering::Greater;
                        }
                        if let Some(def) = b_def {
                            if def.sign_at(ctx, q) == 0 {
                                return Ordering::Equal;
                            }
                        }
                        b.refine(ctx);
                    }
                    (ECoord::Root(r), ECoord::Rat(q)) => {
                        if *q <= *r.lo() {
                            return Ordering::Greater;
                        }
                        if *q >= *r.hi() {
                            return Ordering::Less;
                        }
                        if let Some(def) = a_def {
                            if def.sign_at(ctx, q) == 0 {
                                return Ordering::Equal;
                            }
                        }
                        a.refine(ctx);
                    }
                    (ECoord::Root(ra), ECoord::Root(rb)) => {
                        if *ra.hi() <= *rb.lo() {
                            return Ordering::Less;
                        }
                        if *rb.hi() <= *ra.lo() {
                            return Ordering::Greater;
                        }
                        // Overlapping intervals: equal iff the definers share
                        // a root in the overlap.
                        if let (Some(da), Some(db)) = (a_def, b_def) {
                            let g = da.gcd(ctx, db);
                            if !g.is_constant() {
                                let lo = ra.lo().clone().max(rb.lo().clone());
                                let hi = ra.hi().clone().min(rb.hi().clone());
                                if lo < hi {
                                    let gsf = g.squarefree_part(ctx);
                                    let chain = super::extfield::SturmExt::new(ctx, &gsf);
                                    if chain.count_roots(ctx, &lo, &hi) > 0 {
                                        return Ordering::Equal;
                                    }
                                }
                            }
                        }
                        a.refine(ctx);
                        b.refine(ctx);
                    }
                }
            }
        }

        struct EEntry {
            coord: ECoord,
            defining: Option<ExtPoly>,
            owners: Vec<usize>,
        }
        let mut entries: Vec<EEntry> = Vec::new();
        for (k, (_, e)) in exts.iter().enumerate() {
            let sf = e.squarefree_part(ctx);
            for loc in isolate_ext_roots(ctx, e) {
                let (mut coord, defining) = match loc {
                    ExtRootLoc::Rat(q) => (ECoord::Rat(q), None),
                    ExtRootLoc::Interval(lo, hi) => {
                        (ECoord::Root(ExtRoot::new(ctx, sf.clone(), lo, hi)), Some(sf.clone()))
                    }
                };
                let mut pos = entries.len();
                let mut merged = false;
                for (i, en) in entries.iter_mut().enumerate() {
                    match compare_ecoords(
                        ctx,
                        &mut coord,
                        &mut en.coord,
                        defining.as_ref(),
                        en.defining.as_ref(),
                    ) {
                        std::cmp::Ordering::Less => {
                            pos = i;
                            break;
                        }
                        std::cmp::Ordering::Equal => {
                            en.owners.push(k);
                            merged = true;
                            break;
                        }
                        std::cmp::Ordering::Greater => {}
                    }
                }
                if !merged {
                    entries.insert(pos, EEntry { coord, defining, owners: vec![k] });
                }
            }
        }

        // Sector samples.
        let mut sector_samples: Vec<Rational> = Vec::new();
        if entries.is_empty() {
            sector_samples.push(Rational::from_integer(0.into()));
        } else {
            sector_samples.push(match &entries[0].coord {
                ECoord::Rat(q) => q.clone() - Rational::from_integer(1.into()),
                ECoord::Root(r) => r.lo().clone(),
            });
            for i in 0..entries.len() - 1 {
                let (left, right) = entries.split_at_mut(i + 1);
                let a = &mut left[i].coord;
                let b = &mut right[0].coord;
                loop {
                    let ahi = a.hi();
                    let blo = b.lo();
                    if ahi < blo {
                        sector_samples.push(simplest_between(&ahi, &blo));
                        break;
                    }
                    a.refine(ctx);
                    b.refine(ctx);
                }
            }
            sector_samples.push(match &entries[entries.len() - 1].coord {
                ECoord::Rat(q) => q.clone() + Rational::from_integer(1.into()),
                ECoord::Root(r) => r.hi().clone(),
            });
        }

        let mut cells: Vec<StackCell> = Vec::new();
        let n = entries.len();
        for i in 0..=n {
            let sample = &sector_samples[i];
            let mut level_signs = fixed.clone();
            for (id, e) in &exts {
                let s = e.sign_at(ctx, sample);
                debug_assert!(s != 0, "sector sample must avoid all roots");
                level_signs.push((*id, s));
            }
            cells.push(StackCell {
                coord: CellCoord::SectorRat(sample.clone()),
                approx: to_f64(sample),
                is_section: false,
                level_signs,
            });
            if i == n {
                break;
            }
            let entry = &mut entries[i];
            let mut level_signs = fixed.clone();
            for (k, (id, e)) in exts.iter().enumerate() {
                let s = if entry.owners.contains(&k) {
                    0
                } else {
                    match &mut entry.coord {
                        ECoord::Rat(q) => e.sign_at(ctx, q),
                        ECoord::Root(r) => r.sign_of(ctx, e),
                    }
                };
                level_signs.push((*id, s));
            }
            let (coord, approx) = match &entry.coord {
                ECoord::Rat(q) => (CellCoord::SectionRat(q.clone()), to_f64(q)),
                ECoord::Root(_) => (CellCoord::SectionExt, entry.coord.approx()),
            };
            cells.push(StackCell { coord, approx, is_section: true, level_signs });
        }
        Ok(cells)
    }

    /// Applies a cell's coordinate and signs to a child environment. `last`
    /// marks the deepest level, where no further lifting happens.
    fn apply_cell(
        &self,
        env: &mut Env,
        level: usize,
        cell: &StackCell,
        last: bool,
    ) -> Result<(), CadFail> {
        for (id, s) in &cell.level_signs {
            env.signs[*id] = *s;
        }
        let name = self.var_names[level].clone();
        match &cell.coord {
            CellCoord::SectorRat(q) => {
                env.rat.insert(name, q.clone());
                env.has_sector = true;
            }
            CellCoord::SectionRat(q) => {
                env.rat.insert(name, q.clone());
            }
            CellCoord::SectionAlg(a) => {
                debug_assert!(env.ext.is_none());
                env.ext = Some(ExtState { var: level, ctx: ExtCtx::new(a.clone()) });
            }
            CellCoord::SectionExt => {
                if !last {
                    return Err(CadFail::Unsupported(
                        "a second algebraic coordinate below the final level".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Decides the quantified suffix starting at `level` over the base in
    /// `env`. All levels from here on are quantified.
    fn decide_levels(&mut self, level: usize, env: &mut Env) -> Result<bool, CadFail> {
        let quant = self.prefix[level - self.free_count];
        let last = level + 1 == self.nvars();
        let stack = self.build_stack(level, env)?;
        for cell in stack {
            let mut child = env.clone();
            self.apply_cell(&mut child, level, &cell, last)?;
            let truth = if last {
                eval_iform(&self.matrix, &child.signs)
            } else {
                self.decide_levels(level + 1, &mut child)?
            };
            match quant {
                Quant::Forall if !truth => return Ok(false),
                Quant::Exists if truth => return Ok(true),
                _ => {}
            }
        }
        Ok(matches!(quant, Quant::Forall))
    }

    /// Enumerates the free-variable cells, deciding the quantified suffix
    /// over each.
    fn enumerate_free(&mut self, level: usize, env: &mut Env, out: &mut Vec<FreeCell>) -> Result<(), CadFail> {
        if level == self.free_count {
            let truth = if self.free_count == self.nvars() {
                eval_iform(&self.matrix, &env.signs)
            } else {
                self.decide_levels(self.free_count, env)?
            };
            let sign_key = self
                .level_ids
                .iter()
                .take(self.free_count)
                .flatten()
                .map(|&id| env.signs[id])
                .collect();
            out.push(FreeCell {
                values: env.trace.clone(),
                sections: env.trace_sections.clone(),
                truth,
                sign_key,
            });
            return Ok(());
        }
        let last = level + 1 == self.nvars();
        let stack = self.build_stack(level, env)?;
        for cell in stack {
            let mut child = env.clone();
            self.apply_cell(&mut child, level, &cell, last)?;
            let val = match &cell.coord {
                CellCoord::SectorRat(q) | CellCoord::SectionRat(q) => FreeVal::Rat(q.clone()),
                CellCoord::SectionAlg(_) | CellCoord::SectionExt => FreeVal::Approx(cell.approx),
            };
            child.trace.push(val);
            child.trace_sections.push(cell.is_section);
            self.enumerate_free(level + 1, &mut child, out)?;
        }
        Ok(())
    }
}

/// Exact evaluation binding only the variables a polynomial mentions; the
/// base point never assigns levels at or above the one being lifted.
fn eval_mentioned(p: &Polynomial, rat: &BTreeMap<String, Rational>) -> Rational {
    let vars = p.ring().vars().to_vec();
    let mut acc = Rational::from_integer(0.into());
    for (m, c) in p.terms() {
        let mut term = c.clone();
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let v = rat.get(&vars[i]).expect("base point binds lower levels");
            for _ in 0..e {
                term *= v;
            }
        }
        acc += term;
    }
    acc
}

/// Substitutes the rational part of a base point, producing a univariate
/// polynomial in `var`. All other mentioned variables must be bound.
fn to_unipoly(p: &Polynomial, var: usize, rat: &BTreeMap<String, Rational>) -> UniPoly {
    let coeffs = uni_coeffs(p, var);
    UniPoly::new(coeffs.iter().map(|c| eval_mentioned(c, rat)).collect())
}

/// As `to_unipoly`, but over a base with one algebraic coordinate `avar`:
/// coefficients become residues in Q(alpha).
fn to_extpoly(
    p: &Polynomial,
    var: usize,
    avar: usize,
    rat: &BTreeMap<String, Rational>,
    ctx: &mut ExtCtx,
) -> ExtPoly {
    let outer = uni_coeffs(p, var);
    let residues = outer
        .iter()
        .map(|c| {
            let inner = uni_coeffs(c, avar);
            UniPoly::new(inner.iter().map(|d| eval_mentioned(d, rat)).collect())
        })
        .collect();
    ExtPoly::new(ctx, residues)
}

/// Builds the common ring, projection table, and indexed matrix for a
/// prenexed formula with the given free variables (lifted first, in order).
fn setup(pre: &Prenexed, free: &[String], limits: &CadLimits) -> Result<Run, CadFail> {
    let mut var_names: Vec<String> = Vec::new();
    for v in free {
        if var_names.contains(v) {
            return Err(CadFail::Unsupported(format!("repeated free variable {v}")));
        }
        var_names.push(v.clone());
    }
    for (_, v) in &pre.prefix {
        if var_names.contains(v) {
            return Err(CadFail::Unsupported(format!(
                "variable {v} is both free and quantified"
            )));
        }
        var_names.push(v.clone());
    }
    let matrix_free = pre.matrix.free_vars();
    for v in &matrix_free {
        if !var_names.contains(v) {
            return Err(CadFail::Unsupported(format!("undeclared variable {v}")));
        }
    }
    if var_names.len() > limits.max_vars {
        return Err(CadFail::Unsupported(format!(
            "{} variables exceed the supported {}",
            var_names.len(),
            limits.max_vars
        )));
    }
    if pre.matrix.max_atom_degree() > limits.max_degree {
        return Err(CadFail::Unsupported(format!(
            "atom degree {} exceeds the supported {}",
            pre.matrix.max_atom_degree(),
            limits.max_degree
        )));
    }

    let ring = Ring::new(var_names.clone())
        .map_err(|e| CadFail::Unsupported(format!("ring construction: {e}")))?;

    // Extend every atom polynomial into the common ring, canonicalize, and
    // collect the distinct nonconstant ones for projection.
    let mut inputs: Vec<Polynomial> = Vec::new();
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    collect_atom_polys(&pre.matrix, &ring, &mut inputs, &mut seen)?;

    let order: Vec<usize> = (0..ring.arity()).collect();
    let proj = project(&inputs, &order)
        .map_err(|e| CadFail::Unsupported(format!("projection: {e}")))?;

    let mut table: Vec<Polynomial> = Vec::new();
    let mut key_to_id: BTreeMap<String, usize> = BTreeMap::new();
    let mut level_ids: Vec<Vec<usize>> = vec![Vec::new(); ring.arity()];
    for (lvl, polys) in proj.levels.iter().enumerate() {
        for p in polys {
            let id = table.len();
            key_to_id.insert(format!("{p}"), id);
            table.push(p.clone());
            level_ids[lvl].push(id);
        }
    }

    let matrix = build_iform(&pre.matrix, &ring, &key_to_id)?;

    Ok(Run {
        var_names,
        free_count: free.len(),
        prefix: pre.prefix.iter().map(|(q, _)| *q).collect(),
        table,
        level_ids,
        matrix,
        limits: limits.clone(),
        started: Instant::now(),
        cells: 0,
    })
}

fn collect_atom_polys(
    fm: &Formula,
    ring: &Arc<Ring>,
    out: &mut Vec<Polynomial>,
    seen: &mut BTreeMap<String, ()>,
) -> Result<(), CadFail> {
    match fm {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(a) => {
            let p = a
                .poly
                .extend_ring(ring)
                .map_err(|e| CadFail::Unsupported(format!("atom outside ring: {e}")))?;
            if p.is_constant() {
                return Ok(());
            }
            let c = canonical(&p);
            let key = format!("{c}");
            if seen.insert(key, ()).is_none() {
                out.push(c);
            }
            Ok(())
        }
        Formula::Not(inner) => collect_atom_polys(inner, ring, out, seen),
        Formula::And(parts) | Formula::Or(parts) => {
            for p in parts {
                collect_atom_polys(p, ring, out, seen)?;
            }
            Ok(())
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            Err(CadFail::Unsupported("quantifier inside the matrix".to_string()))
        }
    }
}

fn build_iform(
    fm: &Formula,
    ring: &Arc<Ring>,
    key_to_id: &BTreeMap<String, usize>,
) -> Result<IForm, CadFail> {
    Ok(match fm {
        Formula::True => IForm::T,
        Formula::False => IForm::F,
        Formula::Atom(a) => {
            let p = a
                .poly
                .extend_ring(ring)
                .map_err(|e| CadFail::Unsupported(format!("atom outside ring: {e}")))?;
            if p.is_constant() {
                return Ok(if rel_holds(a.rel, sign_of_rational(&p.constant_term())) {
                    IForm::T
                } else {
                    IForm::F
                });
            }
            let c = canonical(&p);
            let order = ring.default_order();
            let flip = {
                let pl = p.lead(&order).expect("nonzero").1.clone();
                let cl = c.lead(&order).expect("nonzero").1.clone();
                if (pl / cl) < Rational::from_integer(0.into()) {
                    -1
                } else {
                    1
                }
            };
            let pid = *key_to_id
                .get(&format!("{c}"))
                .ok_or_else(|| CadFail::Unsupported(format!("atom {c} missing from table")))?;
            IForm::Atom { pid, flip, rel: a.rel }
        }
        Formula::Not(inner) => IForm::Not(Box::new(build_iform(inner, ring, key_to_id)?)),
        Formula::And(parts) => IForm::And(
            parts.iter().map(|p| build_iform(p, ring, key_to_id)).collect::<Result<_, _>>()?,
        ),
        Formula::Or(parts) => IForm::Or(
            parts.iter().map(|p| build_iform(p, ring, key_to_id)).collect::<Result<_, _>>()?,
        ),
        Formula::Forall(..) | Formula::Exists(..) => {
            return Err(CadFail::Unsupported("quantifier inside the matrix".to_string()))
        }
    })
}

fn sign_of_rational(q: &Rational) -> i8 {
    sign(q)
}

fn fresh_env(run: &Run) -> Env {
    Env {
        rat: BTreeMap::new(),
        ext: None,
        has_sector: false,
        signs: vec![0; run.table.len()],
        trace: Vec::new(),
        trace_sections: Vec::new(),
    }
}

/// Decides a closed prenexed formula.
pub fn cad_decide(pre: &Prenexed, limits: &CadLimits) -> Result<bool, CadFail> {
    if pre.prefix.is_empty() {
        // Ground matrix: no variables may remain.
        if !pre.matrix.free_vars().is_empty() {
            return Err(CadFail::Unsupported("free variables in a closed decision".to_string()));
        }
        return match pre.matrix.simplify() {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            other => Err(CadFail::Unsupported(format!("undecided ground formula {other}"))),
        };
    }
    let mut run = setup(pre, &[], limits)?;
    let mut env = fresh_env(&run);
    run.decide_levels(0, &mut env)
}

/// Enumerates the free-space cells of a prenexed formula, each with the
/// truth of the quantified suffix over it.
pub fn cad_enumerate(
    pre: &Prenexed,
    free: &[String],
    limits: &CadLimits,
) -> Result<Vec<FreeCell>, CadFail> {
    if free.is_empty() {
        return Err(CadFail::Unsupported("enumeration needs free variables".to_string()));
    }
    let mut run = setup(pre, free, limits)?;
    let mut env = fresh_env(&run);
    let mut out = Vec::new();
    run.enumerate_free(0, &mut env, &mut out)?;
    Ok(out)
}

/// Quantifier elimination: a quantifier-free description of the true region
/// of the free space, as a disjunction of sign conditions on the projection
/// polynomials of the free levels. The description is verified against the
/// decomposition: if any true and false cell agree on every available sign,
/// the elimination is refused rather than returned wrong.
pub fn cad_qe(pre: &Prenexed, free: &[String], limits: &CadLimits) -> Result<Formula, CadFail> {
    let mut run = setup(pre, free, limits)?;
    let mut env = fresh_env(&run);
    let mut cells = Vec::new();
    run.enumerate_free(0, &mut env, &mut cells)?;

    let free_ids: Vec<usize> = run
        .level_ids
        .iter()
        .take(run.free_count)
        .flatten()
        .copied()
        .collect();
    let mut true_keys: Vec<Vec<i8>> = Vec::new();
    let mut false_keys: Vec<Vec<i8>> = Vec::new();
    for cell in &cells {
        let bucket = if cell.truth { &mut true_keys } else { &mut false_keys };
        if !bucket.contains(&cell.sign_key) {
            bucket.push(cell.sign_key.clone());
        }
    }
    for t in &true_keys {
        if false_keys.contains(t) {
            return Err(CadFail::Unsupported(
                "sign conditions cannot separate the true region".to_string(),
            ));
        }
    }
    if true_keys.is_empty() {
        return Ok(Formula::False);
    }
    if false_keys.is_empty() {
        return Ok(Formula::True);
    }

    let free_ring = Ring::new(free.to_vec())
        .map_err(|e| CadFail::Unsupported(format!("free ring: {e}")))?;
    let mut disjuncts = Vec::new();
    for key in &true_keys {
        let mut conj = Vec::new();
        for (slot, &id) in free_ids.iter().enumerate() {
            let p = run.table[id]
                .extend_ring(&free_ring)
                .map_err(|e| CadFail::Unsupported(format!("restricting to free ring: {e}")))?;
            let rel = match key[slot] {
                -1 => Rel::Lt,
                0 => Rel::Eq,
                _ => Rel::Gt,
            };
            conj.push(Formula::atom(p, rel));
        }
        disjuncts.push(Formula::and(conj));
    }
    Ok(Formula::or(disjuncts).simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Rel;
    use crate::parse::parse_polynomial;
    use crate::realqe::prenex::prenex;

    fn atom2(s: &str, rel: Rel) -> Formula {
        let ring = Ring::new(vec!["a", "x", "y"]).unwrap();
        Formula::atom(parse_polynomial(s, &ring).unwrap(), rel)
    }

    fn decide(fm: Formula) -> Result<bool, CadFail> {
        let pre = prenex(&fm.simplify()).unwrap();
        cad_decide(&pre, &CadLimits::default())
    }

    #[test]
    fn single_variable_decisions() {
        let t = Formula::forall(vec!["x".into()], atom2("x^2 + 1", Rel::Gt));
        assert_eq!(decide(t), Ok(true));
        let f = Formula::forall(vec!["x".into()], atom2("x^2 - 1", Rel::Gt));
        assert_eq!(decide(f), Ok(false));
        let e = Formula::exists(vec!["x".into()], atom2("x^2 - 2", Rel::Eq));
        assert_eq!(decide(e), Ok(true));
        let ne = Formula::exists(vec!["x".into()], atom2("x^2 + 1", Rel::Le));
        assert_eq!(decide(ne), Ok(false));
    }

    #[test]
    fn quantifier_alternation_matters() {
        // forall x exists y: y > x holds; exists y forall x: y > x fails.
        let fa_ex = Formula::forall(
            vec!["x".into()],
            Formula::exists(vec!["y".into()], atom2("y - x", Rel::Gt)),
        );
        assert_eq!(decide(fa_ex), Ok(true));
        let ex_fa = Formula::exists(
            vec!["y".into()],
            Formula::forall(vec!["x".into()], atom2("y - x", Rel::Gt)),
        );
        assert_eq!(decide(ex_fa), Ok(false));
    }

    #[test]
    fn circle_meets_line_through_extension() {
        // The intersection sits at x = y = 1/sqrt(2): the x coordinate is
        // algebraic and the y coordinate lives above the extension.
        let both = Formula::exists(
            vec!["x".into(), "y".into()],
            Formula::and(vec![
                atom2("x^2 + y^2 - 1", Rel::Eq),
                atom2("x - y", Rel::Eq),
            ]),
        );
        assert_eq!(decide(both), Ok(true));
        // Shifting the line far away empties the intersection.
        let none = Formula::exists(
            vec!["x".into(), "y".into()],
            Formula::and(vec![
                atom2("x^2 + y^2 - 1", Rel::Eq),
                atom2("x - y - 5", Rel::Eq),
            ]),
        );
        assert_eq!(decide(none), Ok(false));
    }

    #[test]
    fn enumeration_splits_parameter_space() {
        // forall x. x^2 + a > 0 holds exactly for a > 0.
        let fm = Formula::forall(vec!["x".into()], atom2("x^2 + a", Rel::Gt));
        let pre = prenex(&fm.simplify()).unwrap();
        let cells = cad_enumerate(&pre, &["a".to_string()], &CadLimits::default()).unwrap();
        assert_eq!(cells.len(), 3);
        assert!(!cells[0].truth && cells[0].full_dim());
        assert!(!cells[1].truth && !cells[1].full_dim());
        assert!(cells[2].truth && cells[2].full_dim());
        let sample = cells[2].rational_sample().unwrap();
        assert!(sample[0] > Rational::from_integer(0.into()));
    }

    #[test]
    fn qe_produces_a_verified_description() {
        // exists x. a*x - 1 = 0 holds exactly for a != 0.
        let fm = Formula::exists(vec!["x".into()], atom2("a*x - 1", Rel::Eq));
        let pre = prenex(&fm.simplify()).unwrap();
        let out = cad_qe(&pre, &["a".to_string()], &CadLimits::default()).unwrap();
        let ring = Ring::new(vec!["a"]).unwrap();
        let probe = |v: i64| {
            let mut b = BTreeMap::new();
            b.insert("a".to_string(), Rational::from_integer(v.into()));
            out.eval(&b).unwrap()
        };
        assert!(probe(-3));
        assert!(!probe(0));
        assert!(probe(2));
        let _ = ring;
    }

    #[test]
    fn nullification_over_a_line_is_refused() {
        // (a - y) * x vanishes identically in x all along the line a = y,
        // whose cells include one of positive dimension. The disjunct keeps
        // every earlier cell true so the lift cannot short-circuit past the
        // degenerate one.
        let ring = Ring::new(vec!["a", "y", "x"]).unwrap();
        let p = parse_polynomial("(a - y)*x", &ring).unwrap();
        let q = parse_polynomial("a - y", &ring).unwrap();
        let fm = Formula::forall(
            vec!["a".into(), "y".into(), "x".into()],
            Formula::or(vec![Formula::atom(p, Rel::Ge), Formula::atom(q, Rel::Ne)]),
        );
        let pre = prenex(&fm.simplify()).unwrap();
        let got = cad_decide(&pre, &CadLimits::default());
        assert!(matches!(got, Err(CadFail::Unsupported(_))));
    }

    #[test]
    fn budgets_are_enforced() {
        let fm = Formula::forall(
            vec!["x".into(), "y".into()],
            Formula::or(vec![
                atom2("x^2 + y^2 - 1", Rel::Gt),
                atom2("x^2 + y^2 - 1", Rel::Le),
            ]),
        );
        let pre = prenex(&fm.simplify()).unwrap();
        let tiny = CadLimits { budget_cells: 2, ..CadLimits::default() };
        assert!(matches!(cad_decide(&pre, &tiny), Err(CadFail::Budget(_))));
    }

    #[test]
    fn ground_formulas_decide_directly() {
        let ring = Ring::new(vec!["x"]).unwrap();
        let five = parse_polynomial("5", &ring).unwrap();
        let fm = Formula::atom(five, Rel::Gt);
        let pre = prenex(&fm.simplify()).unwrap();
        assert_eq!(cad_decide(&pre, &CadLimits::default()), Ok(true));
    }
}
