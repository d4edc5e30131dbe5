//! The relaxed-Lyapunov search: an order-by-order refinement loop over
//! candidate descriptions, with certificates that are re-checked from
//! scratch before being returned.
//!
//! The search keeps a description of the surviving candidates (parameter
//! values plus a ball radius) and tightens it one differentiation order at a
//! time. At order i it first looks for a candidate whose i-th Lie derivative
//! is strictly negative wherever the earlier ones vanish; success yields a
//! certificate. Otherwise the relaxed non-strict condition is conjoined, and
//! emptiness of the refined description ends the search with a proof that
//! the template admits no such function. The stabilization bound of the Lie
//! ideal chain caps the number of orders that can change the answer.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{in_transverse_set, Template, VectorField};
use crate::ideals::{chain_bound, IdealLimits};
use crate::logic::{
    build_phi1, build_phi2, build_theta, build_theta_bar, BallConstraint, Formula, Rel,
};
use crate::poly::{Monomial, Polynomial, Ring};
use crate::rational::{int, parse_rational, rat, render_rational, Rational};
use crate::realqe::{
    decide_closed, decide_closed_traced, find_witness, QeAnswer, QeConfig, WitnessAnswer,
};

/// Reserved name for the ball-radius variable in every search formula.
pub const RADIUS_VAR: &str = "r";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RlfgError {
    NonEquilibrium,
    StateMismatch,
    RadiusCollision(String),
    NoRadii,
    NonPositiveRadius(String),
    MissingGridValues(String),
    Setup(String),
}

impl fmt::Display for RlfgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RlfgError::NonEquilibrium => {
                write!(f, "the vector field does not vanish at the origin")
            }
            RlfgError::StateMismatch => {
                write!(f, "template and vector field disagree on the state variables")
            }
            RlfgError::RadiusCollision(v) => {
                write!(f, "`{v}` clashes with the reserved radius variable `{RADIUS_VAR}`")
            }
            RlfgError::NoRadii => write!(f, "at least one candidate radius is required"),
            RlfgError::NonPositiveRadius(s) => {
                write!(f, "candidate radius {s} is not positive")
            }
            RlfgError::MissingGridValues(p) => {
                write!(f, "grid mode needs at least one value for parameter `{p}`")
            }
            RlfgError::Setup(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for RlfgError {}

/// How candidate parameter values are explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Parameters stay symbolic; the description is refined by quantifier
    /// elimination and witnesses are extracted from it.
    Parametric,
    /// Parameters range over finite, user-supplied value lists; every
    /// candidate is decided individually.
    Grid,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub mode: Mode,
    pub qe: QeConfig,
    /// Parameter values enumerated in grid mode; in parametric mode the same
    /// lists override the default pool of the cheap witness scan.
    pub grid: BTreeMap<String, Vec<Rational>>,
    /// Ball radii to try, in preference order. All must be positive.
    pub radii: Vec<Rational>,
    /// Hard cap on the differentiation order. A cap below the stabilization
    /// bound makes an exhausted search inconclusive rather than negative.
    pub max_order: Option<u32>,
    pub ideal_limits: IdealLimits,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: Mode::Parametric,
            qe: QeConfig::default(),
            grid: BTreeMap::new(),
            radii: vec![int(1), rat(1, 2), rat(1, 4)],
            max_order: None,
            ideal_limits: IdealLimits::default(),
        }
    }
}

/// How a search concluded that the template admits no relaxed Lyapunov
/// function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmptyExit {
    /// The vanishing and positivity constraints alone have no solution.
    InitialEmpty,
    /// Conjoining the relaxed descent condition at this order emptied the
    /// candidate description.
    StepEmpty(u32),
    /// The description survived every order up to the stabilization bound
    /// with all strict conditions refuted; later orders repeat earlier ones
    /// and cannot produce a witness.
    FixedPoint(u32),
}

impl fmt::Display for EmptyExit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmptyExit::InitialEmpty => {
                write!(f, "the positivity constraints alone are unsatisfiable")
            }
            EmptyExit::StepEmpty(i) => {
                write!(f, "the relaxed descent condition at order {i} emptied the candidate set")
            }
            EmptyExit::FixedPoint(n) => {
                write!(f, "the candidate set stabilized at order {n} with every strict condition refuted")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// A certified relaxed Lyapunov function.
    Found(Box<RlfCertificate>),
    /// A proof that the template admits none within the searched orders.
    NoneForTemplate(EmptyExit),
    /// The search exhausted its budget or its order cap without a decision.
    Unknown(String),
}

/// One checked claim inside a certificate. Verification recomputes every
/// verdict from scratch; the stored rows are a trace, not an input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub claim: String,
    pub verdict: String,
    pub engine: String,
}

/// A self-contained, re-checkable description of a found function: the
/// system, the chosen parameter values, and the decided claims.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlfCertificate {
    pub state_vars: Vec<String>,
    pub field: Vec<String>,
    pub template: String,
    pub params: Vec<String>,
    pub values: BTreeMap<String, String>,
    pub radius: String,
    pub order: u32,
    pub chain_bound: u32,
    pub lyapunov: String,
    pub evidence: Vec<Evidence>,
}

impl RlfCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<RlfCertificate, VerifyError> {
        serde_json::from_str(s).map_err(|e| VerifyError::Malformed(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    /// The certificate does not parse back into a well-formed system.
    Malformed(String),
    /// A derived field disagrees with its recomputation.
    Tampered(String),
    /// A claim required by the certificate is provably false.
    Invalid(String),
    /// A required claim could not be decided within the budget.
    Undecided(String),
    /// A sampled state escaped the transverse set the claims imply.
    SpotCheck(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Malformed(m) => write!(f, "malformed certificate: {m}"),
            VerifyError::Tampered(m) => write!(f, "tampered certificate: {m}"),
            VerifyError::Invalid(m) => write!(f, "invalid certificate: {m}"),
            VerifyError::Undecided(m) => write!(f, "undecided claim: {m}"),
            VerifyError::SpotCheck(m) => write!(f, "failed spot check: {m}"),
        }
    }
}

impl std::error::Error for VerifyError {}

/// A fully instantiated candidate: exact parameter values plus a radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub values: BTreeMap<String, Rational>,
    pub radius: Rational,
}

enum ModeState {
    /// The parametric description, kept as quantifier-free parts over
    /// (parameters, radius) plus the matrices of a single shared block of
    /// universal state quantifiers. Keeping one block lets each refinement
    /// conjoin into the same matrix instead of nesting quantifiers.
    Parametric { qf: Vec<Formula>, body: Vec<Formula> },
    Grid { survivors: Vec<Candidate> },
}

/// The refinement loop, one differentiation order per step.
pub struct Search {
    template: Template,
    field: VectorField,
    cfg: SearchConfig,
    ball: BallConstraint,
    cap: u32,
    conclusive: bool,
    order: u32,
    all_proven: bool,
    probed: bool,
    state: ModeState,
}

pub enum StepResult {
    Continue(Search),
    Done(Outcome),
}

impl Search {
    pub fn start(
        template: Template,
        field: VectorField,
        cfg: SearchConfig,
    ) -> Result<Search, RlfgError> {
        if template.state_vars() != field.state_vars() {
            return Err(RlfgError::StateMismatch);
        }
        if !field.equilibrium_check() {
            return Err(RlfgError::NonEquilibrium);
        }
        for v in template.params().iter().chain(template.state_vars()) {
            if v == RADIUS_VAR {
                return Err(RlfgError::RadiusCollision(v.clone()));
            }
        }
        if cfg.radii.is_empty() {
            return Err(RlfgError::NoRadii);
        }
        for rad in &cfg.radii {
            if *rad <= Rational::zero() {
                return Err(RlfgError::NonPositiveRadius(render_rational(rad)));
            }
        }
        let ball = BallConstraint::new(RADIUS_VAR, template.state_vars().to_vec())
            .map_err(|e| RlfgError::Setup(e.to_string()))?;
        // The loop is only conclusive when it can run to the stabilization
        // bound of the Lie ideal chain; a lower user cap, or a bound the
        // ideal engine cannot produce, leaves exhaustion inconclusive.
        let (cap, conclusive) = match chain_bound(&template, &field, &cfg.ideal_limits) {
            Ok(n) => match cfg.max_order {
                Some(m) if m < n => (m, false),
                _ => (n, true),
            },
            Err(e) => match cfg.max_order {
                Some(m) => (m, false),
                None => {
                    return Err(RlfgError::Setup(format!(
                        "stabilization bound unavailable ({e}); set an explicit order cap"
                    )))
                }
            },
        };
        let state = match cfg.mode {
            Mode::Parametric => {
                let mut qf = Vec::new();
                let phi1 = build_phi1(&template).map_err(|e| RlfgError::Setup(e.to_string()))?;
                if phi1 != Formula::True {
                    qf.push(phi1);
                }
                qf.push(radius_positive()?);
                let phi2 = build_phi2(&template, &ball)
                    .map_err(|e| RlfgError::Setup(e.to_string()))?;
                ModeState::Parametric { qf, body: vec![strip_forall(phi2)] }
            }
            Mode::Grid => ModeState::Grid {
                survivors: grid_candidates(&template, &ball, &cfg)?,
            },
        };
        Ok(Search {
            template,
            field,
            cfg,
            ball,
            cap,
            conclusive,
            order: 1,
            all_proven: true,
            probed: false,
            state,
        })
    }

    /// The differentiation order the next step will examine.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The highest order the loop will examine before exiting.
    pub fn stabilization_cap(&self) -> u32 {
        self.cap
    }

    /// Grid mode only: the candidates still alive.
    pub fn survivors(&self) -> Option<&[Candidate]> {
        match &self.state {
            ModeState::Grid { survivors } => Some(survivors),
            ModeState::Parametric { .. } => None,
        }
    }

    /// Runs one refinement order: a strict witness attempt, then the relaxed
    /// tightening with an emptiness check.
    pub fn step(mut self) -> StepResult {
        if !self.probed {
            self.probed = true;
            if let Some(done) = self.initial_exit() {
                return StepResult::Done(done);
            }
        }
        if self.order > self.cap {
            return StepResult::Done(self.cap_exit());
        }
        match self.state {
            ModeState::Parametric { .. } => self.step_parametric(),
            ModeState::Grid { .. } => self.step_grid(),
        }
    }

    fn initial_exit(&self) -> Option<Outcome> {
        match &self.state {
            ModeState::Parametric { .. } => {
                let sentence = Formula::exists(self.all_vars(), self.res_formula());
                match decide_closed(&sentence, &self.cfg.qe) {
                    QeAnswer::False => {
                        Some(Outcome::NoneForTemplate(EmptyExit::InitialEmpty))
                    }
                    QeAnswer::True => None,
                    QeAnswer::Unknown(_) => {
                        if self.refute(None) {
                            Some(Outcome::NoneForTemplate(EmptyExit::InitialEmpty))
                        } else {
                            None
                        }
                    }
                }
            }
            ModeState::Grid { survivors } => {
                if survivors.is_empty() {
                    Some(Outcome::Unknown(
                        "every grid candidate failed the positivity constraints".to_string(),
                    ))
                } else {
                    None
                }
            }
        }
    }

    fn cap_exit(&self) -> Outcome {
        let parametric = matches!(self.state, ModeState::Parametric { .. });
        if parametric && self.conclusive && self.all_proven {
            Outcome::NoneForTemplate(EmptyExit::FixedPoint(self.cap))
        } else {
            Outcome::Unknown(format!(
                "order cap {} reached without a decision",
                self.cap
            ))
        }
    }

    fn step_parametric(mut self) -> StepResult {
        let i = self.order;
        let theta = match build_theta(&self.template, &self.field, i, &self.ball) {
            Ok(fm) => strip_forall(fm),
            Err(e) => {
                return StepResult::Done(Outcome::Unknown(format!(
                    "the order {i} condition failed to build: {e}"
                )))
            }
        };
        let temp = self.res_with(&theta);
        if let Some(cand) = self.scan_for_witness(&temp) {
            return StepResult::Done(self.conclude(cand, i));
        }
        let vars = self.all_vars();
        let proven_empty = match find_witness(&temp, &vars, &self.cfg.qe) {
            WitnessAnswer::Found(binding) => match split_binding(binding, &self.template) {
                Ok(cand) => return StepResult::Done(self.conclude(cand, i)),
                Err(msg) => return StepResult::Done(Outcome::Unknown(msg)),
            },
            WitnessAnswer::NoneExists => true,
            WitnessAnswer::Unknown(_) => self.refute(Some(&theta)),
        };
        if !proven_empty {
            self.all_proven = false;
        }
        let theta_bar = match build_theta_bar(&self.template, &self.field, i, &self.ball) {
            Ok(fm) => strip_forall(fm),
            Err(e) => {
                return StepResult::Done(Outcome::Unknown(format!(
                    "the order {i} relaxed condition failed to build: {e}"
                )))
            }
        };
        match &mut self.state {
            ModeState::Parametric { body, .. } => body.push(theta_bar),
            ModeState::Grid { .. } => unreachable!("parametric step on grid state"),
        }
        match decide_closed(&Formula::exists(vars, self.res_formula()), &self.cfg.qe) {
            QeAnswer::False => {
                return StepResult::Done(Outcome::NoneForTemplate(EmptyExit::StepEmpty(i)))
            }
            QeAnswer::True => {}
            QeAnswer::Unknown(_) => {
                if self.refute(None) {
                    return StepResult::Done(Outcome::NoneForTemplate(EmptyExit::StepEmpty(i)));
                }
            }
        }
        self.order = i + 1;
        StepResult::Continue(self)
    }

    fn step_grid(mut self) -> StepResult {
        let i = self.order;
        let survivors = match std::mem::replace(
            &mut self.state,
            ModeState::Grid { survivors: Vec::new() },
        ) {
            ModeState::Grid { survivors } => survivors,
            ModeState::Parametric { .. } => unreachable!("grid step on parametric state"),
        };
        for cand in &survivors {
            if self.decide_candidate(cand, i, Rel::Lt) == QeAnswer::True {
                let cand = cand.clone();
                return StepResult::Done(self.conclude(cand, i));
            }
        }
        // An undecided candidate cannot be kept soundly: later exits assert
        // that survivors satisfy every relaxed condition so far.
        let kept: Vec<Candidate> = survivors
            .into_iter()
            .filter(|c| self.decide_candidate(c, i, Rel::Le) == QeAnswer::True)
            .collect();
        if kept.is_empty() {
            return StepResult::Done(Outcome::Unknown(format!(
                "grid exhausted at order {i}: no candidate provably satisfies the relaxed descent condition"
            )));
        }
        self.state = ModeState::Grid { survivors: kept };
        self.order = i + 1;
        StepResult::Continue(self)
    }

    /// The parametric description as one formula: quantifier-free parts plus
    /// a single universal block over the states.
    fn res_formula(&self) -> Formula {
        self.res_with_parts(&[])
    }

    fn res_with(&self, extra: &Formula) -> Formula {
        self.res_with_parts(std::slice::from_ref(extra))
    }

    fn res_with_parts(&self, extra: &[Formula]) -> Formula {
        let (qf, body) = match &self.state {
            ModeState::Parametric { qf, body } => (qf, body),
            ModeState::Grid { .. } => unreachable!("parametric description on grid state"),
        };
        let mut matrix = body.clone();
        matrix.extend(extra.iter().cloned());
        let mut parts = qf.clone();
        parts.push(Formula::forall(
            self.template.state_vars().to_vec(),
            Formula::And(matrix),
        ));
        Formula::And(parts)
    }

    fn all_vars(&self) -> Vec<String> {
        let mut vars = self.template.params().to_vec();
        vars.push(RADIUS_VAR.to_string());
        vars
    }

    /// Tries to refute satisfiability of the description, optionally
    /// conjoined with one extra matrix part, by direction restriction. A
    /// focused attempt on the newest matrix part runs before the full
    /// conjunction: smaller sentences mention fewer parameters, which keeps
    /// them inside the projection's degeneracy limits.
    fn refute(&self, extra: Option<&Formula>) -> bool {
        let (qf, body) = match &self.state {
            ModeState::Parametric { qf, body } => (qf, body),
            ModeState::Grid { .. } => return false,
        };
        let mut full = body.clone();
        if let Some(e) = extra {
            full.push(e.clone());
        }
        let mut slices: Vec<Vec<Formula>> = Vec::new();
        if full.len() > 1 {
            slices.push(vec![full.last().expect("nonempty matrix").clone()]);
        }
        slices.push(full);
        for slice in slices {
            let mut parts = qf.clone();
            parts.push(Formula::forall(
                self.template.state_vars().to_vec(),
                Formula::And(slice),
            ));
            let matrix = Formula::And(parts);
            if refute_by_directions(
                &matrix,
                self.template.params(),
                self.template.state_vars(),
                &self.cfg.qe,
            ) {
                return true;
            }
        }
        false
    }

    /// Tries small rational parameter values and configured radii against
    /// the strict description before any elimination runs. Each probe is a
    /// cheap, fully instantiated decision; a hit is a complete witness.
    fn scan_for_witness(&self, temp: &Formula) -> Option<Candidate> {
        let default_pool = [int(0), rat(1, 2), rat(-1, 2), int(1), int(-1)];
        let mut tuples: Vec<BTreeMap<String, Rational>> = vec![BTreeMap::new()];
        for param in self.template.params() {
            let pool: Vec<Rational> = match self.cfg.grid.get(param) {
                Some(vs) if !vs.is_empty() => vs.clone(),
                _ => default_pool.to_vec(),
            };
            let mut next = Vec::with_capacity(tuples.len().saturating_mul(pool.len()));
            'fill: for t in &tuples {
                for v in &pool {
                    if next.len() == 128 {
                        break 'fill;
                    }
                    let mut t2 = t.clone();
                    t2.insert(param.clone(), v.clone());
                    next.push(t2);
                }
            }
            tuples = next;
        }
        let scan_cfg = QeConfig {
            budget_cells: self.cfg.qe.budget_cells.min(10_000),
            budget_ms: self.cfg.qe.budget_ms.min(2_000),
            ..self.cfg.qe.clone()
        };
        let deadline = Instant::now() + Duration::from_millis(10 * scan_cfg.budget_ms);
        for values in tuples {
            for radius in &self.cfg.radii {
                if Instant::now() > deadline {
                    return None;
                }
                let mut binding = values.clone();
                binding.insert(RADIUS_VAR.to_string(), radius.clone());
                let Ok(inst) = temp.substitute(&binding) else { continue };
                if decide_closed(&inst, &scan_cfg) == QeAnswer::True {
                    return Some(Candidate { values, radius: radius.clone() });
                }
            }
        }
        None
    }

    fn decide_candidate(&self, cand: &Candidate, i: u32, rel: Rel) -> QeAnswer {
        match self.candidate_condition(cand, i, rel) {
            Ok(fm) => decide_closed(&fm, &self.cfg.qe),
            Err(msg) => QeAnswer::Unknown(msg),
        }
    }

    fn candidate_condition(
        &self,
        cand: &Candidate,
        i: u32,
        rel: Rel,
    ) -> Result<Formula, String> {
        let p = self.template.instantiate(&cand.values).map_err(|e| e.to_string())?;
        let inst = Template::new(Vec::new(), self.template.state_vars().to_vec(), p)
            .map_err(|e| e.to_string())?;
        let fm = match rel {
            Rel::Lt => build_theta(&inst, &self.field, i, &self.ball),
            Rel::Le => build_theta_bar(&inst, &self.field, i, &self.ball),
            _ => return Err("step conditions are strict or relaxed descent only".to_string()),
        }
        .map_err(|e| e.to_string())?;
        let binding: BTreeMap<String, Rational> =
            [(RADIUS_VAR.to_string(), cand.radius.clone())].into();
        fm.substitute(&binding).map_err(|e| e.to_string())
    }

    fn conclude(self, cand: Candidate, order: u32) -> Outcome {
        match self.certify(&cand, order) {
            Ok(cert) => Outcome::Found(cert),
            Err(msg) => Outcome::Unknown(format!(
                "the witness at order {order} did not certify: {msg}"
            )),
        }
    }

    /// Builds the certificate for a witness and re-verifies it before
    /// returning. Every claim is decided on the instantiated function; the
    /// search state that produced the witness is not trusted.
    fn certify(&self, cand: &Candidate, order: u32) -> Result<Box<RlfCertificate>, String> {
        let p_inst = self.template.instantiate(&cand.values).map_err(|e| e.to_string())?;
        let inst = Template::new(
            Vec::new(),
            self.template.state_vars().to_vec(),
            p_inst.clone(),
        )
        .map_err(|e| e.to_string())?;
        let stabilization = chain_bound(&inst, &self.field, &self.cfg.ideal_limits)
            .map_err(|e| e.to_string())?;
        let origin: BTreeMap<String, Rational> = self
            .template
            .state_vars()
            .iter()
            .map(|v| (v.clone(), Rational::zero()))
            .collect();
        let at_origin = p_inst.evaluate(&origin).map_err(|e| e.to_string())?;
        if !at_origin.is_zero() {
            return Err("the instantiated function does not vanish at the origin".to_string());
        }
        let mut evidence = vec![Evidence {
            claim: format!("({p_inst}) = 0 at the origin"),
            verdict: "true".to_string(),
            engine: "evaluation".to_string(),
        }];
        let mut claims = vec![build_phi2(&inst, &self.ball).map_err(|e| e.to_string())?];
        for k in 1..order {
            claims.push(build_theta_bar(&inst, &self.field, k, &self.ball).map_err(|e| e.to_string())?);
        }
        claims.push(build_theta(&inst, &self.field, order, &self.ball).map_err(|e| e.to_string())?);
        let binding: BTreeMap<String, Rational> =
            [(RADIUS_VAR.to_string(), cand.radius.clone())].into();
        for fm in claims {
            let closed = fm.substitute(&binding).map_err(|e| e.to_string())?;
            let (ans, engine) = decide_closed_traced(&closed, &self.cfg.qe);
            match ans {
                QeAnswer::True => evidence.push(Evidence {
                    claim: format!("{closed}"),
                    verdict: "true".to_string(),
                    engine: engine.to_string(),
                }),
                QeAnswer::False => return Err(format!("a required claim is false: {closed}")),
                QeAnswer::Unknown(why) => {
                    return Err(format!("a required claim is undecided ({why}): {closed}"))
                }
            }
        }
        let cert = RlfCertificate {
            state_vars: self.template.state_vars().to_vec(),
            field: self.field.components().iter().map(|c| format!("{c}")).collect(),
            template: format!("{}", self.template.body()),
            params: self.template.params().to_vec(),
            values: cand
                .values
                .iter()
                .map(|(k, v)| (k.clone(), render_rational(v)))
                .collect(),
            radius: render_rational(&cand.radius),
            order,
            chain_bound: stabilization,
            lyapunov: format!("{p_inst}"),
            evidence,
        };
        verify_certificate(&cert, &self.cfg.qe).map_err(|e| e.to_string())?;
        Ok(Box::new(cert))
    }
}

/// Runs the search to completion.
pub fn run(
    template: Template,
    field: VectorField,
    cfg: SearchConfig,
) -> Result<Outcome, RlfgError> {
    let mut search = Search::start(template, field, cfg)?;
    loop {
        match search.step() {
            StepResult::Continue(next) => search = next,
            StepResult::Done(outcome) => return Ok(outcome),
        }
    }
}

/// Re-checks a certificate from scratch: parses the system back, recomputes
/// the derived fields, re-decides every claim, and samples the transverse
/// set. Evidence rows are informational; nothing in them is trusted.
pub fn verify_certificate(cert: &RlfCertificate, qe: &QeConfig) -> Result<(), VerifyError> {
    if cert.order == 0 {
        return Err(VerifyError::Malformed("order must be at least 1".to_string()));
    }
    let states: Vec<&str> = cert.state_vars.iter().map(String::as_str).collect();
    let comps: Vec<&str> = cert.field.iter().map(String::as_str).collect();
    let field = VectorField::parse(&states, &comps)
        .map_err(|e| VerifyError::Malformed(e.to_string()))?;
    let params: Vec<&str> = cert.params.iter().map(String::as_str).collect();
    let template = Template::parse(&params, &states, &cert.template)
        .map_err(|e| VerifyError::Malformed(e.to_string()))?;
    let mut values = BTreeMap::new();
    for p in &cert.params {
        let s = cert
            .values
            .get(p)
            .ok_or_else(|| VerifyError::Malformed(format!("no value for parameter `{p}`")))?;
        let v = parse_rational(s)
            .ok_or_else(|| VerifyError::Malformed(format!("unreadable value for `{p}`")))?;
        values.insert(p.clone(), v);
    }
    let radius = parse_rational(&cert.radius)
        .ok_or_else(|| VerifyError::Malformed("unreadable radius".to_string()))?;
    if radius <= Rational::zero() {
        return Err(VerifyError::Invalid("the radius must be positive".to_string()));
    }
    let p_inst = template
        .instantiate(&values)
        .map_err(|e| VerifyError::Malformed(e.to_string()))?;
    if format!("{p_inst}") != cert.lyapunov {
        return Err(VerifyError::Tampered(
            "the stored function does not match the instantiated template".to_string(),
        ));
    }
    let inst = Template::new(Vec::new(), cert.state_vars.clone(), p_inst.clone())
        .map_err(|e| VerifyError::Malformed(e.to_string()))?;
    let recomputed = chain_bound(&inst, &field, &IdealLimits::default())
        .map_err(|e| VerifyError::Undecided(e.to_string()))?;
    if recomputed != cert.chain_bound {
        return Err(VerifyError::Tampered(
            "the stored stabilization bound does not match the recomputed one".to_string(),
        ));
    }
    let origin: BTreeMap<String, Rational> = cert
        .state_vars
        .iter()
        .map(|v| (v.clone(), Rational::zero()))
        .collect();
    match p_inst.evaluate(&origin) {
        Ok(v) if v.is_zero() => {}
        Ok(_) => {
            return Err(VerifyError::Invalid(
                "the function does not vanish at the origin".to_string(),
            ))
        }
        Err(e) => return Err(VerifyError::Malformed(e.to_string())),
    }
    let ball = BallConstraint::new(RADIUS_VAR, cert.state_vars.clone())
        .map_err(|e| VerifyError::Malformed(e.to_string()))?;
    let mut claims =
        vec![build_phi2(&inst, &ball).map_err(|e| VerifyError::Malformed(e.to_string()))?];
    for k in 1..cert.order {
        claims.push(
            build_theta_bar(&inst, &field, k, &ball)
                .map_err(|e| VerifyError::Malformed(e.to_string()))?,
        );
    }
    claims.push(
        build_theta(&inst, &field, cert.order, &ball)
            .map_err(|e| VerifyError::Malformed(e.to_string()))?,
    );
    let binding: BTreeMap<String, Rational> =
        [(RADIUS_VAR.to_string(), radius.clone())].into();
    for fm in claims {
        let closed = fm
            .substitute(&binding)
            .map_err(|e| VerifyError::Malformed(e.to_string()))?;
        match decide_closed(&closed, qe) {
            QeAnswer::True => {}
            QeAnswer::False => {
                return Err(VerifyError::Invalid(format!("a claim is false: {closed}")))
            }
            QeAnswer::Unknown(why) => {
                return Err(VerifyError::Undecided(format!("{why}: {closed}")))
            }
        }
    }
    // The decided claims force every point of the punctured ball to have a
    // finite vanishing rank at most `order` with a negative leading Lie
    // derivative. Sampling re-checks that consequence through the pointwise
    // rank machinery, which shares nothing with the decision procedure.
    let bound = cert.chain_bound.max(cert.order);
    let scale = radius / int(2 * cert.state_vars.len() as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(qe.seed);
    let mut checked = 0u32;
    let mut attempts = 0u32;
    while checked < 20 && attempts < 400 {
        attempts += 1;
        let point: BTreeMap<String, Rational> = cert
            .state_vars
            .iter()
            .map(|v| (v.clone(), scale.clone() * rat(rng.gen_range(-8i64..=8), 8)))
            .collect();
        if point.values().all(|q| q.is_zero()) {
            continue;
        }
        match in_transverse_set(&p_inst, &field, &point, bound) {
            Ok(true) => checked += 1,
            Ok(false) => {
                return Err(VerifyError::SpotCheck(format!(
                    "the sampled state ({}) is outside the transverse set",
                    render_point(&point)
                )))
            }
            Err(e) => return Err(VerifyError::Malformed(e.to_string())),
        }
    }
    Ok(())
}

fn render_point(point: &BTreeMap<String, Rational>) -> String {
    point
        .iter()
        .map(|(v, q)| format!("{v} = {}", render_rational(q)))
        .collect::<Vec<_>>()
        .join(", ")
}

// The step conditions are single universal blocks over the states; keeping
// only their matrices lets the whole description share one block.
fn strip_forall(fm: Formula) -> Formula {
    match fm {
        Formula::Forall(_, body) => *body,
        other => other,
    }
}

fn radius_positive() -> Result<Formula, RlfgError> {
    let ring = Ring::new(vec![RADIUS_VAR.to_string()])
        .map_err(|e| RlfgError::Setup(e.to_string()))?;
    let r = Polynomial::var(&ring, RADIUS_VAR).map_err(|e| RlfgError::Setup(e.to_string()))?;
    Ok(Formula::atom(r, Rel::Gt))
}

fn split_binding(
    mut binding: BTreeMap<String, Rational>,
    template: &Template,
) -> Result<Candidate, String> {
    let radius = binding
        .remove(RADIUS_VAR)
        .ok_or_else(|| "the witness does not bind the radius".to_string())?;
    if radius <= Rational::zero() {
        return Err(format!(
            "the witness radius {} is not positive",
            render_rational(&radius)
        ));
    }
    for p in template.params() {
        if !binding.contains_key(p) {
            return Err(format!("the witness does not bind parameter `{p}`"));
        }
    }
    Ok(Candidate { values: binding, radius })
}

/// Enumerates the grid, keeping only candidates whose instantiation vanishes
/// at the origin and provably satisfies the positivity condition.
fn grid_candidates(
    template: &Template,
    ball: &BallConstraint,
    cfg: &SearchConfig,
) -> Result<Vec<Candidate>, RlfgError> {
    let mut tuples: Vec<BTreeMap<String, Rational>> = vec![BTreeMap::new()];
    for param in template.params() {
        let values = match cfg.grid.get(param) {
            Some(vs) if !vs.is_empty() => vs,
            _ => return Err(RlfgError::MissingGridValues(param.clone())),
        };
        let mut next = Vec::with_capacity(tuples.len().saturating_mul(values.len()));
        for t in &tuples {
            for v in values {
                let mut t2 = t.clone();
                t2.insert(param.clone(), v.clone());
                next.push(t2);
            }
        }
        tuples = next;
    }
    let origin: BTreeMap<String, Rational> = template
        .state_vars()
        .iter()
        .map(|v| (v.clone(), Rational::zero()))
        .collect();
    let mut out = Vec::new();
    for values in tuples {
        let Ok(p_inst) = template.instantiate(&values) else { continue };
        if !p_inst.evaluate(&origin).map(|v| v.is_zero()).unwrap_or(false) {
            continue;
        }
        let Ok(inst) = Template::new(Vec::new(), template.state_vars().to_vec(), p_inst)
        else {
            continue;
        };
        let Ok(phi2) = build_phi2(&inst, ball) else { continue };
        for radius in &cfg.radii {
            let binding: BTreeMap<String, Rational> =
                [(RADIUS_VAR.to_string(), radius.clone())].into();
            let Ok(closed) = phi2.substitute(&binding) else { continue };
            if decide_closed(&closed, &cfg.qe) == QeAnswer::True {
                out.push(Candidate { values: values.clone(), radius: radius.clone() });
            }
        }
    }
    Ok(out)
}

/// Attempts to prove a candidate description empty by restricting the state
/// to finitely many rays x = w * r with |w| < 1, which stay inside the open
/// ball for every positive radius. Each restriction is implied by the
/// universally quantified description, so unsatisfiability of the restricted
/// conjunction over the parameters and the radius refutes the description.
/// The restricted sentence mentions far fewer variables than the original,
/// which keeps it decidable when the full sentence is not.
fn refute_by_directions(
    matrix: &Formula,
    params: &[String],
    states: &[String],
    qe: &QeConfig,
) -> bool {
    let mut outer: Vec<String> = params.to_vec();
    outer.push(RADIUS_VAR.to_string());
    let Ok(ring) = Ring::new(outer.clone()) else { return false };
    let mut restricted = Vec::new();
    for w in ray_directions(states.len()) {
        match restrict_to_ray(matrix, &w, states, &ring) {
            Some(fm) => restricted.push(fm),
            None => return false,
        }
    }
    // Each opposite pair of rays usually mentions a single parameter, so its
    // sentence stays decidable where the full conjunction degenerates; the
    // full set is the strongest restriction. Any one refutation suffices.
    let n = states.len();
    let mut groups: Vec<Vec<usize>> = (0..=n).map(|j| vec![2 * j, 2 * j + 1]).collect();
    groups.push((0..restricted.len()).collect());
    for group in groups {
        let conj: Vec<Formula> = group.iter().map(|&i| restricted[i].clone()).collect();
        let sentence = Formula::exists(outer.clone(), Formula::And(conj));
        if decide_closed(&sentence, qe) == QeAnswer::False {
            return true;
        }
    }
    false
}

/// Unit-free probe directions: both signs along each axis plus the two
/// diagonals, all strictly inside the unit sphere.
fn ray_directions(n: usize) -> Vec<Vec<Rational>> {
    let mut dirs = Vec::with_capacity(2 * n + 2);
    for j in 0..n {
        for sign in [1i64, -1] {
            let mut w = vec![Rational::zero(); n];
            w[j] = rat(sign, 2);
            dirs.push(w);
        }
    }
    dirs.push(vec![rat(1, 4); n]);
    dirs.push(vec![rat(-1, 4); n]);
    dirs
}

/// Substitutes x_j := w_j * r through a formula, dropping the universal
/// state quantifiers the substitution discharges. Returns None on any shape
/// the restriction cannot handle soundly.
fn restrict_to_ray(
    fm: &Formula,
    w: &[Rational],
    states: &[String],
    ring: &std::sync::Arc<Ring>,
) -> Option<Formula> {
    match fm {
        Formula::True => Some(Formula::True),
        Formula::False => Some(Formula::False),
        Formula::Atom(a) => {
            let p = restrict_poly(&a.poly, w, states, ring)?;
            Some(Formula::atom(p, a.rel))
        }
        Formula::Not(inner) => {
            Some(Formula::Not(Box::new(restrict_to_ray(inner, w, states, ring)?)))
        }
        Formula::And(parts) => {
            let parts = parts
                .iter()
                .map(|p| restrict_to_ray(p, w, states, ring))
                .collect::<Option<Vec<_>>>()?;
            Some(Formula::And(parts))
        }
        Formula::Or(parts) => {
            let parts = parts
                .iter()
                .map(|p| restrict_to_ray(p, w, states, ring))
                .collect::<Option<Vec<_>>>()?;
            Some(Formula::Or(parts))
        }
        Formula::Forall(vars, body) => {
            if vars.iter().all(|v| states.contains(v)) {
                restrict_to_ray(body, w, states, ring)
            } else {
                None
            }
        }
        Formula::Exists(..) => None,
    }
}

/// Maps a polynomial over (parameters, states, radius) to one over
/// (parameters, radius) by substituting each state with its ray coordinate
/// w_j * r.
fn restrict_poly(
    p: &Polynomial,
    w: &[Rational],
    states: &[String],
    ring: &std::sync::Arc<Ring>,
) -> Option<Polynomial> {
    let src = p.ring();
    let r_idx = ring.index_of(RADIUS_VAR)?;
    enum Slot {
        State(usize),
        Outer(usize),
    }
    let mut slots = Vec::with_capacity(src.arity());
    for v in src.vars() {
        if let Some(j) = states.iter().position(|s| s == v) {
            slots.push(Slot::State(j));
        } else if let Some(k) = ring.index_of(v) {
            slots.push(Slot::Outer(k));
        } else {
            return None;
        }
    }
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut coeff = c.clone();
        let mut exps = vec![0u32; ring.arity()];
        for (idx, slot) in slots.iter().enumerate() {
            let e = m.exp(idx);
            if e == 0 {
                continue;
            }
            match slot {
                Slot::State(j) => {
                    coeff *= rational_pow(&w[*j], e);
                    exps[r_idx] += e;
                }
                Slot::Outer(k) => exps[*k] += e,
            }
        }
        if !coeff.is_zero() {
            terms.push((Monomial::from_exps(exps), coeff));
        }
    }
    Some(Polynomial::from_terms(ring, terms))
}

fn rational_pow(q: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= q.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qe_budget(ms: u64) -> QeConfig {
        QeConfig { budget_ms: ms, ..QeConfig::default() }
    }

    fn linear_sink() -> (Template, VectorField) {
        let field = VectorField::parse(&["x", "y"], &["-x", "-y"]).unwrap();
        let template = Template::parse(&[], &["x", "y"], "x^2 + y^2").unwrap();
        (template, field)
    }

    fn cubic_field() -> VectorField {
        VectorField::parse(&["x", "y"], &["-x + y^2", "-x*y"]).unwrap()
    }

    #[test]
    fn linear_sink_yields_order_one_certificate() {
        let (template, field) = linear_sink();
        let cfg = SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() };
        let outcome = run(template, field, cfg).unwrap();
        let cert = match outcome {
            Outcome::Found(c) => c,
            other => panic!("expected a certificate, got {other:?}"),
        };
        assert_eq!(cert.order, 1);
        assert_eq!(cert.chain_bound, 1);
        assert!(cert.values.is_empty());
        assert_eq!(cert.lyapunov, format!("{}", Template::parse(&[], &["x", "y"], "x^2 + y^2").unwrap().body()));
        let round = RlfCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(*cert, round);
        verify_certificate(&cert, &QeConfig::default()).unwrap();
    }

    #[test]
    fn saddle_rejects_linear_template_immediately() {
        let field = VectorField::parse(&["x", "y"], &["-x", "y"]).unwrap();
        let template = Template::parse(&["a", "b"], &["x", "y"], "a*x + b*y").unwrap();
        let cfg = SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() };
        let outcome = run(template, field, cfg).unwrap();
        assert_eq!(outcome, Outcome::NoneForTemplate(EmptyExit::InitialEmpty));
    }

    #[test]
    fn saddle_empties_scaled_norm_template_after_one_step() {
        let field = VectorField::parse(&["x", "y"], &["-x", "y"]).unwrap();
        let template = Template::parse(&["a"], &["x", "y"], "a*x^2 + a*y^2").unwrap();
        let cfg = SearchConfig { qe: qe_budget(15_000), ..SearchConfig::default() };
        let outcome = run(template, field, cfg).unwrap();
        assert_eq!(outcome, Outcome::NoneForTemplate(EmptyExit::StepEmpty(1)));
    }

    #[test]
    fn rotation_field_stabilizes_with_no_witness() {
        let field = VectorField::parse(&["x", "y"], &["-y", "x"]).unwrap();
        let template = Template::parse(&[], &["x", "y"], "x^2 + y^2").unwrap();
        let search = Search::start(
            template,
            field,
            SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() },
        )
        .unwrap();
        assert_eq!(search.stabilization_cap(), 1);
        let mut search = search;
        let outcome = loop {
            match search.step() {
                StepResult::Continue(next) => search = next,
                StepResult::Done(outcome) => break outcome,
            }
        };
        assert_eq!(outcome, Outcome::NoneForTemplate(EmptyExit::FixedPoint(1)));
    }

    #[test]
    fn order_cap_below_stabilization_is_inconclusive() {
        let field = cubic_field();
        let template = Template::parse(&[], &["x", "y"], "x^2 + y^2").unwrap();
        let cfg = SearchConfig {
            qe: qe_budget(10_000),
            max_order: Some(1),
            ..SearchConfig::default()
        };
        let outcome = run(template, field, cfg).unwrap();
        match outcome {
            Outcome::Unknown(msg) => assert!(msg.contains("order cap"), "{msg}"),
            other => panic!("expected an inconclusive exit, got {other:?}"),
        }
    }

    #[test]
    fn grid_walk_certifies_cubic_field_at_order_three() {
        let field = cubic_field();
        let template = Template::parse(&["a"], &["x", "y"], "x^2 + a*y^2").unwrap();
        let grid: BTreeMap<String, Vec<Rational>> = [(
            "a".to_string(),
            vec![int(-1), rat(-1, 2), int(0), rat(1, 2), int(1), rat(3, 2), int(2)],
        )]
        .into();
        let cfg = SearchConfig {
            mode: Mode::Grid,
            qe: qe_budget(10_000),
            grid,
            radii: vec![int(1)],
            ..SearchConfig::default()
        };
        let mut search = Search::start(template, field, cfg).unwrap();
        let positive: Vec<Rational> = search
            .survivors()
            .unwrap()
            .iter()
            .map(|c| c.values["a"].clone())
            .collect();
        assert_eq!(positive, vec![rat(1, 2), int(1), rat(3, 2), int(2)]);
        search = match search.step() {
            StepResult::Continue(next) => next,
            StepResult::Done(outcome) => panic!("search ended early: {outcome:?}"),
        };
        let after_first: Vec<Rational> = search
            .survivors()
            .unwrap()
            .iter()
            .map(|c| c.values["a"].clone())
            .collect();
        assert_eq!(after_first, vec![int(1)]);
        let outcome = loop {
            match search.step() {
                StepResult::Continue(next) => search = next,
                StepResult::Done(outcome) => break outcome,
            }
        };
        let cert = match outcome {
            Outcome::Found(c) => c,
            other => panic!("expected a certificate, got {other:?}"),
        };
        assert_eq!(cert.order, 3);
        assert_eq!(cert.chain_bound, 3);
        assert_eq!(cert.values["a"], "1");
        assert_eq!(cert.radius, "1");
    }

    #[test]
    fn parametric_quadratic_template_recovers_the_norm() {
        let field = cubic_field();
        let template =
            Template::parse(&["a", "b"], &["x", "y"], "x^2 + a*x*y + b*y^2").unwrap();
        let cfg = SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() };
        let outcome = run(template, field, cfg).unwrap();
        let cert = match outcome {
            Outcome::Found(c) => c,
            other => panic!("expected a certificate, got {other:?}"),
        };
        assert_eq!(cert.order, 3);
        assert_eq!(cert.values["a"], "0");
        assert_eq!(cert.values["b"], "1");
    }

    #[test]
    fn verification_rejects_edited_certificates() {
        let (template, field) = linear_sink();
        let cfg = SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() };
        let cert = match run(template, field, cfg).unwrap() {
            Outcome::Found(c) => c,
            other => panic!("expected a certificate, got {other:?}"),
        };
        let qe = QeConfig::default();

        let mut edited = (*cert).clone();
        edited.lyapunov = "x^2 + 2*y^2".to_string();
        assert!(matches!(
            verify_certificate(&edited, &qe),
            Err(VerifyError::Tampered(_))
        ));

        let mut edited = (*cert).clone();
        edited.chain_bound += 1;
        assert!(matches!(
            verify_certificate(&edited, &qe),
            Err(VerifyError::Tampered(_))
        ));

        let mut edited = (*cert).clone();
        edited.radius = "-1".to_string();
        assert!(matches!(
            verify_certificate(&edited, &qe),
            Err(VerifyError::Invalid(_))
        ));

        let mut edited = (*cert).clone();
        edited.order = 0;
        assert!(matches!(
            verify_certificate(&edited, &qe),
            Err(VerifyError::Malformed(_))
        ));

        assert!(RlfCertificate::from_json("{\"not\": \"a certificate\"}").is_err());
    }

    #[test]
    fn debug_refute_saddle_linear() {
        let field = VectorField::parse(&["x", "y"], &["-x", "y"]).unwrap();
        let template = Template::parse(&["a", "b"], &["x", "y"], "a*x + b*y").unwrap();
        let cfg = SearchConfig { qe: qe_budget(10_000), ..SearchConfig::default() };
        let search = Search::start(template, field, cfg).unwrap();
        let res = search.res_formula();
        println!("res = {res}");
        let outer = Ring::new(vec!["a".into(), "b".into(), RADIUS_VAR.to_string()]).unwrap();
        for w in ray_directions(2) {
            match restrict_to_ray(&res, &w, &["x".into(), "y".into()], &outer) {
                Some(fm) => println!("dir {:?} -> {}", w.iter().map(render_rational).collect::<Vec<_>>(), fm.simplify()),
                None => println!("dir {:?} -> NONE", w.iter().map(render_rational).collect::<Vec<_>>()),
            }
        }
        let ok = search.refute(None);
        println!("refuted = {ok}");
        assert!(ok);
    }

    #[test]
    fn ray_restriction_substitutes_states_exactly() {
        let template = Template::parse(&["a"], &["x", "y"], "a*x^2 + x*y^2").unwrap();
        let outer = Ring::new(vec!["a".to_string(), RADIUS_VAR.to_string()]).unwrap();
        let w = vec![rat(1, 2), rat(-1, 2)];
        let got = restrict_poly(template.body(), &w, &["x".into(), "y".into()], &outer).unwrap();
        // a*(r/2)^2 + (r/2)*(r/2)^2 = a*r^2/4 + r^3/8.
        let expected =
            crate::parse::parse_polynomial("1/4*a*r^2 + 1/8*r^3", &outer).unwrap();
        assert_eq!(got, expected);
    }
}
