//! External decision fallback. A solver is any command line reachable from
//! the RLFGEN_SMT_SOLVER environment variable; it receives an SMT-LIB v2
//! script on stdin and must print sat, unsat, or unknown.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::logic::{to_smtlib, Formula};

use super::prenex::{Prenexed, Quant};

pub const SOLVER_ENV: &str = "RLFGEN_SMT_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmtFail {
    NoSolver,
    Launch(String),
    Answer(String),
}

impl std::fmt::Display for SmtFail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SmtFail::NoSolver => write!(f, "no solver configured in {SOLVER_ENV}"),
            SmtFail::Launch(s) => write!(f, "solver failed to run: {s}"),
            SmtFail::Answer(s) => write!(f, "solver answered: {s}"),
        }
    }
}

impl std::error::Error for SmtFail {}

/// Reads the configured solver command line, split on whitespace.
pub fn solver_command() -> Option<Vec<String>> {
    let raw = std::env::var(SOLVER_ENV).ok()?;
    let parts: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
    if parts.is_empty() {
        None
    } else {
        Some(parts)
    }
}

/// Relates the solver's satisfiability verdict to the sentence's truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    SatMeansTrue,
    SatMeansFalse,
}

/// Builds the script deciding a closed prenexed sentence. A purely universal
/// prefix turns into a quantifier-free question about the negated matrix and
/// a purely existential one asks about the matrix itself; mixed prefixes stay
/// quantified.
pub fn script_for(pre: &Prenexed) -> (String, Polarity) {
    let all_forall = !pre.prefix.is_empty() && pre.prefix.iter().all(|(q, _)| *q == Quant::Forall);
    let all_exists = !pre.prefix.is_empty() && pre.prefix.iter().all(|(q, _)| *q == Quant::Exists);
    if all_forall {
        let negated = Formula::Not(Box::new(pre.matrix.clone())).simplify();
        (to_smtlib(&negated, "QF_NRA"), Polarity::SatMeansFalse)
    } else if all_exists {
        (to_smtlib(&pre.matrix, "QF_NRA"), Polarity::SatMeansTrue)
    } else {
        let mut sentence = pre.matrix.clone();
        for (q, v) in pre.prefix.iter().rev() {
            sentence = match q {
                Quant::Forall => Formula::forall(vec![v.clone()], sentence),
                Quant::Exists => Formula::exists(vec![v.clone()], sentence),
            };
        }
        (to_smtlib(&sentence, "NRA"), Polarity::SatMeansTrue)
    }
}

/// Runs a command with the script on stdin and returns the first
/// sat/unsat/unknown token it prints. Kills the child once the budget runs
/// out.
pub fn run_with_command(cmd: &[String], script: &str, budget_ms: u64) -> Result<String, SmtFail> {
    if cmd.is_empty() {
        return Err(SmtFail::NoSolver);
    }
    let mut child = Command::new(&cmd[0])
        .args(&cmd[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SmtFail::Launch(format!("{}: {e}", cmd[0])))?;
    {
        let stdin = child.stdin.as_mut().expect("piped stdin");
        stdin
            .write_all(script.as_bytes())
            .map_err(|e| SmtFail::Launch(format!("writing script: {e}")))?;
    }
    drop(child.stdin.take());

    let started = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if started.elapsed().as_millis() as u64 > budget_ms {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SmtFail::Answer("timeout".to_string()));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(SmtFail::Launch(format!("waiting: {e}"))),
        }
    }
    let mut out = String::new();
    if let Some(mut stdout) = child.stdout.take() {
        let _ = stdout.read_to_string(&mut out);
    }
    for token in out.split_whitespace() {
        match token {
            "sat" | "unsat" | "unknown" => return Ok(token.to_string()),
            _ => {}
        }
    }
    Err(SmtFail::Answer(format!("unrecognized output {out:?}")))
}

/// Decides a closed prenexed sentence with the configured solver.
pub fn decide(pre: &Prenexed, budget_ms: u64) -> Result<bool, SmtFail> {
    let cmd = solver_command().ok_or(SmtFail::NoSolver)?;
    let (script, polarity) = script_for(pre);
    let verdict = run_with_command(&cmd, &script, budget_ms)?;
    match (verdict.as_str(), polarity) {
        ("sat", Polarity::SatMeansTrue) | ("unsat", Polarity::SatMeansFalse) => Ok(true),
        ("sat", Polarity::SatMeansFalse) | ("unsat", Polarity::SatMeansTrue) => Ok(false),
        (other, _) => Err(SmtFail::Answer(other.to_string())),
    }
}

/// Decides an arbitrary closed sentence, quantifiers and all, without
/// requiring a prenex form.
pub fn decide_sentence(fm: &Formula, budget_ms: u64) -> Result<bool, SmtFail> {
    let cmd = solver_command().ok_or(SmtFail::NoSolver)?;
    let script = to_smtlib(fm, "NRA");
    let verdict = run_with_command(&cmd, &script, budget_ms)?;
    match verdict.as_str() {
        "sat" => Ok(true),
        "unsat" => Ok(false),
        other => Err(SmtFail::Answer(other.to_string())),
    }
}
