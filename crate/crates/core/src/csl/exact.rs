//! Bottom-up model checking on an explicit CTMC.

use std::collections::HashMap;

use crate::ctmc::Ctmc;
use crate::error::CslError;

use super::formula::Formula;
use super::predicates::Context;
use super::{Mode, SubResult, Verdict, VerificationResult};

/// Numerical slack when comparing a computed probability with its bound.
/// Uniformization and the linear solvers are accurate to about 1e-10, so a
/// bound of 1 on a certain event must not fail on rounding.
pub const SLACK: f64 = 1e-9;

pub(crate) fn meets(p: f64, bound: f64) -> bool {
    bound <= 0.0 || p >= bound - SLACK
}

struct Checker<'a> {
    ctmc: &'a Ctmc,
    ctx: &'a Context,
    cache: HashMap<String, Vec<bool>>,
    probs: Vec<(String, Vec<f64>)>,
    uses_globally_all: bool,
}

impl Checker<'_> {
    fn sat(&mut self, f: &Formula) -> Result<Vec<bool>, CslError> {
        let key = f.to_string();
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let c = self.ctmc;
        let v = match f {
            Formula::Atom(a) => {
                let p = self.ctx.compile(a)?;
                c.label(|x| p.eval(x))
            }
            Formula::Not(a) => self.sat(a)?.into_iter().map(|b| !b).collect(),
            Formula::And(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x && y),
            Formula::Or(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x || y),
            Formula::Implies(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| !x || y),
            Formula::ProbEventually { bound, time, phi } => {
                let target = self.sat(phi)?;
                let p = c.prob_eventually_bounded(&target, time.value()?)?;
                self.threshold(key.clone(), p.values, bound.value()?)
            }
            Formula::ProbGlobally { bound, time, phi } => {
                let inv = self.sat(phi)?;
                let p = c.prob_globally_bounded(&inv, time.value()?)?;
                self.threshold(key.clone(), p.values, bound.value()?)
            }
            Formula::ProbWeakUntil { bound, phi, psi } => {
                let a = self.sat(phi)?;
                let b = self.sat(psi)?;
                let p = c.prob_weak_until(&a, &b)?;
                self.threshold(key.clone(), p.values, bound.value()?)
            }
            Formula::GloballyAll(phi) => {
                self.uses_globally_all = true;
                let bad: Vec<bool> = self.sat(phi)?.into_iter().map(|b| !b).collect();
                let reach_bad = c.can_reach(&bad, None);
                let sat: Vec<bool> = reach_bad.iter().map(|b| !b).collect();
                self.probs.push((
                    key.clone(),
                    sat.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
                ));
                sat
            }
        };
        self.cache.insert(key, v.clone());
        Ok(v)
    }

    fn threshold(&mut self, key: String, p: Vec<f64>, bound: f64) -> Vec<bool> {
        let sat = p.iter().map(|&x| meets(x, bound)).collect();
        self.probs.push((key, p));
        sat
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Satisfaction set of `formula` over all states of `ctmc`.
pub fn satisfaction(ctmc: &Ctmc, formula: &Formula, ctx: &Context) -> Result<Vec<bool>, CslError> {
    formula.check_closed()?;
    checker(ctmc, ctx).sat(formula)
}

fn checker<'a>(ctmc: &'a Ctmc, ctx: &'a Context) -> Checker<'a> {
    Checker {
        ctmc,
        ctx,
        cache: HashMap::new(),
        probs: Vec::new(),
        uses_globally_all: false,
    }
}

/// Checks `formula` at the initial state.
pub fn evaluate_exact(
    ctmc: &Ctmc,
    formula: &Formula,
    ctx: &Context,
) -> Result<VerificationResult, CslError> {
    evaluate_exact_at(ctmc, formula, ctx, ctmc.initial_index())
}

/// Checks `formula` at state `state`.
///
/// On a truncated chain, reachability probabilities are lower bounds and
/// `P>=1 [ G phi ]` cannot be decided; such formulas yield `Undecided`.
pub fn evaluate_exact_at(
    ctmc: &Ctmc,
    formula: &Formula,
    ctx: &Context,
    state: usize,
) -> Result<VerificationResult, CslError> {
    formula.check_closed()?;
    if state >= ctmc.num_states() {
        return Err(CslError::StateIndex(state));
    }
    let mut ch = checker(ctmc, ctx);
    let sat = ch.sat(formula)?;
    let truncated = ctmc.is_truncated();
    let mut notes = Vec::new();
    let verdict = if truncated && ch.uses_globally_all {
        notes.push(
            "state space truncated: unbounded invariants over reachable states cannot be decided"
                .into(),
        );
        Verdict::Undecided
    } else if sat[state] {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    if truncated {
        notes.push(
            "state space truncated: probabilities are computed on the explored states only".into(),
        );
    }
    let probabilities = ch
        .probs
        .into_iter()
        .map(|(formula, v)| SubResult {
            formula,
            probability: v[state],
            ci: None,
        })
        .collect();
    Ok(VerificationResult {
        verdict,
        mode: Mode::Exact,
        probabilities,
        truncated,
        approximate: false,
        notes,
    })
}
