//! Monte-Carlo checking on SSA trajectories.
//!
//! Each top-level probabilistic operator is estimated from independent runs
//! and compared with its bound through a Wilson score interval. Operators
//! nested inside a path are decided at every visited state by re-simulating
//! `nested_runs` sub-trajectories from that state and comparing the point
//! estimate with the bound; results that depend on this are flagged
//! approximate.

use std::collections::HashMap;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::crn::{Crn, State};
use crate::error::{CslError, SimError};
use crate::rng::mix64;
use crate::ssa::{Gillespie, Step, DEFAULT_MAX_EVENTS};

use super::formula::Formula;
use super::predicates::{Context, StatePred};
use super::{Mode, SubResult, Verdict, VerificationResult};

pub const DEFAULT_NESTED_RUNS: usize = 200;
const NESTED_SALT: u64 = 0xA076_1D64_78BD_642F;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatConfig {
    pub runs: usize,
    /// Simulation horizon; must cover every time bound of the formula.
    pub horizon: f64,
    pub seed: u64,
    /// Two-sided significance of the interval (0.05 gives a 95% interval).
    pub alpha: f64,
    pub nested_runs: usize,
    pub max_events: u64,
}

impl StatConfig {
    pub fn new(runs: usize, horizon: f64, seed: u64) -> Self {
        StatConfig {
            runs,
            horizon,
            seed,
            alpha: 0.05,
            nested_runs: DEFAULT_NESTED_RUNS,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    fn validate(&self) -> Result<(), CslError> {
        let bad = |m: String| Err(CslError::Sim(SimError::Config(m)));
        if self.runs == 0 || self.nested_runs == 0 {
            return bad("number of runs must be positive".into());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!(
                "significance must lie in (0, 1), got {}",
                self.alpha
            ));
        }
        Ok(())
    }
}

/// Wilson score interval for `successes` out of `n` at two-sided level `alpha`.
pub fn wilson_interval(successes: usize, n: usize, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the closed form leaves rounding residue at the boundaries
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if p == 1.0 {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Point estimate and interval for the path probability of a top-level
/// probabilistic operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub successes: usize,
    pub runs: usize,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub approximate: bool,
}

#[derive(Debug)]
enum Node {
    Pred(StatePred),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Prob {
        id: usize,
        bound: f64,
        path: Path,
        text: String,
    },
}

#[derive(Debug)]
enum Path {
    Eventually(f64, Box<Node>),
    Globally(f64, Box<Node>),
    WeakUntil(Box<Node>, Box<Node>),
    All(Box<Node>),
}

fn compile(f: &Formula, ctx: &Context, next_id: &mut usize) -> Result<Node, CslError> {
    let mut c = |g: &Formula| compile(g, ctx, next_id).map(Box::new);
    let node = match f {
        Formula::Atom(a) => Node::Pred(ctx.compile(a)?),
        Formula::Not(a) => Node::Not(c(a)?),
        Formula::And(a, b) => Node::And(c(a)?, c(b)?),
        Formula::Or(a, b) => Node::Or(c(a)?, c(b)?),
        Formula::Implies(a, b) => Node::Implies(c(a)?, c(b)?),
        Formula::ProbEventually { bound, time, phi } => {
            let path = Path::Eventually(time.value()?, c(phi)?);
            prob(f, bound.value()?, path, next_id)
        }
        Formula::ProbGlobally { bound, time, phi } => {
            let path = Path::Globally(time.value()?, c(phi)?);
            prob(f, bound.value()?, path, next_id)
        }
        Formula::ProbWeakUntil { bound, phi, psi } => {
            let phi = c(phi)?;
            let path = Path::WeakUntil(phi, c(psi)?);
            prob(f, bound.value()?, path, next_id)
        }
        Formula::GloballyAll(phi) => {
            let path = Path::All(c(phi)?);
            prob(f, 1.0, path, next_id)
        }
    };
    Ok(node)
}

fn prob(f: &Formula, bound: f64, path: Path, next_id: &mut usize) -> Node {
    *next_id += 1;
    Node::Prob {
        id: *next_id,
        bound,
        path,
        text: f.to_string(),
    }
}

/// Per-run evaluation state: memoized nested verdicts and flags.
struct RunCtx<'a> {
    crn: &'a Crn,
    cfg: &'a StatConfig,
    memo: HashMap<(usize, Vec<i64>), bool>,
    nested: bool,
    surrogate: bool,
}

impl RunCtx<'_> {
    fn holds(&mut self, n: &Node, x: &[i64], seed: u64) -> Result<bool, CslError> {
        Ok(match n {
            Node::Pred(p) => p.eval(x),
            Node::Not(a) => !self.holds(a, x, seed)?,
            Node::And(a, b) => self.holds(a, x, seed)? && self.holds(b, x, mix64(seed, 1))?,
            Node::Or(a, b) => self.holds(a, x, seed)? || self.holds(b, x, mix64(seed, 1))?,
            Node::Implies(a, b) => !self.holds(a, x, seed)? || self.holds(b, x, mix64(seed, 1))?,
            Node::Prob {
                id, bound, path, ..
            } => {
                self.nested = true;
                if *bound <= 0.0 {
                    return Ok(true);
                }
                if let Some(&v) = self.memo.get(&(*id, x.to_vec())) {
                    return Ok(v);
                }
                let m = self.cfg.nested_runs;
                let mut hits = 0;
                for j in 0..m {
                    if self.sample_path(path, x, mix64(seed ^ NESTED_SALT, j as u64))? {
                        hits += 1;
                    }
                }
                let v = hits as f64 / m as f64 >= *bound;
                self.memo.insert((*id, x.to_vec()), v);
                v
            }
        })
    }

    /// One trajectory from `x`; returns whether it satisfies `path`.
    fn sample_path(&mut self, path: &Path, x: &[i64], seed: u64) -> Result<bool, CslError> {
        let (t_end, mode) = match path {
            Path::Eventually(t, _) | Path::Globally(t, _) => (*t, 0),
            Path::WeakUntil(..) | Path::All(_) => (self.cfg.horizon, 1),
        };
        let mut sim = Gillespie::new(self.crn, &State(x.to_vec()), seed)?;
        let mut events = 0u64;
        let mut k = 0u64;
        loop {
            let cp = mix64(seed, k);
            k += 1;
            match path {
                Path::Eventually(_, phi) => {
                    if self.holds(phi, &sim.state.clone(), cp)? {
                        return Ok(true);
                    }
                }
                Path::Globally(_, phi) | Path::All(phi) => {
                    if !self.holds(phi, &sim.state.clone(), cp)? {
                        return Ok(false);
                    }
                }
                Path::WeakUntil(phi, psi) => {
                    let s = sim.state.clone();
                    if self.holds(psi, &s, cp)? {
                        return Ok(true);
                    }
                    if !self.holds(phi, &s, mix64(cp, 2))? {
                        return Ok(false);
                    }
                }
            }
            let step = if events >= self.cfg.max_events {
                Step::Horizon
            } else {
                sim.step(t_end)?
            };
            match step {
                Step::Fired { .. } => events += 1,
                Step::Absorbed => {
                    // the current state persists forever
                    return Ok(!matches!(path, Path::Eventually(..)));
                }
                Step::Horizon => {
                    if mode == 1 {
                        self.surrogate = true;
                    }
                    return Ok(!matches!(path, Path::Eventually(..)));
                }
            }
        }
    }
}

fn estimate_node(
    crn: &Crn,
    init: &State,
    path: &Path,
    cfg: &StatConfig,
) -> Result<(Estimate, bool), CslError> {
    let outcomes: Vec<(bool, bool, bool)> = (0..cfg.runs)
        .into_par_iter()
        .map(|i| {
            let mut rc = RunCtx {
                crn,
                cfg,
                memo: HashMap::new(),
                nested: false,
                surrogate: false,
            };
            let v = rc.sample_path(path, &init.0, mix64(cfg.seed, i as u64))?;
            Ok((v, rc.nested, rc.surrogate))
        })
        .collect::<Result<_, CslError>>()?;
    let successes = outcomes.iter().filter(|o| o.0).count();
    let nested = outcomes.iter().any(|o| o.1);
    let surrogate = outcomes.iter().any(|o| o.2);
    let n = cfg.runs;
    Ok((
        Estimate {
            successes,
            runs: n,
            p_hat: successes as f64 / n as f64,
            ci: wilson_interval(successes, n, cfg.alpha),
            approximate: nested || surrogate,
        },
        surrogate,
    ))
}

/// Estimates the path probability of a formula whose top level is a
/// probabilistic operator; its bound is ignored.
pub fn estimate_probability(
    crn: &Crn,
    init: &State,
    formula: &Formula,
    ctx: &Context,
    cfg: &StatConfig,
) -> Result<Estimate, CslError> {
    prepare(crn, init, formula, cfg)?;
    let node = compile(formula, ctx, &mut 0)?;
    match node {
        Node::Prob { path, .. } => Ok(estimate_node(crn, init, &path, cfg)?.0),
        _ => Err(CslError::Precondition(
            "formula is not a probabilistic operator".into(),
        )),
    }
}

fn prepare(crn: &Crn, init: &State, formula: &Formula, cfg: &StatConfig) -> Result<(), CslError> {
    cfg.validate()?;
    formula.check_closed()?;
    crn.check_state(init).map_err(SimError::from)?;
    let needed = formula.max_time()?;
    if cfg.horizon < needed {
        return Err(CslError::HorizonTooShort {
            horizon: cfg.horizon,
            needed,
        });
    }
    Ok(())
}

struct TopLevel<'a> {
    crn: &'a Crn,
    init: &'a State,
    cfg: &'a StatConfig,
    subs: Vec<SubResult>,
    approximate: bool,
    notes: Vec<String>,
}

impl TopLevel<'_> {
    fn eval(&mut self, n: &Node) -> Result<Verdict, CslError> {
        use Verdict::*;
        Ok(match n {
            Node::Pred(p) => from_bool(p.eval(&self.init.0)),
            Node::Not(a) => match self.eval(a)? {
                Holds => Fails,
                Fails => Holds,
                Undecided => Undecided,
            },
            Node::And(a, b) => and3(self.eval(a)?, self.eval(b)?),
            Node::Or(a, b) => not3(and3(not3(self.eval(a)?), not3(self.eval(b)?))),
            Node::Implies(a, b) => not3(and3(self.eval(a)?, not3(self.eval(b)?))),
            Node::Prob {
                bound, path, text, ..
            } => {
                if *bound <= 0.0 {
                    self.notes
                        .push(format!("{text}: bound <= 0 holds trivially"));
                    return Ok(Holds);
                }
                let (est, surrogate) = estimate_node(self.crn, self.init, path, self.cfg)?;
                self.approximate |= est.approximate;
                if surrogate {
                    self.notes.push(format!(
                        "{text}: runs reaching the horizon were counted as satisfying"
                    ));
                }
                self.subs.push(SubResult {
                    formula: text.clone(),
                    probability: est.p_hat,
                    ci: Some(est.ci),
                });
                if let Path::All(_) = path {
                    self.approximate = true;
                    self.notes
                        .push(format!("{text}: checked on sampled states only (under-approximation of reachability)"));
                    if est.successes == est.runs {
                        Holds
                    } else {
                        Fails
                    }
                } else if est.ci.0 >= *bound {
                    Holds
                } else if est.ci.1 < *bound {
                    Fails
                } else {
                    Undecided
                }
            }
        })
    }
}

fn from_bool(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn not3(v: Verdict) -> Verdict {
    match v {
        Verdict::Holds => Verdict::Fails,
        Verdict::Fails => Verdict::Holds,
        Verdict::Undecided => Verdict::Undecided,
    }
}

fn and3(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        _ => Verdict::Undecided,
    }
}

/// Statistical check of `formula` from `init`.
pub fn evaluate_statistical(
    crn: &Crn,
    init: &State,
    formula: &Formula,
    ctx: &Context,
    cfg: &StatConfig,
) -> Result<VerificationResult, CslError> {
    prepare(crn, init, formula, cfg)?;
    let node = compile(formula, ctx, &mut 0)?;
    let mut top = TopLevel {
        crn,
        init,
        cfg,
        subs: Vec::new(),
        approximate: false,
        notes: Vec::new(),
    };
    let verdict = top.eval(&node)?;
    if formula.prob_depth() > 1 {
        top.approximate = true;
        top.notes.push(format!(
            "nested operators decided by re-simulation with {} runs per visited state",
            cfg.nested_runs
        ));
    }
    Ok(VerificationResult {
        verdict,
        mode: Mode::Statistical,
        probabilities: top.subs,
        truncated: false,
        approximate: top.approximate,
        notes: top.notes,
    })
}
