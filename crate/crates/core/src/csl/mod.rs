//! Time-bounded CSL: formulas, exact and statistical checking, the goal
//! catalog of the watchdog design, lemma and refinement-theorem harnesses.

pub mod catalog;
pub mod exact;
pub mod formula;
pub mod lemmas;
pub mod predicates;
pub mod report;
pub mod statistical;
pub mod syntax;
pub mod theorems;

use std::fmt;

pub use catalog::{goal_catalog, oscillator_properties, Agent, GoalInstance};
pub use exact::{evaluate_exact, evaluate_exact_at, satisfaction};
pub use formula::{Atom, Cmp, Env, Formula, LinExpr, Named, PExpr};
pub use predicates::{Context, StatePred};
pub use statistical::{
    estimate_probability, evaluate_statistical, wilson_interval, Estimate, StatConfig,
};
pub use syntax::{parse_formula, parse_formula_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Statistical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Statistical => "statistical",
        })
    }
}

/// Probability of one probabilistic subformula at the query state.
#[derive(Debug, Clone, PartialEq)]
pub struct SubResult {
    pub formula: String,
    pub probability: f64,
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub verdict: Verdict,
    pub mode: Mode,
    pub probabilities: Vec<SubResult>,
    pub truncated: bool,
    pub approximate: bool,
    pub notes: Vec<String>,
}
