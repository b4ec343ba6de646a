//! Refinement theorems of the goal model checked on a concrete CTMC.
//!
//! A refinement is violated only when every subgoal holds and the parent
//! fails; any other combination is consistent with the theorem.

use std::fmt;

use crate::ctmc::Ctmc;
use crate::error::CslError;
use crate::params::{validate_constraints, ClientPolytope, InternalParams};

use super::catalog::*;
use super::exact::evaluate_exact;
use super::predicates::Context;
use super::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Heartbeat tracking and the detected-heartbeat alarm refine the root goal.
    Root,
    /// The two detector leaves refine heartbeat tracking.
    Tracking,
    /// Reset, delay and threshold goals refine the detected-heartbeat alarm.
    DetectedAlarm,
    /// Every parent of leaves is implied by its leaves.
    Leaves,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Root,
        Theorem::Tracking,
        Theorem::DetectedAlarm,
        Theorem::Leaves,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Root => "root-refinement",
            Theorem::Tracking => "tracking-refinement",
            Theorem::DetectedAlarm => "detected-alarm-refinement",
            Theorem::Leaves => "leaf-refinement",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementCheck {
    pub parent_name: String,
    pub parent: Verdict,
    pub subgoals: Vec<(String, Verdict)>,
}

impl RefinementCheck {
    /// All subgoals hold and the parent fails.
    pub fn is_violation(&self) -> bool {
        self.subgoals.iter().all(|(_, v)| *v == Verdict::Holds) && self.parent == Verdict::Fails
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub checks: Vec<RefinementCheck>,
}

impl TheoremReport {
    pub fn consistent(&self) -> bool {
        !self.checks.iter().any(RefinementCheck::is_violation)
    }
}

type Spec<'a> = (&'a str, &'a [&'a str]);

fn refinement(theorem: Theorem) -> Vec<(Spec<'static>, Vec<Spec<'static>>)> {
    match theorem {
        Theorem::Root => vec![(
            (
                "Alarm iff no Heartbeat provided",
                &[NO_ALARM_U, HPRES_QUIET, NO_HPRES_ALARM],
            ),
            vec![
                ("heartbeat tracking", &[DETECT_PRESENT, AVOID_FALSE_DETECT]),
                (
                    "alarm iff no heartbeat detected",
                    &[NO_ALARM_U, HDET_QUIET, NO_HDET_ALARM],
                ),
            ],
        )],
        Theorem::Tracking => vec![(
            ("heartbeat tracking", &[DETECT_PRESENT, AVOID_FALSE_DETECT]),
            vec![
                ("no detection when absent", &[AVOID_FALSE_DETECT]),
                ("detection when present", &[DETECT_PRESENT]),
            ],
        )],
        Theorem::DetectedAlarm => vec![(
            (
                "alarm iff no heartbeat detected",
                &[NO_ALARM_U, HDET_QUIET, NO_HDET_ALARM],
            ),
            vec![
                ("correct timer reset", &[INIT_RESET, RESET_IF_HDET]),
                ("correct delay", &[DELAY_IF_RESET, THRESHOLD_IF_ABSENT]),
                (
                    "alarm iff threshold met",
                    &[QUIET_IF_LOW, ALARM_IF_HIGH, QUIET_UNTIL_THRESHOLD],
                ),
            ],
        )],
        Theorem::Leaves => vec![
            (
                ("heartbeat tracking", &[DETECT_PRESENT, AVOID_FALSE_DETECT]),
                vec![
                    ("no detection when absent", &[AVOID_FALSE_DETECT]),
                    ("detection when present", &[DETECT_PRESENT]),
                ],
            ),
            (
                ("correct timer reset", &[INIT_RESET, RESET_IF_HDET]),
                vec![
                    ("initialize to reset", &[INIT_RESET]),
                    ("reset if detected", &[RESET_IF_HDET]),
                ],
            ),
            (
                (
                    "correct delay",
                    &[DELAY_IF_RESET, THRESHOLDS_EXCLUSIVE, THRESHOLD_IF_ABSENT],
                ),
                vec![
                    ("threshold delay if reset", &[DELAY_IF_RESET]),
                    ("threshold if detection absent", &[THRESHOLD_IF_ABSENT]),
                ],
            ),
            (
                (
                    "alarm iff threshold met",
                    &[QUIET_IF_LOW, ALARM_IF_HIGH, QUIET_UNTIL_THRESHOLD],
                ),
                vec![
                    ("no alarm if reset", &[QUIET_IF_LOW]),
                    ("alarm if threshold for some time", &[ALARM_IF_HIGH]),
                    ("no alarm until first threshold", &[QUIET_UNTIL_THRESHOLD]),
                ],
            ),
        ],
    }
}

/// Evaluates parent and subgoals of `theorem` at the start state of `ctmc`.
/// Fails with a precondition error when the parameters violate any of the
/// eleven constraints.
pub fn check_refinement_theorem(
    theorem: Theorem,
    ctmc: &Ctmc,
    ctx: &Context,
    params: &InternalParams,
    client: &ClientPolytope,
) -> Result<TheoremReport, CslError> {
    let violations = validate_constraints(params, client);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CslError::Precondition(format!(
            "parameter constraints violated: {}",
            list.join("; ")
        )));
    }
    let env = goal_env(params, client);
    let verdict = |parts: &[&str]| -> Result<Verdict, CslError> {
        Ok(evaluate_exact(ctmc, &instantiate(parts, &env)?, ctx)?.verdict)
    };
    let mut checks = Vec::new();
    for ((pname, pparts), subs) in refinement(theorem) {
        let subgoals = subs
            .iter()
            .map(|(n, parts)| Ok((n.to_string(), verdict(parts)?)))
            .collect::<Result<Vec<_>, CslError>>()?;
        checks.push(RefinementCheck {
            parent_name: pname.to_string(),
            parent: verdict(pparts)?,
            subgoals,
        });
    }
    Ok(TheoremReport { theorem, checks })
}
