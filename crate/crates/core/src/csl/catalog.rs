//! Goal model of the watchdog timer as parameterized CSL formulas.
//!
//! Rows follow the goal tree breadth first. Each formula is written in the
//! concrete syntax with parameter names and bound against the internal
//! parameters and the client's `u`, `v`, `eps` and `delta`.

use std::fmt;

use crate::error::CslError;
use crate::params::{ClientPolytope, HeartbeatGoalParams, InternalParams};

use super::formula::{Env, Formula};
use super::syntax::parse_formula;

pub(crate) const NO_ALARM_U: &str = "P>=1-eps [ G<=u !Alarm ]";
pub(crate) const HPRES_QUIET: &str =
    "P>=1 [ G (Hpres => P>=1-eps1 [ F<=g P>=1-eps2 [ G<=u !Alarm ] ]) ]";
pub(crate) const NO_HPRES_ALARM: &str =
    "P>=1 [ G (!Hpres => P>=1-delta1 [ F<=v-w_a (Alarm | Hpres) ]) ]";
pub(crate) const DETECT_PRESENT: &str = "P>=1 [ G (Hpres => P>=1-beta [ F<=w_h Hdet ]) ]";
pub(crate) const AVOID_FALSE_DETECT: &str =
    "P>=1 [ G (!Hpres => P>=1-beta [ F<=w_h P>=1-alpha [ (!Hdet) W (Hpres) ] ]) ]";
pub(crate) const HDET_QUIET_TABLE: &str =
    "P>=1 [ G (Hdet => P>=1-eps1p [ F<=g P>=1-eps2p [ G<=u !Alarm ] ]) ]";
pub(crate) const NO_HDET_ALARM_TABLE: &str =
    "P>=1 [ G (!Hdet => P>=1-delta1p [ F<=v-w_a (Alarm | Hpres) ]) ]";
pub(crate) const HDET_QUIET: &str =
    "P>=1 [ G (Hdet => P>=1-eps1p [ F<=g-w_h P>=1-eps2p [ G<=u !Alarm ] ]) ]";
pub(crate) const NO_HDET_ALARM: &str =
    "P>=1 [ G (!Hdet => P>=1-delta1p [ F<=v-w_a-w_h (Alarm | Hdet) ]) ]";
pub(crate) const INIT_RESET: &str = "Reset";
pub(crate) const RESET_IF_HDET: &str = "P>=1 [ G (Hdet => P>=1-lambda1 [ F<=w_on Reset ]) ]";
pub(crate) const DELAY_IF_RESET: &str = "P>=1 [ G (Reset => P>=1-gamma1 [ G<=u ThL ]) ]";
pub(crate) const THRESHOLDS_EXCLUSIVE: &str = "ThL => !ThH";
pub(crate) const THRESHOLD_IF_ABSENT: &str =
    "P>=1 [ G (!Hdet => P>=1-eta1 [ F<=v-w_a-2*w_h-w_th P>=1-eta2 [ (ThH) W (P>=1-eta3 [ F<=w_h Hdet ]) ] ]) ]";
pub(crate) const QUIET_IF_LOW: &str =
    "P>=1 [ G (ThL => P>=1-lambda2 [ F<=w_off P>=1-lambda3 [ G<=u !Alarm ] ]) ]";
pub(crate) const ALARM_IF_HIGH: &str = "P>=1 [ G (ThH => P>=1-eta4 [ F<=w_th (Alarm | !ThH) ]) ]";
pub(crate) const QUIET_UNTIL_THRESHOLD: &str = "P>=1-gamma2 [ (!Alarm) W (!ThL) ]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agent {
    AbsenceDetector,
    ThresholdFilter,
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::AbsenceDetector => "AD",
            Agent::ThresholdFilter => "TF",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalKind {
    Achieve,
    Avoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalInstance {
    pub name: &'static str,
    pub kind: GoalKind,
    pub formula: Formula,
    /// Responsible agent; `None` for refined (non-leaf) goals.
    pub agent: Option<Agent>,
    /// Catalog indices of the refining subgoals.
    pub children: Vec<usize>,
}

impl GoalInstance {
    pub fn title(&self) -> String {
        let k = match self.kind {
            GoalKind::Achieve => "ACHIEVE",
            GoalKind::Avoid => "AVOID",
        };
        format!("{k}: {}", self.name)
    }
}

/// Parameter environment for the goal formulas.
pub fn goal_env(params: &InternalParams, client: &ClientPolytope) -> Env {
    let mut env: Env = InternalParams::field_names()
        .map(|n| (n.to_string(), params.get(n).expect("field name")))
        .collect();
    env.insert("u".into(), client.u);
    env.insert("v".into(), client.v);
    env.insert("eps".into(), client.eps);
    env.insert("delta".into(), client.delta);
    env
}

pub(crate) fn instantiate(parts: &[&str], env: &Env) -> Result<Formula, CslError> {
    let fs = parts
        .iter()
        .map(|p| parse_formula(p)?.bind(env))
        .collect::<Result<Vec<_>, CslError>>()?;
    Ok(Formula::all(fs))
}

type Row = (
    &'static str,
    GoalKind,
    &'static [&'static str],
    Option<Agent>,
    &'static [usize],
);

const ROWS: [Row; 15] = [
    (
        "Alarm iff no Heartbeat provided within t time",
        GoalKind::Achieve,
        &[NO_ALARM_U, HPRES_QUIET, NO_HPRES_ALARM],
        None,
        &[1, 2],
    ),
    (
        "Heartbeat Detected correctly tracks the presence of Heartbeats",
        GoalKind::Achieve,
        &[DETECT_PRESENT, AVOID_FALSE_DETECT],
        None,
        &[3, 4],
    ),
    (
        "Alarm iff no Heartbeat detected within t' time",
        GoalKind::Achieve,
        &[NO_ALARM_U, HDET_QUIET_TABLE, NO_HDET_ALARM_TABLE],
        None,
        &[5, 6, 7],
    ),
    (
        "Heartbeat Detected when Heartbeat not present",
        GoalKind::Avoid,
        &[AVOID_FALSE_DETECT],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Heartbeat Detected when Heartbeat present",
        GoalKind::Achieve,
        &[DETECT_PRESENT],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Correct Timer Reset",
        GoalKind::Achieve,
        &[INIT_RESET, RESET_IF_HDET],
        None,
        &[8, 9],
    ),
    (
        "Correct Delay",
        GoalKind::Achieve,
        &[DELAY_IF_RESET, THRESHOLDS_EXCLUSIVE, THRESHOLD_IF_ABSENT],
        None,
        &[10, 11],
    ),
    (
        "Alarm iff Threshold met",
        GoalKind::Achieve,
        &[QUIET_IF_LOW, ALARM_IF_HIGH, QUIET_UNTIL_THRESHOLD],
        None,
        &[12, 13, 14],
    ),
    (
        "Initialize to Reset",
        GoalKind::Achieve,
        &[INIT_RESET],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Reset if Hdet",
        GoalKind::Achieve,
        &[RESET_IF_HDET],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Threshold delay if Reset",
        GoalKind::Achieve,
        &[DELAY_IF_RESET],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Threshold if Hdet is absent",
        GoalKind::Achieve,
        &[THRESHOLD_IF_ABSENT],
        Some(Agent::AbsenceDetector),
        &[],
    ),
    (
        "Alarm if Reset",
        GoalKind::Avoid,
        &[QUIET_IF_LOW],
        Some(Agent::ThresholdFilter),
        &[],
    ),
    (
        "Alarm if Threshold for some time",
        GoalKind::Achieve,
        &[ALARM_IF_HIGH],
        Some(Agent::ThresholdFilter),
        &[],
    ),
    (
        "Alarm until first Threshold",
        GoalKind::Avoid,
        &[QUIET_UNTIL_THRESHOLD],
        Some(Agent::ThresholdFilter),
        &[],
    ),
];

/// The fifteen goals of the watchdog, fully bound.
pub fn goal_catalog(
    params: &InternalParams,
    client: &ClientPolytope,
) -> Result<Vec<GoalInstance>, CslError> {
    let env = goal_env(params, client);
    ROWS.iter()
        .map(|&(name, kind, parts, agent, children)| {
            Ok(GoalInstance {
                name,
                kind,
                formula: instantiate(parts, &env)?,
                agent,
                children: children.to_vec(),
            })
        })
        .collect()
}

const OSC_HEALTHY_BEATS: &str = "P>=1 [ G (healthy => P>=1-d1 [ F<=t1 (hbHigh | !healthy) ]) ]";
const OSC_FAILURE_SILENCE: &str =
    "P>=1 [ G (!healthy => P>=1-d2 [ F<=t2 P>=1-d3 [ (hbLow) W (P>=1-d4 [ G<=t3 healthy ]) ] ]) ]";
const OSC_BEATS_END: &str = "P>=1 [ G (hbHigh => P>=1-d5 [ F<=t4 !hbHigh ]) ]";

/// Heartbeat properties of the oscillator: beats while healthy, silence
/// after failure until recovered, and beats that end.
pub fn oscillator_properties(
    hb: &HeartbeatGoalParams,
) -> Result<Vec<(&'static str, Formula)>, CslError> {
    hb.validate().map_err(CslError::Precondition)?;
    let mut env = Env::new();
    for (i, d) in hb.delta.iter().enumerate() {
        env.insert(format!("d{}", i + 1), *d);
    }
    for (i, t) in hb.t.iter().enumerate() {
        env.insert(format!("t{}", i + 1), *t);
    }
    [
        ("heartbeat while healthy", OSC_HEALTHY_BEATS),
        ("silence after failure", OSC_FAILURE_SILENCE),
        ("heartbeat pulses end", OSC_BEATS_END),
    ]
    .into_iter()
    .map(|(n, t)| Ok((n, parse_formula(t)?.bind(&env)?)))
    .collect()
}
