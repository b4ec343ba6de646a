//! Numerical checks of the proof rules used in the goal-model verification.
//!
//! Each rule is instantiated with concrete state sets and parameters on a
//! CTMC and checked at every state: wherever the premises hold, the
//! conclusion must hold too. Deliberately weakened variants ("mutants") are
//! included to show that the checks can fail.

use std::fmt;

use crate::ctmc::Ctmc;
use crate::error::CslError;
use crate::rng::{mix64, Xoshiro256StarStar};

use super::exact::{meets, SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `P>=1 [ G phi ]` at the start state iff `phi` holds everywhere.
    Invariance,
    /// `P>=a F<=s (phi | P>=b F<=t psi)` gives `P>=a*b F<=s+t (phi | psi)`.
    Sequencing,
    /// `P>=a ((phi & P>=b F<=s (!phi | theta)) W psi)` gives `P>=a*b F<=s (psi | theta)`.
    UntilSequencing,
    /// `P>=a G<=t theta` and `P>=b (phi W !theta)` give `P>=a+b-1 G<=t phi`.
    DurationCombination,
    /// `P>=a G<=t phi` with `a > 0` gives `phi` now.
    DurationNow,
    /// `P>=a F<=t phi` and `phi => psi` everywhere give `P>=a F<=t psi`.
    Weakening,
    /// `P>=a F<=s phi` with `a >= b`, `s <= t` gives `P>=b F<=t phi`.
    EventuallyRelax,
    /// `P>=a G<=s phi` with `a >= b`, `s >= t` gives `P>=b G<=t phi`.
    GloballyRelax,
    /// Mutant of `Sequencing` with bound `min(a + b, 1)`.
    SequencingSumBound,
    /// Mutant of `DurationCombination` with bound `min(a, b)`.
    DurationMinBound,
    /// Mutant of `EventuallyRelax` with `s >= t`.
    EventuallyTighten,
    /// Mutant of `GloballyRelax` with `s <= t`.
    GloballyStretch,
}

impl Rule {
    pub const SOUND: [Rule; 8] = [
        Rule::Invariance,
        Rule::Sequencing,
        Rule::UntilSequencing,
        Rule::DurationCombination,
        Rule::DurationNow,
        Rule::Weakening,
        Rule::EventuallyRelax,
        Rule::GloballyRelax,
    ];

    pub const MUTANTS: [Rule; 4] = [
        Rule::SequencingSumBound,
        Rule::DurationMinBound,
        Rule::EventuallyTighten,
        Rule::GloballyStretch,
    ];

    pub fn is_mutant(self) -> bool {
        Rule::MUTANTS.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::Invariance => "invariance",
            Rule::Sequencing => "sequencing",
            Rule::UntilSequencing => "until-sequencing",
            Rule::DurationCombination => "duration-combination",
            Rule::DurationNow => "duration-now",
            Rule::Weakening => "weakening",
            Rule::EventuallyRelax => "eventually-relax",
            Rule::GloballyRelax => "globally-relax",
            Rule::SequencingSumBound => "mutant-sequencing-sum",
            Rule::DurationMinBound => "mutant-duration-min",
            Rule::EventuallyTighten => "mutant-eventually-tighten",
            Rule::GloballyStretch => "mutant-globally-stretch",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Concrete state sets and parameters for one rule application.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    pub phi: Vec<bool>,
    pub psi: Vec<bool>,
    pub theta: Vec<bool>,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub state: usize,
    /// Premise probabilities at `state`, in the order `alpha`, `beta`.
    pub premises: Vec<f64>,
    pub conclusion: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LemmaOutcome {
    /// No violation; `premise_states` counts states where all premises hold.
    Holds {
        premise_states: usize,
    },
    Counterexample(Counterexample),
}

struct Evaluated {
    premises: Vec<Vec<f64>>,
    premise_bounds: Vec<f64>,
    conclusion: Vec<f64>,
    bound: f64,
}

fn or(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

fn not(a: &[bool]) -> Vec<bool> {
    a.iter().map(|x| !x).collect()
}

fn ind(a: &[bool]) -> Vec<f64> {
    a.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect()
}

fn check_sides(rule: Rule, i: &LemmaInstance, n: usize) -> Result<(), CslError> {
    let bad = |m: &str| Err(CslError::Precondition(format!("{rule}: {m}")));
    if i.phi.len() != n || i.psi.len() != n || i.theta.len() != n {
        return bad("state sets must cover every state");
    }
    for p in [i.alpha, i.beta] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CslError::BadBound(p));
        }
    }
    for t in [i.s, i.t] {
        super::formula::check_time(t)?;
    }
    match rule {
        Rule::DurationNow if i.alpha <= SLACK => bad("requires a > 0 beyond numerical resolution"),
        Rule::Weakening if i.phi.iter().zip(&i.psi).any(|(p, q)| *p && !*q) => {
            bad("requires phi => psi everywhere")
        }
        Rule::EventuallyRelax if i.alpha < i.beta || i.s > i.t => bad("requires a >= b and s <= t"),
        Rule::GloballyRelax if i.alpha < i.beta || i.s < i.t => bad("requires a >= b and s >= t"),
        Rule::EventuallyTighten if i.alpha < i.beta || i.s < i.t => {
            bad("requires a >= b and s >= t")
        }
        Rule::GloballyStretch if i.alpha < i.beta || i.s > i.t => bad("requires a >= b and s <= t"),
        _ => Ok(()),
    }
}

fn evaluate(rule: Rule, c: &Ctmc, i: &LemmaInstance) -> Result<Evaluated, CslError> {
    let (a, b) = (i.alpha, i.beta);
    let pe = |set: &[bool], t: f64| c.prob_eventually_bounded(set, t).map(|p| p.values);
    let pg = |set: &[bool], t: f64| c.prob_globally_bounded(set, t).map(|p| p.values);
    let ev = |premises, premise_bounds, conclusion, bound| Evaluated {
        premises,
        premise_bounds,
        conclusion,
        bound,
    };
    Ok(match rule {
        Rule::Invariance => {
            // an equivalence at the start state: conclusion is `P>=1 G phi`, bound is `forall q phi`
            let g = !c.can_reach(&not(&i.phi), None)[c.initial_index()];
            let all = i.phi.iter().all(|&x| x);
            ev(vec![], vec![], ind(&[g]), if all { 1.0 } else { 0.0 })
        }
        Rule::Sequencing | Rule::SequencingSumBound => {
            let inner: Vec<bool> = pe(&i.psi, i.t)?.iter().map(|&p| meets(p, b)).collect();
            let prem = pe(&or(&i.phi, &inner), i.s)?;
            let concl = pe(&or(&i.phi, &i.psi), i.s + i.t)?;
            let bound = if rule == Rule::Sequencing {
                a * b
            } else {
                (a + b).min(1.0)
            };
            ev(vec![prem], vec![a], concl, bound)
        }
        Rule::UntilSequencing => {
            let inner: Vec<bool> = pe(&or(&not(&i.phi), &i.theta), i.s)?
                .iter()
                .map(|&p| meets(p, b))
                .collect();
            let left: Vec<bool> = i.phi.iter().zip(&inner).map(|(x, y)| *x && *y).collect();
            let prem = c.prob_weak_until(&left, &i.psi)?.values;
            let concl = pe(&or(&i.psi, &i.theta), i.s)?;
            ev(vec![prem], vec![a], concl, a * b)
        }
        Rule::DurationCombination | Rule::DurationMinBound => {
            let p1 = pg(&i.theta, i.t)?;
            let p2 = c.prob_weak_until(&i.phi, &not(&i.theta))?.values;
            let concl = pg(&i.phi, i.t)?;
            let bound = if rule == Rule::DurationCombination {
                a + b - 1.0
            } else {
                a.min(b)
            };
            ev(vec![p1, p2], vec![a, b], concl, bound)
        }
        Rule::DurationNow => ev(vec![pg(&i.phi, i.t)?], vec![a], ind(&i.phi), 1.0),
        Rule::Weakening => ev(vec![pe(&i.phi, i.t)?], vec![a], pe(&i.psi, i.t)?, a),
        Rule::EventuallyRelax | Rule::EventuallyTighten => {
            ev(vec![pe(&i.phi, i.s)?], vec![a], pe(&i.phi, i.t)?, b)
        }
        Rule::GloballyRelax | Rule::GloballyStretch => {
            ev(vec![pg(&i.phi, i.s)?], vec![a], pg(&i.phi, i.t)?, b)
        }
    })
}

/// Checks `rule` on `ctmc` at every state.
///
/// Probabilities are compared with a slack of [`SLACK`] in favour of the
/// premises holding and the conclusion holding, so a reported counterexample
/// is a violation beyond numerical error.
pub fn check_lemma(
    rule: Rule,
    ctmc: &Ctmc,
    inst: &LemmaInstance,
) -> Result<LemmaOutcome, CslError> {
    check_sides(rule, inst, ctmc.num_states())?;
    let e = evaluate(rule, ctmc, inst)?;
    if rule == Rule::Invariance {
        let q0 = ctmc.initial_index();
        return Ok(if e.conclusion[0] == e.bound {
            LemmaOutcome::Holds { premise_states: 1 }
        } else {
            LemmaOutcome::Counterexample(Counterexample {
                state: q0,
                premises: vec![],
                conclusion: e.conclusion[0],
                bound: e.bound,
            })
        });
    }
    let mut premise_states = 0;
    for q in 0..ctmc.num_states() {
        let holds = e
            .premises
            .iter()
            .zip(&e.premise_bounds)
            .all(|(v, &b)| meets(v[q], b));
        if !holds {
            continue;
        }
        premise_states += 1;
        if !meets(e.conclusion[q], e.bound) {
            return Ok(LemmaOutcome::Counterexample(Counterexample {
                state: q,
                premises: e.premises.iter().map(|v| v[q]).collect(),
                conclusion: e.conclusion[q],
                bound: e.bound,
            }));
        }
    }
    Ok(LemmaOutcome::Holds { premise_states })
}

/// Random CTMC with `2..=6` states, edge density in `[0.3, 0.8]` and rates
/// log-uniform in `[0.1, 10]`, resampled until every state is reachable from
/// state 0.
pub fn random_ctmc(rng: &mut Xoshiro256StarStar) -> Ctmc {
    loop {
        let n = 2 + rng.below(5) as usize;
        let density = 0.3 + 0.5 * rng.next_f64();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.next_f64() < density {
                    let rate = (0.1f64.ln() + rng.next_f64() * (10.0f64.ln() - 0.1f64.ln())).exp();
                    edges.push((i, j, rate));
                }
            }
        }
        let c = Ctmc::from_transitions(n, &edges).expect("valid random chain");
        let reachable = |q: usize| {
            let mut target = vec![false; n];
            target[q] = true;
            c.can_reach(&target, None)[0]
        };
        if (0..n).all(reachable) {
            return c;
        }
    }
}

fn random_set(rng: &mut Xoshiro256StarStar, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.next_f64() < 0.5).collect()
}

/// Random instance satisfying the side conditions of `rule`. About half the
/// instances have their bounds set to the exact premise probability at a
/// random state, so the premises hold with no room to spare.
pub fn random_instance(
    rule: Rule,
    ctmc: &Ctmc,
    rng: &mut Xoshiro256StarStar,
) -> Result<LemmaInstance, CslError> {
    let n = ctmc.num_states();
    let phi = random_set(rng, n);
    let mut psi = random_set(rng, n);
    if rule == Rule::Weakening {
        psi = or(&phi, &psi);
    }
    let theta = random_set(rng, n);
    let mut alpha = 0.01 + 0.99 * rng.next_f64();
    let mut beta = 0.01 + 0.99 * rng.next_f64();
    let mut s = 0.1 + 2.9 * rng.next_f64();
    let mut t = 0.1 + 2.9 * rng.next_f64();
    match rule {
        Rule::EventuallyRelax | Rule::GloballyStretch if s > t => std::mem::swap(&mut s, &mut t),
        Rule::GloballyRelax | Rule::EventuallyTighten if s < t => std::mem::swap(&mut s, &mut t),
        _ => {}
    }
    if matches!(
        rule,
        Rule::EventuallyRelax
            | Rule::GloballyRelax
            | Rule::EventuallyTighten
            | Rule::GloballyStretch
    ) && alpha < beta
    {
        std::mem::swap(&mut alpha, &mut beta);
    }
    let mut inst = LemmaInstance {
        phi,
        psi,
        theta,
        alpha,
        beta,
        s,
        t,
    };
    if rule != Rule::Invariance && rng.next_f64() < 0.5 {
        let q = rng.below(n as u64) as usize;
        let e = evaluate(rule, ctmc, &inst)?;
        let tight = |x: f64| x.clamp(0.0, 1.0);
        inst.alpha = tight(e.premises[0][q]);
        if e.premises.len() > 1 {
            inst.beta = tight(e.premises[1][q]);
        }
        if matches!(
            rule,
            Rule::EventuallyRelax
                | Rule::GloballyRelax
                | Rule::EventuallyTighten
                | Rule::GloballyStretch
        ) {
            inst.beta = inst.alpha;
        }
        if rule == Rule::DurationNow && inst.alpha <= 1e-6 {
            inst.alpha = alpha;
        }
    }
    Ok(inst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub rule: Rule,
    pub instances: usize,
    /// Instances where the premises held at some state.
    pub non_vacuous: usize,
    pub counterexamples: Vec<(usize, Counterexample)>,
}

impl SuiteReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks `rule` on `instances` random chains; instance `i` uses the
/// generator seeded by `mix64(seed, i)`.
pub fn random_suite(rule: Rule, instances: usize, seed: u64) -> Result<SuiteReport, CslError> {
    let mut report = SuiteReport {
        rule,
        instances,
        non_vacuous: 0,
        counterexamples: Vec::new(),
    };
    for k in 0..instances {
        let mut rng = Xoshiro256StarStar::seed_from_u64(mix64(seed, k as u64));
        let c = random_ctmc(&mut rng);
        let inst = random_instance(rule, &c, &mut rng)?;
        match check_lemma(rule, &c, &inst)? {
            LemmaOutcome::Holds { premise_states } => {
                if premise_states > 0 {
                    report.non_vacuous += 1;
                }
            }
            LemmaOutcome::Counterexample(cx) => {
                report.non_vacuous += 1;
                report.counterexamples.push((k, cx));
            }
        }
    }
    Ok(report)
}
