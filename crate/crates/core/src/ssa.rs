//! Gillespie direct-method simulation.
//!
//! Each step draws an exponential waiting time with rate equal to the total
//! propensity, then picks a reaction by scanning cumulative propensities in
//! reaction order with a strict less-than comparison. Output is a pure
//! function of `(crn, init, config)`.

use rayon::prelude::*;

use crate::crn::{Crn, State};
use crate::error::SimError;
use crate::rng::{mix64, Xoshiro256StarStar};

pub const DEFAULT_MAX_EVENTS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub master_seed: u64,
    pub max_events: u64,
    pub sample_grid: Option<f64>,
}

impl SimConfig {
    pub fn new(t_end: f64, master_seed: u64) -> Self {
        SimConfig {
            t_end,
            master_seed,
            max_events: DEFAULT_MAX_EVENTS,
            sample_grid: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(SimError::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.max_events == 0 {
            return Err(SimError::Config("max_events must be positive".into()));
        }
        if let Some(step) = self.sample_grid {
            if !(step > 0.0) {
                return Err(SimError::Config(format!(
                    "sample grid step must be positive, got {step}"
                )));
            }
        }
        Ok(())
    }

    /// Config for ensemble member `i`.
    pub fn for_run(&self, i: u64) -> SimConfig {
        SimConfig {
            master_seed: mix64(self.master_seed, i),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Horizon,
    Absorbed,
    EventCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub events: Vec<(f64, u32)>,
    pub initial: State,
    pub final_state: State,
    pub end_time: f64,
    pub horizon: f64,
    pub terminated_by: Termination,
}

impl Trajectory {
    /// Replays the events, yielding `(time, state)` after each one, starting
    /// with `(0, initial)`.
    pub fn states<'a>(&'a self, crn: &'a Crn) -> impl Iterator<Item = (f64, State)> + 'a {
        let mut cur = self.initial.clone();
        std::iter::once((0.0, self.initial.clone())).chain(self.events.iter().map(
            move |&(t, j)| {
                for (s, d) in crn.reactions()[j as usize].net_change() {
                    cur.0[s] += d;
                }
                (t, cur.clone())
            },
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Fired { time: f64, reaction: usize },
    Horizon,
    Absorbed,
}

/// Incremental direct-method stepper. The state is public so callers can
/// inject perturbations between steps.
pub struct Gillespie<'a> {
    crn: &'a Crn,
    deltas: Vec<Vec<(usize, i64)>>,
    pub state: Vec<i64>,
    pub time: f64,
    rng: Xoshiro256StarStar,
    props: Vec<f64>,
}

impl<'a> Gillespie<'a> {
    pub fn new(crn: &'a Crn, init: &State, seed: u64) -> Result<Self, SimError> {
        crn.check_state(init)?;
        Ok(Gillespie {
            crn,
            deltas: crn.reactions().iter().map(|r| r.net_change()).collect(),
            state: init.0.clone(),
            time: 0.0,
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            props: vec![0.0; crn.reactions().len()],
        })
    }

    pub fn crn(&self) -> &Crn {
        self.crn
    }

    /// Advances one reaction event unless the next event would fall after
    /// `t_end` (then time is left unchanged and `Horizon` is returned).
    pub fn step(&mut self, t_end: f64) -> Result<Step, SimError> {
        let mut total = 0.0;
        for (a, r) in self.props.iter_mut().zip(self.crn.reactions()) {
            *a = self.crn.propensity_unchecked(r, &self.state);
            total += *a;
        }
        if total == 0.0 {
            return Ok(Step::Absorbed);
        }
        if !total.is_finite() {
            return Err(SimError::Numerical {
                time: self.time,
                total,
            });
        }
        let tau = self.rng.exponential(total);
        let target = self.rng.next_f64() * total;
        if self.time + tau > t_end {
            return Ok(Step::Horizon);
        }
        let mut chosen = None;
        let mut acc = 0.0;
        for (j, &a) in self.props.iter().enumerate() {
            acc += a;
            if target < acc {
                chosen = Some(j);
                break;
            }
        }
        // rounding can leave target == acc at the end of the scan
        let j = chosen.unwrap_or_else(|| self.props.iter().rposition(|&a| a > 0.0).unwrap());
        for &(s, d) in &self.deltas[j] {
            let v = self.state[s].checked_add(d).ok_or_else(|| {
                crate::error::CrnError::CountOverflow(self.crn.species()[s].name.clone())
            })?;
            self.state[s] = v;
        }
        self.time += tau;
        Ok(Step::Fired {
            time: self.time,
            reaction: j,
        })
    }
}

/// One trajectory from `init` up to `cfg.t_end`.
pub fn simulate(crn: &Crn, init: &State, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let mut sim = Gillespie::new(crn, init, cfg.master_seed)?;
    let mut events = Vec::new();
    let terminated_by = loop {
        match sim.step(cfg.t_end)? {
            Step::Fired { time, reaction } => {
                events.push((time, reaction as u32));
                if events.len() as u64 >= cfg.max_events {
                    break Termination::EventCap;
                }
            }
            Step::Horizon => break Termination::Horizon,
            Step::Absorbed => break Termination::Absorbed,
        }
    };
    let end_time = match terminated_by {
        Termination::Horizon => cfg.t_end,
        _ => sim.time,
    };
    Ok(Trajectory {
        events,
        initial: init.clone(),
        final_state: State(sim.state),
        end_time,
        horizon: cfg.t_end,
        terminated_by,
    })
}

/// `n_runs` independent trajectories; run `i` uses seed `mix64(master_seed, i)`.
/// Results are in run order regardless of scheduling.
pub fn simulate_ensemble(
    crn: &Crn,
    init: &State,
    cfg: &SimConfig,
    n_runs: usize,
) -> Result<Vec<Trajectory>, SimError> {
    cfg.validate()?;
    (0..n_runs as u64)
        .into_par_iter()
        .map(|i| simulate(crn, init, &cfg.for_run(i)))
        .collect()
}

/// Left-continuous sampling: the state at grid time `t` is the state after
/// the last event with time `<= t`. The grid runs from 0 to the trajectory
/// horizon inclusive.
pub fn sample_on_grid(traj: &Trajectory, crn: &Crn, step: f64) -> Vec<(f64, State)> {
    assert!(step > 0.0, "grid step must be positive");
    let n = (traj.horizon / step + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = traj.initial.clone();
    let mut next_event = 0;
    for i in 0..=n {
        let t = i as f64 * step;
        while next_event < traj.events.len() && traj.events[next_event].0 <= t {
            let j = traj.events[next_event].1 as usize;
            for (s, d) in crn.reactions()[j].net_change() {
                cur.0[s] += d;
            }
            next_event += 1;
        }
        out.push((t, cur.clone()));
    }
    out
}
