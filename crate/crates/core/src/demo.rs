//! Failure and recovery of the oscillator under the watchdog.
//!
//! Each run simulates the composed system and records when the oscillator
//! failed (some of `A`, `B`, `C` reached zero), when the alarm first held
//! afterwards, when the oscillator was healthy again, and when the watchdog
//! returned to its reset state and, from then on, first had the alarm off.

use rayon::prelude::*;

use crate::csl::{Atom, Context, Named, StatePred};
use crate::designs::{build_composed, Model, MwtConfig, OscillatorConfig};
use crate::error::{CslError, SimError};
use crate::rng::mix64;
use crate::ssa::{Gillespie, Step};

/// Zero a species at the first reaction event at or after `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub species: String,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub osc: OscillatorConfig,
    pub mwt: MwtConfig,
    pub horizon: f64,
    pub runs: usize,
    pub seed: u64,
    pub injection: Option<Injection>,
    /// Grid step of the recorded trajectory of run 0.
    pub grid: f64,
}

impl DemoConfig {
    /// Defaults for an oscillator of `total` molecules split 80/10/10.
    pub fn new(total: i64) -> Result<Self, SimError> {
        if total < 3 {
            return Err(SimError::Config(format!(
                "total population must be at least 3, got {total}"
            )));
        }
        let mut osc = OscillatorConfig::split(total, [80, 10, 10])?;
        osc.k = 1.0 / total as f64;
        osc.k2 = 0.5;
        osc.k_recovery = osc.k;
        let mut mwt = MwtConfig::new(3, 20, 3, 20, 2, 2);
        mwt.hb_high = 5;
        Ok(DemoConfig {
            osc,
            mwt,
            horizon: 200.0,
            runs: 100,
            seed: 1,
            injection: None,
            grid: 1.0,
        })
    }

    pub fn model(&self) -> Result<Model, SimError> {
        Ok(build_composed(&self.osc, &self.mwt)?)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DemoRun {
    pub index: usize,
    pub seed: u64,
    pub failure_time: Option<f64>,
    /// Alarm held before any failure.
    pub false_alarm: bool,
    pub alarm_time: Option<f64>,
    pub recovery_time: Option<f64>,
    pub reset_time: Option<f64>,
    pub clear_time: Option<f64>,
    pub samples: Vec<(f64, Vec<i64>)>,
}

impl DemoRun {
    pub fn recovered(&self) -> bool {
        self.recovery_time.is_some()
    }

    /// Reset held and the alarm cleared after recovery.
    pub fn rearmed(&self) -> bool {
        self.reset_time.is_some() && self.clear_time.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSummary {
    pub runs: Vec<DemoRun>,
}

impl DemoSummary {
    pub fn failed(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.failure_time.is_some())
            .count()
    }

    /// Fraction of failed runs that raised the alarm and became healthy again.
    pub fn recovery_fraction(&self) -> f64 {
        let failed = self.failed();
        if failed == 0 {
            return 0.0;
        }
        self.runs
            .iter()
            .filter(|r| r.alarm_time.is_some() && r.recovered())
            .count() as f64
            / failed as f64
    }

    /// Fraction of recovered runs in which the watchdog re-armed.
    pub fn rearm_fraction(&self) -> f64 {
        let rec: Vec<_> = self.runs.iter().filter(|r| r.recovered()).collect();
        if rec.is_empty() {
            return 0.0;
        }
        rec.iter().filter(|r| r.rearmed()).count() as f64 / rec.len() as f64
    }
}

struct Preds {
    alarm: StatePred,
    reset: StatePred,
    healthy: StatePred,
    abc: [usize; 3],
}

fn preds(model: &Model, cfg: &DemoConfig) -> Result<Preds, CslError> {
    let mut pc = cfg.mwt.predicates();
    pc.tau = cfg.osc.tau;
    let ctx = Context::for_crn(&model.crn, pc);
    let c = |n| ctx.compile(&Atom::Named(n));
    let idx = |s: &str| model.crn.require(s).map_err(|e| CslError::Sim(e.into()));
    Ok(Preds {
        alarm: c(Named::Alarm)?,
        reset: c(Named::Reset)?,
        healthy: c(Named::Healthy)?,
        abc: [idx("A")?, idx("B")?, idx("C")?],
    })
}

fn run_once(
    model: &Model,
    cfg: &DemoConfig,
    p: &Preds,
    index: usize,
    record: bool,
) -> Result<DemoRun, CslError> {
    let seed = mix64(cfg.seed, index as u64);
    let mut sim = Gillespie::new(&model.crn, &model.init, seed)?;
    let inject = match &cfg.injection {
        Some(inj) => Some((
            model.crn.require(&inj.species).map_err(SimError::from)?,
            inj.time,
        )),
        None => None,
    };
    let mut injected = false;
    let mut run = DemoRun {
        index,
        seed,
        ..DemoRun::default()
    };
    let mut next_grid = 0usize;
    let mut prev = sim.state.clone();
    let observe = |run: &mut DemoRun, t: f64, x: &[i64]| {
        if run.failure_time.is_none() {
            if p.abc.iter().any(|&i| x[i] == 0) {
                run.failure_time = Some(t);
            } else if p.alarm.eval(x) {
                run.false_alarm = true;
            }
        }
        if run.failure_time.is_some() && run.alarm_time.is_none() && p.alarm.eval(x) {
            run.alarm_time = Some(t);
        }
        if run.alarm_time.is_some() && run.recovery_time.is_none() && p.healthy.eval(x) {
            run.recovery_time = Some(t);
        }
        if run.recovery_time.is_some() {
            if run.reset_time.is_none() && p.reset.eval(x) {
                run.reset_time = Some(t);
            }
            if run.reset_time.is_some() && run.clear_time.is_none() && !p.alarm.eval(x) {
                run.clear_time = Some(t);
            }
        }
    };
    observe(&mut run, 0.0, &sim.state);
    loop {
        let step = sim.step(cfg.horizon)?;
        let t_now = match step {
            Step::Fired { time, .. } => time,
            Step::Horizon | Step::Absorbed => cfg.horizon,
        };
        if record {
            while (next_grid as f64) * cfg.grid < t_now - 1e-12
                || matches!(step, Step::Horizon | Step::Absorbed)
            {
                let g = next_grid as f64 * cfg.grid;
                if g > cfg.horizon + 1e-9 {
                    break;
                }
                run.samples.push((g, prev.clone()));
                next_grid += 1;
            }
        }
        match step {
            Step::Fired { time, .. } => {
                if let Some((sp, at)) = inject {
                    if !injected && time >= at {
                        sim.state[sp] = 0;
                        injected = true;
                    }
                }
                observe(&mut run, time, &sim.state);
                if record {
                    prev.clone_from(&sim.state);
                } else if run.rearmed() {
                    break;
                }
            }
            Step::Horizon | Step::Absorbed => break,
        }
    }
    Ok(run)
}

/// Runs `cfg.runs` seeded replicates; run `i` uses seed `mix64(cfg.seed, i)`
/// and only run 0 keeps its sampled trajectory.
pub fn run_demo(cfg: &DemoConfig) -> Result<DemoSummary, CslError> {
    if !(cfg.horizon > 0.0) || !(cfg.grid > 0.0) {
        return Err(CslError::Sim(SimError::Config(
            "horizon and grid must be positive".into(),
        )));
    }
    let model = cfg.model()?;
    let p = preds(&model, cfg)?;
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|i| run_once(&model, cfg, &p, i, i == 0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DemoSummary { runs })
}
