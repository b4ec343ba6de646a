//! Builders for the watchdog's component networks and their analyses.
//!
//! Rung species are named `<prefix><i>`. In the watchdog the top rungs of
//! the detector and filter ladders are named `Y` and `D` directly, so that
//! formulas and the recovery network can refer to them by those names;
//! [`MwtConfig::alias_map`] records which rung each name stands for.

use statrs::distribution::{Binomial, DiscreteCDF};

use crate::crn::{Crn, NamedReaction, State};
use crate::ctmc::{Ctmc, ExploreCaps};
use crate::error::{CrnError, CtmcError};

/// A network together with its initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub crn: Crn,
    pub init: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    pub k: usize,
    pub u: f64,
    pub r: f64,
    pub p: i64,
    pub rung_prefix: String,
}

impl LadderSpec {
    pub fn new(k: usize, u: f64, r: f64, p: i64) -> Self {
        LadderSpec {
            k,
            u,
            r,
            p,
            rung_prefix: "X".into(),
        }
    }

    pub fn with_prefix(mut self, prefix: &str) -> Self {
        self.rung_prefix = prefix.into();
        self
    }

    pub fn validate(&self) -> Result<(), CrnError> {
        if self.k < 1 {
            return Err(CrnError::Build("ladder height must be at least 1".into()));
        }
        if self.p < 1 {
            return Err(CrnError::Build(
                "ladder population must be at least 1".into(),
            ));
        }
        for rate in [self.u, self.r] {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(CrnError::InvalidRate(rate));
            }
        }
        Ok(())
    }

    pub fn rung_names(&self) -> Vec<String> {
        rung_names(&self.rung_prefix, self.k)
    }
}

pub fn rung_names(prefix: &str, k: usize) -> Vec<String> {
    (0..=k).map(|i| format!("{prefix}{i}")).collect()
}

fn ladder_reactions(
    rungs: &[String],
    up: Option<&str>,
    reset: Option<&str>,
    u: f64,
    r: f64,
) -> Vec<NamedReaction> {
    let k = rungs.len() - 1;
    let mut out = Vec::with_capacity(2 * k);
    let with = |rung: &str, cat: Option<&str>| -> Vec<(String, u32)> {
        let mut side = vec![(rung.to_string(), 1)];
        if let Some(c) = cat {
            side.push((c.to_string(), 1));
        }
        side
    };
    for i in 0..k {
        out.push(NamedReaction {
            reactants: with(&rungs[i], up),
            products: with(&rungs[i + 1], up),
            rate: u,
        });
    }
    for i in 1..=k {
        out.push(NamedReaction {
            reactants: with(&rungs[i], reset),
            products: with(&rungs[0], reset),
            rate: r,
        });
    }
    out
}

/// `X_i -(u)-> X_{i+1}` and `X_i -(r)-> X_0`, all molecules on rung 0.
pub fn unary_ladder(spec: &LadderSpec) -> Result<Model, CrnError> {
    spec.validate()?;
    let rungs = spec.rung_names();
    let crn = Crn::from_names(
        rungs.clone(),
        ladder_reactions(&rungs, None, None, spec.u, spec.r),
        1.0,
    )?;
    let mut init = State::zeros(crn.num_species());
    init.0[0] = spec.p;
    Ok(Model { crn, init })
}

/// Catalyzed ladder with unit rate constants. `spec.u` and `spec.r` are not
/// used; the climb and reset speeds come from the catalyst counts.
pub fn catalyzed_ladder(
    spec: &LadderSpec,
    up: (&str, i64),
    reset: (&str, i64),
) -> Result<Model, CrnError> {
    spec.validate()?;
    let rungs = spec.rung_names();
    if up.0 == reset.0 {
        return Err(CrnError::Build(format!(
            "catalysts must differ, both are `{}`",
            up.0
        )));
    }
    for cat in [up.0, reset.0] {
        if rungs.iter().any(|r| r == cat) {
            return Err(CrnError::Build(format!(
                "catalyst `{cat}` collides with a rung species"
            )));
        }
    }
    let mut names = rungs.clone();
    names.push(up.0.into());
    names.push(reset.0.into());
    let crn = Crn::from_names(
        names,
        ladder_reactions(&rungs, Some(up.0), Some(reset.0), 1.0, 1.0),
        1.0,
    )?;
    let mut init = State::zeros(crn.num_species());
    init.0[0] = spec.p;
    init.0[spec.k + 1] = up.1;
    init.0[spec.k + 2] = reset.1;
    crn.check_state(&init)?;
    Ok(Model { crn, init })
}

/// Named thresholds for the watchdog and oscillator state predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateConfig {
    pub detector_rungs: Vec<String>,
    pub reset_cut: usize,
    pub reset_fraction: f64,
    pub y_species: String,
    pub y_threshold: i64,
    pub y_low: i64,
    pub d_species: String,
    pub d_threshold: i64,
    pub h_species: String,
    pub hb_high: i64,
    pub hb_low: i64,
    /// Health threshold; `None` means `(0.1 * (A + B + C))^2` per state.
    pub tau: Option<f64>,
}

impl Default for PredicateConfig {
    fn default() -> Self {
        MwtConfig::new(3, 5, 3, 5, 1, 1).predicates()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwtConfig {
    pub kd: usize,
    pub pl: i64,
    pub kt: usize,
    pub pt: i64,
    pub u_count: i64,
    pub r_count: i64,
    pub h_init: i64,
    pub detector_prefix: String,
    pub filter_prefix: String,
    pub reset_fraction: f64,
    pub reset_cut: usize,
    pub y_threshold: i64,
    pub y_low: i64,
    pub d_threshold: i64,
    pub hb_high: i64,
    pub hb_low: i64,
}

impl MwtConfig {
    pub fn new(kd: usize, pl: i64, kt: usize, pt: i64, u_count: i64, r_count: i64) -> Self {
        MwtConfig {
            kd,
            pl,
            kt,
            pt,
            u_count,
            r_count,
            h_init: 0,
            detector_prefix: "L".into(),
            filter_prefix: "T".into(),
            reset_fraction: 0.9,
            reset_cut: kd / 2,
            y_threshold: (0.5 * pl as f64).ceil() as i64,
            y_low: (0.1 * pl as f64).ceil() as i64,
            d_threshold: (0.5 * pt as f64).ceil() as i64,
            hb_high: 5,
            hb_low: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CrnError> {
        if self.kd < 1 || self.kt < 1 {
            return Err(CrnError::Build("ladder heights must be at least 1".into()));
        }
        if self.pl < 1 || self.pt < 1 {
            return Err(CrnError::Build(
                "ladder populations must be at least 1".into(),
            ));
        }
        if self.u_count < 1 || self.r_count < 1 {
            return Err(CrnError::Build("U and R counts must be at least 1".into()));
        }
        if self.h_init < 0 {
            return Err(CrnError::NegativeCount("H".into(), self.h_init));
        }
        if !(self.reset_fraction > 0.0 && self.reset_fraction <= 1.0) {
            return Err(CrnError::Build(format!(
                "reset fraction {} outside (0, 1]",
                self.reset_fraction
            )));
        }
        if self.y_low >= self.y_threshold {
            return Err(CrnError::Build("y_low must be below y_threshold".into()));
        }
        if self.hb_low >= self.hb_high {
            return Err(CrnError::Build("hb_low must be below hb_high".into()));
        }
        Ok(())
    }

    pub fn detector_rungs(&self) -> Vec<String> {
        let mut r = rung_names(&self.detector_prefix, self.kd);
        r[self.kd] = "Y".into();
        r
    }

    pub fn filter_rungs(&self) -> Vec<String> {
        let mut r = rung_names(&self.filter_prefix, self.kt);
        r[self.kt] = "D".into();
        r
    }

    /// `(alias, rung species it names)` for the two top rungs.
    pub fn alias_map(&self) -> Vec<(String, String)> {
        vec![
            ("Y".into(), format!("{}{}", self.detector_prefix, self.kd)),
            ("D".into(), format!("{}{}", self.filter_prefix, self.kt)),
        ]
    }

    pub fn predicates(&self) -> PredicateConfig {
        PredicateConfig {
            detector_rungs: self.detector_rungs(),
            reset_cut: self.reset_cut,
            reset_fraction: self.reset_fraction,
            y_species: "Y".into(),
            y_threshold: self.y_threshold,
            y_low: self.y_low,
            d_species: "D".into(),
            d_threshold: self.d_threshold,
            h_species: "H".into(),
            hb_high: self.hb_high,
            hb_low: self.hb_low,
            tau: None,
        }
    }
}

/// Absence Detector (reset by `H`) feeding a Threshold Filter (driven by `Y`,
/// reset by `R`). Starts in the reset configuration.
pub fn build_mwt(cfg: &MwtConfig) -> Result<Model, CrnError> {
    cfg.validate()?;
    let det = cfg.detector_rungs();
    let fil = cfg.filter_rungs();
    let mut reactions = ladder_reactions(&det, Some("U"), Some("H"), 1.0, 1.0);
    reactions.extend(ladder_reactions(&fil, Some("Y"), Some("R"), 1.0, 1.0));
    let mut names = det.clone();
    names.extend(fil.iter().cloned());
    names.extend(["U", "H", "R"].map(String::from));
    let crn = Crn::from_names(names, reactions, 1.0)?;
    let init = crn.state(&[
        (&det[0], cfg.pl),
        (&fil[0], cfg.pt),
        ("U", cfg.u_count),
        ("R", cfg.r_count),
        ("H", cfg.h_init),
    ])?;
    Ok(Model { crn, init })
}

/// Heartbeat that is no longer replenished: `H -(k2)-> 0`.
pub fn build_heartbeat_decay(k2: f64, h_init: i64) -> Result<Model, CrnError> {
    let crn = Crn::new(&["H"], vec![NamedReaction::new(&[("H", 1)], &[], k2)], 1.0)?;
    let init = crn.state(&[("H", h_init)])?;
    Ok(Model { crn, init })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorConfig {
    pub k: f64,
    pub k2: f64,
    pub k_recovery: f64,
    pub init_a: i64,
    pub init_b: i64,
    pub init_c: i64,
    pub tau: Option<f64>,
}

impl OscillatorConfig {
    pub fn new(init_a: i64, init_b: i64, init_c: i64) -> Self {
        OscillatorConfig {
            k: 1.0,
            k2: 0.1,
            k_recovery: 0.1,
            init_a,
            init_b,
            init_c,
            tau: None,
        }
    }

    /// Splits `total` by integer percentages; the remainder goes to `A`.
    pub fn split(total: i64, percent: [i64; 3]) -> Result<Self, CrnError> {
        if percent.iter().sum::<i64>() != 100 || percent.iter().any(|&p| p < 0) {
            return Err(CrnError::Build(format!(
                "split {percent:?} must be nonnegative and sum to 100"
            )));
        }
        let b = total * percent[1] / 100;
        let c = total * percent[2] / 100;
        Ok(Self::new(total - b - c, b, c))
    }

    pub fn total(&self) -> i64 {
        self.init_a + self.init_b + self.init_c
    }

    pub fn validate(&self) -> Result<(), CrnError> {
        for rate in [self.k, self.k2, self.k_recovery] {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(CrnError::InvalidRate(rate));
            }
        }
        for (n, c) in [("A", self.init_a), ("B", self.init_b), ("C", self.init_c)] {
            if c < 0 {
                return Err(CrnError::NegativeCount(n.into(), c));
            }
        }
        if self.total() < 1 {
            return Err(CrnError::Build(
                "oscillator needs at least one molecule".into(),
            ));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return Err(CrnError::Build(format!("tau must be nonnegative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| default_tau(self.total()))
    }
}

pub fn default_tau(total: i64) -> f64 {
    let x = 0.1 * total as f64;
    x * x
}

/// Three-phase Lotka-Volterra oscillator, optionally emitting and decaying
/// heartbeat `H`.
pub fn build_oscillator(cfg: &OscillatorConfig, with_heartbeat: bool) -> Result<Model, CrnError> {
    cfg.validate()?;
    let mut reactions = vec![
        if with_heartbeat {
            NamedReaction::new(&[("A", 1), ("B", 1)], &[("B", 2), ("H", 1)], cfg.k)
        } else {
            NamedReaction::new(&[("A", 1), ("B", 1)], &[("B", 2)], cfg.k)
        },
        NamedReaction::new(&[("B", 1), ("C", 1)], &[("C", 2)], cfg.k),
        NamedReaction::new(&[("C", 1), ("A", 1)], &[("A", 2)], cfg.k),
    ];
    let mut names = vec!["A", "B", "C"];
    if with_heartbeat {
        reactions.push(NamedReaction::new(&[("H", 1)], &[], cfg.k2));
        names.push("H");
    }
    let crn = Crn::new(&names, reactions, 1.0)?;
    let init = crn.state(&[("A", cfg.init_a), ("B", cfg.init_b), ("C", cfg.init_c)])?;
    Ok(Model { crn, init })
}

/// Alarm-driven recovery: `D` catalyzes `A -> B -> C -> A`.
pub fn build_recovery(cfg: &OscillatorConfig) -> Result<Crn, CrnError> {
    cfg.validate()?;
    Crn::new(
        &["A", "B", "C", "D"],
        vec![
            NamedReaction::new(&[("D", 1), ("A", 1)], &[("D", 1), ("B", 1)], cfg.k),
            NamedReaction::new(&[("D", 1), ("B", 1)], &[("D", 1), ("C", 1)], cfg.k),
            NamedReaction::new(&[("D", 1), ("C", 1)], &[("D", 1), ("A", 1)], cfg.k_recovery),
        ],
        1.0,
    )
}

/// Oscillator with heartbeat, watchdog and recovery merged on shared `H`
/// and `D`.
pub fn build_composed(osc: &OscillatorConfig, mwt: &MwtConfig) -> Result<Model, CrnError> {
    let o = build_oscillator(osc, true)?;
    let w = build_mwt(mwt)?;
    let rec = build_recovery(osc)?;
    let crn = Crn::merge(&[&o.crn, &w.crn, &rec])?;
    let mut init = crn.project_state(&o.crn, &o.init, 0);
    let from_mwt = crn.project_state(&w.crn, &w.init, 0);
    for name in w.crn.species_names() {
        let i = crn.index_of(name).unwrap();
        if name != "H" {
            init.0[i] = from_mwt.0[i];
        }
    }
    let h = crn.require("H")?;
    init.0[h] = o.init.0[o.crn.require("H")?] + mwt.h_init;
    Ok(Model { crn, init })
}

pub fn healthy_counts(a: i64, b: i64, c: i64, tau: f64) -> bool {
    if a <= 0 || b <= 0 || c <= 0 {
        return false;
    }
    let (a, b, c) = (a as f64, b as f64, c as f64);
    (a - b).powi(2) + (b - c).powi(2) + (c - a).powi(2) > tau
}

pub fn healthy(crn: &Crn, state: &State, tau: f64) -> Result<bool, CrnError> {
    crn.check_state(state)?;
    let get = |n: &str| crn.require(n).map(|i| state.0[i]);
    Ok(healthy_counts(get("A")?, get("B")?, get("C")?, tau))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstPassage {
    pub mean: f64,
    /// `(t, P(top rung reached by t))` on the requested grid.
    pub cdf: Vec<(f64, f64)>,
}

/// Mean single-molecule time to the top rung by first-step analysis, and its
/// distribution function on `grid`.
pub fn ladder_first_passage(spec: &LadderSpec, grid: &[f64]) -> Result<FirstPassage, CtmcError> {
    spec.validate()?;
    let (u, r) = (spec.u, spec.r);
    // T_i = a_i + b_i T_0, solved from the top rung down.
    let (mut a, mut b) = (0.0, 0.0);
    for _ in (1..spec.k).rev() {
        let out = u + r;
        let na = 1.0 / out + u / out * a;
        let nb = u / out * b + r / out;
        a = na;
        b = nb;
    }
    let mean = (1.0 / u + a) / (1.0 - b);
    let single = unary_ladder(&LadderSpec {
        p: 1,
        ..spec.clone()
    })?;
    let ctmc = Ctmc::enumerate(&single.crn, &single.init, &ExploreCaps::default())?;
    let top = ctmc.label(|s| s[spec.k] == 1);
    let mut cdf = Vec::with_capacity(grid.len());
    for &t in grid {
        cdf.push((t, ctmc.prob_eventually_bounded(&top, t)?.at(0)));
    }
    Ok(FirstPassage { mean, cdf })
}

/// Long-run single-molecule occupancy of each rung.
pub fn ladder_stationary(spec: &LadderSpec) -> Vec<f64> {
    let (u, r, k) = (spec.u, spec.r, spec.k);
    let mut pi = vec![0.0; k + 1];
    pi[0] = r / (u + r);
    for i in 1..k {
        pi[i] = pi[i - 1] * u / (u + r);
    }
    pi[k] = pi[k - 1] * u / r;
    let s: f64 = pi.iter().sum();
    pi.iter().map(|x| x / s).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdTime {
    At(f64),
    /// The long-run occupancy never meets the target.
    Unreachable,
    /// Reachable in the limit but not by the end of the scanned grid.
    BeyondHorizon(f64),
}

/// `P(X >= m)` for `X ~ Binomial(p, q)`.
pub fn binomial_tail(p: i64, q: f64, m: i64) -> f64 {
    if m <= 0 {
        return 1.0;
    }
    if m > p {
        return 0.0;
    }
    let q = q.clamp(0.0, 1.0);
    Binomial::new(q, p as u64)
        .map(|b| b.sf((m - 1) as u64))
        .unwrap_or(0.0)
}

/// Least grid time at which at least `ceil(theta * p)` molecules sit on the
/// top rung simultaneously with probability `confidence`, treating the `p`
/// molecules as independent single-molecule ladders.
pub fn fraction_threshold_time(
    spec: &LadderSpec,
    theta: f64,
    confidence: f64,
    step: f64,
    t_max: f64,
) -> Result<ThresholdTime, CtmcError> {
    spec.validate()?;
    if !(theta > 0.0 && theta <= 1.0) || !(confidence > 0.0 && confidence < 1.0) || !(step > 0.0) {
        return Err(CtmcError::Numerical(
            "theta must be in (0,1], confidence in (0,1), step > 0".into(),
        ));
    }
    let x = theta * spec.p as f64;
    let need = if (x - x.round()).abs() < 1e-9 {
        x.round()
    } else {
        x.ceil()
    }
    .max(1.0) as i64;
    let limit = ladder_stationary(spec)[spec.k];
    if binomial_tail(spec.p, limit, need) < confidence {
        return Ok(ThresholdTime::Unreachable);
    }
    let single = unary_ladder(&LadderSpec {
        p: 1,
        ..spec.clone()
    })?;
    let ctmc = Ctmc::enumerate(&single.crn, &single.init, &ExploreCaps::default())?;
    let top = ctmc.index_of(&{
        let mut s = vec![0; spec.k + 1];
        s[spec.k] = 1;
        s
    });
    let top = top.expect("top rung reachable");
    let mut p = ctmc.transient(0.0)?.values;
    let n = (t_max / step).floor() as usize;
    for i in 0..=n {
        if i > 0 {
            p = ctmc.transient_from(p, step)?.values;
        }
        if binomial_tail(spec.p, p[top], need) >= confidence {
            return Ok(ThresholdTime::At(i as f64 * step));
        }
    }
    Ok(ThresholdTime::BeyondHorizon(t_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_ladder_shape() {
        let m = unary_ladder(&LadderSpec::new(2, 1.0, 1.0, 7)).unwrap();
        assert_eq!(m.crn.num_species(), 3);
        assert_eq!(m.crn.reactions().len(), 4);
        assert_eq!(m.init.0, vec![7, 0, 0]);
        let one = unary_ladder(&LadderSpec::new(1, 2.0, 3.0, 1)).unwrap();
        assert_eq!(one.crn.to_string(), "X0 ->{2} X1\nX1 ->{3} X0\n");
        assert!(unary_ladder(&LadderSpec::new(0, 1.0, 1.0, 1)).is_err());
        assert!(unary_ladder(&LadderSpec::new(2, 0.0, 1.0, 1)).is_err());
    }

    #[test]
    fn catalyzed_ladder_matches_unary_rates() {
        let spec = LadderSpec::new(2, 1.0, 1.0, 1);
        let cat = catalyzed_ladder(&spec, ("U", 3), ("R", 2)).unwrap();
        assert_eq!(cat.crn.reactions().len(), 4);
        assert!(cat.crn.reactions().iter().all(|r| r.rate == 1.0));
        let uni = unary_ladder(&LadderSpec::new(2, 3.0, 2.0, 1)).unwrap();
        let a = Ctmc::enumerate(&cat.crn, &cat.init, &ExploreCaps::default()).unwrap();
        let b = Ctmc::enumerate(&uni.crn, &uni.init, &ExploreCaps::default()).unwrap();
        assert_eq!(a.num_states(), b.num_states());
        for s in 0..a.num_states() {
            let x: Vec<_> = a.successors(s).collect();
            let y: Vec<_> = b.successors(s).collect();
            assert_eq!(x, y);
        }
        assert!(catalyzed_ladder(&spec, ("X1", 1), ("R", 1)).is_err());
        assert!(catalyzed_ladder(&spec, ("U", 1), ("U", 1)).is_err());
    }

    #[test]
    fn mwt_shape() {
        let cfg = MwtConfig::new(3, 50, 4, 50, 10, 5);
        let m = build_mwt(&cfg).unwrap();
        assert_eq!(m.crn.reactions().len(), 14);
        let y = m.crn.require("Y").unwrap();
        let as_reset_source = m
            .crn
            .reactions()
            .iter()
            .filter(|r| r.reactants.iter().any(|&(s, _)| s == y));
        // three reset reactions on the detector's top rung side plus four filter climbs
        assert_eq!(as_reset_source.count(), 1 + 4);
        assert_eq!(m.init.0[m.crn.require("L0").unwrap()], 50);
        assert_eq!(m.init.0[m.crn.require("T0").unwrap()], 50);
        assert_eq!(cfg.alias_map()[0], ("Y".to_string(), "L3".to_string()));
        assert_eq!(
            (cfg.y_threshold, cfg.y_low, cfg.d_threshold, cfg.reset_cut),
            (25, 5, 25, 1)
        );
        let mut bad = cfg.clone();
        bad.u_count = 0;
        assert!(build_mwt(&bad).is_err());
    }

    #[test]
    fn oscillator_and_recovery() {
        let cfg = OscillatorConfig::split(1000, [80, 10, 10]).unwrap();
        let m = build_oscillator(&cfg, true).unwrap();
        assert_eq!(m.crn.reactions().len(), 4);
        assert_eq!(m.init.0, vec![800, 100, 100, 0]);
        for i in 0..3 {
            let d: i64 = m.crn.reactions()[i]
                .net_change()
                .iter()
                .filter(|(s, _)| *s < 3)
                .map(|(_, d)| d)
                .sum();
            assert_eq!(d, 0);
        }
        let plain = build_oscillator(&cfg, false).unwrap();
        assert_eq!(plain.crn.num_species(), 3);
        let rec = build_recovery(&cfg).unwrap();
        assert_eq!(rec.reactions().len(), 3);
        let dd = rec.require("D").unwrap();
        assert!(rec
            .reactions()
            .iter()
            .all(|r| r.net_change().iter().all(|&(s, _)| s != dd)));
        let gated = rec.state(&[("A", 5), ("B", 5), ("C", 5)]).unwrap();
        assert!((0..3).all(|i| rec.propensity(i, &gated).unwrap() == 0.0));
        let s = rec.state(&[("D", 1), ("C", 1)]).unwrap();
        assert_eq!(
            rec.apply_reaction(2, &s).unwrap(),
            rec.state(&[("D", 1), ("A", 1)]).unwrap()
        );
    }

    #[test]
    fn composed_shares_h_and_d() {
        let osc = OscillatorConfig::split(300, [80, 10, 10]).unwrap();
        let m = build_composed(&osc, &MwtConfig::new(3, 10, 3, 10, 2, 2)).unwrap();
        let names: Vec<&str> = m.crn.species_names().collect();
        assert_eq!(names.iter().filter(|&&n| n == "H").count(), 1);
        assert_eq!(names.iter().filter(|&&n| n == "D").count(), 1);
        assert_eq!(m.crn.reactions().len(), 4 + 12 + 3);
        assert_eq!(m.init.0[m.crn.require("A").unwrap()], 240);
        assert_eq!(m.init.0[m.crn.require("L0").unwrap()], 10);
    }

    #[test]
    fn healthy_predicate() {
        assert!(!healthy_counts(10, 0, 5, 0.0));
        assert!(!healthy_counts(50, 50, 50, 1.0));
        assert!(healthy_counts(80, 10, 10, 100.0));
        let crn = Crn::new(&["A", "B"], vec![], 1.0).unwrap();
        assert!(healthy(&crn, &State(vec![1, 1]), 0.0).is_err());
    }

    #[test]
    fn first_passage_means() {
        let fp = ladder_first_passage(&LadderSpec::new(1, 1.0, 5.0, 1), &[0.0]).unwrap();
        assert!((fp.mean - 1.0).abs() < 1e-12);
        assert_eq!(fp.cdf[0].1, 0.0);
        let fp = ladder_first_passage(&LadderSpec::new(2, 1.0, 1.0, 1), &[1.0, 5.0]).unwrap();
        assert!((fp.mean - 3.0).abs() < 1e-12);
        assert!(fp.cdf[0].1 < fp.cdf[1].1);
    }

    #[test]
    fn threshold_time_edges() {
        let spec = LadderSpec::new(2, 1.0, 1.0, 1);
        let conf = 0.2;
        let ThresholdTime::At(t) = fraction_threshold_time(&spec, 1.0, conf, 0.01, 50.0).unwrap()
        else {
            panic!("expected a time")
        };
        let single = unary_ladder(&spec).unwrap();
        let c = Ctmc::enumerate(&single.crn, &single.init, &ExploreCaps::default()).unwrap();
        let top = c.index_of(&[0, 0, 1]).unwrap();
        assert!(c.transient(t).unwrap().at(top) >= conf);
        assert!(c.transient(t - 0.01).unwrap().at(top) < conf);
        // any positive fraction still needs one molecule on top
        let big = LadderSpec::new(2, 1.0, 1.0, 100);
        assert_eq!(
            fraction_threshold_time(&big, 1e-6, 0.9, 0.1, 10.0).unwrap(),
            fraction_threshold_time(&big, 0.01, 0.9, 0.1, 10.0).unwrap()
        );
        // stationary top occupancy is 1/4 here, so 90% of 100 molecules never co-occur
        assert_eq!(
            fraction_threshold_time(&LadderSpec::new(2, 1.0, 1.0, 100), 0.9, 0.5, 0.1, 10.0)
                .unwrap(),
            ThresholdTime::Unreachable
        );
    }

    #[test]
    fn stationary_occupancy() {
        let pi = ladder_stationary(&LadderSpec::new(2, 1.0, 1.0, 1));
        for (x, y) in pi.iter().zip([0.5, 0.25, 0.25]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
