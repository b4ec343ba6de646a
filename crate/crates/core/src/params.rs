//! Client requirements, the watchdog's internal goal parameters, the eleven
//! refinement constraints linking them, and a synthesizer that derives a
//! satisfying internal assignment from client inputs.

use std::fmt;

use crate::kv::{parse_kv, KvMap};

/// Synthesized survival probabilities are raised by this much so that
/// equalities survive floating-point rounding.
pub const BACKOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClientPolytope {
    pub u: f64,
    pub v: f64,
    pub eps: f64,
    pub delta: f64,
    pub pulse_min: i64,
    pub pulse_max: i64,
}

impl ClientPolytope {
    pub fn new(u: f64, v: f64, eps: f64, delta: f64) -> Self {
        ClientPolytope {
            u,
            v,
            eps,
            delta,
            pulse_min: 1,
            pulse_max: 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.u > 0.0 && self.u < self.v && self.v.is_finite()) {
            return Err(format!("need 0 < u < v, got u={} v={}", self.u, self.v));
        }
        for (n, p) in [("eps", self.eps), ("delta", self.delta)] {
            if !(0.0..1.0).contains(&p) {
                return Err(format!("{n} must be in [0, 1), got {p}"));
            }
        }
        if self.pulse_min < 1 || self.pulse_min > self.pulse_max {
            return Err(format!(
                "need 1 <= pulse_min <= pulse_max, got {}..{}",
                self.pulse_min, self.pulse_max
            ));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::new();
        for (k, v) in [
            ("u", self.u),
            ("v", self.v),
            ("eps", self.eps),
            ("delta", self.delta),
        ] {
            m.insert(k.into(), fmt_f64(v));
        }
        m.insert("pulse_min".into(), self.pulse_min.to_string());
        m.insert("pulse_max".into(), self.pulse_max.to_string());
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, String> {
        let num = |k: &str| -> Result<f64, String> {
            let v = m.get(k).ok_or_else(|| format!("missing `{k}`"))?;
            v.parse()
                .map_err(|_| format!("`{k}`: `{v}` is not a number"))
        };
        let int = |k: &str| -> Result<i64, String> {
            match m.get(k) {
                None => Ok(1),
                Some(v) => v
                    .parse()
                    .map_err(|_| format!("`{k}`: `{v}` is not an integer")),
            }
        };
        let c = ClientPolytope {
            u: num("u")?,
            v: num("v")?,
            eps: num("eps")?,
            delta: num("delta")?,
            pulse_min: int("pulse_min")?,
            pulse_max: int("pulse_max")?,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Probabilities and time bounds introduced while refining the client goal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InternalParams {
    pub eps1: f64,
    pub eps2: f64,
    pub eps1p: f64,
    pub eps2p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta1: f64,
    pub delta1p: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub w_a: f64,
    pub w_h: f64,
    pub g: f64,
    pub w_on: f64,
    pub w_off: f64,
    pub w_th: f64,
}

const PROB_FIELDS: [&str; 17] = [
    "eps1", "eps2", "eps1p", "eps2p", "alpha", "beta", "delta1", "delta1p", "gamma1", "gamma2",
    "eta1", "eta2", "eta3", "eta4", "lambda1", "lambda2", "lambda3",
];
const TIME_FIELDS: [&str; 6] = ["w_a", "w_h", "g", "w_on", "w_off", "w_th"];

impl InternalParams {
    pub fn field_names() -> impl Iterator<Item = &'static str> {
        PROB_FIELDS.into_iter().chain(TIME_FIELDS)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.clone().slot_mut(name).map(|x| *x)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        let slot = self
            .slot_mut(name)
            .ok_or_else(|| format!("unknown parameter `{name}`"))?;
        *slot = value;
        Ok(())
    }

    fn slot_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "eps1" => &mut self.eps1,
            "eps2" => &mut self.eps2,
            "eps1p" => &mut self.eps1p,
            "eps2p" => &mut self.eps2p,
            "alpha" => &mut self.alpha,
            "beta" => &mut self.beta,
            "delta1" => &mut self.delta1,
            "delta1p" => &mut self.delta1p,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "eta1" => &mut self.eta1,
            "eta2" => &mut self.eta2,
            "eta3" => &mut self.eta3,
            "eta4" => &mut self.eta4,
            "lambda1" => &mut self.lambda1,
            "lambda2" => &mut self.lambda2,
            "lambda3" => &mut self.lambda3,
            "w_a" => &mut self.w_a,
            "w_h" => &mut self.w_h,
            "g" => &mut self.g,
            "w_on" => &mut self.w_on,
            "w_off" => &mut self.w_off,
            "w_th" => &mut self.w_th,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        for n in PROB_FIELDS {
            let p = self.get(n).unwrap();
            if !(0.0..1.0).contains(&p) {
                return Err(format!("{n} must be in [0, 1), got {p}"));
            }
        }
        for n in TIME_FIELDS {
            let t = self.get(n).unwrap();
            if !(t >= 0.0) || !t.is_finite() {
                return Err(format!("{n} must be a nonnegative time, got {t}"));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        Self::field_names()
            .map(|n| (n.to_string(), fmt_f64(self.get(n).unwrap())))
            .collect()
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, String> {
        let mut p = InternalParams::default();
        for (k, v) in m {
            let x: f64 = v
                .parse()
                .map_err(|_| format!("`{k}`: `{v}` is not a number"))?;
            p.set(k, x)?;
        }
        for n in Self::field_names() {
            if !m.contains_key(n) {
                return Err(format!("missing `{n}`"));
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        Self::from_kv(&parse_kv(text).map_err(|e| e.to_string())?)
    }
}

/// Error budgets and time bounds of the oscillator heartbeat properties.
#[derive(Debug, Clone, PartialEq)]
pub struct HeartbeatGoalParams {
    pub delta: [f64; 5],
    pub t: [f64; 4],
    pub hb_high: i64,
    pub hb_low: i64,
}

impl Default for HeartbeatGoalParams {
    fn default() -> Self {
        HeartbeatGoalParams {
            delta: [0.05; 5],
            t: [1.0; 4],
            hb_high: 5,
            hb_low: 1,
        }
    }
}

impl HeartbeatGoalParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.delta.iter().any(|d| !(0.0..1.0).contains(d)) {
            return Err("heartbeat error budgets must be in [0, 1)".into());
        }
        if self.t.iter().any(|t| !(*t >= 0.0)) {
            return Err("heartbeat time bounds must be nonnegative".into());
        }
        if self.hb_low >= self.hb_high {
            return Err("hb_low must be below hb_high".into());
        }
        Ok(())
    }
}

/// A violated constraint `left <= right` (or `left < right` when strict).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub id: u8,
    pub left: f64,
    pub right: f64,
    pub strict: bool,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.strict { "<" } else { "<=" };
        write!(
            f,
            "constr{}: {} {op} {} fails ({})",
            self.id,
            self.left,
            self.right,
            CONSTRAINT_TEXT[self.id as usize - 1]
        )
    }
}

pub const CONSTRAINT_TEXT: [&str; 11] = [
    "(1-eps1) <= (1-beta)(1-eps1p)",
    "1-eps2 <= 1-eps2p",
    "w_h <= g",
    "1-delta1 <= (1-alpha)(1-beta)(1-delta1p)",
    "1-eps <= 1-gamma1-gamma2",
    "(1-eps1p)(1-eps2p) <= (1-lambda1)(1-lambda2)(1-lambda3)(1-gamma1)",
    "g-w_h >= w_on+w_off",
    "gamma1 < 1",
    "1-eps1p <= (1-lambda1)(1-lambda2)",
    "1-eps2p <= 1-lambda3",
    "1-delta1p <= (1-eta1)(1-eta2)(1-eta3)(1-eta4)",
];

/// Every constraint as `(id, left, right, strict)`.
pub fn constraint_sides(p: &InternalParams, c: &ClientPolytope) -> [(u8, f64, f64, bool); 11] {
    let s = |x: f64| 1.0 - x;
    [
        (1, s(p.eps1), s(p.beta) * s(p.eps1p), false),
        (2, s(p.eps2), s(p.eps2p), false),
        (3, p.w_h, p.g, false),
        (4, s(p.delta1), s(p.alpha) * s(p.beta) * s(p.delta1p), false),
        (5, s(c.eps), 1.0 - p.gamma1 - p.gamma2, false),
        (
            6,
            s(p.eps1p) * s(p.eps2p),
            s(p.lambda1) * s(p.lambda2) * s(p.lambda3) * s(p.gamma1),
            false,
        ),
        (7, p.w_on + p.w_off, p.g - p.w_h, false),
        (8, p.gamma1, 1.0, true),
        (9, s(p.eps1p), s(p.lambda1) * s(p.lambda2), false),
        (10, s(p.eps2p), s(p.lambda3), false),
        (
            11,
            s(p.delta1p),
            s(p.eta1) * s(p.eta2) * s(p.eta3) * s(p.eta4),
            false,
        ),
    ]
}

/// Violated constraints in id order; empty means the assignment satisfies
/// all eleven. Comparisons are exact.
pub fn validate_constraints(p: &InternalParams, c: &ClientPolytope) -> Vec<Violation> {
    constraint_sides(p, c)
        .into_iter()
        .filter(|&(_, l, r, strict)| if strict { !(l < r) } else { !(l <= r) })
        .map(|(id, left, right, strict)| Violation {
            id,
            left,
            right,
            strict,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    InvalidClient(String),
    Infeasible {
        constraint: Option<u8>,
        reason: String,
    },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::InvalidClient(m) => write!(f, "invalid client: {m}"),
            SynthError::Infeasible {
                constraint: Some(id),
                reason,
            } => write!(f, "infeasible at constr{id}: {reason}"),
            SynthError::Infeasible {
                constraint: None,
                reason,
            } => write!(f, "infeasible: {reason}"),
        }
    }
}

impl std::error::Error for SynthError {}

/// Survival `x`, raised by [`BACKOFF`] and capped at 1.
fn up(x: f64) -> f64 {
    if x >= 1.0 {
        1.0
    } else {
        (x + BACKOFF).min(1.0)
    }
}

/// Deterministic even split of the client's error budgets in log space, with
/// time bounds as fixed fractions of the client delays.
pub fn synthesize(client: &ClientPolytope) -> Result<InternalParams, SynthError> {
    if client.eps == 1.0 || client.delta == 1.0 {
        return Err(SynthError::Infeasible {
            constraint: None,
            reason: "an error budget of 1 leaves no probability to distribute".into(),
        });
    }
    client.validate().map_err(SynthError::InvalidClient)?;
    let surv_eps = 1.0 - client.eps;
    let surv_delta = 1.0 - client.delta;

    let s_eps1 = surv_eps.sqrt();
    let s_eps2 = s_eps1;
    let mut gamma = client.eps / 2.0;
    if 1.0 - gamma - gamma < surv_eps {
        gamma = (gamma - BACKOFF).max(0.0);
    }
    let s_beta = s_eps1.sqrt().max(surv_delta.cbrt());
    let s_eps1p = up(s_eps1 / s_beta);
    let s_eps2p = s_eps2;
    let s_alpha = up((surv_delta / s_beta).sqrt());
    let s_delta1p = s_alpha;
    let c6 = s_eps1p * s_eps2p / (1.0 - gamma);
    let s_l3 = up(s_eps2p.max(c6.cbrt()));
    let s_l12 = s_eps1p.max(c6 / s_l3);
    let s_l = up(s_l12.sqrt());
    let s_eta = up(s_delta1p.powf(0.25));

    let w_h = 0.1 * client.u;
    let g = 0.5 * client.u;
    let w_on = (g - w_h) / 2.0;
    let w_ath = 0.1 * (client.v - client.u);
    let p = InternalParams {
        eps1: 1.0 - s_eps1,
        eps2: 1.0 - s_eps2,
        eps1p: 1.0 - s_eps1p,
        eps2p: 1.0 - s_eps2p,
        alpha: 1.0 - s_alpha,
        beta: 1.0 - s_beta,
        delta1: client.delta,
        delta1p: 1.0 - s_delta1p,
        gamma1: gamma,
        gamma2: gamma,
        eta1: 1.0 - s_eta,
        eta2: 1.0 - s_eta,
        eta3: 1.0 - s_eta,
        eta4: 1.0 - s_eta,
        lambda1: 1.0 - s_l,
        lambda2: 1.0 - s_l,
        lambda3: 1.0 - s_l3,
        w_a: w_ath,
        w_h,
        g,
        w_on,
        w_off: w_on,
        w_th: w_ath,
    };
    if let Some(v) = validate_constraints(&p, client).first() {
        return Err(SynthError::Infeasible {
            constraint: Some(v.id),
            reason: v.to_string(),
        });
    }
    Ok(p)
}

/// Shortest round-tripping decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_assignment() -> InternalParams {
        InternalParams {
            g: 1.0,
            w_on: 0.4,
            w_off: 0.4,
            ..Default::default()
        }
    }

    fn zero_client() -> ClientPolytope {
        ClientPolytope::new(1.0, 2.0, 0.0, 0.0)
    }

    #[test]
    fn zero_error_assignment_is_accepted() {
        assert!(validate_constraints(&zero_assignment(), &zero_client()).is_empty());
    }

    #[test]
    fn targeted_violations() {
        let c = zero_client();
        let mut p = zero_assignment();
        p.beta = 0.5;
        p.eps1 = 0.1;
        p.eps1p = 0.1;
        let v = validate_constraints(&p, &c);
        assert_eq!(v[0].id, 1);
        assert!((v[0].left - 0.9).abs() < 1e-15 && (v[0].right - 0.45).abs() < 1e-15);

        let mut p = zero_assignment();
        p.w_h = 2.0;
        p.g = 1.0;
        assert!(validate_constraints(&p, &c).iter().any(|v| v.id == 3));
    }

    #[test]
    fn each_constraint_violated_alone() {
        let c = ClientPolytope::new(1.0, 2.0, 0.2, 0.0);
        let base = InternalParams {
            gamma1: 0.1,
            gamma2: 0.1,
            eps1: 0.5,
            eps1p: 0.5,
            eps2: 0.5,
            eps2p: 0.5,
            ..zero_assignment()
        };
        assert!(validate_constraints(&base, &c).is_empty());
        type Mutation = Box<dyn Fn(&mut InternalParams)>;
        let cases: Vec<(u8, Mutation)> = vec![
            (1, Box::new(|p| p.eps1 = 0.4)),
            (2, Box::new(|p| p.eps2p = 0.6)),
            (
                3,
                Box::new(|p| {
                    p.w_h = 1.5;
                    p.g = 1.0;
                    p.w_on = 0.0;
                    p.w_off = 0.0;
                }),
            ),
            (4, Box::new(|p| p.alpha = 0.1)),
            (5, Box::new(|p| p.gamma2 = 0.15)),
            (
                6,
                Box::new(|p| {
                    p.lambda1 = 0.5;
                    p.lambda3 = 0.5;
                }),
            ),
            (7, Box::new(|p| p.w_on = 0.7)),
            (8, Box::new(|p| p.gamma1 = 1.0)),
            (9, Box::new(|p| p.lambda1 = 0.6)),
            (10, Box::new(|p| p.lambda3 = 0.6)),
            (11, Box::new(|p| p.eta4 = 0.1)),
        ];
        let c8 = ClientPolytope::new(1.0, 2.0, 0.0, 0.0);
        for (id, f) in cases {
            let mut p = base.clone();
            f(&mut p);
            let client = if id == 8 { &c8 } else { &c };
            let ids: Vec<u8> = validate_constraints(&p, client)
                .iter()
                .map(|v| v.id)
                .collect();
            assert!(ids.contains(&id), "constr{id} not detected: {ids:?}");
            // constr3 failing forces constr7 to fail; gamma1 = 1 breaks constr5 too
            if id != 3 && id != 8 {
                assert_eq!(ids, vec![id]);
            }
        }
    }

    #[test]
    fn synthesize_zero_budget() {
        let p = synthesize(&ClientPolytope::new(10.0, 20.0, 0.0, 0.0)).unwrap();
        for n in PROB_FIELDS {
            assert_eq!(p.get(n), Some(0.0), "{n}");
        }
    }

    #[test]
    fn synthesize_worked_client() {
        let c = ClientPolytope::new(10.0, 20.0, 0.05, 0.05);
        let p = synthesize(&c).unwrap();
        assert!(validate_constraints(&p, &c).is_empty());
        assert!(p.validate().is_ok());
        assert_eq!(
            (p.w_h, p.g, p.w_on, p.w_off, p.w_a, p.w_th),
            (1.0, 5.0, 2.0, 2.0, 1.0, 1.0)
        );
        let eq = synthesize(&ClientPolytope::new(1.0, 2.0, 0.2, 0.1)).unwrap();
        assert_eq!((eq.gamma1, eq.gamma2), (0.1, 0.1));
    }

    #[test]
    fn synthesize_rejects_full_budget() {
        assert!(matches!(
            synthesize(&ClientPolytope::new(1.0, 2.0, 1.0, 0.0)),
            Err(SynthError::Infeasible { .. })
        ));
        assert!(matches!(
            synthesize(&ClientPolytope::new(2.0, 1.0, 0.0, 0.0)),
            Err(SynthError::InvalidClient(_))
        ));
    }

    #[test]
    fn kv_round_trip() {
        let c = ClientPolytope::new(10.0, 20.0, 0.05, 0.05);
        let p = synthesize(&c).unwrap();
        let text = crate::kv::write_kv(&p.to_kv());
        assert_eq!(InternalParams::from_text(&text).unwrap(), p);
        assert_eq!(ClientPolytope::from_kv(&c.to_kv()).unwrap(), c);
        assert!(InternalParams::from_text("eps1 = 0.1").is_err());
        assert!(InternalParams::from_text("bogus = 0.1").is_err());
    }

    proptest! {
        #[test]
        fn synthesis_is_sound(eps in 0.0f64..0.999, delta in 0.0f64..0.999, u in 0.1f64..100.0, span in 0.1f64..100.0) {
            let c = ClientPolytope::new(u, u + span, eps, delta);
            let p = synthesize(&c).unwrap();
            prop_assert!(validate_constraints(&p, &c).is_empty());
            prop_assert!(p.validate().is_ok());
        }

        #[test]
        fn shrinking_budgets_stays_feasible(eps in 0.0f64..0.999, delta in 0.0f64..0.999, shrink in 0.0f64..1.0) {
            let c = ClientPolytope::new(1.0, 3.0, eps * shrink, delta * shrink);
            prop_assert!(synthesize(&c).is_ok());
        }
    }
}
