use std::collections::BTreeMap;
use std::fmt;

use crate::error::CslError;

/// Arithmetic over numbers and named parameters, used for probability and
/// time bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum PExpr {
    Num(f64),
    Var(String),
    Add(Box<PExpr>, Box<PExpr>),
    Sub(Box<PExpr>, Box<PExpr>),
    Mul(Box<PExpr>, Box<PExpr>),
    Div(Box<PExpr>, Box<PExpr>),
}

pub type Env = BTreeMap<String, f64>;

impl PExpr {
    pub fn num(x: f64) -> Self {
        PExpr::Num(x)
    }

    pub fn var(name: &str) -> Self {
        PExpr::Var(name.into())
    }

    /// Numeric value; fails on any remaining parameter.
    pub fn value(&self) -> Result<f64, CslError> {
        Ok(match self {
            PExpr::Num(x) => *x,
            PExpr::Var(v) => return Err(CslError::UnboundParameter(v.clone())),
            PExpr::Add(a, b) => a.value()? + b.value()?,
            PExpr::Sub(a, b) => a.value()? - b.value()?,
            PExpr::Mul(a, b) => a.value()? * b.value()?,
            PExpr::Div(a, b) => a.value()? / b.value()?,
        })
    }

    /// Replaces every parameter found in `env` by its value, folding the
    /// result to a number when it becomes closed.
    pub fn bind(&self, env: &Env) -> Result<PExpr, CslError> {
        let bound = self.substitute(env);
        match bound.value() {
            Ok(x) => Ok(PExpr::Num(x)),
            Err(e) => Err(e),
        }
    }

    fn substitute(&self, env: &Env) -> PExpr {
        let bin = |a: &PExpr, b: &PExpr| (Box::new(a.substitute(env)), Box::new(b.substitute(env)));
        match self {
            PExpr::Num(x) => PExpr::Num(*x),
            PExpr::Var(v) => env
                .get(v)
                .map_or_else(|| PExpr::Var(v.clone()), |x| PExpr::Num(*x)),
            PExpr::Add(a, b) => {
                let (a, b) = bin(a, b);
                PExpr::Add(a, b)
            }
            PExpr::Sub(a, b) => {
                let (a, b) = bin(a, b);
                PExpr::Sub(a, b)
            }
            PExpr::Mul(a, b) => {
                let (a, b) = bin(a, b);
                PExpr::Mul(a, b)
            }
            PExpr::Div(a, b) => {
                let (a, b) = bin(a, b);
                PExpr::Div(a, b)
            }
        }
    }

    fn vars(&self, out: &mut Vec<String>) {
        match self {
            PExpr::Num(_) => {}
            PExpr::Var(v) => out.push(v.clone()),
            PExpr::Add(a, b) | PExpr::Sub(a, b) | PExpr::Mul(a, b) | PExpr::Div(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn is_binary(&self) -> bool {
        !matches!(self, PExpr::Num(_) | PExpr::Var(_))
    }
}

impl fmt::Display for PExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, e: &PExpr| {
            if e.is_binary() {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        let (a, op, b) = match self {
            PExpr::Num(x) if *x < 0.0 => return write!(f, "({x:?})"),
            PExpr::Num(x) => return write!(f, "{x:?}"),
            PExpr::Var(v) => return write!(f, "{v}"),
            PExpr::Add(a, b) => (a, "+", b),
            PExpr::Sub(a, b) => (a, "-", b),
            PExpr::Mul(a, b) => (a, "*", b),
            PExpr::Div(a, b) => (a, "/", b),
        };
        side(f, a)?;
        write!(f, "{op}")?;
        side(f, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    pub fn apply(self, x: i64) -> bool {
        match self {
            Cmp::Lt => x < 0,
            Cmp::Le => x <= 0,
            Cmp::Gt => x > 0,
            Cmp::Ge => x >= 0,
            Cmp::Eq => x == 0,
            Cmp::Ne => x != 0,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
        }
    }
}

/// Integer-weighted sum of species counts plus a constant.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: Vec<(i64, String)>,
    pub constant: i64,
}

impl LinExpr {
    pub fn species(name: &str) -> Self {
        LinExpr {
            terms: vec![(1, name.into())],
            constant: 0,
        }
    }

    pub fn constant(c: i64) -> Self {
        LinExpr {
            terms: vec![],
            constant: c,
        }
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in &self.terms {
            let (sign, mag) = if *c < 0 { ("-", -c) } else { ("+", *c) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Named {
    Healthy,
    Reset,
    ThH,
    ThL,
    Alarm,
    HPres,
    HDet,
    HbHigh,
    HbLow,
}

impl Named {
    pub const ALL: [Named; 9] = [
        Named::Healthy,
        Named::Reset,
        Named::ThH,
        Named::ThL,
        Named::Alarm,
        Named::HPres,
        Named::HDet,
        Named::HbHigh,
        Named::HbLow,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Named::Healthy => "healthy",
            Named::Reset => "Reset",
            Named::ThH => "ThH",
            Named::ThL => "ThL",
            Named::Alarm => "Alarm",
            Named::HPres => "Hpres",
            Named::HDet => "Hdet",
            Named::HbHigh => "hbHigh",
            Named::HbLow => "hbLow",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Named> {
        Named::ALL.into_iter().find(|n| n.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    True,
    False,
    Compare(LinExpr, Cmp, LinExpr),
    Named(Named),
}

/// State formulas of the time-bounded CSL fragment.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// `P>=bound [ F<=time phi ]`
    ProbEventually {
        bound: PExpr,
        time: PExpr,
        phi: Box<Formula>,
    },
    /// `P>=bound [ G<=time phi ]`
    ProbGlobally {
        bound: PExpr,
        time: PExpr,
        phi: Box<Formula>,
    },
    /// `P>=bound [ (phi) W (psi) ]`
    ProbWeakUntil {
        bound: PExpr,
        phi: Box<Formula>,
        psi: Box<Formula>,
    },
    /// `P>=1 [ G phi ]`: `phi` at every reachable state.
    GloballyAll(Box<Formula>),
}

impl Formula {
    pub fn named(n: Named) -> Self {
        Formula::Atom(Atom::Named(n))
    }

    pub fn tt() -> Self {
        Formula::Atom(Atom::True)
    }

    pub fn ff() -> Self {
        Formula::Atom(Atom::False)
    }

    pub fn cmp(lhs: LinExpr, op: Cmp, rhs: LinExpr) -> Self {
        Formula::Atom(Atom::Compare(lhs, op, rhs))
    }

    /// `#species op value`
    pub fn count(species: &str, op: Cmp, value: i64) -> Self {
        Formula::cmp(LinExpr::species(species), op, LinExpr::constant(value))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn eventually(bound: f64, time: f64, phi: Formula) -> Self {
        Formula::ProbEventually {
            bound: PExpr::Num(bound),
            time: PExpr::Num(time),
            phi: Box::new(phi),
        }
    }

    pub fn globally(bound: f64, time: f64, phi: Formula) -> Self {
        Formula::ProbGlobally {
            bound: PExpr::Num(bound),
            time: PExpr::Num(time),
            phi: Box::new(phi),
        }
    }

    pub fn weak_until(bound: f64, phi: Formula, psi: Formula) -> Self {
        Formula::ProbWeakUntil {
            bound: PExpr::Num(bound),
            phi: Box::new(phi),
            psi: Box::new(psi),
        }
    }

    pub fn always(phi: Formula) -> Self {
        Formula::GloballyAll(Box::new(phi))
    }

    /// Conjunction of all items (`true` when empty).
    pub fn all(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or_else(Formula::tt)
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(
            self,
            Formula::ProbEventually { .. }
                | Formula::ProbGlobally { .. }
                | Formula::ProbWeakUntil { .. }
                | Formula::GloballyAll(_)
        )
    }

    /// Deepest nesting of probabilistic operators.
    pub fn prob_depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(a) => a.prob_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.prob_depth().max(b.prob_depth())
            }
            Formula::ProbEventually { phi, .. }
            | Formula::ProbGlobally { phi, .. }
            | Formula::GloballyAll(phi) => 1 + phi.prob_depth(),
            Formula::ProbWeakUntil { phi, psi, .. } => 1 + phi.prob_depth().max(psi.prob_depth()),
        }
    }

    /// Largest time bound of any operator (after binding).
    pub fn max_time(&self) -> Result<f64, CslError> {
        Ok(match self {
            Formula::Atom(_) => 0.0,
            Formula::Not(a) => a.max_time()?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.max_time()?.max(b.max_time()?)
            }
            Formula::ProbEventually { time, phi, .. } | Formula::ProbGlobally { time, phi, .. } => {
                time.value()?.max(phi.max_time()?)
            }
            Formula::ProbWeakUntil { phi, psi, .. } => phi.max_time()?.max(psi.max_time()?),
            Formula::GloballyAll(phi) => phi.max_time()?,
        })
    }

    /// Parameters that still appear in bounds.
    pub fn free_params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_exprs(&mut |e| e.vars(&mut out));
        out.sort();
        out.dedup();
        out
    }

    fn visit_exprs(&self, f: &mut dyn FnMut(&PExpr)) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(a) | Formula::GloballyAll(a) => a.visit_exprs(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
            Formula::ProbEventually { bound, time, phi }
            | Formula::ProbGlobally { bound, time, phi } => {
                f(bound);
                f(time);
                phi.visit_exprs(f);
            }
            Formula::ProbWeakUntil { bound, phi, psi } => {
                f(bound);
                phi.visit_exprs(f);
                psi.visit_exprs(f);
            }
        }
    }

    /// Substitutes parameters from `env`; every parameter must be bound and
    /// every bound must land in range.
    pub fn bind(&self, env: &Env) -> Result<Formula, CslError> {
        let b = |f: &Formula| f.bind(env).map(Box::new);
        let prob = |e: &PExpr| -> Result<PExpr, CslError> {
            let e = e.bind(env)?;
            check_bound(e.value()?)?;
            Ok(e)
        };
        let time = |e: &PExpr| -> Result<PExpr, CslError> {
            let e = e.bind(env)?;
            check_time(e.value()?)?;
            Ok(e)
        };
        Ok(match self {
            Formula::Atom(a) => Formula::Atom(a.clone()),
            Formula::Not(a) => Formula::Not(b(a)?),
            Formula::And(x, y) => Formula::And(b(x)?, b(y)?),
            Formula::Or(x, y) => Formula::Or(b(x)?, b(y)?),
            Formula::Implies(x, y) => Formula::Implies(b(x)?, b(y)?),
            Formula::ProbEventually {
                bound,
                time: t,
                phi,
            } => Formula::ProbEventually {
                bound: prob(bound)?,
                time: time(t)?,
                phi: b(phi)?,
            },
            Formula::ProbGlobally {
                bound,
                time: t,
                phi,
            } => Formula::ProbGlobally {
                bound: prob(bound)?,
                time: time(t)?,
                phi: b(phi)?,
            },
            Formula::ProbWeakUntil { bound, phi, psi } => Formula::ProbWeakUntil {
                bound: prob(bound)?,
                phi: b(phi)?,
                psi: b(psi)?,
            },
            Formula::GloballyAll(a) => Formula::GloballyAll(b(a)?),
        })
    }

    /// Checks that the formula is closed and its bounds are in range.
    pub fn check_closed(&self) -> Result<(), CslError> {
        self.bind(&Env::new()).map(|_| ())
    }
}

pub(crate) fn check_bound(p: f64) -> Result<(), CslError> {
    // tolerate rounding from arithmetic such as 1 - (1 - x)
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(CslError::BadBound(p));
    }
    Ok(())
}

pub(crate) fn check_time(t: f64) -> Result<(), CslError> {
    if !(t >= 0.0) || t.is_infinite() {
        return Err(CslError::BadTime(t));
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => write!(f, "true"),
            Atom::False => write!(f, "false"),
            Atom::Compare(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Atom::Named(n) => write!(f, "{}", n.keyword()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a @ Atom::Compare(..)) => write!(f, "({a})"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} => {b})"),
            Formula::ProbEventually { bound, time, phi } => {
                write!(f, "P>={bound} [ F<={time} {phi} ]")
            }
            Formula::ProbGlobally { bound, time, phi } => {
                write!(f, "P>={bound} [ G<={time} {phi} ]")
            }
            Formula::ProbWeakUntil { bound, phi, psi } => {
                write!(f, "P>={bound} [ ({phi}) W ({psi}) ]")
            }
            Formula::GloballyAll(phi) => write!(f, "P>=1 [ G {phi} ]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        let f = Formula::eventually(0.9, 10.0, Formula::count("D", Cmp::Ge, 3));
        assert_eq!(f.to_string(), "P>=0.9 [ F<=10.0 (D >= 3) ]");
        let g = Formula::always(Formula::named(Named::ThH).implies(Formula::named(Named::Alarm)));
        assert_eq!(g.to_string(), "P>=1 [ G (ThH => Alarm) ]");
        let w = Formula::weak_until(
            0.5,
            Formula::named(Named::Alarm).not(),
            Formula::named(Named::ThL).not(),
        );
        assert_eq!(w.to_string(), "P>=0.5 [ (!Alarm) W (!ThL) ]");
    }

    #[test]
    fn binding() {
        let f = Formula::ProbEventually {
            bound: PExpr::Sub(Box::new(PExpr::num(1.0)), Box::new(PExpr::var("beta"))),
            time: PExpr::var("w_h"),
            phi: Box::new(Formula::named(Named::HDet)),
        };
        assert_eq!(f.free_params(), vec!["beta".to_string(), "w_h".to_string()]);
        assert!(matches!(
            f.check_closed(),
            Err(CslError::UnboundParameter(_))
        ));
        let env: Env = [("beta".to_string(), 0.1), ("w_h".to_string(), 2.0)].into();
        let b = f.bind(&env).unwrap();
        assert_eq!(b.to_string(), "P>=0.9 [ F<=2.0 Hdet ]");
        let bad: Env = [("beta".to_string(), -0.5), ("w_h".to_string(), 2.0)].into();
        assert!(matches!(f.bind(&bad), Err(CslError::BadBound(_))));
        let neg: Env = [("beta".to_string(), 0.1), ("w_h".to_string(), -2.0)].into();
        assert!(matches!(f.bind(&neg), Err(CslError::BadTime(_))));
    }

    #[test]
    fn depth_and_time() {
        let inner = Formula::eventually(0.5, 3.0, Formula::named(Named::Alarm));
        let outer = Formula::always(Formula::named(Named::ThH).implies(inner));
        assert_eq!(outer.prob_depth(), 2);
        assert_eq!(outer.max_time().unwrap(), 3.0);
    }
}
