//! Resolution of atoms against a model's species.

use crate::designs::{default_tau, PredicateConfig};
use crate::error::CslError;

use super::formula::{Atom, Cmp, Named};

/// Species names of the model plus the thresholds behind named predicates.
#[derive(Debug, Clone)]
pub struct Context {
    pub species: Vec<String>,
    pub predicates: PredicateConfig,
}

impl Context {
    pub fn new(species: Vec<String>, predicates: PredicateConfig) -> Self {
        Context {
            species,
            predicates,
        }
    }

    pub fn for_crn(crn: &crate::crn::Crn, predicates: PredicateConfig) -> Self {
        Context::new(
            crn.species_names().map(str::to_string).collect(),
            predicates,
        )
    }

    pub fn for_ctmc(ctmc: &crate::ctmc::Ctmc, predicates: PredicateConfig) -> Self {
        Context::new(ctmc.species().to_vec(), predicates)
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    fn require(&self, pred: Named, name: &str) -> Result<usize, CslError> {
        self.index(name).ok_or_else(|| {
            CslError::UndefinedPredicate(format!("{} (missing species `{name}`)", pred.keyword()))
        })
    }

    pub fn compile(&self, atom: &Atom) -> Result<StatePred, CslError> {
        let p = &self.predicates;
        let at_least = |n: Named, sp: &str, v: i64| -> Result<StatePred, CslError> {
            Ok(StatePred::Linear {
                coeffs: vec![(self.require(n, sp)?, 1)],
                constant: -v,
                cmp: Cmp::Ge,
            })
        };
        let at_most = |n: Named, sp: &str, v: i64| -> Result<StatePred, CslError> {
            Ok(StatePred::Linear {
                coeffs: vec![(self.require(n, sp)?, 1)],
                constant: -v,
                cmp: Cmp::Le,
            })
        };
        match atom {
            Atom::True => Ok(StatePred::Const(true)),
            Atom::False => Ok(StatePred::Const(false)),
            Atom::Compare(lhs, cmp, rhs) => {
                let mut coeffs: Vec<(usize, i64)> = Vec::new();
                let mut add = |name: &str, c: i64| -> Result<(), CslError> {
                    let i = self
                        .index(name)
                        .ok_or_else(|| CslError::UnknownSpecies(name.into()))?;
                    match coeffs.iter_mut().find(|(j, _)| *j == i) {
                        Some((_, v)) => *v += c,
                        None => coeffs.push((i, c)),
                    }
                    Ok(())
                };
                for (c, n) in &lhs.terms {
                    add(n, *c)?;
                }
                for (c, n) in &rhs.terms {
                    add(n, -c)?;
                }
                Ok(StatePred::Linear {
                    coeffs,
                    constant: lhs.constant - rhs.constant,
                    cmp: *cmp,
                })
            }
            Atom::Named(n) => match n {
                Named::Alarm => at_least(*n, &p.d_species, p.d_threshold),
                Named::ThH => at_least(*n, &p.y_species, p.y_threshold),
                Named::ThL => at_most(*n, &p.y_species, p.y_low),
                Named::HPres | Named::HbHigh => at_least(*n, &p.h_species, p.hb_high),
                Named::HDet => at_least(*n, &p.h_species, 1),
                Named::HbLow => at_most(*n, &p.h_species, p.hb_low),
                Named::Reset => {
                    if p.detector_rungs.is_empty() || p.reset_cut >= p.detector_rungs.len() {
                        return Err(CslError::UndefinedPredicate("Reset".into()));
                    }
                    let rungs = p
                        .detector_rungs
                        .iter()
                        .map(|r| self.require(*n, r))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(StatePred::Reset {
                        rungs,
                        cut: p.reset_cut,
                        fraction: p.reset_fraction,
                    })
                }
                Named::Healthy => Ok(StatePred::Healthy {
                    abc: [
                        self.require(*n, "A")?,
                        self.require(*n, "B")?,
                        self.require(*n, "C")?,
                    ],
                    tau: p.tau,
                }),
            },
        }
    }
}

/// A compiled atomic predicate over count vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum StatePred {
    Const(bool),
    /// `sum(c_i * x_i) + constant  cmp  0`
    Linear {
        coeffs: Vec<(usize, i64)>,
        constant: i64,
        cmp: Cmp,
    },
    /// Fraction of the detector population on rungs `0..=cut` is at least `fraction`.
    Reset {
        rungs: Vec<usize>,
        cut: usize,
        fraction: f64,
    },
    /// All of `A`, `B`, `C` present with squared pairwise spread above `tau`;
    /// `tau` defaults per state.
    Healthy {
        abc: [usize; 3],
        tau: Option<f64>,
    },
}

impl StatePred {
    pub fn eval(&self, x: &[i64]) -> bool {
        match self {
            StatePred::Const(b) => *b,
            StatePred::Linear {
                coeffs,
                constant,
                cmp,
            } => {
                let v = coeffs.iter().fold(*constant, |acc, &(i, c)| acc + c * x[i]);
                cmp.apply(v)
            }
            StatePred::Reset {
                rungs,
                cut,
                fraction,
            } => {
                let total: i64 = rungs.iter().map(|&i| x[i]).sum();
                let low: i64 = rungs[..=*cut].iter().map(|&i| x[i]).sum();
                low as f64 >= fraction * total as f64
            }
            StatePred::Healthy { abc, tau } => {
                let (a, b, c) = (x[abc[0]], x[abc[1]], x[abc[2]]);
                let tau = tau.unwrap_or_else(|| default_tau(a + b + c));
                crate::designs::healthy_counts(a, b, c, tau)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csl::formula::LinExpr;
    use crate::designs::MwtConfig;

    fn mwt_ctx() -> (Context, MwtConfig) {
        let cfg = MwtConfig::new(4, 10, 3, 6, 1, 1);
        let m = crate::designs::build_mwt(&cfg).unwrap();
        (Context::for_crn(&m.crn, cfg.predicates()), cfg)
    }

    #[test]
    fn named_predicates() {
        let (ctx, cfg) = mwt_ctx();
        let idx = |n: &str| ctx.species.iter().position(|s| s == n).unwrap();
        let mut x = vec![0i64; ctx.species.len()];
        x[idx("L0")] = 10;
        let reset = ctx.compile(&Atom::Named(Named::Reset)).unwrap();
        assert!(reset.eval(&x));
        x[idx("L0")] = 0;
        x[idx("Y")] = 10;
        assert!(!reset.eval(&x));
        let thh = ctx.compile(&Atom::Named(Named::ThH)).unwrap();
        assert!(thh.eval(&x));
        x[idx("Y")] = cfg.y_threshold - 1;
        assert!(!thh.eval(&x));
        let alarm = ctx.compile(&Atom::Named(Named::Alarm)).unwrap();
        x[idx("D")] = cfg.d_threshold;
        assert!(alarm.eval(&x));
        assert!(matches!(
            ctx.compile(&Atom::Named(Named::Healthy)),
            Err(CslError::UndefinedPredicate(_))
        ));
    }

    #[test]
    fn linear_and_unknown() {
        let ctx = Context::new(vec!["A".into(), "B".into()], PredicateConfig::default());
        let lhs = LinExpr {
            terms: vec![(2, "A".into()), (-1, "B".into())],
            constant: 1,
        };
        let p = ctx
            .compile(&Atom::Compare(lhs, Cmp::Ge, LinExpr::species("A")))
            .unwrap();
        assert!(p.eval(&[3, 4]));
        assert!(!p.eval(&[1, 4]));
        assert!(matches!(
            ctx.compile(&Atom::Compare(
                LinExpr::species("Z"),
                Cmp::Eq,
                LinExpr::constant(0)
            )),
            Err(CslError::UnknownSpecies(_))
        ));
    }

    #[test]
    fn healthy_default_tau() {
        let ctx = Context::new(
            vec!["A".into(), "B".into(), "C".into()],
            PredicateConfig::default(),
        );
        let h = ctx.compile(&Atom::Named(Named::Healthy)).unwrap();
        assert!(h.eval(&[30, 30, 40]));
        assert!(!h.eval(&[100, 0, 0]));
    }
}
