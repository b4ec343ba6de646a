//! Chemical reaction networks under stochastic mass-action kinetics.
//!
//! A [`Crn`] is an immutable list of species and reactions. States are plain
//! count vectors in species order. Propensities follow the combinatorial
//! convention: a reaction with reactant multiset `{s: m_s}` fires at
//!
//! ```text
//! k * prod_s fall(n_s, m_s) / (V^(order-1) * prod_s m_s!)
//! ```
//!
//! where `fall` is the falling factorial and `order = sum_s m_s`.

use std::collections::HashMap;
use std::fmt;

use crate::error::CrnError;

/// A named molecular species and its position in the owning network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Species {
    pub name: String,
    pub index: usize,
}

/// One reaction. Reactant and product lists hold `(species index, stoichiometry)`
/// pairs, each species at most once per side.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Vec<(usize, u32)>,
    pub products: Vec<(usize, u32)>,
    pub rate: f64,
}

impl Reaction {
    pub fn order(&self) -> u32 {
        self.reactants.iter().map(|&(_, m)| m).sum()
    }

    /// Net count change per species, skipping species whose count is unchanged.
    pub fn net_change(&self) -> Vec<(usize, i64)> {
        let mut delta: Vec<(usize, i64)> = Vec::new();
        let mut add = |s: usize, d: i64| match delta.iter_mut().find(|(i, _)| *i == s) {
            Some(e) => e.1 += d,
            None => delta.push((s, d)),
        };
        for &(s, m) in &self.reactants {
            add(s, -(m as i64));
        }
        for &(s, m) in &self.products {
            add(s, m as i64);
        }
        delta.retain(|&(_, d)| d != 0);
        delta.sort_unstable();
        delta
    }

    /// Species appearing with equal stoichiometry on both sides.
    pub fn catalysts(&self) -> Vec<usize> {
        self.reactants
            .iter()
            .filter(|(s, m)| self.products.iter().any(|(p, n)| p == s && n == m))
            .map(|&(s, _)| s)
            .collect()
    }
}

/// Molecule counts, one entry per species in network order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<i64>);

impl State {
    pub fn zeros(n: usize) -> Self {
        State(vec![0; n])
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<i64>> for State {
    fn from(v: Vec<i64>) -> Self {
        State(v)
    }
}

/// A reaction network with a fixed species ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Crn {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    volume: f64,
    lookup: HashMap<String, usize>,
}

/// Reaction described by species names, used when assembling networks.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedReaction {
    pub reactants: Vec<(String, u32)>,
    pub products: Vec<(String, u32)>,
    pub rate: f64,
}

impl NamedReaction {
    pub fn new(reactants: &[(&str, u32)], products: &[(&str, u32)], rate: f64) -> Self {
        let own = |side: &[(&str, u32)]| side.iter().map(|(s, m)| (s.to_string(), *m)).collect();
        NamedReaction {
            reactants: own(reactants),
            products: own(products),
            rate,
        }
    }
}

impl Crn {
    /// Builds a network from species names and named reactions. Species used
    /// by a reaction but missing from `species` are an error.
    pub fn new(
        species: &[&str],
        reactions: Vec<NamedReaction>,
        volume: f64,
    ) -> Result<Self, CrnError> {
        let names: Vec<String> = species.iter().map(|s| s.to_string()).collect();
        Self::from_names(names, reactions, volume)
    }

    pub fn from_names(
        names: Vec<String>,
        reactions: Vec<NamedReaction>,
        volume: f64,
    ) -> Result<Self, CrnError> {
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(CrnError::InvalidVolume(volume));
        }
        let mut lookup = HashMap::with_capacity(names.len());
        let mut species = Vec::with_capacity(names.len());
        for (index, name) in names.into_iter().enumerate() {
            if !is_identifier(&name) {
                return Err(CrnError::InvalidSpeciesName(name));
            }
            if lookup.insert(name.clone(), index).is_some() {
                return Err(CrnError::DuplicateSpecies(name));
            }
            species.push(Species { name, index });
        }
        let mut resolved = Vec::with_capacity(reactions.len());
        for r in reactions {
            if !(r.rate > 0.0) || !r.rate.is_finite() {
                return Err(CrnError::InvalidRate(r.rate));
            }
            let side = |items: &[(String, u32)]| -> Result<Vec<(usize, u32)>, CrnError> {
                let mut out: Vec<(usize, u32)> = Vec::new();
                for (name, m) in items {
                    if *m == 0 {
                        return Err(CrnError::ZeroStoichiometry(name.clone()));
                    }
                    let idx = *lookup
                        .get(name)
                        .ok_or_else(|| CrnError::UnknownSpecies(name.clone()))?;
                    match out.iter_mut().find(|(i, _)| *i == idx) {
                        Some(e) => e.1 += m,
                        None => out.push((idx, *m)),
                    }
                }
                Ok(out)
            };
            resolved.push(Reaction {
                reactants: side(&r.reactants)?,
                products: side(&r.products)?,
                rate: r.rate,
            });
        }
        Ok(Crn {
            species,
            reactions: resolved,
            volume,
            lookup,
        })
    }

    pub fn empty() -> Self {
        Crn {
            species: Vec::new(),
            reactions: Vec::new(),
            volume: 1.0,
            lookup: HashMap::new(),
        }
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_names(&self) -> impl Iterator<Item = &str> {
        self.species.iter().map(|s| s.name.as_str())
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, CrnError> {
        self.index_of(name)
            .ok_or_else(|| CrnError::UnknownSpecies(name.to_string()))
    }

    /// Reaction `i` expressed with species names.
    pub fn named_reaction(&self, i: usize) -> NamedReaction {
        let r = &self.reactions[i];
        let side = |items: &[(usize, u32)]| {
            items
                .iter()
                .map(|&(s, m)| (self.species[s].name.clone(), m))
                .collect()
        };
        NamedReaction {
            reactants: side(&r.reactants),
            products: side(&r.products),
            rate: r.rate,
        }
    }

    /// Builds a state from `(name, count)` pairs; unnamed species start at 0.
    pub fn state(&self, counts: &[(&str, i64)]) -> Result<State, CrnError> {
        let mut s = State::zeros(self.num_species());
        for &(name, c) in counts {
            if c < 0 {
                return Err(CrnError::NegativeCount(name.to_string(), c));
            }
            s.0[self.require(name)?] = c;
        }
        Ok(s)
    }

    pub fn check_state(&self, state: &State) -> Result<(), CrnError> {
        if state.len() != self.num_species() {
            return Err(CrnError::StateLength {
                expected: self.num_species(),
                found: state.len(),
            });
        }
        if let Some((i, &c)) = state.0.iter().enumerate().find(|(_, &c)| c < 0) {
            return Err(CrnError::NegativeCount(self.species[i].name.clone(), c));
        }
        Ok(())
    }

    fn reaction(&self, i: usize) -> Result<&Reaction, CrnError> {
        self.reactions.get(i).ok_or(CrnError::ReactionIndex {
            index: i,
            count: self.reactions.len(),
        })
    }

    /// Propensity of reaction `i` in `state`.
    pub fn propensity(&self, i: usize, state: &State) -> Result<f64, CrnError> {
        let r = self.reaction(i)?;
        if state.len() != self.num_species() {
            return Err(CrnError::StateLength {
                expected: self.num_species(),
                found: state.len(),
            });
        }
        Ok(self.propensity_unchecked(r, &state.0))
    }

    #[inline]
    pub(crate) fn propensity_unchecked(&self, r: &Reaction, counts: &[i64]) -> f64 {
        let mut a = r.rate;
        let mut order = 0u32;
        for &(s, m) in &r.reactants {
            let n = counts[s];
            if n < m as i64 {
                return 0.0;
            }
            order += m;
            if m == 1 {
                a *= n as f64;
            } else {
                // fall(n, m) / m! == binomial(n, m)
                let mut c = 1.0;
                for j in 0..m as i64 {
                    c = c * (n - j) as f64 / (j + 1) as f64;
                }
                a *= c;
            }
        }
        if order > 1 && self.volume != 1.0 {
            a /= self.volume.powi(order as i32 - 1);
        }
        a
    }

    /// Fires reaction `i` once. Insufficient reactants or count overflow are
    /// errors; counts never go negative.
    pub fn apply_reaction(&self, i: usize, state: &State) -> Result<State, CrnError> {
        let r = self.reaction(i)?;
        self.check_state(state)?;
        let mut next = state.clone();
        for &(s, m) in &r.reactants {
            if next.0[s] < m as i64 {
                return Err(CrnError::InsufficientReactants {
                    reaction: i,
                    species: self.species[s].name.clone(),
                });
            }
        }
        for (s, d) in r.net_change() {
            next.0[s] = next.0[s]
                .checked_add(d)
                .ok_or_else(|| CrnError::CountOverflow(self.species[s].name.clone()))?;
        }
        Ok(next)
    }

    /// Union of several networks. Species are deduplicated by name in
    /// first-appearance order; reactions are concatenated.
    pub fn merge(crns: &[&Crn]) -> Result<Crn, CrnError> {
        let Some(first) = crns
            .iter()
            .find(|c| c.num_species() > 0 || !c.reactions.is_empty())
        else {
            return Ok(crns
                .first()
                .map(|c| (*c).clone())
                .unwrap_or_else(Crn::empty));
        };
        let volume = first.volume;
        let mut names: Vec<String> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();
        let mut reactions = Vec::new();
        for c in crns {
            if c.num_species() == 0 && c.reactions.is_empty() {
                continue;
            }
            if c.volume != volume {
                return Err(CrnError::VolumeMismatch(volume, c.volume));
            }
            for s in &c.species {
                if seen.insert(s.name.clone(), ()).is_none() {
                    names.push(s.name.clone());
                }
            }
            reactions.extend((0..c.reactions.len()).map(|i| c.named_reaction(i)));
        }
        Crn::from_names(names, reactions, volume)
    }

    /// Re-expresses a state of `other` (by species name) in this network's
    /// ordering. Species absent from `other` get `fill`.
    pub fn project_state(&self, other: &Crn, state: &State, fill: i64) -> State {
        let mut out = State(vec![fill; self.num_species()]);
        for sp in other.species() {
            if let Some(i) = self.index_of(&sp.name) {
                out.0[i] = state.0[sp.index];
            }
        }
        out
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |items: &[(usize, u32)]| -> String {
            if items.is_empty() {
                return "0".into();
            }
            items
                .iter()
                .map(|&(s, m)| {
                    if m == 1 {
                        self.species[s].name.clone()
                    } else {
                        format!("{m} {}", self.species[s].name)
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        for r in &self.reactions {
            writeln!(
                f,
                "{} ->{{{}}} {}",
                side(&r.reactants),
                r.rate,
                side(&r.products)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Crn {
        Crn::new(
            &["A", "B", "C"],
            vec![NamedReaction::new(
                &[("A", 1), ("C", 1)],
                &[("B", 2), ("C", 1)],
                1.0,
            )],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn bimolecular_propensity() {
        let crn = abc();
        let s = crn.state(&[("A", 2), ("C", 3)]).unwrap();
        assert_eq!(crn.propensity(0, &s).unwrap(), 6.0);
    }

    #[test]
    fn empty_reactant_gives_zero() {
        let crn = Crn::new(
            &["X1", "X2"],
            vec![NamedReaction::new(&[("X1", 1)], &[("X2", 1)], 2.0)],
            1.0,
        )
        .unwrap();
        let s = crn.state(&[("X2", 5)]).unwrap();
        assert_eq!(crn.propensity(0, &s).unwrap(), 0.0);
    }

    #[test]
    fn catalyzed_rung_step() {
        let crn = Crn::new(
            &["X1", "X2", "U"],
            vec![NamedReaction::new(
                &[("X1", 1), ("U", 1)],
                &[("X2", 1), ("U", 1)],
                1.0,
            )],
            1.0,
        )
        .unwrap();
        let s = crn.state(&[("X1", 5), ("U", 4)]).unwrap();
        assert_eq!(crn.propensity(0, &s).unwrap(), 20.0);
    }

    #[test]
    fn homodimer_uses_pair_count() {
        let crn = Crn::new(
            &["A", "B"],
            vec![NamedReaction::new(&[("A", 2)], &[("B", 1)], 3.0)],
            2.0,
        )
        .unwrap();
        let s = crn.state(&[("A", 5)]).unwrap();
        // 3 * C(5,2) / 2
        assert_eq!(crn.propensity(0, &s).unwrap(), 15.0);
        let one = crn.state(&[("A", 1)]).unwrap();
        assert_eq!(crn.propensity(0, &one).unwrap(), 0.0);
    }

    #[test]
    fn volume_scales_only_higher_order() {
        let crn = Crn::new(
            &["A", "B"],
            vec![
                NamedReaction::new(&[("A", 1)], &[], 2.0),
                NamedReaction::new(&[("A", 1), ("B", 1)], &[], 2.0),
            ],
            4.0,
        )
        .unwrap();
        let s = crn.state(&[("A", 3), ("B", 2)]).unwrap();
        assert_eq!(crn.propensity(0, &s).unwrap(), 6.0);
        assert_eq!(crn.propensity(1, &s).unwrap(), 3.0);
    }

    #[test]
    fn apply_reactions() {
        let crn = Crn::new(
            &["A", "B", "H", "L0", "Li"],
            vec![
                NamedReaction::new(&[("A", 1), ("B", 1)], &[("B", 2), ("H", 1)], 1.0),
                NamedReaction::new(&[("H", 1)], &[], 0.1),
                NamedReaction::new(&[("Li", 1), ("H", 1)], &[("L0", 1), ("H", 1)], 1.0),
            ],
            1.0,
        )
        .unwrap();
        let s = crn.state(&[("A", 3), ("B", 2)]).unwrap();
        assert_eq!(
            crn.apply_reaction(0, &s).unwrap(),
            crn.state(&[("A", 2), ("B", 3), ("H", 1)]).unwrap()
        );
        let s = crn.state(&[("H", 1)]).unwrap();
        assert_eq!(crn.apply_reaction(1, &s).unwrap(), crn.state(&[]).unwrap());
        let s = crn.state(&[("Li", 1), ("H", 2)]).unwrap();
        assert_eq!(
            crn.apply_reaction(2, &s).unwrap(),
            crn.state(&[("L0", 1), ("H", 2)]).unwrap()
        );
        assert_eq!(crn.reactions()[2].catalysts(), vec![2]);
    }

    #[test]
    fn apply_without_reactants_is_an_error() {
        let crn = abc();
        let s = crn.state(&[("C", 1)]).unwrap();
        assert!(matches!(
            crn.apply_reaction(0, &s),
            Err(CrnError::InsufficientReactants { .. })
        ));
    }

    #[test]
    fn overflow_is_an_error() {
        let crn = Crn::new(
            &["A"],
            vec![NamedReaction::new(&[("A", 1)], &[("A", 2)], 1.0)],
            1.0,
        )
        .unwrap();
        let s = State(vec![i64::MAX]);
        assert!(matches!(
            crn.apply_reaction(0, &s),
            Err(CrnError::CountOverflow(_))
        ));
    }

    #[test]
    fn structural_errors() {
        let crn = abc();
        assert!(matches!(
            crn.propensity(3, &State::zeros(3)),
            Err(CrnError::ReactionIndex { .. })
        ));
        assert!(matches!(
            crn.propensity(0, &State::zeros(2)),
            Err(CrnError::StateLength { .. })
        ));
        assert!(Crn::new(&["A"], vec![NamedReaction::new(&[("Z", 1)], &[], 1.0)], 1.0).is_err());
        assert!(Crn::new(&["A"], vec![NamedReaction::new(&[("A", 1)], &[], 0.0)], 1.0).is_err());
        assert!(Crn::new(&["A", "A"], vec![], 1.0).is_err());
        assert!(Crn::new(&["A"], vec![], 0.0).is_err());
    }

    #[test]
    fn merge_shares_species() {
        let osc = Crn::new(
            &["A", "B", "H"],
            vec![NamedReaction::new(
                &[("A", 1), ("B", 1)],
                &[("B", 2), ("H", 1)],
                1.0,
            )],
            1.0,
        )
        .unwrap();
        let decay = Crn::new(&["H"], vec![NamedReaction::new(&[("H", 1)], &[], 0.1)], 1.0).unwrap();
        let m = Crn::merge(&[&osc, &decay]).unwrap();
        assert_eq!(m.species_names().collect::<Vec<_>>(), ["A", "B", "H"]);
        assert_eq!(m.reactions().len(), 2);
        assert_eq!(Crn::merge(&[&Crn::empty(), &osc]).unwrap(), osc);
        let other = Crn::new(&["Q"], vec![], 2.0).unwrap();
        assert!(matches!(
            Crn::merge(&[&osc, &other]),
            Err(CrnError::VolumeMismatch(..))
        ));
    }
}
