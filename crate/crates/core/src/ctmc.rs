//! Explicit continuous-time Markov chains built from a [`Crn`].
//!
//! States are discovered breadth-first from the initial state and interned by
//! exact count-vector equality, so state `0` is always the initial state and
//! indexing is deterministic. Transitions are stored row-compressed.
//!
//! Time-bounded reachability uses uniformization with Poisson weights
//! truncated at a combined tail mass of [`POISSON_TAIL`]. Unbounded until is
//! solved on the embedded jump chain: a sparse LU below
//! [`DIRECT_SOLVE_LIMIT`] unknowns, Gauss-Seidel above it.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::crn::{Crn, State};
use crate::error::CtmcError;

pub const DEFAULT_MAX_STATES: usize = 2_000_000;
pub const POISSON_TAIL: f64 = 1e-10;
pub const DIRECT_SOLVE_LIMIT: usize = 50_000;
pub const ITERATIVE_TOLERANCE: f64 = 1e-10;
const PAR_THRESHOLD: usize = 8_192;

#[derive(Debug, Clone, PartialEq)]
pub struct ExploreCaps {
    pub max_states: usize,
    pub per_species_cap: Option<Vec<i64>>,
}

impl Default for ExploreCaps {
    fn default() -> Self {
        ExploreCaps {
            max_states: DEFAULT_MAX_STATES,
            per_species_cap: None,
        }
    }
}

impl ExploreCaps {
    pub fn uniform(n_species: usize, cap: i64) -> Self {
        ExploreCaps {
            max_states: DEFAULT_MAX_STATES,
            per_species_cap: Some(vec![cap; n_species]),
        }
    }

    fn admits(&self, counts: &[i64]) -> bool {
        match &self.per_species_cap {
            Some(caps) => counts.iter().zip(caps).all(|(c, cap)| c <= cap),
            None => true,
        }
    }
}

/// Probabilities per state, flagged when computed on a truncated space
/// (values are then lower bounds for reachability).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    pub values: Vec<f64>,
    pub truncated: bool,
}

impl ProbVector {
    pub fn at(&self, s: usize) -> f64 {
        self.values[s]
    }
}

#[derive(Debug, Clone)]
pub struct Ctmc {
    species: Vec<String>,
    stride: usize,
    counts: Vec<i64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    exit_rates: Vec<f64>,
    truncated: bool,
}

impl Ctmc {
    /// Breadth-first exploration of the states reachable from `init`.
    /// Successors outside the per-species caps are dropped and the chain is
    /// marked truncated.
    pub fn enumerate(crn: &Crn, init: &State, caps: &ExploreCaps) -> Result<Ctmc, CtmcError> {
        crn.check_state(init)?;
        if let Some(c) = &caps.per_species_cap {
            if c.len() != crn.num_species() {
                return Err(CtmcError::Crn(crate::error::CrnError::StateLength {
                    expected: crn.num_species(),
                    found: c.len(),
                }));
            }
        }
        if !caps.admits(&init.0) {
            return Err(CtmcError::InitialOutsideCaps);
        }
        let stride = crn.num_species();
        let deltas: Vec<Vec<(usize, i64)>> =
            crn.reactions().iter().map(|r| r.net_change()).collect();
        let mut index: HashMap<Box<[i64]>, u32> = HashMap::new();
        let mut counts: Vec<i64> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(init.0.clone().into_boxed_slice(), 0);
        counts.extend_from_slice(&init.0);
        queue.push_back(0u32);

        let mut row_ptr = vec![0usize];
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut exit_rates = Vec::new();
        let mut truncated = false;
        let mut row: Vec<(u32, f64)> = Vec::new();
        let mut succ = vec![0i64; stride];

        // BFS pops states in index order, so rows are appended in order.
        while let Some(s) = queue.pop_front() {
            let base = s as usize * stride;
            row.clear();
            for (r, delta) in crn.reactions().iter().zip(&deltas) {
                let a = crn.propensity_unchecked(r, &counts[base..base + stride]);
                if a == 0.0 || delta.is_empty() {
                    continue;
                }
                succ.copy_from_slice(&counts[base..base + stride]);
                for &(sp, d) in delta {
                    succ[sp] += d;
                }
                if !caps.admits(&succ) {
                    truncated = true;
                    continue;
                }
                let t = match index.get(succ.as_slice()) {
                    Some(&t) => t,
                    None => {
                        let t = index.len();
                        if t >= caps.max_states {
                            return Err(CtmcError::TooManyStates {
                                limit: caps.max_states,
                                explored: t,
                            });
                        }
                        index.insert(succ.clone().into_boxed_slice(), t as u32);
                        counts.extend_from_slice(&succ);
                        queue.push_back(t as u32);
                        t as u32
                    }
                };
                match row.iter_mut().find(|(c, _)| *c == t) {
                    Some(e) => e.1 += a,
                    None => row.push((t, a)),
                }
            }
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut exit = 0.0;
            for &(c, a) in &row {
                cols.push(c);
                rates.push(a);
                exit += a;
            }
            exit_rates.push(exit);
            row_ptr.push(cols.len());
        }
        Ok(Ctmc {
            species: crn.species_names().map(str::to_string).collect(),
            stride,
            counts,
            row_ptr,
            cols,
            rates,
            exit_rates,
            truncated,
        })
    }

    /// Chain given directly by its transitions, for tests and generated
    /// models. Each state holds its own index as a one-species count vector.
    pub fn from_transitions(
        n: usize,
        transitions: &[(usize, usize, f64)],
    ) -> Result<Ctmc, CtmcError> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(from, to, rate) in transitions {
            if from >= n || to >= n {
                return Err(CtmcError::Numerical(format!(
                    "transition {from}->{to} out of range"
                )));
            }
            if !(rate > 0.0) || from == to {
                continue;
            }
            match rows[from].iter_mut().find(|(c, _)| *c as usize == to) {
                Some(e) => e.1 += rate,
                None => rows[from].push((to as u32, rate)),
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut exit_rates = Vec::new();
        for mut r in rows {
            r.sort_unstable_by_key(|&(c, _)| c);
            exit_rates.push(r.iter().map(|&(_, a)| a).sum());
            for (c, a) in r {
                cols.push(c);
                rates.push(a);
            }
            row_ptr.push(cols.len());
        }
        Ok(Ctmc {
            species: vec!["state".into()],
            stride: 1,
            counts: (0..n as i64).collect(),
            row_ptr,
            cols,
            rates,
            exit_rates,
            truncated: false,
        })
    }

    pub fn num_states(&self) -> usize {
        self.exit_rates.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.cols.len()
    }

    pub fn initial_index(&self) -> usize {
        0
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn state(&self, s: usize) -> &[i64] {
        &self.counts[s * self.stride..(s + 1) * self.stride]
    }

    pub fn states(&self) -> impl Iterator<Item = &[i64]> {
        self.counts
            .chunks_exact(self.stride.max(1))
            .take(self.num_states())
    }

    pub fn exit_rate(&self, s: usize) -> f64 {
        self.exit_rates[s]
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[s]..self.row_ptr[s + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.rates[range])
            .map(|(&c, &a)| (c as usize, a))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_states()).flat_map(move |s| self.successors(s).map(move |(t, a)| (s, t, a)))
    }

    pub fn index_of(&self, counts: &[i64]) -> Option<usize> {
        self.states().position(|s| s == counts)
    }

    /// Evaluates a state predicate on every state.
    pub fn label<F>(&self, pred: F) -> Vec<bool>
    where
        F: Fn(&[i64]) -> bool + Sync,
    {
        if self.num_states() >= PAR_THRESHOLD {
            (0..self.num_states())
                .into_par_iter()
                .map(|s| pred(self.state(s)))
                .collect()
        } else {
            self.states().map(pred).collect()
        }
    }

    fn vector(&self, values: Vec<f64>) -> ProbVector {
        ProbVector {
            values,
            truncated: self.truncated,
        }
    }

    /// Distribution at time `t` from the initial state.
    pub fn transient(&self, t: f64) -> Result<ProbVector, CtmcError> {
        let mut p0 = vec![0.0; self.num_states()];
        p0[0] = 1.0;
        self.transient_from(p0, t)
    }

    /// Distribution at time `t` from an arbitrary initial distribution.
    pub fn transient_from(&self, p0: Vec<f64>, t: f64) -> Result<ProbVector, CtmcError> {
        if !(t >= 0.0) {
            return Err(CtmcError::NegativeTime(t));
        }
        let lambda = self.exit_rates.iter().cloned().fold(0.0, f64::max);
        if t == 0.0 || lambda == 0.0 {
            return Ok(self.vector(p0));
        }
        let (left, weights) = poisson_weights(lambda * t, POISSON_TAIL);
        let n = self.num_states();
        let mut p = p0;
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for step in 0..left + weights.len() {
            if step >= left {
                let w = weights[step - left];
                for (a, &x) in acc.iter_mut().zip(&p) {
                    *a += w * x;
                }
            }
            if step + 1 == left + weights.len() {
                break;
            }
            for ((x, &ps), &q) in next.iter_mut().zip(&p).zip(&self.exit_rates) {
                *x = ps * (1.0 - q / lambda);
            }
            for (s, &ps) in p.iter().enumerate() {
                if ps == 0.0 {
                    continue;
                }
                for (t, a) in self.successors(s) {
                    next[t] += ps * a / lambda;
                }
            }
            std::mem::swap(&mut p, &mut next);
        }
        for a in &mut acc {
            if *a < 0.0 {
                *a = 0.0;
            }
        }
        Ok(self.vector(acc))
    }

    /// For every state, the probability of reaching a `target` state within
    /// time `t` (target states are made absorbing).
    pub fn prob_eventually_bounded(
        &self,
        target: &[bool],
        t: f64,
    ) -> Result<ProbVector, CtmcError> {
        if !(t >= 0.0) {
            return Err(CtmcError::NegativeTime(t));
        }
        let n = self.num_states();
        let init: Vec<f64> = target.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let lambda = (0..n)
            .filter(|&s| !target[s])
            .map(|s| self.exit_rates[s])
            .fold(0.0, f64::max);
        if t == 0.0 || lambda == 0.0 {
            return Ok(self.vector(init));
        }
        let (left, weights) = poisson_weights(lambda * t, POISSON_TAIL);
        let mut x = init;
        let mut acc = vec![0.0; n];
        let total = left + weights.len();
        for step in 0..total {
            if step >= left {
                let w = weights[step - left];
                for (a, &v) in acc.iter_mut().zip(&x) {
                    *a += w * v;
                }
            }
            if step + 1 == total {
                break;
            }
            let apply = |s: usize| -> f64 {
                if target[s] {
                    return 1.0;
                }
                let mut v = x[s] * (1.0 - self.exit_rates[s] / lambda);
                for (t, a) in self.successors(s) {
                    v += a / lambda * x[t];
                }
                v
            };
            x = if n >= PAR_THRESHOLD {
                (0..n).into_par_iter().map(apply).collect()
            } else {
                (0..n).map(apply).collect()
            };
        }
        for a in &mut acc {
            *a = a.clamp(0.0, 1.0);
        }
        Ok(self.vector(acc))
    }

    /// For every state, the probability that `inv` holds throughout `[0, t]`.
    pub fn prob_globally_bounded(&self, inv: &[bool], t: f64) -> Result<ProbVector, CtmcError> {
        let not_inv: Vec<bool> = inv.iter().map(|b| !b).collect();
        let ev = self.prob_eventually_bounded(&not_inv, t)?;
        Ok(self.vector(ev.values.into_iter().map(|p| 1.0 - p).collect()))
    }

    /// States from which some `target` state is reachable (including targets).
    pub fn can_reach(&self, target: &[bool], through: Option<&[bool]>) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (s, t, _) in self.transitions() {
            rev[t].push(s as u32);
        }
        let mut seen = target.to_vec();
        let mut stack: Vec<usize> = (0..n).filter(|&s| target[s]).collect();
        while let Some(t) = stack.pop() {
            for &s in &rev[t] {
                let s = s as usize;
                if !seen[s] && through.is_none_or(|m| m[s]) {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// Unbounded until: probability of reaching `psi` along `phi` states.
    pub fn prob_until(&self, phi: &[bool], psi: &[bool]) -> Result<ProbVector, CtmcError> {
        let n = self.num_states();
        let maybe_mask: Vec<bool> = (0..n).map(|s| phi[s] && !psi[s]).collect();
        let reach = self.can_reach(psi, Some(&maybe_mask));
        let mut values: Vec<f64> = psi.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let unknown: Vec<usize> = (0..n).filter(|&s| maybe_mask[s] && reach[s]).collect();
        if unknown.is_empty() {
            return Ok(self.vector(values));
        }
        let mut pos = vec![usize::MAX; n];
        for (k, &s) in unknown.iter().enumerate() {
            pos[s] = k;
        }
        // exit(s) * x_s - sum_{t unknown} r(s,t) x_t = sum_{t in psi} r(s,t)
        let m = unknown.len();
        let mut rhs = vec![0.0; m];
        let mut triplets = Vec::with_capacity(m + self.num_transitions());
        for (k, &s) in unknown.iter().enumerate() {
            triplets.push(Triplet::new(k, k, self.exit_rates[s]));
            for (t, a) in self.successors(s) {
                if psi[t] {
                    rhs[k] += a;
                } else if pos[t] != usize::MAX {
                    triplets.push(Triplet::new(k, pos[t], -a));
                }
            }
        }
        let solution = if m < DIRECT_SOLVE_LIMIT {
            solve_direct(m, &triplets, &rhs)?
        } else {
            solve_gauss_seidel(m, &triplets, &rhs)?
        };
        for (k, &s) in unknown.iter().enumerate() {
            values[s] = solution[k].clamp(0.0, 1.0);
        }
        Ok(self.vector(values))
    }

    /// Weak until `phi W psi`, as `1 - P((phi & !psi) U (!phi & !psi))`.
    pub fn prob_weak_until(&self, phi: &[bool], psi: &[bool]) -> Result<ProbVector, CtmcError> {
        let n = self.num_states();
        let stay: Vec<bool> = (0..n).map(|s| phi[s] && !psi[s]).collect();
        let bad: Vec<bool> = (0..n).map(|s| !phi[s] && !psi[s]).collect();
        let fail = self.prob_until(&stay, &bad)?;
        Ok(self.vector(fail.values.into_iter().map(|p| 1.0 - p).collect()))
    }

    /// Writes `states.csv` and `transitions.csv` into `dir`.
    pub fn export_csv(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut s = String::from("index");
        for sp in &self.species {
            s.push(',');
            s.push_str(sp);
        }
        s.push('\n');
        for (i, st) in self.states().enumerate() {
            let _ = write!(s, "{i}");
            for c in st {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        std::fs::write(dir.join("states.csv"), s)?;
        let mut t = String::from("from,to,rate\n");
        for (a, b, r) in self.transitions() {
            let _ = writeln!(t, "{a},{b},{r}");
        }
        std::fs::write(dir.join("transitions.csv"), t)
    }
}

fn solve_direct(
    m: usize,
    triplets: &[Triplet<usize, usize, f64>],
    rhs: &[f64],
) -> Result<Vec<f64>, CtmcError> {
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, triplets)
        .map_err(|e| CtmcError::Numerical(format!("matrix assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| CtmcError::Numerical(format!("sparse LU failed: {e:?}")))?;
    let b = Mat::<f64>::from_fn(m, 1, |i, _| rhs[i]);
    use faer::prelude::Solve;
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..m).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(CtmcError::Numerical("singular until system".into()));
    }
    Ok(out)
}

fn solve_gauss_seidel(
    m: usize,
    triplets: &[Triplet<usize, usize, f64>],
    rhs: &[f64],
) -> Result<Vec<f64>, CtmcError> {
    let mut diag = vec![0.0; m];
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for t in triplets {
        if t.row == t.col {
            diag[t.row] += t.val;
        } else {
            rows[t.row].push((t.col, t.val));
        }
    }
    let mut x = vec![0.0; m];
    for _ in 0..1_000_000 {
        for i in 0..m {
            let mut s = rhs[i];
            for &(j, v) in &rows[i] {
                s -= v * x[j];
            }
            x[i] = s / diag[i];
        }
        let mut resid: f64 = 0.0;
        for i in 0..m {
            let mut r = rhs[i] - diag[i] * x[i];
            for &(j, v) in &rows[i] {
                r -= v * x[j];
            }
            resid = resid.max((r / diag[i]).abs());
        }
        if resid < ITERATIVE_TOLERANCE {
            return Ok(x);
        }
    }
    Err(CtmcError::Numerical("Gauss-Seidel did not converge".into()))
}

/// Poisson(`lt`) probabilities on a window `[left, left + len)` holding all
/// but `eps` of the mass, renormalized to sum to 1.
pub fn poisson_weights(lt: f64, eps: f64) -> (usize, Vec<f64>) {
    if lt <= 0.0 {
        return (0, vec![1.0]);
    }
    let mode = lt.floor() as usize;
    let half = eps / 2.0;
    let mut right = vec![1.0];
    let mut total = 1.0;
    let mut i = mode;
    loop {
        let r = lt / (i + 1) as f64;
        let w = right.last().unwrap() * r;
        if r < 1.0 && w / (1.0 - r) < half * total {
            break;
        }
        right.push(w);
        total += w;
        i += 1;
    }
    let mut left_part = Vec::new();
    let mut w = 1.0;
    let mut i = mode;
    while i > 0 {
        let q = i as f64 / lt;
        let next = w * q;
        if q < 1.0 && next / (1.0 - q) < half * total {
            break;
        }
        left_part.push(next);
        total += next;
        w = next;
        i -= 1;
    }
    let left = mode - left_part.len();
    let mut weights: Vec<f64> = left_part.into_iter().rev().chain(right).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    (left, weights)
}
