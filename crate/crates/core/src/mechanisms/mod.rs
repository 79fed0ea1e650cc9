//! Serial-dictatorship style mechanisms with strategic agents.
//!
//! Randomness is explicit: every run consumes a [`RandomBits`] value, so
//! properties that must hold for every realization can be checked by
//! enumerating the bits. The online mechanisms and the starred variants run
//! with closed-form strategies ([`run`]); serial dictatorship with lookahead,
//! hidden-order RSD and the decline-capable variants run through the
//! expectimax [`oracle`].

mod chance;
mod online;
pub mod oracle;
mod strategy;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

pub(crate) use chance::{fold_paths, BitsChance, PathChance};
pub(crate) use online::{run_closed_form, run_prepared, Deviation, Prepared};
pub use strategy::{best_response, on_ca_strategy, on_ct_strategy};

use crate::error::{Error, Result};
use crate::model::{utilities, Allocation, Instance};
use crate::optimize::{factorial, nth_permutation};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismId {
    /// Serial dictatorship in the announced order `bits.agent_permutation`.
    Sd,
    /// Random serial dictatorship; agents do not know who picks next.
    RsdHiddenOrder,
    OnCtRsd,
    OnCaRsd,
    RsdStar,
    FfCtRsdStar,
    OnCaRsdStar,
    /// A declined invitee returns to the pool of undrawn agents.
    CaBpRsd,
    /// A declined invitee keeps her place in the announced order.
    CaBqRsd,
    /// A declined invitee moves to the end of the announced order.
    CaBeRsd,
}

impl MechanismId {
    pub const ALL: [MechanismId; 10] = [
        MechanismId::Sd,
        MechanismId::RsdHiddenOrder,
        MechanismId::OnCtRsd,
        MechanismId::OnCaRsd,
        MechanismId::RsdStar,
        MechanismId::FfCtRsdStar,
        MechanismId::OnCaRsdStar,
        MechanismId::CaBpRsd,
        MechanismId::CaBqRsd,
        MechanismId::CaBeRsd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismId::Sd => "sd",
            MechanismId::RsdHiddenOrder => "rsd",
            MechanismId::OnCtRsd => "on-ct-rsd",
            MechanismId::OnCaRsd => "on-ca-rsd",
            MechanismId::RsdStar => "rsd-star",
            MechanismId::FfCtRsdStar => "ff-ct-rsd-star",
            MechanismId::OnCaRsdStar => "on-ca-rsd-star",
            MechanismId::CaBpRsd => "ca-bp-rsd",
            MechanismId::CaBqRsd => "ca-bq-rsd",
            MechanismId::CaBeRsd => "ca-be-rsd",
        }
    }

    /// Runs with closed-form strategies rather than the game-tree oracle.
    pub fn is_closed_form(self) -> bool {
        matches!(
            self,
            MechanismId::OnCtRsd
                | MechanismId::OnCaRsd
                | MechanismId::RsdStar
                | MechanismId::FfCtRsdStar
                | MechanismId::OnCaRsdStar
        )
    }

    /// Agents report or declare friends.
    pub fn uses_reports(self) -> bool {
        !matches!(
            self,
            MechanismId::Sd | MechanismId::RsdHiddenOrder | MechanismId::RsdStar
        )
    }

    /// Agents know the full picking order in advance.
    pub fn has_announced_order(self) -> bool {
        matches!(self, MechanismId::Sd | MechanismId::CaBqRsd | MechanismId::CaBeRsd)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "mechanism",
                name: s.to_string(),
            })
    }
}

/// Friendship report per agent: `Some(j)` names `j` as her friend.
pub type Reports = Vec<Option<usize>>;

/// Every agent reports her true friend (or nobody).
pub fn truthful_reports(inst: &Instance) -> Reports {
    (0..inst.agent_count()).map(|i| inst.friend(i)).collect()
}

pub fn validate_reports(inst: &Instance, reports: &[Option<usize>]) -> Result<()> {
    let n = inst.agent_count();
    if reports.len() != n {
        return Err(Error::MalformedReport(format!(
            "{} reports for {n} agents",
            reports.len()
        )));
    }
    for (i, r) in reports.iter().enumerate() {
        match *r {
            Some(j) if j >= n => {
                return Err(Error::MalformedReport(format!(
                    "agent {i} reports agent {j}, outside 0..{n}"
                )))
            }
            Some(j) if j == i => return Err(Error::MalformedReport(format!("agent {i} reports herself"))),
            _ => {}
        }
    }
    Ok(())
}

/// Pairs that name each other, as `(min, max)` in ascending order.
pub fn mutual_pairs(reports: &[Option<usize>]) -> Vec<(usize, usize)> {
    (0..reports.len())
        .filter_map(|i| match reports[i] {
            Some(j) if i < j && reports[j] == Some(i) => Some((i, j)),
            _ => None,
        })
        .collect()
}

/// The randomness one mechanism run consumes.
///
/// Agents are drawn by scanning `agent_permutation` and skipping agents who
/// are placed or not eligible; friend pairs likewise from
/// `pair_permutation`. Pairs not listed count as coming after all listed
/// ones, in ascending order. `pair_coins[k]` decides who of
/// `pair_permutation[k]` picks first: `false` the lower index, `true` the
/// higher. Fields a mechanism does not use are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomBits {
    pub agent_permutation: Vec<usize>,
    pub pair_permutation: Vec<(usize, usize)>,
    pub pair_coins: Vec<bool>,
}

impl RandomBits {
    pub fn from_order(order: Vec<usize>) -> Self {
        RandomBits {
            agent_permutation: order,
            ..RandomBits::default()
        }
    }

    pub fn identity(n: usize) -> Self {
        RandomBits::from_order((0..n).collect())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        if self.agent_permutation.len() != n {
            return Err(Error::MalformedBits(format!(
                "agent permutation has {} entries, expected {n}",
                self.agent_permutation.len()
            )));
        }
        for &a in &self.agent_permutation {
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::MalformedBits(format!(
                    "agent permutation is not a permutation of 0..{n}"
                )));
            }
        }
        let mut pairs = std::collections::BTreeSet::new();
        for &(a, b) in &self.pair_permutation {
            if a >= b || b >= n || !pairs.insert((a, b)) {
                return Err(Error::MalformedBits(format!(
                    "pair ({a}, {b}) is not an ascending, unique pair of agents"
                )));
            }
        }
        if self.pair_coins.len() != self.pair_permutation.len() {
            return Err(Error::MalformedBits(format!(
                "{} coins for {} pairs",
                self.pair_coins.len(),
                self.pair_permutation.len()
            )));
        }
        Ok(())
    }

    /// Uniformly random bits for `n` agents and the given friend pairs.
    pub fn sample<R: Rng + ?Sized>(n: usize, pairs: &[(usize, usize)], rng: &mut R) -> Self {
        let mut agents: Vec<usize> = (0..n).collect();
        agents.shuffle(rng);
        let mut pair_permutation = pairs.to_vec();
        pair_permutation.shuffle(rng);
        let pair_coins = pair_permutation.iter().map(|_| rng.random_bool(0.5)).collect();
        RandomBits {
            agent_permutation: agents,
            pair_permutation,
            pair_coins,
        }
    }

    /// Size of the full space for `n` agents and `pairs` friend pairs:
    /// `n! · pairs! · 2^pairs`.
    pub fn space_size(n: usize, pairs: usize) -> u64 {
        factorial(n)
            .saturating_mul(factorial(pairs))
            .saturating_mul(1u64 << pairs.min(62))
    }

    /// The `index`-th element of the full space, `index < space_size`.
    /// Agent permutations vary slowest, coins fastest.
    pub fn nth(n: usize, pairs: &[(usize, usize)], index: u64) -> Self {
        let p = pairs.len();
        let coins_count = 1u64 << p;
        let pair_perms = factorial(p);
        let coins = index % coins_count;
        let rest = index / coins_count;
        let pair_index = rest % pair_perms;
        let agent_index = rest / pair_perms;
        let pair_permutation: Vec<_> = nth_permutation(p, pair_index).into_iter().map(|k| pairs[k]).collect();
        RandomBits {
            agent_permutation: nth_permutation(n, agent_index),
            pair_permutation,
            pair_coins: (0..p).map(|k| coins >> (p - 1 - k) & 1 == 1).collect(),
        }
    }
}

impl fmt::Display for RandomBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agents {:?}", self.agent_permutation)?;
        if !self.pair_permutation.is_empty() {
            write!(f, ", pairs {:?}, coins {:?}", self.pair_permutation, self.pair_coins)?;
        }
        Ok(())
    }
}

/// Why an agent picked when she did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PickRole {
    /// Drawn (or next in the announced order).
    Drawn,
    /// Invited by `by`; `constrained` when she had to pick next to `by`.
    Invited { by: usize, constrained: bool },
    /// First member of a drawn friend pair.
    PairFirst,
    /// Second member of a drawn friend pair.
    PairSecond,
    /// Placed in the final index-order fill once nobody wanted anything.
    Filled,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PickEvent {
    pub agent: usize,
    pub plot: usize,
    pub declared: Option<usize>,
    pub role: PickRole,
}

impl fmt::Display for PickEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {} -> plot {}", self.agent, self.plot)?;
        match self.role {
            PickRole::Drawn => {}
            PickRole::Invited { by, constrained } => {
                write!(f, " (invited by {by}{})", if constrained { ", adjacent" } else { "" })?
            }
            PickRole::PairFirst => write!(f, " (pair, first)")?,
            PickRole::PairSecond => write!(f, " (pair, second)")?,
            PickRole::Filled => write!(f, " (filled)")?,
        }
        if let Some(j) = self.declared {
            write!(f, ", declares {j}")?;
        }
        Ok(())
    }
}

/// A run in progress.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismState {
    pub placed: Vec<Option<usize>>,
    pub available: Vec<bool>,
    /// An invitee who must pick next to the given plot.
    pub pending_forced: Option<(usize, usize)>,
    pub declared: Vec<Option<usize>>,
    pub transcript: Vec<PickEvent>,
}

impl MechanismState {
    pub fn new(n: usize) -> Self {
        MechanismState {
            placed: vec![None; n],
            available: vec![true; n],
            pending_forced: None,
            declared: vec![None; n],
            transcript: Vec::new(),
        }
    }

    pub fn is_placed(&self, agent: usize) -> bool {
        self.placed[agent].is_some()
    }

    pub fn available_plots(&self) -> Vec<usize> {
        (0..self.available.len()).filter(|&v| self.available[v]).collect()
    }

    pub fn unplaced_agents(&self) -> Vec<usize> {
        (0..self.placed.len()).filter(|&i| self.placed[i].is_none()).collect()
    }

    pub(crate) fn place(&mut self, agent: usize, plot: usize, declared: Option<usize>, role: PickRole) {
        debug_assert!(self.placed[agent].is_none() && self.available[plot]);
        self.placed[agent] = Some(plot);
        self.available[plot] = false;
        if declared.is_some() {
            self.declared[agent] = declared;
        }
        if self.pending_forced.is_some_and(|(a, _)| a == agent) {
            self.pending_forced = None;
        }
        self.transcript.push(PickEvent {
            agent,
            plot,
            declared,
            role,
        });
    }

    pub(crate) fn into_allocation(self) -> Allocation {
        Allocation::new(self.placed.into_iter().map(|p| p.expect("run completed")).collect())
            .expect("runs place every agent on a distinct plot")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub mechanism: MechanismId,
    pub allocation: Allocation,
    pub utilities: Vec<Rational>,
    pub transcript: Vec<PickEvent>,
    pub bits: RandomBits,
}

impl RunOutcome {
    pub(crate) fn finish(inst: &Instance, mechanism: MechanismId, state: MechanismState, bits: RandomBits) -> Self {
        let transcript = state.transcript.clone();
        let allocation = state.into_allocation();
        let utilities = utilities(inst, &allocation).expect("sizes match");
        RunOutcome {
            mechanism,
            allocation,
            utilities,
            transcript,
            bits,
        }
    }

    pub fn welfare(&self) -> Rational {
        self.utilities.iter().sum()
    }

    /// Replays the transcript into an allocation.
    pub fn replay(&self) -> Result<Allocation> {
        let n = self.allocation.len();
        let mut plots = vec![usize::MAX; n];
        for e in &self.transcript {
            if e.agent >= n || plots[e.agent] != usize::MAX {
                return Err(Error::InvalidAllocation(format!(
                    "transcript places agent {} twice",
                    e.agent
                )));
            }
            plots[e.agent] = e.plot;
        }
        Allocation::new(plots)
    }
}

/// Runs `mech` once on `inst` with the given randomness and reports.
/// `reports` is ignored by mechanisms without friendship reports.
pub fn run(inst: &Instance, mech: MechanismId, bits: &RandomBits, reports: &[Option<usize>]) -> Result<RunOutcome> {
    inst.require_degree_one()?;
    bits.validate(inst.agent_count())?;
    validate_reports(inst, reports)?;
    if mech.is_closed_form() {
        let mut chance = BitsChance::new(bits);
        let state =
            run_closed_form(inst, mech, reports, &mut chance, None)?.expect("runs without a deviation always complete");
        Ok(RunOutcome::finish(inst, mech, state, bits.clone()))
    } else {
        let policy = oracle::DeclarationPolicy::Fixed(reports.to_vec());
        oracle::Oracle::new(inst, mech, policy)?.realize(bits)
    }
}
