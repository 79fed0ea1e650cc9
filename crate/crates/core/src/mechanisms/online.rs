//! Runs of the mechanisms whose agents follow closed-form strategies.

use super::chance::ChanceSource;
use super::strategy::{best_among, choose, is_singleton, ExactScorer, ScaledScorer, Scorer};
use super::{mutual_pairs, MechanismId, MechanismState, PickRole};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::optimize::scaled::Scaled;

/// Forces `agent` onto `plot` whenever she picks. Runs where that pick is
/// not legal are abandoned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Deviation {
    pub agent: usize,
    pub plot: usize,
}

/// Precomputed per-instance data shared by many runs.
pub(crate) struct Prepared<'a> {
    pub inst: &'a Instance,
    scaled: Option<Scaled<'a>>,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(inst: &'a Instance) -> Self {
        Prepared {
            inst,
            scaled: Scaled::new(inst),
        }
    }
}

/// Runs a closed-form mechanism; `Ok(None)` when the deviation was illegal.
pub(crate) fn run_closed_form<C: ChanceSource>(
    inst: &Instance,
    mech: MechanismId,
    reports: &[Option<usize>],
    chance: &mut C,
    deviation: Option<Deviation>,
) -> Result<Option<MechanismState>> {
    run_prepared(&Prepared::new(inst), mech, reports, chance, deviation)
}

pub(crate) fn run_prepared<C: ChanceSource>(
    prep: &Prepared<'_>,
    mech: MechanismId,
    reports: &[Option<usize>],
    chance: &mut C,
    deviation: Option<Deviation>,
) -> Result<Option<MechanismState>> {
    if !mech.is_closed_form() {
        return Err(Error::Unsupported {
            mechanism: mech.name(),
            what: "closed-form strategies",
        });
    }
    match &prep.scaled {
        Some(s) => Runner::new(ScaledScorer(s), mech, reports, chance, deviation).run(),
        None => Runner::new(ExactScorer(prep.inst), mech, reports, chance, deviation).run(),
    }
}

struct Runner<'r, S, C> {
    scorer: S,
    mech: MechanismId,
    reports: &'r [Option<usize>],
    chance: &'r mut C,
    deviation: Option<Deviation>,
    state: MechanismState,
}

/// Marker for an abandoned run.
struct Illegal;

impl<'r, S: Scorer, C: ChanceSource> Runner<'r, S, C> {
    fn new(
        scorer: S,
        mech: MechanismId,
        reports: &'r [Option<usize>],
        chance: &'r mut C,
        deviation: Option<Deviation>,
    ) -> Self {
        let n = scorer.instance().agent_count();
        Runner {
            scorer,
            mech,
            reports,
            chance,
            deviation,
            state: MechanismState::new(n),
        }
    }

    fn run(mut self) -> Result<Option<MechanismState>> {
        let done = match self.mech {
            MechanismId::OnCtRsd => self.online(false, false),
            MechanismId::OnCaRsd => self.online(true, false),
            MechanismId::OnCaRsdStar => self.online(true, true),
            MechanismId::RsdStar => self.rsd_star(),
            MechanismId::FfCtRsdStar => self.friends_first().and_then(|()| self.rsd_star()),
            _ => unreachable!("checked by caller"),
        };
        Ok(done.ok().map(|()| self.state))
    }

    fn inst(&self) -> &Instance {
        self.scorer.instance()
    }

    /// Applies the deviation, if it concerns `agent`.
    fn settle(&self, agent: usize, chosen: usize, allowed: impl Fn(usize) -> bool) -> Result<usize, Illegal> {
        match self.deviation {
            Some(d) if d.agent == agent => {
                if allowed(d.plot) {
                    Ok(d.plot)
                } else {
                    Err(Illegal)
                }
            }
            _ => Ok(chosen),
        }
    }

    fn all_zero(&self, agent: usize) -> bool {
        !self
            .state
            .available_plots()
            .into_iter()
            .any(|v| self.scorer.value_is_positive(agent, v))
    }

    fn online(&mut self, adjacent: bool, defer_idle: bool) -> Result<(), Illegal> {
        loop {
            let unplaced = self.state.unplaced_agents();
            if unplaced.is_empty() {
                return Ok(());
            }
            let candidates: Vec<usize> = if defer_idle {
                unplaced
                    .into_iter()
                    .filter(|&i| self.reports[i].is_some() || !self.all_zero(i))
                    .collect()
            } else {
                unplaced
            };
            if candidates.is_empty() {
                return self.fill();
            }
            let a = self.chance.draw_agent(&candidates);
            let (v, declared) = choose(&self.scorer, &self.state, a, self.reports[a], adjacent);
            let v = self.settle(a, v, |p| self.state.available[p])?;
            let singleton = is_singleton(self.inst(), &self.state.available, v);
            self.state.place(a, v, declared, PickRole::Drawn);
            let Some(d) = declared else { continue };
            let constrained = adjacent && !singleton;
            if constrained {
                self.state.pending_forced = Some((d, v));
            }
            let graph = self.inst().plot_graph();
            let allowed = |w: usize| self.state.available[w] && (!constrained || graph.adjacent(v, w));
            let free: Vec<usize> = (0..self.state.available.len()).filter(|&w| allowed(w)).collect();
            let r = best_among(&self.scorer, &self.state.placed, d, free.iter().copied())
                .expect("invitee has a legal plot");
            let r = self.settle(d, r, allowed)?;
            self.state.place(d, r, None, PickRole::Invited { by: a, constrained });
        }
    }

    fn rsd_star(&mut self) -> Result<(), Illegal> {
        loop {
            let unplaced = self.state.unplaced_agents();
            if unplaced.is_empty() {
                return Ok(());
            }
            let eligible: Vec<usize> = unplaced.into_iter().filter(|&i| !self.all_zero(i)).collect();
            if eligible.is_empty() {
                return self.fill();
            }
            let a = self.chance.draw_agent(&eligible);
            let v = best_among(&self.scorer, &self.state.placed, a, self.state.available_plots())
                .expect("a plot is available");
            let v = self.settle(a, v, |p| self.state.available[p])?;
            self.state.place(a, v, None, PickRole::Drawn);
        }
    }

    fn adjacent_free_pair_exists(&self) -> bool {
        let avail = &self.state.available;
        self.inst()
            .plot_graph()
            .edges()
            .iter()
            .any(|&(v, w)| avail[v] && avail[w])
    }

    fn friends_first(&mut self) -> Result<(), Illegal> {
        let mut pool = mutual_pairs(self.reports);
        while !pool.is_empty() && self.adjacent_free_pair_exists() {
            let pair = self.chance.draw_pair(&pool);
            pool.retain(|&p| p != pair);
            let (first, second) = if self.chance.coin(pair) { (pair.1, pair.0) } else { pair };
            let (v, _) = choose(&self.scorer, &self.state, first, Some(second), false);
            let v = self.settle(first, v, |p| self.state.available[p])?;
            self.state.place(first, v, Some(second), PickRole::PairFirst);
            let r = best_among(&self.scorer, &self.state.placed, second, self.state.available_plots())
                .expect("a plot is available");
            let r = self.settle(second, r, |p| self.state.available[p])?;
            self.state.place(second, r, None, PickRole::PairSecond);
        }
        Ok(())
    }

    /// Remaining agents in index order onto remaining plots in index order.
    fn fill(&mut self) -> Result<(), Illegal> {
        let agents = self.state.unplaced_agents();
        let plots = self.state.available_plots();
        for (a, v) in agents.into_iter().zip(plots) {
            let v = self.settle(a, v, |p| p == v)?;
            self.state.place(a, v, None, PickRole::Filled);
        }
        Ok(())
    }
}
