//! Exhaustive search for profitable friendship misreports.
//!
//! An agent's utility under a report is the best she can reach with it:
//! for the closed-form mechanisms, the strategy run and every forced plot
//! choice under the same bits; for the game-tree mechanisms, her expected
//! utility with every agent playing optimally. All other agents report
//! truthfully.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mechanisms::oracle::{DeclarationPolicy, Oracle, Start};
use crate::mechanisms::{
    mutual_pairs, run_prepared, truthful_reports, BitsChance, Deviation, MechanismId, Prepared, RandomBits, Reports,
};
use crate::model::{utility_unchecked, Instance};
use crate::optimize::{factorial, nth_permutation};
use crate::rational::Rational;

/// What the utilities of a violation refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtScope {
    /// One realization of the random bits.
    Realization,
    /// Expectation over the remaining draws once `bits.agent_permutation[0]`
    /// has been drawn first.
    FirstDraw,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FtViolation {
    pub mechanism: MechanismId,
    pub agent: usize,
    pub true_report: Option<usize>,
    pub lying_report: Option<usize>,
    pub bits: RandomBits,
    pub scope: FtScope,
    pub truthful_utility: Rational,
    pub lying_utility: Rational,
}

impl FtViolation {
    /// Recomputes `(truthful_utility, lying_utility)` from scratch.
    pub fn replay(&self, inst: &Instance) -> Result<(Rational, Rational)> {
        let truth = truthful_reports(inst);
        let mut lie = truth.clone();
        lie[self.agent] = self.lying_report;
        let eval = |reports: &Reports| -> Result<Rational> {
            if self.mechanism.is_closed_form() {
                let prep = Prepared::new(inst);
                best_closed_form(&prep, self.mechanism, reports, &self.bits, self.agent)
            } else {
                let mut oracle = Oracle::new(inst, self.mechanism, DeclarationPolicy::Fixed(reports.clone()))?;
                let start = oracle_start(self.mechanism, &self.bits);
                Ok(oracle.expected_from(&start)?[self.agent].clone())
            }
        };
        Ok((eval(&truth)?, eval(&lie)?))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FtChecker {
    /// Largest agent count.
    pub cap: usize,
    pub exec: Execution,
}

impl Default for FtChecker {
    fn default() -> Self {
        FtChecker {
            cap: 6,
            exec: Execution::Parallel,
        }
    }
}

/// First profitable unilateral misreport, if any.
pub fn check_universal_ft(inst: &Instance, mech: MechanismId) -> Result<Option<FtViolation>> {
    FtChecker::default().check(inst, mech)
}

impl FtChecker {
    pub fn check(&self, inst: &Instance, mech: MechanismId) -> Result<Option<FtViolation>> {
        if !mech.uses_reports() {
            return Err(Error::Unsupported {
                mechanism: mech.name(),
                what: "friendship reports",
            });
        }
        inst.require_degree_one()?;
        let n = inst.agent_count();
        if n > self.cap {
            return Err(Error::SizeCap {
                what: "agents for the truthfulness check",
                size: n,
                cap: self.cap,
            });
        }
        if mech.is_closed_form() {
            Ok(self.closed_form(inst, mech))
        } else {
            self.game_tree(inst, mech)
        }
    }

    fn closed_form(&self, inst: &Instance, mech: MechanismId) -> Option<FtViolation> {
        let n = inst.agent_count();
        let truth = truthful_reports(inst);
        let pairs = if mech == MechanismId::FfCtRsdStar {
            mutual_pairs(&truth)
        } else {
            Vec::new()
        };
        let prep = Prepared::new(inst);
        let indices: Vec<u64> = (0..RandomBits::space_size(n, pairs.len())).collect();
        exec::find_first(self.exec, &indices, |&k| {
            let bits = RandomBits::nth(n, &pairs, k);
            for agent in 0..n {
                let honest = best_closed_form(&prep, mech, &truth, &bits, agent).expect("valid reports");
                for lie in lies(n, agent, truth[agent]) {
                    let mut reports = truth.clone();
                    reports[agent] = lie;
                    let lying = best_closed_form(&prep, mech, &reports, &bits, agent).expect("valid reports");
                    if lying > honest {
                        return Some(FtViolation {
                            mechanism: mech,
                            agent,
                            true_report: truth[agent],
                            lying_report: lie,
                            bits,
                            scope: FtScope::Realization,
                            truthful_utility: honest,
                            lying_utility: lying,
                        });
                    }
                }
            }
            None
        })
    }

    fn game_tree(&self, inst: &Instance, mech: MechanismId) -> Result<Option<FtViolation>> {
        let n = inst.agent_count();
        let truth = truthful_reports(inst);
        // the starts: every announced order, or every first draw
        let starts: Vec<RandomBits> = if mech.has_announced_order() {
            (0..factorial(n))
                .map(|k| RandomBits::from_order(nth_permutation(n, k)))
                .collect()
        } else {
            (0..n)
                .map(|f| {
                    let mut order = vec![f];
                    order.extend((0..n).filter(|&a| a != f));
                    RandomBits::from_order(order)
                })
                .collect()
        };
        let scope = if mech.has_announced_order() {
            FtScope::Realization
        } else {
            FtScope::FirstDraw
        };
        let evaluate = |reports: &Reports| -> Result<Vec<Vec<Rational>>> {
            let mut oracle = Oracle::with_cap(inst, mech, DeclarationPolicy::Fixed(reports.clone()), self.cap)?;
            starts
                .iter()
                .map(|b| oracle.expected_from(&oracle_start(mech, b)))
                .collect()
        };
        let honest = evaluate(&truth)?;
        let tasks: Vec<(usize, Option<usize>)> = (0..n)
            .flat_map(|agent| lies(n, agent, truth[agent]).into_iter().map(move |lie| (agent, lie)))
            .collect();
        let per_task = exec::map(self.exec, &tasks, |&(agent, lie)| -> Result<Vec<Rational>> {
            let mut reports = truth.clone();
            reports[agent] = lie;
            Ok(evaluate(&reports)?.into_iter().map(|u| u[agent].clone()).collect())
        });
        let per_task: Vec<Vec<Rational>> = per_task.into_iter().collect::<Result<_>>()?;
        for (s, bits) in starts.iter().enumerate() {
            for (t, &(agent, lie)) in tasks.iter().enumerate() {
                if per_task[t][s] > honest[s][agent] {
                    return Ok(Some(FtViolation {
                        mechanism: mech,
                        agent,
                        true_report: truth[agent],
                        lying_report: lie,
                        bits: bits.clone(),
                        scope,
                        truthful_utility: honest[s][agent].clone(),
                        lying_utility: per_task[t][s].clone(),
                    }));
                }
            }
        }
        Ok(None)
    }
}

/// Reports other than `truth`: nobody, then every other agent ascending.
fn lies(n: usize, agent: usize, truth: Option<usize>) -> Vec<Option<usize>> {
    std::iter::once(None)
        .chain((0..n).filter(|&j| j != agent).map(Some))
        .filter(|&r| r != truth)
        .collect()
}

fn oracle_start(mech: MechanismId, bits: &RandomBits) -> Start {
    if mech.has_announced_order() {
        Start::Order(bits.agent_permutation.clone())
    } else {
        Start::FirstDraw(bits.agent_permutation[0])
    }
}

/// Best utility `agent` reaches under `reports` and `bits`, over the
/// strategy run and every forced choice of her own plot.
fn best_closed_form(
    prep: &Prepared<'_>,
    mech: MechanismId,
    reports: &[Option<usize>],
    bits: &RandomBits,
    agent: usize,
) -> Result<Rational> {
    let n = prep.inst.agent_count();
    let mut best: Option<Rational> = None;
    let deviations = std::iter::once(None).chain((0..n).map(|plot| Some(Deviation { agent, plot })));
    for deviation in deviations {
        let mut chance = BitsChance::new(bits);
        if let Some(state) = run_prepared(prep, mech, reports, &mut chance, deviation)? {
            let plots: Vec<usize> = state.placed.iter().map(|p| p.expect("complete")).collect();
            let u = utility_unchecked(prep.inst, &plots, agent);
            if best.as_ref().is_none_or(|b| u > *b) {
                best = Some(u);
            }
        }
    }
    Ok(best.expect("the undeviated run completes"))
}
