//! Pareto optimality of single allocations and of every mechanism outcome.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mechanisms::oracle::{DeclarationPolicy, Oracle};
use crate::mechanisms::{
    fold_paths, mutual_pairs, run_prepared, validate_reports, MechanismId, PathChance, Prepared, RandomBits,
};
use crate::model::{dominates_utilities, utilities, utility_unchecked, Allocation, Instance};
use crate::optimize::next_permutation;
use crate::optimize::scaled::Scaled;
use crate::rational::Rational;

pub const DEFAULT_PARETO_CAP: usize = 9;

/// A realization whose outcome is dominated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoWitness {
    pub bits: RandomBits,
    pub allocation: Allocation,
    pub dominating: Allocation,
}

#[derive(Clone, Copy, Debug)]
pub struct ParetoChecker {
    /// Largest agent count for the allocation scan.
    pub cap: usize,
    /// Largest number of chance-tree leaves a universal check may visit.
    pub leaf_budget: u64,
    pub exec: Execution,
}

impl Default for ParetoChecker {
    fn default() -> Self {
        ParetoChecker {
            cap: DEFAULT_PARETO_CAP,
            leaf_budget: 2_000_000,
            exec: Execution::Parallel,
        }
    }
}

/// Lexicographically smallest allocation dominating `alloc`, if any.
pub fn check_pareto(inst: &Instance, alloc: &Allocation) -> Result<Option<Allocation>> {
    ParetoChecker::default().check(inst, alloc)
}

/// First realization (in enumeration order) whose outcome is not Pareto
/// optimal.
pub fn check_universal_po(inst: &Instance, mech: MechanismId, reports: &[Option<usize>]) -> Result<Option<PoWitness>> {
    ParetoChecker::default().check_universal(inst, mech, reports)
}

impl ParetoChecker {
    pub fn check(&self, inst: &Instance, alloc: &Allocation) -> Result<Option<Allocation>> {
        inst.check_allocation(alloc)?;
        let n = inst.agent_count();
        if n > self.cap {
            return Err(Error::SizeCap {
                what: "agents for the Pareto scan",
                size: n,
                cap: self.cap,
            });
        }
        Ok(match Scaled::new(inst) {
            Some(s) => {
                let target: Vec<i128> = (0..n).map(|i| s.utility(alloc.plots(), i)).collect();
                scan(self.exec, n, |plots| dominates_by(&target, |i| s.utility(plots, i)))
            }
            None => {
                let target = utilities(inst, alloc)?;
                scan(self.exec, n, |plots| {
                    let u: Vec<Rational> = (0..n).map(|i| utility_unchecked(inst, plots, i)).collect();
                    dominates_utilities(&u, &target)
                })
            }
        })
    }

    pub fn check_universal(
        &self,
        inst: &Instance,
        mech: MechanismId,
        reports: &[Option<usize>],
    ) -> Result<Option<PoWitness>> {
        inst.require_degree_one()?;
        validate_reports(inst, reports)?;
        let n = inst.agent_count();
        if n > self.cap {
            return Err(Error::SizeCap {
                what: "agents for the Pareto scan",
                size: n,
                cap: self.cap,
            });
        }
        let outcomes = if mech.is_closed_form() {
            let prep = Prepared::new(inst);
            let pairs = mutual_pairs(reports);
            fold_paths(
                self.exec,
                self.leaf_budget,
                |c: &mut PathChance| {
                    let state = run_prepared(&prep, mech, reports, c, None)?.expect("no deviation");
                    Ok((c.bits(n, &pairs), state.into_allocation()))
                },
                Vec::new,
                |acc, _, t| acc.push(t),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )?
        } else {
            let mut oracle = Oracle::new(inst, mech, DeclarationPolicy::Fixed(reports.to_vec()))?;
            let mut order: Vec<usize> = (0..n).collect();
            let mut out = Vec::new();
            loop {
                let bits = RandomBits::from_order(order.clone());
                let run = oracle.realize(&bits)?;
                out.push((bits, run.allocation));
                if !next_permutation(&mut order) {
                    break;
                }
            }
            out
        };
        // many realizations share an outcome; check each outcome once
        let mut distinct: Vec<Allocation> = outcomes.iter().map(|(_, a)| a.clone()).collect();
        distinct.sort();
        distinct.dedup();
        let verdicts = exec::map(self.exec, &distinct, |a| {
            ParetoChecker {
                exec: Execution::Sequential,
                ..*self
            }
            .check(inst, a)
        });
        let mut table = HashMap::new();
        for (a, v) in distinct.into_iter().zip(verdicts) {
            table.insert(a, v?);
        }
        Ok(outcomes.into_iter().find_map(|(bits, allocation)| {
            table[&allocation].clone().map(|dominating| PoWitness {
                bits,
                allocation,
                dominating,
            })
        }))
    }
}

fn dominates_by(target: &[i128], u: impl Fn(usize) -> i128) -> bool {
    let mut strict = false;
    for (i, &t) in target.iter().enumerate() {
        let x = u(i);
        if x < t {
            return false;
        }
        strict |= x > t;
    }
    strict
}

/// First permutation in lexicographic order satisfying `pred`, split into
/// blocks by the first agent's plot.
fn scan<F>(exec: Execution, n: usize, pred: F) -> Option<Allocation>
where
    F: Fn(&[usize]) -> bool + Sync + Send,
{
    let heads: Vec<usize> = (0..n).collect();
    exec::find_first(exec, &heads, |&head| {
        let mut rest: Vec<usize> = (0..n).filter(|&v| v != head).collect();
        let mut plots = vec![head; n];
        loop {
            plots[1..].copy_from_slice(&rest);
            if pred(&plots) {
                return Some(Allocation::new(plots).expect("a permutation"));
            }
            if !next_permutation(&mut rest) {
                return None;
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixtures;
    use crate::mechanisms::truthful_reports;
    use crate::model::{FriendshipGraph, PlotGraph};
    use crate::rational::rat;

    fn alloc(v: &[usize]) -> Allocation {
        Allocation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_edge_witness() {
        let inst = fixtures::single_edge();
        assert_eq!(
            check_pareto(&inst, &alloc(&[0, 2, 1])).unwrap(),
            Some(alloc(&[1, 2, 0]))
        );
        assert_eq!(check_pareto(&inst, &alloc(&[1, 2, 0])).unwrap(), None);
    }

    #[test]
    fn path_pairs_witness_is_lexicographically_first() {
        let inst = fixtures::path_pairs();
        assert_eq!(
            check_pareto(&inst, &alloc(&[1, 2, 3, 0])).unwrap(),
            Some(alloc(&[0, 2, 3, 1]))
        );
    }

    #[test]
    fn single_agent_is_optimal() {
        let inst = Instance::new(PlotGraph::empty(1), FriendshipGraph::none(1), vec![vec![rat("1/2")]]).unwrap();
        assert_eq!(check_pareto(&inst, &Allocation::identity(1)).unwrap(), None);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let inst = fixtures::path_pairs();
        for a in [[1, 2, 3, 0], [0, 1, 2, 3], [3, 2, 1, 0]] {
            let a = alloc(&a);
            let seq = ParetoChecker {
                exec: Execution::Sequential,
                ..Default::default()
            };
            assert_eq!(seq.check(&inst, &a).unwrap(), check_pareto(&inst, &a).unwrap());
        }
    }

    #[test]
    fn universal_witness_for_choose_together() {
        let inst = fixtures::single_edge();
        let w = check_universal_po(&inst, MechanismId::OnCtRsd, &truthful_reports(&inst))
            .unwrap()
            .expect("the single-edge instance has a dominated outcome");
        assert_eq!(w.bits.agent_permutation[0], 0);
        assert_eq!(w.allocation, alloc(&[0, 2, 1]));
        assert_eq!(w.dominating, alloc(&[1, 2, 0]));
    }

    #[test]
    fn cap_is_enforced() {
        let inst = fixtures::hub(10);
        assert!(matches!(
            check_pareto(&inst, &Allocation::identity(10)),
            Err(Error::SizeCap { .. })
        ));
    }
}
