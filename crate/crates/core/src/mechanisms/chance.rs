//! Where a run's random choices come from: fixed bits, or a script that
//! walks every branch of the chance tree.

use std::sync::atomic::{AtomicU64, Ordering};

use super::RandomBits;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub(crate) trait ChanceSource {
    /// Picks one of `candidates` (ascending, non-empty).
    fn draw_agent(&mut self, candidates: &[usize]) -> usize;
    /// Picks one of `candidates` (ascending, non-empty).
    fn draw_pair(&mut self, candidates: &[(usize, usize)]) -> (usize, usize);
    /// `true` when the higher-indexed member of `pair` picks first.
    fn coin(&mut self, pair: (usize, usize)) -> bool;
}

/// Resolves draws by scanning fixed [`RandomBits`].
pub(crate) struct BitsChance<'a> {
    bits: &'a RandomBits,
}

impl<'a> BitsChance<'a> {
    pub(crate) fn new(bits: &'a RandomBits) -> Self {
        BitsChance { bits }
    }
}

impl ChanceSource for BitsChance<'_> {
    fn draw_agent(&mut self, candidates: &[usize]) -> usize {
        self.bits
            .agent_permutation
            .iter()
            .copied()
            .find(|a| candidates.binary_search(a).is_ok())
            .unwrap_or(candidates[0])
    }

    fn draw_pair(&mut self, candidates: &[(usize, usize)]) -> (usize, usize) {
        self.bits
            .pair_permutation
            .iter()
            .copied()
            .find(|p| candidates.binary_search(p).is_ok())
            .unwrap_or(candidates[0])
    }

    fn coin(&mut self, pair: (usize, usize)) -> bool {
        self.bits
            .pair_permutation
            .iter()
            .position(|&p| p == pair)
            .map(|k| self.bits.pair_coins[k])
            .unwrap_or(false)
    }
}

/// Follows a script of branch indices, extending it with first branches
/// where it runs out. Draws with a single candidate are not branches.
#[derive(Clone, Debug, Default)]
pub(crate) struct PathChance {
    script: Vec<(usize, usize)>,
    pos: usize,
    /// Number of equally likely leaves this path stands for: the product
    /// of the branching factors along it.
    weight: u128,
    agents: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    coins: Vec<bool>,
}

impl PathChance {
    fn with_script(script: Vec<(usize, usize)>) -> Self {
        PathChance {
            script,
            pos: 0,
            weight: 1,
            ..PathChance::default()
        }
    }

    fn branch(&mut self, arity: usize) -> usize {
        if arity == 1 {
            return 0;
        }
        self.weight *= arity as u128;
        if self.pos == self.script.len() {
            self.script.push((0, arity));
        }
        let (choice, expected) = self.script[self.pos];
        debug_assert_eq!(expected, arity, "runs must be deterministic given the script");
        self.pos += 1;
        choice
    }

    /// Bits that make [`BitsChance`] replay this path: drawn agents first,
    /// in draw order, then everybody else ascending; likewise for pairs.
    pub(crate) fn bits(&self, n: usize, all_pairs: &[(usize, usize)]) -> RandomBits {
        let mut agent_permutation = self.agents.clone();
        agent_permutation.extend((0..n).filter(|a| !self.agents.contains(a)));
        let mut pair_permutation = self.pairs.clone();
        let mut pair_coins = self.coins.clone();
        for p in all_pairs {
            if !self.pairs.contains(p) {
                pair_permutation.push(*p);
                pair_coins.push(false);
            }
        }
        RandomBits {
            agent_permutation,
            pair_permutation,
            pair_coins,
        }
    }
}

impl ChanceSource for PathChance {
    fn draw_agent(&mut self, candidates: &[usize]) -> usize {
        let a = candidates[self.branch(candidates.len())];
        self.agents.push(a);
        a
    }

    fn draw_pair(&mut self, candidates: &[(usize, usize)]) -> (usize, usize) {
        let p = candidates[self.branch(candidates.len())];
        self.pairs.push(p);
        self.coins.push(false);
        p
    }

    fn coin(&mut self, pair: (usize, usize)) -> bool {
        let c = self.branch(2) == 1;
        if let Some(k) = self.pairs.iter().position(|&p| p == pair) {
            self.coins[k] = c;
        }
        c
    }
}

/// Runs `run` once per leaf of the chance tree and folds the results.
///
/// `fold` receives each leaf's weight (the product of branching factors along its path); a leaf's
/// probability is `1 / weight`. Fails with a size error once more than
/// `budget` leaves have been visited.
pub(crate) fn fold_paths<A, T, R, I, F, M>(
    exec: Execution,
    budget: u64,
    run: R,
    init: I,
    fold: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    R: Fn(&mut PathChance) -> Result<T> + Sync + Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u128, T) + Sync + Send,
    M: Fn(A, A) -> A,
{
    let mut probe = PathChance::with_script(Vec::new());
    let first = run(&mut probe)?;
    if probe.script.is_empty() {
        let mut acc = init();
        fold(&mut acc, probe.weight, first);
        return Ok(acc);
    }
    let top = probe.script[0].1;
    let visited = AtomicU64::new(0);
    let parts = exec::map_range(exec, top, |choice| -> Result<A> {
        let mut acc = init();
        let mut script = vec![(choice, top)];
        loop {
            let mut chance = PathChance::with_script(script);
            let t = run(&mut chance)?;
            if visited.fetch_add(1, Ordering::Relaxed) >= budget {
                return Err(Error::SizeCap {
                    what: "chance-tree leaves",
                    size: budget as usize + 1,
                    cap: budget as usize,
                });
            }
            fold(&mut acc, chance.weight, t);
            script = chance.script;
            script.truncate(chance.pos);
            loop {
                if script.len() <= 1 {
                    return Ok(acc);
                }
                let last = script.last_mut().expect("non-empty");
                if last.0 + 1 < last.1 {
                    last.0 += 1;
                    break;
                }
                script.pop();
            }
        }
    });
    let mut out: Option<A> = None;
    for part in parts {
        let part = part?;
        out = Some(match out {
            None => part,
            Some(acc) => merge(acc, part),
        });
    }
    Ok(out.expect("at least one branch"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Draw agents until none are left; the leaves are all permutations.
    fn draw_all(chance: &mut PathChance, n: usize) -> Vec<usize> {
        let mut left: Vec<usize> = (0..n).collect();
        let mut order = Vec::new();
        while !left.is_empty() {
            let a = chance.draw_agent(&left);
            left.retain(|&x| x != a);
            order.push(a);
        }
        order
    }

    #[test]
    fn enumerates_every_permutation_once() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let orders = fold_paths(
                exec,
                1000,
                |c| Ok((draw_all(c, 4), c.weight)),
                Vec::new,
                |acc, w, t| acc.push((w, t)),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )
            .unwrap();
            assert_eq!(orders.len(), 24);
            assert!(orders.iter().all(|(w, (_, w2))| *w == 24 && w == w2));
            let mut seen: Vec<_> = orders.iter().map(|(_, (o, _))| o.clone()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), 24);
        }
    }

    #[test]
    fn uneven_tree_weights_sum_to_one() {
        // a coin, then on heads a 3-way draw
        let leaves = fold_paths(
            Execution::Sequential,
            100,
            |c| {
                if c.coin((0, 1)) {
                    c.draw_agent(&[0, 1, 2]);
                }
                Ok(())
            },
            Vec::new,
            |acc, w, ()| acc.push(w),
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .unwrap();
        let mut sorted = leaves.clone();
        sorted.sort();
        assert_eq!(sorted, vec![2, 6, 6, 6]);
    }

    #[test]
    fn budget_is_enforced() {
        let r = fold_paths(
            Execution::Sequential,
            5,
            |c| Ok(draw_all(c, 4)),
            || (),
            |_, _, _| {},
            |a, _| a,
        );
        assert!(matches!(r, Err(Error::SizeCap { .. })));
    }

    #[test]
    fn path_bits_replay() {
        let mut chance = PathChance::with_script(vec![(2, 4), (0, 3)]);
        let order = draw_all(&mut chance, 4);
        let bits = chance.bits(4, &[]);
        let mut replay = BitsChance::new(&bits);
        let mut left: Vec<usize> = (0..4).collect();
        for a in order {
            assert_eq!(replay.draw_agent(&left), a);
            left.retain(|&x| x != a);
        }
    }
}
