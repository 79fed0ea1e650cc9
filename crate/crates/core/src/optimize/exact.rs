use super::scaled::Scaled;
use super::{assign, Method, OptResult};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{social_welfare, Allocation, Instance};
use crate::rational::Rational;

/// Exact optimum for degree-one friendships without enumerating all `n!`
/// allocations.
///
/// Every friend pair is either left to chance or seated on an oriented plot
/// edge, disjoint from the other seated pairs; everybody else gets an
/// optimal value assignment of the remaining plots. Some choice reproduces
/// an optimal allocation's adjacent pairs, and every leaf is scored by its
/// true welfare, so the best leaf is optimal. The number of leaves grows
/// with the number of ways to pack pairs onto plot edges, which is small on
/// sparse plot graphs (paths, stars, isolated plots).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairPlacement {
    /// Upper bound on enumerated placements before giving up.
    pub leaf_limit: u64,
    pub exec: Execution,
}

impl Default for PairPlacement {
    fn default() -> Self {
        PairPlacement {
            leaf_limit: 2_000_000,
            exec: Execution::default(),
        }
    }
}

/// [`PairPlacement::solve`] with default limits.
pub fn exact_opt(inst: &Instance) -> Result<OptResult> {
    PairPlacement::default().solve(inst)
}

struct Ctx<'a> {
    inst: &'a Instance,
    scaled: Option<Scaled<'a>>,
    pairs: Vec<(usize, usize)>,
    arcs: Vec<(usize, usize)>,
}

impl PairPlacement {
    pub fn solve(&self, inst: &Instance) -> Result<OptResult> {
        inst.require_degree_one()?;
        let n = inst.agent_count();
        let pairs: Vec<_> = inst.friendships().pairs().iter().map(|p| (p.a, p.b)).collect();
        let arcs: Vec<_> = inst
            .plot_graph()
            .edges()
            .iter()
            .flat_map(|&(v, w)| [(v, w), (w, v)])
            .collect();
        let leaves = count_leaves(n, pairs.len(), &arcs, self.leaf_limit);
        if leaves > self.leaf_limit {
            return Err(Error::SizeCap {
                what: "pair placements",
                size: leaves as usize,
                cap: self.leaf_limit as usize,
            });
        }
        let ctx = Ctx {
            inst,
            scaled: Scaled::new(inst),
            pairs,
            arcs,
        };

        // Branch on the first pair's option: none, or one of the arcs.
        let first_options = if ctx.pairs.is_empty() { 1 } else { ctx.arcs.len() + 1 };
        let branches = exec::map_range(self.exec, first_options, |opt| {
            let mut plots = vec![usize::MAX; n];
            let mut used = vec![false; n];
            let mut best = None;
            if ctx.pairs.is_empty() {
                ctx.leaf(&plots, &used, &mut best);
            } else {
                ctx.try_option(0, opt, &mut plots, &mut used, &mut best);
            }
            best
        });
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for b in branches.into_iter().flatten() {
            if best.as_ref().is_none_or(|cur| b.0 > cur.0) {
                best = Some(b);
            }
        }
        let (welfare, plots) = best.expect("the all-unseated option always exists");
        Ok(OptResult {
            allocation: Allocation::new(plots)?,
            welfare,
            method: Method::PairPlacement,
        })
    }
}

fn count_leaves(n: usize, pairs: usize, arcs: &[(usize, usize)], limit: u64) -> u64 {
    fn go(k: usize, pairs: usize, arcs: &[(usize, usize)], used: &mut [bool], count: &mut u64, limit: u64) {
        if *count > limit {
            return;
        }
        if k == pairs {
            *count += 1;
            return;
        }
        go(k + 1, pairs, arcs, used, count, limit);
        for &(v, w) in arcs {
            if !used[v] && !used[w] {
                used[v] = true;
                used[w] = true;
                go(k + 1, pairs, arcs, used, count, limit);
                used[v] = false;
                used[w] = false;
            }
        }
    }
    let mut count = 0;
    go(0, pairs, arcs, &mut vec![false; n], &mut count, limit);
    count
}

type Best = Option<(Rational, Vec<usize>)>;

impl Ctx<'_> {
    fn try_option(&self, k: usize, opt: usize, plots: &mut [usize], used: &mut [bool], best: &mut Best) {
        if opt == 0 {
            self.recurse(k + 1, plots, used, best);
            return;
        }
        let (v, w) = self.arcs[opt - 1];
        if used[v] || used[w] {
            return;
        }
        let (a, b) = self.pairs[k];
        plots[a] = v;
        plots[b] = w;
        used[v] = true;
        used[w] = true;
        self.recurse(k + 1, plots, used, best);
        used[v] = false;
        used[w] = false;
        plots[a] = usize::MAX;
        plots[b] = usize::MAX;
    }

    fn recurse(&self, k: usize, plots: &mut [usize], used: &mut [bool], best: &mut Best) {
        if k == self.pairs.len() {
            self.leaf(plots, used, best);
            return;
        }
        for opt in 0..=self.arcs.len() {
            self.try_option(k, opt, plots, used, best);
        }
    }

    fn leaf(&self, plots: &[usize], used: &[bool], best: &mut Best) {
        let agents: Vec<usize> = (0..plots.len()).filter(|&i| plots[i] == usize::MAX).collect();
        let free: Vec<usize> = (0..used.len()).filter(|&v| !used[v]).collect();
        let m = agents.len();
        let cols = match &self.scaled {
            Some(s) => assign(m, |r, c| s.value(agents[r], free[c]) as i128),
            None => assign(m, |r, c| self.inst.value(agents[r], free[c]).clone()),
        };
        let mut full = plots.to_vec();
        for (r, &c) in cols.iter().enumerate() {
            full[agents[r]] = free[c];
        }
        let welfare = match &self.scaled {
            Some(s) => s.to_rational(s.welfare(&full)),
            None => {
                let a = Allocation::new(full.clone()).expect("bijection by construction");
                social_welfare(self.inst, &a).expect("sizes match")
            }
        };
        let better = match best {
            None => true,
            Some((w, p)) => welfare > *w || (welfare == *w && full < *p),
        };
        if better {
            *best = Some((welfare, full));
        }
    }
}
