use super::scaled::Scaled;
use super::{Method, OptResult};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{utility_unchecked, Allocation, Instance};
use crate::rational::Rational;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 9;

/// Exhaustive welfare maximization. Accepts friendship graphs of any degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForce {
    pub cap: usize,
    pub exec: Execution,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce {
            cap: DEFAULT_BRUTE_FORCE_CAP,
            exec: Execution::default(),
        }
    }
}

/// [`BruteForce::solve`] with the default cap.
pub fn brute_force_opt(inst: &Instance) -> Result<OptResult> {
    BruteForce::default().solve(inst)
}

impl BruteForce {
    /// A welfare-maximizing allocation; among ties the lexicographically
    /// smallest assignment array.
    pub fn solve(&self, inst: &Instance) -> Result<OptResult> {
        let n = inst.agent_count();
        if n > self.cap {
            return Err(Error::SizeCap {
                what: "agents for exhaustive search",
                size: n,
                cap: self.cap,
            });
        }
        if n == 0 {
            return Ok(OptResult {
                allocation: Allocation::identity(0),
                welfare: Rational::zero(),
                method: Method::BruteForce,
            });
        }
        let best = match Scaled::new(inst) {
            Some(scaled) => {
                let (w, plots) = self.search(n, |p| scaled.welfare(p));
                (scaled.to_rational(w), plots)
            }
            None => self.search(n, |p| (0..n).map(|i| utility_unchecked(inst, p, i)).sum::<Rational>()),
        };
        Ok(OptResult {
            allocation: Allocation::new(best.1)?,
            welfare: best.0,
            method: Method::BruteForce,
        })
    }

    fn search<S, F>(&self, n: usize, score: F) -> (S, Vec<usize>)
    where
        S: Ord + Clone + Send,
        F: Fn(&[usize]) -> S + Sync + Send,
    {
        let branches = exec::map_range(self.exec, n, |first| {
            let mut best: Option<(S, Vec<usize>)> = None;
            let mut plots = vec![usize::MAX; n];
            let mut used = vec![false; n];
            plots[0] = first;
            used[first] = true;
            dfs(1, &mut plots, &mut used, &score, &mut best);
            best.expect("every branch has a completion")
        });
        let mut best: Option<(S, Vec<usize>)> = None;
        for b in branches {
            if best.as_ref().is_none_or(|cur| b.0 > cur.0) {
                best = Some(b);
            }
        }
        best.expect("n >= 1")
    }
}

fn dfs<S: Ord + Clone, F: Fn(&[usize]) -> S>(
    agent: usize,
    plots: &mut [usize],
    used: &mut [bool],
    score: &F,
    best: &mut Option<(S, Vec<usize>)>,
) {
    let n = plots.len();
    if agent == n {
        let s = score(plots);
        if best.as_ref().is_none_or(|b| s > b.0) {
            *best = Some((s, plots.to_vec()));
        }
        return;
    }
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            plots[agent] = v;
            dfs(agent + 1, plots, used, score, best);
            used[v] = false;
        }
    }
}
