//! Welfare maximization: exhaustive search, an exact pair-placement search for
//! degree-one friendships, and the polynomial 2-approximation.

mod approx;
mod assignment;
mod brute;
mod exact;
mod matching;
pub(crate) mod scaled;

pub use approx::{two_approx, two_approx_candidates};
pub(crate) use assignment::assign;
pub use assignment::max_weight_assignment;
pub use brute::{brute_force_opt, BruteForce, DEFAULT_BRUTE_FORCE_CAP};
pub use exact::{exact_opt, PairPlacement};
pub use matching::maximum_matching;

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::rational::Rational;

/// How an [`OptResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exhaustive search over all allocations.
    BruteForce,
    /// Exhaustive search over placements of friend pairs on plot edges,
    /// with an optimal assignment of everybody else.
    PairPlacement,
    /// The 2-approximation's friend-pairs-on-a-matching candidate.
    FriendshipSide,
    /// The 2-approximation's value-maximizing assignment.
    ValueSide,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute-force",
            Method::PairPlacement => "pair-placement",
            Method::FriendshipSide => "two-approx/friendship-side",
            Method::ValueSide => "two-approx/value-side",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub allocation: Allocation,
    pub welfare: Rational,
    pub method: Method,
}

/// Maximum welfare by exhaustive search when `n` is within the default cap,
/// otherwise by pair placement (degree-one friendships only).
pub fn optimum(inst: &Instance) -> Result<OptResult> {
    let n = inst.agent_count();
    if n <= DEFAULT_BRUTE_FORCE_CAP {
        return brute_force_opt(inst);
    }
    match inst.require_degree_one() {
        Ok(()) => exact_opt(inst),
        Err(_) => Err(Error::SizeCap {
            what: "agents for exhaustive search with unrestricted friendships",
            size: n,
            cap: DEFAULT_BRUTE_FORCE_CAP,
        }),
    }
}

/// Advances `perm` to the next permutation in lexicographic order; returns
/// `false` (leaving it sorted ascending) after the last one.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// The `index`-th permutation of `0..n` in lexicographic order.
pub fn nth_permutation(n: usize, mut index: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let f = factorial(k);
        let pos = (index / f) as usize;
        index %= f;
        out.push(pool.remove(pos));
    }
    out
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}
