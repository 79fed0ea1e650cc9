use super::scaled::Scaled;
use super::{assign, max_weight_assignment, maximum_matching, Method, OptResult};
use crate::error::Result;
use crate::model::{social_welfare, Allocation, Instance};

/// The two candidates of the 2-approximation.
///
/// The first seats friend pairs, heaviest total weight first, on the edges of
/// a maximum plot matching (lower agent on the lower endpoint) and fills the
/// rest in index order. The second maximizes the sum of plot values alone.
pub fn two_approx_candidates(inst: &Instance) -> Result<(Allocation, Allocation)> {
    inst.require_degree_one()?;
    let n = inst.agent_count();
    let matching = maximum_matching(inst.plot_graph());
    let mut pairs: Vec<_> = inst.friendships().pairs().iter().collect();
    // Stable sort keeps ascending agent order among equal totals.
    pairs.sort_by_key(|p| std::cmp::Reverse(p.total_weight()));

    let mut plots = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (pair, &(v, w)) in pairs.iter().zip(&matching) {
        plots[pair.a] = v;
        plots[pair.b] = w;
        taken[v] = true;
        taken[w] = true;
    }
    let mut free = (0..n).filter(|&v| !taken[v]);
    for slot in plots.iter_mut().filter(|p| **p == usize::MAX) {
        *slot = free.next().expect("as many plots as agents");
    }
    let friendship_side = Allocation::new(plots)?;

    let value_side = match Scaled::new(inst) {
        Some(s) => Allocation::new(assign(n, |i, v| s.value(i, v) as i128))?,
        None => max_weight_assignment(inst.values())?,
    };
    Ok((friendship_side, value_side))
}

/// The better of the two candidates; the value side wins ties. Its welfare
/// is at least half the optimum.
pub fn two_approx(inst: &Instance) -> Result<OptResult> {
    let (a1, a2) = two_approx_candidates(inst)?;
    let w1 = social_welfare(inst, &a1)?;
    let w2 = social_welfare(inst, &a2)?;
    Ok(if w1 > w2 {
        OptResult {
            allocation: a1,
            welfare: w1,
            method: Method::FriendshipSide,
        }
    } else {
        OptResult {
            allocation: a2,
            welfare: w2,
            method: Method::ValueSide,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_instance, RandomSpec, Topology, ValuationMode};
    use crate::model::{FriendPair, FriendshipGraph, PlotGraph};
    use crate::optimize::{brute_force_opt, next_permutation};
    use crate::rational::{rat, Rational};

    #[test]
    fn no_friends_returns_value_side_optimum() {
        let values = vec![
            vec![rat("1/2"), rat("1"), rat("0")],
            vec![rat("1"), rat("1/3"), rat("0")],
            vec![rat("0"), rat("1/4"), rat("1/5")],
        ];
        let inst = Instance::new(PlotGraph::path(3), FriendshipGraph::none(3), values).unwrap();
        let r = two_approx(&inst).unwrap();
        assert_eq!(r.method, Method::ValueSide);
        assert_eq!(r.welfare, brute_force_opt(&inst).unwrap().welfare);
    }

    #[test]
    fn uniform_values_seat_every_pair() {
        // path of 6: matching of size 3, two pairs fit
        let c = rat("1/3");
        let friends = FriendshipGraph::new(
            6,
            vec![
                FriendPair::new(0, 5, rat("1/2"), rat("1/4")),
                FriendPair::symmetric(2, 3, rat("2")),
            ],
        )
        .unwrap();
        let inst = Instance::new(PlotGraph::path(6), friends, vec![vec![c.clone(); 6]; 6]).unwrap();
        let r = two_approx(&inst).unwrap();
        let expected = Rational::from_integer(6) * c + rat("3/4") + rat("4");
        assert_eq!(r.welfare, expected);
        assert_eq!(r.method, Method::FriendshipSide);
        assert_eq!(brute_force_opt(&inst).unwrap().welfare, expected);
        // heaviest pair on the first matching edge, lower agent on lower plot
        assert_eq!(&r.allocation.plots()[2..4], &[0, 1]);
        assert_eq!((r.allocation.plot_of(0), r.allocation.plot_of(5)), (2, 3));
    }

    #[test]
    fn rejects_degree_two() {
        let friends = FriendshipGraph::unrestricted(
            3,
            vec![
                FriendPair::symmetric(0, 1, rat("1")),
                FriendPair::symmetric(1, 2, rat("1")),
            ],
        )
        .unwrap();
        let inst = Instance::new(PlotGraph::path(3), friends, vec![vec![Rational::zero(); 3]; 3]).unwrap();
        assert!(two_approx(&inst).is_err());
    }

    #[test]
    fn every_allocation_is_bounded_by_the_candidates() {
        for seed in 0..40 {
            let spec = RandomSpec {
                topology: [Topology::Path, Topology::Star, Topology::Random, Topology::Grid][seed as usize % 4],
                n: 5 + seed as usize % 2,
                pairs: 1 + seed as usize % 2,
                valuation: [ValuationMode::UniformRational, ValuationMode::Binary][seed as usize % 2],
                ..RandomSpec::default()
            };
            let inst = random_instance(&spec, seed).unwrap();
            let (a1, a2) = two_approx_candidates(&inst).unwrap();
            let bound = social_welfare(&inst, &a1).unwrap() + social_welfare(&inst, &a2).unwrap();
            let n = inst.agent_count();
            let mut perm: Vec<usize> = (0..n).collect();
            loop {
                let a = Allocation::new(perm.clone()).unwrap();
                assert!(social_welfare(&inst, &a).unwrap() <= bound, "seed {seed}");
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
    }
}
