//! Instances, allocations and the utility arithmetic.
//!
//! An agent's utility is her value for her own plot plus, for every friend
//! occupying an adjacent plot, the weight she attaches to that friendship.
//! All quantities are exact rationals.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Undirected plot adjacency on `n` plots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlotGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacent: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl PlotGraph {
    /// Builds a graph from an edge list. Edges are normalized to `(min, max)`
    /// and sorted; self-loops, duplicates and out-of-range endpoints are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInstance(format!(
                    "plot edge {{{a}, {b}}} has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidInstance(format!("plot {a} has a self-loop")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidInstance(format!("duplicate plot edge {{{a}, {b}}}")));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacent = vec![false; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacent[a * n + b] = true;
            adjacent[b * n + a] = true;
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(PlotGraph {
            n,
            edges,
            adjacent,
            neighbors,
        })
    }

    pub fn empty(n: usize) -> Self {
        PlotGraph::new(n, []).expect("empty graph is valid")
    }

    pub fn path(n: usize) -> Self {
        PlotGraph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is valid")
    }

    pub fn plot_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacent[a * self.n + b]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.neighbors[v].is_empty()
    }
}

/// A reciprocal friendship between agents `a < b` with directed weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FriendPair {
    pub a: usize,
    pub b: usize,
    /// Extra utility `a` gets from living next to `b`.
    pub weight_ab: Rational,
    /// Extra utility `b` gets from living next to `a`.
    pub weight_ba: Rational,
}

impl FriendPair {
    pub fn new(a: usize, b: usize, weight_ab: Rational, weight_ba: Rational) -> Self {
        if a <= b {
            FriendPair {
                a,
                b,
                weight_ab,
                weight_ba,
            }
        } else {
            FriendPair {
                a: b,
                b: a,
                weight_ab: weight_ba,
                weight_ba: weight_ab,
            }
        }
    }

    pub fn symmetric(a: usize, b: usize, weight: Rational) -> Self {
        FriendPair::new(a, b, weight.clone(), weight)
    }

    pub fn total_weight(&self) -> Rational {
        &self.weight_ab + &self.weight_ba
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.a == agent || self.b == agent
    }
}

/// Reciprocal weighted friendships. By default every agent has at most one
/// friend; [`FriendshipGraph::unrestricted`] lifts that for the exhaustive
/// optimizer only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FriendshipGraph {
    n: usize,
    pairs: Vec<FriendPair>,
    friends: Vec<Vec<(usize, Rational)>>,
    max_degree: usize,
}

impl FriendshipGraph {
    pub fn new(n: usize, pairs: Vec<FriendPair>) -> Result<Self> {
        let graph = FriendshipGraph::unrestricted(n, pairs)?;
        if graph.max_degree > 1 {
            let agent = (0..n).find(|&i| graph.friends[i].len() > 1).unwrap_or(0);
            return Err(Error::InvalidInstance(format!(
                "agent {agent} has {} friends; at most one is allowed",
                graph.friends[agent].len()
            )));
        }
        Ok(graph)
    }

    /// Accepts any friendship degree.
    pub fn unrestricted(n: usize, pairs: Vec<FriendPair>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut friends = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(pairs.len());
        for p in pairs {
            let p = FriendPair::new(p.a, p.b, p.weight_ab, p.weight_ba);
            if p.b >= n {
                return Err(Error::InvalidInstance(format!(
                    "friendship {{{}, {}}} names an agent outside 0..{n}",
                    p.a, p.b
                )));
            }
            if p.a == p.b {
                return Err(Error::InvalidInstance(format!("agent {} cannot befriend herself", p.a)));
            }
            if !seen.insert((p.a, p.b)) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate friendship {{{}, {}}}",
                    p.a, p.b
                )));
            }
            if p.weight_ab.is_negative() || p.weight_ba.is_negative() {
                return Err(Error::InvalidInstance(format!(
                    "friendship {{{}, {}}} has a negative weight",
                    p.a, p.b
                )));
            }
            friends[p.a].push((p.b, p.weight_ab.clone()));
            friends[p.b].push((p.a, p.weight_ba.clone()));
            normalized.push(p);
        }
        normalized.sort_by_key(|p| (p.a, p.b));
        for list in &mut friends {
            list.sort_by_key(|(j, _)| *j);
        }
        let max_degree = friends.iter().map(Vec::len).max().unwrap_or(0);
        Ok(FriendshipGraph {
            n,
            pairs: normalized,
            friends,
            max_degree,
        })
    }

    pub fn none(n: usize) -> Self {
        FriendshipGraph::new(n, Vec::new()).expect("empty friendship graph is valid")
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[FriendPair] {
        &self.pairs
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Friends of `agent` with the weight she attaches to each.
    pub fn friends_of(&self, agent: usize) -> &[(usize, Rational)] {
        &self.friends[agent]
    }

    /// The unique friend of `agent` (degree-one graphs).
    pub fn friend(&self, agent: usize) -> Option<usize> {
        self.friends[agent].first().map(|(j, _)| *j)
    }

    /// Weight `i` attaches to `j`; zero if they are not friends.
    pub fn weight(&self, i: usize, j: usize) -> Rational {
        self.friends[i]
            .iter()
            .find(|(f, _)| *f == j)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn are_friends(&self, i: usize, j: usize) -> bool {
        self.friends[i].iter().any(|(f, _)| *f == j)
    }

    /// Smallest directed weight, or `None` without friendships.
    pub fn min_weight(&self) -> Option<Rational> {
        self.pairs
            .iter()
            .flat_map(|p| [&p.weight_ab, &p.weight_ba])
            .min()
            .cloned()
    }
}

/// A bijection from agents to plots: `plots()[i]` is agent `i`'s plot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.len();
        let mut seen = vec![false; n];
        for (agent, &plot) in assignment.iter().enumerate() {
            if plot >= n {
                return Err(Error::InvalidAllocation(format!(
                    "agent {agent} is assigned plot {plot}, outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[plot], true) {
                return Err(Error::InvalidAllocation(format!("plot {plot} is assigned twice")));
            }
        }
        Ok(Allocation(assignment))
    }

    pub fn identity(n: usize) -> Self {
        Allocation((0..n).collect())
    }

    pub fn plots(&self) -> &[usize] {
        &self.0
    }

    pub fn plot_of(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse map: `occupants()[v]` is the agent on plot `v`.
    pub fn occupants(&self) -> Vec<usize> {
        let mut inv = vec![0; self.0.len()];
        for (agent, &plot) in self.0.iter().enumerate() {
            inv[plot] = agent;
        }
        inv
    }
}

impl std::fmt::Display for Allocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Agents, plots, friendships and plot valuations. The number of agents
/// equals the number of plots and every valuation lies in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    plots: PlotGraph,
    friends: FriendshipGraph,
    values: Vec<Vec<Rational>>,
}

impl Instance {
    pub fn new(plots: PlotGraph, friends: FriendshipGraph, values: Vec<Vec<Rational>>) -> Result<Self> {
        let n = plots.plot_count();
        if friends.agent_count() != n {
            return Err(Error::InvalidInstance(format!(
                "{} agents but {n} plots",
                friends.agent_count()
            )));
        }
        if values.len() != n {
            return Err(Error::InvalidInstance(format!(
                "valuation table has {} rows, expected {n}",
                values.len()
            )));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "agent {i} has {} values, expected {n}",
                    row.len()
                )));
            }
            for (v, u) in row.iter().enumerate() {
                if u.is_negative() || *u > Rational::one() {
                    return Err(Error::InvalidInstance(format!(
                        "agent {i} values plot {v} at {u}, outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Instance { plots, friends, values })
    }

    pub fn agent_count(&self) -> usize {
        self.values.len()
    }

    pub fn plot_graph(&self) -> &PlotGraph {
        &self.plots
    }

    pub fn friendships(&self) -> &FriendshipGraph {
        &self.friends
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    #[inline]
    pub fn value(&self, agent: usize, plot: usize) -> &Rational {
        &self.values[agent][plot]
    }

    pub fn friend(&self, agent: usize) -> Option<usize> {
        self.friends.friend(agent)
    }

    /// Fails unless every agent has at most one friend.
    pub fn require_degree_one(&self) -> Result<()> {
        match self.friends.max_degree() {
            d if d > 1 => Err(Error::FriendshipDegree(d)),
            _ => Ok(()),
        }
    }

    pub fn is_binary(&self) -> bool {
        self.values
            .iter()
            .flatten()
            .all(|u| u.is_zero() || *u == Rational::one())
    }

    pub fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        if alloc.len() != self.agent_count() {
            return Err(Error::InvalidAllocation(format!(
                "allocation covers {} agents, instance has {}",
                alloc.len(),
                self.agent_count()
            )));
        }
        Ok(())
    }
}

/// Utility of `agent` under `alloc`.
pub fn utility(inst: &Instance, alloc: &Allocation, agent: usize) -> Result<Rational> {
    inst.check_allocation(alloc)?;
    if agent >= inst.agent_count() {
        return Err(Error::OutOfRange {
            what: "agent",
            index: agent,
            size: inst.agent_count(),
        });
    }
    Ok(utility_unchecked(inst, alloc.plots(), agent))
}

pub(crate) fn utility_unchecked(inst: &Instance, plots: &[usize], agent: usize) -> Rational {
    let mine = plots[agent];
    let mut total = inst.value(agent, mine).clone();
    for (friend, weight) in inst.friendships().friends_of(agent) {
        if inst.plot_graph().adjacent(mine, plots[*friend]) {
            total += weight;
        }
    }
    total
}

/// Every agent's utility, in agent order.
pub fn utilities(inst: &Instance, alloc: &Allocation) -> Result<Vec<Rational>> {
    inst.check_allocation(alloc)?;
    Ok((0..inst.agent_count())
        .map(|i| utility_unchecked(inst, alloc.plots(), i))
        .collect())
}

/// Sum of all agents' utilities.
pub fn social_welfare(inst: &Instance, alloc: &Allocation) -> Result<Rational> {
    Ok(utilities(inst, alloc)?.into_iter().sum())
}

/// True iff every agent weakly prefers `a` to `b` and at least one strictly.
pub fn dominates(inst: &Instance, a: &Allocation, b: &Allocation) -> Result<bool> {
    let ua = utilities(inst, a)?;
    let ub = utilities(inst, b)?;
    Ok(dominates_utilities(&ua, &ub))
}

pub(crate) fn dominates_utilities(a: &[Rational], b: &[Rational]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

/// No agent is ever indifferent: each agent's plot values are pairwise
/// distinct, and for each of her friendships no value equals another plus
/// the friendship weight.
pub fn is_generic(inst: &Instance) -> bool {
    let n = inst.agent_count();
    for i in 0..n {
        let row = &inst.values()[i];
        let mut sorted: Vec<&Rational> = row.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        for (_, weight) in inst.friendships().friends_of(i) {
            for v in 0..n {
                for w in 0..n {
                    if v != w && row[v] == &row[w] + weight {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// True iff no other plot in `available` is adjacent to `v`.
pub fn is_singleton_plot(inst: &Instance, available: &[usize], v: usize) -> Result<bool> {
    if !available.contains(&v) {
        return Err(Error::InvalidAllocation(format!(
            "plot {v} is not in the available set"
        )));
    }
    Ok(!available.iter().any(|&w| w != v && inst.plot_graph().adjacent(v, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixtures;
    use crate::rational::rat;

    fn alloc(p: &[usize]) -> Allocation {
        Allocation::new(p.to_vec()).unwrap()
    }

    #[test]
    fn path_pairs_utilities() {
        let inst = fixtures::path_pairs();
        let a = alloc(&[1, 2, 3, 0]);
        assert_eq!(utility(&inst, &a, 0).unwrap(), rat("0.7"));
        assert_eq!(utility(&inst, &a, 3).unwrap(), rat("0.4"));
        // agent 3 (index 2) sits on v4 next to her friend on v3: .5 + .4
        assert_eq!(utility(&inst, &a, 2).unwrap(), rat("0.9"));
        assert_eq!(social_welfare(&inst, &a).unwrap(), rat("2.7"));
    }

    #[test]
    fn utility_rejects_bad_agent() {
        let inst = fixtures::path_pairs();
        let err = utility(&inst, &Allocation::identity(4), 4).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn no_friends_utility_is_plot_value() {
        let values = vec![
            vec![rat("1/3"), rat("0"), rat("1")],
            vec![rat("1/2"), rat("1/5"), rat("0")],
            vec![rat("0"), rat("1"), rat("2/7")],
        ];
        let inst = Instance::new(PlotGraph::path(3), FriendshipGraph::none(3), values).unwrap();
        let a = alloc(&[2, 0, 1]);
        for i in 0..3 {
            assert_eq!(utility(&inst, &a, i).unwrap(), inst.value(i, a.plot_of(i)).clone());
        }
    }

    #[test]
    fn uniform_welfare_is_n_times_c() {
        let c = rat("3/7");
        let n = 5;
        let inst = Instance::new(
            PlotGraph::path(n),
            FriendshipGraph::none(n),
            vec![vec![c.clone(); n]; n],
        )
        .unwrap();
        let sw = social_welfare(&inst, &alloc(&[4, 2, 0, 1, 3])).unwrap();
        assert_eq!(sw, Rational::from_integer(5) * c);
    }

    #[test]
    fn single_edge_domination() {
        let inst = fixtures::single_edge();
        let a = alloc(&[0, 2, 1]);
        let better = alloc(&[1, 2, 0]);
        assert!(dominates(&inst, &better, &a).unwrap());
        assert!(!dominates(&inst, &a, &a).unwrap());
        assert!(!dominates(&inst, &a, &better).unwrap());
    }

    #[test]
    fn path_pairs_domination_by_friend_swap() {
        let inst = fixtures::path_pairs();
        let sd = alloc(&[1, 2, 3, 0]);
        // agents 1 and 4 (friends) trade v2 and v1
        assert!(dominates(&inst, &alloc(&[0, 2, 3, 1]), &sd).unwrap());
        // agent 1 alone on v1 loses her friend: .5 < .7
        assert!(!dominates(&inst, &alloc(&[0, 2, 1, 3]), &sd).unwrap());
    }

    #[test]
    fn genericity() {
        assert!(!is_generic(&fixtures::path_pairs()));
        let n = 4;
        let values = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| Rational::new((k as i64 + 1) * 10 + i as i64, 100))
                    .collect()
            })
            .collect();
        let inst = Instance::new(PlotGraph::path(n), FriendshipGraph::none(n), values).unwrap();
        assert!(is_generic(&inst));
        let binary = Instance::new(
            PlotGraph::path(3),
            FriendshipGraph::none(3),
            vec![vec![rat("1"), rat("0"), rat("1")]; 3],
        )
        .unwrap();
        assert!(!is_generic(&binary));
    }

    #[test]
    fn friendship_weight_can_break_genericity() {
        let values = vec![vec![rat("0.1"), rat("0.6")], vec![rat("0"), rat("1")]];
        let friends = FriendshipGraph::new(2, vec![FriendPair::symmetric(0, 1, rat("0.5"))]).unwrap();
        let inst = Instance::new(PlotGraph::path(2), friends, values).unwrap();
        assert!(!is_generic(&inst));
    }

    #[test]
    fn singleton_plots() {
        let inst = Instance::new(
            PlotGraph::path(3),
            FriendshipGraph::none(3),
            vec![vec![Rational::zero(); 3]; 3],
        )
        .unwrap();
        assert!(is_singleton_plot(&inst, &[0, 2], 0).unwrap());
        assert!(!is_singleton_plot(&inst, &[0, 1], 0).unwrap());
        assert!(is_singleton_plot(&inst, &[0, 1], 2).is_err());

        let ex4 = fixtures::lone_edge(4);
        assert!(!is_singleton_plot(&ex4, &[0, 1, 2, 3], 1).unwrap());
        assert!(is_singleton_plot(&ex4, &[0, 1, 2, 3], 2).unwrap());
    }

    #[test]
    fn validation_errors() {
        let too_big = Instance::new(
            PlotGraph::path(2),
            FriendshipGraph::none(2),
            vec![vec![rat("3/2"), rat("0")], vec![rat("0"), rat("0")]],
        );
        assert!(matches!(too_big, Err(Error::InvalidInstance(_))));
        let degree_two = FriendshipGraph::new(
            3,
            vec![
                FriendPair::symmetric(0, 1, rat("1")),
                FriendPair::symmetric(1, 2, rat("1")),
            ],
        );
        assert!(degree_two.is_err());
        assert!(FriendshipGraph::unrestricted(
            3,
            vec![
                FriendPair::symmetric(0, 1, rat("1")),
                FriendPair::symmetric(1, 2, rat("1")),
            ],
        )
        .is_ok());
        assert!(PlotGraph::new(3, [(0, 0)]).is_err());
        assert!(PlotGraph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Allocation::new(vec![0, 0]).is_err());
        assert!(Allocation::new(vec![0, 2]).is_err());
    }
}
