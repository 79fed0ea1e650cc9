//! Closed-form strategies for the online mechanisms.
//!
//! An agent who picks without inviting anybody simply maximizes her utility
//! given who is already placed. An agent who invites somebody predicts the
//! invitee's best response to each candidate plot and keeps the plot that
//! serves her best. Ties go to the lowest plot index.

use super::MechanismState;
use crate::model::Instance;
use crate::optimize::scaled::Scaled;
use crate::rational::Rational;

/// Utility of `agent` on `plot` counting only friends already placed.
pub(crate) trait Scorer: Sync {
    type Key: Ord + Clone;
    fn instance(&self) -> &Instance;
    fn partial(&self, placed: &[Option<usize>], agent: usize, plot: usize) -> Self::Key;
    fn value_is_positive(&self, agent: usize, plot: usize) -> bool;
}

pub(crate) struct ExactScorer<'a>(pub &'a Instance);

impl Scorer for ExactScorer<'_> {
    type Key = Rational;

    fn instance(&self) -> &Instance {
        self.0
    }

    fn partial(&self, placed: &[Option<usize>], agent: usize, plot: usize) -> Rational {
        let inst = self.0;
        let mut total = inst.value(agent, plot).clone();
        for (j, w) in inst.friendships().friends_of(agent) {
            if placed[*j].is_some_and(|p| inst.plot_graph().adjacent(plot, p)) {
                total += w;
            }
        }
        total
    }

    fn value_is_positive(&self, agent: usize, plot: usize) -> bool {
        self.0.value(agent, plot).is_positive()
    }
}

pub(crate) struct ScaledScorer<'a, 'b>(pub &'b Scaled<'a>);

impl Scorer for ScaledScorer<'_, '_> {
    type Key = i128;

    fn instance(&self) -> &Instance {
        self.0.instance()
    }

    fn partial(&self, placed: &[Option<usize>], agent: usize, plot: usize) -> i128 {
        let graph = self.0.instance().plot_graph();
        let mut total = self.0.value(agent, plot) as i128;
        for &(j, w) in self.0.friends_of(agent) {
            if placed[j].is_some_and(|p| graph.adjacent(plot, p)) {
                total += w as i128;
            }
        }
        total
    }

    fn value_is_positive(&self, agent: usize, plot: usize) -> bool {
        self.0.value(agent, plot) > 0
    }
}

/// Best plot among `allowed` for `agent`; `None` if `allowed` is empty.
pub(crate) fn best_among<S: Scorer>(
    s: &S,
    placed: &[Option<usize>],
    agent: usize,
    allowed: impl IntoIterator<Item = usize>,
) -> Option<usize> {
    let mut best: Option<(S::Key, usize)> = None;
    for v in allowed {
        let key = s.partial(placed, agent, v);
        if best.as_ref().is_none_or(|(b, _)| key > *b) {
            best = Some((key, v));
        }
    }
    best.map(|(_, v)| v)
}

/// True iff no other available plot is adjacent to `v`.
pub(crate) fn is_singleton(inst: &Instance, available: &[bool], v: usize) -> bool {
    !inst.plot_graph().neighbors(v).iter().any(|&w| available[w])
}

/// Plot choice of `agent` who will invite `invitee` to pick right after
/// her. With `adjacent_when_possible` the invitee must pick next to her
/// unless her plot is a singleton.
pub(crate) fn inviting_choice<S: Scorer>(
    s: &S,
    state: &MechanismState,
    agent: usize,
    invitee: usize,
    adjacent_when_possible: bool,
) -> usize {
    let inst = s.instance();
    let mut placed = state.placed.clone();
    let mut available = state.available.clone();
    let mut best: Option<(S::Key, usize)> = None;
    for v in state.available_plots() {
        let constrained = adjacent_when_possible && !is_singleton(inst, &available, v);
        available[v] = false;
        placed[agent] = Some(v);
        let response = {
            let free = (0..available.len()).filter(|&w| available[w]);
            if constrained {
                let graph = inst.plot_graph();
                best_among(s, &placed, invitee, free.filter(|&w| graph.adjacent(v, w)))
            } else {
                best_among(s, &placed, invitee, free)
            }
        };
        placed[invitee] = response;
        let key = s.partial(&placed, agent, v);
        placed[invitee] = None;
        placed[agent] = None;
        available[v] = true;
        if best.as_ref().is_none_or(|(b, _)| key > *b) {
            best = Some((key, v));
        }
    }
    best.expect("a plot is available").1
}

pub(crate) fn choose<S: Scorer>(
    s: &S,
    state: &MechanismState,
    agent: usize,
    declaree: Option<usize>,
    adjacent_when_possible: bool,
) -> (usize, Option<usize>) {
    match declaree.filter(|&d| d != agent && !state.is_placed(d)) {
        Some(d) => (inviting_choice(s, state, agent, d, adjacent_when_possible), Some(d)),
        None => {
            let v = best_among(s, &state.placed, agent, state.available_plots()).expect("a plot is available");
            (v, None)
        }
    }
}

/// Best plot for `agent` among `allowed`, counting friends already placed.
pub fn best_response(inst: &Instance, state: &MechanismState, agent: usize, allowed: &[usize]) -> Option<usize> {
    best_among(&ExactScorer(inst), &state.placed, agent, allowed.iter().copied())
}

/// Choice of a drawn agent under the choose-together rule: the declared
/// agent (if unplaced) picks next, unconstrained. Returns the plot and the
/// declaration actually made.
pub fn on_ct_strategy(
    inst: &Instance,
    state: &MechanismState,
    agent: usize,
    declaree: Option<usize>,
) -> (usize, Option<usize>) {
    choose(&ExactScorer(inst), state, agent, declaree, false)
}

/// Choice of a drawn agent under the choose-adjacent rule: the declared
/// agent must pick next to her unless she takes a singleton plot.
pub fn on_ca_strategy(
    inst: &Instance,
    state: &MechanismState,
    agent: usize,
    declaree: Option<usize>,
) -> (usize, Option<usize>) {
    choose(&ExactScorer(inst), state, agent, declaree, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::fixtures;
    use crate::mechanisms::PickRole;
    use crate::model::{FriendPair, FriendshipGraph, PlotGraph};
    use crate::rational::rat;

    #[test]
    fn choose_together_keeps_the_safe_plot() {
        // 0 would like plot 1 next to her friend, but the friend grabs plot 0
        let inst = fixtures::single_edge();
        let state = MechanismState::new(3);
        assert_eq!(on_ct_strategy(&inst, &state, 0, Some(1)), (0, Some(1)));
    }

    #[test]
    fn choose_adjacent_forces_the_friend() {
        let inst = fixtures::single_edge();
        let state = MechanismState::new(3);
        assert_eq!(on_ca_strategy(&inst, &state, 0, Some(1)), (1, Some(1)));
    }

    #[test]
    fn stronger_friendship_flips_the_choice() {
        let mut friends = vec![FriendPair::symmetric(0, 1, rat("1.5"))];
        let base = fixtures::single_edge();
        let inst = Instance::new(
            base.plot_graph().clone(),
            FriendshipGraph::new(3, std::mem::take(&mut friends)).unwrap(),
            base.values().to_vec(),
        )
        .unwrap();
        let mut state = MechanismState::new(3);
        assert_eq!(on_ct_strategy(&inst, &state, 0, Some(1)), (1, Some(1)));
        state.place(0, 1, Some(1), PickRole::Drawn);
        assert_eq!(best_response(&inst, &state, 1, &[0, 2]), Some(2));
    }

    #[test]
    fn placed_friend_gap_against_weight() {
        // friend sits on plot 1; plot 0 is adjacent, plot 2 is not
        let values = vec![
            vec![rat("0.3"), rat("0"), rat("0.5")],
            vec![rat("0"); 3],
            vec![rat("0"); 3],
        ];
        for (phi, expected) in [("0.1", 2), ("0.3", 0)] {
            let friends = FriendshipGraph::new(3, vec![FriendPair::symmetric(0, 1, rat(phi))]).unwrap();
            let inst = Instance::new(PlotGraph::new(3, [(0, 1)]).unwrap(), friends, values.clone()).unwrap();
            let mut state = MechanismState::new(3);
            state.place(1, 1, None, PickRole::Drawn);
            assert_eq!(on_ct_strategy(&inst, &state, 0, Some(1)), (expected, None));
        }
    }

    #[test]
    fn placed_declaree_means_no_declaration() {
        let inst = fixtures::path_pairs();
        let mut state = MechanismState::new(4);
        state.place(3, 0, None, PickRole::Drawn);
        let (v, d) = on_ca_strategy(&inst, &state, 0, Some(3));
        assert_eq!(d, None);
        // .3 + .4 next to the friend beats .0
        assert_eq!(v, 1);
    }

    #[test]
    fn scaled_and_exact_scorers_agree() {
        let inst = fixtures::path_pairs();
        let scaled = Scaled::new(&inst).unwrap();
        let mut state = MechanismState::new(4);
        state.place(1, 2, None, PickRole::Drawn);
        for agent in [0, 2, 3] {
            let friend = inst.friend(agent);
            for adj in [false, true] {
                assert_eq!(
                    choose(&ExactScorer(&inst), &state, agent, friend, adj),
                    choose(&ScaledScorer(&scaled), &state, agent, friend, adj)
                );
            }
        }
    }
}
