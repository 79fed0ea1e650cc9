//! Expectimax evaluation of the mechanisms as extensive-form games.
//!
//! Every agent knows all values and weights. Decision nodes belong to the
//! agent who picks (plot and, where allowed, a declaration) or who answers
//! an invitation; chance nodes draw the next agent uniformly among the
//! unplaced. Each agent maximizes her expected utility. Ties go to the
//! lowest plot, then to declaring over not declaring (lower-indexed
//! declaree first), then to declining over accepting.
//!
//! Orders are announced in advance for serial dictatorship and for the
//! back-to-queue and back-to-end variants; the other mechanisms draw as they
//! go.

use std::collections::HashMap;
use std::rc::Rc;

use super::chance::{BitsChance, ChanceSource};
use super::{validate_reports, MechanismId, MechanismState, PickRole, RandomBits, Reports, RunOutcome};
use crate::error::{Error, Result};
use crate::model::{utilities, Allocation, Instance};
use crate::optimize::{factorial, next_permutation};
use crate::rational::Rational;

pub const DEFAULT_ORACLE_CAP: usize = 7;

/// Which declarations a picking agent may make.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclarationPolicy {
    /// Agent `i` declares `reports[i]` whenever that agent is still unplaced.
    Fixed(Reports),
    /// Agents choose their declaration (or none) strategically.
    Choose,
}

/// Where evaluation starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Start {
    /// The announced order (serial dictatorship, back-to-queue, back-to-end).
    Order(Vec<usize>),
    /// The first drawn agent (mechanisms that draw as they go).
    FirstDraw(usize),
}

/// An invitation and how the invitee values her two answers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invitation {
    pub declarer: usize,
    pub plot: usize,
    pub invitee: usize,
    pub accept_value: Rational,
    pub decline_value: Rational,
    pub declines: bool,
}

const NONE: u8 = u8::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Phase {
    Next,
    Act {
        agent: u8,
        constraint: Option<u8>,
        may_declare: bool,
        invited_by: Option<u8>,
    },
    Invite {
        declarer: u8,
        invitee: u8,
        adjacent_to: Option<u8>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    plots: Vec<u8>,
    queue: Vec<u8>,
    phase: Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    Pick { plot: usize, declared: Option<usize> },
    Decline,
    Accept,
}

pub struct Oracle<'a> {
    inst: &'a Instance,
    mech: MechanismId,
    policy: DeclarationPolicy,
    memo: HashMap<Node, Rc<Vec<Rational>>>,
}

impl<'a> Oracle<'a> {
    pub fn new(inst: &'a Instance, mech: MechanismId, policy: DeclarationPolicy) -> Result<Self> {
        Oracle::with_cap(inst, mech, policy, DEFAULT_ORACLE_CAP)
    }

    pub fn with_cap(inst: &'a Instance, mech: MechanismId, policy: DeclarationPolicy, cap: usize) -> Result<Self> {
        if matches!(
            mech,
            MechanismId::RsdStar | MechanismId::FfCtRsdStar | MechanismId::OnCaRsdStar
        ) {
            return Err(Error::Unsupported {
                mechanism: mech.name(),
                what: "game-tree evaluation",
            });
        }
        let n = inst.agent_count();
        if n > cap {
            return Err(Error::SizeCap {
                what: "agents for game-tree evaluation",
                size: n,
                cap,
            });
        }
        inst.require_degree_one()?;
        if let DeclarationPolicy::Fixed(r) = &policy {
            validate_reports(inst, r)?;
        }
        Ok(Oracle {
            inst,
            mech,
            policy,
            memo: HashMap::new(),
        })
    }

    pub fn mechanism(&self) -> MechanismId {
        self.mech
    }

    /// Number of distinct game states evaluated so far.
    pub fn states_evaluated(&self) -> usize {
        self.memo.len()
    }

    fn n(&self) -> usize {
        self.inst.agent_count()
    }

    fn declarations_allowed(&self) -> bool {
        self.mech.uses_reports()
    }

    fn empty_node(&self, queue: Vec<u8>, phase: Phase) -> Node {
        Node {
            plots: vec![NONE; self.n()],
            queue,
            phase,
        }
    }

    fn start_node(&self, start: &Start) -> Result<Node> {
        let n = self.n();
        match start {
            Start::Order(order) => {
                if !self.mech.has_announced_order() {
                    return Err(Error::Unsupported {
                        mechanism: self.mech.name(),
                        what: "an announced order",
                    });
                }
                RandomBits::from_order(order.clone()).validate(n)?;
                Ok(self.empty_node(order.iter().map(|&a| a as u8).collect(), Phase::Next))
            }
            Start::FirstDraw(a) => {
                if self.mech.has_announced_order() {
                    return Err(Error::Unsupported {
                        mechanism: self.mech.name(),
                        what: "a first draw without an order",
                    });
                }
                if *a >= n {
                    return Err(Error::OutOfRange {
                        what: "agent",
                        index: *a,
                        size: n,
                    });
                }
                Ok(self.empty_node(
                    Vec::new(),
                    Phase::Act {
                        agent: *a as u8,
                        constraint: None,
                        may_declare: self.declarations_allowed(),
                        invited_by: None,
                    },
                ))
            }
        }
    }

    /// Expected utility of every agent before any randomness is resolved.
    pub fn expected_utilities(&mut self) -> Vec<Rational> {
        let n = self.n();
        if self.mech.has_announced_order() {
            let mut order: Vec<usize> = (0..n).collect();
            let mut sum = vec![Rational::zero(); n];
            loop {
                let node = self.empty_node(order.iter().map(|&a| a as u8).collect(), Phase::Next);
                add_into(&mut sum, &self.value(&node));
                if !next_permutation(&mut order) {
                    break;
                }
            }
            let count = Rational::from_integer(factorial(n) as i64);
            sum.into_iter().map(|s| s / &count).collect()
        } else {
            let root = self.empty_node(Vec::new(), Phase::Next);
            self.value(&root).to_vec()
        }
    }

    /// Expected utilities from `start` on.
    pub fn expected_from(&mut self, start: &Start) -> Result<Vec<Rational>> {
        let node = self.start_node(start)?;
        Ok(self.value(&node).to_vec())
    }

    /// Expected utilities conditional on `first` being the first to pick.
    /// For announced orders this averages over orders starting with `first`.
    pub fn expected_given_first(&mut self, first: usize) -> Result<Vec<Rational>> {
        let n = self.n();
        if !self.mech.has_announced_order() {
            return self.expected_from(&Start::FirstDraw(first));
        }
        if first >= n {
            return Err(Error::OutOfRange {
                what: "agent",
                index: first,
                size: n,
            });
        }
        let mut rest: Vec<usize> = (0..n).filter(|&a| a != first).collect();
        let mut sum = vec![Rational::zero(); n];
        loop {
            let mut order = vec![first];
            order.extend(&rest);
            let node = self.start_node(&Start::Order(order))?;
            add_into(&mut sum, &self.value(&node));
            if !next_permutation(&mut rest) {
                break;
            }
        }
        let count = Rational::from_integer(factorial(n - 1) as i64);
        Ok(sum.into_iter().map(|s| s / &count).collect())
    }

    /// Best expected utility of the first mover when her declaration is
    /// forced to `declaration` (she still picks her best plot).
    pub fn declaration_value(&mut self, start: &Start, declaration: Option<usize>) -> Result<Rational> {
        let node = self.first_act(self.start_node(start)?);
        let Phase::Act { agent, .. } = node.phase else {
            unreachable!("first_act stops at a pick")
        };
        let agent = agent as usize;
        if let Some(d) = declaration {
            if d >= self.n() || d == agent {
                return Err(Error::MalformedReport(format!("agent {agent} cannot declare {d}")));
            }
        }
        let mut best: Option<Rational> = None;
        for v in self.allowed_plots(&node) {
            let child = self.after_pick(&node, v, declaration);
            let val = self.value(&child)[agent].clone();
            if best.as_ref().is_none_or(|b| val > *b) {
                best = Some(val);
            }
        }
        Ok(best.expect("a plot is available"))
    }

    /// The first mover's optimal move and, if it is an invitation, the
    /// invitee's valuation of accepting and declining.
    pub fn invitation(&mut self, start: &Start) -> Result<Option<Invitation>> {
        let node = self.first_act(self.start_node(start)?);
        let (choice, child) = self.decide(&node);
        let Choice::Pick { plot, .. } = choice else {
            unreachable!("act nodes pick")
        };
        let Phase::Invite { declarer, invitee, .. } = child.phase else {
            return Ok(None);
        };
        let invitee = invitee as usize;
        let accept = self.apply(&child, Choice::Accept);
        let decline = self.apply(&child, Choice::Decline);
        let accept_value = self.value(&accept)[invitee].clone();
        let decline_value = self.value(&decline)[invitee].clone();
        let (answer, _) = self.decide(&child);
        Ok(Some(Invitation {
            declarer: declarer as usize,
            plot,
            invitee,
            accept_value,
            decline_value,
            declines: answer == Choice::Decline,
        }))
    }

    /// Plays one run: chance resolved by `bits`, every decision by
    /// expected utility.
    pub fn realize(&mut self, bits: &RandomBits) -> Result<RunOutcome> {
        let n = self.n();
        bits.validate(n)?;
        let queue = if self.mech.has_announced_order() {
            bits.agent_permutation.iter().map(|&a| a as u8).collect()
        } else {
            Vec::new()
        };
        let mut node = self.empty_node(queue, Phase::Next);
        let mut state = MechanismState::new(n);
        let mut chance = BitsChance::new(bits);
        loop {
            match node.phase.clone() {
                Phase::Next => {
                    let unplaced: Vec<usize> = (0..n).filter(|&i| node.plots[i] == NONE).collect();
                    if unplaced.is_empty() {
                        break;
                    }
                    let agent = match node.queue.first() {
                        Some(&a) => a as usize,
                        None => chance.draw_agent(&unplaced),
                    };
                    node.phase = self.drawn_phase(agent);
                }
                Phase::Act {
                    agent,
                    constraint,
                    invited_by,
                    ..
                } => {
                    let (choice, child) = self.decide(&node);
                    let Choice::Pick { plot, declared } = choice else {
                        unreachable!("act nodes pick")
                    };
                    let role = match invited_by {
                        Some(by) => PickRole::Invited {
                            by: by as usize,
                            constrained: constraint.is_some(),
                        },
                        None => PickRole::Drawn,
                    };
                    state.place(agent as usize, plot, declared, role);
                    node = child;
                }
                Phase::Invite { .. } => {
                    node = self.decide(&node).1;
                }
            }
        }
        Ok(RunOutcome::finish(self.inst, self.mech, state, bits.clone()))
    }

    fn drawn_phase(&self, agent: usize) -> Phase {
        Phase::Act {
            agent: agent as u8,
            constraint: None,
            may_declare: self.declarations_allowed(),
            invited_by: None,
        }
    }

    /// Follows an announced order to its first pick.
    fn first_act(&self, node: Node) -> Node {
        match node.phase {
            Phase::Next => {
                let agent = node.queue[0] as usize;
                Node {
                    phase: self.drawn_phase(agent),
                    ..node
                }
            }
            _ => node,
        }
    }

    fn allowed_plots(&self, node: &Node) -> Vec<usize> {
        let Phase::Act { constraint, .. } = node.phase else {
            return Vec::new();
        };
        let occupied = occupied(&node.plots, self.n());
        let graph = self.inst.plot_graph();
        (0..self.n())
            .filter(|&v| !occupied[v])
            .filter(|&v| constraint.is_none_or(|c| graph.adjacent(c as usize, v)))
            .collect()
    }

    fn declaration_options(&self, node: &Node) -> Vec<Option<usize>> {
        let Phase::Act { agent, may_declare, .. } = node.phase else {
            return vec![None];
        };
        let agent = agent as usize;
        if !may_declare {
            return vec![None];
        }
        let unplaced = |j: usize| j != agent && node.plots[j] == NONE;
        match &self.policy {
            DeclarationPolicy::Fixed(reports) => vec![reports[agent].filter(|&j| unplaced(j))],
            DeclarationPolicy::Choose => (0..self.n()).filter(|&j| unplaced(j)).map(Some).chain([None]).collect(),
        }
    }

    fn after_pick(&self, node: &Node, plot: usize, declared: Option<usize>) -> Node {
        let Phase::Act { agent, .. } = node.phase else {
            unreachable!("picks happen at act nodes")
        };
        let occupied = occupied(&node.plots, self.n());
        let singleton = !self.inst.plot_graph().neighbors(plot).iter().any(|&w| !occupied[w]);
        let mut plots = node.plots.clone();
        plots[agent as usize] = plot as u8;
        let queue: Vec<u8> = node.queue.iter().copied().filter(|&a| a != agent).collect();
        let adjacent_to = (!singleton).then_some(plot as u8);
        let phase = match declared {
            None => Phase::Next,
            Some(d) => match self.mech {
                MechanismId::OnCtRsd => Phase::Act {
                    agent: d as u8,
                    constraint: None,
                    may_declare: false,
                    invited_by: Some(agent),
                },
                MechanismId::OnCaRsd => Phase::Act {
                    agent: d as u8,
                    constraint: adjacent_to,
                    may_declare: false,
                    invited_by: Some(agent),
                },
                _ => Phase::Invite {
                    declarer: agent,
                    invitee: d as u8,
                    adjacent_to,
                },
            },
        };
        Node { plots, queue, phase }
    }

    fn apply(&self, node: &Node, choice: Choice) -> Node {
        match (choice, &node.phase) {
            (Choice::Pick { plot, declared }, _) => self.after_pick(node, plot, declared),
            (
                Choice::Accept,
                &Phase::Invite {
                    declarer,
                    invitee,
                    adjacent_to,
                },
            ) => Node {
                phase: Phase::Act {
                    agent: invitee,
                    constraint: adjacent_to,
                    may_declare: false,
                    invited_by: Some(declarer),
                },
                ..node.clone()
            },
            (Choice::Decline, &Phase::Invite { invitee, .. }) => {
                let mut queue = node.queue.clone();
                if self.mech == MechanismId::CaBeRsd {
                    queue.retain(|&a| a != invitee);
                    queue.push(invitee);
                }
                Node {
                    plots: node.plots.clone(),
                    queue,
                    phase: Phase::Next,
                }
            }
            _ => unreachable!("choice does not fit the node"),
        }
    }

    fn choices(&self, node: &Node) -> Vec<Choice> {
        match node.phase {
            Phase::Act { .. } => {
                let decls = self.declaration_options(node);
                self.allowed_plots(node)
                    .into_iter()
                    .flat_map(|plot| decls.iter().map(move |&declared| Choice::Pick { plot, declared }))
                    .collect()
            }
            Phase::Invite { .. } => vec![Choice::Decline, Choice::Accept],
            Phase::Next => Vec::new(),
        }
    }

    /// The decider's best choice (first in tie order) and its child node.
    fn decide(&mut self, node: &Node) -> (Choice, Node) {
        let decider = match node.phase {
            Phase::Act { agent, .. } => agent,
            Phase::Invite { invitee, .. } => invitee,
            Phase::Next => unreachable!("chance nodes have no decider"),
        } as usize;
        let mut best: Option<(Rational, Choice, Node)> = None;
        for choice in self.choices(node) {
            let child = self.apply(node, choice);
            let val = self.value(&child)[decider].clone();
            if best.as_ref().is_none_or(|(b, _, _)| val > *b) {
                best = Some((val, choice, child));
            }
        }
        let (_, choice, child) = best.expect("a decision node has a legal choice");
        (choice, child)
    }

    fn value(&mut self, node: &Node) -> Rc<Vec<Rational>> {
        if let Some(v) = self.memo.get(node) {
            return Rc::clone(v);
        }
        let n = self.n();
        let result = match node.phase {
            Phase::Next => {
                let unplaced: Vec<usize> = (0..n).filter(|&i| node.plots[i] == NONE).collect();
                if unplaced.is_empty() {
                    let plots = node.plots.iter().map(|&p| p as usize).collect();
                    let alloc = Allocation::new(plots).expect("complete assignment");
                    Rc::new(utilities(self.inst, &alloc).expect("sizes match"))
                } else if let Some(&a) = node.queue.first() {
                    let child = Node {
                        phase: self.drawn_phase(a as usize),
                        ..node.clone()
                    };
                    self.value(&child)
                } else {
                    let mut sum = vec![Rational::zero(); n];
                    for &a in &unplaced {
                        let child = Node {
                            phase: self.drawn_phase(a),
                            ..node.clone()
                        };
                        add_into(&mut sum, &self.value(&child));
                    }
                    let k = Rational::from_integer(unplaced.len() as i64);
                    Rc::new(sum.into_iter().map(|s| s / &k).collect())
                }
            }
            _ => {
                let (_, child) = self.decide(node);
                self.value(&child)
            }
        };
        self.memo.insert(node.clone(), Rc::clone(&result));
        result
    }
}

fn occupied(plots: &[u8], n: usize) -> Vec<bool> {
    let mut occ = vec![false; n];
    for &p in plots {
        if p != NONE {
            occ[p as usize] = true;
        }
    }
    occ
}

fn add_into(sum: &mut [Rational], add: &[Rational]) {
    for (s, a) in sum.iter_mut().zip(add) {
        *s += a;
    }
}
