//! Small hand-checked instances and the parametric families built around
//! them, each with the outcomes the engine is expected to reproduce.

use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::model::{FriendPair, FriendshipGraph, Instance, PlotGraph};
use crate::rational::{rat, Rational};

/// An outcome a fixture is expected to produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    /// Realized allocation when agents are drawn (or ordered) as `order`.
    Outcome {
        mechanism: MechanismId,
        order: Vec<usize>,
        allocation: Vec<usize>,
    },
    Utilities {
        allocation: Vec<usize>,
        utilities: Vec<Rational>,
    },
    Welfare {
        allocation: Vec<usize>,
        welfare: Rational,
    },
    Opt(Rational),
    /// The lexicographically smallest allocation dominating `allocation`.
    DominatedBy {
        allocation: Vec<usize>,
        dominating: Vec<usize>,
    },
    ExpectedSw {
        mechanism: MechanismId,
        value: Rational,
    },
    ExpectedSwAtMost {
        mechanism: MechanismId,
        bound: Rational,
    },
    /// First friendship-truthfulness violation found by the checker.
    FtViolation {
        mechanism: MechanismId,
        agent: usize,
        lie: Option<usize>,
        truthful: Rational,
        lying: Rational,
    },
    /// With `first` drawn first and declaring `invitee`, the invitee's
    /// expected utility from declining is at least `bound` and she declines.
    Declines {
        mechanism: MechanismId,
        first: usize,
        invitee: usize,
        bound: Rational,
    },
    /// Under the fixed order, `agent` strictly prefers declaring `prefers`
    /// over declaring `over`. `tentative` marks claims that depend on how
    /// declines are ordered.
    PrefersDeclaring {
        mechanism: MechanismId,
        order: Vec<usize>,
        agent: usize,
        prefers: Option<usize>,
        over: Option<usize>,
        tentative: bool,
    },
    /// Probability that `agent` ends up on `plot` is at most `bound`.
    PlotProbabilityAtMost {
        mechanism: MechanismId,
        agent: usize,
        plot: usize,
        bound: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub instance: Instance,
    pub expected: Vec<Expected>,
}

/// Names accepted by [`fixture`]; `{n}` is an agent count.
pub fn fixture_names() -> &'static [&'static str] {
    &[
        "path_pairs",
        "single_edge",
        "lone_edge",
        "lone_edge_n{n}",
        "weak_pair",
        "hub_n{n}",
        "two_stars_n{n}",
        "paired_star_n{n}",
        "marked_star_n{n}",
    ]
}

/// Looks up a fixture by name (see [`fixture_names`]).
pub fn fixture(name: &str) -> Result<Fixture> {
    let unknown = || Error::Unknown {
        kind: "fixture",
        name: name.to_string(),
    };
    let sized = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix).and_then(|rest| rest.parse().ok()) };
    let (instance, expected) = match name {
        "path_pairs" => (path_pairs(), path_pairs_expected()),
        "single_edge" => (single_edge(), single_edge_expected()),
        "lone_edge" => (lone_edge(4), lone_edge_expected(4)),
        "weak_pair" => (weak_pair(), weak_pair_expected()),
        _ => {
            if let Some(n) = sized("lone_edge_n") {
                check_size(n, 2, false)?;
                (lone_edge(n), lone_edge_expected(n))
            } else if let Some(n) = sized("hub_n") {
                check_size(n, 2, false)?;
                (hub(n), hub_expected(n))
            } else if let Some(n) = sized("two_stars_n") {
                check_size(n, 4, true)?;
                let phi = rat("3/10");
                (two_stars(n, phi.clone()), two_stars_expected(n, &phi))
            } else if let Some(n) = sized("paired_star_n") {
                check_size(n, 2, true)?;
                let phi = star_default_phi();
                (star_pairs(n, 0, false, phi.clone()), vec![Expected::Opt(&phi + &phi)])
            } else if let Some(n) = sized("marked_star_n") {
                check_size(n, 2, true)?;
                let phi = star_default_phi();
                (star_pairs(n, 0, true, phi.clone()), marked_star_expected(n, 0, &phi))
            } else {
                return Err(unknown());
            }
        }
    };
    Ok(Fixture {
        name: name.to_string(),
        instance,
        expected,
    })
}

fn check_size(n: usize, min: usize, even: bool) -> Result<()> {
    if n < min || (even && n % 2 == 1) {
        let parity = if even { "an even number" } else { "a number" };
        return Err(Error::InfeasibleSpec(format!(
            "family needs {parity} of agents that is at least {min}, got {n}"
        )));
    }
    Ok(())
}

fn rows(table: &[&[&str]]) -> Vec<Vec<Rational>> {
    table.iter().map(|r| r.iter().map(|s| rat(s)).collect()).collect()
}

fn build(plots: PlotGraph, pairs: Vec<FriendPair>, values: Vec<Vec<Rational>>) -> Instance {
    let n = plots.plot_count();
    let friends = FriendshipGraph::new(n, pairs).expect("fixture friendships are valid");
    Instance::new(plots, friends, values).expect("fixture is valid")
}

/// Four plots on a path, friends {0, 3} and {1, 2}, all weights 0.4.
pub fn path_pairs() -> Instance {
    build(
        PlotGraph::path(4),
        vec![
            FriendPair::symmetric(0, 3, rat("0.4")),
            FriendPair::symmetric(1, 2, rat("0.4")),
        ],
        rows(&[
            &[".5", ".3", "0", "0"],
            &["0", ".5", ".3", "0"],
            &["0", ".7", "0", ".5"],
            &["0", ".5", "0", "0"],
        ]),
    )
}

fn path_pairs_expected() -> Vec<Expected> {
    let sd = vec![1, 2, 3, 0];
    vec![
        Expected::Outcome {
            mechanism: MechanismId::Sd,
            order: vec![0, 1, 2, 3],
            allocation: sd.clone(),
        },
        Expected::Utilities {
            allocation: sd.clone(),
            utilities: vec![rat(".7"), rat(".7"), rat(".9"), rat(".4")],
        },
        Expected::Welfare {
            allocation: sd.clone(),
            welfare: rat("2.7"),
        },
        // 0 and 3 trade plots and sit next to each other
        Expected::DominatedBy {
            allocation: sd,
            dominating: vec![0, 2, 3, 1],
        },
    ]
}

/// Three plots with the single edge {1, 2}; friends {0, 1} with weight 0.5.
pub fn single_edge() -> Instance {
    build(
        PlotGraph::new(3, [(1, 2)]).expect("valid"),
        vec![FriendPair::symmetric(0, 1, rat("0.5"))],
        rows(&[&["1", ".9", "0"], &["1", "0", ".4"], &["1", ".1", "0"]]),
    )
}

fn single_edge_expected() -> Vec<Expected> {
    vec![
        Expected::Outcome {
            mechanism: MechanismId::OnCtRsd,
            order: vec![0, 1, 2],
            allocation: vec![0, 2, 1],
        },
        Expected::Outcome {
            mechanism: MechanismId::OnCaRsd,
            order: vec![0, 1, 2],
            allocation: vec![1, 2, 0],
        },
        Expected::DominatedBy {
            allocation: vec![0, 2, 1],
            dominating: vec![1, 2, 0],
        },
        Expected::Welfare {
            allocation: vec![1, 2, 0],
            welfare: rat("3.3"),
        },
        Expected::Opt(rat("3.3")),
        Expected::FtViolation {
            mechanism: MechanismId::OnCtRsd,
            agent: 0,
            lie: Some(2),
            truthful: rat("1"),
            lying: rat("1.4"),
        },
    ]
}

/// One edge {0, 1} plus isolated plots. Everybody values plot 1 at 0 and
/// every other plot at 1; agents 0 and 1 are friends with weight 0.1.
pub fn lone_edge(n: usize) -> Instance {
    let values = vec![
        (0..n)
            .map(|v| if v == 1 { Rational::zero() } else { Rational::one() })
            .collect();
        n
    ];
    build(
        PlotGraph::new(n, [(0, 1)]).expect("valid"),
        vec![FriendPair::symmetric(0, 1, rat("0.1"))],
        values,
    )
}

fn lone_edge_expected(n: usize) -> Vec<Expected> {
    vec![Expected::Outcome {
        mechanism: MechanismId::OnCaRsd,
        order: (0..n).collect(),
        allocation: (0..n).collect(),
    }]
}

/// Four plots on a path, friends {0, 3} with weight 0.2.
pub fn weak_pair() -> Instance {
    build(
        PlotGraph::path(4),
        vec![FriendPair::symmetric(0, 3, rat("0.2"))],
        rows(&[
            &["0", "1", "0", "0"],
            &[".3", "0", ".1", ".2"],
            &[".3", "0", ".2", "0"],
            &["0", "0", "0", "1"],
        ]),
    )
}

fn weak_pair_expected() -> Vec<Expected> {
    let order = vec![0, 1, 2, 3];
    vec![
        Expected::Declines {
            mechanism: MechanismId::CaBpRsd,
            first: 0,
            invitee: 3,
            bound: rat("1/3"),
        },
        // Truthfully, 3 still lands next to 0 when the pool picks 2, 1, 3:
        // 1 + 0.2 / 6.
        Expected::FtViolation {
            mechanism: MechanismId::CaBpRsd,
            agent: 0,
            lie: Some(2),
            truthful: rat("31/30"),
            lying: rat("1.1"),
        },
        Expected::PrefersDeclaring {
            mechanism: MechanismId::CaBqRsd,
            order: order.clone(),
            agent: 0,
            prefers: Some(2),
            over: Some(3),
            tentative: true,
        },
        Expected::PrefersDeclaring {
            mechanism: MechanismId::CaBeRsd,
            order,
            agent: 0,
            prefers: Some(2),
            over: Some(3),
            tentative: true,
        },
    ]
}

/// Plots 0 and 1 adjacent, the rest isolated; friends {0, 1} with weight
/// 100; everybody values plot 0 at 1 and the rest at 0.
pub fn hub(n: usize) -> Instance {
    let values = vec![
        (0..n)
            .map(|v| if v == 0 { Rational::one() } else { Rational::zero() })
            .collect();
        n
    ];
    build(
        PlotGraph::new(n, [(0, 1)]).expect("valid"),
        vec![FriendPair::symmetric(0, 1, rat("100"))],
        values,
    )
}

fn hub_expected(n: usize) -> Vec<Expected> {
    let n_big = Rational::from_integer(n as i64);
    vec![
        // plot 0's owner and her friend next door: 1 + 100 + 100
        Expected::Opt(rat("201")),
        // the pair is adjacent exactly when one of them is drawn first
        Expected::ExpectedSw {
            mechanism: MechanismId::OnCtRsd,
            value: Rational::one() + rat("400") / n_big,
        },
        Expected::ExpectedSw {
            mechanism: MechanismId::FfCtRsdStar,
            value: rat("201"),
        },
    ]
}

/// Two stars joined at their centers: plots `0..k` with center 0 and plots
/// `k..2k` with center `k`, edge {0, k}; friends {2i, 2i + 1}. Agents 0 and
/// 1 both value both centers at 1; everything else is 0.
pub fn two_stars(n: usize, phi: Rational) -> Instance {
    let k = n / 2;
    let mut edges: Vec<(usize, usize)> = (1..k).map(|i| (0, i)).collect();
    edges.extend((1..k).map(|i| (k, k + i)));
    edges.push((0, k));
    let mut values = vec![vec![Rational::zero(); n]; n];
    for agent in [0, 1] {
        values[agent][0] = Rational::one();
        values[agent][k] = Rational::one();
    }
    build(
        PlotGraph::new(n, edges).expect("valid"),
        (0..k)
            .map(|i| FriendPair::symmetric(2 * i, 2 * i + 1, phi.clone()))
            .collect(),
        values,
    )
}

fn two_stars_expected(n: usize, phi: &Rational) -> Vec<Expected> {
    let n_big = Rational::from_integer(n as i64);
    vec![
        Expected::Opt(rat("2") + phi + phi),
        Expected::ExpectedSwAtMost {
            mechanism: MechanismId::FfCtRsdStar,
            bound: rat("6") / n_big + Rational::from_integer(4) * phi,
        },
    ]
}

fn star_default_phi() -> Rational {
    rat("1/2")
}

/// Star with center plot 0, friends {2i, 2i + 1}, all values 0. With
/// `marked` set, agent `2 * pair + 1` values the center at 1.
pub fn star_pairs(n: usize, pair: usize, marked: bool, phi: Rational) -> Instance {
    let mut values = vec![vec![Rational::zero(); n]; n];
    if marked {
        values[2 * pair + 1][0] = Rational::one();
    }
    build(
        PlotGraph::new(n, (1..n).map(|v| (0, v))).expect("valid"),
        (0..n / 2)
            .map(|i| FriendPair::symmetric(2 * i, 2 * i + 1, phi.clone()))
            .collect(),
        values,
    )
}

fn marked_star_expected(n: usize, pair: usize, phi: &Rational) -> Vec<Expected> {
    let n_big = Rational::from_integer(n as i64);
    let two_over_n = rat("2") / n_big;
    vec![
        Expected::Opt(Rational::one() + phi + phi),
        Expected::ExpectedSwAtMost {
            mechanism: MechanismId::OnCaRsdStar,
            bound: &two_over_n + phi + phi,
        },
        Expected::PlotProbabilityAtMost {
            mechanism: MechanismId::OnCaRsdStar,
            agent: 2 * pair + 1,
            plot: 0,
            bound: two_over_n,
        },
    ]
}
