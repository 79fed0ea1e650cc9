//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{is_generic, FriendPair, FriendshipGraph, Instance, PlotGraph};
use crate::rational::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Path,
    /// `r × c` grid with `r` the largest divisor of `n` not above `√n`.
    Grid,
    /// Plot 0 adjacent to every other plot.
    Star,
    /// Each plot pair adjacent independently with probability 2/5.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValuationMode {
    /// Values in {0, 1}.
    Binary,
    /// Values in {0, 1/20, ..., 1}.
    UniformRational,
    /// Values in {0, 1/1000, ..., 1}, redrawn until the instance is generic.
    Generic,
}

macro_rules! names {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(Error::Unknown { kind: $what, name: s.to_string() }),
                }
            }
        }
    };
}

names!(Topology, "topology", Topology::Path => "path", Topology::Grid => "grid", Topology::Star => "star", Topology::Random => "random");
names!(ValuationMode, "valuation mode", ValuationMode::Binary => "binary", ValuationMode::UniformRational => "uniform", ValuationMode::Generic => "generic");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub topology: Topology,
    pub n: usize,
    /// Number of disjoint friend pairs.
    pub pairs: usize,
    pub phi_min: Rational,
    pub phi_max: Rational,
    /// One weight shared by every directed friendship.
    pub uniform_phi: bool,
    pub valuation: ValuationMode,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            topology: Topology::Path,
            n: 5,
            pairs: 1,
            phi_min: rat("1/10"),
            phi_max: rat("2"),
            uniform_phi: false,
            valuation: ValuationMode::UniformRational,
        }
    }
}

const GENERIC_ATTEMPTS: usize = 1000;

/// A random instance following `spec`, fully determined by `seed`.
///
/// Weights are drawn from 21 evenly spaced points of `[phi_min, phi_max]`.
pub fn random_instance(spec: &RandomSpec, seed: u64) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InfeasibleSpec("at least one agent is required".into()));
    }
    if 2 * spec.pairs > n {
        return Err(Error::InfeasibleSpec(format!(
            "{} friend pairs need {} agents, only {n} available",
            spec.pairs,
            2 * spec.pairs
        )));
    }
    if spec.phi_min.is_negative() || spec.phi_min > spec.phi_max {
        return Err(Error::InfeasibleSpec(format!(
            "weight range [{}, {}] is empty or negative",
            spec.phi_min, spec.phi_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plots = topology(spec.topology, n, &mut rng);

    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(&mut rng);
    let span = &spec.phi_max - &spec.phi_min;
    let draw_phi = |rng: &mut ChaCha8Rng| &spec.phi_min + &span * Rational::new(rng.random_range(0..=20), 20);
    let shared = draw_phi(&mut rng);
    let pairs: Vec<FriendPair> = (0..spec.pairs)
        .map(|p| {
            let (a, b) = (agents[2 * p], agents[2 * p + 1]);
            if spec.uniform_phi {
                FriendPair::symmetric(a, b, shared.clone())
            } else {
                FriendPair::new(a, b, draw_phi(&mut rng), draw_phi(&mut rng))
            }
        })
        .collect();
    let friends = FriendshipGraph::new(n, pairs)?;

    for _ in 0..GENERIC_ATTEMPTS {
        let values = (0..n)
            .map(|_| (0..n).map(|_| draw_value(spec.valuation, &mut rng)).collect())
            .collect();
        let inst = Instance::new(plots.clone(), friends.clone(), values)?;
        if spec.valuation != ValuationMode::Generic || is_generic(&inst) {
            return Ok(inst);
        }
    }
    Err(Error::InfeasibleSpec(format!(
        "no generic valuation found in {GENERIC_ATTEMPTS} draws"
    )))
}

fn draw_value(mode: ValuationMode, rng: &mut ChaCha8Rng) -> Rational {
    match mode {
        ValuationMode::Binary => Rational::from_integer(rng.random_range(0..=1)),
        ValuationMode::UniformRational => Rational::new(rng.random_range(0..=20), 20),
        ValuationMode::Generic => Rational::new(rng.random_range(0..=1000), 1000),
    }
}

fn topology(kind: Topology, n: usize, rng: &mut ChaCha8Rng) -> PlotGraph {
    let edges: Vec<(usize, usize)> = match kind {
        Topology::Path => (1..n).map(|v| (v - 1, v)).collect(),
        Topology::Star => (1..n).map(|v| (0, v)).collect(),
        Topology::Grid => {
            let rows = (1..=n)
                .filter(|r| r * r <= n && n.is_multiple_of(*r))
                .max()
                .unwrap_or(1);
            let cols = n / rows;
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        e.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        e.push((v, v + cols));
                    }
                }
            }
            e
        }
        Topology::Random => {
            let mut e = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random_bool(0.4) {
                        e.push((a, b));
                    }
                }
            }
            e
        }
    };
    PlotGraph::new(n, edges).expect("generated edges are valid")
}
