//! Reduction from rainbow matching on an edge-colored path.
//!
//! A path on `s` vertices has edges `e_0 .. e_{s-2}`, `e_t = {t, t + 1}`, each
//! with one of `q` colors, consecutive edges differing. A rainbow matching is
//! a set of disjoint edges with pairwise distinct colors. The reduction
//! builds an allocation instance whose optimum reaches `2q + 2k/10` exactly
//! when a rainbow matching of size `k` exists.

use crate::error::{Error, Result};
use crate::model::{FriendPair, FriendshipGraph, Instance, PlotGraph};
use crate::rational::{rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RainbowInstance {
    /// Number of path vertices `s`.
    pub path_length: usize,
    pub colors: usize,
    /// Color of each of the `s - 1` edges.
    pub coloring: Vec<usize>,
    /// Target matching size.
    pub k: usize,
}

impl RainbowInstance {
    pub fn validate(&self) -> Result<()> {
        let s = self.path_length;
        if s == 0 {
            return Err(Error::InvalidRainbow("path needs at least one vertex".into()));
        }
        if self.coloring.len() != s - 1 {
            return Err(Error::InvalidRainbow(format!(
                "{} edge colors for a path with {} edges",
                self.coloring.len(),
                s - 1
            )));
        }
        if let Some(c) = self.coloring.iter().find(|&&c| c >= self.colors) {
            return Err(Error::InvalidRainbow(format!("color {c} outside 0..{}", self.colors)));
        }
        if let Some(t) = (1..self.coloring.len()).find(|&t| self.coloring[t] == self.coloring[t - 1]) {
            return Err(Error::InvalidRainbow(format!(
                "edges {} and {t} share color {}",
                t - 1,
                self.coloring[t]
            )));
        }
        Ok(())
    }
}

/// Builds the instance and its welfare threshold `T = 2q + 2k/10`.
///
/// Agents `2c` and `2c + 1` carry color `c` and are friends with weight
/// 1/10; agents `2q ..` are dummies with all-zero values. Plots `0..s` are the
/// path, plot `s + a` is color agent `a`'s private isolated plot, valued 1 by
/// her alone. Along the edges of color `c`, taken left to right, agent `2c`
/// values the left endpoint of odd-numbered edges (1st, 3rd, ...) and the
/// right endpoint of even-numbered ones; agent `2c + 1` values the other
/// endpoint of each. A same-colored pair can thus collect both path values
/// only on a single edge of its own color.
pub fn rainbow_reduction(r: &RainbowInstance) -> Result<(Instance, Rational)> {
    r.validate()?;
    let s = r.path_length;
    let q = r.colors;
    let n = 2 * q + s;
    let phi = rat("1/10");
    let mut values = vec![vec![Rational::zero(); n]; n];
    for c in 0..q {
        let (first, second) = (2 * c, 2 * c + 1);
        values[first][s + first] = Rational::one();
        values[second][s + second] = Rational::one();
        let edges = (0..r.coloring.len()).filter(|&t| r.coloring[t] == c);
        for (ell, t) in edges.enumerate() {
            // `ell` is 0-based, so even `ell` is an odd-numbered edge
            let (left, right) = (t, t + 1);
            let (mine, theirs) = if ell % 2 == 0 { (left, right) } else { (right, left) };
            values[first][mine] = Rational::one();
            values[second][theirs] = Rational::one();
        }
    }
    let plots = PlotGraph::new(n, (1..s).map(|v| (v - 1, v)))?;
    let friends = FriendshipGraph::new(
        n,
        (0..q)
            .map(|c| FriendPair::symmetric(2 * c, 2 * c + 1, phi.clone()))
            .collect(),
    )?;
    let inst = Instance::new(plots, friends, values)?;
    let threshold = Rational::from_integer(2 * q as i64) + Rational::from_integer(2 * r.k as i64) * phi;
    Ok((inst, threshold))
}

/// Every proper coloring of a path with `edges` edges, up to renaming
/// colors: color labels appear in order of first use.
pub fn proper_colorings(edges: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: usize, edges: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == edges {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=used {
            if prefix.last() == Some(&c) {
                continue;
            }
            prefix.push(c);
            go(prefix, used.max(c + 1), edges, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, edges, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_edge_path() {
        let r = RainbowInstance {
            path_length: 3,
            colors: 2,
            coloring: vec![0, 1],
            k: 1,
        };
        let (inst, t) = rainbow_reduction(&r).unwrap();
        assert_eq!(inst.agent_count(), 7);
        assert_eq!(t, rat("4.2"));
        // color 0 owns edge {0, 1}: agent 0 values 0, agent 1 values 1
        assert_eq!(inst.value(0, 0), &Rational::one());
        assert_eq!(inst.value(1, 1), &Rational::one());
        assert_eq!(inst.value(1, 0), &Rational::zero());
        // private isolated plots
        assert_eq!(inst.value(3, 3 + 3), &Rational::one());
        assert!(inst.plot_graph().is_isolated(6));
        assert!(inst.is_binary());
    }

    #[test]
    fn zero_target_threshold() {
        let r = RainbowInstance {
            path_length: 4,
            colors: 2,
            coloring: vec![0, 1, 0],
            k: 0,
        };
        assert_eq!(rainbow_reduction(&r).unwrap().1, rat("4"));
    }

    #[test]
    fn alternation_along_a_color_class() {
        // color 0 on edges {0,1} and {2,3}
        let r = RainbowInstance {
            path_length: 4,
            colors: 2,
            coloring: vec![0, 1, 0],
            k: 1,
        };
        let (inst, _) = rainbow_reduction(&r).unwrap();
        let on_path = |a: usize| (0..4).filter(|&v| inst.value(a, v).is_positive()).collect::<Vec<_>>();
        assert_eq!(on_path(0), vec![0, 3]);
        assert_eq!(on_path(1), vec![1, 2]);
    }

    #[test]
    fn rejects_improper() {
        let bad = RainbowInstance {
            path_length: 3,
            colors: 2,
            coloring: vec![1, 1],
            k: 1,
        };
        assert!(matches!(rainbow_reduction(&bad), Err(Error::InvalidRainbow(_))));
        let short = RainbowInstance {
            coloring: vec![0],
            ..bad.clone()
        };
        assert!(rainbow_reduction(&short).is_err());
    }

    #[test]
    fn coloring_counts() {
        // first edge fixed to color 0, each further edge: any used color but
        // the previous one, or a fresh one
        assert_eq!(proper_colorings(0), vec![Vec::<usize>::new()]);
        assert_eq!(proper_colorings(1), vec![vec![0]]);
        assert_eq!(proper_colorings(2), vec![vec![0, 1]]);
        assert_eq!(proper_colorings(3).len(), 2);
        for c in proper_colorings(5) {
            assert!(c.windows(2).all(|w| w[0] != w[1]));
        }
    }
}
