//! Maximum-weight perfect assignment (Hungarian method with potentials).

use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::model::Allocation;
use crate::rational::Rational;

/// Exact ordered weights the assignment solver can run on.
pub(crate) trait Weight: Clone + Ord + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> {
    fn zero() -> Self;
}

impl Weight for i128 {
    fn zero() -> Self {
        0
    }
}

impl Weight for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
}

/// A bijection rows → columns maximizing the total weight.
pub fn max_weight_assignment(weights: &[Vec<Rational>]) -> Result<Allocation> {
    let n = weights.len();
    if let Some((i, row)) = weights.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::InvalidInstance(format!(
            "weight matrix row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    let cols = assign(n, |i, j| weights[i][j].clone());
    Allocation::new(cols)
}

/// Solves the `n × n` problem for `weight(i, j)`; returns the column of each row.
pub(crate) fn assign<W: Weight>(n: usize, weight: impl Fn(usize, usize) -> W) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // Minimize negated weights; rows and columns are 1-based, 0 is a sentinel.
    let cost = |i: usize, j: usize| -weight(i - 1, j - 1);
    let mut u = vec![W::zero(); n + 1];
    let mut v = vec![W::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<W>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<W> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0].clone() - v[j].clone();
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = minv[j].take() {
                    minv[j] = Some(m - delta.clone());
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        result[p[j] - 1] = j - 1;
    }
    result
}
