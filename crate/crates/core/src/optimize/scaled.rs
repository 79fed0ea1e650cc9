//! Integer view of an instance for hot enumeration loops.
//!
//! Every value and weight is multiplied by the least common multiple of all
//! denominators. Comparisons and sums on the scaled integers are exact and
//! convert back to [`Rational`] by dividing by the scale.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::model::Instance;
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub(crate) struct Scaled<'a> {
    inst: &'a Instance,
    scale: BigInt,
    n: usize,
    values: Vec<i64>,
    friends: Vec<Vec<(usize, i64)>>,
}

impl<'a> Scaled<'a> {
    /// `None` when some scaled number does not fit in 64 bits.
    pub(crate) fn new(inst: &'a Instance) -> Option<Self> {
        let n = inst.agent_count();
        let fg = inst.friendships();
        let mut scale = BigInt::one();
        let all = inst
            .values()
            .iter()
            .flatten()
            .chain(fg.pairs().iter().flat_map(|p| [&p.weight_ab, &p.weight_ba]));
        for r in all {
            scale = scale.lcm(r.denom());
        }
        let to_int = |r: &Rational| -> Option<i64> { (r.numer() * (&scale / r.denom())).to_i64() };
        let mut values = Vec::with_capacity(n * n);
        for row in inst.values() {
            for u in row {
                values.push(to_int(u)?);
            }
        }
        let mut friends = Vec::with_capacity(n);
        for i in 0..n {
            let mut list = Vec::new();
            for (j, w) in fg.friends_of(i) {
                list.push((*j, to_int(w)?));
            }
            friends.push(list);
        }
        // Keep every welfare sum far from the i128 limits.
        scale.to_i64()?;
        Some(Scaled {
            inst,
            scale,
            n,
            values,
            friends,
        })
    }

    pub(crate) fn instance(&self) -> &'a Instance {
        self.inst
    }

    #[inline]
    pub(crate) fn value(&self, agent: usize, plot: usize) -> i64 {
        self.values[agent * self.n + plot]
    }

    pub(crate) fn friends_of(&self, agent: usize) -> &[(usize, i64)] {
        &self.friends[agent]
    }

    #[inline]
    pub(crate) fn utility(&self, plots: &[usize], agent: usize) -> i128 {
        let mine = plots[agent];
        let graph = self.inst.plot_graph();
        let mut total = self.value(agent, mine) as i128;
        for &(j, w) in &self.friends[agent] {
            if graph.adjacent(mine, plots[j]) {
                total += w as i128;
            }
        }
        total
    }

    pub(crate) fn welfare(&self, plots: &[usize]) -> i128 {
        (0..self.n).map(|i| self.utility(plots, i)).sum()
    }

    pub(crate) fn to_rational(&self, x: i128) -> Rational {
        Rational::from_big(BigInt::from(x), self.scale.clone())
    }
}
