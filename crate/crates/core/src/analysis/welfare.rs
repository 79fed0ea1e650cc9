//! Expected social welfare: exact by enumeration, or sampled.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mechanisms::oracle::{DeclarationPolicy, Oracle};
use crate::mechanisms::{
    fold_paths, mutual_pairs, run_prepared, validate_reports, BitsChance, MechanismId, PathChance, Prepared, RandomBits,
};
use crate::model::{utility_unchecked, Allocation, Instance};
use crate::optimize::scaled::Scaled;
use crate::optimize::{factorial, next_permutation, optimum};
use crate::rational::Rational;

/// Two-sided 99% quantile of the standard normal distribution.
pub const CI_Z_99: f64 = 2.5758293035489;

const CHUNK: u64 = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct WelfareReport {
    pub mechanism: MechanismId,
    pub exact: bool,
    /// The exact expectation, or the sample mean.
    pub expected_sw: Rational,
    /// Half-width of the 99% confidence interval (sampled reports only).
    pub half_width: Option<f64>,
    pub samples: Option<u64>,
    pub opt: Rational,
}

impl WelfareReport {
    /// `expected_sw / opt`; `None` when OPT is zero.
    pub fn ratio(&self) -> Option<Rational> {
        (!self.opt.is_zero()).then(|| &self.expected_sw / &self.opt)
    }

    /// True when `value` lies within the confidence interval (or equals the
    /// exact expectation).
    pub fn covers(&self, value: &Rational) -> bool {
        match self.half_width {
            None => *value == self.expected_sw,
            Some(h) => (value.to_f64() - self.expected_sw.to_f64()).abs() <= h,
        }
    }
}

impl fmt::Display for WelfareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: E[SW] = {}", self.mechanism, self.expected_sw)?;
        if let Some(h) = self.half_width {
            write!(f, " ± {h:.6} (99%, {} samples)", self.samples.unwrap_or(0))?;
        }
        write!(f, ", OPT = {}", self.opt)?;
        if let Some(r) = self.ratio() {
            write!(f, ", ratio = {:.6}", r.to_f64())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WelfareEstimator {
    /// Largest number of chance-tree leaves visited by exact enumeration.
    pub leaf_budget: u64,
    pub exec: Execution,
}

impl Default for WelfareEstimator {
    fn default() -> Self {
        WelfareEstimator {
            leaf_budget: 2_000_000,
            exec: Execution::Parallel,
        }
    }
}

pub fn exact_expected_sw(inst: &Instance, mech: MechanismId, reports: &[Option<usize>]) -> Result<WelfareReport> {
    WelfareEstimator::default().exact(inst, mech, reports)
}

pub fn monte_carlo_sw(
    inst: &Instance,
    mech: MechanismId,
    reports: &[Option<usize>],
    samples: u64,
    seed: u64,
) -> Result<WelfareReport> {
    WelfareEstimator::default().sampled(inst, mech, reports, samples, seed)
}

/// Sum of `numerator / weight` over the leaves, grouped by weight.
#[derive(Default)]
struct WeightedSum<T>(BTreeMap<u128, T>);

impl WelfareEstimator {
    pub fn exact(&self, inst: &Instance, mech: MechanismId, reports: &[Option<usize>]) -> Result<WelfareReport> {
        inst.require_degree_one()?;
        validate_reports(inst, reports)?;
        let expected_sw = if mech.is_closed_form() {
            self.enumerate(inst, mech, reports)?
        } else {
            let mut oracle = Oracle::new(inst, mech, DeclarationPolicy::Fixed(reports.to_vec()))?;
            oracle.expected_utilities().into_iter().sum()
        };
        Ok(WelfareReport {
            mechanism: mech,
            exact: true,
            expected_sw,
            half_width: None,
            samples: None,
            opt: optimum(inst)?.welfare,
        })
    }

    fn enumerate(&self, inst: &Instance, mech: MechanismId, reports: &[Option<usize>]) -> Result<Rational> {
        let prep = Prepared::new(inst);
        let placed = |c: &mut PathChance| -> Result<Vec<usize>> {
            let state = run_prepared(&prep, mech, reports, c, None)?.expect("no deviation");
            Ok(state.placed.iter().map(|p| p.expect("complete")).collect())
        };
        fn merge<T: std::ops::AddAssign>(mut a: WeightedSum<T>, b: WeightedSum<T>) -> WeightedSum<T> {
            for (w, x) in b.0 {
                match a.0.get_mut(&w) {
                    Some(y) => *y += x,
                    None => {
                        a.0.insert(w, x);
                    }
                }
            }
            a
        }
        let total = |parts: Vec<(u128, Rational)>| -> Rational {
            parts
                .into_iter()
                .map(|(w, s)| s / Rational::from_big(w.into(), 1.into()))
                .sum()
        };
        match Scaled::new(inst) {
            Some(s) => {
                let sums = fold_paths(
                    self.exec,
                    self.leaf_budget,
                    |c| Ok(s.welfare(&placed(c)?)),
                    WeightedSum::<i128>::default,
                    |acc, w, x| *acc.0.entry(w).or_insert(0) += x,
                    merge,
                )?;
                Ok(total(sums.0.into_iter().map(|(w, x)| (w, s.to_rational(x))).collect()))
            }
            None => {
                let sums = fold_paths(
                    self.exec,
                    self.leaf_budget,
                    |c| {
                        let plots = placed(c)?;
                        Ok((0..plots.len())
                            .map(|i| utility_unchecked(inst, &plots, i))
                            .sum::<Rational>())
                    },
                    WeightedSum::<Rational>::default,
                    |acc, w, x| *acc.0.entry(w).or_insert_with(Rational::zero) += x,
                    merge,
                )?;
                Ok(total(sums.0.into_iter().collect()))
            }
        }
    }

    /// Every possible outcome with its probability, in allocation order.
    /// Game-tree mechanisms are evaluated on every agent permutation, each
    /// equally likely.
    pub fn distribution(
        &self,
        inst: &Instance,
        mech: MechanismId,
        reports: &[Option<usize>],
    ) -> Result<Vec<(Allocation, Rational)>> {
        inst.require_degree_one()?;
        validate_reports(inst, reports)?;
        let n = inst.agent_count();
        let mut table: BTreeMap<Allocation, Rational> = BTreeMap::new();
        if mech.is_closed_form() {
            let prep = Prepared::new(inst);
            let leaves = fold_paths(
                self.exec,
                self.leaf_budget,
                |c| {
                    Ok(run_prepared(&prep, mech, reports, c, None)?
                        .expect("no deviation")
                        .into_allocation())
                },
                Vec::new,
                |acc, w, a| acc.push((w, a)),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )?;
            for (w, a) in leaves {
                *table.entry(a).or_insert_with(Rational::zero) += Rational::from_big(1.into(), w.into());
            }
        } else {
            let mut oracle = Oracle::new(inst, mech, DeclarationPolicy::Fixed(reports.to_vec()))?;
            let p = Rational::from_big(1.into(), factorial(n).into());
            let mut order: Vec<usize> = (0..n).collect();
            loop {
                let a = oracle.realize(&RandomBits::from_order(order.clone()))?.allocation;
                *table.entry(a).or_insert_with(Rational::zero) += &p;
                if !next_permutation(&mut order) {
                    break;
                }
            }
        }
        Ok(table.into_iter().collect())
    }

    /// Sample mean over `samples` runs with bits drawn from a ChaCha8
    /// generator. Runs are split into chunks of 1024, chunk `k` drawing from
    /// stream `k` of the seeded generator, so results do not depend on the
    /// execution mode.
    pub fn sampled(
        &self,
        inst: &Instance,
        mech: MechanismId,
        reports: &[Option<usize>],
        samples: u64,
        seed: u64,
    ) -> Result<WelfareReport> {
        if samples == 0 {
            return Err(Error::InvalidInstance("at least one sample is needed".into()));
        }
        inst.require_degree_one()?;
        validate_reports(inst, reports)?;
        let n = inst.agent_count();
        let pairs = mutual_pairs(reports);
        let chunks: Vec<u64> = (0..samples.div_ceil(CHUNK)).collect();
        let prep = Prepared::new(inst);
        let parts = exec::map(self.exec, &chunks, |&k| -> Result<(Rational, Rational)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let count = CHUNK.min(samples - k * CHUNK);
            let mut oracle = if mech.is_closed_form() {
                None
            } else {
                Some(Oracle::new(inst, mech, DeclarationPolicy::Fixed(reports.to_vec()))?)
            };
            let mut sum = Rational::zero();
            let mut squares = Rational::zero();
            for _ in 0..count {
                let bits = RandomBits::sample(n, &pairs, &mut rng);
                let sw = match oracle.as_mut() {
                    Some(o) => o.realize(&bits)?.welfare(),
                    None => {
                        let mut chance = BitsChance::new(&bits);
                        let state = run_prepared(&prep, mech, reports, &mut chance, None)?.expect("no deviation");
                        let plots: Vec<usize> = state.placed.iter().map(|p| p.expect("complete")).collect();
                        (0..n).map(|i| utility_unchecked(inst, &plots, i)).sum()
                    }
                };
                squares += &sw * &sw;
                sum += sw;
            }
            Ok((sum, squares))
        });
        let mut sum = Rational::zero();
        let mut squares = Rational::zero();
        for part in parts {
            let (s, q) = part?;
            sum += s;
            squares += q;
        }
        let k = Rational::from_integer(samples as i64);
        let mean = &sum / &k;
        let half_width = if samples > 1 {
            let variance = (squares - &sum * &mean) / Rational::from_integer(samples as i64 - 1);
            CI_Z_99 * (variance.to_f64().max(0.0) / samples as f64).sqrt()
        } else {
            0.0
        };
        Ok(WelfareReport {
            mechanism: mech,
            exact: false,
            expected_sw: mean,
            half_width: Some(half_width),
            samples: Some(samples),
            opt: optimum(inst)?.welfare,
        })
    }
}
