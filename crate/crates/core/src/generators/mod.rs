//! Named fixtures, parametric families, the rainbow-matching reduction and
//! seeded random instances.

pub mod fixtures;
mod rainbow;
mod random;

pub use fixtures::{fixture, fixture_names, Expected, Fixture};
pub use rainbow::{proper_colorings, rainbow_reduction, RainbowInstance};
pub use random::{random_instance, RandomSpec, Topology, ValuationMode};
