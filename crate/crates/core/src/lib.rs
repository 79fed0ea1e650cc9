//! Plot allocation with friendship externalities.
//!
//! Agents are matched one-to-one with plots of land laid out on a graph.
//! Each agent values plots individually and gains extra utility when a
//! friend lives on an adjacent plot. The crate provides
//!
//! * the exact data model and welfare arithmetic ([`model`], [`Rational`]),
//! * exhaustive and approximate welfare maximization ([`optimize`]),
//! * serial-dictatorship style mechanisms with strategic agents, including
//!   an expectimax oracle for games without closed-form strategies
//!   ([`mechanisms`]),
//! * checkers for Pareto optimality, friendship truthfulness and expected
//!   welfare ([`analysis`]),
//! * named fixtures, parametric families and random instances
//!   ([`generators`]),
//! * instance files, LP export and result tables ([`io`]).
//!
//! Agents and plots are 0-based indices throughout.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod generators;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod optimize;
pub mod rational;

pub use error::{Error, Result};
pub use exec::Execution;
pub use mechanisms::{MechanismId, RandomBits, Reports, RunOutcome};
pub use model::{
    dominates, is_generic, is_singleton_plot, social_welfare, utilities, utility, Allocation, FriendPair,
    FriendshipGraph, Instance, PlotGraph,
};
pub use rational::Rational;
