//! Exact solver for linear contracts over combinatorial action sets.
//!
//! A principal offers an agent a linear contract `alpha` in `[0, 1]`; the agent
//! picks a set of costly actions maximizing `alpha * f(S) - c(S)` and the
//! principal keeps `(1 - alpha) * f(S)`. Everything here runs on exact rational
//! arithmetic: demand queries, structural class checks on the reward function,
//! critical-value schedules of the agent's best response as `alpha` sweeps the
//! unit interval, and the principal's optimal contract.
//!
//! The crate is organized bottom-up:
//!
//! * [`rational`] / [`action_set`] — arbitrary-precision rationals and bitmask
//!   action sets, the two ground types.
//! * [`reward`] / [`cost`] / [`instance`] — reward-function backings, two-part
//!   (per-action plus size-based) cost functions, and JSON-loadable instances.
//! * [`classes`] — exhaustive and sampled checkers for structural classes of
//!   set functions (monotone, submodular, well-layered, ...).
//! * [`demand`] — the agent's best-response oracles: a brute-force reference
//!   and the family of greedy demand algorithms.
//! * [`critical`] — critical-value schedules and the optimal contract.
//! * [`structure`] — indifference loci, genericity, cost perturbation, and
//!   structural diagnostics over schedules.
//! * [`generate`] — seeded random instance generators.

pub mod action_set;
pub mod classes;
pub mod cost;
pub mod critical;
pub mod demand;
pub mod generate;
pub mod instance;
pub mod rational;
pub mod reward;
pub mod structure;

pub use action_set::ActionSet;
pub use cost::SPACost;
pub use instance::Instance;
pub use rational::Rational;
pub use reward::RewardFunction;
