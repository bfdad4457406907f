//! Timeline-based planning games.
//!
//! The crate models planning domains as sets of state variables whose
//! behaviour over time is a set of timelines, constrained by
//! synchronization rules. On top of that ground model it provides:
//!
//! - validation of scheduled plans against a problem ([`rules`]);
//! - flexible timelines and plans with temporal uncertainty, and a
//!   bounded refutation search for flexible solutions ([`flexible`]);
//! - a two-player game semantics where the controller and the
//!   environment build a plan round by round ([`game`]);
//! - a solver that decides whether the controller has a winning
//!   strategy and extracts an executable one ([`solver`]).
//!
//! Everything is a plain immutable value; mutation happens only by
//! constructing successor plans.

pub mod fixtures;
pub mod flexible;
pub mod game;
pub mod model;
pub mod oracle;
pub mod rules;
pub mod solver;

pub use model::{PartialPlan, ScheduledPlan, StateVariable, Timeline, Token};
pub use rules::{Atom, Problem, SynchronizationRule};
