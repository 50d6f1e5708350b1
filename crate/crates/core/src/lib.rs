//! A classical planner that learns its own heuristic: backward search from
//! the goal produces (state, distance) samples, a small ReLU network is fit
//! to them, and greedy best-first search uses the network as its heuristic.

pub mod error;
pub mod experiment;
pub mod fact_set;
pub mod nn;
pub mod backward;
pub mod pddl;
pub mod sampler;
pub mod sas;
pub mod search;
pub mod task;

pub use error::{PlanError, Result};
pub use fact_set::FactSet;
