//! STRIPS/typing subset of PDDL: reader, pretty-printer and grounder.

pub mod ast;
mod ground;
mod parser;
pub mod sexpr;

pub use ast::{ActionSchema, Atom, DomainAst, Literal, PredicateDecl, ProblemAst, TypedName};
pub use ground::{ground, ground_with, GroundOptions, DEFAULT_ACTION_CAP};
pub use parser::{parse_domain, parse_pddl, parse_problem};

use crate::error::Result;
use crate::task::StripsTask;

/// Parse and ground a domain/problem pair in one step.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<StripsTask> {
    let (d, p) = parse_pddl(domain_text, problem_text)?;
    ground(&d, &p)
}
