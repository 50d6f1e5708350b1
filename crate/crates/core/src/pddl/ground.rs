//! Instantiation of lifted schemas into a propositional task.

use std::collections::HashMap;

use super::ast::{Atom, DomainAst, ProblemAst};
use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::task::{Action, Direction, StripsTask};

pub const DEFAULT_ACTION_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    pub action_cap: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            action_cap: DEFAULT_ACTION_CAP,
        }
    }
}

struct Universe {
    names: Vec<String>,
    types: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    fn new(domain: &DomainAst, problem: &ProblemAst) -> Self {
        let mut u = Universe {
            names: Vec::new(),
            types: Vec::new(),
            index: HashMap::new(),
        };
        for o in domain.constants.iter().chain(problem.objects.iter()) {
            if !u.index.contains_key(&o.name) {
                u.index.insert(o.name.clone(), u.names.len());
                u.names.push(o.name.clone());
                u.types.push(o.ty.clone());
            }
        }
        u
    }

    fn of_type(&self, domain: &DomainAst, ty: &str) -> Vec<usize> {
        (0..self.names.len())
            .filter(|&o| domain.is_subtype(&self.types[o], ty))
            .collect()
    }
}

type FactKey = (usize, Vec<usize>);

fn for_each_tuple(candidates: &[Vec<usize>], injective: bool, f: &mut dyn FnMut(&[usize]) -> Result<()>) -> Result<()> {
    fn rec(
        candidates: &[Vec<usize>],
        injective: bool,
        prefix: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if prefix.len() == candidates.len() {
            return f(prefix);
        }
        for &o in &candidates[prefix.len()] {
            if injective && prefix.contains(&o) {
                continue;
            }
            prefix.push(o);
            rec(candidates, injective, prefix, f)?;
            prefix.pop();
        }
        Ok(())
    }
    rec(candidates, injective, &mut Vec::with_capacity(candidates.len()), f)
}

/// Ground a STRIPS domain/problem pair.
///
/// Facts are every type-consistent atom over the objects. Actions are every
/// type-consistent binding of distinct objects to schema parameters; a fact
/// both added and deleted by one binding stays an add effect only.
pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<StripsTask> {
    ground_with(domain, problem, GroundOptions::default())
}

pub fn ground_with(domain: &DomainAst, problem: &ProblemAst, opts: GroundOptions) -> Result<StripsTask> {
    let universe = Universe::new(domain, problem);

    let mut fact_names = Vec::new();
    let mut fact_index: HashMap<FactKey, usize> = HashMap::new();
    for (p, decl) in domain.predicates.iter().enumerate() {
        let candidates: Vec<Vec<usize>> = decl
            .params
            .iter()
            .map(|param| universe.of_type(domain, &param.ty))
            .collect();
        for_each_tuple(&candidates, false, &mut |args| {
            let mut name = format!("({}", decl.name);
            for &a in args {
                name.push(' ');
                name.push_str(&universe.names[a]);
            }
            name.push(')');
            fact_index.insert((p, args.to_vec()), fact_names.len());
            fact_names.push(name);
            Ok(())
        })?;
    }
    let n = fact_names.len();
    let pred_index: HashMap<&str, usize> = domain
        .predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();

    let ground_atom = |atom: &Atom, resolve: &dyn Fn(&str) -> Result<usize>| -> Result<usize> {
        let p = pred_index[atom.predicate.as_str()];
        let args = atom
            .args
            .iter()
            .map(|a| resolve(a))
            .collect::<Result<Vec<_>>>()?;
        fact_index.get(&(p, args)).copied().ok_or_else(|| {
            PlanError::Semantic(format!("atom {atom} is not type-consistent"))
        })
    };
    let lookup_object = |name: &str| {
        universe
            .index
            .get(name)
            .copied()
            .ok_or_else(|| PlanError::Semantic(format!("undeclared object `{name}`")))
    };

    let mut init = FactSet::new(n);
    for a in &problem.init {
        init.insert(ground_atom(a, &lookup_object)?);
    }
    let mut goal = FactSet::new(n);
    for a in &problem.goal {
        let resolve = |name: &str| {
            universe
                .index
                .get(name)
                .copied()
                .ok_or_else(|| PlanError::UndeclaredObject(name.to_string()))
        };
        goal.insert(ground_atom(a, &resolve)?);
    }

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let candidates: Vec<Vec<usize>> = schema
            .params
            .iter()
            .map(|p| universe.of_type(domain, &p.ty))
            .collect();
        let slot: HashMap<&str, usize> = schema
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        for_each_tuple(&candidates, true, &mut |binding| {
            if actions.len() >= opts.action_cap {
                return Err(PlanError::GroundingCap {
                    cap: opts.action_cap,
                });
            }
            let resolve = |term: &str| match slot.get(term) {
                Some(&i) => Ok(binding[i]),
                None => lookup_object(term),
            };
            let mut pre = FactSet::new(n);
            for a in &schema.precondition {
                pre.insert(ground_atom(a, &resolve)?);
            }
            let mut add = FactSet::new(n);
            let mut del = FactSet::new(n);
            for lit in &schema.effect {
                let f = ground_atom(&lit.atom, &resolve)?;
                if lit.negated {
                    del.insert(f);
                } else {
                    add.insert(f);
                }
            }
            del.difference_with(&add);
            let mut name = format!("({}", schema.name);
            for &o in binding {
                name.push(' ');
                name.push_str(&universe.names[o]);
            }
            name.push(')');
            actions.push(Action {
                name,
                pre,
                add,
                del,
                direction: Direction::Forward,
            });
            Ok(())
        })?;
    }

    Ok(StripsTask::new(fact_names, actions, init, goal))
}
