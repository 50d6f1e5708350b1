//! Backward search spaces used to harvest training samples.
//!
//! Two explicit spaces run over full states, starting from a randomly
//! completed goal state. One uses the forward actions unchanged and the other
//! uses derived inverse operators. The regression space runs over partial
//! states, starting from the goal condition itself.
//!
//! Facts that no action adds or deletes are pinned to their initial value in
//! every space. Actions whose static preconditions are false initially can
//! never fire and are left out.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::task::{encode_partial, encode_state, Action, Direction, Layout, State, StateVector, StripsTask};

pub const GOAL_COMPLETION_ATTEMPTS: usize = 100;

/// A regression node: the facts it asserts. A group with no asserted member
/// is undefined.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialState(pub FactSet);

impl PartialState {
    pub fn facts(&self) -> &FactSet {
        &self.0
    }

    pub fn is_defined(&self, task: &StripsTask, group: usize) -> bool {
        task.groups.members[group].iter().any(|&f| self.0.contains(f))
    }

    pub fn num_defined(&self, task: &StripsTask) -> usize {
        (0..task.groups.len()).filter(|&g| self.is_defined(task, g)).count()
    }

    pub fn from_state(state: &State) -> Self {
        PartialState(state.0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Forward actions applied to completed goal states.
    ExplicitOriginal,
    /// Derived inverse operators applied to completed goal states.
    ExplicitInverse,
    Regression,
}

impl SpaceKind {
    pub fn is_explicit(self) -> bool {
        !matches!(self, SpaceKind::Regression)
    }
}

pub fn derive_inverse(action: &Action) -> Action {
    let mut pre = action.pre.union(&action.add);
    pre.difference_with(&action.del);
    Action {
        name: action.name.clone(),
        pre,
        add: action.del.clone(),
        del: action.add.clone(),
        direction: Direction::DerivedInverse,
    }
}

/// One inverse per forward action, in the same order.
pub fn derive_inverse_operators(task: &StripsTask) -> Vec<Action> {
    task.actions.iter().map(derive_inverse).collect()
}

/// Extend the goal into a full state from which at least one of
/// `backward_actions` applies. With finite-domain groups each free variable
/// takes a uniformly random value; with singleton groups each free fact holds
/// with probability 1/2.
pub fn complete_goal_state<R: Rng + ?Sized>(
    task: &StripsTask,
    backward_actions: &[Action],
    rng: &mut R,
) -> Result<State> {
    let statics = task.static_facts();
    let mut fixed = task.goal.clone();
    fixed.union_with(&statics.intersection(&task.init));

    let mut free_groups = Vec::new();
    for (g, members) in task.groups.members.iter().enumerate() {
        if members.iter().any(|&f| fixed.contains(f)) {
            continue;
        }
        if members.iter().all(|&f| statics.contains(f)) {
            // static and false initially
            continue;
        }
        free_groups.push(g);
    }

    let attempts = if free_groups.is_empty() { 1 } else { GOAL_COMPLETION_ATTEMPTS };
    for _ in 0..attempts {
        let mut state = fixed.clone();
        for &g in &free_groups {
            let members = &task.groups.members[g];
            if task.groups.is_finite_domain() {
                state.insert(members[rng.gen_range(0..members.len())]);
            } else if rng.gen_bool(0.5) {
                state.insert(members[0]);
            }
        }
        if backward_actions.iter().any(|a| a.is_applicable(&state)) {
            return Ok(State(state));
        }
    }
    Err(PlanError::GoalCompletionFailure { attempts })
}

/// Facts that may not be asserted in a node `action` is regressed through:
/// other values of every variable the action sets or requires.
fn regression_conflicts(task: &StripsTask, action: &Action) -> FactSet {
    let mut conflicts = action.del.clone();
    let mut touched = vec![false; task.groups.len()];
    for f in action.add.iter() {
        touched[task.groups.of_fact(f).0] = true;
    }
    let exclusive = |f: usize, conflicts: &mut FactSet| {
        let (g, _) = task.groups.of_fact(f);
        for &other in &task.groups.members[g] {
            if other != f {
                conflicts.insert(other);
            }
        }
    };
    for f in action.add.iter() {
        exclusive(f, &mut conflicts);
    }
    for f in action.pre.iter() {
        if !touched[task.groups.of_fact(f).0] {
            exclusive(f, &mut conflicts);
        }
    }
    conflicts
}

#[inline]
fn regress_with(node: &FactSet, action: &Action, conflicts: &FactSet) -> Option<FactSet> {
    if !action.add.intersects(node) || conflicts.intersects(node) {
        return None;
    }
    let mut next = node.difference(&action.add);
    next.union_with(&action.pre);
    Some(next)
}

/// `(s \ add) ∪ pre`, defined when the action adds something `s` asserts and
/// deletes nothing it asserts. A variable the action sets but does not
/// require becomes undefined.
pub fn regress(task: &StripsTask, pstate: &PartialState, action: &Action) -> Result<PartialState> {
    let conflicts = regression_conflicts(task, action);
    regress_with(&pstate.0, action, &conflicts)
        .map(PartialState)
        .ok_or_else(|| PlanError::InapplicableRegression(action.name.clone()))
}

/// The goal condition as a partial state; every variable it leaves open is
/// undefined.
pub fn regression_start(task: &StripsTask) -> PartialState {
    let mut facts = task.goal.clone();
    facts.union_with(&task.static_facts().intersection(&task.init));
    PartialState(facts)
}

/// Actions that can ever fire: their static preconditions hold initially.
pub fn relevant_actions(task: &StripsTask) -> Vec<&Action> {
    let statics = task.static_facts();
    let false_statics = statics.difference(&task.init);
    task.actions
        .iter()
        .filter(|a| !a.pre.intersects(&false_statics))
        .collect()
}

/// A backward search space over one task.
#[derive(Debug, Clone)]
pub struct BackwardSpace<'a> {
    pub kind: SpaceKind,
    pub task: &'a StripsTask,
    actions: Vec<Action>,
    conflicts: Vec<FactSet>,
}

impl<'a> BackwardSpace<'a> {
    pub fn new(task: &'a StripsTask, kind: SpaceKind) -> Self {
        let relevant = relevant_actions(task);
        let actions: Vec<Action> = match kind {
            SpaceKind::ExplicitOriginal | SpaceKind::Regression => {
                relevant.into_iter().cloned().collect()
            }
            SpaceKind::ExplicitInverse => relevant.into_iter().map(derive_inverse).collect(),
        };
        let conflicts = if kind == SpaceKind::Regression {
            actions.iter().map(|a| regression_conflicts(task, a)).collect()
        } else {
            Vec::new()
        };
        BackwardSpace {
            kind,
            task,
            actions,
            conflicts,
        }
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// A fresh start node: a completed goal state for the explicit spaces,
    /// the goal partial state for regression.
    pub fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FactSet> {
        match self.kind {
            SpaceKind::Regression => Ok(regression_start(self.task).0),
            _ => complete_goal_state(self.task, &self.actions, rng).map(|s| s.0),
        }
    }

    /// Distinct successor nodes in ascending node order.
    pub fn successors(&self, node: &FactSet) -> Vec<FactSet> {
        let mut out: Vec<FactSet> = match self.kind {
            SpaceKind::Regression => self
                .actions
                .iter()
                .zip(&self.conflicts)
                .filter_map(|(a, c)| regress_with(node, a, c))
                .collect(),
            _ => self
                .actions
                .iter()
                .filter(|a| a.is_applicable(node))
                .map(|a| a.apply_unchecked(node))
                .collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Successors in a uniformly random order.
    pub fn shuffled_successors<R: Rng + ?Sized>(&self, node: &FactSet, rng: &mut R) -> Vec<FactSet> {
        let mut s = self.successors(node);
        s.shuffle(rng);
        s
    }

    pub fn encode(&self, node: &FactSet, layout: Layout) -> Result<StateVector> {
        match self.kind {
            SpaceKind::Regression => encode_partial(node, layout),
            _ => encode_state(self.task, &State(node.clone()), layout),
        }
    }
}
