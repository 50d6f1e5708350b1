//! Grounded propositional tasks, forward semantics, state vectors and plan
//! validation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    /// Backward operator obtained from a forward action by swapping its
    /// add and delete effects.
    DerivedInverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub pre: FactSet,
    pub add: FactSet,
    pub del: FactSet,
    pub direction: Direction,
}

impl Action {
    #[inline]
    pub fn is_applicable(&self, state: &FactSet) -> bool {
        self.pre.is_subset(state)
    }

    /// `s ∪ add \ del` without checking the precondition.
    pub fn apply_unchecked(&self, state: &FactSet) -> FactSet {
        let mut next = state.clone();
        next.difference_with(&self.del);
        next.union_with(&self.add);
        next
    }
}

/// A full state: the set of facts that hold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub FactSet);

impl State {
    pub fn facts(&self) -> &FactSet {
        &self.0
    }

    pub fn satisfies(&self, goal: &FactSet) -> bool {
        goal.is_subset(&self.0)
    }
}

/// Partition of the facts into mutually exclusive groups. Tasks read from a
/// finite-domain file get one group per variable; tasks grounded from PDDL
/// get one singleton group per fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactGroups {
    pub names: Vec<String>,
    pub members: Vec<Vec<usize>>,
    fact_group: Vec<(usize, usize)>,
    finite_domain: bool,
}

impl FactGroups {
    pub fn singletons(fact_names: &[String]) -> Self {
        FactGroups {
            names: fact_names.to_vec(),
            members: (0..fact_names.len()).map(|i| vec![i]).collect(),
            fact_group: (0..fact_names.len()).map(|i| (i, 0)).collect(),
            finite_domain: false,
        }
    }

    /// Groups from finite-domain variables; `members[v][k]` is the fact for
    /// value `k` of variable `v`. Every fact must belong to exactly one group.
    pub fn variables(names: Vec<String>, members: Vec<Vec<usize>>, num_facts: usize) -> Self {
        let mut fact_group = vec![(usize::MAX, usize::MAX); num_facts];
        for (v, facts) in members.iter().enumerate() {
            for (k, &f) in facts.iter().enumerate() {
                fact_group[f] = (v, k);
            }
        }
        assert!(
            fact_group.iter().all(|&(v, _)| v != usize::MAX),
            "every fact must belong to a variable"
        );
        FactGroups {
            names,
            members,
            fact_group,
            finite_domain: true,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// (group index, value index) of a fact.
    #[inline]
    pub fn of_fact(&self, fact: usize) -> (usize, usize) {
        self.fact_group[fact]
    }

    pub fn is_finite_domain(&self) -> bool {
        self.finite_domain
    }
}

#[derive(Debug, Clone)]
pub struct StripsTask {
    pub fact_names: Vec<String>,
    pub actions: Vec<Action>,
    pub init: FactSet,
    pub goal: FactSet,
    pub groups: FactGroups,
}

impl StripsTask {
    /// Task with singleton fact groups.
    pub fn new(
        fact_names: Vec<String>,
        actions: Vec<Action>,
        init: FactSet,
        goal: FactSet,
    ) -> Self {
        let groups = FactGroups::singletons(&fact_names);
        StripsTask {
            fact_names,
            actions,
            init,
            goal,
            groups,
        }
    }

    pub fn num_facts(&self) -> usize {
        self.fact_names.len()
    }

    pub fn initial_state(&self) -> State {
        State(self.init.clone())
    }

    pub fn is_goal(&self, state: &FactSet) -> bool {
        self.goal.is_subset(state)
    }

    /// Facts that no action adds or deletes.
    pub fn static_facts(&self) -> FactSet {
        let mut touched = FactSet::new(self.num_facts());
        for a in &self.actions {
            touched.union_with(&a.add);
            touched.union_with(&a.del);
        }
        let mut all = FactSet::new(self.num_facts());
        for i in 0..self.num_facts() {
            all.insert(i);
        }
        all.difference(&touched)
    }

    /// Stable identifier of the fact space, used to tie training data and
    /// models to the tasks they were built for.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        for name in &self.fact_names {
            h.update(name.as_bytes());
            h.update([0u8]);
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Value index of every group in a full state. Only meaningful for
    /// finite-domain tasks, where each group holds exactly one fact.
    pub fn multivalued(&self, state: &FactSet) -> Result<Vec<usize>> {
        if !self.groups.is_finite_domain() {
            return Err(PlanError::UnsupportedEncoding(
                "multivalued layout needs a finite-domain task".into(),
            ));
        }
        self.groups
            .members
            .iter()
            .enumerate()
            .map(|(v, facts)| {
                facts.iter().position(|&f| state.contains(f)).ok_or_else(|| {
                    PlanError::UnsupportedEncoding(format!(
                        "variable {} has no value in this state",
                        self.groups.names[v]
                    ))
                })
            })
            .collect()
    }

    pub fn state_from_values(&self, values: &[usize]) -> State {
        let mut s = FactSet::new(self.num_facts());
        for (v, &k) in values.iter().enumerate() {
            s.insert(self.groups.members[v][k]);
        }
        State(s)
    }

    pub fn describe(&self, facts: &FactSet) -> String {
        let mut out = String::from("{");
        for (n, i) in facts.iter().enumerate() {
            if n > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}", self.fact_names[i]);
        }
        out.push('}');
        out
    }
}

pub fn apply_action(state: &State, action: &Action) -> Result<State> {
    if !action.is_applicable(&state.0) {
        return Err(PlanError::InapplicableAction(action.name.clone()));
    }
    Ok(State(action.apply_unchecked(&state.0)))
}

/// All applicable actions with their successor states, in action-index order.
pub fn successors(state: &State, actions: &[Action]) -> Vec<(usize, State)> {
    actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_applicable(&state.0))
        .map(|(i, a)| (i, State(a.apply_unchecked(&state.0))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    /// One 0/1 entry per fact.
    Boolean,
    /// One value index per finite-domain variable.
    Multivalued,
}

impl Layout {
    pub fn tag(self) -> u8 {
        match self {
            Layout::Boolean => 0,
            Layout::Multivalued => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Layout> {
        match tag {
            0 => Some(Layout::Boolean),
            1 => Some(Layout::Multivalued),
            _ => None,
        }
    }

    pub fn width(self, task: &StripsTask) -> usize {
        match self {
            Layout::Boolean => task.num_facts(),
            Layout::Multivalued => task.groups.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub layout: Layout,
}

fn boolean_vector(facts: &FactSet) -> Vec<f64> {
    let mut values = vec![0.0; facts.capacity()];
    for i in facts.iter() {
        values[i] = 1.0;
    }
    values
}

pub fn encode_state(task: &StripsTask, state: &State, layout: Layout) -> Result<StateVector> {
    let values = match layout {
        Layout::Boolean => boolean_vector(&state.0),
        Layout::Multivalued => task
            .multivalued(&state.0)?
            .into_iter()
            .map(|k| k as f64)
            .collect(),
    };
    Ok(StateVector { values, layout })
}

/// Inverse of the boolean encoding on full states.
pub fn decode_boolean(vector: &StateVector) -> Result<State> {
    if vector.layout != Layout::Boolean {
        return Err(PlanError::UnsupportedEncoding(
            "only boolean vectors decode directly".into(),
        ));
    }
    Ok(State(FactSet::from_indices(
        vector.values.len(),
        vector
            .values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| i),
    )))
}

/// Encoding of a regression node. Undefined groups contribute all-zero bits;
/// there is no value index for "undefined", so the multivalued layout is
/// rejected.
pub fn encode_partial(facts: &FactSet, layout: Layout) -> Result<StateVector> {
    match layout {
        Layout::Boolean => Ok(StateVector {
            values: boolean_vector(facts),
            layout,
        }),
        Layout::Multivalued => Err(PlanError::UnsupportedEncoding(
            "partial states have no multivalued encoding".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<usize>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// One `(name args...)` line per action.
    pub fn to_text(&self, task: &StripsTask) -> String {
        let mut out = String::new();
        for &a in &self.actions {
            out.push_str(&task.actions[a].name);
            out.push('\n');
        }
        out
    }

    pub fn from_text(task: &StripsTask, text: &str) -> Result<Plan> {
        let mut actions = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            let idx = task
                .actions
                .iter()
                .position(|a| a.name.eq_ignore_ascii_case(line))
                .ok_or_else(|| PlanError::Semantic(format!("unknown action in plan: {line}")))?;
            actions.push(idx);
        }
        Ok(Plan { actions })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanValidation {
    pub valid: bool,
    pub end_state: State,
    /// Step at which the plan failed: the index of an inapplicable action,
    /// or the plan length when the goal is not reached.
    pub failed_step: Option<usize>,
}

pub fn validate_plan(task: &StripsTask, plan: &Plan) -> PlanValidation {
    let mut state = task.initial_state();
    for (step, &a) in plan.actions.iter().enumerate() {
        let action = &task.actions[a];
        if !action.is_applicable(&state.0) {
            return PlanValidation {
                valid: false,
                end_state: state,
                failed_step: Some(step),
            };
        }
        state = State(action.apply_unchecked(&state.0));
    }
    let valid = state.satisfies(&task.goal);
    PlanValidation {
        valid,
        failed_step: (!valid).then_some(plan.actions.len()),
        end_state: state,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn fs(n: usize, idx: &[usize]) -> FactSet {
        FactSet::from_indices(n, idx.iter().copied())
    }

    pub fn action(n: usize, name: &str, pre: &[usize], add: &[usize], del: &[usize]) -> Action {
        Action {
            name: name.to_string(),
            pre: fs(n, pre),
            add: fs(n, add),
            del: fs(n, del),
            direction: Direction::Forward,
        }
    }

    #[test]
    fn apply_examples() {
        // p=0, q=1
        let a = action(2, "a", &[0], &[1], &[0]);
        assert_eq!(apply_action(&State(fs(2, &[0])), &a).unwrap(), State(fs(2, &[1])));
        let b = action(2, "b", &[0], &[1], &[]);
        assert_eq!(apply_action(&State(fs(2, &[0, 1])), &b).unwrap(), State(fs(2, &[0, 1])));
        assert!(matches!(
            apply_action(&State(fs(2, &[])), &a),
            Err(PlanError::InapplicableAction(_))
        ));
    }

    #[test]
    fn encode_boolean_and_multivalued() {
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let task = StripsTask::new(names, vec![], fs(3, &[]), fs(3, &[]));
        let v = encode_state(&task, &State(fs(3, &[0, 2])), Layout::Boolean).unwrap();
        assert_eq!(v.values, vec![1.0, 0.0, 1.0]);
        assert!(encode_state(&task, &State(fs(3, &[0])), Layout::Multivalued).is_err());

        // v0 has 2 values (facts 0,1), v1 has 3 values (facts 2,3,4)
        let names: Vec<String> = (0..5).map(|i| format!("f{i}")).collect();
        let mut task = StripsTask::new(names, vec![], fs(5, &[]), fs(5, &[]));
        task.groups = FactGroups::variables(
            vec!["v0".into(), "v1".into()],
            vec![vec![0, 1], vec![2, 3, 4]],
            5,
        );
        let s = State(fs(5, &[1, 4]));
        let v = encode_state(&task, &s, Layout::Multivalued).unwrap();
        assert_eq!(v.values, vec![1.0, 2.0]);
        let b = encode_state(&task, &s, Layout::Boolean).unwrap();
        assert_eq!(decode_boolean(&b).unwrap(), s);
    }

    #[test]
    fn undefined_variable_encodes_as_zero_bits() {
        // x has two values (facts 0,1) and is undefined; y=fact 2 is defined
        let v = encode_partial(&fs(4, &[2]), Layout::Boolean).unwrap();
        assert_eq!(&v.values[..2], &[0.0, 0.0]);
        assert!(matches!(
            encode_partial(&fs(4, &[2]), Layout::Multivalued),
            Err(PlanError::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn successors_in_action_order() {
        let acts = vec![
            action(3, "a0", &[0], &[1], &[]),
            action(3, "a1", &[2], &[1], &[]),
            action(3, "a2", &[0], &[2], &[0]),
        ];
        let succ = successors(&State(fs(3, &[0])), &acts);
        assert_eq!(succ.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![0, 2]);
        assert!(successors(&State(fs(3, &[])), &acts).is_empty());
    }

    #[test]
    fn validate_empty_plans() {
        let names: Vec<String> = (0..2).map(|i| format!("f{i}")).collect();
        let task = StripsTask::new(names.clone(), vec![], fs(2, &[0, 1]), fs(2, &[1]));
        assert!(validate_plan(&task, &Plan::default()).valid);
        let task = StripsTask::new(names, vec![], fs(2, &[0]), fs(2, &[1]));
        let r = validate_plan(&task, &Plan::default());
        assert!(!r.valid);
        assert_eq!(r.failed_step, Some(0));
    }
}
