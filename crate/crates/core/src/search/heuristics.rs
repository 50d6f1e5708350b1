use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::nn::{MlpModel, Scratch};
use crate::task::{Layout, StripsTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HeuristicKind {
    Nn,
    Blind,
    GoalCount,
    Ff,
}

/// State evaluator; `f64::INFINITY` marks a recognized dead end.
pub trait Heuristic {
    fn evaluate(&mut self, state: &FactSet) -> f64;
}

pub struct Blind;

impl Heuristic for Blind {
    fn evaluate(&mut self, _state: &FactSet) -> f64 {
        0.0
    }
}

/// Number of goal facts missing from `state`.
pub fn h_goalcount(task: &StripsTask, state: &FactSet) -> usize {
    task.goal.difference(state).count()
}

pub struct GoalCount<'a> {
    pub task: &'a StripsTask,
}

impl Heuristic for GoalCount<'_> {
    fn evaluate(&mut self, state: &FactSet) -> f64 {
        h_goalcount(self.task, state) as f64
    }
}

/// Delete-relaxation relaxed-plan heuristic.
pub struct Ff<'a> {
    task: &'a StripsTask,
    pre_of: Vec<Vec<usize>>,
    pre_lists: Vec<Vec<usize>>,
    add_lists: Vec<Vec<usize>>,
    achievers: Vec<Vec<usize>>,
    goals: Vec<usize>,
    fact_layer: Vec<u32>,
    action_layer: Vec<u32>,
    unsatisfied: Vec<u32>,
    selected: Vec<bool>,
    marked: Vec<bool>,
}

const UNREACHED: u32 = u32::MAX;

impl<'a> Ff<'a> {
    pub fn new(task: &'a StripsTask) -> Self {
        let n = task.num_facts();
        let mut pre_of = vec![Vec::new(); n];
        let mut achievers = vec![Vec::new(); n];
        let mut pre_lists = Vec::with_capacity(task.actions.len());
        let mut add_lists = Vec::with_capacity(task.actions.len());
        for (i, a) in task.actions.iter().enumerate() {
            let pre: Vec<usize> = a.pre.iter().collect();
            let add: Vec<usize> = a.add.iter().collect();
            for &f in &pre {
                pre_of[f].push(i);
            }
            for &f in &add {
                achievers[f].push(i);
            }
            pre_lists.push(pre);
            add_lists.push(add);
        }
        Ff {
            task,
            pre_of,
            pre_lists,
            add_lists,
            achievers,
            goals: task.goal.iter().collect(),
            fact_layer: vec![UNREACHED; n],
            action_layer: vec![UNREACHED; task.actions.len()],
            unsatisfied: vec![0; task.actions.len()],
            selected: vec![false; task.actions.len()],
            marked: vec![false; n],
        }
    }

    /// Relaxed plan length, or `None` when some goal is unreachable even
    /// ignoring deletes.
    pub fn relaxed_plan_length(&mut self, state: &FactSet) -> Option<usize> {
        self.fact_layer.fill(UNREACHED);
        self.action_layer.fill(UNREACHED);
        for (i, pre) in self.pre_lists.iter().enumerate() {
            self.unsatisfied[i] = pre.len() as u32;
        }

        let mut frontier: Vec<usize> = state.iter().collect();
        for &f in &frontier {
            self.fact_layer[f] = 0;
        }
        let mut ready: Vec<usize> = (0..self.pre_lists.len())
            .filter(|&i| self.pre_lists[i].is_empty())
            .collect();
        let mut layer = 0u32;
        let mut goals_left = self.goals.iter().filter(|&&g| self.fact_layer[g] != 0).count();
        loop {
            for &f in &frontier {
                for &a in &self.pre_of[f] {
                    self.unsatisfied[a] -= 1;
                    if self.unsatisfied[a] == 0 {
                        ready.push(a);
                    }
                }
            }
            if goals_left == 0 || ready.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for &a in &ready {
                self.action_layer[a] = layer;
                for &f in &self.add_lists[a] {
                    if self.fact_layer[f] == UNREACHED {
                        self.fact_layer[f] = layer + 1;
                        if self.task.goal.contains(f) {
                            goals_left -= 1;
                        }
                        next.push(f);
                    }
                }
            }
            ready.clear();
            frontier = next;
            layer += 1;
        }
        if goals_left > 0 {
            return None;
        }

        let top = self.goals.iter().map(|&g| self.fact_layer[g]).max().unwrap_or(0) as usize;
        let mut pending: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
        self.selected.fill(false);
        self.marked.fill(false);
        for &g in &self.goals {
            if !self.marked[g] {
                self.marked[g] = true;
                pending[self.fact_layer[g] as usize].push(g);
            }
        }
        let mut count = 0;
        for i in (1..=top).rev() {
            let subgoals = std::mem::take(&mut pending[i]);
            for g in subgoals {
                // lowest-layer achiever, lowest index among ties
                let mut best: Option<usize> = None;
                for &a in &self.achievers[g] {
                    let l = self.action_layer[a];
                    if l == UNREACHED {
                        continue;
                    }
                    if best.is_none_or(|b| l < self.action_layer[b]) {
                        best = Some(a);
                    }
                }
                let a = best.expect("reached fact has an achiever");
                if !self.selected[a] {
                    self.selected[a] = true;
                    count += 1;
                    for &p in &self.pre_lists[a] {
                        if !self.marked[p] && self.fact_layer[p] > 0 {
                            self.marked[p] = true;
                            pending[self.fact_layer[p] as usize].push(p);
                        }
                    }
                }
            }
        }
        Some(count)
    }
}

impl Heuristic for Ff<'_> {
    fn evaluate(&mut self, state: &FactSet) -> f64 {
        self.relaxed_plan_length(state)
            .map_or(f64::INFINITY, |c| c as f64)
    }
}

/// `h_ff` as a one-shot function; `None` is infinity.
pub fn h_ff(task: &StripsTask, state: &FactSet) -> Option<usize> {
    Ff::new(task).relaxed_plan_length(state)
}

/// Learned heuristic: boolean or multivalued encoding, network, clamp at 0.
pub struct NnHeuristic<'a> {
    task: &'a StripsTask,
    model: &'a MlpModel,
    scratch: Scratch,
    input: Vec<(usize, f64)>,
}

impl<'a> NnHeuristic<'a> {
    pub fn new(task: &'a StripsTask, model: &'a MlpModel) -> Result<Self> {
        let fingerprint = task.fingerprint();
        if model.fingerprint != fingerprint {
            return Err(PlanError::FingerprintMismatch {
                model: model.fingerprint,
                task: fingerprint,
            });
        }
        let width = model.layout.width(task);
        if width != model.input_dim() {
            return Err(PlanError::DimensionMismatch {
                expected: model.input_dim(),
                found: width,
            });
        }
        if model.layout == Layout::Multivalued {
            task.multivalued(&task.init)?;
        }
        Ok(NnHeuristic {
            task,
            model,
            scratch: model.scratch(),
            input: Vec::new(),
        })
    }

    pub fn value(&mut self, state: &FactSet) -> f64 {
        self.input.clear();
        match self.model.layout {
            Layout::Boolean => self.input.extend(state.iter().map(|i| (i, 1.0))),
            Layout::Multivalued => {
                for (v, members) in self.task.groups.members.iter().enumerate() {
                    let k = members.iter().position(|&f| state.contains(f)).unwrap_or(0);
                    if k != 0 {
                        self.input.push((v, k as f64));
                    }
                }
            }
        }
        self.model.forward_sparse(&self.input, &mut self.scratch).max(0.0)
    }
}

impl Heuristic for NnHeuristic<'_> {
    fn evaluate(&mut self, state: &FactSet) -> f64 {
        self.value(state)
    }
}

/// Encode, run the network, clamp at zero.
pub fn h_nn_eval(model: &MlpModel, task: &StripsTask, state: &FactSet) -> Result<f64> {
    Ok(NnHeuristic::new(task, model)?.value(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::tests::{action, fs};

    fn chain() -> StripsTask {
        // p=0 -> q=1 -> r=2
        let names: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
        let acts = vec![action(3, "pq", &[0], &[1], &[0]), action(3, "qr", &[1], &[2], &[1])];
        StripsTask::new(names, acts, fs(3, &[0]), fs(3, &[2]))
    }

    #[test]
    fn goal_count_cases() {
        let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let t = StripsTask::new(names, vec![], fs(4, &[]), fs(4, &[0, 1, 2]));
        assert_eq!(h_goalcount(&t, &fs(4, &[0, 1, 2, 3])), 0);
        assert_eq!(h_goalcount(&t, &fs(4, &[0, 2])), 1);
        assert_eq!(h_goalcount(&t, &fs(4, &[])), 3);
    }

    #[test]
    fn ff_cases() {
        let t = chain();
        assert_eq!(h_ff(&t, &fs(3, &[2])), Some(0));
        assert_eq!(h_ff(&t, &fs(3, &[0])), Some(2));
        assert_eq!(h_ff(&t, &fs(3, &[1])), Some(1));
        // r cannot be reached from nothing
        assert_eq!(h_ff(&t, &fs(3, &[])), None);
        assert_eq!(Ff::new(&t).evaluate(&fs(3, &[])), f64::INFINITY);
    }

    #[test]
    fn ff_counts_shared_achiever_once() {
        // a: p -> q, r ; goal {q, r}
        let names: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
        let acts = vec![action(3, "a", &[0], &[1, 2], &[])];
        let t = StripsTask::new(names, acts, fs(3, &[0]), fs(3, &[1, 2]));
        assert_eq!(h_ff(&t, &fs(3, &[0])), Some(1));
    }

    #[test]
    fn nn_zero_model_and_fingerprint() {
        let t = chain();
        let mut m = crate::nn::init_network(3, &[2], &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0));
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        assert!(matches!(h_nn_eval(&m, &t, &fs(3, &[0])), Err(PlanError::FingerprintMismatch { .. })));
        m.fingerprint = t.fingerprint();
        assert_eq!(h_nn_eval(&m, &t, &fs(3, &[0])).unwrap(), 0.0);
    }
}
