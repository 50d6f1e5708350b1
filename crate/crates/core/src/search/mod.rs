//! Eager greedy best-first search with FIFO tie-breaking.

mod heuristics;

pub use heuristics::{
    h_ff, h_goalcount, h_nn_eval, Blind, Ff, GoalCount, Heuristic, HeuristicKind, NnHeuristic,
};

use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::task::{Plan, StripsTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchStatus {
    Solved,
    Unsolvable,
    OutOfBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub time_limit: Duration,
    pub memory_limit: usize,
    pub max_expansions: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            time_limit: Duration::from_secs(1800),
            memory_limit: 8 << 30,
            max_expansions: None,
        }
    }
}

impl Budget {
    pub fn with_time(secs: f64) -> Self {
        Budget {
            time_limit: Duration::from_secs_f64(secs.max(0.0)),
            ..Budget::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.memory_limit == 0 || self.max_expansions == Some(0) {
            return Err(PlanError::InvalidConfig("budget limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub plan: Option<Plan>,
    pub expansions: u64,
    pub generated: u64,
    pub evaluations: u64,
    pub wall_time_secs: f64,
    pub peak_open: usize,
    pub peak_closed: usize,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Node {
    parent: u32,
    action: u32,
}

const NO_PARENT: u32 = u32::MAX;
const CHECK_EVERY: u64 = 256;

fn extract_plan(nodes: &[Node], mut id: usize) -> Plan {
    let mut actions = Vec::new();
    while nodes[id].parent != NO_PARENT {
        actions.push(nodes[id].action as usize);
        id = nodes[id].parent as usize;
    }
    actions.reverse();
    Plan { actions }
}

/// Greedy best-first search. Duplicates are detected on generation and the
/// first arrival is kept, so no state is expanded twice. States with infinite
/// heuristic value are dropped.
pub fn gbfs(task: &StripsTask, heuristic: &mut dyn Heuristic, budget: &Budget) -> SearchResult {
    let started = Instant::now();
    let node_bytes = task.init.words().len() * 8 + 64;

    let mut states: Vec<FactSet> = Vec::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashMap<FactSet, u32> = HashMap::new();
    let mut open: BinaryHeap<Reverse<(Key, u64, u32)>> = BinaryHeap::new();
    let mut counter = 0u64;
    let mut expansions = 0u64;
    let mut generated = 1u64;
    let mut evaluations = 1u64;
    let mut peak_open = 0;

    let finish = |status, plan, expansions, generated, evaluations, peak_open, peak_closed| {
        SearchResult {
            status,
            plan,
            expansions,
            generated,
            evaluations,
            wall_time_secs: started.elapsed().as_secs_f64(),
            peak_open,
            peak_closed,
        }
    };

    let h0 = heuristic.evaluate(&task.init);
    states.push(task.init.clone());
    nodes.push(Node { parent: NO_PARENT, action: 0 });
    seen.insert(task.init.clone(), 0);
    if h0.is_finite() {
        open.push(Reverse((Key(h0), counter, 0)));
        counter += 1;
    }

    while let Some(Reverse((_, _, id))) = open.pop() {
        peak_open = peak_open.max(open.len() + 1);
        let id = id as usize;
        if task.is_goal(&states[id]) {
            let plan = extract_plan(&nodes, id);
            return finish(SearchStatus::Solved, Some(plan), expansions, generated, evaluations, peak_open, seen.len());
        }
        if budget.max_expansions.is_some_and(|cap| expansions >= cap) {
            return finish(SearchStatus::OutOfBudget, None, expansions, generated, evaluations, peak_open, seen.len());
        }
        if expansions % CHECK_EVERY == 0
            && (started.elapsed() >= budget.time_limit
                || seen.len().saturating_mul(node_bytes) > budget.memory_limit)
        {
            return finish(SearchStatus::OutOfBudget, None, expansions, generated, evaluations, peak_open, seen.len());
        }
        expansions += 1;

        for (ai, action) in task.actions.iter().enumerate() {
            if !action.is_applicable(&states[id]) {
                continue;
            }
            let succ = action.apply_unchecked(&states[id]);
            generated += 1;
            let new_id = states.len() as u32;
            match seen.entry(succ) {
                Entry::Occupied(_) => continue,
                Entry::Vacant(e) => {
                    let h = heuristic.evaluate(e.key());
                    evaluations += 1;
                    states.push(e.key().clone());
                    e.insert(new_id);
                    nodes.push(Node { parent: id as u32, action: ai as u32 });
                    if h.is_finite() {
                        open.push(Reverse((Key(h), counter, new_id)));
                        counter += 1;
                    }
                }
            }
        }
    }
    finish(SearchStatus::Unsolvable, None, expansions, generated, evaluations, peak_open, seen.len())
}
