#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use nnplan::nn::{LossKind, MlpModel};
use nnplan::task::{Action, Direction, StripsTask};
use nnplan::FactSet;
use rand::seq::SliceRandom;
use rand::Rng;

/// Distances to the goal of every reachable 8-puzzle board, by breadth-first
/// search over permutations (cells[pos] = tile, 0 is the blank).
pub fn puzzle_distances(side: usize) -> HashMap<Vec<u8>, u32> {
    let goal: Vec<u8> = (0..(side * side) as u8).collect();
    let mut dist = HashMap::new();
    dist.insert(goal.clone(), 0);
    let mut queue = VecDeque::from([goal]);
    while let Some(b) = queue.pop_front() {
        let d = dist[&b];
        let blank = b.iter().position(|&t| t == 0).unwrap();
        let (r, c) = (blank / side, blank % side);
        let mut nbrs = Vec::new();
        if r > 0 {
            nbrs.push(blank - side);
        }
        if r + 1 < side {
            nbrs.push(blank + side);
        }
        if c > 0 {
            nbrs.push(blank - 1);
        }
        if c + 1 < side {
            nbrs.push(blank + 1);
        }
        for q in nbrs {
            let mut nb = b.clone();
            nb.swap(blank, q);
            if !dist.contains_key(&nb) {
                dist.insert(nb.clone(), d + 1);
                queue.push_back(nb);
            }
        }
    }
    dist
}

/// Breadth-first distances from `start` over a task's forward actions.
pub fn bfs_distances(start: &FactSet, actions: &[Action]) -> HashMap<FactSet, u32> {
    let mut dist = HashMap::new();
    dist.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        for a in actions {
            if a.is_applicable(&s) {
                let t = a.apply_unchecked(&s);
                if !dist.contains_key(&t) {
                    dist.insert(t.clone(), d + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    dist
}

/// Size of the smallest action set whose delete relaxation reaches the goal,
/// by trying every subset. `None` if even all actions together fail.
pub fn min_relaxed_plan(task: &StripsTask, state: &FactSet) -> Option<usize> {
    let n = task.actions.len();
    assert!(n <= 16);
    let reaches = |mask: u32| {
        let mut s = state.clone();
        loop {
            let mut changed = false;
            for (i, a) in task.actions.iter().enumerate() {
                if mask & (1 << i) != 0 && a.pre.is_subset(&s) && !a.add.is_subset(&s) {
                    s.union_with(&a.add);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        task.goal.is_subset(&s)
    };
    (0u32..1 << n)
        .filter(|&m| reaches(m))
        .map(|m| m.count_ones() as usize)
        .min()
}

fn random_subset<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// Random STRIPS task with add ∩ del = ∅ for every action.
pub fn random_task<R: Rng>(rng: &mut R, max_facts: usize, max_actions: usize) -> StripsTask {
    let nf = rng.gen_range(2..=max_facts);
    let na = rng.gen_range(1..=max_actions);
    let names: Vec<String> = (0..nf).map(|i| format!("f{i}")).collect();
    let actions = (0..na)
        .map(|i| {
            let k = rng.gen_range(0..=3.min(nf));
            let pre = random_subset(rng, nf, k);
            let k = rng.gen_range(1..=3.min(nf));
            let add = random_subset(rng, nf, k);
            let del: Vec<usize> = (0..nf)
                .filter(|f| !add.contains(f) && rng.gen_bool(0.25))
                .collect();
            Action {
                name: format!("a{i}"),
                pre: FactSet::from_indices(nf, pre),
                add: FactSet::from_indices(nf, add.iter().copied()),
                del: FactSet::from_indices(nf, del),
                direction: Direction::Forward,
            }
        })
        .collect();
    let init = FactSet::from_indices(nf, (0..nf).filter(|_| rng.gen_bool(0.3)));
    let k = rng.gen_range(1..=3.min(nf));
    let goal = FactSet::from_indices(nf, random_subset(rng, nf, k));
    StripsTask::new(names, actions, init, goal)
}

/// Largest relative difference between analytic and central-difference
/// gradients. Returns `None` when some ReLU pre-activation lies too close to
/// its kink for finite differences to be meaningful.
pub fn gradient_check(model: &MlpModel, inputs: &[Vec<(usize, f64)>], targets: &[f64], kind: LossKind, eps: f64) -> Option<f64> {
    if near_kink(model, inputs, targets, kind, 10.0 * eps) {
        return None;
    }
    let refs: Vec<&[(usize, f64)]> = inputs.iter().map(Vec::as_slice).collect();
    let (_, grads) = model.gradient(&refs, targets, kind);
    let analytic = grads.flat();
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    let mut idx = 0;
    for l in 0..model.layers.len() {
        let nw = model.layers[l].weights.len();
        let nb = model.layers[l].biases.len();
        for k in 0..nw + nb {
            let orig = *param(&mut probe, l, k);
            *param(&mut probe, l, k) = orig + eps;
            let up = probe.gradient(&refs, targets, kind).0;
            *param(&mut probe, l, k) = orig - eps;
            let down = probe.gradient(&refs, targets, kind).0;
            *param(&mut probe, l, k) = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[idx];
            let scale = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / scale);
            idx += 1;
        }
    }
    Some(worst)
}

fn param(m: &mut MlpModel, l: usize, k: usize) -> &mut f64 {
    let nw = m.layers[l].weights.len();
    if k < nw {
        &mut m.layers[l].weights[k]
    } else {
        &mut m.layers[l].biases[k - nw]
    }
}

fn near_kink(model: &MlpModel, inputs: &[Vec<(usize, f64)>], targets: &[f64], kind: LossKind, margin: f64) -> bool {
    for (input, &y) in inputs.iter().zip(targets) {
        let mut act: Vec<f64> = {
            let mut x = vec![0.0; model.input_dim()];
            for &(j, v) in input {
                x[j] = v;
            }
            x
        };
        for (l, layer) in model.layers.iter().enumerate() {
            let mut z = layer.biases.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                for (w, a) in layer.weights[o * layer.inputs..(o + 1) * layer.inputs].iter().zip(&act) {
                    *zo += w * a;
                }
            }
            let last = l + 1 == model.layers.len();
            if last {
                if kind == LossKind::RelativeError && (z[0] - y).abs() < margin {
                    return true;
                }
            } else {
                if z.iter().any(|v| v.abs() < margin) {
                    return true;
                }
                act = z.into_iter().map(|v| v.max(0.0)).collect();
            }
        }
    }
    false
}
