mod common;

use std::collections::{HashSet, VecDeque};

use nnplan::backward::{BackwardSpace, SpaceKind};
use nnplan::experiment::benchmarks::{
    gen_benchmark, npuzzle_problem, npuzzle_sas, BenchmarkDomain, BLOCKS_DOMAIN, NPUZZLE_DOMAIN,
};
use nnplan::nn::{init_network, sparse_input, LossKind};
use nnplan::pddl::{load_task, parse_pddl};
use nnplan::sampler::backward_dfs;
use nnplan::sas::{read_sas, sas_to_strips};
use nnplan::search::{gbfs, h_ff, h_nn_eval, Blind, Budget};
use nnplan::task::{encode_state, successors, Layout, State};
use nnplan::FactSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn identity_board() -> Vec<usize> {
    (0..9).collect()
}

#[test]
fn grounding_counts_match_enumeration() {
    let problem = npuzzle_problem("p", 3, &identity_board());
    let (d, p) = parse_pddl(NPUZZLE_DOMAIN, &problem).unwrap();
    let tiles = p.objects.iter().filter(|o| o.ty == "tile").count();
    let cells = p.objects.iter().filter(|o| o.ty == "position").count();
    assert_eq!((tiles, cells), (8, 9));

    // at(tile, pos), blank(pos), adj(pos, pos)
    let facts = tiles * cells + cells + cells * cells;
    // move(tile, from, to) with from != to
    let mut actions = 0;
    for _t in 0..tiles {
        for from in 0..cells {
            for to in 0..cells {
                if from != to {
                    actions += 1;
                }
            }
        }
    }
    let task = nnplan::pddl::ground(&d, &p).unwrap();
    assert_eq!(task.num_facts(), facts);
    assert_eq!(task.actions.len(), actions);

    let blocks = "(define (problem b3) (:domain blocksworld) (:objects a b c)
        (:init (handempty) (ontable a) (ontable b) (ontable c) (clear a) (clear b) (clear c))
        (:goal (and (on a b))))";
    let task = load_task(BLOCKS_DOMAIN, blocks).unwrap();
    let mut expected = 0;
    for x in 0..3 {
        expected += 2; // pick-up, put-down
        for y in 0..3 {
            if x != y {
                expected += 2; // stack, unstack
            }
        }
    }
    assert_eq!(task.actions.len(), expected);
    assert_eq!(expected, 18);
}

#[test]
fn sas_transitions_survive_conversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cells = nnplan::experiment::benchmarks::npuzzle_scramble(3, 30, &mut rng);
    let sas = read_sas(&npuzzle_sas(3, &cells)).unwrap();
    let task = sas_to_strips(&sas);
    let offsets = sas.fact_offsets();
    for _ in 0..300 {
        let values: Vec<usize> = sas.variables.iter().map(|v| rng.gen_range(0..v.domain_size())).collect();
        let state = task.state_from_values(&values);
        for (op, action) in sas.operators.iter().zip(&task.actions) {
            let applicable = op.transitions.iter().all(|t| t.pre.is_none_or(|p| values[t.var] == p));
            assert_eq!(applicable, action.is_applicable(&state.0), "{}", op.name);
            if applicable {
                let mut next = values.clone();
                for t in &op.transitions {
                    next[t.var] = t.post;
                }
                let expect = FactSet::from_indices(task.num_facts(), next.iter().enumerate().map(|(v, &k)| offsets[v] + k));
                assert_eq!(action.apply_unchecked(&state.0), expect);
            }
        }
    }
}

fn board_of(task: &nnplan::task::StripsTask, state: &FactSet) -> Vec<u8> {
    // fact names look like (at t3 p1-2) / (blank p0-0)
    let mut board = vec![0u8; 9];
    for f in state.iter() {
        let name = &task.fact_names[f];
        let parts: Vec<&str> = name.trim_matches(|c| c == '(' || c == ')').split(' ').collect();
        let cell = |s: &str| {
            let (r, c) = s[1..].split_once('-').unwrap();
            r.parse::<usize>().unwrap() * 3 + c.parse::<usize>().unwrap()
        };
        if parts[0] == "at" {
            board[cell(parts[2])] = parts[1][1..].parse().unwrap();
        }
    }
    board
}

/// Blind GBFS over boards: FIFO, duplicates dropped on generation, goal test
/// when a node is taken off the queue, successors ordered by the moved tile.
fn blind_oracle_expansions(start: &[u8]) -> u64 {
    let goal: Vec<u8> = (0..9).collect();
    let mut seen = HashSet::from([start.to_vec()]);
    let mut queue = VecDeque::from([start.to_vec()]);
    let mut expansions = 0;
    while let Some(b) = queue.pop_front() {
        if b == goal {
            return expansions;
        }
        expansions += 1;
        let blank = b.iter().position(|&t| t == 0).unwrap();
        let mut moves: Vec<(u8, usize)> = nnplan::experiment::benchmarks::grid_neighbors(3, blank)
            .into_iter()
            .map(|q| (b[q], q))
            .collect();
        moves.sort();
        for (_, q) in moves {
            let mut nb = b.clone();
            nb.swap(blank, q);
            if seen.insert(nb.clone()) {
                queue.push_back(nb);
            }
        }
    }
    u64::MAX
}

#[test]
fn blind_gbfs_matches_independent_search() {
    let bench = gen_benchmark(BenchmarkDomain::Npuzzle, 3, 4, 21).unwrap();
    for inst in &bench.instances {
        let task = load_task(&bench.domain_text, &inst.problem).unwrap();
        let r = gbfs(&task, &mut Blind, &Budget::default());
        assert!(r.solved());
        assert_eq!(r.expansions, blind_oracle_expansions(&board_of(&task, &task.init)), "{}", inst.name);
    }
}

#[test]
fn corner_blank_has_two_moves() {
    let task = load_task(NPUZZLE_DOMAIN, &npuzzle_problem("p", 3, &identity_board())).unwrap();
    assert_eq!(successors(&task.initial_state(), &task.actions).len(), 2);
    let mut centre = identity_board();
    centre.swap(0, 4);
    let task = load_task(NPUZZLE_DOMAIN, &npuzzle_problem("p", 3, &centre)).unwrap();
    assert_eq!(successors(&task.initial_state(), &task.actions).len(), 4);
}

#[test]
fn generated_puzzles_are_solvable() {
    let dist = common::puzzle_distances(3);
    assert_eq!(dist.len(), 181_440);
    let bench = gen_benchmark(BenchmarkDomain::Npuzzle, 3, 50, 1).unwrap();
    for inst in &bench.instances {
        let task = load_task(&bench.domain_text, &inst.problem).unwrap();
        assert!(dist.contains_key(&board_of(&task, &task.init)), "{}", inst.name);
    }
    // identity permutations are allowed and already solved
    let pancakes = gen_benchmark(BenchmarkDomain::Pancake, 3, 30, 0).unwrap();
    let trivial = pancakes
        .instances
        .iter()
        .map(|i| load_task(&pancakes.domain_text, &i.problem).unwrap())
        .filter(|t| t.is_goal(&t.init))
        .count();
    assert!(trivial > 0);
}

#[test]
fn ff_against_exhaustive_relaxed_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let task = common::random_task(&mut rng, 8, 6);
        let s = task.init.clone();
        let oracle = common::min_relaxed_plan(&task, &s);
        let h = h_ff(&task, &s);
        match (oracle, h) {
            (None, None) => {}
            (Some(o), Some(h)) => {
                assert!(h >= o, "relaxed plan shorter than optimum");
                assert_eq!(h == 0, task.goal.is_subset(&s));
            }
            other => panic!("reachability disagrees: {other:?}"),
        }
    }
}

#[test]
fn small_gradient_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for kind in [LossKind::RelativeError, LossKind::Mse] {
        let mut checked = 0;
        while checked < 5 {
            let model = init_network(6, &[5], &mut rng);
            let inputs: Vec<Vec<(usize, f64)>> = (0..4)
                .map(|_| sparse_input(&(0..6).map(|_| f64::from(rng.gen_range(0..2u8))).collect::<Vec<_>>()))
                .collect();
            let targets: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_range(0..10u8))).collect();
            if let Some(err) = common::gradient_check(&model, &inputs, &targets, kind, 1e-4) {
                assert!(err < 1e-4, "{kind:?}: {err}");
                checked += 1;
            }
        }
    }
}

#[test]
fn h_nn_is_clamped_forward_of_encoding() {
    let bench = gen_benchmark(BenchmarkDomain::Npuzzle, 3, 3, 4).unwrap();
    let task = load_task(&bench.domain_text, &bench.instances[0].problem).unwrap();
    let mut model = init_network(task.num_facts(), &[8], &mut ChaCha8Rng::seed_from_u64(1));
    model.fingerprint = task.fingerprint();
    for inst in &bench.instances {
        let t = load_task(&bench.domain_text, &inst.problem).unwrap();
        let s = State(t.init.clone());
        let direct = model.forward(&encode_state(&t, &s, Layout::Boolean).unwrap()).unwrap().max(0.0);
        assert_eq!(h_nn_eval(&model, &t, &s.0).unwrap(), direct);
    }
}

#[test]
fn dfs_labels_bound_true_distance_on_small_space() {
    // finite-domain 8-puzzle, where goal completion yields real boards
    let sas = read_sas(&npuzzle_sas(3, &identity_board())).unwrap();
    let task = sas_to_strips(&sas);
    let space = BackwardSpace::new(&task, SpaceKind::ExplicitInverse);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let start = space.start(&mut rng).unwrap();
    let dist = common::bfs_distances(&start, &task.actions);
    let samples = backward_dfs(&space, start, 2000, &mut rng);
    assert!(!samples.is_empty());
    for s in samples {
        assert!(s.label >= dist[&s.node]);
    }
}
