//! Seeded instance generators for a few standard domains.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkDomain {
    Npuzzle,
    Pancake,
    Blocks,
    Visitall,
}

impl BenchmarkDomain {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkDomain::Npuzzle => "npuzzle",
            BenchmarkDomain::Pancake => "pancake",
            BenchmarkDomain::Blocks => "blocks",
            BenchmarkDomain::Visitall => "visitall",
        }
    }

    pub fn size_range(self) -> (usize, usize) {
        match self {
            BenchmarkDomain::Npuzzle => (3, 6),
            BenchmarkDomain::Pancake => (3, 14),
            BenchmarkDomain::Blocks => (3, 25),
            BenchmarkDomain::Visitall => (2, 10),
        }
    }
}

impl std::str::FromStr for BenchmarkDomain {
    type Err = PlanError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "npuzzle" => Ok(BenchmarkDomain::Npuzzle),
            "pancake" => Ok(BenchmarkDomain::Pancake),
            "blocks" | "blocksworld" => Ok(BenchmarkDomain::Blocks),
            "visitall" => Ok(BenchmarkDomain::Visitall),
            _ => Err(PlanError::InvalidConfig(format!("unknown benchmark domain {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Benchmark {
    pub domain: BenchmarkDomain,
    pub size: usize,
    pub domain_text: String,
    pub instances: Vec<Instance>,
}

impl Benchmark {
    /// Writes `domain.pddl` and one `<name>.pddl` per instance into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("domain.pddl"), &self.domain_text)?;
        for inst in &self.instances {
            std::fs::write(dir.join(format!("{}.pddl", inst.name)), &inst.problem)?;
        }
        Ok(())
    }
}

pub fn gen_benchmark(domain: BenchmarkDomain, size: usize, count: usize, seed: u64) -> Result<Benchmark> {
    let (lo, hi) = domain.size_range();
    if size < lo || size > hi {
        return Err(PlanError::InvalidConfig(format!(
            "{} size must be in {lo}..={hi}, got {size}",
            domain.name()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain_text = match domain {
        BenchmarkDomain::Npuzzle => NPUZZLE_DOMAIN.to_string(),
        BenchmarkDomain::Pancake => pancake_domain(size),
        BenchmarkDomain::Blocks => BLOCKS_DOMAIN.to_string(),
        BenchmarkDomain::Visitall => VISITALL_DOMAIN.to_string(),
    };
    let instances = (0..count)
        .map(|i| {
            let name = format!("{}-{size}-{i:03}", domain.name());
            let problem = match domain {
                BenchmarkDomain::Npuzzle => {
                    let tiles = npuzzle_scramble(size, 10 * size * size, &mut rng);
                    npuzzle_problem(&name, size, &tiles)
                }
                BenchmarkDomain::Pancake => {
                    let mut perm: Vec<usize> = (0..size).collect();
                    perm.shuffle(&mut rng);
                    pancake_problem(&name, &perm)
                }
                BenchmarkDomain::Blocks => {
                    let init = random_towers(size, &mut rng);
                    let goal = random_towers(size, &mut rng);
                    blocks_problem(&name, &init, &goal)
                }
                BenchmarkDomain::Visitall => visitall_problem(&name, size),
            };
            Instance { name, problem }
        })
        .collect();
    Ok(Benchmark {
        domain,
        size,
        domain_text,
        instances,
    })
}

pub const NPUZZLE_DOMAIN: &str = "\
(define (domain npuzzle)
  (:requirements :strips :typing)
  (:types tile position)
  (:predicates (at ?t - tile ?p - position)
               (blank ?p - position)
               (adj ?p1 ?p2 - position))
  (:action move
    :parameters (?t - tile ?from ?to - position)
    :precondition (and (at ?t ?from) (blank ?to) (adj ?from ?to))
    :effect (and (at ?t ?to) (blank ?from)
                 (not (at ?t ?from)) (not (blank ?to)))))
";

/// Board as `cells[pos] = tile`, tile 0 being the blank. The goal has the
/// blank in the top-left corner and tile `k` in cell `k`.
pub fn npuzzle_scramble<R: Rng + ?Sized>(side: usize, steps: usize, rng: &mut R) -> Vec<usize> {
    let mut cells: Vec<usize> = (0..side * side).collect();
    let mut blank = 0;
    for _ in 0..steps {
        let moves = grid_neighbors(side, blank);
        let next = moves[rng.gen_range(0..moves.len())];
        cells.swap(blank, next);
        blank = next;
    }
    cells
}

pub fn grid_neighbors(side: usize, cell: usize) -> Vec<usize> {
    let (r, c) = (cell / side, cell % side);
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push(cell - side);
    }
    if r + 1 < side {
        out.push(cell + side);
    }
    if c > 0 {
        out.push(cell - 1);
    }
    if c + 1 < side {
        out.push(cell + 1);
    }
    out
}

fn cell_name(side: usize, cell: usize) -> String {
    format!("p{}-{}", cell / side, cell % side)
}

pub fn npuzzle_problem(name: &str, side: usize, cells: &[usize]) -> String {
    let n = side * side;
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name}) (:domain npuzzle)");
    s.push_str("  (:objects");
    for t in 1..n {
        let _ = write!(s, " t{t}");
    }
    s.push_str(" - tile\n   ");
    for p in 0..n {
        let _ = write!(s, " {}", cell_name(side, p));
    }
    s.push_str(" - position)\n  (:init\n");
    for (p, &t) in cells.iter().enumerate() {
        if t == 0 {
            let _ = writeln!(s, "    (blank {})", cell_name(side, p));
        } else {
            let _ = writeln!(s, "    (at t{t} {})", cell_name(side, p));
        }
    }
    for p in 0..n {
        for q in grid_neighbors(side, p) {
            let _ = writeln!(s, "    (adj {} {})", cell_name(side, p), cell_name(side, q));
        }
    }
    s.push_str("  )\n  (:goal (and");
    for t in 1..n {
        let _ = write!(s, " (at t{t} {})", cell_name(side, t));
    }
    s.push_str(")))\n");
    s
}

/// One `flip-k` schema per prefix length `k >= 2`, over position constants.
pub fn pancake_domain(size: usize) -> String {
    let mut s = String::from("(define (domain pancake)\n  (:requirements :strips :typing)\n  (:types pancake position)\n  (:constants");
    for p in 1..=size {
        let _ = write!(s, " pos{p}");
    }
    s.push_str(" - position)\n  (:predicates (at ?x - pancake ?p - position))\n");
    for k in 2..=size {
        let _ = write!(s, "  (:action flip-{k}\n    :parameters (");
        for i in 1..=k {
            let _ = write!(s, "?x{i} ");
        }
        s.push_str("- pancake)\n    :precondition (and");
        for i in 1..=k {
            let _ = write!(s, " (at ?x{i} pos{i})");
        }
        s.push_str(")\n    :effect (and");
        for i in 1..=k {
            let j = k + 1 - i;
            if i != j {
                let _ = write!(s, " (at ?x{i} pos{j}) (not (at ?x{i} pos{i}))");
            }
        }
        s.push_str("))\n");
    }
    s.push_str(")\n");
    s
}

/// `perm[i]` is the pancake at position `i + 1`; pancake `k` belongs at
/// position `k + 1`.
pub fn pancake_problem(name: &str, perm: &[usize]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name}) (:domain pancake)");
    s.push_str("  (:objects");
    for k in 0..perm.len() {
        let _ = write!(s, " c{}", k + 1);
    }
    s.push_str(" - pancake)\n  (:init");
    for (i, &k) in perm.iter().enumerate() {
        let _ = write!(s, " (at c{} pos{})", k + 1, i + 1);
    }
    s.push_str(")\n  (:goal (and");
    for k in 0..perm.len() {
        let _ = write!(s, " (at c{} pos{})", k + 1, k + 1);
    }
    s.push_str(")))\n");
    s
}

pub const BLOCKS_DOMAIN: &str = "\
(define (domain blocksworld)
  (:requirements :strips)
  (:predicates (clear ?x) (ontable ?x) (handempty) (holding ?x) (on ?x ?y))
  (:action pick-up
    :parameters (?x)
    :precondition (and (clear ?x) (ontable ?x) (handempty))
    :effect (and (holding ?x) (not (ontable ?x)) (not (clear ?x)) (not (handempty))))
  (:action put-down
    :parameters (?x)
    :precondition (holding ?x)
    :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
  (:action stack
    :parameters (?x ?y)
    :precondition (and (holding ?x) (clear ?y))
    :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
  (:action unstack
    :parameters (?x ?y)
    :precondition (and (on ?x ?y) (clear ?x) (handempty))
    :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
";

/// Random towers: a shuffled block order cut at random points. Each tower is
/// listed bottom to top.
pub fn random_towers<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut towers = vec![Vec::new()];
    for (i, b) in order.into_iter().enumerate() {
        if i > 0 && rng.gen_bool(0.5) {
            towers.push(Vec::new());
        }
        towers.last_mut().unwrap().push(b);
    }
    towers
}

pub fn blocks_problem(name: &str, init: &[Vec<usize>], goal: &[Vec<usize>]) -> String {
    let n: usize = init.iter().map(Vec::len).sum();
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name}) (:domain blocksworld)");
    s.push_str("  (:objects");
    for b in 0..n {
        let _ = write!(s, " b{b}");
    }
    s.push_str(")\n  (:init (handempty)");
    for tower in init {
        let _ = write!(s, " (ontable b{})", tower[0]);
        for w in tower.windows(2) {
            let _ = write!(s, " (on b{} b{})", w[1], w[0]);
        }
        let _ = write!(s, " (clear b{})", tower[tower.len() - 1]);
    }
    s.push_str(")\n  (:goal (and");
    let mut any_on = false;
    for tower in goal {
        for w in tower.windows(2) {
            any_on = true;
            let _ = write!(s, " (on b{} b{})", w[1], w[0]);
        }
    }
    if !any_on {
        for tower in goal {
            let _ = write!(s, " (ontable b{})", tower[0]);
        }
    }
    s.push_str(")))\n");
    s
}

pub const VISITALL_DOMAIN: &str = "\
(define (domain visitall)
  (:requirements :strips :typing)
  (:types place)
  (:predicates (connected ?x ?y - place) (at-robot ?x - place) (visited ?x - place))
  (:action move
    :parameters (?from ?to - place)
    :precondition (and (at-robot ?from) (connected ?from ?to))
    :effect (and (at-robot ?to) (visited ?to) (not (at-robot ?from)))))
";

/// Square grid, robot starting in the corner, every cell to be visited.
pub fn visitall_problem(name: &str, side: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {name}) (:domain visitall)");
    s.push_str("  (:objects");
    for c in 0..side * side {
        let _ = write!(s, " {}", cell_name(side, c));
    }
    s.push_str(" - place)\n  (:init");
    let _ = write!(s, " (at-robot {0}) (visited {0})", cell_name(side, 0));
    for c in 0..side * side {
        for d in grid_neighbors(side, c) {
            let _ = write!(s, " (connected {} {})", cell_name(side, c), cell_name(side, d));
        }
    }
    s.push_str(")\n  (:goal (and");
    for c in 0..side * side {
        let _ = write!(s, " (visited {})", cell_name(side, c));
    }
    s.push_str(")))\n");
    s
}

/// The same grid task in translator output format: one robot variable plus a
/// binary variable per cell (value 0 = visited).
pub fn visitall_sas(side: usize) -> String {
    let n = side * side;
    let mut s = String::from("begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n");
    let _ = writeln!(s, "{}", n + 1);
    let _ = writeln!(s, "begin_variable\nvar0\n-1\n{n}");
    for c in 0..n {
        let _ = writeln!(s, "Atom at-robot({})", cell_name(side, c));
    }
    s.push_str("end_variable\n");
    for c in 0..n {
        let cell = cell_name(side, c);
        let _ = writeln!(
            s,
            "begin_variable\nvar{}\n-1\n2\nAtom visited({cell})\nNegatedAtom visited({cell})\nend_variable",
            c + 1
        );
    }
    s.push_str("0\nbegin_state\n0\n");
    for c in 0..n {
        let _ = writeln!(s, "{}", if c == 0 { 0 } else { 1 });
    }
    s.push_str("end_state\nbegin_goal\n");
    let _ = writeln!(s, "{n}");
    for c in 0..n {
        let _ = writeln!(s, "{} 0", c + 1);
    }
    s.push_str("end_goal\n");
    let moves: Vec<(usize, usize)> = (0..n)
        .flat_map(|c| grid_neighbors(side, c).into_iter().map(move |d| (c, d)))
        .collect();
    let _ = writeln!(s, "{}", moves.len());
    for (c, d) in moves {
        let _ = writeln!(
            s,
            "begin_operator\nmove {} {}\n0\n2\n0 0 {c} {d}\n0 {} -1 0\n1\nend_operator",
            cell_name(side, c),
            cell_name(side, d),
            d + 1
        );
    }
    s.push_str("0\n");
    s
}

/// Sliding-tile puzzle in translator output format: one variable per cell
/// whose value is the tile on it (value `n - 1` is the blank).
pub fn npuzzle_sas(side: usize, cells: &[usize]) -> String {
    let n = side * side;
    let blank = n - 1;
    let value = |tile: usize| if tile == 0 { blank } else { tile - 1 };
    let mut s = String::from("begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n");
    let _ = writeln!(s, "{n}");
    for p in 0..n {
        let cell = cell_name(side, p);
        let _ = writeln!(s, "begin_variable\nvar{p}\n-1\n{n}");
        for t in 1..n {
            let _ = writeln!(s, "Atom at(t{t}, {cell})");
        }
        let _ = writeln!(s, "Atom blank({cell})\nend_variable");
    }
    s.push_str("0\nbegin_state\n");
    for &t in cells {
        let _ = writeln!(s, "{}", value(t));
    }
    s.push_str("end_state\nbegin_goal\n");
    let _ = writeln!(s, "{}", n - 1);
    for p in 1..n {
        let _ = writeln!(s, "{p} {}", p - 1);
    }
    s.push_str("end_goal\n");
    let _ = writeln!(s, "{}", (n - 1) * (0..n).map(|p| grid_neighbors(side, p).len()).sum::<usize>());
    for t in 0..n - 1 {
        for p in 0..n {
            for q in grid_neighbors(side, p) {
                let _ = writeln!(
                    s,
                    "begin_operator\nmove t{} {} {}\n0\n2\n0 {p} {t} {blank}\n0 {q} {blank} {t}\n1\nend_operator",
                    t + 1,
                    cell_name(side, p),
                    cell_name(side, q)
                );
            }
        }
    }
    s.push_str("0\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::load_task;
    use crate::sas::{read_sas, sas_to_strips};

    #[test]
    fn sizes_are_checked() {
        assert!(gen_benchmark(BenchmarkDomain::Npuzzle, 2, 1, 0).is_err());
        assert!(gen_benchmark(BenchmarkDomain::Pancake, 15, 1, 0).is_err());
        assert!(gen_benchmark(BenchmarkDomain::Blocks, 26, 1, 0).is_err());
    }

    #[test]
    fn generated_files_parse() {
        for (d, size) in [
            (BenchmarkDomain::Npuzzle, 3),
            (BenchmarkDomain::Pancake, 4),
            (BenchmarkDomain::Blocks, 5),
            (BenchmarkDomain::Visitall, 3),
        ] {
            let b = gen_benchmark(d, size, 3, 7).unwrap();
            for inst in &b.instances {
                let t = load_task(&b.domain_text, &inst.problem).unwrap();
                assert!(!t.actions.is_empty(), "{}", inst.name);
            }
        }
    }

    #[test]
    fn same_seed_same_files() {
        let a = gen_benchmark(BenchmarkDomain::Blocks, 6, 4, 11).unwrap();
        let b = gen_benchmark(BenchmarkDomain::Blocks, 6, 4, 11).unwrap();
        assert_eq!(a, b);
        let c = gen_benchmark(BenchmarkDomain::Blocks, 6, 4, 12).unwrap();
        assert_ne!(a.instances, c.instances);
    }

    #[test]
    fn pancake_flip_counts() {
        let b = gen_benchmark(BenchmarkDomain::Pancake, 3, 1, 0).unwrap();
        let t = load_task(&b.domain_text, &b.instances[0].problem).unwrap();
        // flip-2: 3*2 bindings, flip-3: 3*2*1
        assert_eq!(t.actions.len(), 12);
    }

    #[test]
    fn npuzzle_sas_agrees_with_pddl() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cells = npuzzle_scramble(3, 40, &mut rng);
        let sas = sas_to_strips(&read_sas(&npuzzle_sas(3, &cells)).unwrap());
        let pddl = load_task(NPUZZLE_DOMAIN, &npuzzle_problem("x", 3, &cells)).unwrap();
        assert_eq!(sas.actions.len(), 8 * 24);
        let count = |t: &crate::task::StripsTask| t.actions.iter().filter(|a| a.is_applicable(&t.init)).count();
        assert_eq!(count(&sas), count(&pddl));
    }

    #[test]
    fn visitall_sas_matches_pddl_size() {
        let sas = read_sas(&visitall_sas(4)).unwrap();
        assert_eq!(sas.variables.len(), 17);
        let t = sas_to_strips(&sas);
        assert_eq!(t.actions.len(), 48);
        assert_eq!(t.num_facts(), 16 + 32);
        assert!(!t.is_goal(&t.init));
    }
}
