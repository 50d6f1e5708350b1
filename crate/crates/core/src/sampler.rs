//! Training-set generation by repeated backward searches.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backward::{BackwardSpace, SpaceKind};
use crate::error::{PlanError, Result};
use crate::fact_set::FactSet;
use crate::task::{Layout, StateVector, StripsTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchStrategy {
    Dfs,
    RandomWalk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub nsearches: usize,
    pub nsamples: usize,
    pub space: SpaceKind,
    pub strategy: SearchStrategy,
    pub layout: Layout,
    pub seed: u64,
    /// Random-walk restart length; defaults to `nsamples`.
    pub max_walk_length: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            nsearches: 500,
            nsamples: 200,
            space: SpaceKind::Regression,
            strategy: SearchStrategy::Dfs,
            layout: Layout::Boolean,
            seed: 0,
            max_walk_length: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, task: &StripsTask) -> Result<()> {
        if self.nsearches == 0 || self.nsamples == 0 {
            return Err(PlanError::InvalidConfig(
                "nsearches and nsamples must be positive".into(),
            ));
        }
        if self.max_walk_length == Some(0) {
            return Err(PlanError::InvalidConfig("max walk length must be positive".into()));
        }
        if self.layout == Layout::Multivalued {
            if self.space == SpaceKind::Regression {
                return Err(PlanError::UnsupportedEncoding(
                    "regression nodes have no multivalued encoding".into(),
                ));
            }
            if !task.groups.is_finite_domain() {
                return Err(PlanError::UnsupportedEncoding(
                    "multivalued layout needs a finite-domain task".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A backward-search node with the depth or step index it was reached at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeSample {
    pub node: FactSet,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub vector: StateVector,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub samples: Vec<Sample>,
    pub layout: Layout,
    pub width: usize,
    pub fingerprint: u64,
    /// Samples each search produced before duplicate collapsing.
    pub per_search: Vec<usize>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn raw_count(&self) -> usize {
        self.per_search.iter().sum()
    }
}

/// Depth-first backward search. Successors are generated in random order and
/// every node seen for the first time is emitted with its depth; duplicates
/// are pruned, and the search backtracks when a node has nothing new.
pub fn backward_dfs<R: Rng + ?Sized>(
    space: &BackwardSpace,
    start: FactSet,
    nsamples: usize,
    rng: &mut R,
) -> Vec<NodeSample> {
    let mut out = Vec::with_capacity(nsamples);
    if nsamples == 0 {
        return out;
    }
    let mut seen = HashSet::new();
    seen.insert(start.clone());
    out.push(NodeSample {
        node: start.clone(),
        label: 0,
    });
    let mut stack = vec![(start, 0u32)];
    while let Some((node, depth)) = stack.pop() {
        let mut children = Vec::new();
        for child in space.shuffled_successors(&node, rng) {
            if out.len() >= nsamples {
                return out;
            }
            if seen.insert(child.clone()) {
                out.push(NodeSample {
                    node: child.clone(),
                    label: depth + 1,
                });
                children.push(child);
            }
        }
        // first child in shuffled order is expanded next
        stack.extend(children.into_iter().rev().map(|c| (c, depth + 1)));
    }
    out
}

/// Random walk without duplicate detection. Each step emits the new node with
/// its step index; the walk restarts from `start` at dead ends and after
/// `max_len` steps.
pub fn backward_random_walk<R: Rng + ?Sized>(
    space: &BackwardSpace,
    start: FactSet,
    nsamples: usize,
    max_len: usize,
    rng: &mut R,
) -> Vec<NodeSample> {
    let mut out = Vec::with_capacity(nsamples);
    if nsamples == 0 {
        return out;
    }
    out.push(NodeSample {
        node: start.clone(),
        label: 0,
    });
    let mut current = start.clone();
    let mut step = 0u32;
    while out.len() < nsamples {
        let succ = if (step as usize) < max_len {
            space.successors(&current)
        } else {
            Vec::new()
        };
        let Some(next) = succ.choose(rng) else {
            if step == 0 {
                break;
            }
            current = start.clone();
            step = 0;
            continue;
        };
        step += 1;
        current = next.clone();
        out.push(NodeSample {
            node: current.clone(),
            label: step,
        });
    }
    out
}

fn search_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One backward search from a fresh start node.
fn one_search(space: &BackwardSpace, cfg: &SamplerConfig, index: usize) -> Result<Vec<NodeSample>> {
    let mut rng = search_rng(cfg.seed, index);
    let start = space.start(&mut rng)?;
    Ok(match cfg.strategy {
        SearchStrategy::Dfs => backward_dfs(space, start, cfg.nsamples, &mut rng),
        SearchStrategy::RandomWalk => backward_random_walk(
            space,
            start,
            cfg.nsamples,
            cfg.max_walk_length.unwrap_or(cfg.nsamples),
            &mut rng,
        ),
    })
}

/// Runs `nsearches` independent searches and merges them in search order,
/// collapsing repeated (state, label) pairs. Searches not started before
/// `deadline` are skipped.
pub fn generate_training_set(
    task: &StripsTask,
    cfg: &SamplerConfig,
    deadline: Option<Instant>,
) -> Result<TrainingSet> {
    cfg.validate(task)?;
    let space = BackwardSpace::new(task, cfg.space);
    let results: Vec<Option<Result<Vec<NodeSample>>>> = (0..cfg.nsearches)
        .into_par_iter()
        .map(|i| {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return None;
            }
            Some(one_search(&space, cfg, i))
        })
        .collect();

    let mut per_search = Vec::with_capacity(cfg.nsearches);
    let mut first_error = None;
    let mut seen: HashSet<(FactSet, u32)> = HashSet::new();
    let mut samples = Vec::new();
    for r in results.into_iter().flatten() {
        match r {
            Ok(nodes) => {
                per_search.push(nodes.len());
                for s in nodes {
                    if seen.insert((s.node.clone(), s.label)) {
                        samples.push(Sample {
                            vector: space.encode(&s.node, cfg.layout)?,
                            label: s.label,
                        });
                    }
                }
            }
            Err(e) => {
                per_search.push(0);
                first_error.get_or_insert(e);
            }
        }
    }
    if samples.is_empty() {
        return Err(first_error.unwrap_or(PlanError::EmptyTrainingSet));
    }
    Ok(TrainingSet {
        samples,
        layout: cfg.layout,
        width: cfg.layout.width(task),
        fingerprint: task.fingerprint(),
        per_search,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainingSetMeta {
    pub layout: Layout,
    pub width: usize,
    pub samples: usize,
    pub fingerprint: String,
    pub config: SamplerConfig,
}

/// Writes `label,x0,x1,...` rows to `csv_path` and a JSON metadata record
/// next to it (`<csv_path>.meta.json`).
pub fn write_training_set(tset: &TrainingSet, cfg: &SamplerConfig, csv_path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    write!(w, "label")?;
    for i in 0..tset.width {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for s in &tset.samples {
        write!(w, "{}", s.label)?;
        for v in &s.vector.values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    let meta = TrainingSetMeta {
        layout: tset.layout,
        width: tset.width,
        samples: tset.len(),
        fingerprint: format!("{:016x}", tset.fingerprint),
        config: cfg.clone(),
    };
    let mut meta_path = csv_path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    std::fs::write(meta_path, serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?)?;
    Ok(())
}

/// Reads a training set written by [`write_training_set`].
pub fn read_training_set(csv_path: &Path) -> Result<TrainingSet> {
    let mut meta_path = csv_path.as_os_str().to_owned();
    meta_path.push(".meta.json");
    let meta: TrainingSetMeta = serde_json::from_str(&std::fs::read_to_string(meta_path)?)
        .map_err(|e| PlanError::InvalidConfig(format!("training-set metadata: {e}")))?;
    let fingerprint = u64::from_str_radix(&meta.fingerprint, 16)
        .map_err(|e| PlanError::InvalidConfig(format!("training-set fingerprint: {e}")))?;
    let text = std::fs::read_to_string(csv_path)?;
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let bad = || PlanError::InvalidConfig(format!("training-set row {}: malformed", n + 1));
        let mut fields = line.split(',');
        let label: u32 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != meta.width {
            return Err(bad());
        }
        samples.push(Sample {
            vector: StateVector {
                values,
                layout: meta.layout,
            },
            label,
        });
    }
    Ok(TrainingSet {
        per_search: vec![samples.len()],
        samples,
        layout: meta.layout,
        width: meta.width,
        fingerprint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::tests::{action, fs};
    use crate::task::{FactGroups, StripsTask};

    /// Single variable with `n` values; action i moves value i -> next(i).
    fn ring(n: usize, edges: &[(usize, usize)], goal: usize) -> StripsTask {
        let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let acts = edges
            .iter()
            .map(|&(a, b)| action(n, &format!("e{a}{b}"), &[a], &[b], &[a]))
            .collect();
        let mut t = StripsTask::new(names, acts, fs(n, &[0]), fs(n, &[goal]));
        t.groups = FactGroups::variables(vec!["v".into()], vec![(0..n).collect()], n);
        t
    }

    fn labels(samples: &[NodeSample]) -> Vec<(usize, u32)> {
        samples
            .iter()
            .map(|s| (s.node.iter().next().unwrap(), s.label))
            .collect()
    }

    #[test]
    fn dfs_two_node_space() {
        let t = ring(2, &[(0, 1), (1, 0)], 0);
        let space = BackwardSpace::new(&t, SpaceKind::ExplicitInverse);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = space.start(&mut rng).unwrap();
        let out = backward_dfs(&space, start, 10, &mut rng);
        assert_eq!(labels(&out), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn dfs_prunes_cycle() {
        let t = ring(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 0);
        let space = BackwardSpace::new(&t, SpaceKind::ExplicitInverse);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = space.start(&mut rng).unwrap();
        let out = backward_dfs(&space, start, 100, &mut rng);
        assert_eq!(out.len(), 4);
        // inverse of a forward ring walks it backwards
        assert_eq!(labels(&out), vec![(0, 0), (3, 1), (2, 2), (1, 3)]);
    }

    #[test]
    fn random_walk_chain_and_cycle() {
        // forward chain b -> a -> g, walked backwards g -> a -> b
        let t = ring(3, &[(2, 1), (1, 0)], 0);
        let space = BackwardSpace::new(&t, SpaceKind::ExplicitInverse);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = space.start(&mut rng).unwrap();
        let out = backward_random_walk(&space, start, 3, 100, &mut rng);
        assert_eq!(labels(&out), vec![(0, 0), (1, 1), (2, 2)]);

        let t = ring(2, &[(0, 1), (1, 0)], 0);
        let space = BackwardSpace::new(&t, SpaceKind::ExplicitInverse);
        let start = space.start(&mut rng).unwrap();
        let out = backward_random_walk(&space, start, 5, 100, &mut rng);
        assert_eq!(labels(&out), vec![(0, 0), (1, 1), (0, 2), (1, 3), (0, 4)]);
    }

    #[test]
    fn random_walk_restarts_at_dead_end() {
        let t = ring(3, &[(2, 1), (1, 0)], 0);
        let space = BackwardSpace::new(&t, SpaceKind::ExplicitInverse);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = space.start(&mut rng).unwrap();
        let out = backward_random_walk(&space, start, 5, 100, &mut rng);
        assert_eq!(labels(&out), vec![(0, 0), (1, 1), (2, 2), (1, 1), (2, 2)]);
    }

    #[test]
    fn exhaustion_bounds_sample_count() {
        let t = ring(3, &[(2, 1), (1, 0)], 0);
        let cfg = SamplerConfig {
            nsearches: 1,
            nsamples: 50,
            space: SpaceKind::ExplicitInverse,
            ..SamplerConfig::default()
        };
        let ts = generate_training_set(&t, &cfg, None).unwrap();
        assert!(ts.len() <= 3);
    }

    #[test]
    fn deterministic_and_within_budget() {
        let t = ring(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)], 0);
        let cfg = SamplerConfig {
            nsearches: 7,
            nsamples: 4,
            space: SpaceKind::ExplicitInverse,
            seed: 42,
            ..SamplerConfig::default()
        };
        let a = generate_training_set(&t, &cfg, None).unwrap();
        let b = generate_training_set(&t, &cfg, None).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 28);
        assert!(a.raw_count() <= 28);
    }

    #[test]
    fn regression_with_multivalued_layout_rejected() {
        let t = ring(2, &[(0, 1)], 1);
        let cfg = SamplerConfig {
            layout: Layout::Multivalued,
            ..SamplerConfig::default()
        };
        assert!(matches!(
            generate_training_set(&t, &cfg, None),
            Err(PlanError::UnsupportedEncoding(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = ring(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 0);
        let cfg = SamplerConfig {
            nsearches: 2,
            nsamples: 4,
            space: SpaceKind::ExplicitInverse,
            ..SamplerConfig::default()
        };
        let ts = generate_training_set(&t, &cfg, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        write_training_set(&ts, &cfg, &path).unwrap();
        let back = read_training_set(&path).unwrap();
        assert_eq!(back.samples, ts.samples);
        assert_eq!(back.fingerprint, ts.fingerprint);
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("label,x0,x1,x2,x3\n"));
    }
}
