//! Sample, train and search under one time budget, plus the portfolio,
//! benchmark generation and summary tables built on top of it.

pub mod benchmarks;
pub mod report;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::nn::{self, MlpModel, TrainConfig};
use crate::pddl::load_task;
use crate::sampler::{generate_training_set, SamplerConfig};
use crate::sas::{read_sas, sas_to_strips};
use crate::search::{gbfs, Blind, Budget, Ff, GoalCount, Heuristic, HeuristicKind, NnHeuristic, SearchResult, SearchStatus};
use crate::task::{validate_plan, StripsTask};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskSource {
    Pddl { domain: PathBuf, problem: PathBuf },
    Sas { path: PathBuf },
}

impl TaskSource {
    pub fn load(&self) -> Result<StripsTask> {
        match self {
            TaskSource::Pddl { domain, problem } => {
                load_task(&std::fs::read_to_string(domain)?, &std::fs::read_to_string(problem)?)
            }
            TaskSource::Sas { path } => Ok(sas_to_strips(&read_sas(&std::fs::read_to_string(path)?)?)),
        }
    }

    pub fn instance_id(&self) -> String {
        let p = match self {
            TaskSource::Pddl { problem, .. } => problem,
            TaskSource::Sas { path } => path,
        };
        p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    SingleInstance,
    TrainOnly,
    SolveWithModel(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub sampler: SamplerConfig,
    pub train: TrainConfig,
    pub hidden: Vec<usize>,
    pub heuristic: HeuristicKind,
    pub budget: Budget,
    pub mode: Mode,
    /// Every random choice derives from this.
    pub seed: u64,
    pub domain: String,
    pub config_id: String,
    pub model_out: Option<PathBuf>,
    pub plan_out: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sampler: SamplerConfig::default(),
            train: TrainConfig::default(),
            hidden: vec![16],
            heuristic: HeuristicKind::Nn,
            budget: Budget::default(),
            mode: Mode::SingleInstance,
            seed: 0,
            domain: String::new(),
            config_id: "default".into(),
            model_out: None,
            plan_out: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, task: &StripsTask) -> Result<()> {
        self.budget.validate()?;
        if self.heuristic == HeuristicKind::Nn && !matches!(self.mode, Mode::SolveWithModel(_)) {
            self.sampler.validate(task)?;
            self.train.validate()?;
            if self.hidden.contains(&0) {
                return Err(PlanError::InvalidConfig("hidden widths must be positive".into()));
            }
        }
        if self.mode == Mode::TrainOnly && self.heuristic != HeuristicKind::Nn {
            return Err(PlanError::InvalidConfig("train-only mode needs the nn heuristic".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunStatus {
    Solved,
    Unsolvable,
    OutOfBudget,
    Trained,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Solved => "solved",
            RunStatus::Unsolvable => "unsolvable",
            RunStatus::OutOfBudget => "out-of-budget",
            RunStatus::Trained => "trained",
            RunStatus::Failed => "failed",
        }
    }
}

impl From<SearchStatus> for RunStatus {
    fn from(s: SearchStatus) -> Self {
        match s {
            SearchStatus::Solved => RunStatus::Solved,
            SearchStatus::Unsolvable => RunStatus::Unsolvable,
            SearchStatus::OutOfBudget => RunStatus::OutOfBudget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub domain: String,
    pub config: String,
    pub status: RunStatus,
    pub sampling_secs: f64,
    pub training_secs: f64,
    pub search_secs: f64,
    pub expansions: u64,
    pub generated: u64,
    pub evaluations: u64,
    pub plan_length: Option<usize>,
    pub plan: Option<Vec<usize>>,
    pub samples: usize,
    pub final_train_loss: Option<f64>,
    pub final_validation_loss: Option<f64>,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub legs: Vec<RunRecord>,
}

impl RunRecord {
    fn empty(instance: &str, cfg: &PipelineConfig) -> Self {
        RunRecord {
            instance: instance.to_string(),
            domain: cfg.domain.clone(),
            config: cfg.config_id.clone(),
            status: RunStatus::Failed,
            sampling_secs: 0.0,
            training_secs: 0.0,
            search_secs: 0.0,
            expansions: 0,
            generated: 0,
            evaluations: 0,
            plan_length: None,
            plan: None,
            samples: 0,
            final_train_loss: None,
            final_validation_loss: None,
            error: None,
            legs: Vec::new(),
        }
    }

    pub fn total_secs(&self) -> f64 {
        self.sampling_secs + self.training_secs + self.search_secs
    }

    pub fn solved(&self) -> bool {
        self.status == RunStatus::Solved
    }

    fn absorb_search(&mut self, r: &SearchResult) {
        self.status = r.status.into();
        self.search_secs = r.wall_time_secs;
        self.expansions = r.expansions;
        self.generated = r.generated;
        self.evaluations = r.evaluations;
        self.plan_length = r.plan.as_ref().map(|p| p.len());
        self.plan = r.plan.as_ref().map(|p| p.actions.clone());
    }

    fn fail(&mut self, e: &PlanError) {
        self.status = RunStatus::Failed;
        self.error = Some(e.to_string());
    }
}

/// Seeds for sampling, weight initialisation and training.
fn derive_seeds(root: u64) -> (u64, u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    (rng.next_u64(), rng.next_u64(), rng.next_u64())
}

/// What sampling and training produced.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: MlpModel,
    pub samples: usize,
    pub sampling_secs: f64,
    pub training_secs: f64,
    pub report: nn::TrainReport,
}

/// Sampling and training phases. Returns `Ok(None)` when the deadline passes
/// before a model exists.
pub fn train_model(task: &StripsTask, cfg: &PipelineConfig, deadline: Option<Instant>) -> Result<Option<Trained>> {
    let (sample_seed, init_seed, train_seed) = derive_seeds(cfg.seed);
    let sampler = SamplerConfig { seed: sample_seed, ..cfg.sampler.clone() };
    let t0 = Instant::now();
    let tset = match generate_training_set(task, &sampler, deadline) {
        Ok(t) => t,
        Err(PlanError::EmptyTrainingSet) if deadline.is_some_and(|d| Instant::now() >= d) => return Ok(None),
        Err(e) => return Err(e),
    };
    let sampling_secs = t0.elapsed().as_secs_f64();
    if deadline.is_some_and(|d| Instant::now() >= d) {
        return Ok(None);
    }
    let t1 = Instant::now();
    let model = nn::init_network(tset.width, &cfg.hidden, &mut ChaCha8Rng::seed_from_u64(init_seed));
    let train_cfg = TrainConfig { seed: train_seed, ..cfg.train.clone() };
    let (model, report) = nn::train(model, &tset, &train_cfg, deadline)?;
    let training_secs = t1.elapsed().as_secs_f64();
    if report.timed_out {
        return Ok(None);
    }
    Ok(Some(Trained {
        model,
        samples: tset.len(),
        sampling_secs,
        training_secs,
        report,
    }))
}

/// Runs GBFS with a baseline heuristic or a given model.
pub fn solve(task: &StripsTask, kind: HeuristicKind, model: Option<&MlpModel>, budget: &Budget) -> Result<SearchResult> {
    let mut h: Box<dyn Heuristic + '_> = match kind {
        HeuristicKind::Blind => Box::new(Blind),
        HeuristicKind::GoalCount => Box::new(GoalCount { task }),
        HeuristicKind::Ff => Box::new(Ff::new(task)),
        HeuristicKind::Nn => {
            let model = model.ok_or_else(|| PlanError::InvalidConfig("nn heuristic needs a model".into()))?;
            Box::new(NnHeuristic::new(task, model)?)
        }
    };
    let result = gbfs(task, h.as_mut(), budget);
    if let Some(plan) = &result.plan {
        debug_assert!(validate_plan(task, plan).valid);
    }
    Ok(result)
}

fn remaining(deadline: Instant) -> Duration {
    deadline.saturating_duration_since(Instant::now())
}

/// Runs the configured phases on an already loaded task. Errors end up in
/// the record.
pub fn run_pipeline_on(task: &StripsTask, instance: &str, cfg: &PipelineConfig) -> RunRecord {
    let started = Instant::now();
    let deadline = started + cfg.budget.time_limit;
    let mut rec = RunRecord::empty(instance, cfg);
    if let Err(e) = cfg.validate(task) {
        rec.fail(&e);
        return rec;
    }

    let mut model = None;
    if cfg.heuristic == HeuristicKind::Nn {
        match &cfg.mode {
            Mode::SolveWithModel(path) => match std::fs::read(path)
                .map_err(PlanError::from)
                .and_then(|b| nn::deserialize_model(&b))
            {
                Ok(m) => model = Some(m),
                Err(e) => {
                    rec.fail(&e);
                    return rec;
                }
            },
            _ => match train_model(task, cfg, Some(deadline)) {
                Ok(Some(t)) => {
                    rec.sampling_secs = t.sampling_secs;
                    rec.training_secs = t.training_secs;
                    rec.samples = t.samples;
                    rec.final_train_loss = t.report.train_loss.last().copied();
                    rec.final_validation_loss = t.report.validation_loss.last().copied();
                    if let Some(path) = &cfg.model_out {
                        if let Err(e) = std::fs::write(path, nn::serialize_model(&t.model)) {
                            rec.fail(&e.into());
                            return rec;
                        }
                    }
                    model = Some(t.model);
                }
                Ok(None) => {
                    rec.status = RunStatus::OutOfBudget;
                    rec.sampling_secs = started.elapsed().as_secs_f64();
                    return rec;
                }
                Err(e) => {
                    rec.fail(&e);
                    return rec;
                }
            },
        }
    }
    if cfg.mode == Mode::TrainOnly {
        rec.status = RunStatus::Trained;
        return rec;
    }

    let budget = Budget { time_limit: remaining(deadline), ..cfg.budget };
    if budget.time_limit.is_zero() {
        rec.status = RunStatus::OutOfBudget;
        return rec;
    }
    match solve(task, cfg.heuristic, model.as_ref(), &budget) {
        Ok(r) => {
            rec.absorb_search(&r);
            if let (Some(plan), Some(path)) = (&r.plan, &cfg.plan_out) {
                if let Err(e) = std::fs::write(path, plan.to_text(task)) {
                    rec.fail(&e.into());
                }
            }
        }
        Err(e) => rec.fail(&e),
    }
    rec
}

pub fn run_pipeline(source: &TaskSource, cfg: &PipelineConfig) -> RunRecord {
    let id = source.instance_id();
    match source.load() {
        Ok(task) => run_pipeline_on(&task, &id, cfg),
        Err(e) => {
            let mut rec = RunRecord::empty(&id, cfg);
            rec.fail(&e);
            rec
        }
    }
}

/// Regression leg under half the budget, then the explicit-space leg with
/// whatever time is left. The first solution wins.
pub fn run_portfolio(
    task: &StripsTask,
    instance: &str,
    cfg_regression: &PipelineConfig,
    cfg_explicit: &PipelineConfig,
    budget: Duration,
) -> RunRecord {
    let started = Instant::now();
    let first = PipelineConfig {
        budget: Budget { time_limit: budget / 2, ..cfg_regression.budget },
        ..cfg_regression.clone()
    };
    let leg1 = run_pipeline_on(task, instance, &first);
    let mut legs = vec![leg1];
    if !legs[0].solved() {
        let left = budget.saturating_sub(started.elapsed());
        if !left.is_zero() {
            let second = PipelineConfig {
                budget: Budget { time_limit: left, ..cfg_explicit.budget },
                ..cfg_explicit.clone()
            };
            legs.push(run_pipeline_on(task, instance, &second));
        }
    }
    let last = legs.last().unwrap();
    let mut rec = RunRecord {
        config: format!("portfolio({}+{})", cfg_regression.config_id, cfg_explicit.config_id),
        legs: Vec::new(),
        ..last.clone()
    };
    rec.sampling_secs = legs.iter().map(|l| l.sampling_secs).sum();
    rec.training_secs = legs.iter().map(|l| l.training_secs).sum();
    rec.search_secs = legs.iter().map(|l| l.search_secs).sum();
    rec.expansions = legs.iter().map(|l| l.expansions).sum();
    rec.generated = legs.iter().map(|l| l.generated).sum();
    rec.evaluations = legs.iter().map(|l| l.evaluations).sum();
    if !rec.solved() && legs.iter().all(|l| l.status != RunStatus::Failed) {
        rec.status = RunStatus::OutOfBudget;
    }
    rec.legs = legs;
    rec
}
