use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nnplan::backward::SpaceKind;
use nnplan::experiment::benchmarks::{gen_benchmark, visitall_sas, BenchmarkDomain};
use nnplan::experiment::report::{ablation_pivot, records_csv, render_csv, render_pivot, render_text, summarize};
use nnplan::experiment::{run_pipeline_on, run_portfolio, solve, Mode, PipelineConfig, RunRecord, RunStatus, TaskSource};
use nnplan::nn::{deserialize_model, LossKind, TrainConfig};
use nnplan::sampler::{generate_training_set, write_training_set, SamplerConfig, SearchStrategy};
use nnplan::search::{Budget, HeuristicKind};
use nnplan::task::{Layout, StripsTask};

#[derive(Parser)]
#[command(name = "nnplan", version, about = "Planner with a self-trained neural heuristic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and ground a task, print its size
    Ground {
        #[command(flatten)]
        task: TaskArgs,
        /// Write action names here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a training set as CSV
    Sample {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        opts: PipelineArgs,
    },
    /// Sample and train, write the model file
    Train {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        opts: PipelineArgs,
    },
    /// Run GBFS with a baseline heuristic or a saved model
    Solve {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        opts: PipelineArgs,
    },
    /// Sample, train and search under one time limit
    Pipeline {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        opts: PipelineArgs,
    },
    /// Regression pipeline for half the time, then the explicit-space one
    Portfolio {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        opts: PipelineArgs,
    },
    /// Write generated benchmark instances
    Gen {
        #[arg(value_enum)]
        domain: GenDomain,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the task in translator output format (visitall only)
        #[arg(long)]
        sas: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize run records (JSON lines)
    Report {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Write <out>.csv and <out>.runs.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long, requires = "problem", conflicts_with = "sas")]
    domain: Option<PathBuf>,
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long)]
    sas: Option<PathBuf>,
}

impl TaskArgs {
    fn source(&self) -> anyhow::Result<TaskSource> {
        match (&self.domain, &self.problem, &self.sas) {
            (Some(d), Some(p), None) => Ok(TaskSource::Pddl { domain: d.clone(), problem: p.clone() }),
            (None, None, Some(s)) => Ok(TaskSource::Sas { path: s.clone() }),
            _ => bail!("give either --domain and --problem, or --sas"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    ExplicitOriginal,
    ExplicitInverse,
    Regression,
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkArg {
    Dfs,
    Rw,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Boolean,
    Sas,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Re,
    Mse,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Nn,
    Blind,
    Gc,
    Ff,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenDomain {
    Npuzzle,
    Pancake,
    Blocks,
    Visitall,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value = "regression")]
    space: SpaceArg,
    #[arg(long, value_enum, default_value = "dfs")]
    walk: WalkArg,
    #[arg(long, value_enum, default_value = "boolean")]
    layout: LayoutArg,
    #[arg(long, value_enum, default_value = "re")]
    loss: LossArg,
    #[arg(long, default_value_t = 500)]
    nsearches: usize,
    #[arg(long, default_value_t = 200)]
    nsamples: usize,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    hidden: Vec<usize>,
    #[arg(long, value_enum, default_value = "nn")]
    heuristic: HeuristicArg,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Seconds for all phases together
    #[arg(long, default_value_t = 1800.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 8 << 30)]
    mem_limit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        let space = match self.space {
            SpaceArg::ExplicitOriginal => SpaceKind::ExplicitOriginal,
            SpaceArg::ExplicitInverse => SpaceKind::ExplicitInverse,
            SpaceArg::Regression => SpaceKind::Regression,
        };
        let strategy = match self.walk {
            WalkArg::Dfs => SearchStrategy::Dfs,
            WalkArg::Rw => SearchStrategy::RandomWalk,
        };
        let layout = match self.layout {
            LayoutArg::Boolean => Layout::Boolean,
            LayoutArg::Sas => Layout::Multivalued,
        };
        let loss = match self.loss {
            LossArg::Re => LossKind::RelativeError,
            LossArg::Mse => LossKind::Mse,
        };
        let heuristic = match self.heuristic {
            HeuristicArg::Nn => HeuristicKind::Nn,
            HeuristicArg::Blind => HeuristicKind::Blind,
            HeuristicArg::Gc => HeuristicKind::GoalCount,
            HeuristicArg::Ff => HeuristicKind::Ff,
        };
        let config_id = match heuristic {
            HeuristicKind::Nn => format!(
                "nn-{}-{}-{}-{}",
                self.space.to_possible_value().unwrap().get_name(),
                self.walk.to_possible_value().unwrap().get_name(),
                self.layout.to_possible_value().unwrap().get_name(),
                self.loss.to_possible_value().unwrap().get_name()
            ),
            _ => self.heuristic.to_possible_value().unwrap().get_name().to_string(),
        };
        PipelineConfig {
            sampler: SamplerConfig {
                nsearches: self.nsearches,
                nsamples: self.nsamples,
                space,
                strategy,
                layout,
                seed: self.seed,
                max_walk_length: None,
            },
            train: TrainConfig { loss, ..TrainConfig::default() },
            hidden: self.hidden.clone(),
            heuristic,
            budget: Budget {
                time_limit: Duration::from_secs_f64(self.time_limit.max(0.0)),
                memory_limit: self.mem_limit,
                max_expansions: None,
            },
            mode: match &self.model {
                Some(p) => Mode::SolveWithModel(p.clone()),
                None => Mode::SingleInstance,
            },
            seed: self.seed,
            domain: String::new(),
            config_id,
            model_out: None,
            plan_out: None,
        }
    }
}

fn load(task: &TaskArgs) -> anyhow::Result<(TaskSource, StripsTask)> {
    let source = task.source()?;
    let t = source.load().with_context(|| format!("loading {}", source.instance_id()))?;
    Ok((source, t))
}

fn print_record(rec: &RunRecord, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let line = serde_json::to_string(rec)?;
    match out {
        Some(p) => {
            let mut f = std::fs::OpenOptions::new().create(true).append(true).open(p)?;
            writeln!(f, "{line}")?;
        }
        None => println!("{line}"),
    }
    eprintln!(
        "{}: {} expansions={} time={:.2}s",
        rec.instance,
        rec.status.as_str(),
        rec.expansions,
        rec.total_secs()
    );
    if let Some(e) = &rec.error {
        eprintln!("error: {e}");
    }
    Ok(())
}

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Solved | RunStatus::Trained => 0,
        RunStatus::Unsolvable | RunStatus::OutOfBudget => 1,
        RunStatus::Failed => 3,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Ground { task, out } => {
            let (_, t) = load(&task)?;
            println!("facts {}", t.num_facts());
            println!("actions {}", t.actions.len());
            println!("init {}", t.describe(&t.init));
            println!("goal {}", t.describe(&t.goal));
            if let Some(p) = out {
                let names: Vec<&str> = t.actions.iter().map(|a| a.name.as_str()).collect();
                std::fs::write(p, names.join("\n") + "\n")?;
            }
            Ok(0)
        }
        Command::Sample { task, opts } => {
            let (_, t) = load(&task)?;
            let cfg = opts.config();
            let out = opts.out.context("--out is required")?;
            let tset = generate_training_set(&t, &cfg.sampler, None)?;
            write_training_set(&tset, &cfg.sampler, &out)?;
            eprintln!("{} samples from {} searches", tset.len(), tset.per_search.len());
            Ok(0)
        }
        Command::Train { task, opts } => {
            let (source, t) = load(&task)?;
            let cfg = PipelineConfig {
                mode: Mode::TrainOnly,
                model_out: Some(opts.out.clone().context("--out is required")?),
                ..opts.config()
            };
            let rec = run_pipeline_on(&t, &source.instance_id(), &cfg);
            print_record(&rec, None)?;
            Ok(status_code(rec.status))
        }
        Command::Solve { task, opts } => {
            let (source, t) = load(&task)?;
            let cfg = opts.config();
            let model = match (&cfg.heuristic, &opts.model) {
                (HeuristicKind::Nn, Some(p)) => Some(deserialize_model(&std::fs::read(p)?)?),
                (HeuristicKind::Nn, None) => bail!("--heuristic nn needs --model"),
                _ => None,
            };
            let r = solve(&t, cfg.heuristic, model.as_ref(), &cfg.budget)?;
            eprintln!(
                "{}: {:?} expansions={} generated={} evaluations={} time={:.2}s",
                source.instance_id(),
                r.status,
                r.expansions,
                r.generated,
                r.evaluations,
                r.wall_time_secs
            );
            if let Some(plan) = &r.plan {
                let text = plan.to_text(&t);
                match &opts.out {
                    Some(p) => std::fs::write(p, text)?,
                    None => print!("{text}"),
                }
            }
            Ok(status_code(r.status.into()))
        }
        Command::Pipeline { task, opts } => {
            let (source, t) = load(&task)?;
            let cfg = opts.config();
            let rec = run_pipeline_on(&t, &source.instance_id(), &cfg);
            print_record(&rec, opts.out.as_ref())?;
            Ok(status_code(rec.status))
        }
        Command::Portfolio { task, opts } => {
            let (source, t) = load(&task)?;
            let mut reg = opts.config();
            reg.sampler.space = SpaceKind::Regression;
            reg.config_id = "regression".into();
            let mut exp = opts.config();
            exp.sampler.space = SpaceKind::ExplicitInverse;
            exp.config_id = "explicit-inverse".into();
            let budget = reg.budget.time_limit;
            let rec = run_portfolio(&t, &source.instance_id(), &reg, &exp, budget);
            print_record(&rec, opts.out.as_ref())?;
            Ok(status_code(rec.status))
        }
        Command::Gen { domain, size, count, seed, sas, out } => {
            let d = match domain {
                GenDomain::Npuzzle => BenchmarkDomain::Npuzzle,
                GenDomain::Pancake => BenchmarkDomain::Pancake,
                GenDomain::Blocks => BenchmarkDomain::Blocks,
                GenDomain::Visitall => BenchmarkDomain::Visitall,
            };
            let b = gen_benchmark(d, size, count, seed)?;
            b.write_to(&out)?;
            if sas {
                if d != BenchmarkDomain::Visitall {
                    bail!("--sas is only available for visitall");
                }
                std::fs::write(out.join(format!("visitall-{size}.sas")), visitall_sas(size))?;
            }
            eprintln!("wrote {} instances to {}", b.instances.len(), out.display());
            Ok(0)
        }
        Command::Report { records, out } => {
            let mut all = Vec::new();
            for p in &records {
                let text = std::fs::read_to_string(p).with_context(|| p.display().to_string())?;
                for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                    let rec: RunRecord = serde_json::from_str(line)
                        .with_context(|| format!("{}:{}", p.display(), n + 1))?;
                    all.push(rec);
                }
            }
            if all.is_empty() {
                bail!("no run records found");
            }
            let groups = summarize(&all);
            print!("{}", render_text(&groups));
            let pivot = ablation_pivot(&groups);
            if !pivot.is_empty() && !pivot[0].1.is_empty() {
                println!();
                print!("{}", render_pivot(&pivot));
            }
            if let Some(o) = out {
                std::fs::write(o.with_extension("csv"), render_csv(&groups))?;
                std::fs::write(o.with_extension("runs.csv"), records_csv(&all))?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| {
                matches!(c.downcast_ref::<nnplan::PlanError>(), Some(nnplan::PlanError::InvalidConfig(_)))
            }) || e.to_string().starts_with("give either") || e.to_string().contains("is required");
            ExitCode::from(if usage { 2 } else { 3 })
        }
    }
}
