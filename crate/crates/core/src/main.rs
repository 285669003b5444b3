use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cf_synth::column::{load_task, Column};
use cf_synth::harness::{
    convergence_study, generated_suite, load_task_dir, run_benchmark, study_csv, BenchConfig, NamedTask, Reveal,
    StudyConfig, TaskSpec,
};
use cf_synth::pipeline::{Ablation, Engine, EngineConfig};
use cf_synth::ranking::{train_ranker, TrainConfig};
use cf_synth::rule::Rule;
use cf_synth::service::{self, AppState, Settings};

#[derive(Parser)]
#[command(name = "cf-synth", version, about = "Learn conditional-formatting rules from formatted example cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct EngineArgs {
    /// Engine configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Disable a pipeline component; repeatable.
    #[arg(long, value_parser = parse_ablation)]
    ablate: Vec<Ablation>,
}

impl EngineArgs {
    fn engine(&self) -> Result<Engine> {
        let mut config = match &self.config {
            Some(p) => EngineConfig::load(p)?,
            None => EngineConfig::default(),
        };
        for a in &self.ablate {
            a.apply(&mut config);
        }
        Ok(Engine::new(config)?)
    }
}

#[derive(clap::Args)]
struct SuiteArgs {
    /// Directory of task JSON files; a generated suite when absent.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// First seed of the generated suite.
    #[arg(long, default_value_t = 1000)]
    seed: u64,
    /// Size of the generated suite.
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Generator settings (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl SuiteArgs {
    fn load(&self) -> Result<Vec<NamedTask>> {
        match &self.tasks {
            Some(dir) => Ok(load_task_dir(dir)?),
            None => Ok(generated_suite(self.seed, self.count, &load_spec(self.spec.as_deref())?)?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Examples,
    Unformatted,
}

#[derive(Subcommand)]
enum Command {
    /// Suggest rules for one task.
    Learn {
        #[arg(long)]
        task: PathBuf,
        /// Reveal the first k formatted cells instead of the task's observed list.
        #[arg(long)]
        examples: Option<usize>,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Cell reference used in Excel formulas.
        #[arg(long, default_value = "A1")]
        anchor: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Run the benchmark and write a JSON report.
    Bench {
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Example counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5])]
        examples: Vec<usize>,
        /// Reveal random formatted cells with this seed instead of the first ones.
        #[arg(long)]
        reveal_seed: Option<u64>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Generate synthetic tasks into a directory.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simplify a rule against a task's column.
    Simplify {
        #[arg(long)]
        task: PathBuf,
        /// File holding the rule text.
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Run the HTTP service.
    Serve {
        /// Overrides CF_PORT.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
    /// Convergence study; writes plot-data CSV.
    Study {
        #[arg(long, value_enum, default_value_t = Axis::Examples)]
        axis: Axis,
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Train ranker weights on generated tasks.
    Train {
        #[arg(long, default_value_t = 50_000)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

fn parse_ablation(s: &str) -> Result<Ablation, String> {
    Ablation::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Ablation::ALL.iter().map(|a| a.name()).collect();
        format!("unknown ablation `{s}`; expected one of {}", names.join(", "))
    })
}

fn load_spec(path: Option<&Path>) -> Result<TaskSpec> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| p.display().to_string())?;
            serde_json::from_str(&text).with_context(|| format!("{}: invalid spec", p.display()))
        }
        None => Ok(TaskSpec::default()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| path.display().to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| p.display().to_string()),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Learn {
            task,
            examples,
            top,
            anchor,
            engine,
        } => {
            let mut t = load_task(&read(&task)?)?;
            if let Some(k) = examples {
                t = t.reveal_first(k)?;
            }
            let base = engine.engine()?;
            let mut config = base.config().clone();
            config.top_k = top;
            let outcome = base.with_config(config)?.learn(&t)?;
            let response = service::response_from_outcome(outcome, &anchor);
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&response)?))?;
        }
        Command::Bench {
            suite,
            out,
            examples,
            reveal_seed,
            engine,
        } => {
            let tasks = suite.load()?;
            let config = BenchConfig {
                example_counts: examples,
                reveal: reveal_seed.map_or(Reveal::First, |seed| Reveal::Random { seed }),
            };
            let report = run_benchmark(&tasks, &config, &engine.engine()?)?;
            eprint!("{}", report.summary());
            emit(out.as_deref(), &report.to_json())?;
        }
        Command::Gen { seed, count, spec, out } => {
            let spec = load_spec(spec.as_deref())?;
            std::fs::create_dir_all(&out).with_context(|| out.display().to_string())?;
            for named in generated_suite(seed, count, &spec)? {
                let path = out.join(format!("{}.json", named.id));
                std::fs::write(&path, named.task.to_json()).with_context(|| path.display().to_string())?;
            }
            eprintln!("wrote {count} tasks to {}", out.display());
        }
        Command::Simplify { task, rule, engine } => {
            let column: Column = load_task(&read(&task)?)?.column;
            let rule = Rule::parse(&read(&rule)?)?;
            let simplified = engine.engine()?.simplify(&rule, &column);
            if simplified == rule {
                eprintln!("no simpler equivalent found");
            }
            emit(None, &format!("{simplified}\n"))?;
        }
        Command::Serve { port, host } => {
            let mut settings = Settings::from_env()?;
            if let Some(p) = port {
                settings.port = p;
            }
            let state = AppState::from_settings(&settings)?;
            let addr = SocketAddr::new(host, settings.port);
            tokio::runtime::Runtime::new()?.block_on(service::serve(state, addr))?;
        }
        Command::Study {
            axis,
            suite,
            out,
            engine,
        } => {
            let tasks = suite.load()?;
            let config = match axis {
                Axis::Examples => StudyConfig::examples_axis(),
                Axis::Unformatted => StudyConfig::unformatted_axis(),
            };
            let rows = convergence_study(&tasks, &config, &engine.engine()?)?;
            emit(out.as_deref(), &study_csv(&rows))?;
        }
        Command::Train {
            seed,
            count,
            spec,
            out,
            engine,
        } => {
            let spec = load_spec(spec.as_deref())?;
            let tasks: Vec<_> = generated_suite(seed, count, &spec)?.into_iter().map(|t| t.task).collect();
            let config = engine.engine()?.config().clone();
            let outcome = train_ranker(&tasks, &config, &TrainConfig::default())?;
            if outcome.curve.is_empty() {
                bail!("training data has a single class ({} examples)", outcome.n_examples);
            }
            eprintln!(
                "{} candidates, {} correct, final loss {:.4}",
                outcome.n_examples,
                outcome.n_positive,
                outcome.curve.last().copied().unwrap_or(f64::NAN)
            );
            std::fs::write(&out, outcome.model.to_json()).with_context(|| out.display().to_string())?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
