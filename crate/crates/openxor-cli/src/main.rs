//! `openxor`: one binary wiring the whole pipeline — generate, solve, train,
//! infer, eval, validate, prompt, grade, submit, fixpoint.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error. Data goes to the
//! paths named in flags (or stdout); logs and the reproducibility header go
//! to stderr.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use openxor::bridge::{
    classify, instance_confirmed_satisfiable, render_prompt, submit, EndpointConfig, FailureClass,
    Transcript, TranscriptSource,
};
use openxor::eval::{
    default_validator_n, score, validate_beam_bound, validate_density, validate_random_bound,
    EvalReport,
};
use openxor::gen::{generate_dataset, generate_instance, GenConfig};
use openxor::jsonl::{
    file_sha256, read_instances, read_results, write_atomic, write_instances, write_results,
    ResultRow,
};
use openxor::model::Instance;
use openxor::policy::{
    infer, load_params, save_params, solver_teacher, train, InferMode, Teacher, TrainConfig,
};
use openxor::rng::Xoshiro256;
use openxor::solvers::{
    solve_backtracking, solve_beam, solve_greedy, solve_random, solve_segments, BeamConfig,
    SolveOutcome, DEFAULT_MAX_STEPS,
};

const VERSION_LINE: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (dataset openxor.jsonl.v1, model olm.v1)"
);

#[derive(Parser)]
#[command(name = "openxor", version = VERSION_LINE, about = "OpenXOR benchmark workbench")]
struct Cli {
    /// Parallelism ceiling for instance-parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Suppress the reproducibility header and progress logs.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a guaranteed-satisfiable dataset.
    Generate(GenerateArgs),
    /// Solve a dataset with one method, writing result JSONL.
    Solve(SolveArgs),
    /// Train the operator policy on a ground-truth dataset.
    Train(TrainArgs),
    /// Run a trained policy over a dataset, writing result JSONL.
    Infer(InferArgs),
    /// Score results against a dataset and write report tables.
    Eval(EvalArgs),
    /// Monte Carlo / enumeration validation of the search bounds.
    Validate(ValidateArgs),
    /// Render challenge prompts, one text file per instance.
    Prompt(PromptArgs),
    /// Grade transcript files: classify failures, score valid attempts.
    Grade(GradeArgs),
    /// Submit prompts to an OpenAI-compatible chat endpoint.
    Submit(SubmitArgs),
    /// Fixed-point operator demos.
    Fixpoint(FixpointArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    density: f64,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    few_shot_n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Backtrack,
    Random,
    Greedy,
    Beam,
    Segments,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    beam_size: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TeacherArg {
    /// Re-label with segment-solver solutions (default).
    Segments,
    /// Re-label with backtracking solutions.
    Backtrack,
    /// Train on the ground truth already in the dataset.
    Dataset,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.01)]
    wd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Source of the supervision sequences.
    #[arg(long, value_enum, default_value_t = TeacherArg::Segments)]
    teacher: TeacherArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Greedy,
    Sample,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Greedy)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra sampled rollouts per instance in sample mode.
    #[arg(long, default_value_t = 0)]
    retries: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    results: PathBuf,
    /// Method label for the report row.
    #[arg(long, default_value = "results")]
    method: String,
    /// Output paths; extension selects the format (.md or .csv).
    #[arg(long, required = true)]
    out: Vec<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Law {
    Random,
    Beam,
    Density,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    law: Law,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 4)]
    beam_size: usize,
    /// Instance length; defaults to a spacing-preserving multiple of k.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PromptArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving one `<id>.txt` per instance.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    transcripts: PathBuf,
    #[arg(long, required = true)]
    out: Vec<PathBuf>,
}

#[derive(Args)]
struct SubmitArgs {
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving one `<id>.txt` transcript per instance.
    #[arg(long)]
    out: PathBuf,
    /// Submit only the first N instances.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Demo {
    Stairs,
    Bellman,
    Bfs,
}

#[derive(Args)]
struct FixpointArgs {
    #[arg(long, value_enum)]
    demo: Demo,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    source: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn header(quiet: bool, what: &str) {
    if !quiet {
        eprintln!("openxor {VERSION_LINE} | {what}");
    }
}

fn fingerprint(path: &Path) -> String {
    match file_sha256(path) {
        Ok(hash) => format!("{} sha256:{}", path.display(), &hash[..16]),
        Err(_) => format!("{} (unhashed)", path.display()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Generate(args) => {
            header(
                quiet,
                &format!(
                    "generate n={} density={} count={} seed={}",
                    args.n, args.density, args.count, args.seed
                ),
            );
            if args.n < 1 {
                bail!("--n must be at least 1");
            }
            if !(args.density > 0.0 && args.density <= 1.0) {
                bail!("--density must lie in (0, 1]");
            }
            if !(1..=16).contains(&args.few_shot_n) {
                bail!("--few-shot-n must lie in [1, 16]");
            }
            let mut config = GenConfig::new(args.n, args.density, args.seed, args.count);
            config.few_shot_n = args.few_shot_n;
            let dataset = generate_dataset(&config);
            write_instances(&args.out, &dataset.instances)?;
            if !quiet {
                eprintln!(
                    "wrote {} instances (k={}) to {}",
                    dataset.instances.len(),
                    config.k(),
                    args.out.display()
                );
            }
        }
        Command::Solve(args) => {
            let method_name = match args.method {
                Method::Backtrack => "backtrack",
                Method::Random => "random",
                Method::Greedy => "greedy",
                Method::Beam => "beam",
                Method::Segments => "segments",
            };
            header(
                quiet,
                &format!(
                    "solve method={method_name} seed={} beam={} max-steps={} input={}",
                    args.seed,
                    args.beam_size,
                    args.max_steps,
                    fingerprint(&args.input)
                ),
            );
            if args.beam_size < 1 {
                bail!("--beam-size must be at least 1");
            }
            if args.max_steps < 1 {
                bail!("--max-steps must be at least 1");
            }
            let instances = read_instances(&args.input)?;
            let rows: Vec<ResultRow> = instances
                .par_iter()
                .enumerate()
                .map(|(i, inst)| {
                    let outcome = match args.method {
                        Method::Backtrack => solve_backtracking(inst, args.max_steps),
                        Method::Random => {
                            let mut rng = Xoshiro256::child(args.seed, i as u64);
                            solve_random(inst, &mut rng)
                        }
                        Method::Greedy => solve_greedy(inst),
                        Method::Beam => solve_beam(inst, &BeamConfig::new(args.beam_size)),
                        Method::Segments => solve_segments(inst),
                    };
                    row_from_outcome(inst, outcome)
                })
                .collect();
            write_results(&args.out, &rows)?;
            if !quiet {
                let solved = rows
                    .iter()
                    .filter(|r| r.status == openxor::solvers::Status::Solved)
                    .count();
                eprintln!("solved {solved}/{} -> {}", rows.len(), args.out.display());
            }
        }
        Command::Train(args) => {
            header(
                quiet,
                &format!("train data={} seed={}", fingerprint(&args.data), args.seed),
            );
            if args.epochs < 1 {
                bail!("--epochs must be at least 1");
            }
            if !(args.lr > 0.0) {
                bail!("--lr must be positive");
            }
            let mut instances = read_instances(&args.data)?;
            let teacher = match args.teacher {
                TeacherArg::Segments => Teacher::Segments,
                TeacherArg::Backtrack => Teacher::Backtracking,
                TeacherArg::Dataset => Teacher::Dataset,
            };
            solver_teacher(&mut instances, teacher)?;
            let config = TrainConfig {
                epochs: args.epochs,
                learning_rate: args.lr,
                weight_decay: args.wd,
                seed: args.seed,
            };
            let (params, report) = train(&instances, &config)?;
            save_params(&args.out, &params)?;
            if !quiet {
                for (epoch, loss) in report.epoch_losses.iter().enumerate() {
                    eprintln!("epoch {} mean loss {loss:.6} nats/step", epoch + 1);
                }
                eprintln!("model -> {}", args.out.display());
            }
        }
        Command::Infer(args) => {
            header(
                quiet,
                &format!(
                    "infer model={} seed={} input={}",
                    args.model.display(),
                    args.seed,
                    fingerprint(&args.input)
                ),
            );
            let params = load_params(&args.model)?;
            let instances = read_instances(&args.input)?;
            let rows: Vec<ResultRow> = instances
                .par_iter()
                .enumerate()
                .map(|(i, inst)| {
                    let mode = match args.mode {
                        Mode::Greedy => InferMode::Greedy,
                        Mode::Sample => InferMode::Sample {
                            seed: openxor::rng::child_seed(args.seed, i as u64),
                            retries: args.retries,
                        },
                    };
                    row_from_outcome(inst, infer(&params, inst, mode))
                })
                .collect();
            write_results(&args.out, &rows)?;
        }
        Command::Eval(args) => {
            header(quiet, &format!("eval data={}", fingerprint(&args.data)));
            let instances = read_instances(&args.data)?;
            let rows = read_results(&args.results)?;
            let metrics = score(&instances, &rows)?;
            let mut report = EvalReport::new(fingerprint(&args.data));
            report.push(&args.method, metrics);
            write_report(&report, &args.out)?;
        }
        Command::Validate(args) => {
            header(
                quiet,
                &format!(
                    "validate k={} trials={} seed={}",
                    args.k, args.trials, args.seed
                ),
            );
            match args.law {
                Law::Random => {
                    let n = args.n.unwrap_or_else(|| default_validator_n(args.k));
                    let report = validate_random_bound(args.k, args.trials, n, args.seed);
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    if !report.pass {
                        bail!("measured rate exceeds the bound beyond slack");
                    }
                }
                Law::Beam => {
                    let n = args.n.unwrap_or_else(|| default_validator_n(args.k));
                    let report =
                        validate_beam_bound(args.beam_size, args.k, args.trials, n, args.seed);
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    if !report.pass {
                        bail!("measured rate exceeds the bound beyond slack");
                    }
                }
                Law::Density => {
                    let n = args.n.unwrap_or(12);
                    if n > 20 {
                        bail!("--n must be at most 20 for exhaustive enumeration");
                    }
                    let config = GenConfig::new(n, args.k as f64 / n as f64, args.seed, 1);
                    let inst = generate_instance(&config, 0);
                    let report = validate_density(&inst);
                    println!("{}", serde_json::to_string_pretty(&report)?);
                }
            }
        }
        Command::Prompt(args) => {
            header(quiet, &format!("prompt input={}", fingerprint(&args.input)));
            let instances = read_instances(&args.input)?;
            std::fs::create_dir_all(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            for inst in &instances {
                let prompt = render_prompt(inst)?;
                let path = args.out.join(format!("{}.txt", inst.id));
                write_atomic(&path, prompt.as_bytes())?;
            }
            if !quiet {
                eprintln!(
                    "wrote {} prompts to {}",
                    instances.len(),
                    args.out.display()
                );
            }
        }
        Command::Grade(args) => {
            header(quiet, &format!("grade input={}", fingerprint(&args.input)));
            let instances = read_instances(&args.input)?;
            let graded: Vec<(Transcript, FailureClass, Option<ResultRow>)> = instances
                .par_iter()
                .map(|inst| -> Result<_> {
                    let path = args.transcripts.join(format!("{}.txt", inst.id));
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading transcript {}", path.display()))?;
                    let transcript = Transcript {
                        instance_id: inst.id.clone(),
                        text,
                        source: TranscriptSource::File,
                        token_limit: None,
                    };
                    let satisfiable = instance_confirmed_satisfiable(inst);
                    let classified = classify(&transcript, inst.n(), satisfiable);
                    let row = openxor::bridge::parse_response(&transcript.text, inst.n())
                        .ok()
                        .map(|ops| ResultRow {
                            id: inst.id.clone(),
                            status: openxor::solvers::Status::Exhausted,
                            ops: Some(ops),
                            nodes: 1,
                            time_s: 0.0,
                        });
                    Ok((transcript, classified.class, row))
                })
                .collect::<Result<_>>()?;

            let mut histogram: Vec<(String, usize)> = Vec::new();
            for class in [
                FailureClass::Refusal,
                FailureClass::LengthLimit,
                FailureClass::ConstraintHallucination,
                FailureClass::FormatError,
                FailureClass::ValidAttempt,
            ] {
                let count = graded.iter().filter(|(_, c, _)| *c == class).count();
                histogram.push((class.label().to_string(), count));
            }
            // incomplete attempts become empty rows so score() sees every id
            let rows: Vec<ResultRow> = graded
                .iter()
                .map(|(t, _, row)| {
                    row.clone().unwrap_or(ResultRow {
                        id: t.instance_id.clone(),
                        status: openxor::solvers::Status::Exhausted,
                        ops: None,
                        nodes: 1,
                        time_s: 0.0,
                    })
                })
                .collect();
            let metrics = score(&instances, &rows)?;
            let mut report = EvalReport::new(fingerprint(&args.input));
            report.push("transcripts", metrics);
            report.failure_histogram = histogram;
            write_report(&report, &args.out)?;
        }
        Command::Submit(args) => {
            header(
                quiet,
                &format!("submit endpoint={} model={}", args.endpoint, args.model),
            );
            let mut instances = read_instances(&args.input)?;
            if let Some(limit) = args.limit {
                instances.truncate(limit);
            }
            std::fs::create_dir_all(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            let config = EndpointConfig::new(args.endpoint.clone(), args.model.clone());
            let results: Vec<Result<()>> = instances
                .par_iter()
                .map(|inst| -> Result<()> {
                    let transcript = submit(inst, &config)?;
                    let path = args.out.join(format!("{}.txt", inst.id));
                    write_atomic(&path, transcript.text.as_bytes())?;
                    Ok(())
                })
                .collect();
            let failures: Vec<String> = results
                .iter()
                .zip(&instances)
                .filter_map(|(r, inst)| r.as_ref().err().map(|e| format!("{}: {e:#}", inst.id)))
                .collect();
            if !failures.is_empty() {
                bail!(
                    "{} submissions failed:\n{}",
                    failures.len(),
                    failures.join("\n")
                );
            }
        }
        Command::Fixpoint(args) => {
            header(quiet, "fixpoint demo");
            match args.demo {
                Demo::Stairs => {
                    let n = args.n.unwrap_or(10);
                    println!("stairs({n}) = {}", openxor::fixpoint::dp_stairs(n));
                }
                Demo::Bellman => {
                    let graph = load_graph(args.graph.as_deref())?;
                    let dist = openxor::fixpoint::bellman_ford(&graph, args.source)?;
                    for (v, d) in dist.iter().enumerate() {
                        println!("dist[{v}] = {d}");
                    }
                }
                Demo::Bfs => {
                    let graph = load_graph(args.graph.as_deref())?;
                    let reach = openxor::fixpoint::bfs_reach(&graph, args.source)?;
                    let list: Vec<String> = reach.iter().map(|v| v.to_string()).collect();
                    println!("reachable from {}: {{{}}}", args.source, list.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn load_graph(path: Option<&Path>) -> Result<openxor::fixpoint::Graph> {
    let path = path.context("this demo requires --graph FILE")?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(openxor::fixpoint::Graph::parse(&text)?)
}

fn row_from_outcome(instance: &Instance, outcome: SolveOutcome) -> ResultRow {
    ResultRow {
        id: instance.id.clone(),
        status: outcome.status,
        ops: outcome.ops,
        nodes: outcome.nodes_explored,
        time_s: outcome.wall_time,
    }
}

fn write_report(report: &EvalReport, outputs: &[PathBuf]) -> Result<()> {
    for path in outputs {
        let rendered = match path.extension().and_then(|e| e.to_str()) {
            Some("md") => report.to_markdown(),
            Some("csv") => report.to_csv(),
            other => bail!(
                "unsupported report extension {:?} for {} (use .md or .csv)",
                other,
                path.display()
            ),
        };
        write_atomic(path, rendered.as_bytes())?;
        println!("{}", path.display());
    }
    Ok(())
}
