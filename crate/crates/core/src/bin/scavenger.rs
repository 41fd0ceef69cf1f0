use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scavenger_hunt::belief::DEFAULT_ENUMERATION_CAP;
use scavenger_hunt::bench::{
    arrangement_seed, build_report, generate_environment, make_planner, read_results, run_experiment,
    run_on_environment, write_results, BenchError, CellOptions, ExperimentSpec,
};
use scavenger_hunt::dqn::{
    read_policy, train, write_curve_csv, write_policy, DqnError, DqnPlanner, ObservationEncoding, TrainConfig,
};
use scavenger_hunt::envfile::{load_environment, save_environment, EnvFileError, Environment};
use scavenger_hunt::graph::GraphError;
use scavenger_hunt::hunt::{default_step_limit, run_hunt, HuntInstance, TRACE_HEADER};
use scavenger_hunt::planners::{ExhaustiveBayes, PlannerKind, DEFAULT_CANDIDATE_LIMIT};

#[derive(Parser)]
#[command(name = "scavenger", version, about = "Object-search planning benchmarks on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random environment file.
    Gen(GenArgs),
    /// Run planners on hunts sampled from one environment.
    Run(RunArgs),
    /// Run planners over generated environments of several sizes.
    Sweep(SweepArgs),
    /// Train a Q-network policy for one environment.
    TrainDqn(TrainArgs),
    /// Summarize a results CSV into tables and plot data.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 4)]
    objects: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Environment index within the seed's stream.
    #[arg(long, default_value_t = 0)]
    env_id: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    env: PathBuf,
    /// Planner name, or a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    alg: Vec<PlannerKind>,
    #[arg(long, default_value_t = 100)]
    hunts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
    /// Policy file for `dqn` / `dqnmap`.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Value written to the `env_id` column.
    #[arg(long, default_value_t = 0)]
    env_id: u64,
    /// Also write every hunt's visited nodes and step costs.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Record planner wall time (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Node counts: `3..10` (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_node_counts)]
    nodes: NodeCounts,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    hunts: usize,
    #[arg(long, value_delimiter = ',', default_value = "proximity,probability,probprox,exhaustive,salesman,optimal")]
    algs: Vec<PlannerKind>,
    #[arg(long, default_value_t = 4)]
    objects: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Exhaustive rows on larger graphs are written as `skipped`.
    #[arg(long, default_value_t = 8)]
    exhaustive_max_nodes: usize,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    env: PathBuf,
    /// Give the network travel costs instead of a one-hot position.
    #[arg(long)]
    map: bool,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 2000)]
    steps_per_epoch: usize,
    #[arg(long, default_value_t = 200)]
    test_episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Debug)]
struct NodeCounts(Vec<usize>);

fn parse_node_counts(s: &str) -> Result<NodeCounts, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad node count {t:?}"));
    let counts = if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (parse(lo)?, parse(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    Ok(NodeCounts(counts))
}

enum Failure {
    Usage(anyhow::Error),
    Infeasible(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        if is_infeasible(&e) {
            Failure::Infeasible(e)
        } else {
            Failure::Usage(e)
        }
    }
}

fn is_infeasible(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<BenchError>(), Some(BenchError::Infeasible(_)))
            || matches!(c.downcast_ref::<DqnError>(), Some(DqnError::InvalidConfig(_)))
            || matches!(c.downcast_ref::<EnvFileError>(), Some(EnvFileError::Graph(GraphError::Disconnected { .. })))
            || matches!(c.downcast_ref::<GraphError>(), Some(GraphError::Disconnected { .. }))
    })
}

fn infeasible(msg: String) -> anyhow::Error {
    BenchError::Infeasible(msg).into()
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn load_env(path: &Path) -> anyhow::Result<Environment> {
    load_environment(path).with_context(|| format!("cannot load environment {}", path.display()))
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<()> {
    let env = generate_environment(a.nodes, a.objects, a.seed, a.env_id)?;
    save_environment(&a.output, &env).with_context(|| format!("cannot write {}", a.output.display()))?;
    Ok(())
}

fn check_exhaustive_feasible(env: &Environment) -> anyhow::Result<()> {
    let candidates = env.prior.support_union().into_iter().filter(|&n| n != env.start).count();
    if candidates > DEFAULT_CANDIDATE_LIMIT {
        return Err(infeasible(format!(
            "exhaustive search over {candidates} candidate nodes exceeds the limit of {DEFAULT_CANDIDATE_LIMIT}"
        )));
    }
    let worlds = (0..env.prior.object_count())
        .map(|o| env.prior.support(scavenger_hunt::ObjectId(o)).len() as u128)
        .try_fold(1u128, |acc, s| acc.checked_mul(s))
        .unwrap_or(u128::MAX);
    if worlds > DEFAULT_ENUMERATION_CAP as u128 {
        return Err(infeasible(format!(
            "{worlds} arrangements exceed the enumeration cap of {DEFAULT_ENUMERATION_CAP}"
        )));
    }
    Ok(())
}

fn load_dqn(kinds: &[PlannerKind], policy: Option<&PathBuf>, env: &Environment) -> anyhow::Result<Option<DqnPlanner>> {
    let learned: Vec<PlannerKind> = kinds.iter().copied().filter(|k| k.is_learned()).collect();
    if learned.is_empty() {
        return Ok(None);
    }
    if learned.len() > 1 {
        return Err(infeasible("only one learned planner can run per invocation".into()));
    }
    let path = policy.ok_or_else(|| infeasible(format!("{} needs --policy", learned[0])))?;
    let file = File::open(path).with_context(|| format!("cannot open policy {}", path.display()))?;
    let (net, encoding) = read_policy(BufReader::new(file))?;
    if net.output_len() != env.graph.node_count() || net.input_len() != 2 * env.graph.node_count() {
        return Err(infeasible(format!(
            "policy expects {} nodes but the environment has {}",
            net.output_len(),
            env.graph.node_count()
        )));
    }
    if encoding.with_map != (learned[0] == PlannerKind::DqnMap) {
        return Err(infeasible(format!("policy was not trained for {}", learned[0])));
    }
    Ok(Some(DqnPlanner::new(net, encoding)))
}

fn cmd_run(a: RunArgs) -> anyhow::Result<()> {
    let env = load_env(&a.env)?;
    if a.alg.contains(&PlannerKind::ExhaustiveBayes) {
        check_exhaustive_feasible(&env)?;
    }
    let options = CellOptions {
        exhaustive: ExhaustiveBayes::default(),
        exhaustive_enabled: true,
        dqn: load_dqn(&a.alg, a.policy.as_ref(), &env)?,
        record_timing: a.timing,
    };
    let rows = run_on_environment(&env, a.env_id, &a.alg, a.hunts, a.seed, &options, a.workers)?;
    write_results(create(&a.csv)?, &rows)?;

    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(TRACE_HEADER)?;
        let n = env.graph.node_count();
        let step_limit = default_step_limit(n, env.prior.object_count());
        for hunt in 0..a.hunts as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(arrangement_seed(a.seed, n, 0, hunt));
            let truth = env.prior.sample(&mut rng);
            let instance = HuntInstance::new(env.graph.clone(), env.prior.clone(), truth, env.start)?;
            for &kind in &a.alg {
                let mut planner = make_planner(kind, &instance.truth, &options)?;
                let outcome = run_hunt(&instance, planner.as_mut(), step_limit)?;
                outcome.trajectory.write_csv(&mut w, hunt as usize, kind.name())?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let mut spec = ExperimentSpec::new(a.nodes.0, a.trials, a.hunts, a.algs, a.seed);
    spec.objects_per_hunt = a.objects;
    spec.exhaustive_max_nodes = a.exhaustive_max_nodes;
    spec.record_timing = a.timing;
    let rows = run_experiment(&spec, a.workers)?;
    write_results(create(&a.csv)?, &rows)?;
    Ok(())
}

fn cmd_train(a: TrainArgs) -> anyhow::Result<()> {
    let env = load_env(&a.env)?;
    let config = TrainConfig {
        epochs: a.epochs,
        steps_per_epoch: a.steps_per_epoch,
        test_episodes: a.test_episodes,
        encoding: if a.map { ObservationEncoding::MAP } else { ObservationEncoding::NO_MAP },
        seed: a.seed,
        ..TrainConfig::default()
    };
    let trained = train(&env.graph, &env.prior, env.start, &config)?;
    write_policy(create(&a.output)?, &trained.network, trained.encoding)?;
    if let Some(curve) = &a.curve {
        write_curve_csv(create(curve)?, &trained.curve)?;
    }
    eprintln!("best epoch {} with mean test return {}", trained.best_epoch, trained.best_mean_return);
    Ok(())
}

fn cmd_report(a: ReportArgs) -> anyhow::Result<()> {
    let file = File::open(&a.csv).with_context(|| format!("cannot open {}", a.csv.display()))?;
    let rows = read_results(BufReader::new(file))?;
    let report = build_report(&rows)?;
    report.write_to(&a.output)?;
    print!("{}", report.summary);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::TrainDqn(a) => cmd_train(a),
        Command::Report(a) => cmd_report(a),
    };
    result.map_err(Failure::from)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
