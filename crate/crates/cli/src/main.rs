use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cmdfs::degree::{sample_degree_sequence, DistSpec};
use cmdfs::genfun::{limit_profile, GenFun};
use cmdfs::graph::{explore_and_build, ladder_times, ladder_window, longest_path_lower_bound};
use cmdfs::harness::{replicate_seeds, run_experiment, ExperimentConfig};
use cmdfs::io;
use cmdfs::ode::{solve_system, solve_system_prime, TruncationSpec};

#[derive(Parser)]
#[command(
    name = "cmdfs",
    version,
    about = "DFS exploration of configuration-model graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run explorations and export contours, edges and degree snapshots.
    Simulate(SimulateArgs),
    /// Compute the limiting contour profile.
    Profile(ProfileArgs),
    /// Integrate a fluid system.
    Ode(OdeArgs),
    /// Run replicated experiments against the analytic limits.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    /// Densities along ladder times, with the ladder-time companion.
    Ladder,
    /// Densities as functions of the explored fraction.
    Explored,
}

#[derive(Args)]
struct SimulateArgs {
    /// e.g. `poisson:3`, `dirac:5`, `binomial:5,0.6`, `geometric:0.4`, `power_law:2.5`
    #[arg(long)]
    dist: DistSpec,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    delta: f64,
    /// Explored fractions at which to record sleeping-degree histograms.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    dist: DistSpec,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long)]
    dist: DistSpec,
    #[arg(long, value_enum, default_value_t = System::Ladder)]
    system: System,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 2.0)]
    t_end: f64,
    /// Output file; CSV on stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON configuration; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dist: Option<DistSpec>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every comparison passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Simulate(args) => simulate(args).map(|()| true),
        Command::Profile(args) => profile(args).map(|()| true),
        Command::Ode(args) => ode(args).map(|()| true),
        Command::Compare(args) => compare(args),
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    if args.n == 0 || args.reps == 0 {
        bail!("--N and --reps must be positive");
    }
    let dist = args.dist.build()?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
    }
    let mut summaries = Vec::new();
    for rep in 0..args.reps {
        let (seq_seed, run_seed) = replicate_seeds(args.seed, rep);
        let seq = sample_degree_sequence(&dist, args.n, seq_seed)?;
        let (trace, snaps) = explore_and_build(&seq, run_seed, &args.alpha);
        let (giant, second) = trace.largest_components();
        let ladder = ladder_times(&trace.contour, ladder_window(args.n, args.delta));
        summaries.push(json!({
            "replicate": rep,
            "sequence_seed": seq_seed,
            "exploration_seed": run_seed,
            "parity_fixed": seq.parity_fixed(),
            "edges": trace.edges.len(),
            "components": trace.component_sizes().len(),
            "giant": giant,
            "second": second,
            "max_height": trace.max_height(),
            "longest_path_lower_bound": longest_path_lower_bound(&trace),
            "ladder_times": ladder.len() - 1,
        }));
        if let Some(dir) = &args.out {
            io::write_contour_csv(&trace, io::create(&dir.join(format!("contour_{rep}.csv")))?)?;
            io::write_edges_csv(&trace, io::create(&dir.join(format!("edges_{rep}.csv")))?)?;
            io::write_json(&dir.join(format!("snapshots_{rep}.json")), &snaps)?;
        }
    }
    let text = io::to_json(&summaries)?;
    match &args.out {
        Some(dir) => std::fs::write(dir.join("summary.json"), text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn profile(args: ProfileArgs) -> anyhow::Result<()> {
    let gf = GenFun::new(&args.dist.build()?)?;
    let curve = limit_profile(&gf, args.grid)?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        curve.write_curve_csv(io::create(&dir.join("profile.csv"))?)?;
        curve.write_height_csv(io::create(&dir.join("height.csv"))?, 2001)?;
        io::write_json(&dir.join("summary.json"), &curve.summary)?;
        return Ok(());
    }
    let mut stdout = std::io::stdout().lock();
    match args.format {
        Format::Json => stdout.write_all(io::to_json(&curve.summary)?.as_bytes())?,
        Format::Csv => curve.write_curve_csv(stdout)?,
    }
    Ok(())
}

fn ode(args: OdeArgs) -> anyhow::Result<()> {
    let dist = args.dist.build()?;
    let trunc = TruncationSpec::new(&dist, args.epsilon)?;
    let traj = match args.system {
        System::Ladder => solve_system(&dist, &trunc, args.t_end, args.dt)?,
        System::Explored => solve_system_prime(&dist, &trunc, args.t_end, args.dt)?,
    };
    match &args.out {
        Some(path) => traj.write_csv(io::create(path)?)?,
        None => traj.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn compare(args: CompareArgs) -> anyhow::Result<bool> {
    let mut config = match (&args.config, &args.dist, args.n) {
        (Some(path), _, _) => ExperimentConfig::from_json_file(path)?,
        (None, Some(dist), Some(n)) => ExperimentConfig::new(dist.clone(), n),
        _ => bail!("compare needs --config or both --dist and --N"),
    };
    if let Some(dist) = args.dist {
        config.dist = dist;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(reps) = args.reps {
        config.replicates = reps;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if let Some(alpha) = args.alpha {
        config.alphas = alpha;
    }
    if let Some(grid) = args.grid {
        config.grid = grid;
    }
    if args.out.is_some() {
        config.out_dir = args.out;
    }
    let report = run_experiment(&config)?;
    let mut stdout = std::io::stdout().lock();
    match args.format {
        Format::Json => stdout.write_all(io::to_json(&report)?.as_bytes())?,
        Format::Csv => {
            writeln!(stdout, "criterion,rule,value,tolerance,passed")?;
            for c in &report.criteria {
                writeln!(
                    stdout,
                    "{},{},{},{},{}",
                    c.name, c.rule, c.value, c.tolerance, c.passed
                )?;
            }
        }
    }
    Ok(report.all_passed)
}
