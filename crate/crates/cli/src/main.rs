use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use thmc::basis::{enumerate_moves, DEFAULT_MOVE_CAP};
use thmc::fiber::{enumerate_fiber, verify_connectivity, DEFAULT_FIBER_CAP};
use thmc::inference::{exact_test, ChainConfig, Proposal, Statistic};
use thmc::io::{parse_moves, parse_paths, write_fiber, write_moves, write_paths, PathFormat, ShapeHint};
use thmc::{
    build_configuration, markov_basis, simulate_paths, BasisDescriptor, Family, ModelParams, MoveGenerator,
    MoveList, PathTable, Shape,
};

const EXIT_PARSE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "thmc", version, about = "Markov bases and exact tests for the toric homogeneous Markov chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the Markov basis of (S, T) as a 4ti2-style move file
    Basis(BasisArgs),
    /// Check that a basis connects every fiber of small tables
    Verify(VerifyArgs),
    /// Exact conditional goodness-of-fit test of THMC on path data
    Test(TestArgs),
    /// Draw paths from a chain model
    Simulate(SimulateArgs),
    /// Dump the configuration matrix A of (S, T)
    Config(ShapeArgs),
    /// List every table in the fiber of the given data
    Fiber(FiberArgs),
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long)]
    states: usize,
    #[arg(long)]
    length: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Drop a move family (e.g. degree-one, permutation-3); repeatable
    #[arg(long = "without")]
    without: Vec<String>,
    /// Print the family summary instead of the move matrix
    #[arg(long)]
    summary: bool,
    /// Limit on template instantiations
    #[arg(long, default_value_t = DEFAULT_MOVE_CAP)]
    cap: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    states: usize,
    #[arg(long)]
    length: usize,
    #[arg(long = "max-n")]
    max_n: usize,
    /// Verify an external move file instead of the built-in basis
    #[arg(long)]
    moves: Option<PathBuf>,
    #[arg(long = "without")]
    without: Vec<String>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Print only the summary
    #[arg(long)]
    quiet: bool,
    /// Limit on tables per N
    #[arg(long, default_value_t = DEFAULT_FIBER_CAP)]
    cap: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Path data file
    data: PathBuf,
    /// Input lines end with a count
    #[arg(long)]
    counts: bool,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    burnin: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// External move file used instead of the built-in basis
    #[arg(long)]
    moves: Option<PathBuf>,
    /// pearson, pearson-full or anderson-goodman
    #[arg(long, default_value = "pearson")]
    statistic: String,
    /// combined, local or template
    #[arg(long, default_value = "combined")]
    proposal: String,
    /// Report file; the histogram goes next to it as <stem>.histogram.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Histogram CSV file
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON model parameters
    #[arg(long)]
    params: PathBuf,
    /// Number of paths
    #[arg(long)]
    paths: u64,
    #[arg(long)]
    length: usize,
    #[arg(long)]
    seed: u64,
    /// Write aggregated lines
    #[arg(long)]
    counts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiberArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = DEFAULT_FIBER_CAP)]
    cap: u128,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_table(args: &DataArgs) -> Result<PathTable> {
    let format = if args.counts { PathFormat::Aggregated } else { PathFormat::Plain };
    let hint = ShapeHint { states: args.states, length: args.length };
    let text = read(&args.data)?;
    parse_paths(&text, format, hint).with_context(|| format!("parsing {}", args.data.display()))
}

fn basis_without(shape: Shape, without: &[String]) -> Result<BasisDescriptor> {
    let mut basis = markov_basis(shape)?;
    for name in without {
        basis = basis.without(name.parse::<Family>()?);
    }
    Ok(basis)
}

fn load_moves(path: &Path, shape: Shape) -> Result<MoveList> {
    let text = read(path)?;
    let moves = parse_moves(&text, shape).with_context(|| format!("parsing {}", path.display()))?;
    Ok(MoveList::new(shape, moves)?)
}

fn cmd_basis(args: &BasisArgs) -> Result<()> {
    let shape = Shape::new(args.shape.states, args.shape.length)?;
    let basis = basis_without(shape, &args.without)?;
    let out = args.shape.out.as_deref();
    if args.summary {
        let mut text = format!("shape: {shape}\n");
        for family in basis.families() {
            let single = BasisDescriptor::with_families(shape, vec![*family])?;
            let n = enumerate_moves(&single, args.cap)?.len();
            text.push_str(&format!("{family}: {n}\n"));
        }
        return emit(out, &text);
    }
    let moves = enumerate_moves(&basis, args.cap)?;
    emit(out, &write_moves(&moves, shape))
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let shape = Shape::new(args.states, args.length)?;
    let generator: Box<dyn MoveGenerator> = match &args.moves {
        Some(p) => Box::new(load_moves(p, shape)?),
        None => Box::new(basis_without(shape, &args.without)?),
    };
    let report = verify_connectivity(generator.as_ref(), args.max_n, args.threads, args.cap)?;
    let mut text = String::new();
    if !args.quiet {
        for v in &report.verdicts {
            let verdict = if v.connected() { "connected" } else { "DISCONNECTED" };
            text.push_str(&format!(
                "N={} b={} members={} components={} {verdict}\n",
                v.paths, v.statistic, v.members, v.components
            ));
        }
    }
    let bad = report.disconnected().len();
    text.push_str(&format!(
        "summary: shape {shape}, N <= {}, {} fibers, {} tables, largest fiber {}, {} disconnected\n",
        report.max_n,
        report.verdicts.len(),
        report.tables(),
        report.largest_fiber(),
        bad
    ));
    emit(args.out.as_deref(), &text)?;
    if bad > 0 {
        bail!("{bad} fibers are not connected");
    }
    Ok(())
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let table = load_table(&args.data)?;
    let statistic: Statistic = args.statistic.parse()?;
    let generator: Box<dyn MoveGenerator> = match &args.moves {
        Some(p) => Box::new(load_moves(p, table.shape())?),
        None => Box::new(markov_basis(table.shape())?),
    };
    let config = ChainConfig {
        burnin: args.burnin,
        samples: args.samples,
        seed: args.seed,
        chains: args.chains,
        threads: args.threads,
        proposal: args.proposal.parse::<Proposal>()?,
    };
    let report = exact_test(&table, generator.as_ref(), statistic, &config)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("timestamp: {stamp}\n");
    text.push_str(&format!("data: {}\n", args.data.data.display()));
    text.push_str(&format!("shape: {}\n", table.shape()));
    text.push_str(&format!("paths: {}\n", table.total()));
    text.push_str(&report.to_text());
    emit(args.out.as_deref(), &text)?;

    let histogram = args.histogram.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}.histogram.csv"))
        })
    });
    if let Some(h) = histogram {
        fs::write(&h, report.histogram_csv()).with_context(|| format!("writing {}", h.display()))?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = read(&args.params)?;
    let params: ModelParams =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.params.display()))?;
    let table = simulate_paths(&params, args.paths, args.length, args.seed)?;
    let format = if args.counts { PathFormat::Aggregated } else { PathFormat::Plain };
    emit(args.out.as_deref(), &write_paths(&table, format))
}

fn cmd_config(args: &ShapeArgs) -> Result<()> {
    let shape = Shape::new(args.states, args.length)?;
    let config = build_configuration(shape, thmc::config::DEFAULT_CELL_CAP)?;
    emit(args.out.as_deref(), &config.to_text())
}

fn cmd_fiber(args: &FiberArgs) -> Result<()> {
    let table = load_table(&args.data)?;
    let fiber = enumerate_fiber(&table.suff_stat(), table.shape().length(), args.cap)?;
    emit(args.out.as_deref(), &write_fiber(&fiber))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.downcast_ref::<serde_json::Error>().is_some()) {
        return EXIT_PARSE;
    }
    match err.chain().find_map(|e| e.downcast_ref::<thmc::Error>()) {
        Some(thmc::Error::Parse { .. }) => EXIT_PARSE,
        Some(thmc::Error::UnsupportedShape { .. }) => EXIT_UNSUPPORTED,
        Some(thmc::Error::CapExceeded { .. }) => EXIT_CAP,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis(a) => cmd_basis(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Config(a) => cmd_config(a),
        Command::Fiber(a) => cmd_fiber(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
