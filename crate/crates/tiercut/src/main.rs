// SPDX-License-Identifier: Apache-2.0

//! `tiercut` command-line interface: generate synthetic designs, partition a
//! placed netlist onto two dies, sweep all clustering methods, or
//! cross-validate the partitioner against the exhaustive oracle.
//!
//! Exit codes: 0 success, 2 infeasible partition (e.g. an absorption cluster
//! larger than a die), 1 any other error.

use clap::{ArgAction, Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tiercut::cluster::Method;
use tiercut::designgen::{CoreSpec, TopologySpec, Wiring};
use tiercut::ingest::Format;
use tiercut::pipeline::{
    load_config_file, run_gen, run_oracle_check, run_pipeline, ClusterCount, ConfigFile, GenConfig,
    PipelineConfig, Threshold,
};
use tiercut::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tiercut",
    version,
    about = "Two-die partitioning flow: ingest a placed netlist, cluster, min-cut bi-partition, report"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic placed netlist in the native format
    Gen(GenArgs),
    /// Partition one design with one clustering method
    Partition(PartitionArgs),
    /// Run several clustering methods on one design and compare them
    Sweep(SweepArgs),
    /// Cross-validate the heuristic partitioner against the exhaustive oracle
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output netlist path
    #[arg(long, short = 'o', default_value = "design.nlp")]
    out: PathBuf,
    /// Core grid as ROWSxCOLS
    #[arg(long, default_value = "4x4")]
    cores: String,
    /// Inter-core wiring: serial | mesh
    #[arg(long, default_value = "serial")]
    wiring: String,
    /// Standard cells per core
    #[arg(long, default_value_t = 200)]
    cells_per_core: usize,
    /// Wires per inter-core bus
    #[arg(long, default_value_t = 16)]
    bus_width: usize,
    /// Random core-internal nets per core
    #[arg(long, default_value_t = 120)]
    internal_nets: usize,
    /// Minimum sinks per internal net
    #[arg(long, default_value_t = 1)]
    fanout_min: usize,
    /// Maximum sinks per internal net
    #[arg(long, default_value_t = 3)]
    fanout_max: usize,
    /// Cell width
    #[arg(long, default_value_t = 0.4)]
    cell_width: f64,
    /// Cell height
    #[arg(long, default_value_t = 0.4)]
    cell_height: f64,
    /// Core tile pitch
    #[arg(long, default_value_t = 60.0)]
    pitch: f64,
    /// Generator RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Insert buffer chains on this percentage of the longest nets
    #[arg(long, value_name = "PCT")]
    with_buffers: Option<f64>,
}

/// Knobs shared by `partition` and `sweep`. Every flag overrides the config
/// file, which overrides the built-in default.
#[derive(Args)]
struct RunArgs {
    /// Placed netlist to partition
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    /// Input format: native | bookshelf (inferred from the extension when omitted)
    #[arg(long)]
    format: Option<String>,
    /// JSON config file supplying any of these knobs
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cluster count for hg/km: an integer or 'auto' (max(16, cells/50))
    #[arg(long, visible_alias = "k")]
    clusters: Option<String>,
    /// Absorption length threshold for pwl: a length or 'auto' (100 average gate widths)
    #[arg(long)]
    threshold: Option<String>,
    /// K-means iteration cap
    #[arg(long)]
    kmeans_max_iters: Option<usize>,
    /// Maximum side area fraction (0.51 = the 49/51 target)
    #[arg(long)]
    balance: Option<f64>,
    /// Independent partitioner restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Master RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $TIERCUT_OUT_DIR, then ./tiercut_out)
    #[arg(long, short = 'o')]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Clustering method: nc | hg | km | pwl
    #[arg(long, short = 'm')]
    method: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated methods to compare
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Run methods one after another instead of in parallel
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of random hypergraphs to check
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Heuristic restarts per trial
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Trial RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    // clap's own usage-error exit code is 2, which this tool reserves for
    // infeasible partitions; remap usage errors to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Domain(format!("cli: --cores expects ROWSxCOLS, got '{s}'"));
    let (rows, cols) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        rows.trim().parse().map_err(|_| bad())?,
        cols.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let config = GenConfig {
        core: CoreSpec {
            cells_per_core: args.cells_per_core,
            bus_width: args.bus_width,
            internal_net_count: args.internal_nets,
            internal_fanout: (args.fanout_min, args.fanout_max),
            cell_width: args.cell_width,
            cell_height: args.cell_height,
            rng_seed: args.seed,
        },
        topo: TopologySpec {
            grid: parse_grid(&args.cores)?,
            wiring: Wiring::parse(&args.wiring)?,
            core_pitch: args.pitch,
        },
        with_buffers: args.with_buffers,
        out: args.out,
    };
    let path = run_gen(&config)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Merge precedence: CLI flag > config file field > built-in default.
fn effective_config(
    args: &RunArgs,
    methods: Vec<Method>,
    comparison: bool,
    parallel: bool,
) -> Result<PipelineConfig> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };
    let input = args.input.clone().or(file.input).ok_or_else(|| {
        Error::Domain(
            "cli: no input netlist (pass --in PATH or set 'input' in the config file)".into(),
        )
    })?;
    let format = match &args.format {
        Some(s) => Some(Format::parse(s)?),
        None => file.format,
    };
    let clusters = match &args.clusters {
        Some(s) => ClusterCount::parse(s)?,
        None => file.clusters.unwrap_or(ClusterCount::Fixed(1000)),
    };
    let threshold = match &args.threshold {
        Some(s) => Threshold::parse(s)?,
        None => file.threshold.unwrap_or(Threshold::Auto),
    };
    let out_dir = args
        .out_dir
        .clone()
        .or(file.out_dir)
        .or_else(|| std::env::var_os("TIERCUT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tiercut_out"));
    Ok(PipelineConfig {
        input,
        format,
        methods,
        clusters,
        threshold,
        kmeans_max_iters: args
            .kmeans_max_iters
            .or(file.kmeans_max_iters)
            .unwrap_or(200),
        balance: args.balance.or(file.balance).unwrap_or(0.51),
        restarts: args.restarts.or(file.restarts).unwrap_or(16),
        seed: args.seed.or(file.seed).unwrap_or(42),
        out_dir,
        parallel,
        comparison,
    })
}

fn file_methods(args: &RunArgs) -> Result<Option<Vec<Method>>> {
    match &args.config {
        Some(path) => Ok(load_config_file(path)?.methods),
        None => Ok(None),
    }
}

fn cmd_partition(args: PartitionArgs) -> Result<()> {
    let method = match &args.method {
        Some(s) => Method::parse(s)?,
        None => file_methods(&args.run)?
            .and_then(|m| m.first().copied())
            .unwrap_or(Method::Nc),
    };
    let config = effective_config(&args.run, vec![method], false, false)?;
    let outcome = run_pipeline(&config)?;
    let report = &outcome.reports[0];
    println!(
        "{}: {} nets cut, {:.4}% of wirelength cut, median normalized cut length {:.6}",
        report.method, report.nets_cut, report.total_wl_cut_pct, report.median_norm
    );
    println!("artifacts: {}", config.out_dir.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let methods = match &args.methods {
        Some(names) => names
            .iter()
            .map(|s| Method::parse(s))
            .collect::<Result<Vec<_>>>()?,
        None => file_methods(&args.run)?
            .unwrap_or_else(|| vec![Method::Nc, Method::Hg, Method::Km, Method::Pwl]),
    };
    let config = effective_config(&args.run, methods, true, !args.serial)?;
    let outcome = run_pipeline(&config)?;
    let table = outcome.table.expect("sweep always builds a comparison");
    print!("{}", tiercut::report::table_csv(&table));
    println!("artifacts: {}", config.out_dir.display());
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<()> {
    let outcome = run_oracle_check(args.trials, args.restarts, args.seed)?;
    println!(
        "oracle check: {}/{} optimal cuts matched, {} below optimum",
        outcome.matched, outcome.trials, outcome.below_optimum
    );
    if outcome.below_optimum > 0 {
        return Err(Error::Integrity(
            "partition: heuristic reported a cut below the exhaustive optimum".into(),
        ));
    }
    // the documented quality gate: >= 90% of trials must hit the optimum
    let needed = (args.trials * 9).div_ceil(10);
    if outcome.matched < needed {
        return Err(Error::Integrity(format!(
            "partition: heuristic matched only {}/{} optimal cuts (gate: {needed})",
            outcome.matched, outcome.trials
        )));
    }
    Ok(())
}
