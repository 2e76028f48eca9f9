use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semispec::bisection::{spectral_bisection, CutRule};
use semispec::eigen::EigenOptions;
use semispec::error::{Error, Result};
use semispec::graph::MatrixKind;
use semispec::harness::{emit_plots, run_experiment, PlotKind, RawConfig};
use semispec::io::{read_edge_list, read_partition, write_edge_list, write_partition};
use semispec::metrics::agreement;
use semispec::models::{
    clique_dcm_spec, sample_block_model, sample_dcm, BlockProbabilitySpec, PlantBudget,
};
use semispec::operator::DENSE_CAP;
use semispec::rng::Seed;
use semispec::theory::{thresholds, Constants};

#[derive(Parser)]
#[command(name = "semispec", version, about = "Semirandom block models and spectral bisection")]
struct Cli {
    /// Eigensolver residual tolerance (default 1e-8 dense, 1e-6 iterative).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest n solved with the dense eigensolver.
    #[arg(long, global = true, default_value_t = DENSE_CAP)]
    dense_cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list.
    Gen(GenArgs),
    /// Run spectral bisection on an edge-list file.
    Bisect(BisectArgs),
    /// Print thresholds, margins and nested-block spectra.
    Theory(TheoryArgs),
    /// Run an experiment from a config file.
    Expt(ExptArgs),
    /// Plot a CSV produced by `expt`.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Ssbm,
    NssbmBench,
    Nested,
    DcmClique,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    pbar: Option<f64>,
    #[arg(long)]
    q: f64,
    /// Density multiplier of the nested-block instance.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    clique_size: Option<usize>,
    /// Base seed; falls back to SEMISPEC_SEED, then 0.
    #[arg(long, env = "SEMISPEC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Force a 1-based internal pair to probability 1, as `u,v`. Repeatable.
    #[arg(long = "plant", value_parser = parse_pair)]
    plants: Vec<(usize, usize)>,
    /// Accept plants over the per-vertex budget.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    partition_out: Option<PathBuf>,
}

#[derive(Args)]
struct BisectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "L")]
    matrix: MatrixKind,
    #[arg(long, default_value = "zero")]
    cut: CutRule,
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Planted partition file; prints the agreement when given.
    #[arg(long)]
    planted: Option<PathBuf>,
    #[arg(long, env = "SEMISPEC_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Both,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    pbar: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
}

#[derive(Args)]
struct ExptArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override a config key, as `key=value`. Repeatable.
    #[arg(long = "set")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    kind: PlotKind,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected u,v, got '{s}'"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn eigen_options(cli: &Cli, seed: Seed) -> EigenOptions {
    EigenOptions {
        tol: cli.tol,
        dense_cap: cli.dense_cap,
        seed,
        ..EigenOptions::default()
    }
}

fn need<T>(x: Option<T>, flag: &str) -> Result<T> {
    x.ok_or_else(|| Error::InvalidArgument(format!("this model needs --{flag}")))
}

fn gen(a: &GenArgs) -> Result<()> {
    let seed = Seed::new(a.seed, a.stream);
    let block = |spec: BlockProbabilitySpec| -> Result<_> {
        let spec = if a.plants.is_empty() {
            spec
        } else {
            let zero_based: Vec<(usize, usize)> = a
                .plants
                .iter()
                .map(|&(u, v)| {
                    if u == 0 || v == 0 {
                        Err(Error::VertexOutOfRange { vertex: 0, n: a.n })
                    } else {
                        Ok((u - 1, v - 1))
                    }
                })
                .collect::<Result<_>>()?;
            let budget = if a.force { PlantBudget::Force } else { PlantBudget::Enforce };
            spec.with_plants(&zero_based, budget)?
        };
        Ok((sample_block_model(&spec, seed), spec.planted()))
    };
    let (graph, planted) = match a.model {
        Model::Ssbm => block(BlockProbabilitySpec::ssbm(a.n, a.p, a.q)?)?,
        Model::NssbmBench => block(BlockProbabilitySpec::nssbm_benchmark(a.n, a.p, need(a.pbar, "pbar")?, a.q)?)?,
        Model::Nested => block(BlockProbabilitySpec::nested_block(a.n, a.p, a.q, need(a.k, "k")?)?)?,
        Model::DcmClique => {
            let spec = clique_dcm_spec(a.n, a.p, a.q, need(a.clique_size, "clique-size")?, seed)?;
            let s = sample_dcm(&spec, seed)?;
            (s.graph, spec.planted())
        }
    };
    write_edge_list(&a.out, &graph)?;
    if let Some(path) = &a.partition_out {
        write_partition(path, &planted)?;
    }
    println!("wrote {} vertices, {} edges to {}", graph.n(), graph.edge_count(), a.out.display());
    Ok(())
}

fn bisect(cli: &Cli, a: &BisectArgs) -> Result<()> {
    let g = read_edge_list(&a.input)?;
    let out = spectral_bisection(&g, a.matrix, a.cut, &eigen_options(cli, Seed::new(a.seed, 0)))?;
    println!("matrix     {}", out.matrix_kind);
    println!("cut        {}", out.cut_rule);
    println!("lambda2    {}", out.lambda2);
    println!("lambda3    {}", out.lambda3);
    println!("degenerate {}", out.degeneracy_flag);
    println!("|S|        {}", out.partition.count_ones());
    if let Some(path) = &a.planted {
        let planted = read_partition(path)?;
        println!("agreement  {}", agreement(&out.partition, &planted)?);
    }
    if let Some(path) = &a.labels_out {
        write_partition(path, &out.partition)?;
    }
    Ok(())
}

fn theory(a: &TheoryArgs) -> Result<()> {
    let constants = Constants { c: a.c, c1: a.c1, c2: a.c2 };
    let report = thresholds(a.n, a.p, a.pbar, a.q, a.k, constants)?;
    if matches!(a.format, Format::Text | Format::Both) {
        print!("{}", report.to_text());
    }
    if matches!(a.format, Format::Both) {
        println!();
    }
    if matches!(a.format, Format::Json | Format::Both) {
        print!("{}", report.to_json());
    }
    Ok(())
}

fn expt(cli: &Cli, a: &ExptArgs) -> Result<()> {
    let mut raw = RawConfig::parse(&std::fs::read_to_string(&a.config)?)?;
    if let Some(tol) = cli.tol {
        raw.set("tol", &tol.to_string())?;
    }
    if cli.dense_cap != DENSE_CAP {
        raw.set("dense_cap", &cli.dense_cap.to_string())?;
    }
    if let Some(dir) = &a.out_dir {
        raw.set("out_dir", &dir.to_string_lossy())?;
    }
    raw.apply_overrides(&a.overrides)?;
    let env_seed = match std::env::var("SEMISPEC_SEED") {
        Ok(s) => Some(
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("SEMISPEC_SEED '{s}' is not a u64")))?,
        ),
        Err(_) => None,
    };
    let cfg = raw.resolve(env_seed)?;
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    log::info!("running {} with {jobs} worker(s)", cfg.experiment);
    for path in run_experiment(&cfg, jobs)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Bisect(a) => bisect(&cli, a),
        Command::Theory(a) => theory(a),
        Command::Expt(a) => expt(&cli, a),
        Command::Plot(a) => emit_plots(&a.csv, a.kind, &a.out).map(|p| println!("{}", p.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
