//! Command-line front end: score generation, structure learning, oracle checks,
//! benchmarking and instance generation.

pub mod bench;
pub mod report;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bnlearn_core::generate::{random_score_table, seeded_rng, RandomNetwork};
use bnlearn_core::scores::{build_score_table, load_csv, parse_score_file, write_score_file, Metric, ScoreTable};
use bnlearn_core::solver::{exhaustive_optimum, learn_structure, SolveConfig, SolveMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::RunReport;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_LIMIT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "bnlearn", version, about = "Exact Bayesian network structure learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute local scores from a CSV dataset
    Score(ScoreArgs),
    /// Learn an optimal structure from a score file
    Learn(LearnArgs),
    /// Compare the solver with exhaustive search (at most 8 nodes)
    Oracle(OracleArgs),
    /// Run every score file in a directory under one or more configurations
    Bench(bench::BenchArgs),
    /// Generate a random dataset or score table
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Bdeu,
    K2,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// CSV file with a header of variable names
    pub data: PathBuf,
    /// Score file to write; stdout when omitted
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub parent_limit: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Bdeu)]
    pub metric: MetricArg,
    /// Equivalent sample size for BDeu
    #[arg(long, default_value_t = 1.0)]
    pub ess: f64,
    /// Keep parent sets dominated by a subset with a better score
    #[arg(long)]
    pub no_prune: bool,
}

/// Solver switches shared by `learn` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, default_value = "in-tree", value_parser = parse_mode)]
    pub mode: SolveMode,
    #[arg(long)]
    pub no_cycle_cuts: bool,
    #[arg(long)]
    pub no_gomory: bool,
    #[arg(long)]
    pub no_heuristic: bool,
    /// Wall-clock limit in seconds
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Branch-and-bound node limit per tree
    #[arg(long)]
    pub node_limit: Option<u64>,
}

fn parse_mode(s: &str) -> Result<SolveMode, String> {
    s.parse()
}

impl SolveArgs {
    pub fn config(&self) -> SolveConfig {
        SolveConfig {
            mode: self.mode,
            use_cycle_cuts: !self.no_cycle_cuts,
            use_gomory: !self.no_gomory,
            use_heuristic: !self.no_heuristic,
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    pub scores: PathBuf,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Write the learned network in Graphviz format
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Write a JSON run report
    #[arg(long)]
    pub stats_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub scores: PathBuf,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenerateKind {
    /// Data sampled from a random network
    Data,
    /// Scores drawn uniformly from [-10, 0)
    Scores,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = 8)]
    pub nodes: usize,
    /// Rows to sample (data only)
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Parents per node in the sampled network, or parent set size in a score table
    #[arg(long, default_value_t = 2)]
    pub parent_limit: usize,
    #[arg(long, default_value_t = 2)]
    pub min_arity: usize,
    #[arg(long, default_value_t = 3)]
    pub max_arity: usize,
    /// Seed; falls back to BNLEARN_SEED, then 0
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Score(a) => cmd_score(&a),
        Command::Learn(a) => cmd_learn(&a),
        Command::Oracle(a) => {
            let table = read_scores(&a.scores)?;
            let config = a.solve.config();
            let verdict = oracle_verdict(&table, |t| Ok(learn_structure(t, &config)?.dag.total_score))?;
            print!("{verdict}");
            Ok(if verdict.pass { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Bench(a) => bench::cmd_bench(&a),
        Command::Generate(a) => cmd_generate(&a),
    }
}

pub fn read_scores(path: &Path) -> anyhow::Result<ScoreTable> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_score_file(BufReader::new(f)).with_context(|| format!("cannot parse {}", path.display()))
}

fn output_stream(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_score(a: &ScoreArgs) -> anyhow::Result<u8> {
    let f = File::open(&a.data).with_context(|| format!("cannot open {}", a.data.display()))?;
    let data = load_csv(BufReader::new(f)).with_context(|| format!("cannot read {}", a.data.display()))?;
    let metric = match a.metric {
        MetricArg::Bdeu => {
            if !(a.ess > 0.0) {
                bail!("--ess must be positive");
            }
            Metric::Bdeu { ess: a.ess }
        }
        MetricArg::K2 => Metric::K2,
    };
    let table = build_score_table(&data, a.parent_limit, metric, !a.no_prune)?;
    let mut out = output_stream(a.output.as_deref())?;
    write_score_file(&table, &mut out)?;
    out.flush()?;
    // keep stdout clean when it carries the score file
    let mut log: Box<dyn Write> = if a.output.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    for v in 0..table.num_nodes() {
        writeln!(log, "{}: {} parent sets", table.name(v), table.entries(v).len())?;
    }
    writeln!(log, "total: {}", table.total_entries())?;
    Ok(EXIT_OK)
}

fn cmd_learn(a: &LearnArgs) -> anyhow::Result<u8> {
    let table = read_scores(&a.scores)?;
    let config = a.solve.config();
    let result = learn_structure(&table, &config)?;
    let report = RunReport::new(&a.scores, &table, &config, &result);
    print!("{}", summary(&report));
    if let Some(p) = &a.dot {
        std::fs::write(p, result.dag.to_dot(table.names())).with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let Some(p) = &a.stats_json {
        std::fs::write(p, report.to_json() + "\n").with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(if report.optimal { EXIT_OK } else { EXIT_LIMIT })
}

/// Human-readable result: counters in table order, then the structure.
pub fn summary(r: &RunReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<26}{v}\n"));
    line("Title", r.file.clone());
    line("# Attributes", r.n.to_string());
    line("# Instances", r.instances.map_or("-".into(), |m| m.to_string()));
    line("# ILP Variables", r.ilp_variables.to_string());
    line("Score", format!("{:.6}", r.score));
    line("Time Elapsed (in sec)", format!("{:.3}", r.elapsed_sec));
    line("# Cluster Cut Iterations", r.cluster_cut_iterations.to_string());
    line("# Cycle Cut Iterations", r.cycle_cut_iterations.to_string());
    line("# Cycle Cut Count", r.cycle_cut_count.to_string());
    line("Status", if r.optimal { "optimal" } else { "limit reached (best found)" }.into());
    s.push('\n');
    for (v, ps) in r.dag.parents.iter().enumerate() {
        let names: Vec<&str> = ps.iter().map(|&p| r.dag.names[p].as_str()).collect();
        s.push_str(&format!("{} <- {{{}}}\n", r.dag.names[v], names.join(", ")));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVerdict {
    pub exhaustive: f64,
    pub solver: f64,
    pub pass: bool,
}

impl std::fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "exhaustive: {:.9}", self.exhaustive)?;
        writeln!(f, "solver:     {:.9}", self.solver)?;
        writeln!(f, "{}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Compares `solve` against exhaustive search; scores must agree within 1e-6.
pub fn oracle_verdict(
    table: &ScoreTable,
    solve: impl FnOnce(&ScoreTable) -> anyhow::Result<f64>,
) -> anyhow::Result<OracleVerdict> {
    let (_, exhaustive) = exhaustive_optimum(table)?;
    let solver = solve(table)?;
    Ok(OracleVerdict {
        exhaustive,
        solver,
        pass: (exhaustive - solver).abs() <= 1e-6,
    })
}

pub fn seed_from_env(explicit: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var("BNLEARN_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("BNLEARN_SEED={v:?} is not an integer")),
        Err(_) => Ok(0),
    }
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<u8> {
    let mut rng = seeded_rng(seed_from_env(a.seed)?);
    let mut out = output_stream(a.output.as_deref())?;
    match a.kind {
        GenerateKind::Data => {
            if a.min_arity < 2 || a.max_arity < a.min_arity {
                bail!("arities must satisfy 2 <= --min-arity <= --max-arity");
            }
            if a.instances == 0 {
                bail!("--instances must be positive");
            }
            let net = RandomNetwork::generate(a.nodes, a.parent_limit, a.min_arity..=a.max_arity, &mut rng);
            // a column with a single observed value would not load back
            let data = (0..100)
                .map(|_| net.sample(a.instances, &mut rng))
                .find(|d| {
                    (0..d.num_variables()).all(|v| d.iter_rows().any(|r| r[v] != d.row(0)[v]))
                })
                .context("could not sample every value-varying column; try more --instances")?;
            data.write_csv(&mut out)?;
        }
        GenerateKind::Scores => {
            if a.nodes == 0 {
                bail!("--nodes must be positive");
            }
            write_score_file(&random_score_table(a.nodes, a.parent_limit, &mut rng), &mut out)?;
        }
    }
    out.flush()?;
    Ok(EXIT_OK)
}
