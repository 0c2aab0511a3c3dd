//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 usage or bad input, 3 graph generation failure,
//! 4 step cap exceeded, 5 internal or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, GraphSpec, Replication};
use crate::graph::{self, Graph};
use crate::oracle;
use crate::output;
use crate::walk::{self, CandidateSampling, Policy, Reinforcement, RwcScore, WalkOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "walklab",
    version,
    about = "Random walks with choice: cover-time and node-load experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as an edge list.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run one walk until cover and print its record as JSON.
    Run(RunArgs),
    /// Run a replicated multi-policy experiment and write CSV reports.
    Experiment(ExperimentArgs),
    /// Sweep ERWC's h over a range for several d.
    Sweep(SweepArgs),
    /// Print graph statistics and the heuristic h interval.
    Stats {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Exact expected SRW cover steps (graphs up to 20 nodes).
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        /// Start node; omit for the cover time (max over starts).
        #[arg(long)]
        start: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// Random geometric graph on the unit square.
    Rgg {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "radius_mult")]
        radius: Option<f64>,
        /// Radius as a multiple of the connectivity radius (default 2).
        #[arg(long)]
        radius_mult: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = graph::DEFAULT_MAX_RETRIES)]
        max_retries: u32,
        /// Keep disconnected samples instead of resampling.
        #[arg(long)]
        allow_disconnected: bool,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write node coordinates, one "x y" line per node.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// rows x cols torus.
    Torus {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Complete graph.
    Complete {
        #[arg(long)]
        n: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// srw | rwc:D | erwc:D:H
    #[arg(long, value_parser = parse_policy)]
    pub policy: Policy,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub step_cap: Option<u64>,
    /// Dump every step as a JSON line on stderr.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub walk: WalkArgs,
}

/// Rule variants of the choice walks.
#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Candidate draw: distinct | with-replacement
    #[arg(long, default_value = "distinct")]
    pub sampling: CandidateSampling,
    /// RWC score: visits (c/deg) | visits-plus-one ((c+1)/deg)
    #[arg(long, default_value = "visits")]
    pub rwc_score: RwcScore,
}

impl WalkArgs {
    fn options(&self) -> WalkOptions {
        WalkOptions { sampling: self.sampling, rwc_score: self.rwc_score }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// 1000 RGG(900, 2 r_con) samples, RWC(2) vs ERWC(2, 9), plus SRW.
    RggFamily,
    /// As rgg-family with d = 3.
    RggFamilyD3,
    /// One RGG(900, 2 r_con) instance, 2000 runs of SRW, RWC(2), ERWC(2, 9).
    RggSingle,
    /// T(30, 30), RWC(2) vs ERWC(2, 3), plus SRW.
    TorusD2,
    TorusD3,
    TorusD4,
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        let p = |s: &str| s.parse::<Policy>().expect("preset policy");
        let (graph, policies, rep) = match self {
            Preset::RggFamily => (
                GraphSpec::rgg(900, 2.0),
                vec![p("rwc:2"), p("erwc:2:9"), p("srw")],
                Replication::new(1000, 2, 2),
            ),
            Preset::RggFamilyD3 => (
                GraphSpec::rgg(900, 2.0),
                vec![p("rwc:3"), p("erwc:3:9"), p("srw")],
                Replication::new(1000, 2, 2),
            ),
            Preset::RggSingle => {
                let GraphSpec::Rgg { n, radius, radius_mult, max_retries, .. } = GraphSpec::rgg(900, 2.0)
                else {
                    unreachable!()
                };
                (
                    GraphSpec::Rgg { n, radius, radius_mult, max_retries, single_instance: true },
                    vec![p("rwc:2"), p("erwc:2:9"), p("srw")],
                    Replication::new(500, 2, 2),
                )
            }
            Preset::TorusD2 | Preset::TorusD3 | Preset::TorusD4 => {
                let d = match self {
                    Preset::TorusD2 => 2,
                    Preset::TorusD3 => 3,
                    _ => 4,
                };
                (
                    GraphSpec::torus(30, 30),
                    vec![p(&format!("rwc:{d}")), p(&format!("erwc:{d}:3")), p("srw")],
                    Replication::new(1000, 2, 2),
                )
            }
        };
        ExperimentConfig::new(graph, policies, rep)
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config; its fields take precedence over flags.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output directory for the CSV files.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (output is identical for any value).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Scale a preset: number of graphs (or repetitions of a fixed graph).
    #[arg(long, requires = "preset")]
    pub graphs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Rgg,
    Torus,
    Complete,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, required_unless_present = "graph")]
    pub family: Option<Family>,
    /// Edge-list file instead of a generated family.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub radius_mult: Option<f64>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Choice counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 3, 4])]
    pub d: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    pub h_min: u64,
    #[arg(long, default_value_t = 133)]
    pub h_max: u64,
    #[arg(long, default_value_t = 100)]
    pub graphs: usize,
    #[arg(long, default_value_t = 2)]
    pub starts: usize,
    #[arg(long, default_value_t = 2)]
    pub runs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub walk: WalkArgs,
}

fn parse_policy(s: &str) -> std::result::Result<Policy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InvalidArgument(_)
        | Error::Parse { .. }
        | Error::Json(_)
        | Error::TooLarge { .. }
        | Error::Disconnected => EXIT_USAGE,
        Error::GenerationFailure { .. } => EXIT_GENERATION,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::StuckWalk { .. } | Error::Io(_) | Error::Internal(_) | Error::Context { .. } => EXIT_INTERNAL,
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if let Error::CapExceeded { cap, partial } = e.root() {
                let _ = writeln!(
                    out,
                    "{}",
                    json!({ "error": "cap_exceeded", "step_cap": cap, "partial": partial })
                );
            }
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_graph(path: &PathBuf) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    Graph::from_edge_list(&text).map_err(|e| e.context(format!("parsing {}", path.display())))
}

fn print_json(out: &mut impl Write, value: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn execute(command: Command, out: &mut impl Write) -> Result<()> {
    match command {
        Command::Gen { family } => cmd_gen(family, out),
        Command::Run(args) => cmd_run(args, out),
        Command::Experiment(args) => cmd_experiment(args, out),
        Command::Sweep(args) => cmd_sweep(args, out),
        Command::Stats { graph } => {
            let g = load_graph(&graph)?;
            let stats = g.stats();
            let rec = experiment::recommend_h(&stats).ok();
            print_json(out, &json!({ "stats": stats, "recommended_h": rec }))
        }
        Command::Oracle { graph, start } => {
            let g = load_graph(&graph)?;
            let value = match start {
                Some(s) => {
                    json!({ "start": s, "expected_cover_steps": oracle::exact_cover_expectation(&g, s)? })
                }
                None => {
                    json!({ "cover_time": oracle::exact_cover_time(&g)?, "per_start": oracle::exact_cover_expectations(&g)? })
                }
            };
            print_json(out, &value)
        }
    }
}

fn cmd_gen(family: GenFamily, out: &mut impl Write) -> Result<()> {
    let (graph, path, seed, points) = match family {
        GenFamily::Rgg { n, radius, radius_mult, seed, max_retries, allow_disconnected, out, points } => {
            let seed = seed.unwrap_or_else(experiment::entropy_seed);
            let radius = match radius {
                Some(r) => r,
                None => radius_mult.unwrap_or(2.0) * graph::connectivity_radius(n)?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, pts) = graph::generate_rgg(n, radius, &mut rng, !allow_disconnected, max_retries)?;
            (g, out, Some(seed), points.map(|p| (p, pts)))
        }
        GenFamily::Torus { rows, cols, out } => (graph::generate_torus(rows, cols)?, out, None, None),
        GenFamily::Complete { n, out } => (graph::generate_complete(n)?, out, None, None),
    };
    std::fs::write(&path, graph.to_edge_list())?;
    if let Some((p, pts)) = points {
        std::fs::write(p, pts.to_text())?;
    }
    let stats = graph.stats();
    print_json(
        out,
        &json!({
            "seed": seed,
            "output": path,
            "stats": stats,
            "recommended_h": experiment::recommend_h(&stats).ok(),
        }),
    )
}

fn cmd_run(args: RunArgs, out: &mut impl Write) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let seed = args.seed.unwrap_or_else(experiment::entropy_seed);
    let cap = args.step_cap.unwrap_or_else(|| walk::default_step_cap(g.node_count()));
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let fractions = walk::default_fractions();
    let stderr = std::io::stderr();
    let mut err = stderr.lock();
    let mut dump = |t: &walk::StepTrace| {
        let _ = serde_json::to_writer(&mut err, t);
        let _ = writeln!(err);
    };
    let on_step: Option<&mut dyn FnMut(&walk::StepTrace)> = if args.trace { Some(&mut dump) } else { None };
    let options = args.walk.options();
    let mut record =
        walk::run_replicate_with(&g, args.policy, options, args.start, rng, cap, &fractions, on_step)?;
    record.seed = seed;
    record.graph_hash = g.fingerprint();
    print_json(out, &json!({ "policy": args.policy, "fractions": fractions, "record": record }))
}

fn cmd_experiment(args: ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let mut config = match (&args.config, args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)?
        }
        (None, Some(p)) => p.config(),
        (None, None) => return Err(Error::invalid("either --config or --preset is required")),
    };
    if config.policies.is_empty() {
        return Err(Error::invalid("policy list is empty"));
    }
    if let Some(g) = args.graphs {
        config.replication.graphs = g;
    }
    let seed = config.base_seed.or(args.seed).unwrap_or_else(experiment::entropy_seed);
    config.base_seed = Some(seed);
    config.jobs = config.jobs.or(args.jobs);
    let dir = config
        .output
        .clone()
        .or(args.out)
        .ok_or_else(|| Error::invalid("no output directory (--out or config \"output\")"))?;

    let outcome = experiment::run_experiment(&config, false)?;
    let files = output::experiment_csvs(&outcome);
    let written = output::write_all(&dir, &files)?;
    let summary: Vec<_> = outcome
        .reports
        .iter()
        .map(|pr| {
            json!({
                "policy": pr.policy,
                "mean_cs_norm": pr.report.mean_cs_normalized,
                "mean_mnlcs": pr.report.mean_mnlcs,
                "ct_norm": pr.report.ct_normalized,
                "mnlct": pr.report.mnlct,
                "replicates": pr.report.replicates,
            })
        })
        .collect();
    print_json(out, &json!({ "seed": seed, "files": written, "reports": summary }))
}

fn cmd_sweep(args: SweepArgs, out: &mut impl Write) -> Result<()> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Error::invalid(format!("--{flag} is required for this family")))
    };
    let spec = match (args.graph, args.family) {
        (Some(path), _) => GraphSpec::EdgeList { path },
        (None, Some(Family::Rgg)) => GraphSpec::Rgg {
            n: need(args.n, "n")?,
            radius: args.radius,
            radius_mult: args.radius_mult,
            max_retries: graph::DEFAULT_MAX_RETRIES,
            single_instance: false,
        },
        (None, Some(Family::Torus)) => GraphSpec::torus(need(args.rows, "rows")?, need(args.cols, "cols")?),
        (None, Some(Family::Complete)) => GraphSpec::Complete { n: need(args.n, "n")? },
        (None, None) => return Err(Error::invalid("either --family or --graph is required")),
    };
    if args.d.contains(&0) {
        return Err(Error::invalid("choice counts must be at least 1"));
    }
    let hs: Vec<Reinforcement> = experiment::integer_h_range(args.h_min, args.h_max)?;
    let seed = args.seed.unwrap_or_else(experiment::entropy_seed);
    let rep = Replication::new(args.graphs, args.starts, args.runs);
    let outcome = experiment::sweep_h(&spec, &args.d, &hs, rep, args.walk.options(), seed, args.jobs)?;
    let written = output::write_all(&args.out, &[("sweep.csv", output::sweep_csv(&outcome))])?;
    let stats = spec.build(seed, 0)?.stats();
    let argmin: Vec<_> = outcome.argmin_mnlcs.iter().map(|(d, h)| json!({ "d": d, "h": h })).collect();
    print_json(
        out,
        &json!({
            "seed": seed,
            "files": written,
            "argmin_mean_mnlcs": argmin,
            "heuristic_h_interval": experiment::recommend_h(&stats).ok(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_flag_parsing() {
        let cli = Cli::try_parse_from([
            "walklab", "run", "--graph", "g.el", "--policy", "erwc:2:9", "--start", "3", "--seed", "1",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        assert_eq!(args.policy, Policy::erwc(2, Reinforcement::integer(9).unwrap()).unwrap());
        assert_eq!(args.start, 3);

        let err =
            Cli::try_parse_from(["walklab", "run", "--graph", "g.el", "--policy", "rwc:0"]).unwrap_err();
        assert!(err.use_stderr());
        assert_eq!(main_with_args(["walklab", "run", "--graph", "g.el", "--policy", "rwc:0"]), EXIT_USAGE);
    }

    #[test]
    fn presets_are_valid() {
        for p in Preset::value_variants() {
            let c = p.config();
            assert!(!c.policies.is_empty());
            assert!(c.replication.runs_per_policy() >= 2000);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::GenerationFailure { retries: 3 }), EXIT_GENERATION);
        assert_eq!(exit_code(&Error::invalid("x").context("y")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Internal("x".into())), EXIT_INTERNAL);
    }
}
