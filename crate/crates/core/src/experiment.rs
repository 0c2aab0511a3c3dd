//! Replicated experiments: graph sampling, start-node schedules, paired
//! policy comparison and the ERWC `h` sweep.
//!
//! Every replicate `(graph, policy, start, run)` draws from its own ChaCha8
//! stream seeded by a stable hash of that tuple and the base seed, so results
//! do not depend on worker count or scheduling. All policies of one
//! experiment see the same graph instances and start nodes.

use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, GraphStats};
use crate::metrics::{Accumulator, ExperimentReport, RunRecord};
use crate::walk::{self, Policy, Reinforcement, WalkOptions};

/// Graphs generated and held in memory at once.
const GRAPH_BATCH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Random geometric graph; `radius` wins over `radius_mult` (a multiple
    /// of the connectivity radius, default 2).
    Rgg {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius_mult: Option<f64>,
        #[serde(default = "default_max_retries")]
        max_retries: u32,
        /// Reuse one sampled instance for every graph repetition.
        #[serde(default)]
        single_instance: bool,
    },
    Torus {
        rows: usize,
        cols: usize,
    },
    Complete {
        n: usize,
    },
    EdgeList {
        path: PathBuf,
    },
}

fn default_max_retries() -> u32 {
    graph::DEFAULT_MAX_RETRIES
}

impl GraphSpec {
    pub fn rgg(n: usize, radius_mult: f64) -> Self {
        GraphSpec::Rgg {
            n,
            radius: None,
            radius_mult: Some(radius_mult),
            max_retries: graph::DEFAULT_MAX_RETRIES,
            single_instance: false,
        }
    }

    pub fn torus(rows: usize, cols: usize) -> Self {
        GraphSpec::Torus { rows, cols }
    }

    /// Radius for RGG specs.
    pub fn radius(&self) -> Result<Option<f64>> {
        match *self {
            GraphSpec::Rgg { n, radius, radius_mult, .. } => match radius {
                Some(r) => Ok(Some(r)),
                None => Ok(Some(radius_mult.unwrap_or(2.0) * graph::connectivity_radius(n)?)),
            },
            _ => Ok(None),
        }
    }

    /// Whether every repetition uses the same graph instance.
    pub fn is_fixed(&self) -> bool {
        match self {
            GraphSpec::Rgg { single_instance, .. } => *single_instance,
            _ => true,
        }
    }

    /// Builds the graph for repetition `graph_index`. Fixed families ignore
    /// the index; RGG samples are seeded from `(base_seed, graph_index)`.
    pub fn build(&self, base_seed: u64, graph_index: u64) -> Result<Graph> {
        match self {
            GraphSpec::Rgg { n, max_retries, single_instance, .. } => {
                let g = if *single_instance { 0 } else { graph_index };
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base_seed, SeedTag::Graph, [g, 0, 0, 0]));
                let radius = self.radius()?.expect("rgg has a radius");
                let (graph, _) = graph::generate_rgg(*n, radius, &mut rng, true, *max_retries)
                    .map_err(|e| e.context(format!("sampling graph {g}")))?;
                Ok(graph)
            }
            GraphSpec::Torus { rows, cols } => graph::generate_torus(*rows, *cols),
            GraphSpec::Complete { n } => graph::generate_complete(*n),
            GraphSpec::EdgeList { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
                Graph::from_edge_list(&text).map_err(|e| e.context(format!("parsing {}", path.display())))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Replication {
    /// Graph samples (or repetitions of a fixed graph).
    pub graphs: usize,
    /// Distinct start nodes per graph.
    pub starts_per_graph: usize,
    /// Runs per start node and policy.
    pub runs_per_start: usize,
}

impl Default for Replication {
    fn default() -> Self {
        Replication { graphs: 1, starts_per_graph: 1, runs_per_start: 1 }
    }
}

impl Replication {
    pub fn new(graphs: usize, starts_per_graph: usize, runs_per_start: usize) -> Self {
        Replication { graphs, starts_per_graph, runs_per_start }
    }

    pub fn runs_per_policy(&self) -> usize {
        self.graphs * self.starts_per_graph * self.runs_per_start
    }

    fn validate(&self) -> Result<()> {
        if self.graphs == 0 || self.starts_per_graph == 0 || self.runs_per_start == 0 {
            return Err(Error::invalid(format!("replication counts must all be at least 1, got {self:?}")));
        }
        Ok(())
    }
}

/// JSON-serializable experiment description. Only `graph` and `policies`
/// are required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub replication: Replication,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    /// Defaults to `10_000 * n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<u64>,
    #[serde(default = "walk::default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default)]
    pub walk: WalkOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSpec, policies: Vec<Policy>, replication: Replication) -> Self {
        ExperimentConfig {
            graph,
            policies,
            replication,
            base_seed: None,
            step_cap: None,
            fractions: walk::default_fractions(),
            walk: WalkOptions::default(),
            output: None,
            jobs: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = Some(seed);
        self
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs);
        self
    }
}

/// Report of one policy within an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: Policy,
    pub report: ExperimentReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub base_seed: u64,
    pub nodes: usize,
    pub fractions: Vec<f64>,
    pub reports: Vec<PolicyReport>,
    /// Per-policy run records ordered by replicate index, when retained.
    #[serde(skip)]
    pub records: Option<Vec<Vec<RunRecord>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SeedTag {
    Replicate = 0,
    Graph = 1,
    Starts = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(base_seed: u64, tag: SeedTag, parts: [u64; 4]) -> u64 {
    let mut h = splitmix64(base_seed ^ 0x5757_4c41_4221_0000 ^ tag as u64);
    for p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Stable seed of replicate `(graph, policy, start, run)`.
pub fn replicate_seed(
    base_seed: u64,
    graph_index: u64,
    policy_index: u64,
    start_index: u64,
    run_index: u64,
) -> u64 {
    derive_seed(base_seed, SeedTag::Replicate, [graph_index, policy_index, start_index, run_index])
}

/// `starts` distinct start nodes for repetition `graph_index`.
pub fn start_nodes(n: usize, starts: usize, base_seed: u64, graph_index: u64) -> Result<Vec<usize>> {
    if starts > n {
        return Err(Error::invalid(format!("cannot draw {starts} distinct start nodes from {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base_seed, SeedTag::Starts, [graph_index, 0, 0, 0]));
    Ok(index::sample(&mut rng, n, starts).into_vec())
}

/// Fresh seed from OS entropy, for runs without an explicit seed.
pub fn entropy_seed() -> u64 {
    use rand::RngCore;
    rand::rngs::OsRng.next_u64()
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(j) if j > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

/// Runs every policy on the configured replication schedule.
///
/// With `keep_records`, the individual run records are returned as well;
/// otherwise they are folded into the reports and dropped.
pub fn run_experiment(config: &ExperimentConfig, keep_records: bool) -> Result<ExperimentOutcome> {
    if config.policies.is_empty() {
        return Err(Error::invalid("experiment needs at least one policy"));
    }
    config.replication.validate()?;
    let base_seed = config.base_seed.unwrap_or(0);
    with_pool(config.jobs, || run_inner(config, base_seed, keep_records))?
}

struct Unit {
    graph_slot: usize,
    graph_index: u64,
    policy_index: usize,
    start_index: usize,
    run_index: usize,
    start: usize,
}

fn run_inner(config: &ExperimentConfig, base_seed: u64, keep_records: bool) -> Result<ExperimentOutcome> {
    let rep = config.replication;
    let policies = &config.policies;
    let fixed =
        config.graph.is_fixed().then(|| config.graph.build(base_seed, 0).map(Arc::new)).transpose()?;
    let n = match &fixed {
        Some(g) => g.node_count(),
        None => match config.graph {
            GraphSpec::Rgg { n, .. } => n,
            _ => unreachable!("only RGG specs are resampled"),
        },
    };
    walk::cover_thresholds(&config.fractions, n)?;
    let step_cap = config.step_cap.unwrap_or_else(|| walk::default_step_cap(n));
    if step_cap == 0 {
        return Err(Error::invalid("step cap must be at least 1"));
    }

    // Seeds must be unique across the whole replicate space.
    let mut seeds = HashSet::with_capacity(rep.runs_per_policy() * policies.len());
    for g in 0..rep.graphs as u64 {
        for p in 0..policies.len() as u64 {
            for s in 0..rep.starts_per_graph as u64 {
                for r in 0..rep.runs_per_start as u64 {
                    if !seeds.insert(replicate_seed(base_seed, g, p, s, r)) {
                        return Err(Error::Internal(format!(
                            "replicate seed collision at ({g}, {p}, {s}, {r})"
                        )));
                    }
                }
            }
        }
    }
    drop(seeds);

    let mut accumulators: Vec<Accumulator> = policies.iter().map(|_| Accumulator::new(n)).collect();
    let mut kept: Vec<Vec<RunRecord>> = vec![Vec::new(); policies.len()];

    for batch_start in (0..rep.graphs).step_by(GRAPH_BATCH) {
        let batch_end = (batch_start + GRAPH_BATCH).min(rep.graphs);
        let graphs: Vec<Arc<Graph>> = match &fixed {
            Some(g) => vec![Arc::clone(g)],
            None => (batch_start..batch_end)
                .into_par_iter()
                .map(|g| config.graph.build(base_seed, g as u64).map(Arc::new))
                .collect::<Result<_>>()?,
        };
        let hashes: Vec<u64> = graphs.iter().map(|g| g.fingerprint()).collect();

        let mut units = Vec::with_capacity(
            (batch_end - batch_start) * policies.len() * rep.starts_per_graph * rep.runs_per_start,
        );
        for g in batch_start..batch_end {
            let slot = if fixed.is_some() { 0 } else { g - batch_start };
            let starts = start_nodes(n, rep.starts_per_graph, base_seed, g as u64)?;
            for policy_index in 0..policies.len() {
                for (start_index, &start) in starts.iter().enumerate() {
                    for run_index in 0..rep.runs_per_start {
                        units.push(Unit {
                            graph_slot: slot,
                            graph_index: g as u64,
                            policy_index,
                            start_index,
                            run_index,
                            start,
                        });
                    }
                }
            }
        }

        let records: Vec<(usize, RunRecord)> = units
            .par_iter()
            .map(|u| {
                let policy = policies[u.policy_index];
                let seed = replicate_seed(
                    base_seed,
                    u.graph_index,
                    u.policy_index as u64,
                    u.start_index as u64,
                    u.run_index as u64,
                );
                let rng = ChaCha8Rng::seed_from_u64(seed);
                let mut record = walk::run_replicate_with(
                    &graphs[u.graph_slot],
                    policy,
                    config.walk,
                    u.start,
                    rng,
                    step_cap,
                    &config.fractions,
                    None,
                )
                .map_err(|e| {
                    e.context(format!(
                        "graph {}, policy {policy}, start {}, run {}",
                        u.graph_index, u.start, u.run_index
                    ))
                })?;
                record.seed = seed;
                record.graph_hash = hashes[u.graph_slot];
                record.replicate_index = ((u.graph_index * rep.starts_per_graph as u64
                    + u.start_index as u64)
                    * rep.runs_per_start as u64)
                    + u.run_index as u64;
                Ok((u.policy_index, record))
            })
            .collect::<Result<_>>()?;

        for (p, record) in records {
            accumulators[p].add(&record)?;
            if keep_records {
                kept[p].push(record);
            }
        }
    }

    let reports = policies
        .iter()
        .zip(accumulators)
        .map(|(&policy, acc)| Ok(PolicyReport { policy, report: acc.finish()? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome {
        base_seed,
        nodes: n,
        fractions: config.fractions.clone(),
        reports,
        records: keep_records.then_some(kept),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: u32,
    pub h: Reinforcement,
    pub mean_cs_normalized: f64,
    pub mean_mnlcs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub base_seed: u64,
    pub rows: Vec<SweepRow>,
    /// For each `d`, the `h` with the lowest mean max node load (smallest
    /// `h` on ties).
    pub argmin_mnlcs: Vec<(u32, Reinforcement)>,
}

/// Runs ERWC(d, h) for every `d` in `ds` and `h` in `hs` on a shared set of
/// graph instances and start nodes.
pub fn sweep_h(
    graph: &GraphSpec,
    ds: &[u32],
    hs: &[Reinforcement],
    replication: Replication,
    walk: WalkOptions,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<SweepOutcome> {
    if ds.is_empty() || hs.is_empty() {
        return Err(Error::invalid("sweep needs at least one d and one h"));
    }
    let policies =
        ds.iter().flat_map(|&d| hs.iter().map(move |&h| Policy::erwc(d, h))).collect::<Result<Vec<_>>>()?;
    let mut config = ExperimentConfig::new(graph.clone(), policies, replication).with_seed(base_seed);
    config.jobs = jobs;
    config.fractions = vec![1.0];
    config.walk = walk;
    let outcome = run_experiment(&config, false)?;

    let rows: Vec<SweepRow> = outcome
        .reports
        .iter()
        .map(|pr| match pr.policy {
            Policy::Erwc { d, h } => SweepRow {
                d,
                h,
                mean_cs_normalized: pr.report.mean_cs_normalized,
                mean_mnlcs: pr.report.mean_mnlcs,
            },
            _ => unreachable!("sweep only runs ERWC"),
        })
        .collect();
    let argmin_mnlcs = ds
        .iter()
        .map(|&d| {
            let best = rows
                .iter()
                .filter(|r| r.d == d)
                .min_by(|a, b| {
                    a.mean_mnlcs.total_cmp(&b.mean_mnlcs).then(a.h.value().total_cmp(&b.h.value()))
                })
                .expect("every d has rows");
            (d, best.h)
        })
        .collect();
    Ok(SweepOutcome { base_seed, rows, argmin_mnlcs })
}

/// Integer `h` values `lo..=hi`.
pub fn integer_h_range(lo: u64, hi: u64) -> Result<Vec<Reinforcement>> {
    if lo > hi {
        return Err(Error::invalid(format!("empty h range {lo}..={hi}")));
    }
    (lo..=hi).map(Reinforcement::integer).collect()
}

/// Heuristic `h` interval `(d_n / 3, d_n / 2)`, floored just above 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HRecommendation {
    pub low: f64,
    pub high: f64,
    /// Always `true`: the interval is an empirical rule of thumb.
    pub heuristic: bool,
}

/// Smallest value the recommended interval may take.
pub const H_FLOOR: f64 = 1.0 + 1e-6;

pub fn recommend_h(stats: &GraphStats) -> Result<HRecommendation> {
    let dn = stats.mean_degree;
    if dn.is_nan() || dn <= 0.0 {
        return Err(Error::invalid("mean degree must be positive"));
    }
    Ok(HRecommendation { low: (dn / 3.0).max(H_FLOOR), high: (dn / 2.0).max(H_FLOOR), heuristic: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_with_mean(dn: f64) -> GraphStats {
        GraphStats {
            nodes: 1,
            edges: 0,
            degree_sum: 0,
            mean_degree: dn,
            min_degree: 0,
            max_degree: 0,
            connected: true,
        }
    }

    #[test]
    fn recommend_h_intervals() {
        let r = recommend_h(&stats_with_mean(27.0)).unwrap();
        assert_eq!((r.low, r.high), (9.0, 13.5));
        assert!(r.heuristic);
        let t = recommend_h(&stats_with_mean(4.0)).unwrap();
        assert!((t.low - 4.0 / 3.0).abs() < 1e-15 && t.high == 2.0);
        let s = recommend_h(&stats_with_mean(3.0)).unwrap();
        assert_eq!(s.low, H_FLOOR);
        assert!(s.low > 1.0);
        assert_eq!(s.high, 1.5);
        assert!(recommend_h(&stats_with_mean(0.0)).is_err());
    }

    #[test]
    fn seeds_are_distinct_across_tuple() {
        let mut seen = HashSet::new();
        for g in 0..20 {
            for p in 0..4 {
                for s in 0..3 {
                    for r in 0..3 {
                        assert!(seen.insert(replicate_seed(7, g, p, s, r)));
                    }
                }
            }
        }
        assert_ne!(replicate_seed(1, 0, 0, 0, 0), replicate_seed(2, 0, 0, 0, 0));
    }

    #[test]
    fn start_nodes_are_distinct_and_stable() {
        let a = start_nodes(50, 10, 3, 4).unwrap();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        assert_eq!(a, start_nodes(50, 10, 3, 4).unwrap());
        assert!(start_nodes(3, 4, 0, 0).is_err());
    }

    #[test]
    fn minimal_schedule_yields_one_record_per_policy() {
        let config = ExperimentConfig::new(
            GraphSpec::torus(4, 4),
            vec![Policy::Srw, Policy::rwc(2).unwrap()],
            Replication::default(),
        )
        .with_seed(5);
        let out = run_experiment(&config, true).unwrap();
        let records = out.records.unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.len() == 1));
        assert_eq!(out.reports[0].report.replicates, 1);
    }

    #[test]
    fn empty_policy_list_rejected() {
        let config = ExperimentConfig::new(GraphSpec::torus(3, 3), vec![], Replication::default());
        assert!(matches!(run_experiment(&config, false), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_replication_rejected() {
        let config =
            ExperimentConfig::new(GraphSpec::torus(3, 3), vec![Policy::Srw], Replication::new(1, 0, 1));
        assert!(run_experiment(&config, false).is_err());
    }

    #[test]
    fn cap_exceeded_propagates_with_context() {
        let mut config =
            ExperimentConfig::new(GraphSpec::torus(10, 10), vec![Policy::Srw], Replication::default());
        config.step_cap = Some(5);
        let err = run_experiment(&config, false).unwrap_err();
        assert!(matches!(err.root(), Error::CapExceeded { cap: 5, .. }));
        assert!(err.to_string().contains("policy srw"));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"graph": {"family": "torus", "rows": 30, "cols": 30}, "policies": ["rwc:2", "erwc:2:3"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.replication, Replication::default());
        assert_eq!(cfg.fractions.len(), 20);
        assert_eq!(cfg.policies[1], Policy::erwc(2, Reinforcement::integer(3).unwrap()).unwrap());
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);

        let rgg: GraphSpec = serde_json::from_str(r#"{"family": "rgg", "n": 900}"#).unwrap();
        let r = rgg.radius().unwrap().unwrap();
        assert!((r - 2.0 * graph::connectivity_radius(900).unwrap()).abs() < 1e-15);
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"graph": {"family": "torus", "rows": 3, "cols": 3}, "policies": ["rwc:0"]}"#
        )
        .is_err());
    }

    #[test]
    fn sweep_single_h_gives_one_row_per_d() {
        let out = sweep_h(
            &GraphSpec::torus(5, 5),
            &[1, 2, 3],
            &[Reinforcement::integer(3).unwrap()],
            Replication::new(2, 1, 1),
            WalkOptions::default(),
            1,
            Some(2),
        )
        .unwrap();
        assert_eq!(out.rows.len(), 3);
        assert_eq!(out.argmin_mnlcs.len(), 3);
        assert!(out.argmin_mnlcs.iter().all(|(_, h)| h.value() == 3.0));
    }
}
