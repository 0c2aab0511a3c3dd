//! Per-run records and their aggregation into experiment statistics.
//!
//! Sums are accumulated as exact integers, so aggregation is independent of
//! record order and of how the records were sharded before merging. Values
//! are divided by `n` (normalized) only when a report is produced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of one walk that covered its graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub start: usize,
    pub seed: u64,
    pub replicate_index: u64,
    /// Fingerprint of the graph the walk ran on.
    pub graph_hash: u64,
    pub cover_steps: u64,
    /// First step at which each cover fraction of the grid was reached.
    pub partial_cover_steps: Vec<u64>,
    pub visit_counts: Vec<u64>,
    /// Visits to the most visited node at cover.
    pub max_node_load: u64,
}

/// Aggregate statistics of one policy over many runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub nodes: usize,
    pub replicates: usize,
    pub mean_cs_normalized: f64,
    /// Standard error of `mean_cs_normalized`.
    pub se_cs_normalized: f64,
    pub mean_mnlcs: f64,
    pub se_mnlcs: f64,
    /// Worst observed cover steps over `n` (empirical cover time).
    pub ct_normalized: f64,
    /// Max node load of the run with the most cover steps.
    pub mnlct: u64,
    pub bc_cs_normalized: f64,
    /// Max node load of the run with the fewest cover steps.
    pub bc_mnlcs: u64,
    /// Mean partial-cover steps over `n`, aligned with the fraction grid.
    pub partial_cover_curve: Vec<f64>,
    /// `visit_distribution[k]` = nodes whose mean visit count lies in `[k, k+1)`.
    pub visit_distribution: Vec<u64>,
    pub mnl_distribution: Vec<u64>,
    pub cs_distribution: Vec<u64>,
}

/// Mergeable running totals behind an [`ExperimentReport`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Accumulator {
    nodes: usize,
    count: u64,
    cs_sum: u128,
    cs_sq_sum: u128,
    mnl_sum: u128,
    mnl_sq_sum: u128,
    /// (cover steps, load) of the worst run; load ties resolved upward.
    worst: Option<(u64, u64)>,
    /// (cover steps, load) of the best run; load ties resolved downward.
    best: Option<(u64, u64)>,
    partial_sums: Vec<u128>,
    visit_sums: Vec<u128>,
    cs_values: Vec<u64>,
    mnl_values: Vec<u64>,
}

impl Accumulator {
    pub fn new(nodes: usize) -> Self {
        Accumulator { nodes, ..Default::default() }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn add(&mut self, record: &RunRecord) -> Result<()> {
        if record.visit_counts.len() != self.nodes {
            return Err(Error::invalid(format!(
                "record has {} visit counts, expected {}",
                record.visit_counts.len(),
                self.nodes
            )));
        }
        if self.count == 0 {
            self.partial_sums = vec![0; record.partial_cover_steps.len()];
            self.visit_sums = vec![0; self.nodes];
        } else if record.partial_cover_steps.len() != self.partial_sums.len() {
            return Err(Error::invalid("records use different cover-fraction grids"));
        }
        let (cs, mnl) = (record.cover_steps, record.max_node_load);
        self.count += 1;
        self.cs_sum += u128::from(cs);
        self.cs_sq_sum += u128::from(cs) * u128::from(cs);
        self.mnl_sum += u128::from(mnl);
        self.mnl_sq_sum += u128::from(mnl) * u128::from(mnl);
        self.observe_extremes(Some((cs, mnl)), Some((cs, mnl)));
        for (acc, &s) in self.partial_sums.iter_mut().zip(&record.partial_cover_steps) {
            *acc += u128::from(s);
        }
        for (acc, &c) in self.visit_sums.iter_mut().zip(&record.visit_counts) {
            *acc += u128::from(c);
        }
        self.cs_values.push(cs);
        self.mnl_values.push(mnl);
        Ok(())
    }

    fn observe_extremes(&mut self, worst: Option<(u64, u64)>, best: Option<(u64, u64)>) {
        // Worst: most cover steps, then highest load. Best: fewest steps, then lowest load.
        if let Some(w) = worst {
            self.worst = Some(self.worst.map_or(w, |cur| cur.max(w)));
        }
        if let Some(b) = best {
            self.best = Some(self.best.map_or(b, |cur| cur.min(b)));
        }
    }

    /// Combines two accumulators; associative and commutative up to the
    /// order of the raw value lists, which `finish` sorts anyway.
    pub fn merge(&mut self, other: Accumulator) -> Result<()> {
        if other.count == 0 {
            return Ok(());
        }
        if self.count == 0 {
            *self = other;
            return Ok(());
        }
        if self.nodes != other.nodes || self.partial_sums.len() != other.partial_sums.len() {
            return Err(Error::invalid("cannot merge accumulators of different shapes"));
        }
        self.count += other.count;
        self.cs_sum += other.cs_sum;
        self.cs_sq_sum += other.cs_sq_sum;
        self.mnl_sum += other.mnl_sum;
        self.mnl_sq_sum += other.mnl_sq_sum;
        self.observe_extremes(other.worst, other.best);
        for (a, b) in self.partial_sums.iter_mut().zip(other.partial_sums) {
            *a += b;
        }
        for (a, b) in self.visit_sums.iter_mut().zip(other.visit_sums) {
            *a += b;
        }
        self.cs_values.extend(other.cs_values);
        self.mnl_values.extend(other.mnl_values);
        Ok(())
    }

    pub fn finish(mut self) -> Result<ExperimentReport> {
        if self.count == 0 {
            return Err(Error::invalid("cannot aggregate zero records"));
        }
        let n = self.nodes as f64;
        let r = self.count as f64;
        let (worst_cs, mnlct) = self.worst.unwrap_or_default();
        let (best_cs, bc_mnlcs) = self.best.unwrap_or_default();
        self.cs_values.sort_unstable();
        self.mnl_values.sort_unstable();
        Ok(ExperimentReport {
            nodes: self.nodes,
            replicates: self.count as usize,
            mean_cs_normalized: self.cs_sum as f64 / r / n,
            se_cs_normalized: standard_error(self.count, self.cs_sum, self.cs_sq_sum) / n,
            mean_mnlcs: self.mnl_sum as f64 / r,
            se_mnlcs: standard_error(self.count, self.mnl_sum, self.mnl_sq_sum),
            ct_normalized: worst_cs as f64 / n,
            mnlct,
            bc_cs_normalized: best_cs as f64 / n,
            bc_mnlcs,
            partial_cover_curve: self.partial_sums.iter().map(|&s| s as f64 / r / n).collect(),
            visit_distribution: histogram_from_sums(&self.visit_sums, self.count),
            mnl_distribution: self.mnl_values,
            cs_distribution: self.cs_values,
        })
    }
}

/// Standard error of the mean from exact integer moments.
fn standard_error(count: u64, sum: u128, sq_sum: u128) -> f64 {
    if count < 2 {
        return 0.0;
    }
    let c = u128::from(count);
    // count * sq_sum - sum^2 = count^2 * population variance, exact.
    let scaled = (c * sq_sum).saturating_sub(sum * sum) as f64;
    let variance = scaled / (count as f64 * (count - 1) as f64);
    (variance / count as f64).sqrt()
}

fn histogram_from_sums(visit_sums: &[u128], count: u64) -> Vec<u64> {
    let mut bins: Vec<u64> = Vec::new();
    for &s in visit_sums {
        // floor(mean) without leaving integer arithmetic.
        let bin = (s / u128::from(count)) as usize;
        if bins.len() <= bin {
            bins.resize(bin + 1, 0);
        }
        bins[bin] += 1;
    }
    bins
}

/// Aggregates records of runs on graphs with `n` nodes.
pub fn aggregate(records: &[RunRecord], n: usize) -> Result<ExperimentReport> {
    if records.is_empty() {
        return Err(Error::invalid("cannot aggregate zero records"));
    }
    let mut acc = Accumulator::new(n);
    for r in records {
        acc.add(r)?;
    }
    acc.finish()
}

/// Histogram (bin width 1, starting at 0) of the per-node mean visit count.
pub fn visit_histogram(records: &[RunRecord]) -> Vec<u64> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let mut sums = vec![0u128; first.visit_counts.len()];
    for r in records {
        for (s, &c) in sums.iter_mut().zip(&r.visit_counts) {
            *s += u128::from(c);
        }
    }
    histogram_from_sums(&sums, records.len() as u64)
}

/// Relative improvement of `enhanced` over `baseline`, in percent.
pub fn improvement(baseline: f64, enhanced: f64) -> Result<f64> {
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::invalid(format!("improvement baseline must be positive, got {baseline}")));
    }
    Ok((baseline - enhanced) / baseline * 100.0)
}

/// First-order standard error of [`improvement`] for independent estimates.
pub fn improvement_se(baseline: f64, se_baseline: f64, enhanced: f64, se_enhanced: f64) -> f64 {
    let ratio = enhanced / baseline;
    100.0 * ratio * ((se_enhanced / enhanced).powi(2) + (se_baseline / baseline).powi(2)).sqrt()
}
