//! Single-walker simulation: the simple random walk (SRW), the random walk
//! with choice RWC(d) and the enhanced random walk with choice ERWC(d, h).
//!
//! Both choice walks first draw a candidate set `M` of `d` neighbors of the
//! current node. By default the draw is `min(d, deg)` distinct neighbors;
//! [`CandidateSampling::WithReplacement`] draws `d` independent neighbors and
//! keeps the distinct ones.
//!
//! RWC(d) moves to the candidate minimizing `c(u) / deg(u)`, where `c` counts
//! visits. [`RwcScore::VisitsPlusOne`] uses `(c(u) + 1) / deg(u)` instead.
//!
//! ERWC(d, h) keeps a per-node load metric. Each move adds `h` to the node
//! entered and 1 to every other neighbor of the node just left; candidates
//! that were never visited take priority, and the walk moves to the
//! candidate minimizing `metric(u) / deg(u)`.
//!
//! Ties go to a uniformly random minimizer. All score comparisons are exact:
//! visit counts are integers and the metric is stored scaled by the
//! denominator of `h`, so it is an integer too.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::RunRecord;

/// The reinforcement increment `h` of ERWC, as a reduced fraction `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Reinforcement {
    num: u64,
    den: u64,
}

impl Reinforcement {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("h has a zero denominator"));
        }
        if num <= den {
            return Err(Error::invalid(format!("h must exceed 1, got {num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Reinforcement { num: num / g, den: den / g })
    }

    pub fn integer(h: u64) -> Result<Self> {
        Self::new(h, 1)
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Reinforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Reinforcement {
    type Err = Error;

    /// Accepts `9`, `5/2` or a plain decimal such as `2.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot parse h from {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse().map_err(|_| bad())?;
            let den = d.trim().parse().map_err(|_| bad())?;
            return Self::new(num, den);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u64.pow(frac.len() as u32);
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let num = int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
            return Self::new(num, den);
        }
        Self::integer(s.trim().parse().map_err(|_| bad())?)
    }
}

impl Serialize for Reinforcement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Reinforcement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the candidate set of a choice walk is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSampling {
    /// `min(d, deg)` distinct neighbors, uniformly without replacement.
    #[default]
    Distinct,
    /// `d` independent uniform draws; duplicates collapse, so `|M| <= d`.
    WithReplacement,
}

impl FromStr for CandidateSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distinct" => Ok(CandidateSampling::Distinct),
            "with-replacement" | "with_replacement" => Ok(CandidateSampling::WithReplacement),
            _ => {
                Err(Error::invalid(format!("unknown sampling {s:?}; expected distinct or with-replacement")))
            }
        }
    }
}

/// RWC candidate score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RwcScore {
    /// `c(u) / deg(u)`: unvisited candidates always score 0.
    #[default]
    Visits,
    /// `(c(u) + 1) / deg(u)`.
    VisitsPlusOne,
}

impl FromStr for RwcScore {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visits" => Ok(RwcScore::Visits),
            "visits-plus-one" | "visits_plus_one" => Ok(RwcScore::VisitsPlusOne),
            _ => Err(Error::invalid(format!("unknown RWC score {s:?}; expected visits or visits-plus-one"))),
        }
    }
}

/// Rule variants shared by all walks of an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkOptions {
    pub sampling: CandidateSampling,
    pub rwc_score: RwcScore,
}

/// Step rule of a walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Srw,
    Rwc { d: u32 },
    Erwc { d: u32, h: Reinforcement },
}

impl Policy {
    pub fn rwc(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("choice count d must be at least 1"));
        }
        Ok(Policy::Rwc { d })
    }

    pub fn erwc(d: u32, h: Reinforcement) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("choice count d must be at least 1"));
        }
        Ok(Policy::Erwc { d, h })
    }

    pub fn choices(&self) -> u32 {
        match *self {
            Policy::Srw => 1,
            Policy::Rwc { d } | Policy::Erwc { d, .. } => d,
        }
    }

    /// Human-readable label, e.g. `ERWC(2,h=9)`.
    pub fn label(&self) -> String {
        match self {
            Policy::Srw => "SRW".to_string(),
            Policy::Rwc { d } => format!("RWC({d})"),
            Policy::Erwc { d, h } => format!("ERWC({d}) h={h}"),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Srw => f.write_str("srw"),
            Policy::Rwc { d } => write!(f, "rwc:{d}"),
            Policy::Erwc { d, h } => write!(f, "erwc:{d}:{h}"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// Tokens: `srw`, `rwc:D`, `erwc:D:H`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let parse_d = |t: &str| -> Result<u32> {
            t.parse().map_err(|_| Error::invalid(format!("bad choice count {t:?} in policy {s:?}")))
        };
        match parts.as_slice() {
            [k] if k.eq_ignore_ascii_case("srw") => Ok(Policy::Srw),
            [k, d] if k.eq_ignore_ascii_case("rwc") => Policy::rwc(parse_d(d)?),
            [k, d, h] if k.eq_ignore_ascii_case("erwc") => Policy::erwc(parse_d(d)?, h.parse()?),
            _ => Err(Error::invalid(format!("unknown policy {s:?}; expected srw, rwc:D or erwc:D:H"))),
        }
    }
}

impl Serialize for Policy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Policy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One decision of a choice-based walk, for debugging.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: u64,
    pub from: usize,
    /// Distinct sampled candidates, after the unvisited filter for ERWC.
    pub candidates: Vec<usize>,
    /// Policy score of each candidate (SRW reports none).
    pub scores: Vec<f64>,
    pub chosen: usize,
}

/// State of a walk that stopped before covering the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialRun {
    pub start: usize,
    pub steps: u64,
    pub covered: usize,
    pub partial_cover_steps: Vec<Option<u64>>,
    pub visit_counts: Vec<u64>,
}

/// Draws the candidate set `M` of `d` neighbors of `current`.
pub fn sample_candidates<R: Rng + ?Sized>(
    graph: &Graph,
    current: usize,
    d: u32,
    sampling: CandidateSampling,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(d as usize);
    fill_candidates(graph.neighbors(current), current, d, sampling, rng, &mut out)?;
    Ok(out)
}

#[inline]
fn fill_candidates<R: Rng + ?Sized>(
    neighbors: &[usize],
    current: usize,
    d: u32,
    sampling: CandidateSampling,
    rng: &mut R,
    out: &mut Vec<usize>,
) -> Result<()> {
    let len = neighbors.len();
    if len == 0 {
        return Err(Error::StuckWalk { node: current });
    }
    out.clear();
    match sampling {
        CandidateSampling::WithReplacement => {
            for _ in 0..d {
                let u = neighbors[rng.gen_range(0..len)];
                if !out.contains(&u) {
                    out.push(u);
                }
            }
        }
        CandidateSampling::Distinct => {
            // Floyd's subset sampling over neighbor positions. For d = 1 this
            // is a single `gen_range(0..len)` draw, the same as one SRW step.
            let k = (d as usize).min(len);
            for j in len - k..len {
                let t = rng.gen_range(0..=j);
                let u = if out.contains(&neighbors[t]) { neighbors[j] } else { neighbors[t] };
                out.push(u);
            }
        }
    }
    Ok(())
}

/// Index of a uniformly random minimizer under `less`/`equal` comparisons.
/// Draws randomness only when a tie actually occurs.
#[inline]
fn argmin_uniform<R, F>(candidates: &[usize], rng: &mut R, mut cmp: F) -> usize
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> std::cmp::Ordering,
{
    use std::cmp::Ordering;
    let mut best = candidates[0];
    let mut ties = 1u32;
    for &u in &candidates[1..] {
        match cmp(u, best) {
            Ordering::Less => {
                best = u;
                ties = 1;
            }
            Ordering::Equal => {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best = u;
                }
            }
            Ordering::Greater => {}
        }
    }
    best
}

/// Mutable state of one replicate.
#[derive(Clone, Debug)]
pub struct Walk<'g, R> {
    graph: &'g Graph,
    policy: Policy,
    options: WalkOptions,
    current: usize,
    steps: u64,
    visits: Vec<u64>,
    /// ERWC metric scaled by the denominator of `h`; empty for other policies.
    metric: Vec<u64>,
    visited: Vec<bool>,
    covered: usize,
    rng: R,
    scratch: Vec<usize>,
}

impl<'g, R: Rng> Walk<'g, R> {
    pub fn new(graph: &'g Graph, policy: Policy, start: usize, rng: R) -> Result<Self> {
        Self::with_options(graph, policy, WalkOptions::default(), start, rng)
    }

    pub fn with_options(
        graph: &'g Graph,
        policy: Policy,
        options: WalkOptions,
        start: usize,
        rng: R,
    ) -> Result<Self> {
        let n = graph.node_count();
        if start >= n {
            return Err(Error::invalid(format!("start node {start} out of range for {n} nodes")));
        }
        if policy.choices() == 0 {
            return Err(Error::invalid("choice count d must be at least 1"));
        }
        let mut visits = vec![0; n];
        let mut visited = vec![false; n];
        visits[start] = 1;
        visited[start] = true;
        let metric = match policy {
            Policy::Erwc { h, .. } => {
                let mut m = vec![0; n];
                m[start] = h.numerator();
                m
            }
            _ => Vec::new(),
        };
        Ok(Walk {
            graph,
            policy,
            options,
            current: start,
            steps: 0,
            visits,
            metric,
            visited,
            covered: 1,
            rng,
            scratch: Vec::with_capacity(policy.choices() as usize),
        })
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn covered(&self) -> usize {
        self.covered
    }

    pub fn is_covered(&self) -> bool {
        self.covered == self.graph.node_count()
    }

    pub fn visits(&self) -> &[u64] {
        &self.visits
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn options(&self) -> WalkOptions {
        self.options
    }

    fn rwc_offset(&self) -> u64 {
        match self.options.rwc_score {
            RwcScore::Visits => 0,
            RwcScore::VisitsPlusOne => 1,
        }
    }

    /// ERWC metric of node `v`; zero for the other policies.
    pub fn metric(&self, v: usize) -> f64 {
        match self.policy {
            Policy::Erwc { h, .. } => self.metric[v] as f64 / h.denominator() as f64,
            _ => 0.0,
        }
    }

    /// Overrides the per-node bookkeeping, for setting up specific situations
    /// in tests. `visits` must be consistent with `visited`.
    #[doc(hidden)]
    pub fn set_state(&mut self, current: usize, visits: &[u64], metric: Option<&[u64]>) {
        self.current = current;
        self.visits.copy_from_slice(visits);
        for (flag, &c) in self.visited.iter_mut().zip(visits) {
            *flag = c > 0;
        }
        self.covered = self.visited.iter().filter(|&&b| b).count();
        self.steps = visits.iter().sum::<u64>().saturating_sub(1);
        if let Some(m) = metric {
            self.metric.copy_from_slice(m);
        }
    }

    /// Advances one step and returns the node moved to.
    pub fn step(&mut self) -> Result<usize> {
        self.advance(None)
    }

    pub fn step_traced(&mut self) -> Result<StepTrace> {
        let mut trace = StepTrace::default();
        self.advance(Some(&mut trace))?;
        Ok(trace)
    }

    fn advance(&mut self, trace: Option<&mut StepTrace>) -> Result<usize> {
        let graph = self.graph;
        let from = self.current;
        let neighbors = graph.neighbors(from);
        if neighbors.is_empty() {
            return Err(Error::StuckWalk { node: from });
        }
        let next = match self.policy {
            Policy::Srw => neighbors[self.rng.gen_range(0..neighbors.len())],
            Policy::Rwc { d } => {
                let sampling = self.options.sampling;
                fill_candidates(neighbors, from, d, sampling, &mut self.rng, &mut self.scratch)?;
                let visits = &self.visits;
                let plus = self.rwc_offset();
                argmin_uniform(&self.scratch, &mut self.rng, |a, b| {
                    let lhs = u128::from(visits[a] + plus) * graph.degree(b) as u128;
                    let rhs = u128::from(visits[b] + plus) * graph.degree(a) as u128;
                    lhs.cmp(&rhs)
                })
            }
            Policy::Erwc { d, .. } => {
                let sampling = self.options.sampling;
                fill_candidates(neighbors, from, d, sampling, &mut self.rng, &mut self.scratch)?;
                let visited = &self.visited;
                if self.scratch.iter().any(|&u| !visited[u]) {
                    self.scratch.retain(|&u| !visited[u]);
                }
                let metric = &self.metric;
                argmin_uniform(&self.scratch, &mut self.rng, |a, b| {
                    let lhs = u128::from(metric[a]) * graph.degree(b) as u128;
                    let rhs = u128::from(metric[b]) * graph.degree(a) as u128;
                    lhs.cmp(&rhs)
                })
            }
        };

        // Scores are captured before the state update below.
        if let Some(t) = trace {
            t.step = self.steps + 1;
            t.from = from;
            t.chosen = next;
            match self.policy {
                Policy::Srw => t.candidates = vec![next],
                Policy::Rwc { .. } => {
                    t.candidates = self.scratch.clone();
                    t.scores = self
                        .scratch
                        .iter()
                        .map(|&u| (self.visits[u] + self.rwc_offset()) as f64 / graph.degree(u) as f64)
                        .collect();
                }
                Policy::Erwc { .. } => {
                    t.candidates = self.scratch.clone();
                    t.scores =
                        self.scratch.iter().map(|&u| self.metric(u) / graph.degree(u) as f64).collect();
                }
            }
        }

        if let Policy::Erwc { h, .. } = self.policy {
            for &k in neighbors {
                self.metric[k] += h.denominator();
            }
            // `next` is a neighbor of `from`, so it received 1 above.
            self.metric[next] += h.numerator() - h.denominator();
        }
        self.steps += 1;
        self.current = next;
        self.visits[next] += 1;
        if !self.visited[next] {
            self.visited[next] = true;
            self.covered += 1;
        }
        Ok(next)
    }
}

/// Node-count thresholds `ceil(f * n)` for each cover fraction `f`.
pub fn cover_thresholds(fractions: &[f64], n: usize) -> Result<Vec<usize>> {
    fractions
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("cover fraction must lie in (0, 1], got {f}")));
            }
            // Absorb rounding noise such as 0.15 * 900 = 135.00000000000003.
            let x = f * n as f64;
            Ok(((x - 1e-9 * x.max(1.0)).ceil() as usize).clamp(1, n))
        })
        .collect()
}

/// Default partial-cover grid: 0.05, 0.10, ..., 1.00.
pub fn default_fractions() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

/// Default step cap: `10_000 * n`.
pub fn default_step_cap(n: usize) -> u64 {
    10_000 * n as u64
}

/// Runs one walk from `start` until every node has been visited.
///
/// The returned record has `seed` and `replicate_index` zeroed; callers that
/// track replicate identity fill them in.
pub fn run_replicate<R: Rng>(
    graph: &Graph,
    policy: Policy,
    start: usize,
    rng: R,
    step_cap: u64,
    fractions: &[f64],
) -> Result<RunRecord> {
    let options = WalkOptions::default();
    run_replicate_with(graph, policy, options, start, rng, step_cap, fractions, None)
}

/// [`run_replicate`] with explicit rule variants and an optional per-step
/// trace callback.
#[allow(clippy::too_many_arguments)]
pub fn run_replicate_with<R: Rng>(
    graph: &Graph,
    policy: Policy,
    options: WalkOptions,
    start: usize,
    rng: R,
    step_cap: u64,
    fractions: &[f64],
    mut on_step: Option<&mut dyn FnMut(&StepTrace)>,
) -> Result<RunRecord> {
    let n = graph.node_count();
    let thresholds = cover_thresholds(fractions, n)?;
    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by_key(|&j| thresholds[j]);

    let mut walk = Walk::with_options(graph, policy, options, start, rng)?;
    let mut partial: Vec<Option<u64>> = vec![None; thresholds.len()];
    let mut pending = 0;
    let mut record_reached = |walk: &Walk<'_, R>, pending: &mut usize| {
        while *pending < order.len() && thresholds[order[*pending]] <= walk.covered() {
            partial[order[*pending]] = Some(walk.steps());
            *pending += 1;
        }
    };
    record_reached(&walk, &mut pending);

    while !walk.is_covered() {
        if walk.steps() >= step_cap {
            return Err(Error::CapExceeded {
                cap: step_cap,
                partial: Box::new(PartialRun {
                    start,
                    steps: walk.steps(),
                    covered: walk.covered(),
                    partial_cover_steps: partial,
                    visit_counts: walk.visits,
                }),
            });
        }
        if let Some(f) = on_step.as_mut() {
            let trace = walk.step_traced()?;
            f(&trace);
        } else {
            walk.step()?;
        }
        record_reached(&walk, &mut pending);
    }

    let visit_counts = walk.visits;
    Ok(RunRecord {
        start,
        seed: 0,
        replicate_index: 0,
        graph_hash: 0,
        cover_steps: walk.steps,
        max_node_load: visit_counts.iter().copied().max().unwrap_or(0),
        partial_cover_steps: partial.into_iter().map(|s| s.unwrap_or(walk.steps)).collect(),
        visit_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_complete, generate_cycle, generate_path, generate_star};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn h(v: u64) -> Reinforcement {
        Reinforcement::integer(v).unwrap()
    }

    /// |observed - p| within 3 binomial standard deviations.
    fn assert_freq(hits: u64, trials: u64, p: f64) {
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let f = hits as f64 / trials as f64;
        assert!((f - p).abs() <= 3.0 * sigma, "frequency {f} vs {p} (3 sigma = {})", 3.0 * sigma);
    }

    #[test]
    fn init_state() {
        let k3 = generate_complete(3).unwrap();
        let w = Walk::new(&k3, Policy::Srw, 0, rng(0)).unwrap();
        assert_eq!(w.visits(), &[1, 0, 0]);
        assert_eq!((w.steps(), w.covered()), (0, 1));

        let w = Walk::new(&k3, Policy::erwc(2, h(9)).unwrap(), 0, rng(0)).unwrap();
        assert_eq!((w.metric(0), w.metric(1), w.metric(2)), (9.0, 0.0, 0.0));
        assert_eq!(w.visited(), &[true, false, false]);

        let k1 = generate_complete(1).unwrap();
        let w = Walk::new(&k1, Policy::Srw, 0, rng(0)).unwrap();
        assert!(w.is_covered());

        assert!(matches!(Walk::new(&k3, Policy::Srw, 3, rng(0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn srw_forced_and_restricted_moves() {
        let p2 = generate_path(2).unwrap();
        let mut w = Walk::new(&p2, Policy::Srw, 0, rng(1)).unwrap();
        assert_eq!(w.step().unwrap(), 1);
        assert_eq!(w.step().unwrap(), 0);

        let c4 = generate_cycle(4).unwrap();
        for seed in 0..200 {
            let mut w = Walk::new(&c4, Policy::Srw, 0, rng(seed)).unwrap();
            assert!(matches!(w.step().unwrap(), 1 | 3));
        }
    }

    #[test]
    fn srw_is_uniform_on_k3() {
        let k3 = generate_complete(3).unwrap();
        let mut r = rng(2);
        let trials = 100_000;
        let mut ones = 0;
        for _ in 0..trials {
            let mut w = Walk::new(&k3, Policy::Srw, 0, &mut r).unwrap();
            if w.step().unwrap() == 1 {
                ones += 1;
            }
        }
        assert_freq(ones, trials, 0.5);
    }

    #[test]
    fn isolated_node_is_stuck() {
        let g = Graph::from_edges(2, &[]).unwrap();
        for policy in [Policy::Srw, Policy::rwc(2).unwrap(), Policy::erwc(2, h(3)).unwrap()] {
            let mut w = Walk::new(&g, policy, 0, rng(0)).unwrap();
            assert!(matches!(w.step(), Err(Error::StuckWalk { node: 0 })));
        }
    }

    #[test]
    fn candidate_sampling() {
        use CandidateSampling::*;
        let star = generate_star(1).unwrap();
        for d in 1..6 {
            for mode in [Distinct, WithReplacement] {
                let m = sample_candidates(&star, 0, d, mode, &mut rng(d as u64)).unwrap();
                assert_eq!(m, vec![1]);
            }
        }
        let k6 = generate_complete(6).unwrap();
        let mut r = rng(3);
        for _ in 0..1000 {
            for mode in [Distinct, WithReplacement] {
                assert_eq!(sample_candidates(&k6, 0, 1, mode, &mut r).unwrap().len(), 1);
                let m = sample_candidates(&k6, 0, 4, mode, &mut r).unwrap();
                assert!((1..=4).contains(&m.len()));
                assert!(m.iter().all(|&u| k6.has_edge(0, u)));
                let mut dedup = m.clone();
                dedup.sort_unstable();
                dedup.dedup();
                assert_eq!(dedup.len(), m.len());
            }
            assert_eq!(sample_candidates(&k6, 0, 4, Distinct, &mut r).unwrap().len(), 4);
            assert_eq!(sample_candidates(&k6, 0, 9, Distinct, &mut r).unwrap().len(), 5);
        }

        // deg 2, d 2: both draws equal with probability 1/2.
        let p3 = generate_path(3).unwrap();
        let trials = 100_000;
        let singles = (0..trials)
            .filter(|_| sample_candidates(&p3, 1, 2, WithReplacement, &mut r).unwrap().len() == 1)
            .count() as u64;
        assert_freq(singles, trials, 0.5);
    }

    #[test]
    fn distinct_subsets_are_uniform() {
        // 2 of 4 neighbors: each of the 6 pairs with probability 1/6.
        let star = generate_star(4).unwrap();
        let mut r = rng(12);
        let trials = 60_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..trials {
            let mut m = sample_candidates(&star, 0, 2, CandidateSampling::Distinct, &mut r).unwrap();
            m.sort_unstable();
            *counts.entry(m).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            assert_freq(c, trials, 1.0 / 6.0);
        }
    }

    /// Node 0 adjacent to 1 (degree 4) and 2 (degree 2).
    fn rwc_fixture() -> Graph {
        Graph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (1, 5), (2, 6)]).unwrap()
    }

    #[test]
    fn rwc_moves_to_lowest_score() {
        let g = rwc_fixture();
        for seed in 0..100 {
            let mut w = Walk::new(&g, Policy::rwc(64).unwrap(), 0, rng(seed)).unwrap();
            // c(1) = 3 -> 3/4; c(2) = 0 -> 0.
            w.set_state(0, &[1, 3, 0, 1, 1, 1, 0], None);
            let trace = w.step_traced().unwrap();
            assert_eq!(trace.chosen, 2);
            let mut cands = trace.candidates.clone();
            cands.sort_unstable();
            assert_eq!(cands, vec![1, 2]);
        }
    }

    #[test]
    fn rwc_score_variants_differ_on_unvisited_candidates() {
        // Both unvisited: c/deg ties at 0, (c+1)/deg prefers the degree-4 node.
        let g = rwc_fixture();
        let plus_one = WalkOptions { rwc_score: RwcScore::VisitsPlusOne, ..WalkOptions::default() };
        let mut r = rng(8);
        let trials = 20_000;
        let mut ones = 0;
        for _ in 0..trials {
            let policy = Policy::rwc(64).unwrap();
            let mut w = Walk::with_options(&g, policy, plus_one, 0, &mut r).unwrap();
            w.set_state(0, &[1, 0, 0, 0, 0, 0, 0], None);
            assert_eq!(w.step().unwrap(), 1);
            let mut w = Walk::new(&g, policy, 0, &mut r).unwrap();
            w.set_state(0, &[1, 0, 0, 0, 0, 0, 0], None);
            if w.step().unwrap() == 1 {
                ones += 1;
            }
        }
        assert_freq(ones, trials, 0.5);
    }

    #[test]
    fn rwc_ties_are_uniform() {
        // 0 adjacent to 1 and 2, both of degree 3, neither visited.
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5)]).unwrap();
        let mut r = rng(4);
        let trials = 100_000;
        let mut ones = 0;
        for _ in 0..trials {
            let mut w = Walk::new(&g, Policy::rwc(64).unwrap(), 0, &mut r).unwrap();
            if w.step().unwrap() == 1 {
                ones += 1;
            }
        }
        assert_freq(ones, trials, 0.5);
    }

    #[test]
    fn erwc_metric_rule() {
        // N(0) = {1, 2}; deg 1 = 2, deg 2 = 1.
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let hv = 4;
        for seed in 0..100 {
            let mut w = Walk::new(&g, Policy::erwc(64, h(hv)).unwrap(), 0, rng(seed)).unwrap();
            w.set_state(0, &[1, 1, 1, 0], Some(&[0, 5, 3, 0]));
            // 5/2 = 2.5 < 3/1
            assert_eq!(w.step().unwrap(), 1);
            assert_eq!(w.metric(1), (5 + hv) as f64);
            assert_eq!(w.metric(2), 4.0);
            assert_eq!(w.metric(0), 0.0);
        }
    }

    #[test]
    fn erwc_prefers_unvisited() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        for seed in 0..100 {
            let mut w = Walk::new(&g, Policy::erwc(64, h(2)).unwrap(), 0, rng(seed)).unwrap();
            w.set_state(0, &[1, 1, 0, 0], Some(&[0, 0, 1000, 0]));
            let t = w.step_traced().unwrap();
            assert_eq!(t.candidates, vec![2]);
            assert_eq!(t.chosen, 2);
        }
    }

    #[test]
    fn erwc_first_step_on_star_is_uniform() {
        let star = generate_star(3).unwrap();
        let mut r = rng(5);
        let trials = 100_000;
        let mut counts = [0u64; 4];
        for _ in 0..trials {
            let mut w = Walk::new(&star, Policy::erwc(3, h(2)).unwrap(), 0, &mut r).unwrap();
            counts[w.step().unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        for &c in &counts[1..] {
            assert_freq(c, trials, 1.0 / 3.0);
        }
    }

    #[test]
    fn single_choice_reproduces_srw_path() {
        let g = generate_cycle(7).unwrap();
        for seed in 0..20 {
            let path = |policy: Policy| {
                let mut w = Walk::new(&g, policy, 3, rng(seed)).unwrap();
                (0..200).map(|_| w.step().unwrap()).collect::<Vec<_>>()
            };
            let srw = path(Policy::Srw);
            assert_eq!(path(Policy::rwc(1).unwrap()), srw);
            assert_eq!(path(Policy::erwc(1, h(5)).unwrap()), srw);
        }
    }

    #[test]
    fn replicate_edge_cases() {
        let k1 = generate_complete(1).unwrap();
        let r = run_replicate(&k1, Policy::Srw, 0, rng(0), 10, &default_fractions()).unwrap();
        assert_eq!((r.cover_steps, r.max_node_load), (0, 1));
        assert!(r.partial_cover_steps.iter().all(|&s| s == 0));

        let p2 = generate_path(2).unwrap();
        for policy in [Policy::Srw, Policy::rwc(3).unwrap(), Policy::erwc(2, h(9)).unwrap()] {
            let r = run_replicate(&p2, policy, 1, rng(1), 10, &[0.5, 1.0]).unwrap();
            assert_eq!(r.cover_steps, 1);
            assert_eq!(r.partial_cover_steps, vec![0, 1]);
            assert_eq!(r.visit_counts, vec![1, 1]);
        }
    }

    #[test]
    fn cap_exceeded_carries_partial_run() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let err = run_replicate(&g, Policy::Srw, 0, rng(0), 50, &[0.5, 1.0]).unwrap_err();
        let Error::CapExceeded { cap, partial } = err else { panic!("{err:?}") };
        assert_eq!(cap, 50);
        assert_eq!(partial.steps, 50);
        assert_eq!(partial.covered, 2);
        assert_eq!(partial.partial_cover_steps, vec![Some(1), None]);
        assert_eq!(partial.visit_counts.iter().sum::<u64>(), 51);
    }

    #[test]
    fn srw_mean_cover_on_k5() {
        // Coupon collector on K_5: 4 * (1 + 1/2 + 1/3 + 1/4) = 25/3.
        let k5 = generate_complete(5).unwrap();
        let mut r = rng(6);
        let reps = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..reps {
            let cs = run_replicate(&k5, Policy::Srw, 0, &mut r, 10_000, &[1.0]).unwrap().cover_steps as f64;
            sum += cs;
            sq += cs * cs;
        }
        let mean = sum / reps as f64;
        let se = ((sq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - 25.0 / 3.0).abs() <= 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn thresholds_absorb_rounding() {
        assert_eq!(cover_thresholds(&[0.15], 900).unwrap(), vec![135]);
        assert_eq!(cover_thresholds(&default_fractions(), 20).unwrap(), (1..=20).collect::<Vec<_>>());
        assert_eq!(cover_thresholds(&[0.01], 10).unwrap(), vec![1]);
        assert!(cover_thresholds(&[0.0], 10).is_err());
        assert!(cover_thresholds(&[1.5], 10).is_err());
    }

    #[test]
    fn reinforcement_parsing() {
        assert_eq!("9".parse::<Reinforcement>().unwrap(), h(9));
        let half = Reinforcement::new(5, 2).unwrap();
        assert_eq!("5/2".parse::<Reinforcement>().unwrap(), half);
        assert_eq!("2.5".parse::<Reinforcement>().unwrap(), half);
        assert_eq!("10/4".parse::<Reinforcement>().unwrap(), half);
        assert_eq!(half.to_string(), "5/2");
        for bad in ["1", "0.5", "1.0", "x", "3/0", "-2", "2."] {
            assert!(bad.parse::<Reinforcement>().is_err(), "{bad}");
        }
    }

    #[test]
    fn policy_tokens() {
        for tok in ["srw", "rwc:2", "erwc:2:9", "erwc:3:5/2"] {
            assert_eq!(tok.parse::<Policy>().unwrap().to_string(), tok);
        }
        for bad in ["rwc:0", "erwc:0:3", "erwc:2:1", "rwc", "walk:2", "rwc:2:3"] {
            assert!(bad.parse::<Policy>().is_err(), "{bad}");
        }
        assert_eq!("erwc:2:9".parse::<Policy>().unwrap().label(), "ERWC(2) h=9");
    }

    #[test]
    fn fractional_h_keeps_exact_metric() {
        let g = generate_cycle(5).unwrap();
        let hr = Reinforcement::new(7, 3).unwrap();
        let mut w = Walk::new(&g, Policy::erwc(2, hr).unwrap(), 0, rng(9)).unwrap();
        let mut extra = 0u64;
        for _ in 0..100 {
            extra += g.degree(w.current()) as u64 - 1;
            w.step().unwrap();
        }
        let total: f64 = (0..5).map(|v| w.metric(v)).sum();
        let want = 7.0 / 3.0 * 101.0 + extra as f64;
        assert!((total - want).abs() < 1e-9);
    }
}
