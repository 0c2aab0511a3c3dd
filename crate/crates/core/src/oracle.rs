//! Exact expected cover steps of the simple random walk on small graphs.
//!
//! The walk is an absorbing Markov chain on states `(visited set, current
//! node)`. The visited set never shrinks, so the expectation equations for
//! one set only reference states with the same set or strict supersets.
//! Processing sets from the largest bitmask down, each block is a dense
//! system of at most `n` unknowns, solved by Gaussian elimination with
//! partial pivoting:
//!
//! ```text
//! E[S, v] = 1 + (1 / deg v) * sum over u in N(v) of E[S | {u}, u]
//! ```
//!
//! with `E[V, v] = 0`. Only sets whose induced subgraph is connected can
//! arise, so other sets are skipped.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph the oracle accepts.
pub const MAX_ORACLE_NODES: usize = 20;

struct CoverTable {
    n: usize,
    /// Expected remaining steps per reachable visited set, indexed by the
    /// rank of the current node among the set's members.
    values: Vec<Option<Box<[f64]>>>,
}

impl CoverTable {
    fn lookup(&self, mask: u32, node: usize) -> f64 {
        let rank = (mask & ((1u32 << node) - 1)).count_ones() as usize;
        self.values[mask as usize].as_ref().expect("superset solved first")[rank]
    }

    fn build(graph: &Graph) -> Result<Self> {
        let n = graph.node_count();
        if n > MAX_ORACLE_NODES {
            return Err(Error::TooLarge { n, limit: MAX_ORACLE_NODES });
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let nbr_masks: Vec<u32> =
            (0..n).map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u))).collect();
        let full: u32 = (1u32 << n) - 1;
        let mut values: Vec<Option<Box<[f64]>>> = vec![None; full as usize + 1];
        values[full as usize] = Some(vec![0.0; n].into_boxed_slice());
        let mut table = CoverTable { n, values };

        let mut members = Vec::with_capacity(n);
        for mask in (1..full).rev() {
            if !induces_connected(mask, &nbr_masks) {
                continue;
            }
            members.clear();
            members.extend((0..n).filter(|&v| mask & (1 << v) != 0));
            let k = members.len();
            // Row i: E_i - sum_{u in N(v_i) ∩ S} E_u / deg = 1 + sum_{u outside S} E[S+u, u] / deg
            let mut a = vec![0.0; k * k];
            let mut b = vec![0.0; k];
            for (i, &v) in members.iter().enumerate() {
                let inv_deg = 1.0 / graph.degree(v) as f64;
                a[i * k + i] = 1.0;
                b[i] = 1.0;
                for &u in graph.neighbors(v) {
                    if mask & (1 << u) != 0 {
                        let j = (mask & ((1u32 << u) - 1)).count_ones() as usize;
                        a[i * k + j] -= inv_deg;
                    } else {
                        b[i] += inv_deg * table.lookup(mask | (1 << u), u);
                    }
                }
            }
            let x = solve_dense(&mut a, &mut b, k)?;
            table.values[mask as usize] = Some(x.into_boxed_slice());
        }
        Ok(table)
    }

    fn expected_from(&self, start: usize) -> f64 {
        self.lookup(1 << start, start)
    }
}

fn induces_connected(mask: u32, nbr_masks: &[u32]) -> bool {
    let first = mask.trailing_zeros();
    let mut seen = 1u32 << first;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = nbr_masks[v] & mask & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == mask
}

/// Solves `a x = b` in place (row-major `k x k`), partial pivoting.
fn solve_dense(a: &mut [f64], b: &mut [f64], k: usize) -> Result<Vec<f64>> {
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
            .expect("non-empty range");
        if a[pivot * k + col].abs() < 1e-300 {
            return Err(Error::Internal("singular cover-time system".into()));
        }
        if pivot != col {
            for c in 0..k {
                a.swap(pivot * k + c, col * k + c);
            }
            b.swap(pivot, col);
        }
        let diag = a[col * k + col];
        for row in col + 1..k {
            let factor = a[row * k + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for c in col..k {
                a[row * k + c] -= factor * a[col * k + c];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let tail: f64 = (row + 1..k).map(|c| a[row * k + c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row * k + row];
    }
    Ok(x)
}

/// Expected number of SRW steps from `start` until every node is visited.
pub fn exact_cover_expectation(graph: &Graph, start: usize) -> Result<f64> {
    let n = graph.node_count();
    if start >= n {
        return Err(Error::invalid(format!("start node {start} out of range for {n} nodes")));
    }
    if n == 1 {
        return Ok(0.0);
    }
    Ok(CoverTable::build(graph)?.expected_from(start))
}

/// Expected cover steps from every start node, sharing one table.
pub fn exact_cover_expectations(graph: &Graph) -> Result<Vec<f64>> {
    if graph.node_count() == 1 {
        return Ok(vec![0.0]);
    }
    let table = CoverTable::build(graph)?;
    Ok((0..table.n).map(|s| table.expected_from(s)).collect())
}

/// Cover time: the largest expected cover steps over all start nodes.
pub fn exact_cover_time(graph: &Graph) -> Result<f64> {
    Ok(exact_cover_expectations(graph)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_complete, generate_cycle, generate_path, generate_star};

    fn harmonic(k: usize) -> f64 {
        (1..=k).map(|i| 1.0 / i as f64).sum()
    }

    #[test]
    fn two_node_path() {
        assert_eq!(exact_cover_expectation(&generate_path(2).unwrap(), 0).unwrap(), 1.0);
    }

    #[test]
    fn complete_graphs_match_coupon_collector() {
        for n in 2..=8 {
            let g = generate_complete(n).unwrap();
            let want = (n - 1) as f64 * harmonic(n - 1);
            for got in exact_cover_expectations(&g).unwrap() {
                assert!((got - want).abs() < 1e-9, "K_{n}: {got} vs {want}");
            }
        }
        let k4 = exact_cover_time(&generate_complete(4).unwrap()).unwrap();
        assert!((k4 - 5.5).abs() < 1e-12);
    }

    #[test]
    fn cycles_match_closed_form() {
        for n in 3..=9 {
            let got = exact_cover_expectation(&generate_cycle(n).unwrap(), 0).unwrap();
            let want = (n * (n - 1)) as f64 / 2.0;
            assert!((got - want).abs() < 1e-9, "C_{n}: {got}");
        }
    }

    #[test]
    fn path_three_ends_versus_middle() {
        // From an end, cover = hitting the far end: (n-1)^2 = 4.
        // From the middle: one step to either end, then 4 more.
        let p3 = generate_path(3).unwrap();
        let all = exact_cover_expectations(&p3).unwrap();
        assert!((all[0] - 4.0).abs() < 1e-12, "{all:?}");
        assert!((all[1] - 5.0).abs() < 1e-12, "{all:?}");
        assert!((all[2] - 4.0).abs() < 1e-12);
        assert!((exact_cover_time(&p3).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn paths_from_end_are_squared() {
        // Covering P_n from an endpoint is hitting the far end: (n-1)^2.
        for n in 2..=10 {
            let got = exact_cover_expectation(&generate_path(n).unwrap(), 0).unwrap();
            assert!((got - ((n - 1) * (n - 1)) as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn star_from_center() {
        // Every other step returns to the center: 2 * coupon collector - 1.
        let k = 5;
        let got = exact_cover_expectation(&generate_star(k).unwrap(), 0).unwrap();
        let want = 2.0 * k as f64 * harmonic(k) - 1.0;
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn single_node_and_errors() {
        let g = generate_complete(1).unwrap();
        assert_eq!(exact_cover_time(&g).unwrap(), 0.0);
        assert!(matches!(
            exact_cover_expectation(&Graph::from_edges(3, &[(0, 1)]).unwrap(), 0),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            exact_cover_expectation(&generate_path(21).unwrap(), 0),
            Err(Error::TooLarge { n: 21, limit: 20 })
        ));
        assert!(exact_cover_expectation(&generate_path(3).unwrap(), 3).is_err());
    }
}
