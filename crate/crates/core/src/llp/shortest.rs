//! Single-source shortest paths as a descending (order-reversed) LLP
//! instance: every distance starts at [`UNREACHABLE`] except the source and
//! only ever decreases.

use alloc::vec;
use alloc::vec::Vec;

use super::{LatticeLinear, Order, Value};

/// Distance of nodes with no path from the source.
pub const UNREACHABLE: Value = Value::MAX;

/// Ensures `G[j] <= min { G[i] + w(i, j) : i a predecessor of j }`.
#[derive(Debug, Clone)]
pub struct ShortestPath {
    source: usize,
    /// `incoming[j]` lists `(i, w(i, j))`.
    incoming: Vec<Vec<(usize, Value)>>,
}

impl ShortestPath {
    /// Builds the problem on nodes `0..n` from directed `(from, to, weight)`
    /// edges.
    ///
    /// # Panics
    ///
    /// If `source` or an edge endpoint is not below `n`.
    pub fn new(n: usize, source: usize, edges: &[(usize, usize, Value)]) -> Self {
        assert!(source < n, "source {source} out of range for {n} nodes");
        let mut incoming = vec![Vec::new(); n];
        for &(from, to, weight) in edges {
            assert!(from < n && to < n, "edge {from}->{to} out of range for {n} nodes");
            incoming[to].push((from, weight));
        }
        ShortestPath { source, incoming }
    }

    fn best_offer(&self, g: &[Value], j: usize) -> Value {
        self.incoming[j]
            .iter()
            .map(|&(i, w)| g[i].saturating_add(w))
            .min()
            .unwrap_or(UNREACHABLE)
    }
}

impl LatticeLinear for ShortestPath {
    fn len(&self) -> usize {
        self.incoming.len()
    }

    fn order(&self) -> Order {
        Order::Descending
    }

    fn initial(&self) -> Vec<Value> {
        let mut g = vec![UNREACHABLE; self.len()];
        g[self.source] = 0;
        g
    }

    fn bound(&self, _j: usize) -> Value {
        0
    }

    fn forbidden(&self, g: &[Value], j: usize) -> bool {
        g[j] > self.best_offer(g, j)
    }

    fn advance(&self, g: &[Value], j: usize) -> Value {
        self.best_offer(g, j)
    }
}
