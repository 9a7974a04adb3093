//! Flow graphs: vertices, oriented edges, and external inflows.
//!
//! Vertices are numbered `1..=n` and edges `1..=m`. Every edge is stored with
//! `tail < head`; its flow is positive when it runs from tail to head.
//!
//! The inflow vector `w` follows the conservation law `D^T q + w = 0` taken
//! literally, so `w_v > 0` means flow is injected into the network at `v` and
//! `w_v < 0` means it is withdrawn.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A pipe segment. Endpoints are 1-based and satisfy `tail < head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    /// Head-loss coefficient: the pressure drop is `mu * q * |q|`.
    pub mu: f64,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    n: usize,
    edges: Vec<Edge>,
    inflow: Vec<f64>,
}

/// Relative tolerance of the balance check on `w`.
pub const BALANCE_TOL: f64 = 1e-9;

impl FlowNetwork {
    /// Builds a network from `(from, to, mu)` triples and the inflow vector.
    ///
    /// Edges are numbered `1..=m` in the given order and reoriented so that
    /// `tail < head`.
    pub fn new<I>(n: usize, edges: I, inflow: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        if inflow.len() != n {
            return Err(Error::DimensionMismatch {
                what: "inflow vector",
                expected: n,
                found: inflow.len(),
            });
        }
        if inflow.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("inflow vector"));
        }

        let mut stored = Vec::new();
        for (i, (from, to, mu)) in edges.into_iter().enumerate() {
            let id = i + 1;
            for v in [from, to] {
                if v == 0 || v > n {
                    return Err(Error::VertexOutOfRange {
                        edge: id,
                        vertex: v,
                    });
                }
            }
            if from == to {
                return Err(Error::SelfLoop { edge: id });
            }
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::NonPositiveMu { edge: id, mu });
            }
            stored.push(Edge {
                id,
                tail: from.min(to),
                head: from.max(to),
                mu,
            });
        }

        let sum: f64 = inflow.iter().sum();
        let scale = inflow.iter().fold(1.0_f64, |acc, w| acc.max(w.abs()));
        if sum.abs() > BALANCE_TOL * scale {
            return Err(Error::UnbalancedConsumption { sum });
        }

        Ok(FlowNetwork {
            n,
            edges: stored,
            inflow,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge by 1-based id.
    pub fn edge(&self, id: usize) -> Option<&Edge> {
        id.checked_sub(1).and_then(|i| self.edges.get(i))
    }

    /// External inflow per vertex (`w`), indexed from 0.
    pub fn inflow(&self) -> &[f64] {
        &self.inflow
    }

    pub fn mu(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.mu).collect()
    }

    pub fn mu_max(&self) -> f64 {
        self.edges.iter().fold(0.0, |acc, e| acc.max(e.mu))
    }

    /// `m - n + 1`, the dimension of the cycle space of a connected graph.
    pub fn cycle_rank(&self) -> isize {
        self.edges.len() as isize - self.n as isize + 1
    }

    /// For each vertex (0-based), the list of `(edge index, neighbour)` pairs,
    /// both 0-based. Edges appear in id order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.tail - 1].push((i, e.head - 1));
            adj[e.head - 1].push((i, e.tail - 1));
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(_, u) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }

    /// Connected, at least two vertices, no cut vertex and no bridge.
    ///
    /// Bridges are excluded as well so that every edge lies on some cycle;
    /// a single edge between two vertices is therefore not biconnected here.
    pub fn is_biconnected(&self) -> bool {
        if self.n < 2 || !self.is_connected() {
            return false;
        }
        let mut dfs = LowLink::new(self);
        dfs.visit(0, usize::MAX);
        !dfs.found_cut_vertex && !dfs.found_bridge
    }

    /// Number of edges that repeat the endpoint pair of an earlier edge.
    pub fn parallel_edge_count(&self) -> usize {
        let mut pairs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.tail, e.head)).collect();
        pairs.sort_unstable();
        pairs.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        IncidenceMatrix::new(self)
    }

    /// `D^T q + w`, the per-vertex conservation defect of the flow `q`.
    pub fn conservation_residual(&self, q: &[f64]) -> Vec<f64> {
        debug_assert_eq!(q.len(), self.edges.len());
        let mut r = self.inflow.clone();
        for (e, &qe) in self.edges.iter().zip(q) {
            r[e.head - 1] += qe;
            r[e.tail - 1] -= qe;
        }
        r
    }

    pub fn validate(&self) -> ValidationReport {
        let imbalance: f64 = self.inflow.iter().sum();
        let scale = self.inflow.iter().fold(1.0_f64, |acc, w| acc.max(w.abs()));
        let connected = self.is_connected();
        ValidationReport {
            vertices: self.n,
            edges: self.edges.len(),
            balanced: imbalance.abs() <= BALANCE_TOL * scale,
            imbalance,
            connected,
            biconnected: connected && self.is_biconnected(),
            parallel_edges: self.parallel_edge_count(),
            cycle_rank: self.cycle_rank(),
        }
    }
}

/// Structural findings about a network. Biconnectivity is informational.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub balanced: bool,
    pub imbalance: f64,
    pub connected: bool,
    pub biconnected: bool,
    pub parallel_edges: usize,
    pub cycle_rank: isize,
}

impl ValidationReport {
    /// True when the network can be analysed (balanced and connected).
    pub fn is_ok(&self) -> bool {
        self.balanced && self.connected
    }
}

struct LowLink<'a> {
    adj: Vec<Vec<(usize, usize)>>,
    order: Vec<usize>,
    low: Vec<usize>,
    counter: usize,
    found_cut_vertex: bool,
    found_bridge: bool,
    _net: &'a FlowNetwork,
}

impl<'a> LowLink<'a> {
    fn new(net: &'a FlowNetwork) -> Self {
        LowLink {
            adj: net.adjacency(),
            order: vec![usize::MAX; net.n],
            low: vec![0; net.n],
            counter: 0,
            found_cut_vertex: false,
            found_bridge: false,
            _net: net,
        }
    }

    // `via` is the edge used to reach `v`; parallel edges back to the parent
    // count as back edges.
    fn visit(&mut self, v: usize, via: usize) {
        self.order[v] = self.counter;
        self.low[v] = self.counter;
        self.counter += 1;
        let mut children = 0;
        for idx in 0..self.adj[v].len() {
            let (e, u) = self.adj[v][idx];
            if e == via {
                continue;
            }
            if self.order[u] == usize::MAX {
                children += 1;
                self.visit(u, e);
                self.low[v] = self.low[v].min(self.low[u]);
                if self.low[u] > self.order[v] {
                    self.found_bridge = true;
                }
                if via != usize::MAX && self.low[u] >= self.order[v] {
                    self.found_cut_vertex = true;
                }
            } else {
                self.low[v] = self.low[v].min(self.order[u]);
            }
        }
        if via == usize::MAX && children > 1 {
            self.found_cut_vertex = true;
        }
    }
}

/// The `m x n` signed incidence matrix: `+1` at the head of each edge,
/// `-1` at its tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl IncidenceMatrix {
    fn new(net: &FlowNetwork) -> Self {
        let (rows, cols) = (net.edge_count(), net.vertex_count());
        let mut data = vec![0i8; rows * cols];
        for (i, e) in net.edges().iter().enumerate() {
            data[i * cols + e.tail - 1] = -1;
            data[i * cols + e.head - 1] = 1;
        }
        IncidenceMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry for 0-based edge index `e` and vertex index `v`.
    pub fn get(&self, e: usize, v: usize) -> i8 {
        self.data[e * self.cols + v]
    }

    pub fn row(&self, e: usize) -> &[i8] {
        &self.data[e * self.cols..(e + 1) * self.cols]
    }

    /// `D^T q`.
    pub fn transpose_mul(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (e, &qe) in q.iter().enumerate() {
            for (v, &d) in self.row(e).iter().enumerate() {
                out[v] += f64::from(d) * qe;
            }
        }
        out
    }
}
