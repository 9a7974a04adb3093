//! Cycle bases and the edge-cycle matrix.
//!
//! A basis cycle is a set of edges with traversal directions: `+1` when the
//! cycle runs along the edge's orientation (tail to head), `-1` against it.
//! The edges may be listed in any order; [`EdgeCycleMatrix::new`] checks that
//! they form one simple closed walk.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loops::LoopSystem;
use crate::network::FlowNetwork;
use crate::reference::ReferenceFlow;

/// One edge of a basis cycle. `edge` is the 1-based edge id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub edge: usize,
    pub dir: i8,
}

impl OrientedEdge {
    pub fn new(edge: usize, dir: i8) -> Self {
        OrientedEdge { edge, dir }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    cycles: Vec<Vec<OrientedEdge>>,
}

impl CycleBasis {
    /// Wraps the given cycles without checking them.
    pub fn new(cycles: Vec<Vec<OrientedEdge>>) -> Self {
        CycleBasis { cycles }
    }

    pub fn cycles(&self) -> &[Vec<OrientedEdge>] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Total length: the sum of the cycle lengths.
    pub fn total_length(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }

    /// The same basis with the orientation of cycle `idx` (0-based) flipped.
    pub fn with_reversed(&self, idx: usize) -> Self {
        let mut out = self.clone();
        for oe in &mut out.cycles[idx] {
            oe.dir = -oe.dir;
        }
        out
    }
}

/// Spanning tree stored as parent pointers (all indices 0-based).
#[derive(Debug, Clone)]
pub struct SpanningTree {
    root: usize,
    parent_edge: Vec<Option<usize>>,
    parent: Vec<usize>,
    depth: Vec<usize>,
    in_tree: Vec<bool>,
}

impl SpanningTree {
    /// Breadth-first tree from `root` (1-based), scanning edges in id order.
    pub fn bfs(net: &FlowNetwork, root: usize) -> Result<Self> {
        if root == 0 || root > net.vertex_count() {
            return Err(Error::VertexOutOfRange {
                edge: 0,
                vertex: root,
            });
        }
        let adj = net.adjacency();
        let mut tree_edges = Vec::with_capacity(net.vertex_count().saturating_sub(1));
        let mut seen = vec![false; net.vertex_count()];
        let mut queue = VecDeque::from([root - 1]);
        seen[root - 1] = true;
        while let Some(v) = queue.pop_front() {
            for &(e, u) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    tree_edges.push(e);
                    queue.push_back(u);
                }
            }
        }
        Self::from_tree_edges(net, root, &tree_edges)
    }

    /// Greedy tree that keeps each edge of `order` (0-based edge indices)
    /// unless it closes a cycle. Rooted at vertex 1.
    pub fn from_edge_order(net: &FlowNetwork, order: &[usize]) -> Result<Self> {
        let mut dsu: Vec<usize> = (0..net.vertex_count()).collect();
        fn find(dsu: &mut [usize], mut v: usize) -> usize {
            while dsu[v] != v {
                dsu[v] = dsu[dsu[v]];
                v = dsu[v];
            }
            v
        }
        let mut tree_edges = Vec::new();
        for &e in order {
            let edge = net.edges()[e];
            let (a, b) = (find(&mut dsu, edge.tail - 1), find(&mut dsu, edge.head - 1));
            if a != b {
                dsu[a] = b;
                tree_edges.push(e);
            }
        }
        Self::from_tree_edges(net, 1, &tree_edges)
    }

    fn from_tree_edges(net: &FlowNetwork, root: usize, tree_edges: &[usize]) -> Result<Self> {
        let n = net.vertex_count();
        if tree_edges.len() + 1 != n {
            return Err(Error::Disconnected);
        }
        let mut in_tree = vec![false; net.edge_count()];
        let mut adj = vec![Vec::new(); n];
        for &e in tree_edges {
            in_tree[e] = true;
            let edge = net.edges()[e];
            adj[edge.tail - 1].push((e, edge.head - 1));
            adj[edge.head - 1].push((e, edge.tail - 1));
        }
        let mut parent_edge = vec![None; n];
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root - 1]);
        seen[root - 1] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &(e, u) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    parent_edge[u] = Some(e);
                    parent[u] = v;
                    depth[u] = depth[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        if reached != n {
            return Err(Error::Disconnected);
        }
        Ok(SpanningTree {
            root: root - 1,
            parent_edge,
            parent,
            depth,
            in_tree,
        })
    }

    /// Root vertex, 0-based.
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.in_tree[e]
    }

    /// Edge index joining `v` to its parent, `None` at the root.
    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        self.parent_edge[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent_edge[v].map(|_| self.parent[v])
    }

    /// Vertices ordered so that every vertex comes after its parent.
    pub fn top_down_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.depth.len()).collect();
        order.sort_by_key(|&v| self.depth[v]);
        order
    }

    /// Tree path from `from` to `to` as `(edge index, from_vertex, to_vertex)` steps.
    fn path(&self, from: usize, to: usize) -> Vec<(usize, usize, usize)> {
        let (mut a, mut b) = (from, to);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let e = self.parent_edge[a].expect("non-root vertex has a parent");
                up.push((e, a, self.parent[a]));
                a = self.parent[a];
            } else {
                let e = self.parent_edge[b].expect("non-root vertex has a parent");
                down.push((e, self.parent[b], b));
                b = self.parent[b];
            }
        }
        up.extend(down.into_iter().rev());
        up
    }
}

/// Fundamental basis of the breadth-first spanning tree rooted at vertex 1.
pub fn fundamental_basis(net: &FlowNetwork) -> Result<CycleBasis> {
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    let tree = SpanningTree::bfs(net, 1)?;
    fundamental_basis_from_tree(net, &tree)
}

/// One cycle per non-tree edge, in edge id order. Each cycle runs along its
/// non-tree edge and returns through the tree.
pub fn fundamental_basis_from_tree(net: &FlowNetwork, tree: &SpanningTree) -> Result<CycleBasis> {
    let mut cycles = Vec::new();
    for (i, e) in net.edges().iter().enumerate() {
        if tree.is_tree_edge(i) {
            continue;
        }
        let mut cycle = vec![OrientedEdge::new(e.id, 1)];
        for (te, from, _) in tree.path(e.head - 1, e.tail - 1) {
            let dir = if net.edges()[te].tail - 1 == from {
                1
            } else {
                -1
            };
            cycle.push(OrientedEdge::new(te + 1, dir));
        }
        cycles.push(cycle);
    }
    if cycles.is_empty() {
        return Err(Error::NoCycles);
    }
    Ok(CycleBasis::new(cycles))
}

/// The `m x k` matrix of `{-1, 0, +1}` relating edges to basis cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCycleMatrix {
    m: usize,
    k: usize,
    data: Vec<i8>,
    total_length: usize,
}

impl EdgeCycleMatrix {
    /// Builds the matrix after checking that every cycle is simple and
    /// closed, that there are `m - n + 1` of them, and that they are
    /// independent over GF(2).
    pub fn new(net: &FlowNetwork, basis: &CycleBasis) -> Result<Self> {
        let (m, n) = (net.edge_count(), net.vertex_count());
        let k = basis.len();
        let expected = net.cycle_rank();
        if expected != k as isize {
            return Err(Error::WrongCycleCount {
                expected: expected.max(0) as usize,
                found: k,
            });
        }
        if k == 0 {
            return Err(Error::NoCycles);
        }
        let mut data = vec![0i8; m * k];
        for (c, cycle) in basis.cycles().iter().enumerate() {
            check_cycle(net, n, c + 1, cycle)?;
            for oe in cycle {
                data[(oe.edge - 1) * k + c] = oe.dir;
            }
        }
        let a = EdgeCycleMatrix {
            m,
            k,
            data,
            total_length: basis.total_length(),
        };
        if a.gf2_rank() != k {
            return Err(Error::DependentCycles);
        }
        Ok(a)
    }

    /// Builds from raw rows without structural checks. Used where a matrix
    /// is given directly.
    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Self {
        let m = rows.len();
        let k = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * k);
        for r in rows {
            assert_eq!(r.as_ref().len(), k);
            data.extend_from_slice(r.as_ref());
        }
        let total_length = data.iter().filter(|&&a| a != 0).count();
        EdgeCycleMatrix {
            m,
            k,
            data,
            total_length,
        }
    }

    pub fn edges(&self) -> usize {
        self.m
    }

    pub fn cycles(&self) -> usize {
        self.k
    }

    /// Entry for 0-based edge `e` and cycle `c`.
    pub fn get(&self, e: usize, c: usize) -> i8 {
        self.data[e * self.k + c]
    }

    pub fn row(&self, e: usize) -> &[i8] {
        &self.data[e * self.k..(e + 1) * self.k]
    }

    /// The total length `l` (number of nonzero entries).
    pub fn total_length(&self) -> usize {
        self.total_length
    }

    pub fn cycle_len(&self, c: usize) -> usize {
        (0..self.m).filter(|&e| self.get(e, c) != 0).count()
    }

    pub fn min_cycle_len(&self) -> usize {
        (0..self.k).map(|c| self.cycle_len(c)).min().unwrap_or(0)
    }

    /// True when every edge lies on at most two basis cycles.
    pub fn is_face_basis(&self) -> bool {
        (0..self.m).all(|e| self.row(e).iter().filter(|&&a| a != 0).count() <= 2)
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.k);
        (0..self.m)
            .map(|e| {
                self.row(e)
                    .iter()
                    .zip(x)
                    .map(|(&a, &xc)| f64::from(a) * xc)
                    .sum()
            })
            .collect()
    }

    /// `A^T v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m);
        let mut out = vec![0.0; self.k];
        for (e, &ve) in v.iter().enumerate() {
            for (c, &a) in self.row(e).iter().enumerate() {
                if a != 0 {
                    out[c] += f64::from(a) * ve;
                }
            }
        }
        out
    }

    /// Rank of `A mod 2`.
    pub fn gf2_rank(&self) -> usize {
        let words = self.m.div_ceil(64);
        let mut cols: Vec<Vec<u64>> = (0..self.k)
            .map(|c| {
                let mut bits = vec![0u64; words];
                for e in 0..self.m {
                    if self.get(e, c) != 0 {
                        bits[e / 64] |= 1 << (e % 64);
                    }
                }
                bits
            })
            .collect();
        let mut rank = 0;
        for bit in 0..self.m {
            let (w, mask) = (bit / 64, 1u64 << (bit % 64));
            let Some(p) = (rank..cols.len()).find(|&c| cols[c][w] & mask != 0) else {
                continue;
            };
            cols.swap(rank, p);
            let pivot = cols[rank].clone();
            for c in 0..cols.len() {
                if c != rank && cols[c][w] & mask != 0 {
                    for (x, y) in cols[c].iter_mut().zip(&pivot) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

fn check_cycle(net: &FlowNetwork, n: usize, idx: usize, cycle: &[OrientedEdge]) -> Result<()> {
    if cycle.is_empty() {
        return Err(Error::InconsistentCycle { cycle: idx });
    }
    let mut used = vec![false; net.edge_count()];
    // next[v] = vertex reached when leaving v along the cycle
    let mut next = vec![usize::MAX; n];
    let mut entered = vec![false; n];
    for oe in cycle {
        let edge = net.edge(oe.edge).ok_or(Error::UnknownEdge {
            cycle: idx,
            edge: oe.edge,
        })?;
        if used[oe.edge - 1] || !(oe.dir == 1 || oe.dir == -1) {
            return Err(Error::InconsistentCycle { cycle: idx });
        }
        used[oe.edge - 1] = true;
        let (from, to) = if oe.dir == 1 {
            (edge.tail - 1, edge.head - 1)
        } else {
            (edge.head - 1, edge.tail - 1)
        };
        if next[from] != usize::MAX || entered[to] {
            return Err(Error::InconsistentCycle { cycle: idx });
        }
        next[from] = to;
        entered[to] = true;
    }
    // every visited vertex is left exactly once and entered exactly once;
    // a single orbit of `next` must cover all of them
    let start = next.iter().position(|&v| v != usize::MAX).unwrap();
    if (0..n).any(|v| (next[v] != usize::MAX) != entered[v]) {
        return Err(Error::InconsistentCycle { cycle: idx });
    }
    let mut steps = 1;
    let mut v = next[start];
    while v != start {
        v = next[v];
        steps += 1;
    }
    if steps != cycle.len() {
        return Err(Error::InconsistentCycle { cycle: idx });
    }
    Ok(())
}

/// Runs `steps` Newton-Raphson iterations from `x = 0` with both bases and
/// reports whether the edge flows agree within `1e-9` after every step.
///
/// A singular Jacobian in either run is returned as an error.
pub fn basis_independence_check(
    net: &FlowNetwork,
    first: &CycleBasis,
    second: &CycleBasis,
    psi: &ReferenceFlow,
    steps: usize,
) -> Result<bool> {
    const FLOW_TOL: f64 = 1e-9;
    let sys_a = LoopSystem::new(net, EdgeCycleMatrix::new(net, first)?, psi.clone())?;
    let sys_b = LoopSystem::new(net, EdgeCycleMatrix::new(net, second)?, psi.clone())?;
    let mut xa = vec![0.0; sys_a.dim()];
    let mut xb = vec![0.0; sys_b.dim()];
    let mut agree = true;
    for _ in 0..steps {
        xa = sys_a.nr_step(&xa)?;
        xb = sys_b.nr_step(&xb)?;
        let (qa, qb) = (sys_a.flows(&xa), sys_b.flows(&xb));
        agree &= crate::inf_dist(&qa, &qb) <= FLOW_TOL;
    }
    Ok(agree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oe(edge: usize, dir: i8) -> OrientedEdge {
        OrientedEdge::new(edge, dir)
    }

    fn parallel3() -> FlowNetwork {
        FlowNetwork::new(2, [(1, 2, 1.0); 3], vec![3.0, -3.0]).unwrap()
    }

    fn k4() -> FlowNetwork {
        FlowNetwork::new(
            4,
            [
                (1, 2, 1.0),
                (2, 3, 1.0),
                (1, 3, 1.0),
                (3, 4, 1.0),
                (1, 4, 1.0),
                (2, 4, 1.0),
            ],
            vec![1.0, 2.0, 0.0, -3.0],
        )
        .unwrap()
    }

    fn k4_faces() -> CycleBasis {
        CycleBasis::new(vec![
            vec![oe(1, -1), oe(2, -1), oe(3, 1)],
            vec![oe(3, -1), oe(4, -1), oe(5, 1)],
            vec![oe(2, 1), oe(4, 1), oe(6, -1)],
        ])
    }

    #[test]
    fn fundamental_basis_of_parallel_edges() {
        let basis = fundamental_basis(&parallel3()).unwrap();
        assert_eq!(
            basis.cycles(),
            &[vec![oe(2, 1), oe(1, -1)], vec![oe(3, 1), oe(1, -1)]]
        );
        EdgeCycleMatrix::new(&parallel3(), &basis).unwrap();
    }

    #[test]
    fn triangle_has_one_cycle() {
        let net =
            FlowNetwork::new(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)], vec![0.0; 3]).unwrap();
        let basis = fundamental_basis(&net).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.cycles()[0].len(), 3);
        let a = EdgeCycleMatrix::new(&net, &basis).unwrap();
        assert_eq!(a.total_length(), 3);
    }

    #[test]
    fn tree_has_no_cycles() {
        let net = FlowNetwork::new(2, [(1, 2, 1.0)], vec![0.0, 0.0]).unwrap();
        assert_eq!(fundamental_basis(&net).unwrap_err(), Error::NoCycles);
    }

    #[test]
    fn k4_face_matrix() {
        let a = EdgeCycleMatrix::new(&k4(), &k4_faces()).unwrap();
        let expected = EdgeCycleMatrix::from_rows(&[
            [-1, 0, 0],
            [-1, 0, 1],
            [1, -1, 0],
            [0, -1, 1],
            [0, 1, 0],
            [0, 0, -1],
        ]);
        assert_eq!(a, expected);
        assert_eq!(a.total_length(), 9);
        assert!(a.is_face_basis());
    }

    #[test]
    fn two_cycle_matrix_from_loop_equations() {
        let basis = CycleBasis::new(vec![vec![oe(1, 1), oe(3, -1)], vec![oe(2, 1), oe(3, -1)]]);
        let a = EdgeCycleMatrix::new(&parallel3(), &basis).unwrap();
        assert_eq!(a, EdgeCycleMatrix::from_rows(&[[1, 0], [0, 1], [-1, -1]]));
        assert_eq!(a.total_length(), 4);
        // the shared edge has two nonzeros in its row
        assert_eq!(a.row(2).iter().filter(|&&x| x != 0).count(), 2);
    }

    #[test]
    fn face_check() {
        let three = EdgeCycleMatrix::from_rows(&[[1, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert!(!three.is_face_basis());
        assert!(EdgeCycleMatrix::from_rows(&[[1], [-1], [1]]).is_face_basis());
    }

    #[test]
    fn rejects_open_or_misdirected_cycles() {
        let net = k4();
        // wrong direction on edge 3
        let bad = CycleBasis::new(vec![
            vec![oe(1, -1), oe(2, -1), oe(3, -1)],
            vec![oe(3, -1), oe(4, -1), oe(5, 1)],
            vec![oe(2, 1), oe(4, 1), oe(6, -1)],
        ]);
        assert_eq!(
            EdgeCycleMatrix::new(&net, &bad).unwrap_err(),
            Error::InconsistentCycle { cycle: 1 }
        );
        // two disjoint closed walks are not one simple cycle
        let net2 = FlowNetwork::new(
            4,
            [
                (1, 2, 1.0),
                (1, 2, 1.0),
                (3, 4, 1.0),
                (3, 4, 1.0),
                (2, 3, 1.0),
            ],
            vec![0.0; 4],
        )
        .unwrap();
        let split = CycleBasis::new(vec![
            vec![oe(1, 1), oe(2, -1), oe(3, 1), oe(4, -1)],
            vec![oe(3, 1), oe(4, -1)],
        ]);
        assert_eq!(
            EdgeCycleMatrix::new(&net2, &split).unwrap_err(),
            Error::InconsistentCycle { cycle: 1 }
        );
        let unknown = CycleBasis::new(vec![vec![oe(9, 1)], vec![oe(1, 1)], vec![oe(2, 1)]]);
        assert_eq!(
            EdgeCycleMatrix::new(&net, &unknown).unwrap_err(),
            Error::UnknownEdge { cycle: 1, edge: 9 }
        );
    }

    #[test]
    fn rejects_dependent_and_miscounted_bases() {
        let net = parallel3();
        let dup = CycleBasis::new(vec![vec![oe(1, 1), oe(2, -1)], vec![oe(2, -1), oe(1, 1)]]);
        assert_eq!(
            EdgeCycleMatrix::new(&net, &dup).unwrap_err(),
            Error::DependentCycles
        );
        let short = CycleBasis::new(vec![vec![oe(1, 1), oe(2, -1)]]);
        assert_eq!(
            EdgeCycleMatrix::new(&net, &short).unwrap_err(),
            Error::WrongCycleCount {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn edge_order_tree_differs_from_bfs() {
        let net = k4();
        let tree = SpanningTree::from_edge_order(&net, &[5, 4, 3, 2, 1, 0]).unwrap();
        let basis = fundamental_basis_from_tree(&net, &tree).unwrap();
        assert_ne!(basis, fundamental_basis(&net).unwrap());
        EdgeCycleMatrix::new(&net, &basis).unwrap();
    }
}
