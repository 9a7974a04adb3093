//! Seeded random networks shared by the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

use pipeloop_core::basis::{fundamental_basis, fundamental_basis_from_tree};
use pipeloop_core::reference::tree_reference_flow;
use pipeloop_core::{
    CycleBasis, EdgeCycleMatrix, FlowNetwork, LoopSystem, OrientedEdge, ReferenceFlow, SpanningTree,
};
use rand::rngs::SmallRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> SmallRng {
    SmallRng::seed_from_u64(seed)
}

/// Connected multigraph with `2 <= n <= max_n`, `n <= m <= max_m`, random
/// `mu` in `[0.5, 2]` and balanced random inflows.
pub fn random_network(rng: &mut SmallRng, max_n: usize, max_m: usize) -> FlowNetwork {
    let n = rng.gen_range(2..=max_n);
    let mut edges = Vec::new();
    for v in 2..=n {
        let u = rng.gen_range(1..v);
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    let extra = rng.gen_range(1..=max_m - (n - 1));
    while edges.len() < n - 1 + extra {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b {
            edges.push((a, b, rng.gen_range(0.5..2.0)));
        }
    }
    edges.shuffle(rng);
    let mut w: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
    w.push(-w.iter().sum::<f64>());
    FlowNetwork::new(n, edges, w).expect("generated network is valid")
}

/// Fundamental basis of a spanning tree grown from a random edge order,
/// made different from `avoid` if possible.
pub fn random_basis(rng: &mut SmallRng, net: &FlowNetwork, avoid: &CycleBasis) -> CycleBasis {
    let mut order: Vec<usize> = (0..net.edge_count()).collect();
    for _ in 0..20 {
        order.shuffle(rng);
        let tree = SpanningTree::from_edge_order(net, &order).unwrap();
        let basis = fundamental_basis_from_tree(net, &tree).unwrap();
        if &basis != avoid {
            return basis;
        }
    }
    avoid.with_reversed(0)
}

/// Tree flow plus a random circulation, so edges generically carry flow.
pub fn random_reference_flow(
    rng: &mut SmallRng,
    net: &FlowNetwork,
    a: &EdgeCycleMatrix,
) -> ReferenceFlow {
    let tree = tree_reference_flow(net).unwrap();
    let z: Vec<f64> = (0..a.cycles()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let psi: Vec<f64> = tree
        .as_slice()
        .iter()
        .zip(a.mul(&z))
        .map(|(p, c)| p + c)
        .collect();
    ReferenceFlow::new(net, psi).unwrap()
}

/// A random network with its fundamental loop system.
pub struct Case {
    pub net: FlowNetwork,
    pub basis: CycleBasis,
    pub system: LoopSystem,
}

pub fn random_case(rng: &mut SmallRng, max_n: usize, max_m: usize) -> Case {
    let net = random_network(rng, max_n, max_m);
    let basis = fundamental_basis(&net).unwrap();
    let a = EdgeCycleMatrix::new(&net, &basis).unwrap();
    let psi = random_reference_flow(rng, &net, &a);
    let system = LoopSystem::new(&net, a, psi).unwrap();
    Case { net, basis, system }
}

/// `rows x cols` grid graph with its square faces as basis.
pub fn grid_case(rng: &mut SmallRng, rows: usize, cols: usize) -> Case {
    let id = |i: usize, j: usize| i * cols + j + 1;
    let mut edges = Vec::new();
    let mut horizontal = vec![vec![0; cols - 1]; rows];
    let mut vertical = vec![vec![0; cols]; rows - 1];
    for i in 0..rows {
        for j in 0..cols - 1 {
            edges.push((id(i, j), id(i, j + 1), rng.gen_range(0.5..2.0)));
            horizontal[i][j] = edges.len();
        }
    }
    for i in 0..rows - 1 {
        for j in 0..cols {
            edges.push((id(i, j), id(i + 1, j), rng.gen_range(0.5..2.0)));
            vertical[i][j] = edges.len();
        }
    }
    let n = rows * cols;
    let mut w: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
    w.push(-w.iter().sum::<f64>());
    let net = FlowNetwork::new(n, edges, w).unwrap();
    let mut cycles = Vec::new();
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            cycles.push(vec![
                OrientedEdge::new(horizontal[i][j], 1),
                OrientedEdge::new(vertical[i][j + 1], 1),
                OrientedEdge::new(horizontal[i + 1][j], -1),
                OrientedEdge::new(vertical[i][j], -1),
            ]);
        }
    }
    let basis = CycleBasis::new(cycles);
    let a = EdgeCycleMatrix::new(&net, &basis).unwrap();
    let psi = random_reference_flow(rng, &net, &a);
    let system = LoopSystem::new(&net, a, psi).unwrap();
    Case { net, basis, system }
}

/// The 4-vertex example with its face basis, reference flow and start.
pub fn k4_case() -> (Case, Vec<f64>) {
    let net = FlowNetwork::new(
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
    .unwrap();
    let oe = OrientedEdge::new;
    let basis = CycleBasis::new(vec![
        vec![oe(1, -1), oe(2, -1), oe(3, 1)],
        vec![oe(3, -1), oe(4, -1), oe(5, 1)],
        vec![oe(2, 1), oe(4, 1), oe(6, -1)],
    ]);
    let a = EdgeCycleMatrix::new(&net, &basis).unwrap();
    let psi = ReferenceFlow::new(&net, vec![1.0, 1.0, 0.0, 1.0, 0.0, 2.0]).unwrap();
    let system = LoopSystem::new(&net, a, psi).unwrap();
    (Case { net, basis, system }, vec![1.38, 1.0, 0.93])
}

/// Three parallel unit edges between two vertices carrying 3 units.
pub fn parallel_case() -> Case {
    let net = FlowNetwork::new(2, [(1, 2, 1.0); 3], vec![3.0, -3.0]).unwrap();
    let oe = OrientedEdge::new;
    let basis = CycleBasis::new(vec![vec![oe(1, 1), oe(3, -1)], vec![oe(2, 1), oe(3, -1)]]);
    let a = EdgeCycleMatrix::new(&net, &basis).unwrap();
    let psi = ReferenceFlow::new(&net, vec![0.0, 0.0, 3.0]).unwrap();
    let system = LoopSystem::new(&net, a, psi).unwrap();
    Case { net, basis, system }
}

/// Uniform point in the infinity-norm ball of `radius` around `center`.
pub fn point_near(rng: &mut SmallRng, center: &[f64], radius: f64) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + rng.gen_range(-radius..=radius))
        .collect()
}
