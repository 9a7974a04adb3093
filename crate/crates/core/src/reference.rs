//! Reference flows: any edge flow `psi` with `D^T psi + w = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::SpanningTree;
use crate::error::{Error, Result};
use crate::network::FlowNetwork;

/// Admission threshold for a user-supplied reference flow.
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFlow {
    flows: Vec<f64>,
}

impl ReferenceFlow {
    /// Accepts `psi` if it conserves flow on `net`.
    pub fn new(net: &FlowNetwork, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != net.edge_count() {
            return Err(Error::DimensionMismatch {
                what: "reference flow",
                expected: net.edge_count(),
                found: psi.len(),
            });
        }
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reference flow"));
        }
        if !check_reference_flow(net, &psi) {
            return Err(Error::NonConserving {
                defect: crate::inf_norm(&net.conservation_residual(&psi)),
            });
        }
        Ok(ReferenceFlow { flows: psi })
    }

    /// Wraps `psi` without checking conservation.
    pub fn new_unchecked(psi: Vec<f64>) -> Self {
        ReferenceFlow { flows: psi }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flows
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.flows
    }

    /// `max_e |psi_e|`.
    pub fn max_abs(&self) -> f64 {
        crate::inf_norm(&self.flows)
    }
}

/// True iff `||D^T psi + w||_inf <= 1e-9`.
pub fn check_reference_flow(net: &FlowNetwork, psi: &[f64]) -> bool {
    psi.len() == net.edge_count()
        && crate::inf_norm(&net.conservation_residual(psi)) <= CONSERVATION_TOL
}

/// Routes all inflow along the breadth-first spanning tree rooted at
/// vertex 1; non-tree edges carry nothing.
pub fn tree_reference_flow(net: &FlowNetwork) -> Result<ReferenceFlow> {
    let tree = SpanningTree::bfs(net, 1)?;
    Ok(tree_reference_flow_on(net, &tree))
}

/// Tree routing on a given spanning tree, eliminating leaves towards the root.
pub fn tree_reference_flow_on(net: &FlowNetwork, tree: &SpanningTree) -> ReferenceFlow {
    let mut surplus: Vec<f64> = net.inflow().to_vec();
    let mut psi = vec![0.0; net.edge_count()];
    for &v in tree.top_down_order().iter().rev() {
        let (Some(e), Some(p)) = (tree.parent_edge(v), tree.parent(v)) else {
            continue;
        };
        // the subtree of v must export its surplus to the parent
        let s = surplus[v];
        psi[e] = if net.edges()[e].tail - 1 == v { s } else { -s };
        surplus[p] += s;
    }
    ReferenceFlow { flows: psi }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parallel3() -> FlowNetwork {
        FlowNetwork::new(2, [(1, 2, 1.0); 3], vec![3.0, -3.0]).unwrap()
    }

    #[test]
    fn two_vertex_tree_flow() {
        let psi = tree_reference_flow(&parallel3()).unwrap();
        assert_eq!(psi.as_slice(), &[3.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_boundary_gives_zero_flow() {
        let net =
            FlowNetwork::new(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)], vec![0.0; 3]).unwrap();
        assert_eq!(tree_reference_flow(&net).unwrap().as_slice(), &[0.0; 3]);
    }

    #[test]
    fn tree_flow_conserves() {
        let net = FlowNetwork::new(
            5,
            [
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 1, 1.0),
                (2, 5, 1.0),
            ],
            vec![2.5, -1.0, 0.75, -3.0, 0.75],
        )
        .unwrap();
        let psi = tree_reference_flow(&net).unwrap();
        assert!(crate::inf_norm(&net.conservation_residual(psi.as_slice())) <= 1e-12);
    }

    #[test]
    fn user_supplied_flows() {
        let net = parallel3();
        assert!(check_reference_flow(&net, &[0.0, 0.0, 3.0]));
        assert!(!check_reference_flow(&net, &[0.0, 0.0, 2.0]));
        assert!(!check_reference_flow(&net, &[0.0, 3.0]));
        let zero = FlowNetwork::new(2, [(1, 2, 1.0)], vec![0.0, 0.0]).unwrap();
        assert!(check_reference_flow(&zero, &[0.0]));
        assert!(ReferenceFlow::new(&net, vec![0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn disconnected_network_has_no_tree_flow() {
        let net = FlowNetwork::new(4, [(1, 2, 1.0), (3, 4, 1.0)], vec![0.0; 4]).unwrap();
        assert_eq!(tree_reference_flow(&net).unwrap_err(), Error::Disconnected);
    }
}
