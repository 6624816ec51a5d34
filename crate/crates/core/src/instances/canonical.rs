//! Fixed small topologies: the Braess graph and the domino with ears.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::LatencyFn;
use crate::network::{Edge, NetworkInstance, RiskModel};

/// A directed multigraph with a source and sink but no edge functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub vertices: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<(usize, usize)>,
}

/// Mean and variance functions for one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFns {
    pub latency: LatencyFn,
    pub variability: LatencyFn,
}

impl EdgeFns {
    pub fn new(latency: LatencyFn, variability: LatencyFn) -> Self {
        EdgeFns { latency, variability }
    }

    pub fn deterministic(latency: LatencyFn) -> Self {
        EdgeFns { latency, variability: LatencyFn::zero() }
    }
}

impl Topology {
    /// Attaches functions to the arcs, in arc order.
    pub fn instantiate(
        &self,
        fns: Vec<EdgeFns>,
        demand: f64,
        gamma: f64,
        risk_model: RiskModel,
    ) -> Result<NetworkInstance> {
        if fns.len() != self.arcs.len() {
            return Err(Error::Structural(format!(
                "topology has {} arcs but {} function pairs were given",
                self.arcs.len(),
                fns.len()
            )));
        }
        let edges = self
            .arcs
            .iter()
            .zip(fns)
            .map(|(&(tail, head), f)| Edge::new(tail, head, f.latency, f.variability))
            .collect();
        NetworkInstance::new(self.vertices, edges, self.source, self.sink, demand, gamma, risk_model)
    }

    /// Merges the endpoints of each listed arc, drops self-loops and
    /// relabels vertices densely in order of first appearance.
    pub fn contract(&self, arcs: &[usize]) -> Result<Topology> {
        let mut rep: Vec<usize> = (0..self.vertices).collect();
        fn find(rep: &mut [usize], v: usize) -> usize {
            let mut r = v;
            while rep[r] != r {
                r = rep[r];
            }
            rep[v] = r;
            r
        }
        for &a in arcs {
            let &(u, v) = self.arcs.get(a).ok_or_else(|| Error::Structural(format!("no arc {a} to contract")))?;
            let (ru, rv) = (find(&mut rep, u), find(&mut rep, v));
            rep[ru.max(rv)] = ru.min(rv);
        }
        let mut label = vec![usize::MAX; self.vertices];
        let mut next = 0;
        for v in 0..self.vertices {
            let r = find(&mut rep, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            label[v] = label[r];
        }
        let new_arcs = self.arcs.iter().map(|&(u, v)| (label[u], label[v])).filter(|(u, v)| u != v).collect();
        Ok(Topology { vertices: next, source: label[self.source], sink: label[self.sink], arcs: new_arcs })
    }

    /// True when, ignoring parallel duplicates, this is the directed Braess
    /// graph: two middle vertices `x`, `y` with arcs `s→x`, `s→y`, `x→y`,
    /// `x→t`, `y→t` and nothing else.
    pub fn is_braess(&self) -> bool {
        if self.vertices != 4 || self.source == self.sink {
            return false;
        }
        let distinct: BTreeSet<(usize, usize)> = self.arcs.iter().copied().collect();
        if distinct.len() != 5 {
            return false;
        }
        let middle: Vec<usize> = (0..4).filter(|&v| v != self.source && v != self.sink).collect();
        let (s, t) = (self.source, self.sink);
        [(middle[0], middle[1]), (middle[1], middle[0])].iter().any(|&(x, y)| {
            let want: BTreeSet<(usize, usize)> = [(s, x), (s, y), (x, y), (x, t), (y, t)].into_iter().collect();
            want == distinct
        })
    }
}

/// The Braess graph. Vertices `s = 0`, `u = 1`, `w = 2`, `t = 3`; arcs in
/// order upper-left `s→u`, lower-left `s→w`, vertical `u→w`, upper-right
/// `u→t`, lower-right `w→t`.
pub fn braess_topology() -> Topology {
    Topology { vertices: 4, source: 0, sink: 3, arcs: vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)] }
}

/// Functions for the five Braess edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraessFunctions {
    pub upper_left: EdgeFns,
    pub lower_left: EdgeFns,
    pub vertical: EdgeFns,
    pub upper_right: EdgeFns,
    pub lower_right: EdgeFns,
}

impl BraessFunctions {
    /// Deterministic textbook example: `x` on the two threshold edges,
    /// 1 on the straight edges, 0 on the vertical edge.
    pub fn classic() -> Self {
        let x = EdgeFns::deterministic(LatencyFn::affine(1.0, 0.0));
        let one = EdgeFns::deterministic(LatencyFn::constant(1.0));
        BraessFunctions {
            upper_left: x.clone(),
            lower_left: one.clone(),
            vertical: EdgeFns::deterministic(LatencyFn::zero()),
            upper_right: one,
            lower_right: x,
        }
    }

    fn into_vec(self) -> Vec<EdgeFns> {
        vec![self.upper_left, self.lower_left, self.vertical, self.upper_right, self.lower_right]
    }
}

impl Default for BraessFunctions {
    /// The level-one worst case with `r_A = r_N = 1` and `γκ = 1`.
    fn default() -> Self {
        let a = EdgeFns::deterministic(LatencyFn::PiecewiseLinear {
            breakpoints: vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)],
        });
        let risky = EdgeFns::new(LatencyFn::constant(1.0), LatencyFn::constant(1.0));
        BraessFunctions {
            upper_left: a.clone(),
            lower_left: risky.clone(),
            vertical: EdgeFns::deterministic(LatencyFn::constant(1.0)),
            upper_right: risky,
            lower_right: a,
        }
    }
}

pub fn build_braess(fns: BraessFunctions, demand: f64, gamma: f64, risk_model: RiskModel) -> Result<NetworkInstance> {
    braess_topology().instantiate(fns.into_vec(), demand, gamma, risk_model)
}

/// Arc ids of the two verticals whose contraction yields the Braess graph.
pub const DOMINO_VERTICALS: [usize; 2] = [3, 6];

/// The domino with ears: a 2×3 grid with two vertical ears, oriented so
/// that every vertex lies on an s–t path.
///
/// Vertices `s = 0`, `v1..v4 = 1..4`, `t = 5`. Arcs in order:
/// `s→v1`, `s→v2`, `s→v4`, `v2→v1`, `v2→v3`, `v1→t`, `v4→v3`, `v3→t`,
/// `v4→t`. Arcs [`DOMINO_VERTICALS`] are the verticals `v2→v1` and `v4→v3`.
pub fn build_domino_with_ears() -> Topology {
    Topology {
        vertices: 6,
        source: 0,
        sink: 5,
        arcs: vec![(0, 1), (0, 2), (0, 4), (2, 1), (2, 3), (1, 5), (4, 3), (3, 5), (4, 5)],
    }
}

/// Contracting the two verticals of the domino with ears gives Braess.
pub fn domino_contraction_self_test() -> Result<bool> {
    Ok(build_domino_with_ears().contract(&DOMINO_VERTICALS)?.is_braess())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn braess_is_braess() {
        assert!(braess_topology().is_braess());
        let mut flipped = braess_topology();
        flipped.arcs[2] = (2, 1);
        assert!(flipped.is_braess());
        let mut broken = braess_topology();
        broken.arcs[2] = (0, 3);
        assert!(!broken.is_braess());
    }

    #[test]
    fn domino_shape() {
        let d = build_domino_with_ears();
        assert_eq!(d.vertices, 6);
        assert_eq!(d.arcs.len(), 9);
        let inst = d
            .instantiate(vec![EdgeFns::deterministic(LatencyFn::constant(1.0)); 9], 1.0, 0.0, RiskModel::MeanVar)
            .unwrap();
        let paths = inst.enumerate_paths(100).unwrap();
        assert_eq!(paths.len(), 5);
        // every vertex lies on some path
        let mut seen = [false; 6];
        for p in &paths {
            for &e in p {
                seen[inst.edges()[e].tail] = true;
                seen[inst.edges()[e].head] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn domino_contracts_to_braess() {
        assert!(domino_contraction_self_test().unwrap());
        // contracting a different pair does not
        assert!(!build_domino_with_ears().contract(&[0, 8]).unwrap().is_braess());
    }

    #[test]
    fn classic_braess_paths() {
        let inst = build_braess(BraessFunctions::classic(), 1.0, 0.0, RiskModel::MeanVar).unwrap();
        assert_eq!(inst.enumerate_paths(10).unwrap().len(), 3);
    }

    #[test]
    fn instantiate_checks_arity() {
        assert!(braess_topology().instantiate(vec![], 1.0, 0.0, RiskModel::MeanVar).is_err());
    }
}
