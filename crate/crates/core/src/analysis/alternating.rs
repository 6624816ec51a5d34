//! Edge partitions of an equilibrium pair and alternating paths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{EdgeFlow, NetworkInstance};

/// All edges split by comparing risk-averse flow `x` with risk-neutral
/// flow `z`: `A = {x < z}`, `B = {z ≤ x}`. Edges within the tie tolerance
/// go to `B`, so edges unused by both flows are in `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePartition {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    /// Edges of `B` with `|x − z|` within the tie tolerance. Alternating
    /// paths may also traverse these forward, since `ℓ(x) = ℓ(z)` on them.
    #[serde(default)]
    pub ties: Vec<usize>,
}

impl EdgePartition {
    pub fn in_a(&self, e: usize) -> bool {
        self.set_a.binary_search(&e).is_ok()
    }

    pub fn in_b(&self, e: usize) -> bool {
        self.set_b.binary_search(&e).is_ok()
    }
}

/// Tie tolerance used when none is given: `1e-7 · demand`.
pub fn default_tie_tolerance(demand: f64) -> f64 {
    1e-7 * demand
}

pub fn partition_edges(rawe: &EdgeFlow, rnwe: &EdgeFlow, tie: f64) -> EdgePartition {
    let mut set_a = Vec::new();
    let mut set_b = Vec::new();
    let mut ties = Vec::new();
    for (e, (&x, &z)) in rawe.values().iter().zip(rnwe.values()).enumerate() {
        if x < z - tie {
            set_a.push(e);
        } else {
            set_b.push(e);
            if x <= z + tie {
                ties.push(e);
            }
        }
    }
    EdgePartition { set_a, set_b, ties }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `A` edges traversed tail to head.
    Forward,
    /// `B` edges traversed head to tail.
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub direction: Direction,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingPath {
    pub segments: Vec<Segment>,
    /// The quantity η in the topological bound.
    pub forward_subpath_count: usize,
    /// Vertices in visiting order, from source to sink.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Last {
    Start = 0,
    Forward = 1,
    Backward = 2,
}

/// Finds an s–t path in the mixed graph with `A` edges (and ties) forward
/// and `B` edges reversed, minimizing the number of forward segments and then the
/// number of edges. The optimum is a simple path. Ties break towards
/// smaller edge ids.
pub fn find_alternating_path(instance: &NetworkInstance, partition: &EdgePartition) -> Result<AlternatingPath> {
    let n = instance.vertex_count();
    // moves[v] = (edge, target, direction)
    let mut moves: Vec<Vec<(usize, usize, Last)>> = vec![Vec::new(); n];
    for &e in partition.set_a.iter().chain(&partition.ties) {
        let edge = &instance.edges()[e];
        moves[edge.tail].push((e, edge.head, Last::Forward));
    }
    for &e in &partition.set_b {
        let edge = &instance.edges()[e];
        moves[edge.head].push((e, edge.tail, Last::Backward));
    }
    for m in &mut moves {
        m.sort_by_key(|&(e, _, d)| (e, d));
    }

    let state = |v: usize, l: Last| v * 3 + l as usize;
    let mut best = vec![(usize::MAX, usize::MAX); n * 3];
    let mut pred: Vec<Option<(usize, usize, Last)>> = vec![None; n * 3];
    let mut heap = BinaryHeap::new();
    let s = instance.source();
    best[state(s, Last::Start)] = (0, 0);
    heap.push(Reverse(((0usize, 0usize), s, Last::Start)));
    while let Some(Reverse((cost, v, last))) = heap.pop() {
        if cost > best[state(v, last)] {
            continue;
        }
        for &(e, w, dir) in &moves[v] {
            let extra = usize::from(dir == Last::Forward && last != Last::Forward);
            let next = (cost.0 + extra, cost.1 + 1);
            let k = state(w, dir);
            if next < best[k] {
                best[k] = next;
                pred[k] = Some((state(v, last), e, dir));
                heap.push(Reverse((next, w, dir)));
            }
        }
    }

    let t = instance.sink();
    let end = [Last::Start, Last::Forward, Last::Backward]
        .into_iter()
        .map(|l| state(t, l))
        .filter(|&k| best[k].0 != usize::MAX)
        .min_by_key(|&k| (best[k], k));
    let Some(mut k) = end else {
        return Err(Error::NoAlternatingPath(format!(
            "no s-t path with A = {:?} forward and B = {:?} reversed",
            partition.set_a, partition.set_b
        )));
    };

    let mut steps = Vec::new();
    while let Some((prev, e, dir)) = pred[k] {
        steps.push((e, dir));
        k = prev;
    }
    steps.reverse();

    let mut segments: Vec<Segment> = Vec::new();
    let mut vertices = vec![s];
    for (e, dir) in steps {
        let direction = if dir == Last::Forward { Direction::Forward } else { Direction::Backward };
        let edge = &instance.edges()[e];
        vertices.push(if direction == Direction::Forward { edge.head } else { edge.tail });
        match segments.last_mut() {
            Some(seg) if seg.direction == direction => seg.edges.push(e),
            _ => segments.push(Segment { direction, edges: vec![e] }),
        }
    }
    let forward_subpath_count = segments.iter().filter(|s| s.direction == Direction::Forward).count();
    Ok(AlternatingPath { segments, forward_subpath_count, vertices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_recursive, RecursiveFamilySpec};

    fn oracle_partition(level: u32) -> (NetworkInstance, EdgePartition) {
        let (inst, oracle) = build_recursive(&RecursiveFamilySpec::structural(level, 1.0, 1.0, 1.0)).unwrap();
        let x = inst.induced_edge_flow(&oracle.rawe).unwrap();
        let z = inst.induced_edge_flow(&oracle.rnwe).unwrap();
        let p = partition_edges(&x, &z, default_tie_tolerance(1.0));
        (inst, p)
    }

    #[test]
    fn braess_partition() {
        let (_, p) = oracle_partition(1);
        // ids: 0 a_up, 1 risky_low, 2 vertical, 3 risky_up, 4 a_low
        assert_eq!(p.set_a, vec![1, 3]);
        assert_eq!(p.set_b, vec![0, 2, 4]);
    }

    #[test]
    fn identical_flows_put_everything_in_b() {
        let f = EdgeFlow(vec![1.0, 0.5, 0.5]);
        let p = partition_edges(&f, &f, 1e-7);
        assert!(p.set_a.is_empty());
        assert_eq!(p.set_b, vec![0, 1, 2]);
        assert_eq!(p.ties, vec![0, 1, 2]);
    }

    #[test]
    fn tied_bridge_can_be_crossed_forward() {
        // s -0-> 1, then two parallel edges 1 -> 2 with x < z on edge 1
        let inst = NetworkInstance::new(
            3,
            vec![
                crate::network::Edge::deterministic(0, 1, crate::LatencyFn::affine(1.0, 1.0)),
                crate::network::Edge::deterministic(1, 2, crate::LatencyFn::affine(1.0, 0.0)),
                crate::network::Edge::deterministic(1, 2, crate::LatencyFn::affine(2.0, 0.0)),
            ],
            0,
            2,
            1.0,
            0.0,
            crate::RiskModel::MeanVar,
        )
        .unwrap();
        let p = partition_edges(&EdgeFlow(vec![1.0, 0.4, 0.6]), &EdgeFlow(vec![1.0, 0.6, 0.4]), 1e-7);
        assert_eq!(p.set_a, vec![1]);
        assert_eq!(p.ties, vec![0]);
        let path = find_alternating_path(&inst, &p).unwrap();
        assert_eq!(path.forward_subpath_count, 1);
        assert_eq!(path.vertices, vec![0, 1, 2]);
    }

    #[test]
    fn zero_rawe_with_positive_rnwe_is_in_a() {
        let p = partition_edges(&EdgeFlow(vec![0.0, 1.0]), &EdgeFlow(vec![1.0, 0.0]), 1e-7);
        assert_eq!(p.set_a, vec![0]);
        assert_eq!(p.set_b, vec![1]);
    }

    #[test]
    fn near_ties_go_to_b() {
        let p = partition_edges(&EdgeFlow(vec![1.0 - 1e-9]), &EdgeFlow(vec![1.0]), 1e-7);
        assert_eq!(p.set_b, vec![0]);
    }

    #[test]
    fn level_two_path_covers_all_vertices() {
        let (inst, p) = oracle_partition(2);
        let path = find_alternating_path(&inst, &p).unwrap();
        assert_eq!(path.forward_subpath_count, 4);
        let mut seen = path.vertices.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn level_three_has_eight_forward_segments() {
        let (inst, p) = oracle_partition(3);
        assert_eq!(find_alternating_path(&inst, &p).unwrap().forward_subpath_count, 8);
    }

    #[test]
    fn direct_a_path_has_one_segment() {
        let (inst, _) = oracle_partition(1);
        let p = EdgePartition { set_a: vec![1, 4], set_b: vec![], ties: vec![] };
        let path = find_alternating_path(&inst, &p).unwrap();
        assert_eq!(path.forward_subpath_count, 1);
        assert_eq!(path.segments.len(), 1);
    }

    #[test]
    fn missing_path_is_an_error() {
        let (inst, _) = oracle_partition(1);
        let p = EdgePartition { set_a: vec![], set_b: vec![0, 1, 2, 3, 4], ties: vec![] };
        assert!(matches!(find_alternating_path(&inst, &p), Err(Error::NoAlternatingPath(_))));
    }
}
