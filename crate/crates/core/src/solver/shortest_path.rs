use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::network::NetworkInstance;

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on vertex id
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances to the sink under nonnegative edge costs, plus the edge each
/// vertex leaves by on some shortest path.
fn distances_to_sink(instance: &NetworkInstance, costs: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = instance.vertex_count();
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (id, e) in instance.edges().iter().enumerate() {
        into[e.head].push(id);
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut next = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[instance.sink()] = 0.0;
    heap.push(Entry { dist: 0.0, vertex: instance.sink() });
    while let Some(Entry { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &id in &into[v] {
            let u = instance.edges()[id].tail;
            let cand = d + costs[id];
            if cand < dist[u] {
                dist[u] = cand;
                next[u] = Some(id);
                heap.push(Entry { dist: cand, vertex: u });
            }
        }
    }
    (dist, next)
}

/// Cheapest s-t path under `costs`, breaking near-ties toward the
/// lexicographically smallest edge-id sequence. Returns the path and its cost.
pub(crate) fn shortest_path(instance: &NetworkInstance, costs: &[f64]) -> (Vec<usize>, f64) {
    let (dist, next) = distances_to_sink(instance, costs);
    let s = instance.source();
    let t = instance.sink();
    let eps = 1e-12 * (1.0 + dist[s].abs());

    let mut visited = vec![false; instance.vertex_count()];
    let mut path = Vec::new();
    let mut at = s;
    visited[s] = true;
    while at != t {
        let choice = instance.out_edges(at).iter().copied().find(|&id| {
            let w = instance.edges()[id].head;
            !visited[w] && dist[w].is_finite() && costs[id] + dist[w] <= dist[at] + eps
        });
        match choice {
            Some(id) => {
                path.push(id);
                at = instance.edges()[id].head;
                visited[at] = true;
            }
            None => {
                // zero-cost cycles can strand the greedy walk; use the tree path
                path.clear();
                let mut v = s;
                while v != t {
                    let id = next[v].expect("sink reachable from source");
                    path.push(id);
                    v = instance.edges()[id].head;
                }
                break;
            }
        }
    }
    let cost = path.iter().map(|&id| costs[id]).sum();
    (path, cost)
}
