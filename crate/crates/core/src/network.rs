//! Network instances, edge/path flows, and the cost functionals defined on them.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::LatencyFn;

/// How players aggregate the variability of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskModel {
    /// Path cost is mean plus `gamma` times the path variance (edge-additive).
    MeanVar,
    /// Path cost is mean plus `gamma` times the path standard deviation.
    MeanStdev,
}

impl RiskModel {
    /// Combines a path's mean latency and variance into the perceived cost.
    pub fn path_cost(self, gamma: f64, mean: f64, variance: f64) -> f64 {
        match self {
            RiskModel::MeanVar => mean + gamma * variance,
            RiskModel::MeanStdev => mean + gamma * variance.max(0.0).sqrt(),
        }
    }

    pub fn is_additive(self, gamma: f64) -> bool {
        self == RiskModel::MeanVar || gamma == 0.0
    }
}

impl std::fmt::Display for RiskModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RiskModel::MeanVar => "mean-var",
            RiskModel::MeanStdev => "mean-stdev",
        })
    }
}

/// A directed edge with its mean latency and variance functions.
///
/// `variability` always stores the variance σₑ²; the mean-stdev model takes
/// the square root at path level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub latency: LatencyFn,
    pub variability: LatencyFn,
}

impl Edge {
    pub fn new(tail: usize, head: usize, latency: LatencyFn, variability: LatencyFn) -> Self {
        Edge { tail, head, latency, variability }
    }

    /// An edge with zero variance.
    pub fn deterministic(tail: usize, head: usize, latency: LatencyFn) -> Self {
        Edge::new(tail, head, latency, LatencyFn::zero())
    }
}

/// A single-commodity routing instance. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRecord", into = "InstanceRecord")]
pub struct NetworkInstance {
    vertices: usize,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    demand: f64,
    gamma: f64,
    risk_model: RiskModel,
    out_edges: Vec<Vec<usize>>,
}

/// On-disk layout of an instance.
#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    n: usize,
    s: usize,
    t: usize,
    d: f64,
    gamma: f64,
    risk_model: RiskModel,
    edges: Vec<Edge>,
}

impl TryFrom<InstanceRecord> for NetworkInstance {
    type Error = Error;

    fn try_from(r: InstanceRecord) -> Result<Self> {
        NetworkInstance::new(r.n, r.edges, r.s, r.t, r.d, r.gamma, r.risk_model)
    }
}

impl From<NetworkInstance> for InstanceRecord {
    fn from(i: NetworkInstance) -> Self {
        InstanceRecord {
            n: i.vertices,
            s: i.source,
            t: i.sink,
            d: i.demand,
            gamma: i.gamma,
            risk_model: i.risk_model,
            edges: i.edges,
        }
    }
}

impl NetworkInstance {
    pub fn new(
        vertices: usize,
        edges: Vec<Edge>,
        source: usize,
        sink: usize,
        demand: f64,
        gamma: f64,
        risk_model: RiskModel,
    ) -> Result<Self> {
        if source >= vertices || sink >= vertices {
            return Err(Error::Structural(format!(
                "source {source} or sink {sink} out of range for {vertices} vertices"
            )));
        }
        if source == sink {
            return Err(Error::Structural("source and sink coincide".into()));
        }
        if !(demand >= 0.0) || !demand.is_finite() {
            return Err(Error::Parameter(format!("demand must be >= 0, got {demand}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must be >= 0, got {gamma}")));
        }
        let mut out_edges = vec![Vec::new(); vertices];
        for (id, e) in edges.iter().enumerate() {
            if e.tail >= vertices || e.head >= vertices {
                return Err(Error::Structural(format!(
                    "edge {id} ({} -> {}) references a vertex outside 0..{vertices}",
                    e.tail, e.head
                )));
            }
            e.latency.validate().map_err(|err| Error::Function(format!("edge {id} latency: {err}")))?;
            e.variability.validate().map_err(|err| Error::Function(format!("edge {id} variability: {err}")))?;
            out_edges[e.tail].push(id);
        }
        let inst = NetworkInstance { vertices, edges, source, sink, demand, gamma, risk_model, out_edges };
        if !inst.reachable_from_source()[sink] {
            return Err(Error::Structural(format!("no path from {source} to {sink}")));
        }
        Ok(inst)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn risk_model(&self) -> RiskModel {
        self.risk_model
    }

    /// Outgoing edge ids of `v`, in increasing id order.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.vertices, self.edges.clone(), self.source, self.sink, self.demand, gamma, self.risk_model)
    }

    pub fn with_demand(&self, demand: f64) -> Result<Self> {
        Self::new(self.vertices, self.edges.clone(), self.source, self.sink, demand, self.gamma, self.risk_model)
    }

    /// Same functions, reinterpreted under another risk model.
    pub fn with_risk_model(&self, risk_model: RiskModel) -> Self {
        NetworkInstance { risk_model, ..self.clone() }
    }

    pub fn with_edge(&self, id: usize, edge: Edge) -> Result<Self> {
        if id >= self.edges.len() {
            return Err(Error::Structural(format!("unknown edge id {id}")));
        }
        let mut edges = self.edges.clone();
        edges[id] = edge;
        Self::new(self.vertices, edges, self.source, self.sink, self.demand, self.gamma, self.risk_model)
    }

    fn reachable_from_source(&self) -> Vec<bool> {
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.out_edges[v] {
                let w = self.edges[e].head;
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn reaches_sink(&self) -> Vec<bool> {
        let mut into = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            into[e.head].push(e.tail);
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([self.sink]);
        seen[self.sink] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &into[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Checks that `path` is a simple directed s-t path of known edges.
    pub fn check_path(&self, path: &[usize]) -> Result<()> {
        if path.is_empty() {
            return Err(Error::Structural("empty path".into()));
        }
        let mut visited = vec![false; self.vertices];
        let mut at = self.source;
        visited[at] = true;
        for &id in path {
            let e = self.edges.get(id).ok_or_else(|| Error::Structural(format!("unknown edge id {id}")))?;
            if e.tail != at {
                return Err(Error::Structural(format!(
                    "edge {id} starts at {} but the path is at vertex {at}",
                    e.tail
                )));
            }
            at = e.head;
            if visited[at] {
                return Err(Error::Structural(format!("path revisits vertex {at}")));
            }
            visited[at] = true;
        }
        if at != self.sink {
            return Err(Error::Structural(format!("path ends at {at}, not at the sink {}", self.sink)));
        }
        Ok(())
    }

    fn edge_ref(&self, id: usize) -> Result<&Edge> {
        self.edges.get(id).ok_or_else(|| Error::Structural(format!("unknown edge id {id}")))
    }

    /// Mean latency `Σₑ ℓₑ(fₑ)` of a path.
    pub fn path_mean(&self, path: &[usize], flow: &EdgeFlow) -> Result<f64> {
        path.iter().try_fold(0.0, |acc, &id| Ok(acc + self.edge_ref(id)?.latency.eval(flow.get(id))))
    }

    /// Variance `Σₑ σₑ²(fₑ)` of a path.
    pub fn path_variance(&self, path: &[usize], flow: &EdgeFlow) -> Result<f64> {
        path.iter().try_fold(0.0, |acc, &id| Ok(acc + self.edge_ref(id)?.variability.eval(flow.get(id))))
    }

    /// Perceived path cost under the instance's own risk model and `gamma`.
    pub fn path_cost(&self, path: &[usize], flow: &EdgeFlow) -> Result<f64> {
        self.path_cost_with(path, flow, self.gamma)
    }

    /// Perceived path cost with an explicit risk-aversion coefficient.
    pub fn path_cost_with(&self, path: &[usize], flow: &EdgeFlow, gamma: f64) -> Result<f64> {
        let mean = self.path_mean(path, flow)?;
        let var = self.path_variance(path, flow)?;
        Ok(self.risk_model.path_cost(gamma, mean, var))
    }

    /// Total expected latency `Σₑ fₑ ℓₑ(fₑ)`. Variances never enter.
    pub fn social_cost(&self, flow: &EdgeFlow) -> f64 {
        self.edges.iter().zip(flow.values()).map(|(e, &f)| f * e.latency.eval(f)).sum()
    }

    /// Edge-additive cost `ℓₑ(x) + γ σₑ²(x)`.
    pub fn additive_edge_cost(&self, id: usize, x: f64, gamma: f64) -> f64 {
        let e = &self.edges[id];
        let mean = e.latency.eval(x);
        if gamma == 0.0 {
            mean
        } else {
            mean + gamma * e.variability.eval(x)
        }
    }

    /// Aggregates path amounts onto edges.
    pub fn induced_edge_flow(&self, pf: &PathFlow) -> Result<EdgeFlow> {
        let mut flow = vec![0.0; self.edges.len()];
        for p in &pf.paths {
            self.check_path(&p.edges)?;
            if !(p.amount >= 0.0) {
                return Err(Error::Structural(format!("negative path amount {}", p.amount)));
            }
            for &e in &p.edges {
                flow[e] += p.amount;
            }
        }
        Ok(EdgeFlow(flow))
    }

    /// All simple s-t paths as edge-id sequences, in lexicographic order.
    ///
    /// Fails with [`Error::TooManyPaths`] once more than `cap` paths exist.
    pub fn enumerate_paths(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        if cap == 0 {
            return Err(Error::Parameter("path cap must be at least 1".into()));
        }
        let useful = self.reaches_sink();
        let mut out = Vec::new();
        let mut on_path = vec![false; self.vertices];
        let mut stack: Vec<usize> = Vec::new();
        on_path[self.source] = true;
        self.dfs_paths(self.source, &useful, &mut on_path, &mut stack, &mut out, cap)?;
        Ok(out)
    }

    fn dfs_paths(
        &self,
        v: usize,
        useful: &[bool],
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        for &id in &self.out_edges[v] {
            let w = self.edges[id].head;
            if on_path[w] || !useful[w] {
                continue;
            }
            stack.push(id);
            if w == self.sink {
                if out.len() == cap {
                    return Err(Error::TooManyPaths { cap });
                }
                out.push(stack.clone());
            } else {
                on_path[w] = true;
                self.dfs_paths(w, useful, on_path, stack, out, cap)?;
                on_path[w] = false;
            }
            stack.pop();
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Nonnegative per-edge flow, indexed like [`NetworkInstance::edges`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeFlow(pub Vec<f64>);

impl EdgeFlow {
    pub fn zeros(edge_count: usize) -> Self {
        EdgeFlow(vec![0.0; edge_count])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, id: usize) -> f64 {
        self.0[id]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest absolute per-edge difference.
    pub fn max_abs_diff(&self, other: &EdgeFlow) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Verifies nonnegativity and conservation, with net outflow `demand` at
    /// the source, to absolute tolerance `tol`.
    pub fn check_feasible(&self, instance: &NetworkInstance, demand: f64, tol: f64) -> Result<()> {
        if self.0.len() != instance.edge_count() {
            return Err(Error::Structural(format!(
                "flow has {} entries for {} edges",
                self.0.len(),
                instance.edge_count()
            )));
        }
        let mut net_out = vec![0.0; instance.vertex_count()];
        for (id, e) in instance.edges().iter().enumerate() {
            let f = self.0[id];
            if f < -tol || !f.is_finite() {
                return Err(Error::Structural(format!("edge {id} carries invalid flow {f}")));
            }
            net_out[e.tail] += f;
            net_out[e.head] -= f;
        }
        for (v, &b) in net_out.iter().enumerate() {
            let expected = if v == instance.source() {
                demand
            } else if v == instance.sink() {
                -demand
            } else {
                0.0
            };
            if (b - expected).abs() > tol {
                return Err(Error::Structural(format!(
                    "conservation violated at vertex {v}: net outflow {b}, expected {expected}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAmount {
    pub edges: Vec<usize>,
    pub amount: f64,
}

/// Flow decomposed over an explicit set of paths.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathFlow {
    pub paths: Vec<PathAmount>,
}

impl PathFlow {
    pub fn new() -> Self {
        PathFlow::default()
    }

    pub fn push(&mut self, edges: Vec<usize>, amount: f64) {
        self.paths.push(PathAmount { edges, amount });
    }

    pub fn total(&self) -> f64 {
        self.paths.iter().map(|p| p.amount).sum()
    }

    pub fn positive(&self) -> impl Iterator<Item = &PathAmount> {
        self.paths.iter().filter(|p| p.amount > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_links(l1: LatencyFn, l2: LatencyFn) -> NetworkInstance {
        NetworkInstance::new(
            2,
            vec![Edge::deterministic(0, 1, l1), Edge::deterministic(0, 1, l2)],
            0,
            1,
            1.0,
            0.0,
            RiskModel::MeanVar,
        )
        .unwrap()
    }

    fn line(var: [f64; 2], model: RiskModel) -> NetworkInstance {
        NetworkInstance::new(
            3,
            vec![
                Edge::new(0, 1, LatencyFn::constant(1.0), LatencyFn::constant(var[0])),
                Edge::new(1, 2, LatencyFn::constant(1.0), LatencyFn::constant(var[1])),
            ],
            0,
            2,
            1.0,
            1.0,
            model,
        )
        .unwrap()
    }

    #[test]
    fn mean_stdev_path_cost_takes_root_of_total_variance() {
        let inst = line([9.0, 16.0], RiskModel::MeanStdev);
        let flow = EdgeFlow(vec![1.0, 1.0]);
        assert_eq!(inst.path_cost(&[0, 1], &flow).unwrap(), 7.0);
        let mv = inst.with_risk_model(RiskModel::MeanVar);
        assert_eq!(mv.path_cost(&[0, 1], &flow).unwrap(), 27.0);
    }

    #[test]
    fn zero_gamma_cost_is_mean_under_both_models() {
        let inst = line([9.0, 16.0], RiskModel::MeanStdev).with_gamma(0.0).unwrap();
        let flow = EdgeFlow(vec![1.0, 1.0]);
        let a = inst.path_cost(&[0, 1], &flow).unwrap();
        let b = inst.with_risk_model(RiskModel::MeanVar).path_cost(&[0, 1], &flow).unwrap();
        assert_eq!(a, 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_edge_is_structural_error() {
        let inst = line([0.0, 0.0], RiskModel::MeanVar);
        let flow = EdgeFlow(vec![1.0, 1.0]);
        assert!(matches!(inst.path_cost(&[0, 7], &flow), Err(Error::Structural(_))));
    }

    #[test]
    fn social_cost_uses_means_only() {
        let inst = line([5.0, 5.0], RiskModel::MeanVar);
        assert_eq!(inst.social_cost(&EdgeFlow(vec![1.0, 1.0])), 2.0);
        let zero = inst.with_demand(0.0).unwrap();
        assert_eq!(zero.social_cost(&EdgeFlow::zeros(2)), 0.0);
    }

    #[test]
    fn induced_flow_sums_path_amounts() {
        let inst = two_links(LatencyFn::affine(1.0, 0.0), LatencyFn::affine(1.0, 0.0));
        let mut pf = PathFlow::new();
        pf.push(vec![0], 0.5);
        pf.push(vec![1], 0.5);
        let f = inst.induced_edge_flow(&pf).unwrap();
        assert_eq!(f.values(), &[0.5, 0.5]);
        f.check_feasible(&inst, 1.0, 1e-12).unwrap();

        let single = line([0.0, 0.0], RiskModel::MeanVar);
        let mut pf = PathFlow::new();
        pf.push(vec![0, 1], 1.0);
        assert_eq!(single.induced_edge_flow(&pf).unwrap().values(), &[1.0, 1.0]);
    }

    #[test]
    fn induced_flow_rejects_non_st_path() {
        let inst = line([0.0, 0.0], RiskModel::MeanVar);
        let mut pf = PathFlow::new();
        pf.push(vec![1], 1.0);
        assert!(matches!(inst.induced_edge_flow(&pf), Err(Error::Structural(_))));
    }

    #[test]
    fn constructor_enforces_invariants() {
        let e = || vec![Edge::deterministic(0, 1, LatencyFn::constant(1.0))];
        assert!(NetworkInstance::new(2, e(), 0, 0, 1.0, 0.0, RiskModel::MeanVar).is_err());
        assert!(NetworkInstance::new(2, e(), 1, 0, 1.0, 0.0, RiskModel::MeanVar).is_err());
        assert!(NetworkInstance::new(2, e(), 0, 1, -1.0, 0.0, RiskModel::MeanVar).is_err());
        assert!(NetworkInstance::new(2, e(), 0, 1, 1.0, -0.1, RiskModel::MeanVar).is_err());
        assert!(NetworkInstance::new(1, e(), 0, 1, 1.0, 0.0, RiskModel::MeanVar).is_err());
    }

    #[test]
    fn enumeration_respects_cap_and_order() {
        let single = NetworkInstance::new(
            2,
            vec![Edge::deterministic(0, 1, LatencyFn::constant(1.0))],
            0,
            1,
            1.0,
            0.0,
            RiskModel::MeanVar,
        )
        .unwrap();
        assert_eq!(single.enumerate_paths(1).unwrap(), vec![vec![0]]);
        let pair = two_links(LatencyFn::constant(1.0), LatencyFn::constant(1.0));
        assert_eq!(pair.enumerate_paths(2).unwrap(), vec![vec![0], vec![1]]);
        assert!(matches!(pair.enumerate_paths(1), Err(Error::TooManyPaths { cap: 1 })));
        assert!(pair.enumerate_paths(0).is_err());
    }

    #[test]
    fn feasibility_check_catches_leaks() {
        let inst = line([0.0, 0.0], RiskModel::MeanVar);
        assert!(EdgeFlow(vec![1.0, 0.5]).check_feasible(&inst, 1.0, 1e-9).is_err());
        assert!(EdgeFlow(vec![1.0, 1.0]).check_feasible(&inst, 1.0, 1e-9).is_ok());
    }
}
