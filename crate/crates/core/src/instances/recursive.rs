//! The recursive Braess-based worst-case family `Gⁱ(r_A, r_N)`.
//!
//! Level 1 is the Braess graph. Level `i` is a Braess topology whose
//! lower-left and upper-right edges are replaced by copies of level `i − 1`,
//! and whose upper-left and lower-right edges carry the threshold latency
//! `a_i`. Vertical edges have mean 1 and variance 0; the leaf "risky" edges
//! have mean 1 and variance κ; `a_j` edges have variance 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::LatencyFn;
use crate::network::{Edge, NetworkInstance, PathFlow, RiskModel};

/// Variance-to-mean ratio of the risky edges. Generators fold the whole
/// product γκ into γ.
pub const KAPPA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyVariant {
    /// Threshold functions pinned by the equilibrium demands `r_A`, `r_N`.
    Structural,
    /// Threshold functions with smoothness `μᵢ = 1 − 2^{−i}` at the RAWE.
    Functional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursiveFamilySpec {
    pub level: u32,
    /// Demand routed by risk-averse players.
    pub r_a: f64,
    /// Demand routed by risk-neutral players.
    pub r_n: f64,
    /// The product γκ.
    pub gamma_kappa: f64,
    pub variant: FamilyVariant,
}

impl RecursiveFamilySpec {
    pub fn structural(level: u32, r_a: f64, r_n: f64, gamma_kappa: f64) -> Self {
        RecursiveFamilySpec { level, r_a, r_n, gamma_kappa, variant: FamilyVariant::Structural }
    }

    pub fn functional(level: u32, gamma_kappa: f64) -> Self {
        RecursiveFamilySpec { level, r_a: 1.0, r_n: 1.0, gamma_kappa, variant: FamilyVariant::Functional }
    }

    /// `1 − 2^{−i}`, the smoothness of the functional variant's thresholds.
    pub fn mu(&self) -> f64 {
        1.0 - 0.5f64.powi(self.level as i32)
    }

    /// `1 + 2^i γκ`, the perceived cost (and mean latency) on RAWE paths.
    pub fn rawe_path_cost(&self) -> f64 {
        1.0 + 2f64.powi(self.level as i32) * self.gamma_kappa
    }

    pub fn vertex_count(&self) -> usize {
        1usize << (self.level + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.level == 0 || self.level > 20 {
            return Err(Error::Parameter(format!("level must be in 1..=20, got {}", self.level)));
        }
        for (name, v) in [("r_a", self.r_a), ("r_n", self.r_n), ("gamma_kappa", self.gamma_kappa)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        match self.variant {
            FamilyVariant::Structural => check_level_precondition(self.level, self.r_a, self.r_n),
            FamilyVariant::Functional => {
                if self.r_a != 1.0 || self.r_n != 1.0 {
                    return Err(Error::Parameter("the functional variant fixes r_a = r_n = 1".into()));
                }
                Ok(())
            }
        }
    }
}

/// `2^i r_A > (2^i − 1) r_N`
fn check_level_precondition(level: u32, r_a: f64, r_n: f64) -> Result<()> {
    let p = 2f64.powi(level as i32);
    if p * r_a > (p - 1.0) * r_n {
        Ok(())
    } else {
        Err(Error::Parameter(format!("level {level} needs 2^i r_a > (2^i - 1) r_n, got r_a = {r_a}, r_n = {r_n}")))
    }
}

/// Closed-form equilibria of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFlows {
    pub rawe: PathFlow,
    pub rnwe: PathFlow,
    pub rawe_cost: f64,
    pub rnwe_cost: f64,
    pub expected_pra: f64,
}

/// Edge ids of one level of the recursion.
#[derive(Debug, Clone)]
enum Component {
    Base { a_up: usize, risky_low: usize, vertical: usize, risky_up: usize, a_low: usize },
    Nested { a_up: usize, lower: Box<Component>, vertical: usize, upper: Box<Component>, a_low: usize },
}

impl Component {
    fn ends(&self) -> (usize, usize, usize) {
        match self {
            Component::Base { a_up, vertical, a_low, .. } | Component::Nested { a_up, vertical, a_low, .. } => {
                (*a_up, *vertical, *a_low)
            }
        }
    }

    /// Paths without a vertical edge.
    fn parallel_paths(&self) -> Vec<Vec<usize>> {
        match self {
            Component::Base { a_up, risky_low, risky_up, a_low, .. } => {
                vec![vec![*a_up, *risky_up], vec![*risky_low, *a_low]]
            }
            Component::Nested { a_up, lower, upper, a_low, .. } => {
                let mut out: Vec<Vec<usize>> = upper.parallel_paths().into_iter().map(|p| prepend(*a_up, p)).collect();
                out.extend(lower.parallel_paths().into_iter().map(|p| append(p, *a_low)));
                out
            }
        }
    }

    /// Paths with exactly one vertical edge.
    fn zigzag_paths(&self) -> Vec<Vec<usize>> {
        let (a_up, vertical, a_low) = self.ends();
        let mut out = vec![vec![a_up, vertical, a_low]];
        if let Component::Nested { lower, upper, .. } = self {
            out.extend(upper.zigzag_paths().into_iter().map(|p| prepend(a_up, p)));
            out.extend(lower.zigzag_paths().into_iter().map(|p| append(p, a_low)));
        }
        out
    }

    fn structural_rawe(&self, level: u32, r_a: f64, r_n: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let (a_up, vertical, a_low) = self.ends();
        match self {
            Component::Base { .. } => out.push((vec![a_up, vertical, a_low], r_a)),
            Component::Nested { lower, upper, .. } => {
                let (sub_a, sub_n) = sub_demands(level, r_a, r_n);
                let mut up = Vec::new();
                upper.structural_rawe(level - 1, sub_a, sub_n, &mut up);
                out.extend(up.into_iter().map(|(p, a)| (prepend(a_up, p), a)));
                out.push((vec![a_up, vertical, a_low], r_n / 2f64.powi(level as i32)));
                let mut low = Vec::new();
                lower.structural_rawe(level - 1, sub_a, sub_n, &mut low);
                out.extend(low.into_iter().map(|(p, a)| (append(p, a_low), a)));
            }
        }
    }

    fn structural_rnwe(&self, r_n: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        match self {
            Component::Base { a_up, risky_low, risky_up, a_low, .. } => {
                out.push((vec![*a_up, *risky_up], r_n / 2.0));
                out.push((vec![*risky_low, *a_low], r_n / 2.0));
            }
            Component::Nested { a_up, lower, upper, a_low, .. } => {
                let mut up = Vec::new();
                upper.structural_rnwe(r_n / 2.0, &mut up);
                out.extend(up.into_iter().map(|(p, a)| (prepend(*a_up, p), a)));
                let mut low = Vec::new();
                lower.structural_rnwe(r_n / 2.0, &mut low);
                out.extend(low.into_iter().map(|(p, a)| (append(p, *a_low), a)));
            }
        }
    }
}

fn prepend(e: usize, mut p: Vec<usize>) -> Vec<usize> {
    p.insert(0, e);
    p
}

fn append(mut p: Vec<usize>, e: usize) -> Vec<usize> {
    p.push(e);
    p
}

/// Demands `(r^{i−1}_A, r^{i−1}_N)` routed through each level-`(i−1)` copy.
fn sub_demands(level: u32, r_a: f64, r_n: f64) -> (f64, f64) {
    let p = 2f64.powi(level as i32);
    ((p * r_a - r_n) / (2.0 * p), r_n / 2.0)
}

/// Flat at zero up to `zero_at`, then linear through `(hit_at, value)`.
fn threshold_fn(zero_at: f64, hit_at: f64, value: f64) -> Result<LatencyFn> {
    if !(hit_at > zero_at) {
        return Err(Error::Parameter(format!("threshold function needs {hit_at} > {zero_at}")));
    }
    let bp = if zero_at > 0.0 {
        vec![(0.0, 0.0), (zero_at, 0.0), (hit_at, value)]
    } else {
        vec![(0.0, 0.0), (hit_at, value)]
    };
    LatencyFn::piecewise_linear(bp)
}

struct Builder {
    spec: RecursiveFamilySpec,
    /// `(zero point, pinned point)` of `a_j`, indexed by `j − 1`.
    thresholds: Vec<(f64, f64)>,
    vertices: usize,
    edges: Vec<Edge>,
}

const SINK: usize = usize::MAX;

impl Builder {
    fn vertex(&mut self) -> usize {
        self.vertices += 1;
        self.vertices - 1
    }

    fn edge(&mut self, tail: usize, head: usize, latency: LatencyFn, variance: f64) -> usize {
        self.edges.push(Edge::new(tail, head, latency, LatencyFn::constant(variance)));
        self.edges.len() - 1
    }

    fn a_fn(&self, level: u32) -> Result<LatencyFn> {
        let (zero_at, hit_at) = self.thresholds[level as usize - 1];
        threshold_fn(zero_at, hit_at, 2f64.powi(level as i32 - 1) * self.spec.gamma_kappa)
    }

    /// Lower component, vertical edge, upper component; ids in that order
    /// between the two `a_j` edges.
    fn build(&mut self, level: u32, s: usize, t: usize) -> Result<Component> {
        let u = self.vertex();
        let w = self.vertex();
        let a = self.a_fn(level)?;
        let a_up = self.edge(s, u, a.clone(), 0.0);
        let one = LatencyFn::constant(1.0);
        let comp = if level == 1 {
            let risky_low = self.edge(s, w, one.clone(), KAPPA);
            let vertical = self.edge(u, w, one.clone(), 0.0);
            let risky_up = self.edge(u, t, one, KAPPA);
            let a_low = self.edge(w, t, a, 0.0);
            Component::Base { a_up, risky_low, vertical, risky_up, a_low }
        } else {
            let lower = Box::new(self.build(level - 1, s, w)?);
            let vertical = self.edge(u, w, one, 0.0);
            let upper = Box::new(self.build(level - 1, u, t)?);
            let a_low = self.edge(w, t, a, 0.0);
            Component::Nested { a_up, lower, vertical, upper, a_low }
        };
        Ok(comp)
    }
}

fn thresholds(spec: &RecursiveFamilySpec) -> Result<Vec<(f64, f64)>> {
    let i = spec.level;
    let mut out = vec![(0.0, 0.0); i as usize];
    match spec.variant {
        FamilyVariant::Structural => {
            let (mut r_a, mut r_n) = (spec.r_a, spec.r_n);
            for level in (1..=i).rev() {
                check_level_precondition(level, r_a, r_n)?;
                let p = 2f64.powi(level as i32);
                let hit_at = if level == 1 { r_a } else { r_a / 2.0 + r_n / (2.0 * p) };
                out[level as usize - 1] = (r_n / 2.0, hit_at);
                (r_a, r_n) = sub_demands(level, r_a, r_n);
            }
        }
        FamilyVariant::Functional => {
            let p = 2f64.powi(i as i32);
            for j in 1..=i {
                let q = 2f64.powi(j as i32 - 1);
                out[j as usize - 1] = (q / p, q / (p - 1.0));
            }
        }
    }
    Ok(out)
}

/// Builds `Gⁱ(r_A, r_N)` and its closed-form equilibria.
///
/// The instance has `2^{i+1}` vertices, source 0, sink `2^{i+1} − 1`,
/// demand `r_A`, `gamma = γκ` and risky-edge variance [`KAPPA`]. Under the
/// mean-stdev model the stored variance is reused unchanged (σ = κ = 1).
pub fn build_recursive(spec: &RecursiveFamilySpec) -> Result<(NetworkInstance, OracleFlows)> {
    build_recursive_with_model(spec, RiskModel::MeanVar)
}

pub fn build_recursive_with_model(
    spec: &RecursiveFamilySpec,
    risk_model: RiskModel,
) -> Result<(NetworkInstance, OracleFlows)> {
    spec.validate()?;
    let mut b = Builder { spec: *spec, thresholds: thresholds(spec)?, vertices: 0, edges: Vec::new() };
    let s = b.vertex();
    let root = b.build(spec.level, s, SINK)?;
    let t = b.vertex();
    for e in &mut b.edges {
        if e.head == SINK {
            e.head = t;
        }
    }
    let instance = NetworkInstance::new(b.vertices, b.edges, s, t, spec.r_a, spec.gamma_kappa / KAPPA, risk_model)?;

    let (rawe_paths, rnwe_paths) = match spec.variant {
        FamilyVariant::Structural => {
            let mut rawe = Vec::new();
            root.structural_rawe(spec.level, spec.r_a, spec.r_n, &mut rawe);
            let mut rnwe = Vec::new();
            root.structural_rnwe(spec.r_n, &mut rnwe);
            (rawe, rnwe)
        }
        FamilyVariant::Functional => {
            let zz = root.zigzag_paths();
            let par = root.parallel_paths();
            let za = 1.0 / zz.len() as f64;
            let pa = 1.0 / par.len() as f64;
            (zz.into_iter().map(|p| (p, za)).collect(), par.into_iter().map(|p| (p, pa)).collect())
        }
    };
    let to_flow = |paths: Vec<(Vec<usize>, f64)>| {
        let mut pf = PathFlow::new();
        for (p, a) in paths {
            if a > 0.0 {
                pf.push(p, a);
            }
        }
        pf
    };
    let rawe_cost = spec.rawe_path_cost() * spec.r_a;
    let rnwe_cost = spec.r_n;
    let oracle = OracleFlows {
        rawe: to_flow(rawe_paths),
        rnwe: to_flow(rnwe_paths),
        rawe_cost,
        rnwe_cost,
        expected_pra: rawe_cost / rnwe_cost,
    };
    Ok((instance, oracle))
}

/// Vertical edges of a recursive instance: mean 1, variance 0, and the
/// only edges whose head is the `w` vertex of a Braess level and tail its `u`.
pub fn vertical_edges(instance: &NetworkInstance) -> Vec<usize> {
    instance
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            e.tail != instance.source()
                && e.head != instance.sink()
                && e.latency == LatencyFn::constant(1.0)
                && e.variability == LatencyFn::constant(0.0)
        })
        .map(|(id, _)| id)
        .collect()
}
