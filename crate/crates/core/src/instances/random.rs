//! Seeded random instances for bound checking.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::function::LatencyFn;
use crate::network::{Edge, NetworkInstance, RiskModel};

use super::canonical::{braess_topology, build_domino_with_ears, EdgeFns, Topology};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Family of mean latency functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionFamily {
    Affine,
    /// Polynomial of exactly this degree with nonnegative coefficients.
    Polynomial(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomShape {
    Dag,
    SeriesParallel,
    Braess,
    Domino,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub shape: RandomShape,
    pub family: FunctionFamily,
    pub risk_model: RiskModel,
    /// Upper bound of the uniform range for γ.
    pub max_gamma: f64,
}

impl RandomSpec {
    pub fn new(shape: RandomShape, family: FunctionFamily, risk_model: RiskModel) -> Self {
        RandomSpec { shape, family, risk_model, max_gamma: 2.0 }
    }
}

pub fn random_latency(rng: &mut impl Rng, family: FunctionFamily) -> LatencyFn {
    match family {
        FunctionFamily::Affine => LatencyFn::affine(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)),
        FunctionFamily::Polynomial(p) => {
            let mut coeffs = vec![rng.gen_range(0.1..1.0)];
            for k in 1..=p {
                let lo = if k == p { 0.1 } else { 0.0 };
                coeffs.push(rng.gen_range(lo..1.0));
            }
            LatencyFn::polynomial(coeffs)
        }
    }
}

/// Nondecreasing affine variance with nonnegative coefficients.
pub fn random_variability(rng: &mut impl Rng) -> LatencyFn {
    LatencyFn::affine(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
}

fn random_fns(rng: &mut impl Rng, family: FunctionFamily) -> EdgeFns {
    EdgeFns::new(random_latency(rng, family), random_variability(rng))
}

fn instantiate(rng: &mut impl Rng, topo: &Topology, spec: &RandomSpec) -> Result<NetworkInstance> {
    let fns = topo.arcs.iter().map(|_| random_fns(rng, spec.family)).collect();
    let demand = rng.gen_range(0.5..2.0);
    let gamma = rng.gen_range(0.0..spec.max_gamma);
    topo.instantiate(fns, demand, gamma, spec.risk_model)
}

/// Random DAG on 3 to 6 vertices: a backbone chain `0→1→…→n−1` plus each
/// forward pair with probability 1/2 and an occasional parallel arc.
pub fn random_dag_topology(rng: &mut impl Rng) -> Topology {
    let n = rng.gen_range(3..=6);
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if v == u + 1 || rng.gen_bool(0.5) {
                arcs.push((u, v));
                if rng.gen_bool(0.1) {
                    arcs.push((u, v));
                }
            }
        }
    }
    Topology { vertices: n, source: 0, sink: n - 1, arcs }
}

/// Random two-terminal series-parallel graph with 2 to 7 arcs.
pub fn random_series_parallel_topology(rng: &mut impl Rng) -> Topology {
    fn grow(rng: &mut impl Rng, budget: usize, s: usize, t: usize, next: &mut usize, arcs: &mut Vec<(usize, usize)>) {
        if budget == 1 {
            arcs.push((s, t));
            return;
        }
        let left = rng.gen_range(1..budget);
        if rng.gen_bool(0.5) {
            let mid = *next;
            *next += 1;
            grow(rng, left, s, mid, next, arcs);
            grow(rng, budget - left, mid, t, next, arcs);
        } else {
            grow(rng, left, s, t, next, arcs);
            grow(rng, budget - left, s, t, next, arcs);
        }
    }
    let budget = rng.gen_range(2..=7);
    let mut arcs = Vec::new();
    let mut next = 2;
    grow(rng, budget, 0, 1, &mut next, &mut arcs);
    Topology { vertices: next, source: 0, sink: 1, arcs }
}

pub fn random_instance(rng: &mut impl Rng, spec: &RandomSpec) -> Result<NetworkInstance> {
    let topo = match spec.shape {
        RandomShape::Dag => random_dag_topology(rng),
        RandomShape::SeriesParallel => random_series_parallel_topology(rng),
        RandomShape::Braess => braess_topology(),
        RandomShape::Domino => build_domino_with_ears(),
    };
    instantiate(rng, &topo, spec)
}

/// Two parallel links, one fixed-mean and risky, one deterministic and
/// congestible. Handy for small hand-checked tests.
pub fn two_link(
    latency: LatencyFn,
    risky_mean: f64,
    risky_variance: f64,
    gamma: f64,
    model: RiskModel,
) -> Result<NetworkInstance> {
    NetworkInstance::new(
        2,
        vec![
            Edge::new(0, 1, LatencyFn::constant(risky_mean), LatencyFn::constant(risky_variance)),
            Edge::deterministic(0, 1, latency),
        ],
        0,
        1,
        1.0,
        gamma,
        model,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let spec = RandomSpec::new(RandomShape::Dag, FunctionFamily::Affine, RiskModel::MeanVar);
        let a = random_instance(&mut rng_from_seed(7), &spec).unwrap();
        let b = random_instance(&mut rng_from_seed(7), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_topologies_are_valid() {
        let mut rng = rng_from_seed(1);
        for shape in [RandomShape::Dag, RandomShape::SeriesParallel, RandomShape::Braess, RandomShape::Domino] {
            for family in [FunctionFamily::Affine, FunctionFamily::Polynomial(3)] {
                for _ in 0..20 {
                    let spec = RandomSpec::new(shape, family, RiskModel::MeanStdev);
                    let inst = random_instance(&mut rng, &spec).unwrap();
                    assert!(!inst.enumerate_paths(10_000).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn polynomial_has_requested_degree() {
        let mut rng = rng_from_seed(3);
        match random_latency(&mut rng, FunctionFamily::Polynomial(4)) {
            LatencyFn::Polynomial { coeffs } => {
                assert_eq!(coeffs.len(), 5);
                assert!(coeffs[4] > 0.0);
                assert!(coeffs.iter().all(|&c| c >= 0.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
