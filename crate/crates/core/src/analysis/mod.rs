//! Analysis of equilibrium pairs: price of risk aversion, κ, μ, alternating
//! paths and bound certification.

mod alternating;
mod bounds;
mod smoothness;

pub use alternating::{
    default_tie_tolerance, find_alternating_path, partition_edges, AlternatingPath, Direction, EdgePartition, Segment,
};
pub use bounds::{check_all_bounds, check_bound, BoundKind, BoundReport};
pub use smoothness::{estimate_smoothness_mu, instance_mu, polynomial_mu};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::OracleFlows;
use crate::network::{EdgeFlow, NetworkInstance, RiskModel};
use crate::report::{Check, CheckReport};
use crate::solver::EquilibriumResult;

/// `C(x) / C(z)` for solver results.
pub fn compute_pra(instance: &NetworkInstance, rawe: &EquilibriumResult, rnwe: &EquilibriumResult) -> Result<f64> {
    pra_of_flows(instance, &rawe.flow, &rnwe.flow)
}

pub fn pra_of_flows(instance: &NetworkInstance, rawe: &EdgeFlow, rnwe: &EdgeFlow) -> Result<f64> {
    let cz = instance.social_cost(rnwe);
    if !(cz > 0.0) {
        return Err(Error::ZeroDenominator(format!("risk-neutral social cost is {cz}")));
    }
    Ok(instance.social_cost(rawe) / cz)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub value: f64,
    /// Edge attaining the maximum.
    pub argmax: Option<usize>,
    /// Edges with zero mean and positive variance.
    pub infinite_edges: Vec<usize>,
}

/// Max over edges of `σₑ²/ℓₑ` (mean-var) or `σₑ/ℓₑ` (mean-stdev) at `flow`.
///
/// Every edge counts, not only used ones: unused edges are evaluated at zero
/// flow. Edges with both moments zero are skipped; zero mean with positive
/// variance makes κ infinite.
pub fn compute_kappa(instance: &NetworkInstance, flow: &EdgeFlow) -> KappaEstimate {
    let mut est = KappaEstimate { value: 0.0, argmax: None, infinite_edges: Vec::new() };
    for (e, edge) in instance.edges().iter().enumerate() {
        let x = flow.get(e);
        let mean = edge.latency.eval(x);
        let var = edge.variability.eval(x).max(0.0);
        let spread = match instance.risk_model() {
            RiskModel::MeanVar => var,
            RiskModel::MeanStdev => var.sqrt(),
        };
        if spread == 0.0 {
            continue;
        }
        let ratio = if mean > 0.0 {
            spread / mean
        } else {
            est.infinite_edges.push(e);
            f64::INFINITY
        };
        if ratio > est.value {
            est.value = ratio;
            est.argmax = Some(e);
        }
    }
    est
}

/// Checks the closed-form properties of a structural instance of the given
/// level at its oracle flows: every RAWE path has perceived cost and mean
/// latency `1 + 2^i γκ`, every RNWE path has mean latency 1, and the social
/// costs are `(1 + 2^i γκ)·r_A` and `r_N`.
pub fn verify_structural_properties(level: u32, instance: &NetworkInstance, oracle: &OracleFlows) -> CheckReport {
    const TOL: f64 = 1e-9;
    let mut report = CheckReport::new(format!("level-{level} closed-form properties"));
    let gk = instance.gamma() * crate::instances::KAPPA;
    let target = 1.0 + 2f64.powi(level as i32) * gk;
    let (x, z) = match (instance.induced_edge_flow(&oracle.rawe), instance.induced_edge_flow(&oracle.rnwe)) {
        (Ok(x), Ok(z)) => (x, z),
        (Err(e), _) | (_, Err(e)) => {
            report.push(Check::fail("oracle paths", e.to_string()));
            return report;
        }
    };
    let near = |a: f64, b: f64| (a - b).abs() <= TOL * b.abs().max(1.0);

    let mut bad = Vec::new();
    for p in oracle.rawe.positive() {
        let cost = instance.path_cost(&p.edges, &x).unwrap_or(f64::NAN);
        let mean = instance.path_mean(&p.edges, &x).unwrap_or(f64::NAN);
        if !near(cost, target) || !near(mean, target) {
            bad.push(format!("path {:?}: cost {cost:.12}, mean {mean:.12}", p.edges));
        }
    }
    report.push(Check::new(
        "rawe path costs",
        bad.is_empty(),
        if bad.is_empty() { format!("all equal {target}") } else { format!("expected {target}; {}", bad.join("; ")) },
    ));

    let mut bad = Vec::new();
    for p in oracle.rnwe.positive() {
        let mean = instance.path_mean(&p.edges, &z).unwrap_or(f64::NAN);
        if !near(mean, 1.0) {
            bad.push(format!("path {:?}: mean {mean:.12}", p.edges));
        }
    }
    report.push(Check::new(
        "rnwe path latencies",
        bad.is_empty(),
        if bad.is_empty() { "all equal 1".to_string() } else { format!("expected 1; {}", bad.join("; ")) },
    ));

    let (r_a, r_n) = (oracle.rawe.total(), oracle.rnwe.total());
    let (cx, cz) = (instance.social_cost(&x), instance.social_cost(&z));
    report.push(Check::new("rawe social cost", near(cx, target * r_a), format!("{cx:.12} vs {:.12}", target * r_a)));
    report.push(Check::new("rnwe social cost", near(cz, r_n), format!("{cz:.12} vs {r_n:.12}")));
    report
}

/// `(1 + γκ⌈(n−1)/2⌉) / (1 + γκ·2^⌊log₂ n⌋)`, the ratio between the
/// vertex-count upper bound and the power-of-two lower bound.
pub fn vertex_bound_gap(n: u64, gamma_kappa: f64) -> f64 {
    let upper = 1.0 + gamma_kappa * n.saturating_sub(1).div_ceil(2) as f64;
    let lower = 1.0 + gamma_kappa * (1u64 << n.ilog2()) as f64;
    upper / lower
}

/// Same ratio against the lower bound actually attained with `n` vertices,
/// `1 + γκ·2^{⌊log₂ n⌋ − 1}`.
pub fn vertex_bound_gap_attained(n: u64, gamma_kappa: f64) -> f64 {
    let upper = 1.0 + gamma_kappa * n.saturating_sub(1).div_ceil(2) as f64;
    let lower = 1.0 + gamma_kappa * (1u64 << (n.ilog2() - 1)) as f64;
    upper / lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::LatencyFn;
    use crate::instances::{build_recursive, RecursiveFamilySpec};
    use crate::network::Edge;

    #[test]
    fn oracle_pra_matches_closed_form() {
        for (i, want) in [(1, 3.0), (2, 5.0), (3, 9.0)] {
            let (inst, o) = build_recursive(&RecursiveFamilySpec::structural(i, 1.0, 1.0, 1.0)).unwrap();
            let x = inst.induced_edge_flow(&o.rawe).unwrap();
            let z = inst.induced_edge_flow(&o.rnwe).unwrap();
            assert!((pra_of_flows(&inst, &x, &z).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rnwe_cost_is_an_error() {
        let inst = NetworkInstance::new(
            2,
            vec![Edge::deterministic(0, 1, LatencyFn::zero())],
            0,
            1,
            1.0,
            0.0,
            RiskModel::MeanVar,
        )
        .unwrap();
        let f = EdgeFlow(vec![1.0]);
        assert!(matches!(pra_of_flows(&inst, &f, &f), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn kappa_examples() {
        let (inst, o) = build_recursive(&RecursiveFamilySpec::structural(2, 1.0, 1.0, 1.0)).unwrap();
        let x = inst.induced_edge_flow(&o.rawe).unwrap();
        assert_eq!(compute_kappa(&inst, &x).value, 1.0);

        let det = NetworkInstance::new(
            2,
            vec![Edge::deterministic(0, 1, LatencyFn::affine(1.0, 1.0))],
            0,
            1,
            1.0,
            1.0,
            RiskModel::MeanVar,
        )
        .unwrap();
        assert_eq!(compute_kappa(&det, &EdgeFlow(vec![1.0])).value, 0.0);

        let risky = det.with_edge(0, Edge::new(0, 1, LatencyFn::constant(1.0), LatencyFn::constant(2.0))).unwrap();
        assert_eq!(compute_kappa(&risky, &EdgeFlow(vec![1.0])).value, 2.0);
        let sd = risky.with_risk_model(RiskModel::MeanStdev);
        assert!((compute_kappa(&sd, &EdgeFlow(vec![1.0])).value - 2f64.sqrt()).abs() < 1e-15);

        let free = det.with_edge(0, Edge::new(0, 1, LatencyFn::zero(), LatencyFn::constant(1.0))).unwrap();
        let k = compute_kappa(&free, &EdgeFlow(vec![1.0]));
        assert!(k.value.is_infinite());
        assert_eq!(k.infinite_edges, vec![0]);
    }

    #[test]
    fn structural_properties_hold_and_detect_corruption() {
        for i in 1..=4 {
            let (inst, o) = build_recursive(&RecursiveFamilySpec::structural(i, 1.0, 1.0, 1.0)).unwrap();
            let r = verify_structural_properties(i, &inst, &o);
            assert!(r.passed(), "{r}");
        }
        let (inst, o) = build_recursive(&RecursiveFamilySpec::structural(2, 1.0, 1.0, 1.0)).unwrap();
        let e = inst.edges()[0].clone();
        let doubled = match &e.latency {
            LatencyFn::PiecewiseLinear { breakpoints } => {
                LatencyFn::PiecewiseLinear { breakpoints: breakpoints.iter().map(|&(x, y)| (x, 2.0 * y)).collect() }
            }
            other => panic!("unexpected {other:?}"),
        };
        let bad = inst.with_edge(0, Edge { latency: doubled, ..e }).unwrap();
        let r = verify_structural_properties(2, &bad, &o);
        assert!(!r.passed());
        assert!(r.failures().any(|c| c.detail.contains("path [0,")));
    }

    #[test]
    fn gap_ratios() {
        assert!(vertex_bound_gap(5, 1.0) < 2.0);
        // powers of two: the bounds coincide
        assert_eq!(vertex_bound_gap_attained(8, 1.0), 1.0);
        assert_eq!(vertex_bound_gap_attained(16, 0.5), 1.0);
        assert!(vertex_bound_gap_attained(15, 10.0) < 2.0);
    }
}
