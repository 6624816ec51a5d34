//! Instance generators: the recursive worst-case family, canonical small
//! graphs, and seeded random instances.

mod canonical;
mod random;
mod recursive;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use canonical::{
    braess_topology, build_braess, build_domino_with_ears, domino_contraction_self_test, BraessFunctions, EdgeFns,
    Topology, DOMINO_VERTICALS,
};
pub use random::{
    random_dag_topology, random_instance, random_latency, random_series_parallel_topology, random_variability,
    rng_from_seed, two_link, FunctionFamily, RandomShape, RandomSpec,
};
pub use recursive::{
    build_recursive, build_recursive_with_model, vertical_edges, FamilyVariant, OracleFlows, RecursiveFamilySpec, KAPPA,
};

use crate::error::Result;
use crate::network::{NetworkInstance, PathFlow, RiskModel};
use crate::report::{Check, CheckReport};
use crate::solver::{path_gap_residual, vi_residual};

const ORACLE_PATH_CAP: usize = 1 << 16;

/// Oracle file written next to a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSidecar {
    pub spec: RecursiveFamilySpec,
    pub oracle: OracleFlows,
}

impl OracleSidecar {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn equilibrium_residual(instance: &NetworkInstance, pf: &PathFlow, gamma: f64) -> Result<f64> {
    let at_demand = instance.with_demand(pf.total())?;
    match instance.risk_model() {
        RiskModel::MeanStdev if gamma > 0.0 => path_gap_residual(&at_demand, pf, gamma, ORACLE_PATH_CAP),
        _ => {
            let flow = at_demand.induced_edge_flow(pf)?;
            Ok(vi_residual(&at_demand, &flow, gamma))
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Checks that the oracle flows are equilibria of `instance` (risk-averse at
/// the instance's γ, risk-neutral at γ = 0) and that their social costs are
/// the stated closed forms. The RAWE oracle must route the instance demand.
pub fn closed_form_check(instance: &NetworkInstance, oracle: &OracleFlows, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("closed-form oracle");
    let cases =
        [("rawe", &oracle.rawe, instance.gamma(), oracle.rawe_cost), ("rnwe", &oracle.rnwe, 0.0, oracle.rnwe_cost)];
    for (name, pf, gamma, expected_cost) in cases {
        let flow = match instance.induced_edge_flow(pf) {
            Ok(f) => f,
            Err(e) => {
                report.push(Check::fail(format!("{name} paths"), e.to_string()));
                continue;
            }
        };
        match equilibrium_residual(instance, pf, gamma) {
            Ok(r) => report.push(Check::new(
                format!("{name} equilibrium"),
                r <= tol,
                format!("relative residual {r:.3e} (tol {tol:.1e})"),
            )),
            Err(e) => report.push(Check::fail(format!("{name} equilibrium"), e.to_string())),
        }
        let cost = instance.social_cost(&flow);
        report.push(Check::new(
            format!("{name} social cost"),
            close(cost, expected_cost, tol),
            format!("computed {cost:.12} vs closed form {expected_cost:.12}"),
        ));
    }
    let total = oracle.rawe.total();
    report.push(Check::new(
        "rawe demand",
        close(total, instance.demand(), tol),
        format!("routes {total:.12}, instance demand {:.12}", instance.demand()),
    ));
    let ratio = oracle.rawe_cost / oracle.rnwe_cost;
    report.push(Check::new(
        "expected pra",
        ratio == oracle.expected_pra,
        format!("rawe_cost / rnwe_cost = {ratio}, stored {}", oracle.expected_pra),
    ));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_level_two_oracle_passes() {
        let (inst, oracle) = build_recursive(&RecursiveFamilySpec::structural(2, 1.0, 1.0, 1.0)).unwrap();
        let r = closed_form_check(&inst, &oracle, 1e-10);
        assert!(r.passed(), "{r}");
        assert_eq!(oracle.expected_pra, 5.0);
    }

    #[test]
    fn perturbed_oracle_fails_equilibrium() {
        let (inst, mut oracle) = build_recursive(&RecursiveFamilySpec::structural(2, 1.0, 1.0, 1.0)).unwrap();
        oracle.rnwe.paths[0].amount += 0.1;
        let r = closed_form_check(&inst, &oracle, 1e-10);
        assert!(!r.passed());
        assert!(r.failures().any(|c| c.name == "rnwe equilibrium"));
    }

    #[test]
    fn zero_gamma_oracle_passes() {
        let (inst, oracle) = build_recursive(&RecursiveFamilySpec::structural(2, 1.0, 1.0, 0.0)).unwrap();
        assert!(closed_form_check(&inst, &oracle, 1e-10).passed());
    }

    #[test]
    fn mean_stdev_oracle_passes() {
        let spec = RecursiveFamilySpec::structural(1, 1.0, 1.0, 1.0);
        let (inst, oracle) = build_recursive_with_model(&spec, RiskModel::MeanStdev).unwrap();
        assert!(closed_form_check(&inst, &oracle, 1e-10).passed());
    }

    #[test]
    fn unequal_demands_pass() {
        let (inst, oracle) = build_recursive(&RecursiveFamilySpec::structural(3, 1.5, 1.0, 2.0)).unwrap();
        let r = closed_form_check(&inst, &oracle, 1e-10);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn sidecar_round_trip() {
        let spec = RecursiveFamilySpec::functional(2, 1.0);
        let (_, oracle) = build_recursive(&spec).unwrap();
        let dir = std::env::temp_dir().join(format!("riskroute-sidecar-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("o.json");
        let side = OracleSidecar { spec, oracle };
        side.write(&path).unwrap();
        assert_eq!(OracleSidecar::read(&path).unwrap(), side);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
