use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{EdgeFlow, NetworkInstance, RiskModel};

use super::{compute_kappa, default_tie_tolerance, find_alternating_path, instance_mu, partition_edges, pra_of_flows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `1 + ηγκ`
    TopologicalEta,
    /// `1 + γκ⌈(n−1)/2⌉`
    TopologicalVertices,
    /// `(1 + γκ) / (1 − μ)`
    FunctionalSmooth,
    /// `1 + γκ` for mean-stdev with one forward subpath.
    StdevZeroAlt,
    /// `1 + 2γκ` for mean-stdev with at most two forward subpaths.
    StdevOneAlt,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [
        BoundKind::TopologicalEta,
        BoundKind::TopologicalVertices,
        BoundKind::FunctionalSmooth,
        BoundKind::StdevZeroAlt,
        BoundKind::StdevOneAlt,
    ];
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::TopologicalEta => "topological-eta",
            BoundKind::TopologicalVertices => "topological-vertices",
            BoundKind::FunctionalSmooth => "functional-smooth",
            BoundKind::StdevZeroAlt => "stdev-zero-alt",
            BoundKind::StdevOneAlt => "stdev-one-alt",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pra_observed: f64,
    pub kappa: f64,
    /// Forward subpaths of the alternating path; 0 when the flows coincide.
    pub eta: usize,
    pub mu: Option<f64>,
    pub bound_value: f64,
    pub bound_kind: BoundKind,
    /// Whether the bound's hypotheses hold for this instance and pair.
    pub applicable: bool,
    /// `pra_observed ≤ bound_value + tol`
    pub satisfied: bool,
    pub slack: f64,
    pub note: String,
}

/// Shared ingredients of all bound kinds.
struct Pair {
    pra: f64,
    kappa: f64,
    eta: usize,
    notes: Vec<String>,
}

fn measure(instance: &NetworkInstance, rawe: &EdgeFlow, rnwe: &EdgeFlow) -> Result<Pair> {
    let pra = pra_of_flows(instance, rawe, rnwe)?;
    let k = compute_kappa(instance, rawe);
    let mut notes = Vec::new();
    if !k.infinite_edges.is_empty() {
        notes.push(format!("kappa infinite on edges {:?}", k.infinite_edges));
    }
    let partition = partition_edges(rawe, rnwe, default_tie_tolerance(instance.demand()));
    let eta = match find_alternating_path(instance, &partition) {
        Ok(p) => p.forward_subpath_count,
        Err(Error::NoAlternatingPath(_)) if pra <= 1.0 + 1e-9 => {
            notes.push("no alternating path; flows agree up to tolerance".into());
            0
        }
        Err(e) => return Err(e),
    };
    Ok(Pair { pra, kappa: k.value, eta, notes })
}

fn report(
    pair: &Pair,
    kind: BoundKind,
    bound: f64,
    mu: Option<f64>,
    applicable: bool,
    tol: f64,
    extra: &[String],
) -> BoundReport {
    let mut notes = pair.notes.clone();
    notes.extend(extra.iter().cloned());
    BoundReport {
        pra_observed: pair.pra,
        kappa: pair.kappa,
        eta: pair.eta,
        mu,
        bound_value: bound,
        bound_kind: kind,
        applicable,
        satisfied: pair.pra <= bound + tol,
        slack: bound - pair.pra,
        note: notes.join("; "),
    }
}

fn one(instance: &NetworkInstance, rawe: &EdgeFlow, pair: &Pair, kind: BoundKind, tol: f64) -> Result<BoundReport> {
    let gk = instance.gamma() * pair.kappa;
    let mean_var = instance.risk_model() == RiskModel::MeanVar;
    let stdev = !mean_var;
    let r = match kind {
        BoundKind::TopologicalEta => {
            let bound = if pair.eta == 0 { 1.0 } else { 1.0 + pair.eta as f64 * gk };
            report(pair, kind, bound, None, mean_var, tol, &[])
        }
        BoundKind::TopologicalVertices => {
            let half = (instance.vertex_count() as u64 - 1).div_ceil(2) as f64;
            report(pair, kind, 1.0 + gk * half, None, mean_var, tol, &[])
        }
        BoundKind::FunctionalSmooth => {
            let mu = instance_mu(instance, rawe)?;
            let note = "smoothness certified at the computed equilibrium only".to_string();
            if mu >= 1.0 {
                report(pair, kind, f64::INFINITY, Some(mu), mean_var, tol, &[note, "vacuous bound: mu >= 1".into()])
            } else {
                report(pair, kind, (1.0 + gk) / (1.0 - mu), Some(mu), mean_var, tol, &[note])
            }
        }
        BoundKind::StdevZeroAlt => report(pair, kind, 1.0 + gk, None, stdev && pair.eta <= 1, tol, &[]),
        BoundKind::StdevOneAlt => report(pair, kind, 1.0 + 2.0 * gk, None, stdev && pair.eta <= 2, tol, &[]),
    };
    Ok(r)
}

/// Evaluates one bound for an equilibrium pair on `instance`: `rawe` at the
/// instance's γ and risk model, `rnwe` at γ = 0.
///
/// η comes from the alternating path with fewest forward subpaths, κ from
/// [`compute_kappa`] at `rawe`, μ from [`instance_mu`] at `rawe`.
pub fn check_bound(
    instance: &NetworkInstance,
    rawe: &EdgeFlow,
    rnwe: &EdgeFlow,
    kind: BoundKind,
    tol: f64,
) -> Result<BoundReport> {
    let pair = measure(instance, rawe, rnwe)?;
    one(instance, rawe, &pair, kind, tol)
}

/// All bound kinds, in [`BoundKind::ALL`] order.
pub fn check_all_bounds(
    instance: &NetworkInstance,
    rawe: &EdgeFlow,
    rnwe: &EdgeFlow,
    tol: f64,
) -> Result<Vec<BoundReport>> {
    let pair = measure(instance, rawe, rnwe)?;
    BoundKind::ALL.iter().map(|&k| one(instance, rawe, &pair, k, tol)).collect()
}
