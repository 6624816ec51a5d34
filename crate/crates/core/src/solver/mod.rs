//! Equilibrium computation and certification.
//!
//! Edge-additive equilibria (risk-neutral, and risk-averse under the
//! mean-var model) minimize the Beckmann potential `Σₑ ∫₀^{fₑ} cₑ(u) du`.
//! They are computed by a conditional-gradient method: every iteration solves
//! an all-or-nothing shortest-path problem at the current costs and then
//! steps toward it. With [`StepRule::ExactLineSearch`] the step is a pairwise
//! move from the costliest used path to the shortest path with exact line
//! search, which converges linearly on these problems; with
//! [`StepRule::SuccessiveAverages`] it is the classic `1/(k+1)` average.
//!
//! Mean-stdev path costs are not edge-additive and admit no potential, so
//! [`solve_rawe_meanstdev`] works directly on the enumerated path set.

mod brute_force;
mod equilibrate;
mod shortest_path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{EdgeFlow, NetworkInstance, PathFlow, RiskModel};

pub use brute_force::brute_force_equilibrium;
pub use equilibrate::Progress;
use equilibrate::{Columns, Equilibrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    ExactLineSearch,
    SuccessiveAverages,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Maximum number of enumerated paths for the path-based solver.
    pub path_cap: usize,
    pub step_rule: StepRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: 1e-8, max_iterations: 100_000, path_cap: 4096, step_rule: StepRule::ExactLineSearch }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter("max_iterations must be >= 1".into()));
        }
        if self.path_cap == 0 {
            return Err(Error::Parameter("path_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// An (approximate) equilibrium flow with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub flow: EdgeFlow,
    pub path_flow: PathFlow,
    /// Demand-weighted mean perceived cost of the used paths.
    pub common_cost: f64,
    /// Relative variational-inequality residual of `flow`.
    pub vi_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl EquilibriumResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Descent on the Beckmann potential with edge costs `ℓₑ + γ σₑ²`, using
/// shortest paths as best responses, exposed step by step.
pub struct ConditionalGradient<'a> {
    inner: Equilibrator<'a>,
}

impl<'a> ConditionalGradient<'a> {
    /// Starts from the all-or-nothing assignment at zero flow.
    pub fn new(instance: &'a NetworkInstance, gamma: f64) -> Self {
        ConditionalGradient { inner: Equilibrator::new(instance, gamma, Columns::ShortestPath, Vec::new()) }
    }

    /// One iteration. Returns the progress measured before stepping and
    /// whether the stopping rule already held (in which case nothing moved).
    pub fn step(&mut self, cfg: &SolverConfig) -> (Progress, bool) {
        self.inner.step(cfg)
    }

    pub fn flow(&self) -> EdgeFlow {
        self.inner.edge_flow()
    }

    pub fn iterations(&self) -> usize {
        self.inner.iterations()
    }
}

fn solve_additive(instance: &NetworkInstance, gamma: f64, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    cfg.validate()?;
    Ok(Equilibrator::new(instance, gamma, Columns::ShortestPath, Vec::new()).run(cfg))
}

/// Risk-neutral equilibrium: costs `ℓₑ` alone, whatever the instance's `gamma`.
pub fn solve_rnwe(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    solve_additive(instance, 0.0, cfg)
}

/// Risk-averse equilibrium under the mean-var model: edge costs `ℓₑ + γσₑ²`.
pub fn solve_rawe_meanvar(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    if instance.risk_model() != RiskModel::MeanVar {
        return Err(Error::Parameter("solve_rawe_meanvar needs a mean-var instance".into()));
    }
    solve_additive(instance, instance.gamma(), cfg)
}

/// Risk-averse equilibrium under the mean-stdev model, by pairwise flow
/// shifting (or successive averages) over all enumerated s-t paths.
pub fn solve_rawe_meanstdev(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    if instance.risk_model() != RiskModel::MeanStdev {
        return Err(Error::Parameter("solve_rawe_meanstdev needs a mean-stdev instance".into()));
    }
    solve_path_based(instance, instance.gamma(), cfg)
}

/// Path-based equilibrium for the instance's risk model with an explicit `gamma`.
pub fn solve_path_based(instance: &NetworkInstance, gamma: f64, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    cfg.validate()?;
    let paths = instance.enumerate_paths(cfg.path_cap)?;
    Ok(Equilibrator::new(instance, gamma, Columns::Enumerated, paths).run(cfg))
}

/// Risk-averse equilibrium for whichever model the instance uses.
pub fn solve_rawe(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    match instance.risk_model() {
        RiskModel::MeanVar => solve_rawe_meanvar(instance, cfg),
        RiskModel::MeanStdev if instance.gamma() == 0.0 => solve_rnwe(instance, cfg),
        RiskModel::MeanStdev => solve_rawe_meanstdev(instance, cfg),
    }
}

/// Absolute variational-inequality gap `Σₑ fₑcₑ(fₑ) − d·min_p Σ_{e∈p} cₑ(fₑ)`
/// with `cₑ = ℓₑ + γ σₑ²` and `d` the instance demand.
pub fn vi_gap(instance: &NetworkInstance, flow: &EdgeFlow, gamma_effective: f64) -> f64 {
    let costs: Vec<f64> =
        flow.values().iter().enumerate().map(|(e, &f)| instance.additive_edge_cost(e, f, gamma_effective)).collect();
    let total: f64 = flow.values().iter().zip(&costs).map(|(f, c)| f * c).sum();
    let (_, min_cost) = shortest_path::shortest_path(instance, &costs);
    (total - instance.demand() * min_cost).max(0.0)
}

/// [`vi_gap`] relative to `Σₑ fₑcₑ(fₑ)` (absolute when that sum is zero).
/// Zero exactly at equilibrium. Only meaningful for edge-additive costs.
pub fn vi_residual(instance: &NetworkInstance, flow: &EdgeFlow, gamma_effective: f64) -> f64 {
    let total: f64 =
        flow.values().iter().enumerate().map(|(e, &f)| f * instance.additive_edge_cost(e, f, gamma_effective)).sum();
    let gap = vi_gap(instance, flow, gamma_effective);
    if total > 0.0 {
        gap / total
    } else {
        gap
    }
}

/// Relative path-level gap `Σ_p f_p (Q_p − Q_min) / Σ_p f_p Q_p` for any
/// risk model, where `Q_min` is taken over all enumerated paths.
pub fn path_gap_residual(instance: &NetworkInstance, pf: &PathFlow, gamma: f64, path_cap: usize) -> Result<f64> {
    let flow = instance.induced_edge_flow(pf)?;
    let mut min_cost = f64::INFINITY;
    for p in instance.enumerate_paths(path_cap)? {
        min_cost = min_cost.min(instance.path_cost_with(&p, &flow, gamma)?);
    }
    let mut total = 0.0;
    let mut amount = 0.0;
    for p in pf.positive() {
        total += p.amount * instance.path_cost_with(&p.edges, &flow, gamma)?;
        amount += p.amount;
    }
    let gap = (total - amount * min_cost).max(0.0);
    Ok(if total > 0.0 { gap / total } else { gap })
}

/// Beckmann potential `Σₑ ∫₀^{fₑ} (ℓₑ + γσₑ²)(u) du`.
pub fn beckmann_potential(instance: &NetworkInstance, flow: &EdgeFlow, gamma: f64) -> f64 {
    instance
        .edges()
        .iter()
        .zip(flow.values())
        .map(|(e, &f)| e.latency.integral(f) + gamma * e.variability.integral(f))
        .sum()
}
