//! Path-flow state and the pairwise flow-shifting step shared by both
//! equilibrium solvers.
//!
//! A step sweeps the used paths from costliest to cheapest and moves flow
//! from each to the best-response path until their costs meet. For
//! edge-additive costs each move is an exact line search on the potential
//! along a feasible direction.

use std::collections::HashMap;

use crate::network::{EdgeFlow, NetworkInstance, PathFlow, RiskModel};

use super::shortest_path::shortest_path;
use super::{EquilibriumResult, SolverConfig, StepRule};

/// Where the candidate best-response paths come from.
pub(crate) enum Columns {
    /// Generated on demand by shortest path under additive edge costs.
    ShortestPath,
    /// A fixed, pre-enumerated path set.
    Enumerated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    /// Relative path-level gap `Σ f_p (Q_p − Q_min) / Σ f_p Q_p`.
    pub vi_residual: f64,
    /// Relative spread between the costliest used path and the cheapest path.
    pub max_path_gap: f64,
    pub min_cost: f64,
    pub mean_cost: f64,
}

pub(crate) struct Equilibrator<'a> {
    instance: &'a NetworkInstance,
    model: RiskModel,
    gamma: f64,
    demand: f64,
    columns: Columns,
    paths: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    amounts: Vec<f64>,
    flow: Vec<f64>,
    iterations: usize,
}

impl<'a> Equilibrator<'a> {
    pub(crate) fn new(instance: &'a NetworkInstance, gamma: f64, columns: Columns, paths: Vec<Vec<usize>>) -> Self {
        let model = if matches!(columns, Columns::ShortestPath) { RiskModel::MeanVar } else { instance.risk_model() };
        let mut eq = Equilibrator {
            instance,
            model,
            gamma,
            demand: instance.demand(),
            columns,
            index: paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect(),
            amounts: vec![0.0; paths.len()],
            paths,
            flow: vec![0.0; instance.edge_count()],
            iterations: 0,
        };
        let (best, _) = eq.best_response();
        eq.amounts[best] = eq.demand;
        for &e in &eq.paths[best] {
            eq.flow[e] = eq.demand;
        }
        eq
    }

    pub(crate) fn iterations(&self) -> usize {
        self.iterations
    }

    pub(crate) fn edge_flow(&self) -> EdgeFlow {
        EdgeFlow(self.flow.iter().map(|f| f.max(0.0)).collect())
    }

    fn mean_var_at(&self, path: &[usize], shift: impl Fn(usize) -> f64) -> (f64, f64) {
        path.iter().fold((0.0, 0.0), |(m, v), &e| {
            let x = (self.flow[e] + shift(e)).max(0.0);
            let edge = &self.instance.edges()[e];
            (m + edge.latency.eval(x), v + edge.variability.eval(x))
        })
    }

    fn path_cost(&self, idx: usize) -> f64 {
        let (m, v) = self.mean_var_at(&self.paths[idx], |_| 0.0);
        self.model.path_cost(self.gamma, m, v)
    }

    /// Index of the cheapest path (inserting it if new) and its cost.
    fn best_response(&mut self) -> (usize, f64) {
        match self.columns {
            Columns::ShortestPath => {
                let costs: Vec<f64> = (0..self.flow.len())
                    .map(|e| self.instance.additive_edge_cost(e, self.flow[e].max(0.0), self.gamma))
                    .collect();
                let (path, _) = shortest_path(self.instance, &costs);
                let idx = match self.index.get(&path) {
                    Some(&i) => i,
                    None => {
                        self.paths.push(path.clone());
                        self.amounts.push(0.0);
                        self.index.insert(path, self.paths.len() - 1);
                        self.paths.len() - 1
                    }
                };
                (idx, self.path_cost(idx))
            }
            Columns::Enumerated => {
                let mut best = (0, f64::INFINITY);
                for i in 0..self.paths.len() {
                    let c = self.path_cost(i);
                    if c < best.1 {
                        best = (i, c);
                    }
                }
                best
            }
        }
    }

    /// Measures the current flow and returns the best-response path index.
    pub(crate) fn measure(&mut self) -> (Progress, usize, Option<usize>) {
        let (best, min_cost) = self.best_response();
        let mut total = 0.0;
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..self.paths.len() {
            if self.amounts[i] <= 0.0 {
                continue;
            }
            let c = self.path_cost(i);
            total += self.amounts[i] * c;
            if worst.is_none_or(|(_, wc)| c > wc) {
                worst = Some((i, c));
            }
        }
        let mean_cost = if self.demand > 0.0 { total / self.demand } else { min_cost };
        let rel = |gap: f64| {
            let gap = gap.max(0.0);
            if mean_cost > 0.0 {
                gap / mean_cost
            } else {
                gap
            }
        };
        let max_gap = worst.map_or(0.0, |(_, wc)| wc - min_cost);
        let vi_gap = if self.demand > 0.0 { (total - self.demand * min_cost) / self.demand } else { 0.0 };
        let progress = Progress { vi_residual: rel(vi_gap), max_path_gap: rel(max_gap), min_cost, mean_cost };
        (progress, best, worst.map(|(i, _)| i))
    }

    fn shift(&mut self, from: usize, to: usize, t: f64, drain: bool) {
        let (only_from, only_to) = self.difference(from, to);
        for e in only_from {
            self.flow[e] -= t;
        }
        for e in only_to {
            self.flow[e] += t;
        }
        self.amounts[to] += t;
        self.amounts[from] = if drain { 0.0 } else { self.amounts[from] - t };
    }

    fn difference(&self, from: usize, to: usize) -> (Vec<usize>, Vec<usize>) {
        let a = &self.paths[from];
        let b = &self.paths[to];
        let only_from = a.iter().copied().filter(|e| !b.contains(e)).collect();
        let only_to = b.iter().copied().filter(|e| !a.contains(e)).collect();
        (only_from, only_to)
    }

    /// Moves flow from `from` to `to` until their costs are equal, or all of
    /// `from`'s flow has moved.
    fn equalize(&mut self, from: usize, to: usize) {
        let (only_from, only_to) = self.difference(from, to);
        let cap = self.amounts[from];
        if cap <= 0.0 {
            return;
        }
        let gap_at = |t: f64| {
            let (mf, vf) = self.mean_var_at(&self.paths[from], |e| if only_from.contains(&e) { -t } else { 0.0 });
            let (mt, vt) = self.mean_var_at(&self.paths[to], |e| if only_to.contains(&e) { t } else { 0.0 });
            self.model.path_cost(self.gamma, mf, vf) - self.model.path_cost(self.gamma, mt, vt)
        };
        if gap_at(0.0) <= 0.0 {
            return;
        }
        if gap_at(cap) >= 0.0 {
            self.shift(from, to, cap, true);
            return;
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if gap_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.shift(from, to, 0.5 * (lo + hi), false);
    }

    fn sweep(&mut self, best: usize) {
        let mut used: Vec<(usize, f64)> = (0..self.paths.len())
            .filter(|&i| i != best && self.amounts[i] > 0.0)
            .map(|i| (i, self.path_cost(i)))
            .collect();
        used.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (i, _) in used {
            self.equalize(i, best);
        }
    }

    fn average_toward(&mut self, best: usize) {
        let alpha = 1.0 / (self.iterations as f64 + 1.0);
        for a in &mut self.amounts {
            *a *= 1.0 - alpha;
        }
        for f in &mut self.flow {
            *f *= 1.0 - alpha;
        }
        self.amounts[best] += alpha * self.demand;
        for &e in &self.paths[best] {
            self.flow[e] += alpha * self.demand;
        }
    }

    /// Performs one iteration unless the stopping rule already holds.
    /// Returns the progress measured before the step and whether it converged.
    pub(crate) fn step(&mut self, cfg: &SolverConfig) -> (Progress, bool) {
        let (progress, best, worst) = self.measure();
        let done = match cfg.step_rule {
            StepRule::ExactLineSearch => progress.max_path_gap <= cfg.tolerance,
            StepRule::SuccessiveAverages => progress.vi_residual <= cfg.tolerance,
        };
        if done || self.demand == 0.0 {
            return (progress, true);
        }
        self.iterations += 1;
        match cfg.step_rule {
            StepRule::ExactLineSearch => {
                if worst.is_some() {
                    self.sweep(best);
                }
            }
            StepRule::SuccessiveAverages => self.average_toward(best),
        }
        (progress, false)
    }

    pub(crate) fn run(mut self, cfg: &SolverConfig) -> EquilibriumResult {
        let mut converged = false;
        while self.iterations < cfg.max_iterations {
            if self.step(cfg).1 {
                converged = true;
                break;
            }
        }
        let (progress, _, _) = self.measure();
        if !converged {
            converged = match cfg.step_rule {
                StepRule::ExactLineSearch => progress.max_path_gap <= cfg.tolerance,
                StepRule::SuccessiveAverages => progress.vi_residual <= cfg.tolerance,
            };
        }
        let mut path_flow = PathFlow::new();
        for (p, &a) in self.paths.iter().zip(&self.amounts) {
            if a > 0.0 {
                path_flow.push(p.clone(), a);
            }
        }
        EquilibriumResult {
            flow: self.edge_flow(),
            path_flow,
            common_cost: progress.mean_cost,
            vi_residual: progress.vi_residual,
            iterations: self.iterations,
            converged,
        }
    }
}
