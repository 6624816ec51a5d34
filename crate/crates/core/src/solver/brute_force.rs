//! Support enumeration over the path-flow simplex, for validating the
//! iterative solvers on instances with at most four paths.

use crate::error::{Error, Result};
use crate::network::{EdgeFlow, NetworkInstance, PathFlow};

use super::EquilibriumResult;

const MAX_PATHS: usize = 4;
const MAX_ROUNDS: usize = 20_000;

struct Evaluator<'a> {
    instance: &'a NetworkInstance,
    paths: Vec<Vec<usize>>,
}

impl Evaluator<'_> {
    fn costs(&self, amounts: &[f64]) -> Result<Vec<f64>> {
        let mut flow = vec![0.0; self.instance.edge_count()];
        for (p, &a) in self.paths.iter().zip(amounts) {
            for &e in p {
                flow[e] += a;
            }
        }
        let flow = EdgeFlow(flow);
        self.paths.iter().map(|p| self.instance.path_cost(p, &flow)).collect()
    }

    /// `(Σ f_p Q_p − d·min Q, Σ f_p Q_p)`
    fn gap(&self, amounts: &[f64]) -> Result<(f64, f64)> {
        let q = self.costs(amounts)?;
        let total: f64 = amounts.iter().zip(&q).map(|(a, c)| a * c).sum();
        let min = q.iter().copied().fold(f64::INFINITY, f64::min);
        let demand: f64 = amounts.iter().sum();
        Ok(((total - demand * min).max(0.0), total))
    }

    /// Spread of path costs on the support: `Σ_{p∈S} (Q_p − mean)²`.
    fn spread(&self, amounts: &[f64], support: &[usize]) -> Result<f64> {
        let q = self.costs(amounts)?;
        let mean = support.iter().map(|&p| q[p]).sum::<f64>() / support.len() as f64;
        Ok(support.iter().map(|&p| (q[p] - mean).powi(2)).sum())
    }
}

fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(parts - 1, total - k, prefix, out);
        prefix.pop();
    }
}

/// Nonzero zero-sum offset vectors in `{−1, 0, 1}^{m−1}`, with the last
/// coordinate balancing the sum.
fn offsets(m: usize) -> Vec<Vec<i64>> {
    let free = m - 1;
    (0..3usize.pow(free as u32))
        .map(|mut code| {
            let mut off = Vec::with_capacity(m);
            for _ in 0..free {
                off.push((code % 3) as i64 - 1);
                code /= 3;
            }
            off.push(-off.iter().sum::<i64>());
            off
        })
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect()
}

/// Minimizes the cost spread over the face of the simplex spanned by
/// `support`: a grid search, then pattern search that halves its step
/// whenever a round finds no improvement.
fn solve_face(ev: &Evaluator, support: &[usize], demand: f64, grid: usize) -> Result<Vec<f64>> {
    let k = ev.paths.len();
    let m = support.len();
    let place = |local: &[f64]| {
        let mut full = vec![0.0; k];
        for (&p, &a) in support.iter().zip(local) {
            full[p] = a;
        }
        full
    };
    if m == 1 {
        return Ok(place(&[demand]));
    }
    let mut points = Vec::new();
    compositions(m, grid, &mut Vec::new(), &mut points);
    let mut best = vec![demand / m as f64; m];
    let mut best_val = ev.spread(&place(&best), support)?;
    for pt in points {
        let cand: Vec<f64> = pt.iter().map(|&c| demand * c as f64 / grid as f64).collect();
        let v = ev.spread(&place(&cand), support)?;
        if v < best_val {
            best_val = v;
            best = cand;
        }
    }
    let dirs = offsets(m);
    let mut step = demand / grid as f64;
    let mut rounds = 0;
    while rounds < MAX_ROUNDS && best_val > 0.0 && step > 1e-17 * demand {
        rounds += 1;
        let centre = best.clone();
        let mut improved = false;
        for off in &dirs {
            let cand: Vec<f64> = centre.iter().zip(off).map(|(a, &o)| a + step * o as f64).collect();
            if cand.iter().any(|&a| a < 0.0) {
                continue;
            }
            let v = ev.spread(&place(&cand), support)?;
            if v < best_val {
                best_val = v;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(place(&best))
}

/// Equilibrium under the instance's own risk model and `gamma`, by support
/// enumeration: for every nonempty set of paths, equalize their costs on
/// that face of the simplex, then keep the candidate with the smallest
/// path-level gap `Σ_p f_p Q_p − d·min_q Q_q`.
///
/// Independent of the iterative solvers. `grid` sets the resolution of the
/// initial search on each face. Fails with [`Error::TooManyPaths`] when the
/// instance has more than four paths.
pub fn brute_force_equilibrium(instance: &NetworkInstance, grid: usize) -> Result<EquilibriumResult> {
    if grid == 0 {
        return Err(Error::Parameter("grid must be >= 1".into()));
    }
    let paths = instance.enumerate_paths(MAX_PATHS)?;
    let k = paths.len();
    let demand = instance.demand();
    let ev = Evaluator { instance, paths };

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for mask in 1usize..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|p| mask & (1 << p) != 0).collect();
        let amounts = solve_face(&ev, &support, demand, grid)?;
        let (gap, total) = ev.gap(&amounts)?;
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, total, amounts));
        }
    }
    let (gap, total, amounts) = best.expect("at least one path");

    let mut path_flow = PathFlow::new();
    for (p, &a) in ev.paths.iter().zip(&amounts) {
        if a > 0.0 {
            path_flow.push(p.clone(), a);
        }
    }
    let flow = instance.induced_edge_flow(&path_flow)?;
    let residual = if total > 0.0 { gap / total } else { gap };
    Ok(EquilibriumResult {
        flow,
        path_flow,
        common_cost: if demand > 0.0 { total / demand } else { 0.0 },
        vi_residual: residual,
        iterations: 1 << k,
        converged: residual <= 1e-8,
    })
}
