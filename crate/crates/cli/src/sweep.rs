use std::path::PathBuf;

use anyhow::{bail, Result};
use rayon::prelude::*;
use riskroute::analysis::{check_bound, BoundKind};
use riskroute::instances::{
    build_recursive_with_model, random_instance, rng_from_seed, FamilyVariant, FunctionFamily, RandomShape, RandomSpec,
    RecursiveFamilySpec,
};
use riskroute::report::BoundRow;
use riskroute::solver::{solve_rawe, solve_rnwe, SolverConfig};
use riskroute::{NetworkInstance, RiskModel};

use crate::commands::{write_rows, BOUND_TOL};
use crate::{Status, SweepArgs, SweepFamily};

const CONJECTURE_SHAPES: [RandomShape; 4] =
    [RandomShape::Dag, RandomShape::SeriesParallel, RandomShape::Braess, RandomShape::Domino];

enum Job {
    Recursive(RecursiveFamilySpec),
    Sample(u64),
}

fn jobs(a: &SweepArgs) -> Result<Vec<Job>> {
    match a.family {
        SweepFamily::Structural | SweepFamily::Functional => {
            if a.levels.is_empty() || a.gamma_kappa.is_empty() {
                bail!("sweep grid is empty: give at least one level and one gamma-kappa value");
            }
            let mut out = Vec::new();
            for &level in &a.levels {
                for &gk in &a.gamma_kappa {
                    let spec = if a.family == SweepFamily::Structural {
                        RecursiveFamilySpec::structural(level, a.r_a, a.r_n, gk)
                    } else {
                        RecursiveFamilySpec::functional(level, gk)
                    };
                    spec.validate()?;
                    out.push(Job::Recursive(spec));
                }
            }
            Ok(out)
        }
        SweepFamily::Random | SweepFamily::Conjecture => {
            if a.samples == 0 {
                bail!("sweep grid is empty: --samples must be positive");
            }
            if a.degree == 0 {
                bail!("--degree must be at least 1");
            }
            Ok((0..a.samples).map(Job::Sample).collect())
        }
    }
}

fn error_row(id: String, message: String) -> BoundRow {
    BoundRow {
        id,
        n: 0,
        i: None,
        gamma: f64::NAN,
        kappa: f64::NAN,
        eta: 0,
        mu: None,
        pra: f64::NAN,
        bound: f64::NAN,
        slack: f64::NAN,
        kind: String::new(),
        status: format!("error: {message}"),
    }
}

fn solved_row(
    id: &str,
    instance: &NetworkInstance,
    level: Option<u32>,
    kind: BoundKind,
    cfg: &SolverConfig,
) -> riskroute::Result<BoundRow> {
    let rawe = solve_rawe(instance, cfg)?;
    let rnwe = solve_rnwe(instance, cfg)?;
    let r = check_bound(instance, &rawe.flow, &rnwe.flow, kind, BOUND_TOL)?;
    let mut row = BoundRow::from_report(id, instance.vertex_count(), level, instance.gamma(), &r);
    if !(rawe.converged && rnwe.converged) {
        row.status = "nonconverged".into();
    }
    Ok(row)
}

fn row(a: &SweepArgs, job: &Job, cfg: &SolverConfig) -> BoundRow {
    let model: RiskModel = a.risk_model.into();
    match job {
        Job::Recursive(spec) => {
            let family = if spec.variant == FamilyVariant::Structural { "structural" } else { "functional" };
            let id = format!("{family}-i{}-gk{}", spec.level, spec.gamma_kappa);
            let kind = match (spec.variant, model) {
                (FamilyVariant::Functional, _) => BoundKind::FunctionalSmooth,
                (FamilyVariant::Structural, RiskModel::MeanVar) => BoundKind::TopologicalEta,
                (FamilyVariant::Structural, RiskModel::MeanStdev) => BoundKind::StdevOneAlt,
            };
            build_recursive_with_model(spec, model)
                .and_then(|(inst, _)| solved_row(&id, &inst, Some(spec.level), kind, cfg))
                .unwrap_or_else(|e| error_row(id, e.to_string()))
        }
        Job::Sample(k) => {
            let seed = a.seed.wrapping_add(*k);
            let family = if a.degree == 1 { FunctionFamily::Affine } else { FunctionFamily::Polynomial(a.degree) };
            let conjecture = a.family == SweepFamily::Conjecture;
            let (shape, model, kind) = if conjecture {
                (CONJECTURE_SHAPES[(*k % 4) as usize], RiskModel::MeanStdev, BoundKind::TopologicalEta)
            } else if model == RiskModel::MeanVar {
                (RandomShape::Dag, model, BoundKind::FunctionalSmooth)
            } else {
                (RandomShape::Dag, model, BoundKind::StdevOneAlt)
            };
            let id = format!("{}-seed{seed}", if conjecture { "conjecture" } else { "synthetic" });
            let spec = RandomSpec::new(shape, family, model);
            let result = random_instance(&mut rng_from_seed(seed), &spec)
                .and_then(|inst| solved_row(&id, &inst, None, kind, cfg));
            match result {
                Ok(mut r) if conjecture => {
                    r.kind = "conjecture-eta".into();
                    if r.status != "nonconverged" {
                        r.status = if r.pra <= r.bound + BOUND_TOL { "ok" } else { "counterexample" }.into();
                    }
                    r
                }
                Ok(r) => r,
                Err(e) => error_row(id, e.to_string()),
            }
        }
    }
}

pub fn run(a: &SweepArgs) -> Result<Status> {
    let cfg = a.solver.config();
    cfg.validate()?;
    let jobs = jobs(a)?;
    let rows: Vec<BoundRow> = jobs.par_iter().map(|j| row(a, j, &cfg)).collect();

    let name = match a.family {
        SweepFamily::Structural => "structural",
        SweepFamily::Functional => "functional",
        SweepFamily::Random => "random",
        SweepFamily::Conjecture => "conjecture",
    };
    let path = a.out.clone().unwrap_or_else(|| a.out_dir.join(PathBuf::from(format!("sweep-{name}.csv"))));
    write_rows(&path, &rows)?;

    println!("{:<28} {:>12} {:>12} {:>10}  status", "id", "pra", "bound", "mu");
    for r in &rows {
        let mu = r.mu.map_or_else(|| "-".into(), |m| format!("{m:.6}"));
        println!("{:<28} {:>12.6} {:>12.6} {:>10}  {}", r.id, r.pra, r.bound, mu, r.status);
    }
    let count = |s: &str| rows.iter().filter(|r| r.status == s).count();
    let errors = rows.iter().filter(|r| r.status.starts_with("error")).count();
    println!(
        "wrote {}: {} rows, {} violated, {} nonconverged, {} errors",
        path.display(),
        rows.len(),
        count("violated"),
        count("nonconverged"),
        errors
    );
    if a.family == SweepFamily::Conjecture {
        println!("experimental: {} counterexamples to pra <= 1 + gamma*kappa*eta", count("counterexample"));
    }
    Ok(if count("violated") > 0 || errors > 0 { Status::CheckFailed } else { Status::Ok })
}
