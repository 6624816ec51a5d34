use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use riskroute::analysis::{check_all_bounds, compute_pra, instance_mu, verify_structural_properties, BoundReport};
use riskroute::instances::{
    build_braess, build_recursive_with_model, closed_form_check, random_instance, rng_from_seed, BraessFunctions,
    FamilyVariant, FunctionFamily, OracleSidecar, RandomShape, RandomSpec, RecursiveFamilySpec,
};
use riskroute::report::{write_bound_csv, BoundRow, Check, CheckReport};
use riskroute::solver::{solve_rawe, solve_rnwe, EquilibriumResult};
use riskroute::NetworkInstance;
use serde_json::json;

use crate::{Family, GenerateArgs, SolveArgs, Status, VerifyArgs};

/// Slack allowed when comparing solver-based PRA against a bound.
pub const BOUND_TOL: f64 = 1e-6;

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

/// `explicit`, else `<dir>/<stem><suffix>` with `dir` defaulting to the
/// instance's own directory.
fn output_path(explicit: &Option<PathBuf>, dir: &Option<PathBuf>, instance: &Path, suffix: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.clone();
    }
    let dir = dir.clone().unwrap_or_else(|| instance.parent().map(Path::to_path_buf).unwrap_or_default());
    dir.join(format!("{}{suffix}", stem(instance)))
}

pub fn sidecar_path(instance: &Path) -> PathBuf {
    instance.with_file_name(format!("{}.oracle.json", stem(instance)))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
        }
        _ => Ok(()),
    }
}

pub fn write_rows(path: &Path, rows: &[BoundRow]) -> Result<()> {
    ensure_parent(path)?;
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_bound_csv(BufWriter::new(file), rows)?;
    Ok(())
}

fn read_instance(path: &Path) -> Result<NetworkInstance> {
    NetworkInstance::read(path).with_context(|| format!("reading instance {}", path.display()))
}

fn recursive_name(spec: &RecursiveFamilySpec) -> String {
    let family = match spec.variant {
        FamilyVariant::Structural => "structural",
        FamilyVariant::Functional => "functional",
    };
    format!("{family}-i{}-gk{}", spec.level, spec.gamma_kappa)
}

pub fn generate(a: &GenerateArgs) -> Result<Status> {
    let model = a.risk_model.into();
    let recursive = match a.family {
        Family::Structural => Some(RecursiveFamilySpec::structural(a.level, a.r_a, a.r_n, a.gamma_kappa)),
        Family::Braess => Some(RecursiveFamilySpec::structural(1, a.r_a, a.r_n, a.gamma_kappa)),
        Family::Functional => Some(RecursiveFamilySpec::functional(a.level, a.gamma_kappa)),
        _ => None,
    };
    let (name, instance, sidecar) = match recursive {
        Some(spec) => {
            let (inst, oracle) = build_recursive_with_model(&spec, model)?;
            let name =
                if a.family == Family::Braess { format!("braess-gk{}", a.gamma_kappa) } else { recursive_name(&spec) };
            (name, inst, Some(OracleSidecar { spec, oracle }))
        }
        None => {
            let inst = match a.family {
                Family::BraessClassic => build_braess(BraessFunctions::classic(), 1.0, a.gamma_kappa, model)?,
                Family::Domino | Family::Random => {
                    let shape = if a.family == Family::Domino { RandomShape::Domino } else { RandomShape::Dag };
                    let spec = RandomSpec::new(shape, FunctionFamily::Affine, model);
                    random_instance(&mut rng_from_seed(a.seed), &spec)?
                }
                _ => unreachable!("recursive families handled above"),
            };
            let name = match a.family {
                Family::BraessClassic => "braess-classic".to_string(),
                Family::Domino => format!("domino-seed{}", a.seed),
                _ => format!("random-seed{}", a.seed),
            };
            (name, inst, None)
        }
    };

    let path = a.out.clone().unwrap_or_else(|| a.out_dir.join(format!("{name}.json")));
    ensure_parent(&path)?;
    instance.write(&path).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {}: {} vertices, {} edges, {} model",
        path.display(),
        instance.vertex_count(),
        instance.edge_count(),
        instance.risk_model()
    );
    if let Some(side) = sidecar {
        let side_path = sidecar_path(&path);
        side.write(&side_path).with_context(|| format!("writing {}", side_path.display()))?;
        println!("wrote {}: expected pra {}", side_path.display(), side.oracle.expected_pra);
        if side.spec.variant == FamilyVariant::Functional {
            let x = instance.induced_edge_flow(&side.oracle.rawe)?;
            println!("mu at the risk-averse equilibrium: {}", instance_mu(&instance, &x)?);
        }
    }
    Ok(Status::Ok)
}

struct Solved {
    instance: NetworkInstance,
    rawe: EquilibriumResult,
    rnwe: EquilibriumResult,
    pra: f64,
}

fn solve_pair(a: &SolveArgs) -> Result<Solved> {
    let mut instance = read_instance(&a.instance)?;
    if let Some(g) = a.gamma {
        instance = instance.with_gamma(g)?;
    }
    let cfg = a.solver.config();
    let rawe = solve_rawe(&instance, &cfg)?;
    let rnwe = solve_rnwe(&instance, &cfg)?;
    let pra = compute_pra(&instance, &rawe, &rnwe)?;
    for (name, r) in [("rawe", &rawe), ("rnwe", &rnwe)] {
        println!(
            "{name}: common_cost {:.9}, social cost {:.9}, residual {:.2e}, {} iterations{}",
            r.common_cost,
            instance.social_cost(&r.flow),
            r.vi_residual,
            r.iterations,
            if r.converged { "" } else { ", NOT CONVERGED" }
        );
    }
    println!("pra: {pra:.9}");
    Ok(Solved { instance, rawe, rnwe, pra })
}

pub fn solve(a: &SolveArgs) -> Result<Status> {
    let s = solve_pair(a)?;
    let path = output_path(&a.out, &a.out_dir, &a.instance, ".solution.json");
    let doc = json!({
        "gamma": s.instance.gamma(),
        "risk_model": s.instance.risk_model(),
        "pra": s.pra,
        "rawe": s.rawe,
        "rnwe": s.rnwe,
    });
    ensure_parent(&path)?;
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(if s.rawe.converged && s.rnwe.converged { Status::Ok } else { Status::CheckFailed })
}

fn level_of(instance: &Path) -> Result<Option<u32>> {
    let side = sidecar_path(instance);
    if !side.exists() {
        return Ok(None);
    }
    let side = OracleSidecar::read(&side).with_context(|| format!("reading {}", side.display()))?;
    Ok(Some(side.spec.level))
}

fn print_bounds(reports: &[BoundReport]) {
    println!("{:<22} {:>12} {:>12} {:>12}  status", "bound", "pra", "value", "slack");
    for r in reports {
        let status = match (r.applicable, r.satisfied) {
            (false, _) => "n/a",
            (true, true) => "ok",
            (true, false) => "VIOLATED",
        };
        println!(
            "{:<22} {:>12.6} {:>12.6} {:>12.6}  {status}",
            r.bound_kind.to_string(),
            r.pra_observed,
            r.bound_value,
            r.slack
        );
    }
}

pub fn analyze(a: &SolveArgs) -> Result<Status> {
    let s = solve_pair(a)?;
    let reports = check_all_bounds(&s.instance, &s.rawe.flow, &s.rnwe.flow, BOUND_TOL)?;
    let first = &reports[0];
    let mu = reports.iter().find_map(|r| r.mu);
    println!(
        "kappa {:.6}, eta {}, mu {}",
        first.kappa,
        first.eta,
        mu.map_or_else(|| "-".into(), |m| format!("{m:.6}"))
    );
    print_bounds(&reports);
    let id = stem(&a.instance);
    let level = level_of(&a.instance)?;
    let rows: Vec<BoundRow> = reports
        .iter()
        .map(|r| BoundRow::from_report(&id, s.instance.vertex_count(), level, s.instance.gamma(), r))
        .collect();
    let path = output_path(&a.out, &a.out_dir, &a.instance, ".bounds.csv");
    write_rows(&path, &rows)?;
    println!("wrote {}", path.display());
    let violated = reports.iter().any(|r| r.applicable && !r.satisfied);
    let converged = s.rawe.converged && s.rnwe.converged;
    Ok(if violated || !converged { Status::CheckFailed } else { Status::Ok })
}

pub fn verify(a: &VerifyArgs) -> Result<Status> {
    let instance = read_instance(&a.instance)?;
    let oracle_path = a.oracle.clone().unwrap_or_else(|| sidecar_path(&a.instance));
    let side =
        OracleSidecar::read(&oracle_path).with_context(|| format!("reading oracle {}", oracle_path.display()))?;

    let mut report = CheckReport::new(format!("verify {}", a.instance.display()));
    report.extend(closed_form_check(&instance, &side.oracle, a.tolerance));
    report.extend(verify_structural_properties(side.spec.level, &instance, &side.oracle));

    let mut rows = Vec::new();
    let flows = instance
        .induced_edge_flow(&side.oracle.rawe)
        .and_then(|x| Ok((x, instance.induced_edge_flow(&side.oracle.rnwe)?)));
    match flows.and_then(|(x, z)| check_all_bounds(&instance, &x, &z, a.tolerance)) {
        Ok(reports) => {
            let mut bounds = CheckReport::new("bounds at oracle flows");
            for r in &reports {
                let detail = format!(
                    "pra {:.9}, bound {:.9}, slack {:.3e}{}",
                    r.pra_observed,
                    r.bound_value,
                    r.slack,
                    if r.applicable { "" } else { " (not applicable)" }
                );
                bounds.push(Check::new(r.bound_kind.to_string(), !r.applicable || r.satisfied, detail));
                rows.push(BoundRow::from_report(
                    stem(&a.instance),
                    instance.vertex_count(),
                    Some(side.spec.level),
                    instance.gamma(),
                    r,
                ));
            }
            report.extend(bounds);
        }
        Err(e) => report.push(Check::fail("bounds at oracle flows", e.to_string())),
    }
    print!("{report}");

    let path = output_path(&a.out, &a.out_dir, &a.instance, ".verify.csv");
    write_rows(&path, &rows)?;
    println!("wrote {}", path.display());

    if report.passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(Status::Ok)
    } else {
        let failures: Vec<_> = report.failures().collect();
        eprintln!("{} of {} checks failed:", failures.len(), report.checks.len());
        for c in failures {
            eprintln!("  {}: {}", c.name, c.detail);
        }
        Ok(Status::CheckFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_sits_next_to_instance() {
        assert_eq!(sidecar_path(Path::new("runs/s2.json")), PathBuf::from("runs/s2.oracle.json"));
    }

    #[test]
    fn output_path_precedence() {
        let inst = Path::new("data/b.json");
        assert_eq!(output_path(&None, &None, inst, ".bounds.csv"), PathBuf::from("data/b.bounds.csv"));
        let dir = Some(PathBuf::from("out"));
        assert_eq!(output_path(&None, &dir, inst, ".bounds.csv"), PathBuf::from("out/b.bounds.csv"));
        let explicit = Some(PathBuf::from("x.csv"));
        assert_eq!(output_path(&explicit, &dir, inst, ".bounds.csv"), PathBuf::from("x.csv"));
    }

    #[test]
    fn recursive_names() {
        assert_eq!(recursive_name(&RecursiveFamilySpec::structural(3, 1.0, 1.0, 0.5)), "structural-i3-gk0.5");
        assert_eq!(recursive_name(&RecursiveFamilySpec::functional(2, 1.0)), "functional-i2-gk1");
    }
}
