use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ccpb_core::asymptotics::{nonneutral_checks, nonneutral_structure, NonneutralTolerances};
use ccpb_core::limits::{c_star_bracket, c_star_neutral, SweepTable};
use ccpb_core::solver::{solve_batch, SolveJob};
use ccpb_core::{gamma_sweep, solve, solve_tc, Execution, IonSystem, LimitPair, Model, SolveReport};

use crate::config::{ExperimentConfig, SpeciesSet};
use crate::csv::{format_sig, Cell, CsvTable, DIAGNOSTICS_HEADER, LIMITS_HEADER, SOLUTION_HEADER, SUMMARY_HEADER};

pub fn file_stem(parts: &[&str]) -> String {
    parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.chars()
                .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("_")
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Files written by one command, in write order.
pub type Written = Vec<PathBuf>;

pub fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    if cfg.eps.is_empty() {
        bail!("config `{}` lists no eps values", cfg.name);
    }
    prepare_dir(out)?;
    let solver = cfg.solver.solver_config();
    let mut jobs = Vec::new();
    let mut labels = Vec::new();
    for set in &cfg.species {
        let sys = set.system()?;
        for &model in &cfg.models {
            for &eps in &cfg.eps {
                jobs.push(SolveJob {
                    sys: sys.clone(),
                    bd: cfg.boundary(eps)?,
                    eps,
                    grid: Arc::new(cfg.grid.build(eps)?),
                    cfg: solver.clone(),
                    model: model.into(),
                });
                labels.push((set.name.as_str(), Model::from(model)));
            }
        }
    }
    let results = solve_batch(Execution::Parallel, &jobs);

    let digits = cfg.outputs.precision;
    let mut written = Vec::new();
    let mut failures = Vec::new();
    let mut summaries: Vec<((&str, Model), CsvTable)> = Vec::new();
    for ((label, job), result) in labels.iter().zip(&jobs).zip(results) {
        let report = match result {
            Ok(r) if r.converged => r,
            Ok(r) => {
                failures.push(describe_failure(label, &r));
                continue;
            }
            Err(e) => {
                failures.push(format!("{} {} eps={}: {e}", label.0, label.1.name(), job.eps));
                continue;
            }
        };
        let mut table = CsvTable::new(SOLUTION_HEADER);
        for (x, phi) in report.field.grid().nodes().iter().zip(report.field.values()) {
            table.push(vec![Cell::Num(*x), Cell::Num(*phi)])?;
        }
        let eps_tag = format!("eps{}", format_sig(job.eps, digits));
        let path = out.join(format!("{}.csv", file_stem(&[&cfg.name, label.0, label.1.name(), &eps_tag])));
        table.write(&path, digits)?;
        written.push(path);

        let idx = match summaries.iter().position(|(k, _)| k == label) {
            Some(i) => i,
            None => {
                summaries.push((*label, CsvTable::new(SUMMARY_HEADER)));
                summaries.len() - 1
            }
        };
        summaries[idx].1.push(vec![
            job.eps.into(),
            report.phi_at(0.0).into(),
            report.field.last().into(),
            report.iterations.into(),
            report.first_integral_constant.into(),
        ])?;
        println!(
            "{} {} eps={}: phi(0)={} phi(1)={} iterations={}",
            label.0,
            label.1.name(),
            format_sig(job.eps, digits),
            format_sig(report.phi_at(0.0), digits),
            format_sig(report.field.last(), digits),
            report.iterations
        );
    }
    for ((set, model), table) in &summaries {
        let path = out.join(format!("{}.csv", file_stem(&[&cfg.name, set, model.name(), "summary"])));
        table.write(&path, digits)?;
        written.push(path);
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("{f}");
        }
        bail!("{} of {} solves did not converge", failures.len(), jobs.len());
    }
    Ok(written)
}

fn describe_failure(label: &(&str, Model), r: &SolveReport) -> String {
    format!(
        "{} {} eps={}: not converged after {} iterations (s={:.3e}, last sup change {:.3e}, phi(0)={:.6}, phi(1)={:.6})",
        label.0,
        label.1.name(),
        r.eps,
        r.iterations,
        r.relax_s,
        r.final_delta_sup,
        r.phi_at(0.0),
        r.field.last()
    )
}

fn require_antisymmetric(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.phi_minus != -cfg.phi_plus {
        bail!(
            "limit values need antisymmetric boundary data, got phi_plus={} phi_minus={}",
            cfg.phi_plus,
            cfg.phi_minus
        );
    }
    Ok(())
}

fn limit_row(table: &mut CsvTable, p: &LimitPair, c_neutral: f64) -> Result<()> {
    table.push(vec![
        p.gamma.into(),
        p.t.into(),
        p.c.into(),
        p.t_minus_c().into(),
        c_neutral.into(),
        c_star_bracket(p.t).unwrap_or(f64::NAN).into(),
    ])
}

fn neutral_system(set: &SpeciesSet) -> Result<IonSystem> {
    let sys = set.system()?;
    sys.require_electroneutral().with_context(|| format!("species set `{}`", set.name))?;
    Ok(sys)
}

pub fn cmd_limits(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    require_antisymmetric(cfg)?;
    prepare_dir(out)?;
    let gammas = cfg.limit_gammas()?;
    let mut written = Vec::new();
    for set in &cfg.species {
        let sys = neutral_system(set)?;
        let c_neutral = c_star_neutral(&sys, cfg.phi_plus)?;
        let mut table = CsvTable::new(LIMITS_HEADER);
        for &g in &gammas {
            let p = solve_tc(&sys, cfg.phi_plus, g)?;
            println!(
                "{} gamma={}: t={:.4} c={:.4} c*={:.4} c_*={:.4}",
                set.name,
                format_sig(g, 6),
                p.t,
                p.c,
                c_neutral,
                c_star_bracket(p.t).unwrap_or(f64::NAN)
            );
            limit_row(&mut table, &p, c_neutral)?;
        }
        let path = out.join(format!("{}.csv", file_stem(&[&cfg.name, &set.name, "limits"])));
        table.write(&path, cfg.outputs.precision)?;
        written.push(path);
    }
    Ok(written)
}

pub fn sweep_summary(name: &str, t: &SweepTable) -> String {
    let at: Vec<String> = t.c_extrema.iter().map(|&i| format_sig(t.rows[i].gamma, 4)).collect();
    format!(
        "{name}: monotone_t={} monotone_tc={} c_extrema={}{}",
        t.monotone_t,
        t.monotone_tc,
        t.c_extrema.len(),
        if at.is_empty() { String::new() } else { format!(" at gamma {}", at.join(" ")) }
    )
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    require_antisymmetric(cfg)?;
    prepare_dir(out)?;
    let gammas = cfg.sweep_gammas();
    let mut written = Vec::new();
    for set in &cfg.species {
        let sys = neutral_system(set)?;
        let sweep = gamma_sweep(&sys, cfg.phi_plus, &gammas, Execution::Parallel)?;
        let c_neutral = c_star_neutral(&sys, cfg.phi_plus)?;
        let mut table = CsvTable::new(LIMITS_HEADER);
        for row in &sweep.rows {
            limit_row(&mut table, row, c_neutral)?;
        }
        let path = out.join(format!("{}.csv", file_stem(&[&cfg.name, &set.name, "sweep"])));
        table.write(&path, cfg.outputs.precision)?;
        written.push(path);
        println!("{}", sweep_summary(&set.name, &sweep));
    }
    Ok(written)
}

/// Monovalent anion and cation concentrations of a two-species set.
fn monovalent_pair(set: &SpeciesSet) -> Result<(f64, f64)> {
    match (set.anions.as_slice(), set.cations.as_slice()) {
        ([[1.0, a]], [[1.0, b]]) => Ok((*a, *b)),
        _ => bail!(
            "species set `{}` must hold exactly one monovalent anion and one monovalent cation",
            set.name
        ),
    }
}

pub fn cmd_nonneutral(cfg: &ExperimentConfig, out: &Path) -> Result<Written> {
    if cfg.phi_plus != cfg.phi_minus {
        bail!("non-neutral runs need equal boundary potentials");
    }
    if cfg.kappa.is_empty() || cfg.eps.is_empty() {
        bail!("non-neutral runs need `eps` and `kappa` values");
    }
    prepare_dir(out)?;
    let tol = NonneutralTolerances::default();
    let solver = cfg.solver.solver_config();
    let mut written = Vec::new();
    for set in &cfg.species {
        let (alpha, beta) = monovalent_pair(set)?;
        if alpha >= beta {
            bail!(
                "species set `{}` has alpha={alpha} >= beta={beta}; swap anion and cation \
                 (equivalently replace phi by -phi) so that alpha < beta",
                set.name
            );
        }
        let sys = set.system()?;
        let mut table = CsvTable::new(DIAGNOSTICS_HEADER);
        for &eps in &cfg.eps {
            let grid = Arc::new(cfg.grid.build(eps)?);
            let r = solve(&sys, &cfg.boundary(eps)?, eps, grid, &solver, Model::Ccpb)?;
            if !r.converged {
                bail!("{}", describe_failure(&(set.name.as_str(), Model::Ccpb), &r));
            }
            let structure = nonneutral_structure(&r.field, alpha, beta)?;
            for &kappa in &cfg.kappa {
                let mut rep = nonneutral_checks(&r.field, alpha, beta, eps, kappa, &tol)?;
                rep.checks.extend(structure.checks.iter().cloned());
                println!(
                    "{} eps={} kappa={} lambda={}",
                    set.name,
                    format_sig(eps, 6),
                    kappa,
                    format_sig(rep.lambda.unwrap_or(f64::NAN), 4)
                );
                for k in &rep.checks {
                    println!(
                        "  {:<4} {:<20} {} (reference {}, tolerance {})",
                        if k.pass { "ok" } else { "FAIL" },
                        k.name,
                        format_sig(k.value, 6),
                        format_sig(k.reference, 6),
                        format_sig(k.tolerance, 3)
                    );
                    table.push(vec![
                        eps.into(),
                        kappa.into(),
                        k.name.as_str().into(),
                        k.value.into(),
                        k.reference.into(),
                        k.tolerance.into(),
                        k.pass.into(),
                    ])?;
                }
            }
        }
        let path = out.join(format!("{}.csv", file_stem(&[&cfg.name, &set.name, "diagnostics"])));
        table.write(&path, cfg.outputs.precision)?;
        written.push(path);
    }
    Ok(written)
}
