use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ccpb_core::asymptotics::{
    boundary_identity_residuals, gradient_bound_check, sandwich_check, structure_checks,
};
use ccpb_core::energy::{ccpb_energy, pb_energy};
use ccpb_core::limits::c_star_bracket;
use ccpb_core::presets::{ratio_species, reference_species, EtaRule, HALF_EPS, HALF_EPS_SQUARED, REFERENCE_CELLS};
use ccpb_core::solver::{first_integral_profile, solve_batch, SolveJob};
use ccpb_core::{solve_tc, CheckResult, Execution, Field, Grid, Model, SolveReport, SolverConfig};

pub const DEFAULT_GOLDEN: &str = include_str!("../golden/verify.csv");

const STRUCTURE: &[&str] = &["monotone", "antisymmetric_ends", "bounded", "concave_convex"];
const SANDWICH_THRESHOLD: f64 = 0.02;

/// `name -> (reference, tolerance)`
#[derive(Debug, Clone)]
pub struct Golden(BTreeMap<String, (f64, f64)>);

impl Golden {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("name,reference,tolerance") {
            bail!("golden file must start with `name,reference,tolerance`");
        }
        let mut map = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                bail!("golden row {}: expected 3 fields, got {}", i + 2, f.len());
            }
            let num = |s: &str| s.parse::<f64>().with_context(|| format!("golden row {}: `{s}`", i + 2));
            let (r, t) = (num(f[1])?, num(f[2])?);
            if t.is_nan() || t < 0.0 {
                bail!("golden row {}: negative tolerance", i + 2);
            }
            if map.insert(f[0].to_string(), (r, t)).is_some() {
                bail!("golden row {}: duplicate check `{}`", i + 2, f[0]);
            }
        }
        Ok(Self(map))
    }

    fn check(&self, name: &str, value: f64) -> CheckResult {
        match self.0.get(name) {
            Some(&(r, t)) => CheckResult::new(name, value, r, t),
            None => {
                let mut c = CheckResult::new(name, value, f64::NAN, 0.0).with_detail("no golden entry");
                c.pass = false;
                c
            }
        }
    }
}

/// Every check `verify` reports, with its kind, in report order.
pub fn inventory(golden: &Golden) -> Vec<(String, &'static str)> {
    let mut out: Vec<(String, &'static str)> = golden.0.keys().map(|k| (k.clone(), "golden")).collect();
    out.push(("solver.gradient_bound_ccpb_I_eps5".into(), "bound"));
    out.push(("solver.gradient_bound_pb_I_eps5".into(), "bound"));
    for j in [3, 5] {
        for s in STRUCTURE {
            out.push((format!("solver.structure_I_eps{j}.{s}"), "structure"));
        }
    }
    out.push(("envelopes.sandwich_I_eps5".into(), "advisory"));
    out.push(("boundary.scaled_slope_II".into(), "advisory"));
    out.push(("boundary.gap_growth_II".into(), "advisory"));
    out
}

struct Runs(Vec<((&'static str, Model, i32), SolveReport)>);

impl Runs {
    fn get(&self, label: &str, model: Model, j: i32) -> &SolveReport {
        &self.0.iter().find(|(k, _)| *k == (label, model, j)).expect("solve was scheduled").1
    }
}

fn rule(label: &str) -> EtaRule {
    if label == "I" {
        HALF_EPS_SQUARED
    } else {
        HALF_EPS
    }
}

fn reference_runs() -> Result<Runs> {
    let grid = Arc::new(Grid::uniform(REFERENCE_CELLS)?);
    let keys: Vec<(&'static str, Model, i32)> = vec![
        ("I", Model::Ccpb, 3),
        ("I", Model::Ccpb, 5),
        ("II", Model::Ccpb, 3),
        ("II", Model::Ccpb, 5),
        ("I", Model::Pb, 3),
        ("I", Model::Pb, 5),
    ];
    let cfg = SolverConfig { keep_history: false, ..Default::default() };
    let jobs = keys
        .iter()
        .map(|&(label, model, j)| {
            let eps = 2f64.powi(-j);
            Ok(SolveJob {
                sys: reference_species(),
                bd: rule(label).boundary(1.0, -1.0, eps)?,
                eps,
                grid: grid.clone(),
                cfg: cfg.clone(),
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (key, r) in keys.into_iter().zip(solve_batch(Execution::Parallel, &jobs)) {
        let r = r.with_context(|| format!("{} {} eps=2^-{}", key.0, key.1.name(), key.2))?;
        if !r.converged {
            bail!("{} {} eps=2^-{} did not converge after {} iterations", key.0, key.1.name(), key.2, r.iterations);
        }
        out.push((key, r));
    }
    Ok(Runs(out))
}

/// Relative energy decrease found by probing around the solution; zero at a minimizer.
fn energy_probe(r: &SolveReport, energy: impl Fn(&Field) -> ccpb_core::Result<f64>) -> Result<f64> {
    let e0 = energy(&r.field)?;
    let grid = r.field.grid_arc().clone();
    let bumps: [fn(f64) -> f64; 4] = [
        |_| 1.0,
        |x| (std::f64::consts::FRAC_PI_2 * (x + 1.0)).sin(),
        |x| (std::f64::consts::PI * (x + 1.0)).sin(),
        |x| x,
    ];
    let mut worst = 0.0f64;
    for b in bumps {
        for d in [1e-2, -1e-2] {
            let f = Field::from_fn(grid.clone(), |x| r.field.value_at(x) + d * b(x))?;
            worst = worst.max(e0 - energy(&f)?);
        }
    }
    Ok(worst / e0.abs().max(1.0))
}

fn solver_suite(runs: &Runs, g: &Golden, out: &mut Vec<CheckResult>) -> Result<()> {
    let sys = reference_species();
    for (label, model, j) in [("I", Model::Ccpb, 3), ("I", Model::Ccpb, 5), ("II", Model::Ccpb, 3), ("II", Model::Ccpb, 5), ("I", Model::Pb, 3), ("I", Model::Pb, 5)] {
        let r = runs.get(label, model, j);
        out.push(g.check(&format!("solver.{}_{label}_eps{j}_phi0", model.name()), r.phi_at(0.0)));
    }

    let r = runs.get("I", Model::Ccpb, 5);
    let profile = first_integral_profile(&r.field, &sys, r.eps, Model::Ccpb)?;
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    let sd = (profile.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / profile.len() as f64).sqrt();
    out.push(g.check("solver.first_integral_spread_I_eps5", sd / r.first_integral_constant.abs()));
    let bd = HALF_EPS_SQUARED.boundary(1.0, -1.0, r.eps)?;
    let (first, _) = boundary_identity_residuals(&r.field, &sys, &bd, r.eps, r.first_integral_constant)?;
    out.push(g.check("solver.boundary_identity_I_eps5", first.abs()));

    for model in [Model::Ccpb, Model::Pb] {
        let r = runs.get("I", model, 5);
        for mut c in gradient_bound_check(&r.field, &sys, &bd, r.eps, model)?.checks {
            c.name = format!("solver.{}_{}_I_eps5", c.name, model.name());
            out.push(c);
        }
    }
    for j in [3, 5] {
        let r = runs.get("I", Model::Ccpb, j);
        let bd = HALF_EPS_SQUARED.boundary(1.0, -1.0, r.eps)?;
        for mut c in structure_checks(&r.field, &bd, 1e-6).checks {
            c.name = format!("solver.structure_I_eps{j}.{}", c.name);
            out.push(c);
        }
    }
    Ok(())
}

fn limits_suite(runs: &Runs, g: &Golden, out: &mut Vec<CheckResult>) -> Result<()> {
    for k in 1..=3 {
        let sys = ratio_species(k as f64)?;
        out.push(g.check(&format!("limits.c_gamma0_ratio{k}"), solve_tc(&sys, 1.0, 0.0)?.c));
        out.push(g.check(&format!("limits.t_gamma_half_ratio{k}"), solve_tc(&sys, 1.0, 0.5)?.t));
    }
    out.push(g.check("limits.bracket_t1", c_star_bracket(1.0)?));
    let pair = solve_tc(&reference_species(), 1.0, 0.0)?;
    let r = runs.get("I", Model::Ccpb, 5);
    out.push(g.check("limits.I_eps5_phi0_minus_c", (r.phi_at(0.0) - pair.c).abs()));
    Ok(())
}

fn energy_suite(runs: &Runs, g: &Golden, out: &mut Vec<CheckResult>) -> Result<()> {
    let sys = reference_species();
    let r = runs.get("I", Model::Ccpb, 3);
    let bd = HALF_EPS_SQUARED.boundary(1.0, -1.0, r.eps)?;
    let v = energy_probe(r, |f| ccpb_energy(&sys, &bd, r.eps, f))?;
    out.push(g.check("energies.ccpb_I_eps3_minimal", v));
    let r = runs.get("I", Model::Pb, 3);
    let v = energy_probe(r, |f| pb_energy(&sys, &bd, r.eps, f))?;
    out.push(g.check("energies.pb_I_eps3_minimal", v));
    Ok(())
}

fn advisory_suite(runs: &Runs, out: &mut Vec<CheckResult>) -> Result<()> {
    let sys = reference_species();
    let r = runs.get("I", Model::Ccpb, 5);
    let pair = solve_tc(&sys, 1.0, 0.0)?;
    let mut c = sandwich_check(&r.field, &pair, &sys, r.eps, SANDWICH_THRESHOLD)?;
    c.name = "envelopes.sandwich_I_eps5".into();
    out.push(c.advisory());

    // eta * |phi'(1)| stays of order one as eps shrinks
    let slopes: Vec<f64> = [3, 5]
        .iter()
        .map(|&j| {
            let r = runs.get("II", Model::Ccpb, j);
            HALF_EPS.eta(r.eps) * r.field.derivative().last().unwrap().abs()
        })
        .collect();
    out.push(
        CheckResult::at_most("boundary.scaled_slope_II", slopes[0].max(slopes[1]), 2.0)
            .advisory()
            .with_detail(format!("eps=2^-3: {:.4}, eps=2^-5: {:.4}", slopes[0], slopes[1])),
    );

    // boundary values pull away from the data once eta/eps^2 grows
    let gap_i = 1.0 - runs.get("I", Model::Ccpb, 5).field.last();
    let gap_ii = 1.0 - runs.get("II", Model::Ccpb, 5).field.last();
    let mut c = CheckResult::new("boundary.gap_growth_II", gap_ii, gap_i, f64::INFINITY)
        .advisory()
        .with_detail(format!("1 - phi(1): eta=eps/2 {gap_ii:.4} vs eta=eps^2/2 {gap_i:.4}"));
    c.pass = gap_ii > gap_i;
    out.push(c);
    Ok(())
}

/// Runs every suite; the returned checks follow `inventory` order per suite.
pub fn run(golden: &Golden) -> Result<Vec<CheckResult>> {
    let runs = reference_runs()?;
    let mut out = Vec::new();
    solver_suite(&runs, golden, &mut out)?;
    limits_suite(&runs, golden, &mut out)?;
    energy_suite(&runs, golden, &mut out)?;
    advisory_suite(&runs, &mut out)?;
    let unused: Vec<String> = golden.0.keys().filter(|k| !out.iter().any(|c| &c.name == *k)).cloned().collect();
    for name in unused {
        let mut c = CheckResult::new(name, f64::NAN, f64::NAN, 0.0).with_detail("golden entry matches no check");
        c.pass = false;
        out.push(c);
    }
    Ok(out)
}

pub fn format_check(c: &CheckResult) -> String {
    let status = match (c.pass, c.advisory) {
        (true, _) => "PASS",
        (false, true) => "WARN",
        (false, false) => "FAIL",
    };
    let mut s = format!(
        "{status} {} value={:.6e} reference={:.6e} tolerance={:.3e}",
        c.name, c.value, c.reference, c.tolerance
    );
    if c.advisory {
        s.push_str(" (advisory)");
    }
    if !c.detail.is_empty() {
        s.push_str(" : ");
        s.push_str(&c.detail);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_golden_parses_and_lists() {
        let g = Golden::parse(DEFAULT_GOLDEN).unwrap();
        let inv = inventory(&g);
        assert!(inv.iter().any(|(n, k)| n == "solver.ccpb_I_eps5_phi0" && *k == "golden"));
        assert_eq!(inv.iter().filter(|(_, k)| *k == "advisory").count(), 3);
    }

    #[test]
    fn golden_rejects_malformed_rows() {
        assert!(Golden::parse("name,ref\n").is_err());
        assert!(Golden::parse("name,reference,tolerance\na,1\n").is_err());
        assert!(Golden::parse("name,reference,tolerance\na,1,x\n").is_err());
        assert!(Golden::parse("name,reference,tolerance\na,1,-1\n").is_err());
        assert!(Golden::parse("name,reference,tolerance\na,1,1\na,2,1\n").is_err());
    }

    #[test]
    fn missing_entry_fails_the_check() {
        let g = Golden::parse("name,reference,tolerance\na,1,0.1\n").unwrap();
        assert!(g.check("a", 1.05).pass);
        assert!(!g.check("a", 1.2).pass);
        assert!(!g.check("b", 0.0).pass);
    }
}
