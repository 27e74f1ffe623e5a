use std::sync::Arc;

use ccpb_core::asymptotics::*;
use ccpb_core::presets::*;
use ccpb_core::solver::first_integral_profile;
use ccpb_core::*;

fn reference_solve(j: i32, rule: EtaRule, model: Model) -> (SolveReport, BoundaryData) {
    let eps = 2f64.powi(-j);
    let bd = rule.boundary(1.0, -1.0, eps).unwrap();
    let grid = Arc::new(Grid::uniform(REFERENCE_CELLS).unwrap());
    let cfg = SolverConfig { keep_history: false, ..Default::default() };
    let r = solve(&reference_species(), &bd, eps, grid, &cfg, model)
        .unwrap()
        .require_converged()
        .unwrap();
    (r, bd)
}

#[test]
fn reference_solution_diagnostics() {
    let sys = reference_species();
    let (r, bd) = reference_solve(5, HALF_EPS_SQUARED, Model::Ccpb);
    let eps = r.eps;

    let grad = gradient_bound_check(&r.field, &sys, &bd, eps, Model::Ccpb).unwrap();
    assert!(grad.all_pass(), "{:?}", grad.checks);
    assert!((grad.m1.unwrap() - 0.2479).abs() < 1e-4);

    assert!((r.first_integral_constant + 1.0).abs() <= 0.05, "{}", r.first_integral_constant);
    let profile = first_integral_profile(&r.field, &sys, eps, Model::Ccpb).unwrap();
    let mean = profile.iter().sum::<f64>() / profile.len() as f64;
    let sd = (profile.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / profile.len() as f64).sqrt();
    assert!(sd <= 0.01 * r.first_integral_constant.abs(), "sd {sd}");

    let (first, second) = boundary_identity_residuals(&r.field, &sys, &bd, eps, r.first_integral_constant).unwrap();
    assert!(first.abs() <= 1e-2, "{first}");
    assert!(second.unwrap().abs() <= 1e-2);

    let pair = solve_tc(&sys, 1.0, 0.0).unwrap();
    let clean = sandwich_check(&r.field, &pair, &sys, eps, 0.02).unwrap();
    assert!(clean.pass && clean.advisory, "{}", clean.detail);

    // corrupt one node inside the plus-side layer
    let delta = first_integral_delta(&r.field, &sys, pair.c, eps, 0.02).unwrap();
    let node = r.field.grid().nearest_node(1.0 - 2.0 * eps);
    let mut values = r.field.values().to_vec();
    values[node] += 0.2;
    let corrupted = Field::new(r.field.grid_arc().clone(), values).unwrap();
    let bad = sandwich_check_with_delta(&corrupted, &pair, &sys, eps, 0.02, delta).unwrap();
    assert!(!bad.pass);
    assert!(bad.detail.contains(&format!("node {node} ")), "{}", bad.detail);
    assert!(!sandwich_check(&corrupted, &pair, &sys, eps, 0.02).unwrap().pass);

    let pb_grad = {
        let (p, _) = reference_solve(5, HALF_EPS_SQUARED, Model::Pb);
        assert!(p.phi_at(0.0).abs() <= 1e-3);
        gradient_bound_check(&p.field, &sys, &bd, eps, Model::Pb).unwrap()
    };
    assert!(pb_grad.all_pass(), "{:?}", pb_grad.checks);
}

#[test]
fn sandwich_is_vacuous_without_a_layer() {
    let sys = reference_species();
    let grid = Arc::new(Grid::uniform(64).unwrap());
    let f = Field::constant(grid, 0.0);
    let pair = solve_tc(&sys, 1.0, 1e6).unwrap();
    let r = sandwich_check(&f, &pair, &sys, 0.1, 0.02).unwrap();
    assert!(r.pass && r.detail.contains("empty"));
    let other = IonSystem::from_pairs(&[(1.0, 1.0)], &[(1.0, 1.0)]).unwrap();
    assert!(sandwich_check(&f, &pair, &other, 0.1, 0.02).is_err());
}

#[test]
fn stern_layer_preset_structure() {
    let (r, bd) = reference_solve(3, HALF_EPS, Model::Ccpb);
    let rep = structure_checks(&r.field, &bd, 1e-6);
    assert!(rep.all_pass(), "{:?}", rep.checks);
    assert!(rep.x_star.unwrap().abs() < 0.05);
}

fn nonneutral(j: i32) -> SolveReport {
    let eps = 2f64.powi(-j);
    let (m, g, h) = nonneutral_grid_params(eps);
    let grid = Arc::new(Grid::graded(m, g, h).unwrap());
    let sys = IonSystem::from_pairs(&[(1.0, NONNEUTRAL_ALPHA)], &[(1.0, NONNEUTRAL_BETA)]).unwrap();
    let bd = BoundaryData::new(0.0, 0.0, 0.0).unwrap();
    let cfg = SolverConfig { keep_history: false, ..Default::default() };
    solve(&sys, &bd, eps, grid, &cfg, Model::Ccpb).unwrap().require_converged().unwrap()
}

#[test]
fn nonneutral_structure_and_interior_decay() {
    let tol = NonneutralTolerances::default();
    let mut lambdas = Vec::new();
    for j in [3, 4, 5] {
        let r = nonneutral(j);
        let s = nonneutral_structure(&r.field, NONNEUTRAL_ALPHA, NONNEUTRAL_BETA).unwrap();
        assert!(s.all_pass(), "{:?}", s.checks);
        let d2 = r.field.second_differences();
        assert!(d2.iter().all(|v| *v <= 1e-12), "phi is concave");
        let rep = nonneutral_checks(&r.field, NONNEUTRAL_ALPHA, NONNEUTRAL_BETA, r.eps, 0.5, &tol).unwrap();
        assert!(rep.get("eps2_slope_plus").unwrap().pass);
        assert!(rep.get("interior_expansion").unwrap().pass);
        lambdas.push(rep.lambda.unwrap());
    }
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]), "{lambdas:?}");
}

#[test]
fn nonneutral_all_checks_hold_at_smaller_eps() {
    let r = nonneutral(5);
    let rep = nonneutral_checks(&r.field, 1.0, 2.0, r.eps, 0.5, &NonneutralTolerances::default()).unwrap();
    assert!(rep.all_pass(), "{:?}", rep.failures().collect::<Vec<_>>());
}
