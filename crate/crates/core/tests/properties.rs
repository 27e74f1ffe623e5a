use std::sync::Arc;

use approx::assert_relative_eq;
use ccpb_core::asymptotics::{np_fields, sandwich_envelopes, sign_changes, SandwichConstants};
use ccpb_core::fem::{solve_tridiagonal, TridiagonalSystem};
use ccpb_core::grid::trapz;
use ccpb_core::*;
use proptest::prelude::*;

fn species_list(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    (
        prop::sample::subsequence(vec![1.0, 2.0, 3.0, 4.0], 1..=max),
        prop::collection::vec(0.05f64..2.0, max),
    )
        .prop_map(|(z, c)| z.into_iter().zip(c).collect())
}

/// Random anions with cations rescaled to balance the charge.
fn neutral_system() -> impl Strategy<Value = IonSystem> {
    (species_list(3), species_list(3)).prop_map(|(an, ca)| {
        let qa: f64 = an.iter().map(|(z, c)| z * c).sum();
        let qc: f64 = ca.iter().map(|(z, c)| z * c).sum();
        let ca: Vec<(f64, f64)> = ca.into_iter().map(|(z, c)| (z, c * qa / qc)).collect();
        IonSystem::from_pairs(&an, &ca).unwrap()
    })
}

proptest! {
    #[test]
    fn f_prime_matches_central_difference(sys in neutral_system(), s in -1.5f64..1.5) {
        let h = 1e-5;
        let fd = (sys.f(s + h).unwrap() - sys.f(s - h).unwrap()) / (2.0 * h);
        let exact = sys.f_prime(s).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn neutral_f_has_its_minimum_at_zero(sys in neutral_system(), s in -3.0f64..3.0) {
        prop_assert!(sys.f_excess(s).unwrap() >= -1e-12);
        prop_assert!(sys.f_prime(0.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn imbalance_scales_linearly(an in species_list(3), ca in species_list(3), k in 0.1f64..10.0) {
        let sys = IonSystem::from_pairs(&an, &ca).unwrap();
        let scaled = sys.scaled(k).unwrap();
        assert_relative_eq!(scaled.charge_imbalance(), k * sys.charge_imbalance(), epsilon = 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn concentrations_are_normalized(a in 0.1f64..3.0, b in 0.1f64..3.0, amp in -3.0f64..3.0, w in 0.5f64..6.0) {
        let g = Arc::new(Grid::uniform(300).unwrap());
        let f = Field::from_fn(g.clone(), |x| amp * (w * x).sin()).unwrap();
        let np = np_fields(&f, a, b).unwrap();
        assert_relative_eq!(trapz(&g, &np.n), a, max_relative = 1e-10);
        assert_relative_eq!(trapz(&g, &np.p), b, max_relative = 1e-10);
        prop_assert!(np.n.iter().chain(&np.p).all(|v| *v > 0.0));
    }

    // Scaling every concentration by `lambda` scales f by `lambda`; the limit
    // pair is unchanged when gamma scales by 1/sqrt(lambda).
    #[test]
    fn limit_pair_scaling(sys in neutral_system(), lambda in 0.2f64..5.0, gamma in 0.01f64..5.0) {
        let p = solve_tc(&sys, 1.0, gamma).unwrap();
        let q = solve_tc(&sys.scaled(lambda).unwrap(), 1.0, gamma / lambda.sqrt()).unwrap();
        prop_assert!((p.t - q.t).abs() < 1e-8, "{} {}", p.t, q.t);
        prop_assert!((p.c - q.c).abs() < 1e-8);
        prop_assert!(p.c.abs() < p.t && p.t <= 1.0);
    }

    #[test]
    fn thomas_residual_is_small(
        rows in prop::collection::vec((-1.0f64..1.0, 2.5f64..4.0, -1.0f64..1.0, -5.0f64..5.0), 2..80)
    ) {
        let n = rows.len();
        let sub: Vec<f64> = rows[1..].iter().map(|r| r.0).collect();
        let diag: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let sup: Vec<f64> = rows[..n - 1].iter().map(|r| r.2).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let sys = TridiagonalSystem::new(sub, diag, sup, rhs.clone()).unwrap();
        let x = solve_tridiagonal(&sys).unwrap();
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(sys.residual(&x).iter().all(|r| r.abs() <= 1e-12 * scale));
    }

    #[test]
    fn graded_grid_is_symmetric_and_sorted(min_cell in 1e-4f64..1e-2, growth in 1.05f64..1.5, k in 2.0f64..20.0) {
        let interior = (min_cell * k).min(0.2);
        let g = Grid::graded(min_cell, growth, interior);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let x = g.nodes();
        prop_assert_eq!(x[0], -1.0);
        prop_assert_eq!(*x.last().unwrap(), 1.0);
        prop_assert!(x.windows(2).all(|w| w[1] > w[0]));
        for i in 0..x.len() {
            prop_assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-12);
        }
        let widths: Vec<f64> = g.cell_widths().collect();
        prop_assert!(widths[0] <= min_cell * (1.0 + 1e-9));
    }

    #[test]
    fn sign_changes_ignore_scale(v in prop::collection::vec(-1.0f64..1.0, 3..50), k in 0.01f64..100.0) {
        let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
        prop_assert_eq!(sign_changes(&v, 1e-6), sign_changes(&scaled, 1e-6));
    }

    #[test]
    fn envelopes_are_ordered(
        alpha1 in 0.2f64..3.0,
        beta2 in 0.05f64..1.0,
        delta in 1e-6f64..0.3,
        v_end in 0.05f64..2.0,
        eps in 0.01f64..0.2,
        dist in 0.0f64..0.5,
    ) {
        let q2 = alpha1 + beta2;
        let plus = SandwichConstants {
            delta,
            k: 1.0 - delta.sqrt(),
            shift: 1.0 + (delta / q2).sqrt(),
            v_end,
        };
        let (lo, hi) = sandwich_envelopes(alpha1, beta2, &plus, eps, Side::Plus, 1.0 - dist);
        prop_assert!(lo <= hi + 1e-12, "plus {lo} {hi}");
        let minus = SandwichConstants {
            delta,
            k: 1.0 - delta.sqrt(),
            shift: 1.0 - (delta / (alpha1 * (-v_end).exp() + beta2)).sqrt(),
            v_end: -v_end,
        };
        prop_assume!(minus.shift > 0.0);
        let (lo, hi) = sandwich_envelopes(alpha1, beta2, &minus, eps, Side::Minus, -1.0 + dist);
        prop_assert!(lo <= hi + 1e-12, "minus {lo} {hi}");
    }
}
