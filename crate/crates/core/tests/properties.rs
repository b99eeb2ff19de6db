use proptest::prelude::*;

use minmax_hj::expr::Expr;
use minmax_hj::grid::{GridFunction, InitialCondition};
use minmax_hj::hamiltonian::{flow_end, registry, CutoffProfile};
use minmax_hj::operator::hopf_lax;
use minmax_hj::reference::{solve_lax_friedrichs, FdConfig};
use minmax_hj::selector::{minimax_path_oracle, sigma_mountain_pass, SaddleLandscape};

fn landscape(n: usize, coeffs: &[f64]) -> SaddleLandscape {
    let l = |q: f64, p: f64| {
        coeffs.iter().enumerate().map(|(k, a)| a * ((k as f64 + 1.0) * 0.7 * q + (k as f64 * 1.3 - 1.0) * p).sin()).sum::<f64>() / coeffs.len() as f64
    };
    SaddleLandscape::uniform((-3.0, 3.0), (-3.0, 3.0), n, n, (0.0, 0.0), |q, p| -q * p + 0.5 * l(q, p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mountain_pass_is_additive(coeffs in prop::collection::vec(-1.0f64..1.0, 3), c in -5.0f64..5.0) {
        let land = landscape(30, &coeffs);
        let shifted = SaddleLandscape::from_values(
            land.q_axis().to_vec(), land.p_axis().to_vec(), land.values().iter().map(|v| v + c).collect(), land.center()).unwrap();
        let a = sigma_mountain_pass(&land).unwrap().value;
        let b = sigma_mountain_pass(&shifted).unwrap().value;
        prop_assert_eq!(b, a + c);
    }

    #[test]
    fn mountain_pass_matches_bellman_oracle(coeffs in prop::collection::vec(-1.0f64..1.0, 4)) {
        let land = landscape(24, &coeffs);
        prop_assert_eq!(sigma_mountain_pass(&land).unwrap().value, minimax_path_oracle(&land));
    }

    #[test]
    fn mountain_pass_is_monotone(coeffs in prop::collection::vec(-1.0f64..1.0, 3), bumps in prop::collection::vec(0.0f64..0.5, 900)) {
        let land = landscape(30, &coeffs);
        let raised = SaddleLandscape::from_values(
            land.q_axis().to_vec(), land.p_axis().to_vec(),
            land.values().iter().zip(&bumps).map(|(v, b)| v + b).collect(), land.center()).unwrap();
        let a = sigma_mountain_pass(&land).unwrap().value;
        let b = sigma_mountain_pass(&raised).unwrap().value;
        prop_assert!(a <= b);
        prop_assert!(b - a <= 0.5);
        prop_assert!(land.min() <= a && a <= land.max());
    }

    #[test]
    fn expressions_survive_display(a in -3.0f64..3.0, b in 0.1f64..3.0, q in -2.0f64..2.0, p in -2.0f64..2.0) {
        let src = format!("{a}*sin(q)^2 - exp(-p^2)/{b} + abs(q*p) - cos({b}*p)");
        let e = Expr::parse(&src).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        let (x, y) = (e.eval(0.0, q, p), again.eval(0.0, q, p));
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{} vs {}", x, y);
    }

    #[test]
    fn grid_interpolation_is_exact_at_nodes_and_lipschitz(k in 0.1f64..3.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let g = GridFunction::from_fn(-1.0, 1.0, 0.01, k, |q| (k * q).sin()).unwrap();
        for (i, q) in g.nodes().enumerate().step_by(17) {
            prop_assert_eq!(g.eval(q), g.values()[i]);
        }
        prop_assert!((g.eval(x) - g.eval(y)).abs() <= k * (x - y).abs() + 1e-12);
    }

    #[test]
    fn hopf_lax_on_affine_data(a in -1.5f64..1.5, t in 0.05f64..1.0) {
        let u = GridFunction::from_fn(-3.0, 3.0, 0.01, a.abs(), |q| a * q).unwrap();
        let r = hopf_lax(&registry::quadratic(), &u, 0.0, t).unwrap();
        for (q, v) in r.nodes().zip(r.values()) {
            // u(q) − t·a²/2 up to the velocity grid (spacing h/t)
            prop_assert!((v - (a * q - 0.5 * t * a * a)).abs() <= 0.5 * t * (0.01 / t).powi(2) + 1e-12);
        }
    }

    #[test]
    fn integrable_flow_is_a_translation(q in -5.0f64..5.0, p in -3.0f64..3.0, t in 0.0f64..2.0) {
        let h = registry::nonconvex_bump(2.0);
        let e = flow_end(&h, q, p, 0.0, t, 1e-12).unwrap();
        let hp = h.eval(0.0, q, p);
        prop_assert!((e.p - p).abs() <= 1e-12);
        prop_assert!((e.q - (q + t * hp.dp)).abs() <= 1e-9 * (1.0 + t));
        prop_assert!((e.action - t * (p * hp.dp - hp.value)).abs() <= 1e-9 * (1.0 + t));
    }

    #[test]
    fn cutoff_profile_is_a_monotone_plateau(radius in 0.5f64..20.0, eps in 0.05f64..1.0, r in 0.0f64..1e6) {
        let prof = CutoffProfile::new(radius, eps).unwrap();
        let v = prof.phi(r);
        prop_assert!((0.0..=1.0).contains(&v));
        if r <= radius.max(1.0) {
            prop_assert_eq!(v, 1.0);
        }
        if r >= prof.outer_radius() {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert!(prof.phi(r * 1.01 + 1e-6) <= v);
    }

    #[test]
    fn finite_differences_commute_with_constants(c in -10.0f64..10.0) {
        let u = InitialCondition::Cos.to_grid(-2.0, 2.0, 0.02).unwrap();
        let h = registry::pendulum();
        let a = solve_lax_friedrichs(&h, &u, 0.0, 0.2, &FdConfig::default()).unwrap();
        let b = solve_lax_friedrichs(&h, &u.add_constant(c), 0.0, 0.2, &FdConfig::default()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((y - x - c).abs() <= 1e-11);
        }
    }
}
