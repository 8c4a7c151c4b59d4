use std::f64::consts::PI;

use proptest::prelude::*;

use stnp_core::fracops::{GlOrder, UniformGrid};
use stnp_core::models::FbeflConfig;
use stnp_core::reference::{
    classical_cole_hopf, godunov_flux, total_variation, upwind_fbefl, HopfCole, HopfColeConfig,
};

#[test]
fn oracle_at_beta_one_matches_classical_formula() {
    let eps = 0.05;
    let u0 = |x: f64| -(PI * x).sin();
    let hc = HopfCole::new(HopfColeConfig::for_horizon(1.0, eps, 0.5, 2001, 2001), -1.0, 1.0, u0).unwrap();
    let xs: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
    for t in [0.1, 0.5] {
        let a = hc.eval(&xs, t).unwrap();
        let b = classical_cole_hopf(&xs, t, eps, -1.0, 1.0, u0, 8001).unwrap();
        let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        assert!((num / den).sqrt() < 1e-3, "t={t}: {}", (num / den).sqrt());
    }
}

#[test]
fn classical_formula_keeps_odd_symmetry() {
    let xs: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
    let u = classical_cole_hopf(&xs, 0.3, 0.02, -1.0, 1.0, |x| -(PI * x).sin(), 4001).unwrap();
    for i in 0..41 {
        assert!((u[i] + u[40 - i]).abs() < 1e-8);
    }
}

#[test]
fn upwind_stays_bounded_through_the_shock() {
    let g = UniformGrid::new(-1.0, 1.0, 201).unwrap();
    let cfg = FbeflConfig::new(1.6, 0.01, GlOrder::First);
    let u0: Vec<f64> = g.points().iter().map(|x| -(PI * x).sin()).collect();
    let traj = upwind_fbefl(&g, &cfg, &u0, 1e-3, &[1.0]).unwrap();
    let u = traj.last();
    assert!(traj.blow_up.is_none());
    assert!(u.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    assert!(total_variation(u) <= total_variation(&u0) + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn upwind_total_variation_does_not_grow(
        a1 in -1.0f64..1.0,
        a2 in -1.0f64..1.0,
        a3 in -0.5f64..0.5,
        eps in 0.001f64..0.05,
    ) {
        let g = UniformGrid::new(-1.0, 1.0, 81).unwrap();
        let cfg = FbeflConfig::new(1.6, eps, GlOrder::First);
        let u0: Vec<f64> = g
            .points()
            .iter()
            .map(|&x| a1 * (PI * x).sin() + a2 * (2.0 * PI * x).sin() + a3 * (3.0 * PI * x).sin())
            .collect();
        let times = [0.05, 0.1, 0.2, 0.3];
        let traj = upwind_fbefl(&g, &cfg, &u0, 2e-3, &times).unwrap();
        let mut last = total_variation(&u0);
        for u in &traj.snapshots {
            let tv = total_variation(u);
            prop_assert!(tv <= last + 1e-10);
            last = tv;
        }
    }

    #[test]
    fn godunov_flux_is_consistent_and_monotone(u in -3.0f64..3.0, v in -3.0f64..3.0, d in 0.0f64..1.0) {
        prop_assert!((godunov_flux(u, u) - 0.5 * u * u).abs() < 1e-14);
        // nondecreasing in the left state, nonincreasing in the right
        prop_assert!(godunov_flux(u + d, v) >= godunov_flux(u, v) - 1e-14);
        prop_assert!(godunov_flux(u, v + d) <= godunov_flux(u, v) + 1e-14);
    }
}
