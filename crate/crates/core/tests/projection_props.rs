use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stnp_core::projection::{
    defect_values, sensitivity_bound, singular_values, solve_projection, weighted_norm, Lambda, ProjectionConfig,
    Solver,
};

fn instance(seed: u64, m: usize, n: usize) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let f = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let w = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    (j, f, w)
}

fn cfg(lambda: f64, solver: Solver) -> ProjectionConfig {
    ProjectionConfig {
        lambda: Lambda::Absolute(lambda),
        solver,
        ..Default::default()
    }
}

#[test]
fn rank_deficient_jacobian_is_handled() {
    // two identical columns: the minimal-norm solution splits the weight evenly
    let mut j = DMatrix::zeros(4, 2);
    for i in 0..4 {
        j[(i, 0)] = 1.0 + i as f64;
        j[(i, 1)] = 1.0 + i as f64;
    }
    let f = [1.0, 2.0, 3.0, 4.0];
    let w = [1.0; 4];
    for solver in [Solver::StackedQr, Solver::NormalCholesky, Solver::Svd] {
        let out = solve_projection(&j, &f, &w, &cfg(1e-8, solver)).unwrap();
        assert!((out.gamma[0] - 0.5).abs() < 1e-6 && (out.gamma[1] - 0.5).abs() < 1e-6);
        assert!(out.ls_residual < 1e-6);
    }
}

#[test]
fn relative_lambda_scales_with_sigma_max() {
    let (j, f, w) = instance(9, 30, 8);
    let smax = singular_values(&j, &w).unwrap()[0];
    let rel = ProjectionConfig {
        lambda: Lambda::Relative(1e-3),
        ..Default::default()
    };
    let out = solve_projection(&j, &f, &w, &rel).unwrap();
    assert!((out.lambda - 1e-3 * smax).abs() <= 1e-12 * smax);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvers_agree(seed in 0u64..10_000, m in 2usize..50, n in 1usize..30, lexp in -6.0f64..1.0) {
        let (j, f, w) = instance(seed, m, n);
        let lambda = 10f64.powf(lexp);
        let a = solve_projection(&j, &f, &w, &cfg(lambda, Solver::StackedQr)).unwrap();
        let b = solve_projection(&j, &f, &w, &cfg(lambda, Solver::Svd)).unwrap();
        let c = solve_projection(&j, &f, &w, &cfg(lambda, Solver::NormalCholesky)).unwrap();
        let scale = 1.0 + b.gamma_norm;
        for k in 0..n {
            prop_assert!((a.gamma[k] - b.gamma[k]).abs() <= 1e-6 * scale);
            prop_assert!((c.gamma[k] - b.gamma[k]).abs() <= 1e-4 * scale);
        }
    }

    #[test]
    fn gamma_norm_decreases_with_lambda(seed in 0u64..10_000, m in 2usize..40, n in 1usize..25) {
        let (j, f, w) = instance(seed, m, n);
        let mut last = f64::INFINITY;
        for lambda in [1e-5, 1e-3, 1e-2, 0.1, 0.5, 2.0, 10.0] {
            let out = solve_projection(&j, &f, &w, &cfg(lambda, Solver::StackedQr)).unwrap();
            prop_assert!(out.gamma_norm <= last * (1.0 + 1e-10));
            last = out.gamma_norm;
        }
    }

    #[test]
    fn sensitivity_is_at_most_half_inverse_lambda(seed in 0u64..10_000, m in 2usize..40, n in 1usize..25, lexp in -5.0f64..1.0) {
        let (j, _, w) = instance(seed, m, n);
        let lambda = 10f64.powf(lexp);
        let s = sensitivity_bound(&j, &w, lambda).unwrap();
        prop_assert!(!s.infinite);
        prop_assert!(s.value * 2.0 * lambda <= 1.0 + 1e-12);
    }

    #[test]
    fn delta_identity_and_defect_bound(seed in 0u64..10_000, m in 2usize..40, n in 1usize..25, lexp in -6.0f64..1.0) {
        let (j, f, w) = instance(seed, m, n);
        let lambda = 10f64.powf(lexp);
        let out = solve_projection(&j, &f, &w, &cfg(lambda, Solver::StackedQr)).unwrap();
        let d = defect_values(&j, &f, &out.gamma).unwrap();
        let dn = weighted_norm(&d, &w);
        let rebuilt = (dn * dn + lambda * lambda * out.gamma_norm * out.gamma_norm).sqrt();
        prop_assert!((out.delta - rebuilt).abs() <= 1e-10 * out.delta);
        prop_assert!(dn <= out.delta * (1.0 + 1e-12));
        prop_assert!(out.contraction < 1.0);
        prop_assert!(out.applied_norm <= out.contraction * out.rhs_norm + 1e-10);
        // γ = 0 is feasible, so the regularized residual never exceeds ‖f‖_w
        prop_assert!(out.delta <= out.rhs_norm * (1.0 + 1e-12));
    }
}
