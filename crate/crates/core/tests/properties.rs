use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pdalm::kkt::multipliers_from_gradient;
use pdalm::linalg::{default_drop_tol, factor_symmetric_indefinite, project_box};

fn boxed_point() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(0.1..5.0f64, n),
            prop::collection::vec(0.0..1.0f64, n),
            prop::collection::vec(-100.0..100.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn multiplier_split_recovers_gradient((lo, width, t, g) in boxed_point()) {
        let n = lo.len();
        let lower = DVector::from_vec(lo.clone());
        let upper = DVector::from_fn(n, |i, _| lo[i] + width[i]);
        let x = DVector::from_fn(n, |i, _| lo[i] + t[i] * width[i]);
        let g = DVector::from_vec(g);
        let m = multipliers_from_gradient(&x, &g, &lower, &upper);
        for i in 0..n {
            prop_assert!((m.sigma[i] - m.rho[i] - g[i]).abs() <= 1e-12 * g[i].abs().max(1.0));
            // sign pattern follows the gradient
            prop_assert!(m.sigma[i] * g[i] >= 0.0);
            prop_assert!(m.rho[i] * g[i] <= 0.0);
        }
    }

    #[test]
    fn projection_is_idempotent_and_inside((lo, width, _t, v) in boxed_point()) {
        let n = lo.len();
        let lower = DVector::from_vec(lo.clone());
        let upper = DVector::from_fn(n, |i, _| lo[i] + width[i]);
        let p = project_box(&DVector::from_vec(v), &lower, &upper).unwrap();
        prop_assert_eq!(project_box(&p, &lower, &upper).unwrap(), p.clone());
        for i in 0..n {
            prop_assert!(lower[i] <= p[i] && p[i] <= upper[i]);
        }
    }

    #[test]
    fn indefinite_solve_has_small_residual(
        entries in prop::collection::vec(-1.0..1.0f64, 36),
        rhs in prop::collection::vec(-1.0..1.0f64, 6),
        shift in -2.0..2.0f64,
    ) {
        let b = DMatrix::from_vec(6, 6, entries);
        let a = (&b + b.transpose()) * 0.5 + DMatrix::identity(6, 6) * shift;
        let f = factor_symmetric_indefinite(&a, default_drop_tol(&a)).unwrap();
        prop_assume!(!f.is_singular());
        let inertia = f.inertia();
        prop_assert_eq!(inertia.positive + inertia.negative + inertia.zero, 6);
        let r = DVector::from_vec(rhs);
        let x = f.solve(&r).unwrap();
        let cond_guard = a.norm() * x.norm() + r.norm();
        prop_assert!((&a * &x - &r).norm() <= 1e-10 * cond_guard);
    }
}
