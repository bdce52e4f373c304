mod common;

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64 as C;
use common::{gamma, gaussian_state, sigma, var, zero, Moments};
use pcopo::stats::{
    conditional_variance, epr_product, inseparability, joint_quadrature_variance, ModePairMoments, Moments4,
    Pooling,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn moments() -> impl Strategy<Value = Moments> {
    proptest::collection::vec(0.0f64..1.0, 10).prop_map(|v| gaussian_state(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn states_are_physical(g in moments()) {
        prop_assert!(gamma(&g).is_physical(1e-9));
    }

    #[test]
    fn joint_variance_matches_operator_expansion(g in moments(), t in 0.0..PI, p in 0.0..2.0 * PI, l in 0.0f64..3.0) {
        let lib = joint_quadrature_variance(&gamma(&g), t, p, l);
        let oracle = var(&g, sigma(t, p, l));
        prop_assert!((lib - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
    }

    #[test]
    fn epr_product_matches_operator_expansion(g in moments(), t in 0.0..PI, p in 0.0..2.0 * PI) {
        let cond = |t: f64, p: f64| {
            let a = [C::from_polar(1.0, t), zero()];
            let b = [zero(), C::from_polar(1.0, t + p)];
            let both = [a[0], b[1]];
            let (va, vb) = (var(&g, a), var(&g, b));
            let cov = 0.5 * (var(&g, both) - va - vb);
            va - cov * cov / vb
        };
        let gm = gamma(&g);
        let c1 = conditional_variance(&gm, t, p).unwrap();
        prop_assert!((c1 - cond(t, p)).abs() < 1e-10 * (1.0 + c1.abs()));
        let lib = epr_product(&gm, t, p).unwrap();
        let oracle = cond(t, p) * cond(t + 0.5 * PI, p + PI);
        prop_assert!((lib - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
    }

    #[test]
    fn inseparability_matches_operator_expansion(g in moments(), t in 0.0..PI, p in 0.0..2.0 * PI, a in 0.2f64..3.0) {
        let w = |t: f64, p: f64| [C::from_polar(a, t), C::from_polar(1.0 / a, t + p)];
        let sum = var(&g, w(t, p)) + var(&g, w(t + 0.5 * PI, p + PI));
        let lib = inseparability(&gamma(&g), t, p, a).unwrap();
        prop_assert!((lib.sum - sum).abs() < 1e-10 * (1.0 + sum.abs()));
        prop_assert!((lib.ratio - sum / (2.0 * (a * a + 1.0 / (a * a)))).abs() < 1e-10 * (1.0 + sum.abs()));
    }

    #[test]
    fn accumulated_covariances_are_symmetric_psd(seed in 0u64..1000, trajectories in 1usize..5, len in 3usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = ModePairMoments::new(1, 0.5);
        let mut m4 = Moments4::default();
        for _ in 0..trajectories {
            acc.start_trajectory();
            for _ in 0..len {
                let z = |r: &mut ChaCha8Rng| C::new(StandardNormal.sample(r), StandardNormal.sample(r));
                let (p, m) = (z(&mut rng) * 3.0, z(&mut rng) + C::new(2.0, -1.0));
                acc.push(p, m);
                m4.push([2.0 * p.re, 2.0 * p.im, 2.0 * m.re, 2.0 * m.im]);
            }
        }
        for pooling in [Pooling::Global, Pooling::WithinTrajectory] {
            if let Ok(q) = acc.q_covariance(pooling) {
                prop_assert!(q.max_asymmetry() < 1e-12);
                prop_assert!(q.min_eigenvalue() > -1e-9 * (1.0 + q.matrix().abs().max()));
            }
        }
        let c = m4.covariance().unwrap();
        prop_assert!((c - c.transpose()).abs().max() < 1e-12);
        let g = acc.q_covariance(Pooling::Global).unwrap().matrix();
        prop_assert!((c - g).abs().max() < 1e-9 * (1.0 + c.abs().max()));
    }
}

#[test]
fn vacuum_moments_give_boundary_values() {
    let g = Moments { n: Matrix2::zeros(), m: Matrix2::zeros() };
    let gm = gamma(&g);
    assert!((gm.matrix() - nalgebra::Matrix4::identity()).abs().max() < 1e-15);
    for (t, p) in [(0.0, 0.0), (0.4, 1.3), (2.9, 5.0)] {
        assert!((joint_quadrature_variance(&gm, t, p, 1.0) - 2.0).abs() < 1e-12);
        assert!((epr_product(&gm, t, p).unwrap() - 1.0).abs() < 1e-12);
        assert!((inseparability(&gm, t, p, 1.0).unwrap().ratio - 1.0).abs() < 1e-12);
    }
}
