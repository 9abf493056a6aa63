mod common;

use common::*;
use fiberframe_core::linalg::{hermitian_eigen, vdot, vnorm};
use fiberframe_core::sampling::seeded;
use fiberframe_core::*;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=5).prop_flat_map(|k| (Just(k), k..=k + 6, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn analysis_and_synthesis_are_adjoint((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let v = random_vec(&mut rng, k);
        let z = random_vec(&mut rng, n);
        let lhs = vdot(&z, &analysis(&f, &v).unwrap());
        let rhs = vdot(&synthesis(&f, &z).unwrap(), &v);
        let scale = 1.0 + f.norm() * vnorm(&v) * vnorm(&z);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn trace_equals_total_squared_norm((k, n, seed) in dims()) {
        let f = random_frame(&mut seeded(seed), k, n);
        let gap = frame_operator(&f).trace() - norms_squared(&f).sum();
        prop_assert!(gap.abs() <= 1e-12 * (1.0 + f.as_mat().norm_sqr()));
    }

    #[test]
    fn bounds_are_optimal((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let b = frame_bounds(&f, 1e-12).unwrap();
        let energy = |v: &[C64]| analysis(&f, v).unwrap().iter().map(|c| c.norm_sqr()).sum::<f64>();
        for _ in 0..20 {
            let v = random_vec(&mut rng, k);
            let s = 1.0 / vnorm(&v);
            let v: Vec<C64> = v.iter().map(|c| c * s).collect();
            let e = energy(&v);
            prop_assert!(b.lower - 1e-8 <= e && e <= b.upper + 1e-8);
        }
        let eig = hermitian_eigen(frame_operator(&f).as_mat());
        prop_assert!((energy(&eig.vectors.column(0)) - b.upper).abs() <= 1e-8);
        prop_assert!((energy(&eig.vectors.column(k - 1)) - b.lower).abs() <= 1e-8);
    }

    #[test]
    fn rank_dichotomy((k, n, seed) in dims()) {
        prop_assume!(k >= 2);
        let mut rng = seeded(seed);
        let full = random_frame(&mut rng, k, n);
        prop_assert!(full.is_frame());
        prop_assert!(frame_bounds(&full, 1e-10).is_ok());
        let (deficient, _) = rank_deficient(&mut rng, k, n);
        prop_assert!(!deficient.is_frame());
        prop_assert!(frame_bounds(&deficient, 1e-10).is_err());
        let sigma = deficient.singular_values();
        prop_assert!(sigma[k - 1] <= 1e-6);
    }
}

#[test]
fn tight_frames_satisfy_parseval() {
    for (k, n) in [(2, 3), (2, 5), (3, 4), (3, 7), (4, 9)] {
        let f = random_frame_on_fiber(&FiberTarget::funtf(k, n).unwrap(), (10 * k + n) as u64).unwrap();
        assert!(is_tight(&f, 1e-10) && is_funtf(&f, 1e-10));
        let a = frame_bounds(&f, 1e-12).unwrap().lower;
        assert!((a - n as f64 / k as f64).abs() < 1e-9);
        let mut rng = seeded(n as u64);
        for _ in 0..100 {
            let v = random_vec(&mut rng, k);
            let e: f64 = analysis(&f, &v).unwrap().iter().map(|c| c.norm_sqr()).sum();
            assert!((e - a * vnorm(&v).powi(2)).abs() <= 1e-8);
        }
    }
}
