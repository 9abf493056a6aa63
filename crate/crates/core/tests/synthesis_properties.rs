mod common;

use common::*;
use fiberframe_core::sampling::{random_phases, seeded};
use fiberframe_core::synthesis::{random_commutant_unitary, ADMISSIBILITY_TOL};
use fiberframe_core::*;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=5).prop_flat_map(|k| (Just(k), k..=12, any::<u64>()))
}

fn measured(f: &FrameMatrix) -> (Vec<f64>, Vec<f64>) {
    (frame_operator(f).eigenvalues(), norms_squared(f).values().to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn construction_round_trip((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let (lambda, r) = random_admissible(&mut rng, k, n);
        prop_assert!(majorized(&lambda, &r, 1e-12).is_ok());
        let spec = SpectrumSpec::new(lambda.clone()).unwrap();
        let norms = NormSquaredVector::new(r.clone()).unwrap();
        prop_assert!(is_admissible(&spec, &norms, ADMISSIBILITY_TOL).unwrap().is_admissible());
        let f = construct_frame(&spec, &norms).unwrap();
        let (ev, nr) = measured(&f);
        prop_assert!(max_diff(&ev, &lambda) <= 1e-8);
        prop_assert!(max_diff(&nr, &r) <= 1e-8);
    }

    #[test]
    fn verdict_matches_majorization_oracle((k, n, seed) in dims(), bump in 0.01f64..1.0) {
        let mut rng = seeded(seed);
        let (lambda, mut r) = random_admissible(&mut rng, k, n);
        prop_assume!(n > k);
        // move mass onto the largest entry, keeping the total
        let top = (0..n).max_by(|&a, &b| r[a].partial_cmp(&r[b]).unwrap()).unwrap();
        let take = bump * r.iter().enumerate().filter(|&(j, _)| j != top).map(|(_, x)| x).sum::<f64>();
        let others = (n - 1) as f64;
        for (j, x) in r.iter_mut().enumerate() {
            if j == top { *x += take } else { *x -= take / others }
        }
        prop_assume!(r.iter().all(|&x| x >= 0.0));
        let verdict = is_admissible(&SpectrumSpec::new(lambda.clone()).unwrap(), &NormSquaredVector::new(r.clone()).unwrap(), ADMISSIBILITY_TOL).unwrap();
        match (majorized(&lambda, &r, ADMISSIBILITY_TOL), verdict) {
            (Ok(()), Admissibility::Admissible) => {}
            (Err(ell), Admissibility::Violated(AdmissibilityViolation::PartialSum { ell: got, .. })) => prop_assert_eq!(ell, got),
            (oracle, verdict) => prop_assert!(false, "oracle {:?} vs {:?}", oracle, verdict),
        }
    }

    #[test]
    fn produced_frames_pass_necessity((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let (ev, nr) = measured(&f);
        prop_assert!(majorized(&ev, &nr, 1e-6).is_ok());
        let (lambda, r) = random_admissible(&mut rng, k, n);
        let t = FiberTarget::new(diag(&lambda), NormSquaredVector::new(r).unwrap()).unwrap();
        let g = random_frame_on_fiber(&t, seed).unwrap();
        let (ev, nr) = measured(&g);
        prop_assert!(majorized(&ev, &nr, 1e-6).is_ok());
    }

    #[test]
    fn gauge_moves_fix_the_fiber((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let (mut lambda, _) = random_admissible(&mut rng, k, n);
        if k >= 2 { lambda[1] = lambda[0]; }
        let r = admissible_norms(&mut rng, &lambda, n);
        let t = FiberTarget::new(diag(&lambda), NormSquaredVector::new(r).unwrap()).unwrap();
        let f = random_frame_on_fiber(&t, seed ^ 1).unwrap();
        let base = fiber_distance(&f, &t).unwrap();
        let g = f.scale_columns(&random_phases(&mut rng, n)).unwrap();
        let g = g.left_mul(&random_commutant_unitary(t.s(), &mut rng)).unwrap();
        prop_assert!(frame_operator(&g).distance(&frame_operator(&f)) <= 1e-12 * (1.0 + t.s().trace()));
        prop_assert!(max_diff(norms_squared(&g).values(), norms_squared(&f).values()) <= 1e-12 * (1.0 + t.s().trace()));
        prop_assert!(fiber_distance(&g, &t).unwrap() <= base + 1e-12 * (1.0 + t.s().trace()));
    }
}

#[test]
fn funtf_for_every_small_shape() {
    for k in 2..10 {
        for n in k + 1..=10 {
            let f = construct_on_fiber(&FiberTarget::funtf(k, n).unwrap()).unwrap();
            let want = HermitianMatrix::scaled_identity(k, n as f64 / k as f64);
            assert!(frame_operator(&f).distance(&want) <= 1e-8, "k={k} n={n}");
            assert!(max_diff(norms_squared(&f).values(), &vec![1.0; n]) <= 1e-8);
        }
    }
}

#[test]
fn zero_norm_targets_are_rejected() {
    let r = NormSquaredVector::new(vec![2.0, 1.0, 0.0]).unwrap();
    assert!(FiberTarget::new(diag(&[2.0, 1.0]), r).is_err());
}
