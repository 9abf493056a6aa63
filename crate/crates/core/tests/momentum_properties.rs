mod common;

use common::*;
use fiberframe_core::linalg::unitary_exp;
use fiberframe_core::momentum::{momentum_derivative_torus, surjectivity_witness};
use fiberframe_core::sampling::{gaussian_matrix, haar_unitary, random_hermitian, random_phases, random_skew_hermitian, seeded};
use fiberframe_core::*;
use proptest::prelude::*;
use rand::Rng;

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=4).prop_flat_map(|k| (Just(k), k..=8, any::<u64>()))
}

fn random_xi(rng: &mut fiberframe_core::sampling::SeededRng, k: usize, n: usize) -> LieAlgebraElement {
    let t = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    LieAlgebraElement::new(random_skew_hermitian(rng, k), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn defining_property_holds((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let x = TangentMatrix::new(gaussian_matrix(&mut rng, k, n)).unwrap();
        let xi = random_xi(&mut rng, k, n);
        let res = defining_property_residual(&f, &x, &xi).unwrap();
        prop_assert!(res <= 1e-10 * (1.0 + f.norm() * x.norm() * xi.norm()));
    }

    #[test]
    fn momentum_is_equivariant((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let u = haar_unitary(&mut rng, k);
        let uf = f.left_mul(&u).unwrap();
        let gap = momentum_unitary(&uf).distance(&momentum_unitary(&f).conjugate_by(&u));
        prop_assert!(gap <= 1e-10 * (1.0 + f.as_mat().norm_sqr()));
        let phased = f.scale_columns(&random_phases(&mut rng, n)).unwrap();
        let (a, b) = (momentum_torus(&f), momentum_torus(&phased));
        prop_assert!(max_diff(&a, &b) <= 1e-14 * (1.0 + f.as_mat().norm_sqr()));
    }

    #[test]
    fn torus_coordinate_is_redundant((k, n, seed) in dims()) {
        let f = random_frame(&mut seeded(seed), k, n);
        let mu = momentum(&f);
        let scale = 1.0 + f.as_mat().norm_sqr();
        prop_assert!(mu.redundancy_defect().abs() <= 1e-12 * scale);
        prop_assert!((mu.recover_last_torus() - mu.torus[n - 1]).abs() <= 1e-12 * scale);
    }

    #[test]
    fn derivative_is_onto_exactly_at_full_rank((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let w = HermitianMatrix::new(random_hermitian(&mut rng, k)).unwrap();
        let x = surjectivity_witness(&f, &w).unwrap();
        let hit = momentum_derivative_unitary(&f, &x).unwrap();
        prop_assert!(hit.distance(&w) <= 1e-8 * (1.0 + w.as_mat().norm()));

        prop_assume!(k >= 2);
        let (g, v) = rank_deficient(&mut rng, k, n);
        prop_assert!(surjectivity_witness(&g, &w).is_err());
        for _ in 0..5 {
            let x = TangentMatrix::new(gaussian_matrix(&mut rng, k, n)).unwrap();
            let d = momentum_derivative_unitary(&g, &x).unwrap();
            let q: C64 = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| v[i].conj() * d.as_mat()[(i, j)] * v[j]).sum();
            prop_assert!(q.norm() <= 1e-12 * (1.0 + g.norm() * x.norm()));
        }
    }

    #[test]
    fn field_and_derivative_match_finite_differences((k, n, seed) in dims()) {
        let mut rng = seeded(seed);
        let f = random_frame(&mut rng, k, n);
        let xi = random_xi(&mut rng, k, n);
        let h = 1e-6;
        // B = iH' with H' = -iB Hermitian
        let herm = xi.unitary_part().scale_complex(C64::new(0.0, -1.0));
        let flow = |s: f64| {
            let phases: Vec<C64> = xi.torus_part().iter().map(|t| C64::from_polar(1.0, s * t)).collect();
            (&unitary_exp(&herm, s) * f.as_mat()).scale_columns(&phases)
        };
        let fd = (&flow(h) - &flow(-h)).scale(0.5 / h);
        let field = infinitesimal_field(&f, &xi).unwrap();
        prop_assert!((&fd - field.as_mat()).norm() <= 1e-5 * (1.0 + field.norm()));

        let x = TangentMatrix::new(gaussian_matrix(&mut rng, k, n)).unwrap();
        let at = |s: f64| FrameMatrix::new(f.as_mat() + &x.as_mat().scale(s)).unwrap();
        let du_fd = (momentum_unitary(&at(h)).as_mat() - momentum_unitary(&at(-h)).as_mat()).scale(0.5 / h);
        let du = momentum_derivative_unitary(&f, &x).unwrap();
        prop_assert!((&du_fd - du.as_mat()).norm() <= 1e-5 * (1.0 + du.as_mat().norm()));
        let (tp, tm) = (momentum_torus(&at(h)), momentum_torus(&at(-h)));
        let dt = momentum_derivative_torus(&f, &x).unwrap();
        for j in 0..n {
            prop_assert!(((tp[j] - tm[j]) / (2.0 * h) - dt[j]).abs() <= 1e-5 * (1.0 + dt[j].abs()));
        }
    }
}

#[test]
fn regular_values_need_definite_s_and_negative_torus() {
    let s = diag(&[2.0, 1.0]);
    assert!(is_regular_value(&s, &[-0.5, -0.5, -0.5], 1e-12).is_regular());
    assert!(!is_regular_value(&diag(&[1.0, 0.0]), &[-0.5, -0.5], 1e-12).is_regular());
    assert!(!is_regular_value(&s, &[-0.5, 0.0, -1.0], 1e-12).is_regular());
}
