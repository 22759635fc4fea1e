use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use blockshrink::function_space::{
    cos_basis_eval, fejer_approximation, fejer_approximation_with, fourier_coefficients,
    pinsker_constant, tensor_basis_eval, CosineBasisIndex, CosineSeries, FejerMeans, GridFunction,
    TensorIndex,
};

#[test]
fn basis_values() {
    assert_eq!(cos_basis_eval(CosineBasisIndex(0), 0.37).unwrap(), 1.0);
    assert_abs_diff_eq!(
        cos_basis_eval(CosineBasisIndex(1), 0.0).unwrap(),
        std::f64::consts::SQRT_2,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        cos_basis_eval(CosineBasisIndex(2), 0.25).unwrap(),
        0.0,
        epsilon = 1e-15
    );
    assert!(cos_basis_eval(CosineBasisIndex(1), 1.5).is_err());
    assert_eq!(
        tensor_basis_eval(&TensorIndex(vec![0, 0]), &[0.1, 0.9]).unwrap(),
        1.0
    );
    assert_abs_diff_eq!(
        tensor_basis_eval(&TensorIndex(vec![1, 1]), &[0.0, 0.0]).unwrap(),
        2.0,
        epsilon = 1e-14
    );
    assert!(tensor_basis_eval(&TensorIndex(vec![1]), &[0.0, 0.0]).is_err());
}

#[test]
fn pinsker_values() {
    // mpmath evaluation of [a/(pi(a+1))]^{2a/(2a+1)} [Q(2a+1)]^{1/(2a+1)}
    assert_abs_diff_eq!(
        pinsker_constant(1.0, 1.0).unwrap(),
        0.4235654288,
        epsilon = 1e-9
    );
    assert_abs_diff_eq!(
        pinsker_constant(2.0, 1.0).unwrap(),
        0.3992097094,
        epsilon = 1e-9
    );
    assert!(pinsker_constant(1.0, 1e-12).unwrap() < 1e-3);
    assert!(pinsker_constant(0.5, 1.0).is_err());
}

#[test]
fn gram_matrix_is_identity() {
    for j in 0..=20 {
        for k in 0..=20 {
            let g = GridFunction::from_fn(1, 512, |p| {
                cos_basis_eval(CosineBasisIndex(j), p[0]).unwrap()
                    * cos_basis_eval(CosineBasisIndex(k), p[0]).unwrap()
            })
            .unwrap();
            assert_abs_diff_eq!(
                g.integral(),
                if j == k { 1.0 } else { 0.0 },
                epsilon = 1e-10
            );
        }
    }
}

#[test]
fn fejer_of_first_basis_function() {
    let f = GridFunction::from_fn(1, 512, |p| {
        cos_basis_eval(CosineBasisIndex(1), p[0]).unwrap()
    })
    .unwrap();
    let a = fejer_approximation(&f, 2).unwrap();
    for (u, v) in a.values().iter().zip(f.values()) {
        assert_abs_diff_eq!(*u, 0.5 * v, epsilon = 1e-12);
    }
}

#[test]
fn cubic_means_leave_the_range_in_two_dimensions() {
    // a spike at a corner node
    let mut v = vec![0.0; 32 * 32];
    v[0] = 1.0;
    let f = GridFunction::from_values(2, 32, v).unwrap();
    let cubic = fejer_approximation_with(&f, 4, FejerMeans::CubicPartialSums).unwrap();
    let product = fejer_approximation_with(&f, 4, FejerMeans::Product).unwrap();
    assert!(cubic.min() < -1e-3);
    assert!(product.min() >= -1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fejer_preserves_range(values in prop::collection::vec(0.01f64..10.0, 256), order in 1usize..20) {
        let f = GridFunction::from_values(1, 256, values).unwrap();
        let a = fejer_approximation(&f, order).unwrap();
        prop_assert!(a.min() >= f.min() - 1e-6);
        prop_assert!(a.max() <= f.max() + 1e-6);
    }

    #[test]
    fn fejer_preserves_range_in_two_dimensions(values in prop::collection::vec(0.01f64..10.0, 32 * 32), order in 1usize..10) {
        let f = GridFunction::from_values(2, 32, values).unwrap();
        let a = fejer_approximation(&f, order).unwrap();
        prop_assert!(a.min() >= f.min() - 1e-6);
        prop_assert!(a.max() <= f.max() + 1e-6);
    }

    #[test]
    fn fejer_fixes_constants(c in -50.0f64..50.0, order in 1usize..16) {
        let a = fejer_approximation(&GridFunction::constant(2, 32, c).unwrap(), order).unwrap();
        for v in a.values() {
            prop_assert!((v - c).abs() <= 1e-8);
        }
    }

    #[test]
    fn fejer_is_linear(
        f in prop::collection::vec(-5.0f64..5.0, 128),
        g in prop::collection::vec(-5.0f64..5.0, 128),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        order in 1usize..30,
    ) {
        let f = GridFunction::from_values(1, 128, f).unwrap();
        let g = GridFunction::from_values(1, 128, g).unwrap();
        let lhs = fejer_approximation(&f.linear_combination(a, &g, b).unwrap(), order).unwrap();
        let rhs = fejer_approximation(&f, order).unwrap()
            .linear_combination(a, &fejer_approximation(&g, order).unwrap(), b).unwrap();
        for (u, v) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn parseval_for_band_limited(coefs in prop::collection::vec(-2.0f64..2.0, 1..30)) {
        let count = coefs.len();
        let series = CosineSeries::univariate(coefs.clone());
        let f = series.to_grid(512).unwrap();
        let back = fourier_coefficients(&f, &[count - 1]).unwrap();
        let energy: f64 = back.coefficients().iter().map(|c| c * c).sum();
        let integral = f.map(|v| v * v).unwrap().integral();
        prop_assert!((energy - integral).abs() <= 1e-8);
        for (u, v) in back.coefficients().iter().zip(&coefs) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }
}
