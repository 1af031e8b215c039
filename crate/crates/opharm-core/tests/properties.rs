//! Property tests for the core invariants: transform exactness, norm
//! homogeneity, operator orderings and the quantum-torus phase algebra.

use nalgebra::DMatrix;
use opharm_core::field::{
    fft_forward, fft_inverse, lp_field_norm, plancherel_pairing, spectral_pairing, OperatorField,
    SpectrumField,
};
use opharm_core::grid::GridSpec;
use opharm_core::matrix::{abs_square, add_scaled_abs_square, psd_leq, schatten_norm, zero};
use opharm_core::qtorus::{
    clock_shift_rep, qt_adjoint, qt_mul, qt_poisson, qt_trace, rep_product_residual, QTElement,
    Theta,
};
use opharm_core::{MatrixValue, C64};
use proptest::prelude::*;

fn c64_strategy() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = MatrixValue> {
    proptest::collection::vec(c64_strategy(), n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

fn band_field_strategy(
    d: usize,
    n_axis: usize,
    n: usize,
    band: usize,
) -> impl Strategy<Value = OperatorField> {
    let grid = GridSpec::new(d, n_axis).unwrap();
    let freqs: Vec<[i64; 3]> = (0..grid.num_points())
        .map(|i| grid.freq(i))
        .filter(|m| grid.freq_band(m) <= band)
        .collect();
    let count = freqs.len();
    proptest::collection::vec(matrix_strategy(n), count).prop_map(move |mats| {
        let modes: Vec<([i64; 3], MatrixValue)> = freqs.iter().copied().zip(mats).collect();
        fft_inverse(&SpectrumField::from_modes(grid, n, &modes).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fft_roundtrip_is_identity(f in band_field_strategy(1, 16, 2, 5)) {
        let back = fft_inverse(&fft_forward(&f));
        let scale = lp_field_norm(&f, f64::INFINITY).unwrap();
        for s in 0..f.grid().num_points() {
            prop_assert!((back.value(s) - f.value(s)).norm() <= 1e-12 * (1.0 + scale));
        }
    }

    #[test]
    fn plancherel_two_sided(
        f in band_field_strategy(1, 16, 2, 5),
        g in band_field_strategy(1, 16, 2, 5),
    ) {
        let spatial = plancherel_pairing(&f, &g).unwrap();
        let spectral = spectral_pairing(&fft_forward(&f), &fft_forward(&g)).unwrap();
        prop_assert!((spatial - spectral).norm() < 1e-10);
    }

    #[test]
    fn lp_norm_homogeneous_and_adjoint_invariant(
        f in band_field_strategy(1, 16, 2, 4),
        lam in 0.1f64..10.0,
        p in 1.0f64..6.0,
    ) {
        let a = lp_field_norm(&f.scaled(C64::new(lam, 0.0)), p).unwrap();
        let b = lam * lp_field_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + b));
        let c = lp_field_norm(&f.adjoint(), p).unwrap();
        prop_assert!((c - b / lam).abs() <= 1e-10 * (1.0 + b));
    }

    #[test]
    fn schatten_monotone_and_triangle(a in matrix_strategy(3), b in matrix_strategy(3)) {
        let n1 = schatten_norm(&a, 1.0).unwrap();
        let n2 = schatten_norm(&a, 2.0).unwrap();
        let ninf = schatten_norm(&a, f64::INFINITY).unwrap();
        prop_assert!(n1 >= n2 - 1e-12 && n2 >= ninf - 1e-12);
        let sum = schatten_norm(&(&a + &b), 2.0).unwrap();
        prop_assert!(sum <= schatten_norm(&a, 2.0).unwrap() + schatten_norm(&b, 2.0).unwrap() + 1e-12);
    }

    #[test]
    fn operator_cauchy_schwarz_ordering(
        phis in proptest::collection::vec(c64_strategy(), 6),
        mats in proptest::collection::vec(matrix_strategy(2), 6),
        ws in proptest::collection::vec(0.01f64..2.0, 6),
    ) {
        let mut lhs_in = zero(2);
        let mut phi2 = 0.0;
        let mut rhs = zero(2);
        for i in 0..6 {
            lhs_in += &mats[i] * (phis[i] * ws[i]);
            phi2 += ws[i] * phis[i].norm_sqr();
            add_scaled_abs_square(&mut rhs, &mats[i], ws[i]);
        }
        prop_assert!(psd_leq(&abs_square(&lhs_in), &(rhs * C64::new(phi2, 0.0)), 1e-9).unwrap());
    }

    #[test]
    fn qt_product_certified_and_trace_cyclic(
        coeffs_x in proptest::collection::vec(((-2i64..=2, -2i64..=2), c64_strategy()), 1..6),
        coeffs_y in proptest::collection::vec(((-2i64..=2, -2i64..=2), c64_strategy()), 1..6),
    ) {
        let theta = Theta::rational_2d(1, 3).unwrap();
        let to_elem = |list: &[((i64, i64), C64)]| {
            let modes: Vec<([i64; 3], C64)> =
                list.iter().map(|&((a, b), z)| ([a, b, 0], z)).collect();
            QTElement::from_coeffs(theta.clone(), &modes)
        };
        let x = to_elem(&coeffs_x);
        let y = to_elem(&coeffs_y);
        let rep = clock_shift_rep(&theta).unwrap();
        prop_assert!(rep_product_residual(&x, &y, &rep).unwrap() < 1e-10);
        let txy = qt_trace(&qt_mul(&x, &y).unwrap());
        let tyx = qt_trace(&qt_mul(&y, &x).unwrap());
        prop_assert!((txy - tyx).norm() < 1e-12);
        // rep respects the adjoint as well
        let sym = rep.element(&qt_adjoint(&x));
        prop_assert!(opharm_core::matrix::max_abs(&(sym - rep.element(&x).adjoint())) < 1e-12);
    }

    #[test]
    fn qt_poisson_semigroup_law(
        coeffs in proptest::collection::vec(((-4i64..=4, -4i64..=4), c64_strategy()), 1..8),
        r1 in 0.05f64..0.95,
        r2 in 0.05f64..0.95,
    ) {
        let theta = Theta::rational_2d(1, 5).unwrap();
        let modes: Vec<([i64; 3], C64)> =
            coeffs.iter().map(|&((a, b), z)| ([a, b, 0], z)).collect();
        let x = QTElement::from_coeffs(theta, &modes);
        let a = qt_poisson(&qt_poisson(&x, r1).unwrap(), r2).unwrap();
        let b = qt_poisson(&x, r1 * r2).unwrap();
        for (&m, &va) in a.coeffs() {
            prop_assert!((va - b.coeff(&m)).norm() <= 1e-12 * (1.0 + va.norm()));
        }
    }
}
