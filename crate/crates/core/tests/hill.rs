use frachill::hill::{
    assemble, determinant_grid, log_abs_det, sigma_min, sigma_min_and_nullvector, LambdaGrid,
};
use frachill::system::{principal_power, SystemSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scalar(alpha: f64, a: f64) -> SystemSpec {
    SystemSpec::constant(alpha, 1.0, &DMatrix::from_element(1, 1, a)).unwrap()
}

#[test]
fn constant_scalar_matrix_is_diagonal() {
    let spec = scalar(0.5, -1.5);
    let lambda = c(0.3, 0.2);
    let hm = assemble(&spec, 1, lambda);
    assert_eq!(hm.size(), 3);
    for r in -1i64..=1 {
        let i = hm.block_offset(r);
        let expected = c(-1.5, 0.0) - principal_power(lambda + c(0.0, r as f64), 0.5);
        assert_eq!(hm.matrix()[(i, i)], expected);
        for j in 0..3 {
            if j != i {
                assert_eq!(hm.matrix()[(i, j)], c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn block_structure_of_sinusoidal_system() {
    let spec = SystemSpec::scalar_sinusoid(0.5, 2.0, -1.0, 3.0).unwrap();
    let lambda = c(0.1, -0.4);
    let hm = assemble(&spec, 3, lambda);
    let m = hm.matrix();
    for r in -3i64..=3 {
        for col in -3i64..=3 {
            let v = m[(hm.block_offset(r), hm.block_offset(col))];
            let expected = match r - col {
                0 => c(-1.0, 0.0) - principal_power(lambda + c(0.0, 2.0 * r as f64), 0.5),
                1 => c(0.0, -1.5),
                -1 => c(0.0, 1.5),
                _ => c(0.0, 0.0),
            };
            assert_eq!(v, expected, "block ({r}, {col})");
        }
    }
}

#[test]
fn zero_truncation_is_the_centre_block() {
    let spec = SystemSpec::mathieu(0.7, 1.0, 1.0, 2.0).unwrap();
    let lambda = c(0.5, 0.5);
    let hm = assemble(&spec, 0, lambda);
    let shift = principal_power(lambda, 0.7);
    let expected = DMatrix::from_row_slice(2, 2, &[-shift, c(1.0, 0.0), c(1.0, 0.0), -shift]);
    assert_eq!(hm.matrix(), &expected);
}

#[test]
fn classical_order_subtracts_lambda() {
    let spec = SystemSpec::mathieu(1.0, 1.0, 1.0, 2.0).unwrap();
    let lambda = c(0.37, -0.21);
    let shifted = assemble(&spec, 4, lambda);
    let base = assemble(&spec, 4, c(0.0, 0.0));
    let expected = base.matrix() - DMatrix::<Complex64>::identity(18, 18) * lambda;
    assert!((shifted.matrix() - expected).norm() < 1e-14);
}

#[test]
fn determinant_closed_form() {
    let spec = scalar(0.5, 2.0);
    let n = 6;
    let eval = log_abs_det(&assemble(&spec, n, c(0.0, 0.0))).unwrap();
    let mut expected = 0.0;
    let mut phase = c(1.0, 0.0);
    for k in -(n as i64)..=n as i64 {
        let d = c(2.0, 0.0) - principal_power(c(0.0, k as f64), 0.5);
        expected += d.norm().ln();
        phase *= d / d.norm();
    }
    assert!((eval.log_abs_det - expected).abs() < 1e-12);
    assert!((eval.det_phase - phase).norm() < 1e-12);

    let classical = scalar(1.0, 2.0);
    let lambda = c(0.5, 1.5);
    let e = log_abs_det(&assemble(&classical, 0, lambda)).unwrap();
    assert!((e.log_abs_det - (c(2.0, 0.0) - lambda).norm().ln()).abs() < 1e-14);
}

#[test]
fn determinant_matches_dense_value() {
    let spec = SystemSpec::mathieu(0.6, 1.3, 0.7, 1.9).unwrap();
    let hm = assemble(&spec, 2, c(0.2, 0.3));
    let e = log_abs_det(&hm).unwrap();
    let det = hm.matrix().clone().determinant();
    assert!((e.log_abs_det - det.norm().ln()).abs() < 1e-10);
    assert!((e.det_phase - det / det.norm()).norm() < 1e-10);
}

#[test]
fn exact_singularity() {
    let spec = scalar(0.5, 1.0);
    let hm = assemble(&spec, 0, c(1.0, 0.0));
    let e = log_abs_det(&hm).unwrap();
    assert_eq!(e.log_abs_det, f64::NEG_INFINITY);
    assert!(e.sigma_min <= 1e-12);

    let hm = assemble(&spec, 2, c(1.0, 0.0));
    let (sigma, v) = sigma_min_and_nullvector(&hm).unwrap();
    assert!(sigma <= 1e-12);
    let centre = hm.block_offset(0);
    assert!((v[centre] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((v.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn far_from_roots_sigma_is_large() {
    let spec = SystemSpec::scalar_sinusoid(0.5, 1.0, -1.0, 1.0).unwrap();
    assert!(sigma_min(&assemble(&spec, 20, c(3.0, 0.0))).unwrap() > 0.1);
}

#[test]
fn truncation_nesting() {
    let spec = SystemSpec::mathieu(0.5, 1.0, 1.0, 2.0).unwrap();
    let lambda = c(0.4, 0.1);
    let big = assemble(&spec, 5, lambda);
    let small = assemble(&spec, 4, lambda);
    let n = spec.dim();
    let inner = big.matrix().view((n, n), (small.size(), small.size())).into_owned();
    assert_eq!(&inner, small.matrix());
}

#[test]
fn classical_eigenpairs_are_roots() {
    for spec in [
        SystemSpec::scalar_sinusoid(1.0, 1.0, -1.0, 2.5).unwrap(),
        SystemSpec::mathieu(1.0, 1.0, 1.0, 2.0).unwrap(),
    ] {
        let order = 6;
        let base = assemble(&spec, order, c(0.0, 0.0));
        let eigs = base.matrix().clone().eigenvalues().expect("complex Schur form");
        for mu in eigs.iter() {
            let s = sigma_min(&assemble(&spec, order, *mu)).unwrap();
            assert!(s <= 1e-8, "mu = {mu}: sigma = {s}");
        }
    }
}

#[test]
fn constant_system_root_at_every_truncation() {
    for alpha in [0.3, 0.5, 0.9] {
        let a = 1.7f64;
        let spec = scalar(alpha, a);
        let root = c(a.powf(1.0 / alpha), 0.0);
        for n in [0usize, 5, 20] {
            let hm = assemble(&spec, n, root);
            assert!(sigma_min(&hm).unwrap() <= 1e-12, "alpha {alpha}, N {n}");
            let centre = hm.block_offset(0);
            assert!(hm.matrix()[(centre, centre)].norm() <= 1e-12);
        }
    }
}

#[test]
fn grid_is_row_major_in_real_part() {
    let spec = scalar(0.5, -1.0);
    let grid = LambdaGrid { re: (0.0, 1.0, 3), im: (-0.5, 0.5, 2) };
    let out = determinant_grid(&spec, 2, &grid).unwrap();
    assert_eq!(out.len(), 6);
    assert_eq!(out[1].lambda, c(0.5, -0.5));
    assert_eq!(out[3].lambda, c(0.0, 0.5));
    for e in &out {
        let direct = log_abs_det(&assemble(&spec, 2, e.lambda)).unwrap();
        assert_eq!(e, &direct);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn conjugate_symmetry(re in -1.0..2.0f64, im in -3.0..3.0f64) {
        let spec = SystemSpec::mathieu(0.5, 1.0, 1.0, 2.0).unwrap();
        let s = sigma_min(&assemble(&spec, 5, c(re, im))).unwrap();
        let sc = sigma_min(&assemble(&spec, 5, c(re, -im))).unwrap();
        prop_assert!((s - sc).abs() <= 1e-10);
    }

    #[test]
    fn nullvector_is_unit_and_phase_fixed(re in 0.0..2.0f64, im in -0.5..0.5f64) {
        let spec = SystemSpec::scalar_sinusoid(0.5, 1.0, -1.0, 2.5).unwrap();
        let hm = assemble(&spec, 4, c(re, im));
        let (sigma, v) = sigma_min_and_nullvector(&hm).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let (idx, big) = v.iter().enumerate().fold((0, 0.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
        prop_assert!(v[idx].im.abs() <= 1e-12 * big && v[idx].re > 0.0);
        prop_assert!(((hm.matrix() * &v).norm() - sigma).abs() <= 1e-10);
    }
}
