mod common;

use nalgebra::DMatrix;
use qpreduce_core::lp_transform::{invert_direct, invert_znn, MatrixPath, ZnnConfig, DEFAULT_TORUS_SAMPLES};
use qpreduce_core::simkit::{integrate, rms, rms_diff, FnField};

use common::{lp_for, mathieu_hill};

fn grid(n: usize, t1: f64) -> Vec<f64> {
    (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn transform_starts_at_identity() {
    let lp = lp_for(&mathieu_hill([3.0, 5.0], 2.5, 2.5));
    assert!(lp.q0_error <= 1e-8, "{}", lp.q0_error);
}

#[test]
fn constant_system_has_constant_transform() {
    let lp = lp_for(&mathieu_hill([3.0, 5.0], 0.0, 0.0));
    for t in [0.0, 0.7, 3.1] {
        assert!((lp.value(t) - DMatrix::identity(4, 4)).abs().max() < 1e-14);
    }
}

#[test]
fn direct_and_recurrent_inverses_agree() {
    let lp = lp_for(&mathieu_hill([3.0, 5.0], 2.5, 2.5));
    let g = grid(1000, 50.0);
    let direct = invert_direct(&lp, &g).unwrap();
    assert!(direct.max_residual() <= 1e-10);
    let znn = invert_znn(&lp, &ZnnConfig::new(100.0, g.clone())).unwrap();
    assert!(znn.max_residual() <= 1e-4, "{}", znn.max_residual());
    for ((t, a), b) in g.iter().zip(&direct.matrices).zip(&znn.matrices) {
        if *t >= 0.1 {
            assert!((a - b).abs().max() <= 1e-4);
        }
    }
}

#[test]
fn inverse_series_matches_samples() {
    let lp = lp_for(&mathieu_hill([3.0, 5.0], 2.5, 2.5));
    let inv = lp.q_inverse_series(DEFAULT_TORUS_SAMPLES, 5).unwrap();
    for t in grid(200, 20.0) {
        let w = inv.eval_real(t);
        let e = lp.value(t) * w - DMatrix::identity(4, 4);
        assert!(e.abs().max() <= 1e-6, "t={t} {}", e.abs().max());
    }
}

#[test]
fn transformed_linear_system_tracks_direct_integration() {
    let sys = mathieu_hill([3.0, 5.0], 0.5, 0.5);
    let lp = lp_for(&sys);
    let x0 = [0.1, 0.0, 0.1, 0.0];
    let direct = integrate(&sys, &x0, (0.0, 50.0), 1e-3).unwrap();
    let r = lp.lti_matrix();
    let lti = FnField::new(4, move |_t: f64, x: &[f64], dx: &mut [f64]| {
        for i in 0..4 {
            dx[i] = (0..4).map(|j| r[(i, j)] * x[j]).sum();
        }
    });
    let y = integrate(&lti, &x0, (0.0, 50.0), 1e-3).unwrap();
    let mapped = y.map(4, |t, s, out: &mut [f64]| {
        let q = lp.value(t);
        for i in 0..4 {
            out[i] = (0..4).map(|j| q[(i, j)] * s[j]).sum();
        }
    });
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let a = direct.component(k);
        let b = mapped.component(k);
        worst = worst.max(rms_diff(&a, &b) / rms(&a));
    }
    println!("relative rms {worst}");
    assert!(worst <= 0.02, "{worst}");
}
