#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qpreduce_core::augmentation::{augment, modal_split, ParametricTerm, Phase, QPLinearSystem};
use qpreduce_core::lp_transform::{assemble_q, LPTransform};
use qpreduce_core::normal_form::{normal_form_iterate, NormalFormConfig};
use qpreduce_core::qpalgebra::FrequencyBasis;
use qpreduce_core::reduction::{ForcingTerm, NonlinearTerm, QPSystem};

/// Linear part of the coupled Mathieu–Hill pair with stiffnesses `a` and excitation amplitudes `b`, `c`.
pub fn mathieu_hill(a: [f64; 2], b: f64, c: f64) -> QPLinearSystem {
    let basis = FrequencyBasis::new(&[2.0 * PI, 7.0], &["w1", "w2"], 1e-6).unwrap();
    let mut b0 = DMatrix::zeros(4, 4);
    b0[(0, 1)] = 1.0;
    b0[(1, 0)] = -a[0];
    b0[(2, 3)] = 1.0;
    b0[(3, 2)] = -a[1];
    let mut terms = Vec::new();
    for (row, col) in [(1, 0), (3, 2)] {
        for (freq, amp) in [(0, b), (1, c)] {
            if amp != 0.0 {
                terms.push(ParametricTerm {
                    row,
                    col,
                    amplitude: -amp,
                    freq,
                    phase: Phase::Cos,
                });
            }
        }
    }
    QPLinearSystem::new(b0, terms, basis).unwrap()
}

pub fn lp_for(sys: &QPLinearSystem) -> LPTransform {
    let aug = augment(sys);
    let spec = modal_split(&aug.bbar0, aug.physical_dim).unwrap();
    let nf = normal_form_iterate(&aug, &spec, &NormalFormConfig::default()).unwrap();
    assemble_q(&nf, &aug, &spec, sys.basis(), 5).unwrap()
}

/// Forced, cubically coupled Mathieu–Hill pair (`x^2 y` and `y^2 x` coupling, unit forcing at `omega`).
pub fn coupled_example(a: [f64; 2], b: f64, c: f64, omega: f64) -> QPSystem {
    let linear = mathieu_hill(a, b, c);
    let nonlinear = vec![
        NonlinearTerm {
            row: 1,
            exponents: vec![2, 0, 1, 0],
            coefficient: -1.0,
        },
        NonlinearTerm {
            row: 3,
            exponents: vec![1, 0, 2, 0],
            coefficient: -1.0,
        },
    ];
    let forcing = [1, 3]
        .into_iter()
        .map(|row| ForcingTerm {
            row,
            amplitude: 1.0,
            freq: 0,
            phase: Phase::Cos,
        })
        .collect();
    QPSystem::new(linear, nonlinear, forcing, vec![("w".into(), omega)]).unwrap()
}
