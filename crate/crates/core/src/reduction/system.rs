use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::augmentation::{Phase, QPLinearSystem};
use crate::error::{Error, Result};
use crate::lp_transform::LPTransform;
use crate::qpalgebra::{FrequencyBasis, QPSeries, QPStatePoly, SeriesMatrix, StateMonomial};
use crate::simkit::VectorField;

/// `coefficient * x^exponents` added to the derivative of state `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerm {
    pub row: usize,
    pub exponents: Vec<u8>,
    pub coefficient: f64,
}

/// `amplitude * cos|sin(omega_f t)` added to the derivative of state `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTerm {
    pub row: usize,
    pub amplitude: f64,
    /// Index into [`QPSystem::forcing_frequencies`].
    pub freq: usize,
    pub phase: Phase,
}

/// `x' = (B0 + B(t)) x + f(x) + F(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QPSystem {
    pub linear: QPLinearSystem,
    pub nonlinear: Vec<NonlinearTerm>,
    pub forcing: Vec<ForcingTerm>,
    /// `(label, omega)` of each external excitation frequency.
    pub forcing_frequencies: Vec<(String, f64)>,
}

impl QPSystem {
    pub fn new(
        linear: QPLinearSystem,
        nonlinear: Vec<NonlinearTerm>,
        forcing: Vec<ForcingTerm>,
        forcing_frequencies: Vec<(String, f64)>,
    ) -> Result<Self> {
        let n = linear.dim();
        for t in &nonlinear {
            if t.row >= n || t.exponents.len() != n {
                return Err(Error::InvalidInput(alloc::format!(
                    "nonlinear term on row {} with {} exponents does not fit a {n}-state system",
                    t.row,
                    t.exponents.len()
                )));
            }
            if t.exponents.iter().map(|&e| e as u32).sum::<u32>() < 2 {
                return Err(Error::InvalidInput("nonlinear terms must have degree >= 2".into()));
            }
        }
        for f in &forcing {
            if f.row >= n || f.freq >= forcing_frequencies.len() {
                return Err(Error::InvalidInput(alloc::format!(
                    "forcing term on row {} references an undefined state or frequency",
                    f.row
                )));
            }
        }
        let sys = Self {
            linear,
            nonlinear,
            forcing,
            forcing_frequencies,
        };
        sys.extended_basis()?;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    /// Parametric frequencies followed by the forcing frequencies.
    pub fn extended_basis(&self) -> Result<Arc<FrequencyBasis>> {
        let extra: Vec<(&str, f64)> = self.forcing_frequencies.iter().map(|(l, w)| (l.as_str(), *w)).collect();
        self.linear.basis().extended(&extra)
    }

    /// `f(x)` as polynomials over `basis` (constant coefficients).
    pub fn nonlinearity(&self, basis: &Arc<FrequencyBasis>, max_degree: u32, trunc_order: u32) -> Result<Vec<QPStatePoly>> {
        let n = self.dim();
        let mut out: Vec<QPStatePoly> = (0..n).map(|_| QPStatePoly::zero(basis, n, max_degree, trunc_order)).collect();
        for t in &self.nonlinear {
            let c = QPSeries::constant(basis, Complex64::new(t.coefficient, 0.0), trunc_order);
            out[t.row].add_term(StateMonomial::new(&t.exponents), c)?;
        }
        Ok(out)
    }

    /// `F(t)` as series over the extended basis.
    pub fn forcing_series(&self, basis: &Arc<FrequencyBasis>, trunc_order: u32) -> Result<Vec<QPSeries>> {
        let offset = self.linear.basis().dim();
        let mut out: Vec<QPSeries> = (0..self.dim()).map(|_| QPSeries::zero(basis, trunc_order)).collect();
        for f in &self.forcing {
            let k = offset + f.freq;
            let s = match f.phase {
                Phase::Cos => QPSeries::cos(basis, k, f.amplitude, trunc_order),
                Phase::Sin => QPSeries::sin(basis, k, f.amplitude, trunc_order),
            };
            out[f.row] = out[f.row].add(&s)?;
        }
        Ok(out)
    }

    fn forcing_at(&self, t: f64, row: usize) -> f64 {
        self.forcing
            .iter()
            .filter(|f| f.row == row)
            .map(|f| {
                let wt = self.forcing_frequencies[f.freq].1 * t;
                f.amplitude
                    * match f.phase {
                        Phase::Cos => libm::cos(wt),
                        Phase::Sin => libm::sin(wt),
                    }
            })
            .sum()
    }
}

impl VectorField<f64> for QPSystem {
    fn dim(&self) -> usize {
        self.linear.dim()
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        self.linear.eval(t, x, dx);
        for term in &self.nonlinear {
            let mut v = term.coefficient;
            for (&e, xi) in term.exponents.iter().zip(x) {
                for _ in 0..e {
                    v *= xi;
                }
            }
            dx[term.row] += v;
        }
        for row in 0..x.len() {
            if self.forcing.iter().any(|f| f.row == row) {
                dx[row] += self.forcing_at(t, row);
            }
        }
    }
}

/// Settings for expanding the transformed system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformConfig {
    pub trunc_order: u32,
    pub max_degree: u32,
    /// Torus samples per frequency used to expand `P^-1`.
    pub torus_samples: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            trunc_order: crate::qpalgebra::DEFAULT_TRUNC_ORDER,
            max_degree: crate::qpalgebra::DEFAULT_MAX_DEGREE,
            torus_samples: crate::lp_transform::DEFAULT_TORUS_SAMPLES,
        }
    }
}

/// `z' = Jbar z + w(z, t) + Fbar(t)` with `x = P(t) z`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSystem {
    /// Parametric frequencies followed by forcing frequencies.
    pub basis: Arc<FrequencyBasis>,
    /// Number of leading parametric frequencies in `basis`.
    pub parametric_dim: usize,
    pub jbar: Vec<Complex64>,
    /// `P^-1 f(P z)`, one polynomial per modal state.
    pub w: Vec<QPStatePoly>,
    /// `P^-1 F`.
    pub forcing: Vec<QPSeries>,
    /// `P(t)` over `basis`.
    pub p: SeriesMatrix,
    /// `P(t)^-1` over `basis`.
    pub p_inv: SeriesMatrix,
}

/// Applies `x = P(t) z` to the full nonlinear system.
pub fn transform_system(sys: &QPSystem, lp: &LPTransform, cfg: &TransformConfig) -> Result<TransformedSystem> {
    let n = sys.dim();
    if lp.dim() != n {
        return Err(Error::Dim {
            expected: n,
            got: lp.dim(),
        });
    }
    let basis = sys.extended_basis()?;
    let p = lp.p_series()?.truncated(cfg.trunc_order).embed(&basis)?;
    let p_inv = lp
        .p_inverse_series(cfg.torus_samples, cfg.trunc_order)?
        .embed(&basis)?;
    let f = sys.nonlinearity(&basis, cfg.max_degree, cfg.trunc_order)?;
    let w = if f.iter().all(QPStatePoly::is_zero) {
        (0..n).map(|_| QPStatePoly::zero(&basis, n, cfg.max_degree, cfg.trunc_order)).collect()
    } else {
        let vars: Vec<QPStatePoly> = (0..n)
            .map(|k| QPStatePoly::var(&basis, n, k, cfg.max_degree, cfg.trunc_order))
            .collect();
        let images = p.apply(&vars)?;
        let fx: Vec<QPStatePoly> = f.iter().map(|fi| fi.compose(&images)).collect::<Result<_>>()?;
        p_inv.apply(&fx)?
    };
    let forcing_x = sys.forcing_series(&basis, cfg.trunc_order)?;
    let mut forcing = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = QPSeries::zero(&basis, cfg.trunc_order);
        for (j, fj) in forcing_x.iter().enumerate() {
            if !fj.is_zero() {
                acc = acc.add(&p_inv.get(i, j).mul_truncated(fj, cfg.trunc_order)?)?;
            }
        }
        forcing.push(acc);
    }
    Ok(TransformedSystem {
        basis,
        parametric_dim: sys.linear.basis().dim(),
        jbar: lp.jbar().diag.clone(),
        w,
        forcing,
        p,
        p_inv,
    })
}

impl TransformedSystem {
    pub fn dim(&self) -> usize {
        self.jbar.len()
    }

    /// Partner of every mode under complex conjugation of `jbar`.
    pub fn conjugate_partners(&self) -> Vec<usize> {
        conjugate_partners(&self.jbar)
    }

    /// `P(t)` evaluated from its series.
    pub fn p_at(&self, t: f64) -> DMatrix<Complex64> {
        self.p.eval(t)
    }
}

pub(crate) fn conjugate_partners(lambdas: &[Complex64]) -> Vec<usize> {
    (0..lambdas.len())
        .map(|i| {
            let target = lambdas[i].conj();
            let mut best = i;
            let mut dist = f64::INFINITY;
            for (k, l) in lambdas.iter().enumerate() {
                // A mode with a nonzero imaginary part is never its own partner.
                if k == i && lambdas[i].im != 0.0 {
                    continue;
                }
                let d = (l - target).norm();
                if d < dist {
                    dist = d;
                    best = k;
                }
            }
            best
        })
        .collect()
}
