//! Lyapunov–Perron transformation: assembly from the normal form and inversion.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::augmentation::{inf_norm, AugmentedSystem, Spectrum};
use crate::error::{Error, Result};
use crate::normal_form::{JBar, NormalForm};
use crate::qpalgebra::{FreqIndex, FrequencyBasis, QPSeries, SeriesMatrix};

/// Largest acceptable `|Q(0) - I|_inf` at assembly.
pub const ASSEMBLY_TOL: f64 = 1e-6;

/// Samples per frequency used when expanding the inverse on the torus.
pub const DEFAULT_TORUS_SAMPLES: usize = 24;

/// Condition number above which a sample is considered singular.
pub const MAX_SAMPLE_CONDITION: f64 = 1e12;

/// `x(t) = Qt(t) V z(t)` with `z' = Jbar z`, `Qt(0) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LPTransform {
    basis: Arc<FrequencyBasis>,
    q: SeriesMatrix,
    q_dot: SeriesMatrix,
    modal: DMatrix<Complex64>,
    modal_inv: DMatrix<Complex64>,
    jbar: JBar,
    /// `|Qt(0) - I|_inf`.
    pub q0_error: f64,
}

impl LPTransform {
    /// Builds a transformation from its parts; `q` must be real with `q(0) = I`.
    pub fn new(q: SeriesMatrix, modal: DMatrix<Complex64>, jbar: JBar) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n || modal.nrows() != n || modal.ncols() != n || jbar.diag.len() != n {
            return Err(Error::Dim {
                expected: n,
                got: modal.nrows(),
            });
        }
        let modal_inv = modal
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Assembly("modal matrix at t = 0 is singular".into()))?;
        let q0_error = inf_norm(&(q.eval(0.0) - DMatrix::identity(n, n)));
        if !(q0_error <= ASSEMBLY_TOL) {
            return Err(Error::Assembly(alloc::format!(
                "|Q(0) - I| = {q0_error:e} exceeds {ASSEMBLY_TOL:e}"
            )));
        }
        Ok(Self {
            basis: q.basis().clone(),
            q_dot: q.ddt(),
            q,
            modal,
            modal_inv,
            jbar,
            q0_error,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    /// The real quasi-periodic factor `Qt(t)`.
    pub fn q(&self) -> &SeriesMatrix {
        &self.q
    }

    /// Constant modal factor `V`.
    pub fn modal(&self) -> &DMatrix<Complex64> {
        &self.modal
    }

    pub fn modal_inv(&self) -> &DMatrix<Complex64> {
        &self.modal_inv
    }

    pub fn jbar(&self) -> &JBar {
        &self.jbar
    }

    /// Real time-invariant matrix `V Jbar V^-1` governing `Qt^-1 x`.
    pub fn lti_matrix(&self) -> DMatrix<f64> {
        (&self.modal * self.jbar.matrix() * &self.modal_inv).map(|c| c.re)
    }

    /// Full modal transformation `P(t) = Qt(t) V` as series.
    pub fn p_series(&self) -> Result<SeriesMatrix> {
        self.q.mul_const(&self.modal)
    }

    /// `P(t)^-1 = V^-1 Qt(t)^-1` as series, expanded on the torus.
    pub fn p_inverse_series(&self, samples: usize, trunc_order: u32) -> Result<SeriesMatrix> {
        self.q_inverse_series(samples, trunc_order)?.premul_const(&self.modal_inv)
    }

    /// Fourier expansion of `Qt^-1` from inverses sampled on a torus grid.
    pub fn q_inverse_series(&self, samples: usize, trunc_order: u32) -> Result<SeriesMatrix> {
        let n = self.dim();
        let mut err = None;
        let coeffs = fourier_on_torus(self.basis.dim(), samples, trunc_order, n * n, |theta, out| {
            let phasors: Vec<Complex64> = theta.iter().map(|&a| Complex64::new(libm::cos(a), libm::sin(a))).collect();
            let m = DMatrix::from_fn(n, n, |i, j| {
                self.q
                    .get(i, j)
                    .iter()
                    .map(|(p, c)| {
                        let mut e = *c;
                        for (k, &pk) in p.iter().enumerate() {
                            e *= phasors[k].powi(pk);
                        }
                        e
                    })
                    .sum::<Complex64>()
            });
            match m.try_inverse() {
                Some(inv) => {
                    for (o, v) in out.iter_mut().zip(inv.transpose().iter()) {
                        *o = *v;
                    }
                }
                None => err = Some(Error::Assembly("Q is singular on the torus grid".into())),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let mut out = SeriesMatrix::zeros(&self.basis, n, n, trunc_order);
        for i in 0..n {
            for j in 0..n {
                let terms = coeffs.iter().map(|(p, v)| (p.clone(), v[i * n + j]));
                let s = QPSeries::from_terms(&self.basis, trunc_order, terms, false)?.into_real(1e-8)?;
                out.set(i, j, s)?;
            }
        }
        Ok(out)
    }
}

/// A time-dependent square matrix with known derivative.
pub trait MatrixPath {
    fn dim(&self) -> usize;
    fn value(&self, t: f64) -> DMatrix<f64>;
    fn derivative(&self, t: f64) -> DMatrix<f64>;
}

impl MatrixPath for LPTransform {
    fn dim(&self) -> usize {
        self.q.nrows()
    }

    fn value(&self, t: f64) -> DMatrix<f64> {
        self.q.eval_real(t)
    }

    fn derivative(&self, t: f64) -> DMatrix<f64> {
        self.q_dot.eval_real(t)
    }
}

/// A matrix path given by closures.
pub struct FnPath<F, G> {
    pub dim: usize,
    pub value: F,
    pub derivative: G,
}

impl<F: Fn(f64) -> DMatrix<f64>, G: Fn(f64) -> DMatrix<f64>> MatrixPath for FnPath<F, G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: f64) -> DMatrix<f64> {
        (self.value)(t)
    }

    fn derivative(&self, t: f64) -> DMatrix<f64> {
        (self.derivative)(t)
    }
}

/// Assembles the transformation from a normal form of the augmented system.
///
/// The fictitious modal states in the composed near-identity map are replaced
/// by their closed-form orbits `c exp(lambda t)`, giving the quasi-periodic
/// modal map `P(t)`; then `Qt(t) = P(t) P(0)^-1` and `V = P(0)`.
pub fn assemble_q(
    nf: &NormalForm,
    aug: &AugmentedSystem,
    spec: &Spectrum,
    basis: &Arc<FrequencyBasis>,
    trunc_order: u32,
) -> Result<LPTransform> {
    let nbar = aug.dim();
    let phys: Vec<usize> = spec.physical_modes().collect();
    let n = aug.physical_dim;
    if phys.len() != n {
        return Err(Error::Assembly("physical mode count differs from the physical dimension".into()));
    }
    // Frequency index of each fictitious mode.
    let mut harmonic: Vec<Option<FreqIndex>> = alloc::vec![None; nbar];
    for k in spec.fictitious_modes() {
        let lam = spec.eigenvalues[k];
        let pair = aug
            .fictitious_pairs
            .iter()
            .find(|p| (p.omega - lam.im.abs()).abs() <= 1e-8 * p.omega)
            .ok_or_else(|| Error::Assembly(alloc::format!("fictitious eigenvalue {lam} matches no excitation")))?;
        let sign = if lam.im > 0.0 { 1 } else { -1 };
        harmonic[k] = Some(basis.unit_index(pair.freq, sign));
    }

    let mut c = SeriesMatrix::zeros(basis, n, n, trunc_order);
    for (row, &j) in phys.iter().enumerate() {
        let mut entries: Vec<Vec<(FreqIndex, Complex64)>> = alloc::vec![Vec::new(); n];
        for (m, s) in nf.transform.composed[j].iter() {
            let e = m.exponents();
            let lin: Vec<usize> = phys.iter().copied().filter(|&k| e[k] > 0).collect();
            if lin.len() != 1 || e[lin[0]] != 1 {
                return Err(Error::Assembly(alloc::format!(
                    "near-identity map is not linear in the physical modes (monomial {e:?})"
                )));
            }
            let col = phys.iter().position(|&k| k == lin[0]).expect("physical");
            let mut coef = s.coeff(&[]);
            let mut idx = basis.zero_index();
            for k in spec.fictitious_modes() {
                for _ in 0..e[k] {
                    coef *= nf.orbit_constants[k];
                    let h = harmonic[k].as_ref().expect("set above");
                    for (a, b) in idx.iter_mut().zip(h) {
                        *a += b;
                    }
                }
            }
            if idx.iter().any(|v| v.unsigned_abs() > trunc_order) {
                continue;
            }
            entries[col].push((idx, coef));
        }
        for (col, terms) in entries.into_iter().enumerate() {
            c.set(row, col, QPSeries::from_terms(basis, trunc_order, terms, false)?)?;
        }
    }
    let mp = DMatrix::from_fn(n, n, |i, k| spec.modal[(i, phys[k])]);
    let p = c.premul_const(&mp)?;
    let v = p.eval(0.0);
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Assembly("P(0) is singular".into()))?;
    let q_complex = p.mul_const(&v_inv)?;
    let mut q = SeriesMatrix::zeros(basis, n, n, trunc_order);
    for i in 0..n {
        for j in 0..n {
            q.set(i, j, q_complex.get(i, j).clone().into_real(1e-8)?)?;
        }
    }
    LPTransform::new(q, v, nf.jbar.clone())
}

/// Fourier coefficients (`|p|_inf <= order`) of a vector-valued function on the `dim`-torus.
///
/// `f(theta, out)` fills `width` values at angle vector `theta`; the transform is
/// carried out one axis at a time on a uniform grid of `samples` points per axis.
pub(crate) fn fourier_on_torus(
    dim: usize,
    samples: usize,
    order: u32,
    width: usize,
    mut f: impl FnMut(&[f64], &mut [Complex64]),
) -> Vec<(FreqIndex, Vec<Complex64>)> {
    let n = samples.max(2 * order as usize + 1);
    let l = 2 * order as usize + 1;
    let total: usize = n.pow(dim as u32);
    let mut data = alloc::vec![Complex64::new(0.0, 0.0); total * width];
    let mut theta = alloc::vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..dim).rev() {
            theta[a] = 2.0 * core::f64::consts::PI * (rem % n) as f64 / n as f64;
            rem /= n;
        }
        f(&theta, &mut data[flat * width..(flat + 1) * width]);
    }
    // Twiddles exp(-i p theta_j) / n for every (p, j).
    let twiddle: Vec<Complex64> = (0..l)
        .flat_map(|q| {
            let p = q as f64 - order as f64;
            (0..n).map(move |j| {
                let a = -2.0 * core::f64::consts::PI * p * j as f64 / n as f64;
                Complex64::new(libm::cos(a), libm::sin(a)) / n as f64
            })
        })
        .collect();
    let mut shape: Vec<usize> = alloc::vec![n; dim];
    for axis in 0..dim {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product::<usize>() * width;
        let mut next = alloc::vec![Complex64::new(0.0, 0.0); outer * l * inner];
        for o in 0..outer {
            for q in 0..l {
                let dst = &mut next[(o * l + q) * inner..(o * l + q + 1) * inner];
                for j in 0..n {
                    let w = twiddle[q * n + j];
                    let src = &data[(o * n + j) * inner..(o * n + j + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        data = next;
        shape[axis] = l;
    }
    let count: usize = l.pow(dim as u32);
    (0..count)
        .map(|flat| {
            let mut idx: FreqIndex = alloc::vec![0; dim].into_iter().collect();
            let mut rem = flat;
            for a in (0..dim).rev() {
                idx[a] = (rem % l) as i32 - order as i32;
                rem /= l;
            }
            (idx, data[flat * width..(flat + 1) * width].to_vec())
        })
        .collect()
}

/// Inverse matrices sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInverse {
    pub times: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
    /// `|Q(t_i) W(t_i) - I|_inf`.
    pub residuals: Vec<f64>,
}

impl SampledInverse {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Linear interpolation between samples (clamped at the ends).
    pub fn interpolate(&self, t: f64) -> DMatrix<f64> {
        let ts = &self.times;
        if t <= ts[0] {
            return self.matrices[0].clone();
        }
        if t >= ts[ts.len() - 1] {
            return self.matrices[ts.len() - 1].clone();
        }
        let k = ts.partition_point(|&s| s <= t) - 1;
        let a = (t - ts[k]) / (ts[k + 1] - ts[k]);
        &self.matrices[k] * (1.0 - a) + &self.matrices[k + 1] * a
    }
}

fn residual(q: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let n = q.nrows();
    let e = q * w - DMatrix::<f64>::identity(n, n);
    e.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn condition(q: &DMatrix<f64>) -> f64 {
    let s = q.clone().singular_values();
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    }
}

/// Inverts the path by a dense solve at every grid time.
pub fn invert_direct<P: MatrixPath + ?Sized>(path: &P, grid: &[f64]) -> Result<SampledInverse> {
    let n = path.dim();
    let mut matrices = Vec::with_capacity(grid.len());
    let mut residuals = Vec::with_capacity(grid.len());
    for &t in grid {
        let q = path.value(t);
        let cond = condition(&q);
        if !(cond <= MAX_SAMPLE_CONDITION) {
            return Err(Error::SingularSample { time: t, condition: cond });
        }
        let w = q
            .clone()
            .lu()
            .solve(&DMatrix::identity(n, n))
            .ok_or(Error::SingularSample { time: t, condition: cond })?;
        residuals.push(residual(&q, &w));
        matrices.push(w);
    }
    Ok(SampledInverse {
        times: grid.to_vec(),
        matrices,
        residuals,
    })
}

/// Elementwise activation applied to the error matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Linear,
    /// Power-sigmoid with steepness `xi` and odd power `p >= 3`.
    PowerSigmoid { xi: f64, p: i32 },
}

impl Activation {
    pub fn apply(self, e: f64) -> f64 {
        match self {
            Activation::Linear => e,
            Activation::PowerSigmoid { xi, p } => {
                if e.abs() >= 1.0 {
                    libm::pow(e, p as f64)
                } else {
                    let k = (1.0 + libm::exp(-xi)) / (1.0 - libm::exp(-xi));
                    k * (1.0 - libm::exp(-xi * e)) / (1.0 + libm::exp(-xi * e))
                }
            }
        }
    }
}

/// Largest admissible `gamma * step` for the explicit recurrent integration.
pub const MAX_GAMMA_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ZnnConfig {
    pub gamma: f64,
    pub activation: Activation,
    pub step: f64,
    /// Output times (ascending, non-negative); integration starts at `t = 0`.
    pub grid: Vec<f64>,
    /// Initial inverse estimate; identity when `None`.
    pub w0: Option<DMatrix<f64>>,
}

impl ZnnConfig {
    /// `gamma` with the default step `0.05 / gamma`.
    pub fn new(gamma: f64, grid: Vec<f64>) -> Self {
        Self {
            gamma,
            activation: Activation::Linear,
            step: 0.05 / gamma,
            grid,
            w0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.step > 0.0) {
            return Err(Error::InvalidInput("ZNN gamma and step must be positive".into()));
        }
        if self.gamma * self.step > MAX_GAMMA_STEP {
            return Err(Error::InvalidInput(alloc::format!(
                "ZNN gamma * step = {} exceeds {MAX_GAMMA_STEP}",
                self.gamma * self.step
            )));
        }
        if self.grid.iter().any(|&t| t < 0.0) || self.grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("ZNN output grid must be ascending and non-negative".into()));
        }
        if let Activation::PowerSigmoid { xi, p } = self.activation {
            if !(xi > 0.0) || p < 3 || p % 2 == 0 {
                return Err(Error::InvalidInput("power-sigmoid needs xi > 0 and odd p >= 3".into()));
            }
        }
        Ok(())
    }
}

/// Integrates `Q W' = -Q' W - gamma F(Q W - I)` with fixed-step RK4.
pub fn invert_znn<P: MatrixPath + ?Sized>(path: &P, cfg: &ZnnConfig) -> Result<SampledInverse> {
    cfg.validate()?;
    let n = path.dim();
    let eye = DMatrix::<f64>::identity(n, n);
    let rhs = |t: f64, w: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let q = path.value(t);
        let e = (&q * w - &eye).map(|v| cfg.activation.apply(v));
        let b = -(path.derivative(t) * w) - e * cfg.gamma;
        q.lu().solve(&b)
    };
    let mut w = cfg.w0.clone().unwrap_or_else(|| eye.clone());
    let mut t = 0.0;
    let mut out = SampledInverse {
        times: Vec::with_capacity(cfg.grid.len()),
        matrices: Vec::with_capacity(cfg.grid.len()),
        residuals: Vec::with_capacity(cfg.grid.len()),
    };
    for &target in &cfg.grid {
        while t < target - 1e-12 * target.max(1.0) {
            let h = cfg.step.min(target - t);
            let fail = Error::Divergence(t);
            let k1 = rhs(t, &w).ok_or(fail.clone())?;
            let k2 = rhs(t + 0.5 * h, &(&w + &k1 * (0.5 * h))).ok_or(fail.clone())?;
            let k3 = rhs(t + 0.5 * h, &(&w + &k2 * (0.5 * h))).ok_or(fail.clone())?;
            let k4 = rhs(t + h, &(&w + &k3 * h)).ok_or(fail.clone())?;
            w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence(t));
            }
        }
        t = target;
        out.residuals.push(residual(&path.value(t), &w));
        out.times.push(t);
        out.matrices.push(w.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_path() -> FnPath<impl Fn(f64) -> DMatrix<f64>, impl Fn(f64) -> DMatrix<f64>> {
        FnPath {
            dim: 2,
            value: |_t| DMatrix::identity(2, 2),
            derivative: |_t| DMatrix::zeros(2, 2),
        }
    }

    fn rotation_path() -> FnPath<impl Fn(f64) -> DMatrix<f64>, impl Fn(f64) -> DMatrix<f64>> {
        FnPath {
            dim: 2,
            value: |t: f64| DMatrix::from_row_slice(2, 2, &[libm::cos(t), -libm::sin(t), libm::sin(t), libm::cos(t)]),
            derivative: |t: f64| {
                DMatrix::from_row_slice(2, 2, &[-libm::sin(t), -libm::cos(t), libm::cos(t), -libm::sin(t)])
            },
        }
    }

    #[test]
    fn direct_inverse_of_identity_and_rotation() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let inv = invert_direct(&identity_path(), &grid).unwrap();
        assert!(inv.matrices.iter().all(|w| *w == DMatrix::identity(2, 2)));
        let path = rotation_path();
        let inv = invert_direct(&path, &grid).unwrap();
        for (t, w) in grid.iter().zip(&inv.matrices) {
            assert!((w - path.value(*t).transpose()).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn singular_sample_is_reported() {
        let path = FnPath {
            dim: 2,
            value: |t: f64| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, t - 1.0]),
            derivative: |_t| DMatrix::zeros(2, 2),
        };
        let err = invert_direct(&path, &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SingularSample { time, .. } if time == 1.0));
    }

    #[test]
    fn znn_fixed_point_and_error_decay() {
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.01).collect();
        let inv = invert_znn(&identity_path(), &ZnnConfig::new(100.0, grid.clone())).unwrap();
        assert!(inv.max_residual() < 1e-15);

        let mut cfg = ZnnConfig::new(100.0, grid);
        cfg.w0 = Some(DMatrix::from_element(2, 2, 0.1) + DMatrix::identity(2, 2));
        let inv = invert_znn(&identity_path(), &cfg).unwrap();
        let e0 = (&inv.matrices[0] - DMatrix::identity(2, 2)).norm();
        let e3 = (&inv.matrices[3] - DMatrix::identity(2, 2)).norm();
        let expected = e0 * libm::exp(-3.0);
        assert!((e3 - expected).abs() <= 0.01 * expected, "{e3} vs {expected}");
    }

    #[test]
    fn znn_tracks_rotation() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let path = rotation_path();
        let inv = invert_znn(&path, &ZnnConfig::new(100.0, grid.clone())).unwrap();
        for (t, w) in grid.iter().zip(&inv.matrices) {
            assert!((w - path.value(*t).transpose()).abs().max() <= 1e-8);
        }
    }

    #[test]
    fn znn_config_limits() {
        let mut cfg = ZnnConfig::new(100.0, alloc::vec![0.0, 1.0]);
        cfg.step = 0.01;
        assert!(cfg.validate().is_err());
        cfg.step = 1e-4;
        cfg.activation = Activation::PowerSigmoid { xi: 4.0, p: 2 };
        assert!(cfg.validate().is_err());
        cfg.activation = Activation::PowerSigmoid { xi: 4.0, p: 3 };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn power_sigmoid_is_odd_and_monotone() {
        let a = Activation::PowerSigmoid { xi: 4.0, p: 3 };
        let mut prev = f64::NEG_INFINITY;
        for i in -40..=40 {
            let e = i as f64 * 0.05;
            let v = a.apply(e);
            assert!((v + a.apply(-e)).abs() < 1e-12);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn torus_fourier_recovers_trigonometric_polynomial() {
        let coeffs = fourier_on_torus(2, 16, 3, 1, |th, out| {
            out[0] = Complex64::new(1.0 + 2.0 * libm::cos(th[0]) - libm::sin(2.0 * th[1] - th[0]), 0.0);
        });
        let get = |p: [i32; 2]| coeffs.iter().find(|(q, _)| q.as_slice() == p).unwrap().1[0];
        assert!((get([0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((get([1, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // -sin(x) = -(e^{ix} - e^{-ix}) / 2i  with x = 2 th1 - th0
        assert!((get([-1, 2]) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        assert!(get([2, 2]).norm() < 1e-14);
    }
}
