//! Near-identity normal-form transformations of the augmented modal system.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::augmentation::{AugmentedSystem, Spectrum};
use crate::error::{Error, Result};
use crate::qpalgebra::{FreqIndex, FrequencyBasis, QPSeries, QPStatePoly, StateMonomial};

/// Default highest degree normalized.
pub const DEFAULT_MAX_ORDER: u32 = 4;

/// Default resonance tolerance relative to `max |lambda|`.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-6;

/// Divisors within this of zero are reported as exact resonances.
pub const EXACT_RESONANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Exact,
    Near,
    Clear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceEntry {
    pub order: u32,
    pub component: usize,
    pub monomial: StateMonomial,
    pub index: FreqIndex,
    pub divisor: Complex64,
    pub class: Classification,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceReport {
    pub entries: Vec<ResonanceEntry>,
    pub tolerance: f64,
}

impl ResonanceReport {
    pub fn resonant(&self) -> impl Iterator<Item = &ResonanceEntry> {
        self.entries.iter().filter(|e| e.class != Classification::Clear)
    }
}

/// Classifies a divisor against the resonance tolerance.
pub fn classify(divisor: Complex64, tol: f64) -> Classification {
    let d = divisor.norm();
    if d <= EXACT_RESONANCE {
        Classification::Exact
    } else if d < tol {
        Classification::Near
    } else {
        Classification::Clear
    }
}

/// Solution of one homological equation.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalSolution {
    pub h: Vec<QPStatePoly>,
    pub retained: Vec<QPStatePoly>,
    pub entries: Vec<ResonanceEntry>,
}

/// Solves `(i p.omega + m.lambda - lambda_j) h = f` term by term.
///
/// Components with `active[j] == false` are left untouched (zero `h`, nothing
/// retained). Terms whose divisor is below `tol` are moved to `retained`.
pub fn homological_solve(
    lambdas: &[Complex64],
    f_r: &[QPStatePoly],
    active: &[bool],
    order: u32,
    tol: f64,
) -> Result<HomologicalSolution> {
    if f_r.len() != lambdas.len() || active.len() != lambdas.len() {
        return Err(Error::Dim {
            expected: lambdas.len(),
            got: f_r.len().min(active.len()),
        });
    }
    let mut h = Vec::with_capacity(f_r.len());
    let mut retained = Vec::with_capacity(f_r.len());
    let mut entries = Vec::new();
    for (j, f) in f_r.iter().enumerate() {
        let mut hj = QPStatePoly::zero(f.basis(), f.state_dim(), f.max_degree(), f.trunc_order());
        let mut rj = hj.clone();
        if active[j] {
            for (m, s) in f.iter() {
                let weight = m.weight(lambdas) - lambdas[j];
                for (p, c) in s.iter() {
                    let divisor = Complex64::new(0.0, f.basis().frequency(p)) + weight;
                    let class = classify(divisor, tol);
                    entries.push(ResonanceEntry {
                        order,
                        component: j,
                        monomial: m.clone(),
                        index: p.clone(),
                        divisor,
                        class,
                    });
                    let (target, value) = if class == Classification::Clear {
                        (&mut hj, c / divisor)
                    } else {
                        (&mut rj, *c)
                    };
                    let term = QPSeries::from_terms(f.basis(), f.trunc_order(), [(p.clone(), value)], false)?;
                    target.add_term(m.clone(), term)?;
                }
            }
        }
        h.push(hj);
        retained.push(rj);
    }
    Ok(HomologicalSolution { h, retained, entries })
}

/// Composition of near-identity maps `v = T(w)`, `T = (id + h_2) o (id + h_3) o ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct NearIdentityTransform {
    /// `h_terms[r - 2]` is the degree-`r` generator.
    pub h_terms: Vec<Vec<QPStatePoly>>,
    /// The composed map, one polynomial per modal state.
    pub composed: Vec<QPStatePoly>,
}

/// Time-invariant matrix of the physical block after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct JBar {
    pub diag: Vec<Complex64>,
}

impl JBar {
    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.diag.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFormConfig {
    pub max_order: u32,
    /// Absolute resonance tolerance; `None` means `1e-6 * max |lambda|`.
    pub tol: Option<f64>,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
            tol: None,
        }
    }
}

/// Result of normalizing an augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub transform: NearIdentityTransform,
    pub jbar: JBar,
    pub report: ResonanceReport,
    /// Constants `c` with `u(t) = c exp(lambda t)` for every modal state (zero on physical modes).
    pub orbit_constants: Vec<Complex64>,
    /// Retained nonlinear terms that could not be folded into `jbar`.
    pub remaining: Vec<QPStatePoly>,
}

/// Normalizes the physical block of the modal system through degree `cfg.max_order`.
///
/// Resonant terms linear in a physical mode on its own component, multiplied
/// by fictitious factors of zero net frequency, are evaluated on the
/// fictitious orbit and folded into `jbar`.
pub fn normal_form_iterate(aug: &AugmentedSystem, spec: &Spectrum, cfg: &NormalFormConfig) -> Result<NormalForm> {
    let nbar = aug.dim();
    if spec.dim() != nbar {
        return Err(Error::Dim {
            expected: nbar,
            got: spec.dim(),
        });
    }
    let max_order = cfg.max_order.max(1);
    let lambdas = &spec.eigenvalues;
    let lam_max = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = cfg.tol.unwrap_or(DEFAULT_RELATIVE_TOL * lam_max);
    let active: Vec<bool> = spec.fictitious.iter().map(|f| !f).collect();
    let trivial = FrequencyBasis::trivial();
    let var = |k: usize| QPStatePoly::var(&trivial, nbar, k, max_order, 0);

    // Modal nonlinearity g(v) = M^-1 f(M v) on physical components.
    let images: Vec<QPStatePoly> = (0..nbar)
        .map(|i| linear_combination(&trivial, nbar, max_order, |k| spec.modal[(i, k)]))
        .collect();
    let f_modal: Vec<QPStatePoly> = aug
        .coupling
        .iter()
        .map(|c| c.with_limits(max_order, 0).compose(&images))
        .collect::<Result<_>>()?;
    let mut g: Vec<QPStatePoly> = Vec::with_capacity(nbar);
    for j in 0..nbar {
        let mut acc = QPStatePoly::zero(&trivial, nbar, max_order, 0);
        if active[j] {
            for (i, fi) in f_modal.iter().enumerate() {
                let w = spec.modal_inv[(j, i)];
                if w.norm() > 0.0 && !fi.is_zero() {
                    acc = acc.add(&fi.scale(w))?;
                }
            }
        }
        g.push(acc);
    }

    let mut composed: Vec<QPStatePoly> = (0..nbar).map(var).collect();
    let mut h_terms = Vec::new();
    let mut retained: Vec<QPStatePoly> = (0..nbar).map(|_| QPStatePoly::zero(&trivial, nbar, max_order, 0)).collect();
    let mut report = ResonanceReport {
        entries: Vec::new(),
        tolerance: tol,
    };
    for r in 2..=max_order {
        let f_r: Vec<QPStatePoly> = g.iter().map(|gj| gj.homogeneous(r)).collect();
        let sol = homological_solve(lambdas, &f_r, &active, r, tol)?;
        report.entries.extend(sol.entries);
        for (acc, ret) in retained.iter_mut().zip(&sol.retained) {
            *acc = acc.add(ret)?;
        }
        if sol.h.iter().all(QPStatePoly::is_zero) {
            h_terms.push(sol.h);
            continue;
        }
        g = transform_field(lambdas, &g, &sol.h, max_order)?;
        let shifted: Vec<QPStatePoly> = (0..nbar).map(|k| var(k).add(&sol.h[k])).collect::<Result<_>>()?;
        composed = composed.iter().map(|t| t.compose(&shifted)).collect::<Result<_>>()?;
        h_terms.push(sol.h);
    }

    // Fictitious orbit constants: u(0) = M^-1 xbar(0).
    let mut x0 = DVector::from_element(nbar, Complex64::new(0.0, 0.0));
    for (i, v) in aug.fictitious_init().into_iter().enumerate() {
        x0[aug.physical_dim + i] = Complex64::new(v, 0.0);
    }
    let u0 = &spec.modal_inv * x0;
    let orbit_constants: Vec<Complex64> = (0..nbar)
        .map(|k| if spec.fictitious[k] { u0[k] } else { Complex64::new(0.0, 0.0) })
        .collect();

    let mut diag: Vec<Complex64> = (0..nbar).filter(|&k| active[k]).map(|k| lambdas[k]).collect();
    let phys: Vec<usize> = (0..nbar).filter(|&k| active[k]).collect();
    let mut remaining = Vec::with_capacity(nbar);
    for (j, ret) in retained.iter().enumerate() {
        let mut rest = QPStatePoly::zero(&trivial, nbar, max_order, 0);
        for (m, s) in ret.iter() {
            let phys_deg: u32 = phys.iter().map(|&k| m.exponents()[k] as u32).sum();
            let fict_weight: Complex64 = (0..nbar)
                .filter(|&k| !active[k])
                .map(|k| lambdas[k] * m.exponents()[k] as f64)
                .sum();
            let own_linear = phys_deg == 1 && m.exponents()[j] == 1;
            if own_linear && fict_weight.norm() < tol {
                let mut c = s.coeff(&[]);
                for k in (0..nbar).filter(|&k| !active[k]) {
                    for _ in 0..m.exponents()[k] {
                        c *= orbit_constants[k];
                    }
                }
                let slot = phys.iter().position(|&k| k == j).expect("active component");
                diag[slot] += c;
            } else if phys_deg <= 1 {
                return Err(Error::IrreducibleResonance(alloc::format!(
                    "resonant term {:?} on mode {j} (divisor {:e}) cannot be absorbed into a time-invariant linear block",
                    m.exponents(),
                    (m.weight(lambdas) - lambdas[j]).norm()
                )));
            } else {
                rest.add_term(m.clone(), s.clone())?;
            }
        }
        remaining.push(rest);
    }

    Ok(NormalForm {
        transform: NearIdentityTransform { h_terms, composed },
        jbar: JBar { diag },
        report,
        orbit_constants,
        remaining,
    })
}

/// Field of `w` after the substitution `v = w + h(w)`:
/// `(I + Dh)^-1 [J (w + h) + g(w + h)] - J w`, truncated at `max_degree`.
fn transform_field(lambdas: &[Complex64], g: &[QPStatePoly], h: &[QPStatePoly], max_degree: u32) -> Result<Vec<QPStatePoly>> {
    let n = lambdas.len();
    let basis = g[0].basis().clone();
    let var = |k: usize| QPStatePoly::var(&basis, n, k, max_degree, 0);
    let shifted: Vec<QPStatePoly> = (0..n).map(|k| var(k).add(&h[k])).collect::<Result<_>>()?;
    let mut k_vec = Vec::with_capacity(n);
    for j in 0..n {
        let lin = shifted[j].scale(lambdas[j]);
        let nl = if g[j].is_zero() { g[j].clone() } else { g[j].compose(&shifted)? };
        k_vec.push(lin.add(&nl)?);
    }
    let jacobian: Vec<Vec<QPStatePoly>> = h.iter().map(|hj| (0..n).map(|k| hj.deriv(k)).collect()).collect();
    let mut y = k_vec.clone();
    for _ in 1..max_degree {
        let mut next = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = k_vec[j].clone();
            for k in 0..n {
                if !jacobian[j][k].is_zero() {
                    acc = acc.sub(&jacobian[j][k].mul(&y[k])?)?;
                }
            }
            next.push(acc);
        }
        y = next;
    }
    (0..n).map(|j| y[j].sub(&var(j).scale(lambdas[j]))).collect()
}

fn linear_combination(
    basis: &alloc::sync::Arc<FrequencyBasis>,
    dim: usize,
    max_degree: u32,
    coef: impl Fn(usize) -> Complex64,
) -> QPStatePoly {
    let mut p = QPStatePoly::zero(basis, dim, max_degree, 0);
    for k in 0..dim {
        let c = coef(k);
        if c.norm() > 0.0 {
            p.add_term(StateMonomial::var(dim, k), QPSeries::constant(basis, c, 0))
                .expect("shared basis");
        }
    }
    p
}
