//! Autonomous augmentation of linear quasi-periodic systems and modal decomposition.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qpalgebra::{FrequencyBasis, QPSeries, QPStatePoly, SeriesMatrix, StateMonomial};
use crate::simkit::VectorField;

/// Shape of a parametric excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// `amplitude * cos|sin(omega_freq t)` added to entry `(row, col)` of the system matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricTerm {
    pub row: usize,
    pub col: usize,
    pub amplitude: f64,
    pub freq: usize,
    pub phase: Phase,
}

/// `dx/dt = (B0 + B(t)) x` with `B(t)` a sum of [`ParametricTerm`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct QPLinearSystem {
    b0: DMatrix<f64>,
    terms: Vec<ParametricTerm>,
    basis: Arc<FrequencyBasis>,
}

impl QPLinearSystem {
    pub fn new(b0: DMatrix<f64>, terms: Vec<ParametricTerm>, basis: Arc<FrequencyBasis>) -> Result<Self> {
        let n = b0.nrows();
        if b0.ncols() != n {
            return Err(Error::Dim {
                expected: n,
                got: b0.ncols(),
            });
        }
        for t in &terms {
            if t.row >= n || t.col >= n {
                return Err(Error::InvalidInput(alloc::format!(
                    "parametric term targets entry ({}, {}) of a {n}x{n} matrix",
                    t.row,
                    t.col
                )));
            }
            if t.freq >= basis.dim() {
                return Err(Error::InvalidInput(alloc::format!(
                    "parametric term references frequency {} of {}",
                    t.freq,
                    basis.dim()
                )));
            }
        }
        Ok(Self { b0, terms, basis })
    }

    pub fn dim(&self) -> usize {
        self.b0.nrows()
    }

    pub fn b0(&self) -> &DMatrix<f64> {
        &self.b0
    }

    pub fn terms(&self) -> &[ParametricTerm] {
        &self.terms
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    /// `B0 + B(t)`.
    pub fn matrix_at(&self, t: f64) -> DMatrix<f64> {
        let mut m = self.b0.clone();
        for term in &self.terms {
            let wt = self.basis.omegas()[term.freq] * t;
            let s = match term.phase {
                Phase::Cos => libm::cos(wt),
                Phase::Sin => libm::sin(wt),
            };
            m[(term.row, term.col)] += term.amplitude * s;
        }
        m
    }

    /// `B0 + B(t)` as a matrix of series.
    pub fn series_matrix(&self, trunc_order: u32) -> SeriesMatrix {
        let mut m = SeriesMatrix::constant(&self.basis, &self.b0.map(|v| Complex64::new(v, 0.0)), trunc_order);
        for term in &self.terms {
            let s = match term.phase {
                Phase::Cos => QPSeries::cos(&self.basis, term.freq, term.amplitude, trunc_order),
                Phase::Sin => QPSeries::sin(&self.basis, term.freq, term.amplitude, trunc_order),
            };
            let e = m.get(term.row, term.col).add(&s).expect("shared basis");
            m.set(term.row, term.col, e).expect("shared basis");
        }
        m
    }
}

impl VectorField<f64> for QPLinearSystem {
    fn dim(&self) -> usize {
        self.b0.nrows()
    }

    fn eval(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let m = self.matrix_at(t);
        for i in 0..x.len() {
            dx[i] = (0..x.len()).map(|j| m[(i, j)] * x[j]).sum();
        }
    }
}

/// Fictitious oscillator `p' = omega q`, `q' = -omega p`, so that `p = sin`, `q = cos`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FictitiousPair {
    pub p_index: usize,
    pub q_index: usize,
    /// Position of the frequency in the system's basis.
    pub freq: usize,
    pub omega: f64,
}

/// Autonomous system `x' = Bbar0 x + f(x)` over `x = [physical, p_1..p_k, q_1..q_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub bbar0: DMatrix<f64>,
    /// One polynomial per augmented state (constant coefficients).
    pub coupling: Vec<QPStatePoly>,
    pub fictitious_pairs: Vec<FictitiousPair>,
    pub physical_dim: usize,
}

impl AugmentedSystem {
    pub fn dim(&self) -> usize {
        self.bbar0.nrows()
    }

    /// Fictitious states at `t = 0`: `(p, q) = (0, 1)`.
    pub fn fictitious_init(&self) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.dim() - self.physical_dim];
        for pair in &self.fictitious_pairs {
            v[pair.q_index - self.physical_dim] = 1.0;
        }
        v
    }

    /// Full augmented initial state for a physical initial condition.
    pub fn initial_state(&self, x0: &[f64]) -> Vec<f64> {
        let mut v = x0.to_vec();
        v.extend(self.fictitious_init());
        v
    }
}

impl VectorField<f64> for AugmentedSystem {
    fn dim(&self) -> usize {
        self.bbar0.nrows()
    }

    fn eval(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for i in 0..x.len() {
            let lin: f64 = (0..x.len()).map(|j| self.bbar0[(i, j)] * x[j]).sum();
            let nl = self.coupling[i].eval(0.0, &z).map_or(f64::NAN, |c| c.re);
            dx[i] = lin + nl;
        }
    }
}

/// Replaces every parametric term by a product of a fictitious state and a physical state.
pub fn augment(sys: &QPLinearSystem) -> AugmentedSystem {
    let n = sys.dim();
    let used: Vec<usize> = {
        let mut f: Vec<usize> = sys.terms.iter().map(|t| t.freq).collect();
        f.sort_unstable();
        f.dedup();
        f
    };
    let k = used.len();
    let nbar = n + 2 * k;
    let mut bbar0 = DMatrix::zeros(nbar, nbar);
    bbar0.view_mut((0, 0), (n, n)).copy_from(&sys.b0);
    let mut pairs = Vec::with_capacity(k);
    for (slot, &freq) in used.iter().enumerate() {
        let (p, q) = (n + slot, n + k + slot);
        let w = sys.basis.omegas()[freq];
        bbar0[(p, q)] = w;
        bbar0[(q, p)] = -w;
        pairs.push(FictitiousPair {
            p_index: p,
            q_index: q,
            freq,
            omega: w,
        });
    }
    let trivial = FrequencyBasis::trivial();
    let mut coupling: Vec<QPStatePoly> = (0..nbar).map(|_| QPStatePoly::zero(&trivial, nbar, 2, 0)).collect();
    for term in &sys.terms {
        let slot = used.binary_search(&term.freq).expect("collected above");
        let fict = match term.phase {
            Phase::Cos => pairs[slot].q_index,
            Phase::Sin => pairs[slot].p_index,
        };
        let mono = StateMonomial::var(nbar, fict).mul(&StateMonomial::var(nbar, term.col));
        let c = QPSeries::constant(&trivial, Complex64::new(term.amplitude, 0.0), 0);
        coupling[term.row].add_term(mono, c).expect("dimensions match");
    }
    AugmentedSystem {
        bbar0,
        coupling,
        fictitious_pairs: pairs,
        physical_dim: n,
    }
}

/// Eigenvector conditioning above which a matrix is treated as defective.
pub const MAX_MODAL_CONDITION: f64 = 1e8;

/// Diagonalization `B = M J M^-1` of a semi-simple real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub modal: DMatrix<Complex64>,
    pub modal_inv: DMatrix<Complex64>,
    pub eigenvalues: Vec<Complex64>,
    /// Whether each mode lives on the fictitious block.
    pub fictitious: Vec<bool>,
    /// Index of each mode's complex-conjugate partner (itself for real eigenvalues).
    pub partner: Vec<usize>,
    pub reconstruction_error: f64,
    pub condition: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn j(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()))
    }

    pub fn physical_modes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&i| !self.fictitious[i])
    }

    pub fn fictitious_modes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&i| self.fictitious[i])
    }
}

/// Modal decomposition of a matrix whose every state is physical.
pub fn modal(b: &DMatrix<f64>) -> Result<Spectrum> {
    modal_split(b, b.nrows())
}

/// Modal decomposition; states at index `>= physical_dim` are fictitious.
///
/// Modes are ordered physical first, then fictitious; within each group by
/// ascending `|Im lambda|` with the negative-imaginary member of a pair first.
/// Eigenvectors have unit 2-norm with their largest component real positive,
/// and conjugate modes carry exactly conjugate vectors.
pub fn modal_split(b: &DMatrix<f64>, physical_dim: usize) -> Result<Spectrum> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::Dim {
            expected: n,
            got: b.ncols(),
        });
    }
    if n == 0 {
        let e = DMatrix::zeros(0, 0);
        return Ok(Spectrum {
            modal: e.clone(),
            modal_inv: e,
            eigenvalues: Vec::new(),
            fictitious: Vec::new(),
            partner: Vec::new(),
            reconstruction_error: 0.0,
            condition: 1.0,
        });
    }
    let scale = inf_norm_real(b).max(1.0);
    let raw = b.complex_eigenvalues();
    let bc = b.map(|v| Complex64::new(v, 0.0));

    // Cluster numerically coincident eigenvalues and snap conjugates exactly.
    let cluster_tol = 1e-6 * scale;
    let mut reps: Vec<(Complex64, usize)> = Vec::new();
    for &l in raw.iter() {
        match reps.iter_mut().find(|(c, _)| (c - l).norm() < cluster_tol) {
            Some((c, m)) => {
                *c = (*c * *m as f64 + l) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => reps.push((l, 1)),
        }
    }
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &(l, m) in &reps {
        if l.im.abs() < cluster_tol {
            clusters.push((Complex64::new(l.re, 0.0), m));
        } else if l.im < 0.0 {
            clusters.push((l, m));
            clusters.push((l.conj(), m));
        }
    }
    if clusters.iter().map(|c| c.1).sum::<usize>() != n {
        return Err(Error::NotSemiSimple("eigenvalues do not pair into conjugates".into()));
    }

    struct Mode {
        lambda: Complex64,
        vector: DVector<Complex64>,
        fictitious: bool,
        partner_key: usize,
    }
    let mut modes: Vec<Mode> = Vec::with_capacity(n);
    let mut key = 0usize;
    for &(l, mult) in &clusters {
        if l.im > 0.0 {
            continue;
        }
        let shifted = &bc - DMatrix::from_diagonal_element(n, n, l);
        let svd = nalgebra::SVD::new(shifted, false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::NotSemiSimple("SVD failed".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &c| svd.singular_values[a].total_cmp(&svd.singular_values[c]));
        let sigma = svd.singular_values[order[mult - 1]];
        if sigma > 1e-6 * scale {
            return Err(Error::NotSemiSimple(alloc::format!(
                "eigenvalue {l} of algebraic multiplicity {mult} lacks a full eigenspace (singular value {sigma:e})"
            )));
        }
        for &idx in order.iter().take(mult) {
            let v = normalize(v_t.row(idx).adjoint().into_owned());
            let weight_fict: f64 = v.iter().skip(physical_dim).map(|c| c.norm_sqr()).sum();
            let fictitious = weight_fict > 0.5;
            if l.im == 0.0 {
                let v = v.map(|c| Complex64::new(c.re, 0.0));
                let v = normalize(v);
                modes.push(Mode {
                    lambda: l,
                    vector: v,
                    fictitious,
                    partner_key: key,
                });
            } else {
                modes.push(Mode {
                    lambda: l,
                    vector: v.clone(),
                    fictitious,
                    partner_key: key,
                });
                modes.push(Mode {
                    lambda: l.conj(),
                    vector: v.map(|c| c.conj()),
                    fictitious,
                    partner_key: key,
                });
            }
            key += 1;
        }
    }
    modes.sort_by(|a, c| {
        a.fictitious
            .cmp(&c.fictitious)
            .then(a.lambda.im.abs().total_cmp(&c.lambda.im.abs()))
            .then(a.lambda.re.total_cmp(&c.lambda.re))
            .then(a.partner_key.cmp(&c.partner_key))
            .then(a.lambda.im.total_cmp(&c.lambda.im))
    });
    let m = DMatrix::from_fn(n, n, |i, j| modes[j].vector[i]);
    let svals = m.clone().singular_values();
    let smin = svals.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = svals.iter().copied().fold(0.0, f64::max);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_MODAL_CONDITION) {
        return Err(Error::NotSemiSimple(alloc::format!(
            "eigenvector matrix condition number {condition:e} exceeds {MAX_MODAL_CONDITION:e}"
        )));
    }
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotSemiSimple("eigenvector matrix is singular".into()))?;
    let eigenvalues: Vec<Complex64> = modes.iter().map(|md| md.lambda).collect();
    let j = DMatrix::from_diagonal(&DVector::from_vec(eigenvalues.clone()));
    let recon = &m * j * &m_inv - &bc;
    let reconstruction_error = inf_norm(&recon) / scale;
    let partner = (0..n)
        .map(|i| {
            (0..n)
                .find(|&k| k != i && modes[k].partner_key == modes[i].partner_key)
                .unwrap_or(i)
        })
        .collect();
    Ok(Spectrum {
        modal: m,
        modal_inv: m_inv,
        fictitious: modes.iter().map(|md| md.fictitious).collect(),
        eigenvalues,
        partner,
        reconstruction_error,
        condition,
    })
}

fn normalize(v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    let (mut best, mut mag) = (0, -1.0);
    for (i, c) in v.iter().enumerate() {
        // Prefer the earliest of near-equal components so the choice is stable.
        if c.norm() > mag * (1.0 + 1e-9) {
            best = i;
            mag = c.norm();
        }
    }
    let phase = v[best] / v[best].norm();
    v.map(|c| c / (phase * norm))
}

pub(crate) fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn inf_norm_real(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|c| c.abs()).sum::<f64>()).fold(0.0, f64::max)
}
