use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::basis::{index_add, index_neg, index_norm, same_basis, FreqIndex, FrequencyBasis};
use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped from every map.
pub const PURGE_THRESHOLD: f64 = 1e-16;

/// Default truncation order (max `|p|_inf`) per frequency.
pub const DEFAULT_TRUNC_ORDER: u32 = 5;

pub(crate) type Coeffs = BTreeMap<FreqIndex, Complex64>;

/// Scalar quasi-periodic function `sum_p c_p exp(i (p . omega) t)` truncated at `|p|_inf <= trunc_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct QPSeries {
    basis: Arc<FrequencyBasis>,
    coeffs: Coeffs,
    trunc_order: u32,
    real: bool,
}

impl QPSeries {
    pub fn zero(basis: &Arc<FrequencyBasis>, trunc_order: u32) -> Self {
        Self {
            basis: basis.clone(),
            coeffs: Coeffs::new(),
            trunc_order,
            real: true,
        }
    }

    pub fn constant(basis: &Arc<FrequencyBasis>, c: Complex64, trunc_order: u32) -> Self {
        let mut s = Self::zero(basis, trunc_order);
        s.real = c.im == 0.0;
        if c.norm() >= PURGE_THRESHOLD {
            s.coeffs.insert(basis.zero_index(), c);
        }
        s
    }

    /// Builds a series from `(index, coefficient)` pairs; repeated indices accumulate.
    ///
    /// With `real = true` the coefficients must already be conjugate symmetric
    /// (relative mismatch at most 1e-10); they are then snapped to exact symmetry.
    pub fn from_terms<I>(basis: &Arc<FrequencyBasis>, trunc_order: u32, terms: I, real: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (FreqIndex, Complex64)>,
    {
        let mut coeffs = Coeffs::new();
        for (p, c) in terms {
            if p.len() != basis.dim() {
                return Err(Error::Dim {
                    expected: basis.dim(),
                    got: p.len(),
                });
            }
            if index_norm(&p) > trunc_order {
                return Err(Error::InvalidInput(alloc::format!(
                    "index {:?} exceeds truncation order {trunc_order}",
                    p.as_slice()
                )));
            }
            *coeffs.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        if real {
            let scale = coeffs.values().fold(0.0f64, |m, c| m.max(c.norm())).max(1.0);
            for (p, c) in &coeffs {
                let mirror = coeffs.get(&index_neg(p)).copied().unwrap_or_default();
                if (c - mirror.conj()).norm() > 1e-10 * scale {
                    return Err(Error::InvalidInput(alloc::format!(
                        "coefficients at {:?} are not conjugate symmetric",
                        p.as_slice()
                    )));
                }
            }
        }
        let mut s = Self {
            basis: basis.clone(),
            coeffs,
            trunc_order,
            real,
        };
        s.canonicalize();
        Ok(s)
    }

    /// `amplitude * cos(omega_k t)`.
    pub fn cos(basis: &Arc<FrequencyBasis>, k: usize, amplitude: f64, trunc_order: u32) -> Self {
        let half = Complex64::new(amplitude / 2.0, 0.0);
        Self::harmonic_pair(basis, k, half, half, trunc_order)
    }

    /// `amplitude * sin(omega_k t)`.
    pub fn sin(basis: &Arc<FrequencyBasis>, k: usize, amplitude: f64, trunc_order: u32) -> Self {
        let c = Complex64::new(0.0, -amplitude / 2.0);
        Self::harmonic_pair(basis, k, c, c.conj(), trunc_order)
    }

    fn harmonic_pair(basis: &Arc<FrequencyBasis>, k: usize, plus: Complex64, minus: Complex64, order: u32) -> Self {
        let mut s = Self::zero(basis, order.max(1));
        s.coeffs.insert(basis.unit_index(k, 1), plus);
        s.coeffs.insert(basis.unit_index(k, -1), minus);
        s.canonicalize();
        s
    }

    pub(crate) fn from_coeffs(basis: &Arc<FrequencyBasis>, coeffs: Coeffs, trunc_order: u32, real: bool) -> Self {
        let mut s = Self {
            basis: basis.clone(),
            coeffs,
            trunc_order,
            real,
        };
        s.canonicalize();
        s
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    pub fn trunc_order(&self) -> u32 {
        self.trunc_order
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, p: &[i32]) -> Complex64 {
        self.coeffs.get(p).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FreqIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub(crate) fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let phasors = Phasors::new(self.basis.omegas(), t, max_index(&self.coeffs));
        self.coeffs.iter().map(|(p, c)| c * phasors.get(p)).sum()
    }

    /// Product, computed exactly and then truncated to the larger of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_truncated(other, self.trunc_order.max(other.trunc_order))
    }

    pub fn mul_truncated(&self, other: &Self, order: u32) -> Result<Self> {
        self.check_basis(other)?;
        let coeffs = mul_coeffs(&self.coeffs, &other.coeffs, order);
        Ok(Self::from_coeffs(&self.basis, coeffs, order, self.real && other.real))
    }

    /// Time derivative: `c_p -> i (p . omega) c_p`.
    pub fn ddt(&self) -> Self {
        let coeffs = ddt_coeffs(&self.basis, &self.coeffs);
        Self::from_coeffs(&self.basis, coeffs, self.trunc_order, self.real)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let mut coeffs = self.coeffs.clone();
        add_assign_coeffs(&mut coeffs, &other.coeffs, Complex64::new(1.0, 0.0));
        Ok(Self::from_coeffs(
            &self.basis,
            coeffs,
            self.trunc_order.max(other.trunc_order),
            self.real && other.real,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|(p, v)| (p.clone(), v * c)).collect();
        Self::from_coeffs(&self.basis, coeffs, self.trunc_order, self.real && c.im == 0.0)
    }

    /// Drops every index with `|p|_inf > order`.
    pub fn truncated(&self, order: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(p, _)| index_norm(p) <= order)
            .map(|(p, c)| (p.clone(), *c))
            .collect();
        Self::from_coeffs(&self.basis, coeffs, order, self.real)
    }

    /// Re-expresses the series on a basis that starts with this one.
    pub fn embed(&self, basis: &Arc<FrequencyBasis>) -> Result<Self> {
        if !self.basis.is_prefix_of(basis) {
            return Err(Error::Basis);
        }
        let coeffs = embed_coeffs(&self.coeffs, basis.dim());
        Ok(Self::from_coeffs(basis, coeffs, self.trunc_order, self.real))
    }

    /// Marks the series real after checking conjugate symmetry to relative tolerance `tol`.
    pub fn into_real(mut self, tol: f64) -> Result<Self> {
        let scale = self.max_abs().max(PURGE_THRESHOLD);
        for (p, c) in &self.coeffs {
            let mirror = self.coeffs.get(&index_neg(p)).copied().unwrap_or_default();
            if (c - mirror.conj()).norm() > tol * scale {
                return Err(Error::InvalidInput(alloc::format!(
                    "series is not real: coefficients at {:?} are not conjugate symmetric",
                    p.as_slice()
                )));
            }
        }
        self.real = true;
        self.canonicalize();
        Ok(self)
    }

    /// Drops tiny coefficients and, for real series, restores exact conjugate symmetry.
    pub fn canonicalize(&mut self) {
        if self.real {
            symmetrize(&mut self.coeffs);
        }
        purge(&mut self.coeffs);
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::Basis)
        }
    }
}

/// Pointwise product of two series on the same basis.
pub fn series_mul(a: &QPSeries, b: &QPSeries) -> Result<QPSeries> {
    a.mul(b)
}

/// Time derivative of a series.
pub fn series_ddt(a: &QPSeries) -> QPSeries {
    a.ddt()
}

/// Tables of `exp(i n omega_k t)` for `|n| <= order`, one row per base frequency.
pub(crate) struct Phasors {
    order: i32,
    table: Vec<Vec<Complex64>>,
}

impl Phasors {
    pub(crate) fn new(omegas: &[f64], t: f64, order: u32) -> Self {
        let order = order as i32;
        let width = (2 * order + 1) as usize;
        let table = omegas
            .iter()
            .map(|w| {
                let (s, c) = (libm::sin(w * t), libm::cos(w * t));
                let base = Complex64::new(c, s);
                let mut row = alloc::vec![Complex64::new(1.0, 0.0); width];
                let mut up = Complex64::new(1.0, 0.0);
                for n in 1..=order {
                    up *= base;
                    row[(order + n) as usize] = up;
                    row[(order - n) as usize] = up.conj();
                }
                row
            })
            .collect();
        Self { order, table }
    }

    pub(crate) fn get(&self, p: &[i32]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (k, &n) in p.iter().enumerate() {
            if n != 0 {
                acc *= self.table[k][(self.order + n) as usize];
            }
        }
        acc
    }
}

pub(crate) fn max_index(coeffs: &Coeffs) -> u32 {
    coeffs.keys().map(|p| index_norm(p)).max().unwrap_or(0)
}

pub(crate) fn mul_coeffs(a: &Coeffs, b: &Coeffs, order: u32) -> Coeffs {
    let mut out = Coeffs::new();
    for (p1, c1) in a {
        for (p2, c2) in b {
            let p = index_add(p1, p2);
            if index_norm(&p) <= order {
                *out.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
    }
    out
}

pub(crate) fn ddt_coeffs(basis: &FrequencyBasis, coeffs: &Coeffs) -> Coeffs {
    coeffs
        .iter()
        .map(|(p, c)| (p.clone(), c * Complex64::new(0.0, basis.frequency(p))))
        .collect()
}

pub(crate) fn add_assign_coeffs(into: &mut Coeffs, from: &Coeffs, scale: Complex64) {
    for (p, c) in from {
        *into.entry(p.clone()).or_insert(Complex64::new(0.0, 0.0)) += c * scale;
    }
}

pub(crate) fn embed_coeffs(coeffs: &Coeffs, dim: usize) -> Coeffs {
    coeffs
        .iter()
        .map(|(p, c)| {
            let mut q = p.clone();
            q.resize(dim, 0);
            (q, *c)
        })
        .collect()
}

pub(crate) fn purge(coeffs: &mut Coeffs) {
    coeffs.retain(|_, c| c.norm() >= PURGE_THRESHOLD);
}

/// Forces `c_{-p} = conj(c_p)` by averaging each mirrored pair.
pub(crate) fn symmetrize(coeffs: &mut Coeffs) {
    let keys: Vec<FreqIndex> = coeffs.keys().cloned().collect();
    for p in keys {
        let q = index_neg(&p);
        if p > q {
            continue;
        }
        let a = coeffs.get(&p).copied().unwrap_or_default();
        let b = coeffs.get(&q).copied().unwrap_or_default();
        let avg = (a + b.conj()) * 0.5;
        if p == q {
            coeffs.insert(p, Complex64::new(avg.re, 0.0));
        } else {
            coeffs.insert(p, avg);
            coeffs.insert(q, avg.conj());
        }
    }
}
