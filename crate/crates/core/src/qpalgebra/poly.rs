use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
use smallvec::SmallVec;

use super::basis::{same_basis, FrequencyBasis};
use super::series::{self, Phasors, QPSeries};
use crate::error::{Error, Result};

/// Default maximum total degree kept in state polynomials.
pub const DEFAULT_MAX_DEGREE: u32 = 5;

/// Exponent vector `m` of a state monomial `z_1^{m_1} ... z_n^{m_n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateMonomial(SmallVec<[u8; 8]>);

impl StateMonomial {
    pub fn new(exponents: &[u8]) -> Self {
        Self(exponents.iter().copied().collect())
    }

    pub fn one(dim: usize) -> Self {
        Self(SmallVec::from_elem(0, dim))
    }

    /// The linear monomial `z_k`.
    pub fn var(dim: usize, k: usize) -> Self {
        let mut m = Self::one(dim);
        m.0[k] = 1;
        m
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `d/dz_k` of the monomial as `(multiplier, monomial)`, `None` if it does not contain `z_k`.
    pub fn deriv(&self, k: usize) -> Option<(u8, Self)> {
        let e = self.0[k];
        if e == 0 {
            return None;
        }
        let mut m = self.clone();
        m.0[k] -= 1;
        Some((e, m))
    }

    /// `sum_l m_l lambda_l`.
    pub fn weight(&self, lambdas: &[Complex64]) -> Complex64 {
        self.0.iter().zip(lambdas).map(|(&e, l)| l * e as f64).sum()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (&e, zi) in self.0.iter().zip(z) {
            for _ in 0..e {
                acc *= zi;
            }
        }
        acc
    }

    /// Keeps the listed variables (in order), dropping the others; `None` if a dropped one is present.
    pub fn restrict(&self, keep: &[usize]) -> Option<Self> {
        let kept: u32 = keep.iter().map(|&k| self.0[k] as u32).sum();
        if kept != self.degree() {
            return None;
        }
        Some(Self(keep.iter().map(|&k| self.0[k]).collect()))
    }
}

/// Polynomial in state variables whose coefficients are quasi-periodic series.
#[derive(Debug, Clone, PartialEq)]
pub struct QPStatePoly {
    basis: Arc<FrequencyBasis>,
    state_dim: usize,
    max_degree: u32,
    trunc_order: u32,
    terms: BTreeMap<StateMonomial, QPSeries>,
}

impl QPStatePoly {
    pub fn zero(basis: &Arc<FrequencyBasis>, state_dim: usize, max_degree: u32, trunc_order: u32) -> Self {
        Self {
            basis: basis.clone(),
            state_dim,
            max_degree,
            trunc_order,
            terms: BTreeMap::new(),
        }
    }

    /// The linear polynomial `z_k`.
    pub fn var(basis: &Arc<FrequencyBasis>, state_dim: usize, k: usize, max_degree: u32, trunc_order: u32) -> Self {
        let mut p = Self::zero(basis, state_dim, max_degree, trunc_order);
        let one = QPSeries::constant(basis, Complex64::new(1.0, 0.0), trunc_order);
        p.terms.insert(StateMonomial::var(state_dim, k), one);
        p
    }

    /// Polynomial made of a single term (an empty series yields the zero polynomial).
    pub fn monomial(mono: StateMonomial, coeff: QPSeries, max_degree: u32) -> Result<Self> {
        let mut p = Self::zero(coeff.basis(), mono.dim(), max_degree, coeff.trunc_order());
        p.add_term(mono, coeff)?;
        Ok(p)
    }

    /// Accumulates `coeff * z^mono`; terms above `max_degree` are dropped.
    pub fn add_term(&mut self, mono: StateMonomial, coeff: QPSeries) -> Result<()> {
        if mono.dim() != self.state_dim {
            return Err(Error::Dim {
                expected: self.state_dim,
                got: mono.dim(),
            });
        }
        if !same_basis(&self.basis, coeff.basis()) {
            return Err(Error::Basis);
        }
        if mono.degree() > self.max_degree {
            return Ok(());
        }
        let coeff = if coeff.trunc_order() > self.trunc_order {
            coeff.truncated(self.trunc_order)
        } else {
            coeff
        };
        let merged = match self.terms.remove(&mono) {
            Some(prev) => prev.add(&coeff)?,
            None => coeff,
        };
        if !merged.is_zero() {
            self.terms.insert(mono, merged);
        }
        Ok(())
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn trunc_order(&self) -> u32 {
        self.trunc_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateMonomial, &QPSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &StateMonomial) -> Option<&QPSeries> {
        self.terms.get(mono)
    }

    /// Total number of stored `(monomial, frequency)` coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.terms.values().map(QPSeries::len).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, s| m.max(s.max_abs()))
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(StateMonomial::degree).min()
    }

    pub fn top_degree(&self) -> Option<u32> {
        self.terms.keys().map(StateMonomial::degree).max()
    }

    pub fn with_limits(&self, max_degree: u32, trunc_order: u32) -> Self {
        let mut out = Self::zero(&self.basis, self.state_dim, max_degree, trunc_order);
        for (m, s) in &self.terms {
            if m.degree() <= max_degree {
                let s = s.truncated(trunc_order);
                if !s.is_zero() {
                    out.terms.insert(m.clone(), s);
                }
            }
        }
        out
    }

    /// Degree-`d` homogeneous part.
    pub fn homogeneous(&self, d: u32) -> Self {
        self.filter(|m| m.degree() == d)
    }

    pub fn filter(&self, mut keep: impl FnMut(&StateMonomial) -> bool) -> Self {
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, s) in &self.terms {
            if keep(m) {
                out.terms.insert(m.clone(), s.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.add_term(m.clone(), s.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        if c == Complex64::new(0.0, 0.0) {
            return out;
        }
        for (m, s) in &self.terms {
            let s = s.scale(c);
            if !s.is_zero() {
                out.terms.insert(m.clone(), s);
            }
        }
        out
    }

    pub fn mul_series(&self, s: &QPSeries) -> Result<Self> {
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul_truncated(s, self.trunc_order)?)?;
        }
        Ok(out)
    }

    /// Product truncated to `self`'s degree and order limits.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: BTreeMap<StateMonomial, series::Coeffs> = BTreeMap::new();
        let mut real: BTreeMap<StateMonomial, bool> = BTreeMap::new();
        for (m1, s1) in &self.terms {
            for (m2, s2) in &other.terms {
                if m1.degree() + m2.degree() > self.max_degree {
                    continue;
                }
                let m = m1.mul(m2);
                let prod = series::mul_coeffs(s1.coeffs(), s2.coeffs(), self.trunc_order);
                let entry = acc.entry(m.clone()).or_default();
                series::add_assign_coeffs(entry, &prod, Complex64::new(1.0, 0.0));
                let r = real.entry(m).or_insert(true);
                *r = *r && s1.is_real() && s2.is_real();
            }
        }
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, c) in acc {
            let s = QPSeries::from_coeffs(&self.basis, c, self.trunc_order, real[&m]);
            if !s.is_zero() {
                out.terms.insert(m, s);
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to state variable `k`.
    pub fn deriv(&self, k: usize) -> Self {
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, s) in &self.terms {
            if let Some((e, dm)) = m.deriv(k) {
                // Distinct monomials have distinct derivatives, so no accumulation is needed.
                out.terms.insert(dm, s.scale(Complex64::new(e as f64, 0.0)));
            }
        }
        out
    }

    /// Explicit time derivative of the coefficients.
    pub fn ddt(&self) -> Self {
        let mut out = Self::zero(&self.basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, s) in &self.terms {
            let d = s.ddt();
            if !d.is_zero() {
                out.terms.insert(m.clone(), d);
            }
        }
        out
    }

    /// Replaces every variable `z_i` by `images[i]` (polynomials sharing one state space) and re-expands.
    pub fn compose(&self, images: &[QPStatePoly]) -> Result<Self> {
        if images.len() != self.state_dim {
            return Err(Error::Dim {
                expected: self.state_dim,
                got: images.len(),
            });
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        let dim = first.state_dim;
        for img in images {
            if img.state_dim != dim {
                return Err(Error::Dim {
                    expected: dim,
                    got: img.state_dim,
                });
            }
            self.check_basis(img)?;
        }
        let mut powers = PowerCache::new(images, self.max_degree, self.trunc_order);
        let mut out = Self::zero(&self.basis, dim, self.max_degree, self.trunc_order);
        let one = QPStatePoly::monomial(
            StateMonomial::one(dim),
            QPSeries::constant(&self.basis, Complex64::new(1.0, 0.0), self.trunc_order),
            self.max_degree,
        )?;
        for (m, s) in &self.terms {
            let mut prod = one.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    prod = prod.mul(powers.get(i, e)?)?;
                    if prod.is_zero() {
                        break;
                    }
                }
            }
            out = out.add(&prod.mul_series(s)?)?;
        }
        Ok(out)
    }

    /// Re-expresses the coefficients on a basis extending the current one.
    pub fn embed(&self, basis: &Arc<FrequencyBasis>) -> Result<Self> {
        let mut out = Self::zero(basis, self.state_dim, self.max_degree, self.trunc_order);
        for (m, s) in &self.terms {
            out.terms.insert(m.clone(), s.embed(basis)?);
        }
        Ok(out)
    }

    /// Moves the polynomial to a new state space: variable `i` becomes variable `map[i]` of `new_dim`.
    pub fn relabel(&self, map: &[usize], new_dim: usize) -> Result<Self> {
        if map.len() != self.state_dim {
            return Err(Error::Dim {
                expected: self.state_dim,
                got: map.len(),
            });
        }
        let mut out = Self::zero(&self.basis, new_dim, self.max_degree, self.trunc_order);
        for (m, s) in &self.terms {
            let mut e: SmallVec<[u8; 8]> = SmallVec::from_elem(0, new_dim);
            for (i, &k) in map.iter().enumerate() {
                e[k] += m.exponents()[i];
            }
            out.add_term(StateMonomial(e), s.clone())?;
        }
        Ok(out)
    }

    pub fn eval(&self, t: f64, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.state_dim {
            return Err(Error::Dim {
                expected: self.state_dim,
                got: z.len(),
            });
        }
        let order = self
            .terms
            .values()
            .map(|s| series::max_index(s.coeffs()))
            .max()
            .unwrap_or(0);
        let phasors = Phasors::new(self.basis.omegas(), t, order);
        Ok(self
            .terms
            .iter()
            .map(|(m, s)| {
                let c: Complex64 = s.iter().map(|(p, c)| c * phasors.get(p)).sum();
                c * m.eval(z)
            })
            .sum())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if other.state_dim != self.state_dim {
            return Err(Error::Dim {
                expected: self.state_dim,
                got: other.state_dim,
            });
        }
        self.check_basis(other)
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::Basis)
        }
    }
}

struct PowerCache<'a> {
    images: &'a [QPStatePoly],
    max_degree: u32,
    trunc_order: u32,
    powers: Vec<Vec<QPStatePoly>>,
}

impl<'a> PowerCache<'a> {
    fn new(images: &'a [QPStatePoly], max_degree: u32, trunc_order: u32) -> Self {
        Self {
            images,
            max_degree,
            trunc_order,
            powers: alloc::vec![Vec::new(); images.len()],
        }
    }

    fn get(&mut self, i: usize, e: u8) -> Result<&QPStatePoly> {
        let e = e as usize;
        while self.powers[i].len() < e {
            let base = self.images[i].with_limits(self.max_degree, self.trunc_order);
            let next = match self.powers[i].last() {
                Some(prev) => prev.mul(&base)?,
                None => base,
            };
            self.powers[i].push(next);
        }
        Ok(&self.powers[i][e - 1])
    }
}

/// Evaluates `poly` at time `t` and state `z`.
pub fn poly_apply(poly: &QPStatePoly, t: f64, z: &[Complex64]) -> Result<Complex64> {
    poly.eval(t, z)
}

/// Evaluates every component of a polynomial vector.
pub fn poly_apply_vec(polys: &[QPStatePoly], t: f64, z: &[Complex64]) -> Result<Vec<Complex64>> {
    polys.iter().map(|p| p.eval(t, z)).collect()
}

/// Substitutes `z_s = slave_map(z_r, t)` into `poly`.
///
/// The first `master_dim` variables of `poly` are masters and the remaining
/// ones slaves; each entry of `slave_map` is a polynomial in the masters.
/// The result lives on the master state space.
pub fn poly_substitute(poly: &QPStatePoly, slave_map: &[QPStatePoly], master_dim: usize) -> Result<QPStatePoly> {
    if master_dim + slave_map.len() != poly.state_dim() {
        return Err(Error::Dim {
            expected: poly.state_dim(),
            got: master_dim + slave_map.len(),
        });
    }
    let mut images = Vec::with_capacity(poly.state_dim());
    for k in 0..master_dim {
        images.push(QPStatePoly::var(
            poly.basis(),
            master_dim,
            k,
            poly.max_degree(),
            poly.trunc_order(),
        ));
    }
    for h in slave_map {
        if h.state_dim() != master_dim {
            return Err(Error::Dim {
                expected: master_dim,
                got: h.state_dim(),
            });
        }
        images.push(h.clone());
    }
    poly.compose(&images)
}
