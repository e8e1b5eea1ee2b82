use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::FrequencyBasis;
use super::poly::QPStatePoly;
use super::series::{max_index, Phasors, QPSeries};
use crate::error::{Error, Result};

/// Dense matrix of quasi-periodic series on a common basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    basis: Arc<FrequencyBasis>,
    rows: usize,
    cols: usize,
    entries: Vec<QPSeries>,
}

impl SeriesMatrix {
    pub fn zeros(basis: &Arc<FrequencyBasis>, rows: usize, cols: usize, trunc_order: u32) -> Self {
        Self {
            basis: basis.clone(),
            rows,
            cols,
            entries: alloc::vec![QPSeries::zero(basis, trunc_order); rows * cols],
        }
    }

    /// Constant matrix.
    pub fn constant(basis: &Arc<FrequencyBasis>, m: &DMatrix<Complex64>, trunc_order: u32) -> Self {
        let mut out = Self::zeros(basis, m.nrows(), m.ncols(), trunc_order);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.entries[i * m.ncols() + j] = QPSeries::constant(basis, m[(i, j)], trunc_order);
            }
        }
        out
    }

    pub fn basis(&self) -> &Arc<FrequencyBasis> {
        &self.basis
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &QPSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: QPSeries) -> Result<()> {
        if !super::basis::same_basis(&self.basis, s.basis()) {
            return Err(Error::Basis);
        }
        self.entries[i * self.cols + j] = s;
        Ok(())
    }

    pub fn entries(&self) -> &[QPSeries] {
        &self.entries
    }

    pub fn max_index(&self) -> u32 {
        self.entries.iter().map(|s| max_index(s.coeffs())).max().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> DMatrix<Complex64> {
        let phasors = Phasors::new(self.basis.omegas(), t, self.max_index());
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).iter().map(|(p, c)| c * phasors.get(p)).sum()
        })
    }

    /// Real part of [`SeriesMatrix::eval`].
    pub fn eval_real(&self, t: f64) -> DMatrix<f64> {
        self.eval(t).map(|c| c.re)
    }

    pub fn ddt(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(QPSeries::ddt).collect(),
        }
    }

    pub fn mul(&self, other: &Self, trunc_order: u32) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dim {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(&self.basis, self.rows, other.cols, trunc_order);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = QPSeries::zero(&self.basis, trunc_order);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul_truncated(b, trunc_order)?)?;
                    }
                }
                out.entries[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }

    /// Right multiplication by a constant matrix.
    pub fn mul_const(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        let trunc = self.entries.first().map_or(0, QPSeries::trunc_order);
        self.mul(&Self::constant(&self.basis, m, trunc), trunc)
    }

    /// Left multiplication by a constant matrix.
    pub fn premul_const(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        let trunc = self.entries.first().map_or(0, QPSeries::trunc_order);
        Self::constant(&self.basis, m, trunc).mul(self, trunc)
    }

    /// `self * polys`, treating `polys` as a column vector of state polynomials.
    pub fn apply(&self, polys: &[QPStatePoly]) -> Result<Vec<QPStatePoly>> {
        if polys.len() != self.cols {
            return Err(Error::Dim {
                expected: self.cols,
                got: polys.len(),
            });
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc: Option<QPStatePoly> = None;
            for (j, p) in polys.iter().enumerate() {
                let term = p.mul_series(self.get(i, j))?;
                acc = Some(match acc {
                    Some(a) => a.add(&term)?,
                    None => term,
                });
            }
            out.push(acc.ok_or(Error::Dim { expected: 1, got: 0 })?);
        }
        Ok(out)
    }

    pub fn embed(&self, basis: &Arc<FrequencyBasis>) -> Result<Self> {
        Ok(Self {
            basis: basis.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|s| s.embed(basis)).collect::<Result<_>>()?,
        })
    }

    pub fn truncated(&self, order: u32) -> Self {
        Self {
            basis: self.basis.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|s| s.truncated(order)).collect(),
        }
    }
}
