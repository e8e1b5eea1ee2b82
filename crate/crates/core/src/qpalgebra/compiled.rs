use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_complex::Complex64;

use super::basis::{index_norm, FreqIndex};
use super::poly::QPStatePoly;
use super::series::{Phasors, QPSeries};

/// Flattened polynomial vector for fast repeated evaluation.
///
/// Every harmonic `exp(i p.omega t)` is computed once per time value and the
/// coefficient values of the last two distinct times are cached, which is what
/// a fixed-step RK4 needs (`t`, `t + h/2`, `t + h`, ...).
#[derive(Debug)]
pub struct CompiledPolys {
    omegas: Vec<f64>,
    order: u32,
    harmonics: Vec<FreqIndex>,
    /// `(harmonic slot, coefficient)` per coefficient function.
    series: Vec<Vec<(usize, Complex64)>>,
    /// `(component, exponents, coefficient function)` per term.
    terms: Vec<(usize, Vec<u8>, usize)>,
    dim_out: usize,
    state_dim: usize,
    cache: RefCell<[(f64, Vec<Complex64>); 2]>,
    next_slot: RefCell<usize>,
}

impl CompiledPolys {
    /// Compiles `polys`, dropping coefficients with magnitude below `drop_below`.
    pub fn new(polys: &[QPStatePoly], extra: &[QPSeries], drop_below: f64) -> Self {
        let basis = polys
            .first()
            .map(|p| p.basis().clone())
            .or_else(|| extra.first().map(|s| s.basis().clone()));
        let omegas = basis.as_ref().map_or_else(Vec::new, |b| b.omegas().to_vec());
        let state_dim = polys.first().map_or(0, QPStatePoly::state_dim);
        let mut slots: BTreeMap<FreqIndex, usize> = BTreeMap::new();
        let mut harmonics = Vec::new();
        let mut series = Vec::new();
        let mut order = 0;
        let mut intern = |s: &QPSeries, series: &mut Vec<Vec<(usize, Complex64)>>| -> usize {
            let mut list = Vec::new();
            for (p, c) in s.iter() {
                if c.norm() < drop_below {
                    continue;
                }
                order = order.max(index_norm(p));
                let slot = *slots.entry(p.clone()).or_insert_with(|| {
                    harmonics.push(p.clone());
                    harmonics.len() - 1
                });
                list.push((slot, *c));
            }
            series.push(list);
            series.len() - 1
        };
        let mut terms = Vec::new();
        for (j, p) in polys.iter().enumerate() {
            for (m, s) in p.iter() {
                let id = intern(s, &mut series);
                terms.push((j, m.exponents().to_vec(), id));
            }
        }
        // Extra series (e.g. forcing) are appended as degree-0 terms of their component.
        for (j, s) in extra.iter().enumerate() {
            let id = intern(s, &mut series);
            terms.push((j, alloc::vec![0; state_dim], id));
        }
        let dim_out = polys.len().max(extra.len());
        Self {
            omegas,
            order,
            harmonics,
            series,
            terms,
            dim_out,
            state_dim,
            cache: RefCell::new([(f64::NAN, Vec::new()), (f64::NAN, Vec::new())]),
            next_slot: RefCell::new(0),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Number of stored `(term, harmonic)` coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.series.iter().map(Vec::len).sum()
    }

    fn coefficient_values(&self, t: f64) -> Vec<Complex64> {
        let phasors = Phasors::new(&self.omegas, t, self.order);
        let h: Vec<Complex64> = self.harmonics.iter().map(|p| phasors.get(p)).collect();
        self.series
            .iter()
            .map(|list| list.iter().map(|&(slot, c)| c * h[slot]).sum())
            .collect()
    }

    /// Writes `sum_terms coef(t) z^m` into `out` (overwriting it).
    pub fn eval(&self, t: f64, z: &[Complex64], out: &mut [Complex64]) {
        let mut cache = self.cache.borrow_mut();
        let hit = cache.iter().position(|(ct, _)| *ct == t);
        let slot = match hit {
            Some(s) => s,
            None => {
                let mut next = self.next_slot.borrow_mut();
                let s = *next;
                *next = 1 - s;
                cache[s] = (t, self.coefficient_values(t));
                s
            }
        };
        let values = &cache[slot].1;
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (j, exps, id) in &self.terms {
            let mut v = values[*id];
            for (&e, zi) in exps.iter().zip(z) {
                for _ in 0..e {
                    v *= zi;
                }
            }
            out[*j] += v;
        }
    }
}
