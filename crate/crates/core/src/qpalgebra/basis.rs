use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Integer multi-index `p` of a Fourier harmonic `exp(i (p . omega) t)`.
pub type FreqIndex = SmallVec<[i32; 4]>;

/// Largest integer multiplier tried when testing two frequencies for commensurability.
pub const COMMENSURABILITY_SEARCH: i32 = 20;

/// Default relative tolerance of the commensurability test.
pub const DEFAULT_INCOMMENSURABILITY_TOL: f64 = 1e-6;

/// Ordered list of base angular frequencies (rad/s) spanning a quasi-periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBasis {
    omegas: Vec<f64>,
    labels: Vec<String>,
    incommensurability_tol: f64,
    /// Number of leading frequencies that passed the commensurability test.
    checked: usize,
}

impl FrequencyBasis {
    /// Builds a basis whose frequencies are pairwise incommensurate.
    pub fn new(omegas: &[f64], labels: &[&str], incommensurability_tol: f64) -> Result<Arc<Self>> {
        let basis = Self::unchecked(omegas, labels, incommensurability_tol)?;
        for i in 0..omegas.len() {
            for j in (i + 1)..omegas.len() {
                if let Some((a, b)) = commensurate_pair(omegas[i], omegas[j], incommensurability_tol) {
                    return Err(Error::Commensurate {
                        first: labels[i].to_string(),
                        second: labels[j].to_string(),
                        a,
                        b,
                    });
                }
            }
        }
        Ok(Arc::new(Self {
            checked: omegas.len(),
            ..basis
        }))
    }

    /// Basis with no frequencies: series over it are plain complex constants.
    pub fn trivial() -> Arc<Self> {
        Arc::new(Self {
            omegas: Vec::new(),
            labels: Vec::new(),
            incommensurability_tol: DEFAULT_INCOMMENSURABILITY_TOL,
            checked: 0,
        })
    }

    fn unchecked(omegas: &[f64], labels: &[&str], tol: f64) -> Result<Self> {
        if omegas.len() != labels.len() {
            return Err(Error::Dim {
                expected: omegas.len(),
                got: labels.len(),
            });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidBasis("tolerance must be positive".into()));
        }
        for (w, l) in omegas.iter().zip(labels) {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidBasis(alloc::format!(
                    "frequency `{l}` must be strictly positive, got {w}"
                )));
            }
        }
        for i in 0..labels.len() {
            if labels[..i].contains(&labels[i]) {
                return Err(Error::InvalidBasis(alloc::format!(
                    "duplicate frequency label `{}`",
                    labels[i]
                )));
            }
        }
        Ok(Self {
            omegas: omegas.to_vec(),
            labels: labels.iter().map(|l| l.to_string()).collect(),
            incommensurability_tol: tol,
            checked: 0,
        })
    }

    /// Appends frequencies (forcing, free slave oscillations) to this basis.
    ///
    /// Appended frequencies only need to be positive; they are allowed to be
    /// commensurate with the existing ones. Series over `self` embed into the
    /// result by zero-padding their indices.
    pub fn extended(&self, extra: &[(&str, f64)]) -> Result<Arc<Self>> {
        let mut omegas = self.omegas.clone();
        let mut labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        for (l, w) in extra {
            omegas.push(*w);
            labels.push(l);
        }
        let basis = Self::unchecked(&omegas, &labels, self.incommensurability_tol)?;
        Ok(Arc::new(Self {
            checked: self.checked,
            ..basis
        }))
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn incommensurability_tol(&self) -> f64 {
        self.incommensurability_tol
    }

    /// Number of leading frequencies that were verified to be pairwise incommensurate.
    pub fn checked_len(&self) -> usize {
        self.checked
    }

    /// `p . omega` for a multi-index over this basis.
    pub fn frequency(&self, p: &[i32]) -> f64 {
        p.iter().zip(&self.omegas).map(|(&k, w)| k as f64 * w).sum()
    }

    /// True when `other` starts with exactly the frequencies of `self`.
    pub fn is_prefix_of(&self, other: &FrequencyBasis) -> bool {
        other.omegas.len() >= self.omegas.len()
            && self.omegas == other.omegas[..self.omegas.len()]
            && self.labels[..] == other.labels[..self.labels.len()]
    }

    pub fn zero_index(&self) -> FreqIndex {
        SmallVec::from_elem(0, self.dim())
    }

    pub fn unit_index(&self, k: usize, sign: i32) -> FreqIndex {
        let mut p = self.zero_index();
        p[k] = sign;
        p
    }
}

/// Smallest positive integers `(a, b)` with `|a w1 - b w2| < tol max(w1, w2)`, if any.
pub fn commensurate_pair(w1: f64, w2: f64, tol: f64) -> Option<(i32, i32)> {
    let scale = w1.max(w2);
    for a in 1..=COMMENSURABILITY_SEARCH {
        for b in 1..=COMMENSURABILITY_SEARCH {
            if (a as f64 * w1 - b as f64 * w2).abs() < tol * scale {
                return Some((a, b));
            }
        }
    }
    None
}

pub fn same_basis(a: &Arc<FrequencyBasis>, b: &Arc<FrequencyBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn index_add(a: &[i32], b: &[i32]) -> FreqIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn index_neg(a: &[i32]) -> FreqIndex {
    a.iter().map(|x| -x).collect()
}

pub(crate) fn index_norm(a: &[i32]) -> u32 {
    a.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn rejects_commensurate_pair() {
        let err = FrequencyBasis::new(&[1.0, 3.0], &["a", "b"], 1e-6).unwrap_err();
        assert!(matches!(err, Error::Commensurate { a: 3, b: 1, .. }));
        assert!(FrequencyBasis::new(&[2.0 * PI, 7.0], &["w1", "w2"], 1e-6).is_ok());
    }

    #[test]
    fn rejects_nonpositive_and_duplicate_labels() {
        assert!(FrequencyBasis::new(&[0.0], &["a"], 1e-6).is_err());
        assert!(FrequencyBasis::new(&[-1.0], &["a"], 1e-6).is_err());
        assert!(FrequencyBasis::new(&[1.0, PI], &["a", "a"], 1e-6).is_err());
    }

    #[test]
    fn extension_allows_commensurate_forcing() {
        let b = FrequencyBasis::new(&[2.0 * PI, 7.0], &["w1", "w2"], 1e-6).unwrap();
        let e = b.extended(&[("wf", 1.0)]).unwrap();
        assert_eq!(e.dim(), 3);
        assert_eq!(e.checked_len(), 2);
        assert!(b.is_prefix_of(&e));
        assert!((e.frequency(&[1, -1, 2]) - (2.0 * PI - 5.0)).abs() < 1e-15);
    }
}
