use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::qpalgebra::{FreqIndex, StateMonomial};

/// Solvability condition guarding one family of manifold coefficients.
///
/// A coefficient of degree `k` in the masters at expansion order `m`
/// (`epsilon^(m-1)`) is guarded by the condition returned from [`Condition::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// Forcing harmonic hitting a slave eigenvalue (degree 0, first order).
    LinearResonance,
    /// Pure master monomials of degree 2 against slave eigenvalues.
    ReducibilityDeg2,
    /// Degree-1 master terms mixing nonlinearity and forcing.
    CombinedReducibilityDeg1,
    /// Degree-0 terms at order epsilon.
    ForcedResonanceEps1,
    /// Pure master monomials of degree 3.
    ReducibilityDeg3,
    /// Degree-2 master terms mixing nonlinearity and forcing.
    CombinedReducibilityDeg2,
    /// Degree-0 terms at order epsilon^2.
    ForcedResonanceEps2,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::LinearResonance,
        Condition::ReducibilityDeg2,
        Condition::CombinedReducibilityDeg1,
        Condition::ForcedResonanceEps1,
        Condition::ReducibilityDeg3,
        Condition::CombinedReducibilityDeg2,
        Condition::ForcedResonanceEps2,
    ];

    /// Condition for a degree-`k` coefficient at expansion order `m`.
    ///
    /// `forced` tells whether the frequency index involves non-parametric
    /// frequencies; pure-degree terms that do are reported as combined.
    pub fn classify(k: u32, m: u32, forced: bool) -> Option<Self> {
        Some(match (k, m) {
            (0, 1) => Condition::LinearResonance,
            (0, 2) => Condition::ForcedResonanceEps1,
            (0, 3) => Condition::ForcedResonanceEps2,
            (2, 2) if !forced => Condition::ReducibilityDeg2,
            (3, 3) if !forced => Condition::ReducibilityDeg3,
            (1, _) => Condition::CombinedReducibilityDeg1,
            (2, 2) | (2, 3) => Condition::CombinedReducibilityDeg2,
            (3, 3) => Condition::CombinedReducibilityDeg2,
            _ => return None,
        })
    }

    pub fn id(self) -> &'static str {
        match self {
            Condition::LinearResonance => "linear-resonance",
            Condition::ReducibilityDeg2 => "reducibility/deg2",
            Condition::CombinedReducibilityDeg1 => "combined-reducibility/deg1",
            Condition::ForcedResonanceEps1 => "forced-resonance/eps1",
            Condition::ReducibilityDeg3 => "reducibility/deg3",
            Condition::CombinedReducibilityDeg2 => "combined-reducibility/deg2",
            Condition::ForcedResonanceEps2 => "forced-resonance/eps2",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.id() == id)
    }

    /// True for conditions stated over the parametric frequencies alone.
    pub fn is_parametric_only(self) -> bool {
        matches!(self, Condition::ReducibilityDeg2 | Condition::ReducibilityDeg3)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Which frequencies a checked index ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Parametric frequencies only.
    Parametric,
    /// Parametric plus forcing (and free slave) frequencies.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Clear,
    Violated,
}

/// One divisor evaluated while solving for a manifold coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducibilityCheck {
    pub condition: Condition,
    pub scope: Scope,
    /// Slave position within the slave block.
    pub slave: usize,
    /// Master monomial of the coefficient.
    pub monomial: StateMonomial,
    /// Frequency multi-index (over the scope's frequencies).
    pub index: FreqIndex,
    /// Expansion order `m` (the coefficient is of size `epsilon^(m-1)`).
    pub order: u32,
    pub divisor: Complex64,
    pub status: CheckStatus,
}

/// Every divisor checked during a manifold solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReducibilityReport {
    pub checks: Vec<ReducibilityCheck>,
    pub tolerance: f64,
}

impl ReducibilityReport {
    pub fn min_divisor(&self) -> Option<f64> {
        self.checks.iter().map(|c| c.divisor.norm()).reduce(f64::min)
    }

    pub fn first_violation(&self) -> Option<&ReducibilityCheck> {
        self.checks.iter().find(|c| c.status == CheckStatus::Violated)
    }

    pub fn is_clear(&self) -> bool {
        self.first_violation().is_none()
    }

    pub fn count(&self, condition: Condition) -> usize {
        self.checks.iter().filter(|c| c.condition == condition).count()
    }
}
