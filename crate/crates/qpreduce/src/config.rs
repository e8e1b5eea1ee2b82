//! Versioned JSON system description.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use qpreduce_core::augmentation::{ParametricTerm, Phase, QPLinearSystem};
use qpreduce_core::qpalgebra::{FrequencyBasis, DEFAULT_INCOMMENSURABILITY_TOL};
use qpreduce_core::reduction::{ForcingTerm, NonlinearTerm, QPSystem, TransientMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::spectral::PsdConfig;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSpec {
    Cos,
    Sin,
}

impl From<PhaseSpec> for Phase {
    fn from(p: PhaseSpec) -> Self {
        match p {
            PhaseSpec::Cos => Phase::Cos,
            PhaseSpec::Sin => Phase::Sin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub label: String,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

/// `amplitude * cos|sin(omega t)` on entry `(row, col)` of the system matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricSpec {
    pub row: usize,
    pub col: usize,
    pub amplitude: f64,
    pub frequency: String,
    pub phase: PhaseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    pub row: usize,
    pub exponents: Vec<u8>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub row: usize,
    pub amplitude: f64,
    pub frequency: String,
    pub phase: PhaseSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransientSpec {
    Retain,
    Drop,
}

impl From<TransientSpec> for TransientMode {
    fn from(t: TransientSpec) -> Self {
        match t {
            TransientSpec::Retain => TransientMode::Retain,
            TransientSpec::Drop => TransientMode::Drop,
        }
    }
}

/// Truncation orders and tolerances of the symbolic stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub trunc_order: u32,
    pub max_degree: u32,
    pub normal_form_order: u32,
    /// Absolute normal-form resonance tolerance; relative default when absent.
    pub normal_form_tol: Option<f64>,
    pub torus_samples: usize,
    pub manifold_order: u32,
    /// Absolute manifold divisor tolerance; relative default when absent.
    pub manifold_tol: Option<f64>,
    pub transient: TransientSpec,
    pub incommensurability_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            trunc_order: qpreduce_core::qpalgebra::DEFAULT_TRUNC_ORDER,
            max_degree: qpreduce_core::qpalgebra::DEFAULT_MAX_DEGREE,
            normal_form_order: qpreduce_core::normal_form::DEFAULT_MAX_ORDER,
            normal_form_tol: None,
            torus_samples: qpreduce_core::lp_transform::DEFAULT_TORUS_SAMPLES,
            manifold_order: qpreduce_core::reduction::DEFAULT_MAX_ORDER,
            manifold_tol: None,
            transient: TransientSpec::Retain,
            incommensurability_tol: DEFAULT_INCOMMENSURABILITY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub t_end: f64,
    pub step: f64,
    /// Every `stride`-th integration step is recorded.
    pub stride: usize,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            step: qpreduce_core::simkit::DEFAULT_STEP,
            stride: 10,
        }
    }
}

/// Sampling of the inverse transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverseSpec {
    pub samples: usize,
    pub t_end: f64,
    pub gamma: f64,
}

impl Default for InverseSpec {
    fn default() -> Self {
        Self {
            samples: 1000,
            t_end: 50.0,
            gamma: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub dimension: usize,
    /// Constant system matrix, row by row.
    pub b0: Vec<Vec<f64>>,
    #[serde(default)]
    pub frequencies: Vec<FrequencySpec>,
    #[serde(default)]
    pub parametric_terms: Vec<ParametricSpec>,
    #[serde(default)]
    pub nonlinear_terms: Vec<NonlinearSpec>,
    #[serde(default)]
    pub forcing_frequencies: Vec<FrequencySpec>,
    #[serde(default)]
    pub forcing_terms: Vec<ForcingSpec>,
    pub initial_state: Vec<f64>,
    /// Master modes (indices into the diagonalized state); nearest the forcing when absent.
    #[serde(default)]
    pub masters: Option<Vec<usize>>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub inverse: InverseSpec,
    #[serde(default)]
    pub psd: PsdConfig,
}

/// A parsed configuration with the hash of the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: SystemConfig,
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl SystemConfig {
    /// Parses and validates; schema errors name the first failing path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(LoadedConfig {
            config: Self::from_json(text)?,
            hash: sha256_hex(&bytes),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let n = self.dimension;
        if self.version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version));
        }
        if n == 0 || self.b0.len() != n || self.b0.iter().any(|r| r.len() != n) {
            return bad(format!("b0 must be a {n}x{n} matrix"));
        }
        if self.initial_state.len() != n {
            return bad(format!("initial_state has {} entries, expected {n}", self.initial_state.len()));
        }
        let mut labels = BTreeSet::new();
        for f in self.frequencies.iter().chain(&self.forcing_frequencies) {
            if !labels.insert(f.label.as_str()) {
                return bad(format!("duplicate frequency label `{}`", f.label));
            }
            if !(f.omega.is_finite() && f.omega > 0.0) {
                return bad(format!("frequency `{}` must be positive and finite", f.label));
            }
        }
        for t in &self.parametric_terms {
            if t.row >= n || t.col >= n {
                return bad(format!("parametric term ({}, {}) is outside the {n}x{n} matrix", t.row, t.col));
            }
            if !self.frequencies.iter().any(|f| f.label == t.frequency) {
                return bad(format!("parametric term references undefined frequency `{}`", t.frequency));
            }
        }
        for t in &self.forcing_terms {
            if t.row >= n {
                return bad(format!("forcing term on row {} is outside the {n}-state system", t.row));
            }
            if !self.forcing_frequencies.iter().any(|f| f.label == t.frequency) {
                return bad(format!("forcing term references undefined forcing frequency `{}`", t.frequency));
            }
        }
        for t in &self.nonlinear_terms {
            if t.row >= n || t.exponents.len() != n {
                return bad(format!("nonlinear term on row {} must have {n} exponents", t.row));
            }
        }
        if let Some(m) = &self.masters {
            if m.is_empty() || m.iter().any(|&k| k >= n) {
                return bad(format!("masters {m:?} must be non-empty valid mode indices"));
            }
        }
        let s = &self.simulation;
        if !(s.step > 0.0 && s.t_end > 0.0 && s.stride > 0) {
            return bad("simulation needs step > 0, t_end > 0 and stride > 0".into());
        }
        let inv = &self.inverse;
        if inv.samples < 2 || !(inv.t_end > 0.0) || !(inv.gamma > 0.0) {
            return bad("inverse needs samples >= 2, t_end > 0 and gamma > 0".into());
        }
        let finite = self.b0.iter().flatten().chain(&self.initial_state).all(|v| v.is_finite())
            && self.parametric_terms.iter().all(|t| t.amplitude.is_finite())
            && self.forcing_terms.iter().all(|t| t.amplitude.is_finite())
            && self.nonlinear_terms.iter().all(|t| t.coefficient.is_finite());
        if !finite {
            return bad("all numeric entries must be finite".into());
        }
        Ok(())
    }

    /// Parametric frequency basis; fails on commensurate frequencies.
    pub fn basis(&self) -> Result<std::sync::Arc<FrequencyBasis>> {
        let omegas: Vec<f64> = self.frequencies.iter().map(|f| f.omega).collect();
        let labels: Vec<&str> = self.frequencies.iter().map(|f| f.label.as_str()).collect();
        if omegas.is_empty() {
            return Ok(FrequencyBasis::trivial());
        }
        Ok(FrequencyBasis::new(&omegas, &labels, self.solver.incommensurability_tol)?)
    }

    pub fn linear_system(&self) -> Result<QPLinearSystem> {
        let basis = self.basis()?;
        let n = self.dimension;
        let b0 = DMatrix::from_fn(n, n, |i, j| self.b0[i][j]);
        let terms = self
            .parametric_terms
            .iter()
            .map(|t| ParametricTerm {
                row: t.row,
                col: t.col,
                amplitude: t.amplitude,
                freq: basis.label_index(&t.frequency).expect("validated label"),
                phase: t.phase.into(),
            })
            .collect();
        Ok(QPLinearSystem::new(b0, terms, basis)?)
    }

    pub fn system(&self) -> Result<QPSystem> {
        let linear = self.linear_system()?;
        let nonlinear = self
            .nonlinear_terms
            .iter()
            .map(|t| NonlinearTerm {
                row: t.row,
                exponents: t.exponents.clone(),
                coefficient: t.coefficient,
            })
            .collect();
        let forcing = self
            .forcing_terms
            .iter()
            .map(|t| ForcingTerm {
                row: t.row,
                amplitude: t.amplitude,
                freq: self
                    .forcing_frequencies
                    .iter()
                    .position(|f| f.label == t.frequency)
                    .expect("validated label"),
                phase: t.phase.into(),
            })
            .collect();
        let freqs = self.forcing_frequencies.iter().map(|f| (f.label.clone(), f.omega)).collect();
        Ok(QPSystem::new(linear, nonlinear, forcing, freqs)?)
    }

    /// Lowest forcing frequency, used to pick default masters.
    pub fn reference_frequency(&self) -> Option<f64> {
        self.forcing_frequencies.iter().map(|f| f.omega).reduce(f64::min)
    }

    /// Applies `key=value` tolerance overrides.
    pub fn apply_tolerances(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("tolerance override `{o}` is not key=value")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("tolerance override `{o}` has a non-numeric value")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("tolerance `{key}` must be positive")));
            }
            match key.trim() {
                "normal_form" => self.solver.normal_form_tol = Some(v),
                "manifold" => self.solver.manifold_tol = Some(v),
                "incommensurability" => self.solver.incommensurability_tol = v,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown tolerance `{other}` (expected normal_form, manifold or incommensurability)"
                    )))
                }
            }
        }
        Ok(())
    }
}
