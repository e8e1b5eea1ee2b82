use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::system::{conjugate_partners, TransformedSystem};
use crate::error::{Error, Result};
use crate::qpalgebra::{poly_substitute, CompiledPolys, FrequencyBasis, QPSeries, QPStatePoly, SeriesMatrix};
use crate::simkit::{Trajectory, VectorField};

/// Transformed system split into master (`r`) and slave (`s`) blocks.
///
/// Polynomials are expressed in the reordered state `[z_r, z_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedSystem {
    pub basis: Arc<FrequencyBasis>,
    pub parametric_dim: usize,
    pub masters: Vec<usize>,
    pub slaves: Vec<usize>,
    pub jr: Vec<Complex64>,
    pub js: Vec<Complex64>,
    pub wr: Vec<QPStatePoly>,
    pub ws: Vec<QPStatePoly>,
    pub fr: Vec<QPSeries>,
    pub fs: Vec<QPSeries>,
}

impl PartitionedSystem {
    pub fn r(&self) -> usize {
        self.masters.len()
    }

    pub fn s(&self) -> usize {
        self.slaves.len()
    }
}

/// Splits the transformed system; a mode and its conjugate must be on the same side.
pub fn partition(sys: &TransformedSystem, masters: &[usize]) -> Result<PartitionedSystem> {
    let n = sys.dim();
    let mut is_master = alloc::vec![false; n];
    for &m in masters {
        if m >= n {
            return Err(Error::Partition(alloc::format!("master index {m} out of range for {n} modes")));
        }
        if is_master[m] {
            return Err(Error::Partition(alloc::format!("master index {m} listed twice")));
        }
        is_master[m] = true;
    }
    let partners = sys.conjugate_partners();
    for (i, &p) in partners.iter().enumerate() {
        if is_master[i] != is_master[p] {
            return Err(Error::Partition(alloc::format!(
                "modes {i} and {p} are complex conjugates but are split between master and slave blocks"
            )));
        }
    }
    let mut masters_sorted = masters.to_vec();
    masters_sorted.sort_unstable();
    let slaves: Vec<usize> = (0..n).filter(|&i| !is_master[i]).collect();
    let order: Vec<usize> = masters_sorted.iter().chain(&slaves).copied().collect();
    // Variable `order[k]` of the original state becomes variable `k`.
    let mut relabel = alloc::vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        relabel[i] = k;
    }
    let w: Vec<QPStatePoly> = sys.w.iter().map(|p| p.relabel(&relabel, n)).collect::<Result<_>>()?;
    Ok(PartitionedSystem {
        basis: sys.basis.clone(),
        parametric_dim: sys.parametric_dim,
        jr: masters_sorted.iter().map(|&i| sys.jbar[i]).collect(),
        js: slaves.iter().map(|&i| sys.jbar[i]).collect(),
        wr: masters_sorted.iter().map(|&i| w[i].clone()).collect(),
        ws: slaves.iter().map(|&i| w[i].clone()).collect(),
        fr: masters_sorted.iter().map(|&i| sys.forcing[i].clone()).collect(),
        fs: slaves.iter().map(|&i| sys.forcing[i].clone()).collect(),
        masters: masters_sorted,
        slaves,
    })
}

/// Default masters: the mode whose `|Im lambda|` is nearest `omega` (lowest index
/// on ties) together with its conjugate partner.
pub fn default_masters(jbar: &[Complex64], omega: f64) -> Vec<usize> {
    let Some(best) = (0..jbar.len()).min_by(|&a, &b| {
        (jbar[a].im.abs() - omega)
            .abs()
            .total_cmp(&(jbar[b].im.abs() - omega).abs())
            .then(a.cmp(&b))
    }) else {
        return Vec::new();
    };
    let partner = conjugate_partners(jbar)[best];
    let mut m = alloc::vec![best, partner];
    m.sort_unstable();
    m.dedup();
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Linear,
    Manifold,
}

/// `z_r' = Jr z_r + wbar(z_r, t) + Fr(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub basis: Arc<FrequencyBasis>,
    pub jr: Vec<Complex64>,
    pub wbar: Vec<QPStatePoly>,
    pub fr: Vec<QPSeries>,
    pub provenance: Provenance,
    /// Positions of the masters within the full modal state.
    pub masters: Vec<usize>,
    pub slaves: Vec<usize>,
    /// Slave states as functions of the masters (zero for linear reduction).
    pub slave_map: Vec<QPStatePoly>,
}

/// Drops the slaves: `wbar = wr(z_r, 0)`.
pub fn reduce_linear(part: &PartitionedSystem) -> Result<ReducedModel> {
    let r = part.r();
    let zero: Vec<QPStatePoly> = part
        .ws
        .iter()
        .map(|p| QPStatePoly::zero(&part.basis, r, p.max_degree(), p.trunc_order()))
        .collect();
    reduce_with_map(part, zero, Provenance::Linear)
}

pub(crate) fn reduce_with_map(part: &PartitionedSystem, slave_map: Vec<QPStatePoly>, provenance: Provenance) -> Result<ReducedModel> {
    let r = part.r();
    let basis = slave_map.first().map_or_else(|| part.basis.clone(), |h| h.basis().clone());
    let wr: Vec<QPStatePoly> = part.wr.iter().map(|p| p.embed(&basis)).collect::<Result<_>>()?;
    let wbar = wr
        .iter()
        .map(|p| poly_substitute(p, &slave_map, r))
        .collect::<Result<Vec<_>>>()?;
    let fr = part.fr.iter().map(|s| s.embed(&basis)).collect::<Result<_>>()?;
    Ok(ReducedModel {
        basis,
        jr: part.jr.clone(),
        wbar,
        fr,
        provenance,
        masters: part.masters.clone(),
        slaves: part.slaves.clone(),
        slave_map,
    })
}

impl ReducedModel {
    pub fn dim(&self) -> usize {
        self.jr.len()
    }

    /// Compiles the right-hand side for integration.
    pub fn compile(&self, drop_below: f64) -> CompiledModel {
        CompiledModel {
            jr: self.jr.clone(),
            rhs: CompiledPolys::new(&self.wbar, &self.fr, drop_below),
        }
    }
}

/// Integrable form of a [`ReducedModel`].
#[derive(Debug)]
pub struct CompiledModel {
    jr: Vec<Complex64>,
    rhs: CompiledPolys,
}

impl VectorField<Complex64> for CompiledModel {
    fn dim(&self) -> usize {
        self.jr.len()
    }

    fn eval(&self, t: f64, z: &[Complex64], dz: &mut [Complex64]) {
        self.rhs.eval(t, z, dz);
        for (i, l) in self.jr.iter().enumerate() {
            dz[i] += l * z[i];
        }
    }
}

/// Largest tolerated imaginary residue in recovered physical states.
pub const MAX_IMAGINARY_LEAK: f64 = 1e-6;

/// Maps a master trajectory back to physical states: `x = P(t) [z_r; H(z_r, t)]`.
///
/// The slave part uses the model's `slave_map` (zero for linear reduction).
pub fn recover_states(p: &SeriesMatrix, model: &ReducedModel, zr: &Trajectory<Complex64>) -> Result<Trajectory<f64>> {
    let n = p.nrows();
    let r = model.dim();
    if zr.dim != r || model.masters.len() + model.slaves.len() != n {
        return Err(Error::Dim { expected: r, got: zr.dim });
    }
    let h = CompiledPolys::new(&model.slave_map, &[], 0.0);
    let has_map = model.slave_map.iter().any(|m| !m.is_zero());
    let basis_dim = p.basis().dim();
    let p = if model.basis.dim() > basis_dim {
        p.embed(&model.basis)?
    } else {
        p.clone()
    };
    let mut leak: f64 = 0.0;
    let mut zs = alloc::vec![Complex64::new(0.0, 0.0); model.slaves.len()];
    let mut z = alloc::vec![Complex64::new(0.0, 0.0); n];
    let out = zr.map(n, |t, s, x: &mut [f64]| {
        if has_map {
            h.eval(t, s, &mut zs);
        }
        for (k, &i) in model.masters.iter().enumerate() {
            z[i] = s[k];
        }
        for (k, &i) in model.slaves.iter().enumerate() {
            z[i] = zs[k];
        }
        let pt = p.eval(t);
        for i in 0..n {
            let v: Complex64 = (0..n).map(|j| pt[(i, j)] * z[j]).sum();
            let scale = v.norm().max(1.0);
            leak = leak.max(v.im.abs() / scale);
            x[i] = v.re;
        }
    });
    if leak > MAX_IMAGINARY_LEAK {
        return Err(Error::ImaginaryLeak(leak));
    }
    Ok(out)
}
