use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::partition::{reduce_with_map, PartitionedSystem, Provenance, ReducedModel};
use super::report::{CheckStatus, Condition, ReducibilityCheck, ReducibilityReport, Scope};
use crate::error::{Error, Result, Violation};
use crate::qpalgebra::{FreqIndex, FrequencyBasis, QPSeries, QPStatePoly, StateMonomial};

/// Divisor tolerance relative to the largest eigenvalue magnitude.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-4;

/// Highest expansion order solved by default (`epsilon^2`).
pub const DEFAULT_MAX_ORDER: u32 = 3;

/// What to do with the free (homogeneous) part of the forced slave response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransientMode {
    /// Keep `exp(lambda_s t)` terms so that `h01(0)` equals the prescribed initial slave state.
    #[default]
    Retain,
    /// Steady manifold: particular solution only.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldConfig {
    /// Absolute divisor tolerance; `None` uses `DEFAULT_RELATIVE_TOL * max|lambda|`.
    pub tol: Option<f64>,
    /// Highest expansion order `m` (coefficients of size `epsilon^(m-1)`), 1..=3.
    pub max_order: u32,
    pub transient: TransientMode,
    /// Initial slave states used for the retained free response (zero when absent).
    pub slave_initial: Option<Vec<Complex64>>,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        Self {
            tol: None,
            max_order: DEFAULT_MAX_ORDER,
            transient: TransientMode::Retain,
            slave_initial: None,
        }
    }
}

/// `z_s = H(z_r, t) = sum_{k <= m} h_km(z_r, t)` with `h_km` homogeneous of degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMap {
    /// Partition basis, extended by the free slave frequencies when transients are retained.
    pub basis: Arc<FrequencyBasis>,
    /// `(k, m) -> h_km`, one polynomial in the masters per slave.
    pub terms: BTreeMap<(u32, u32), Vec<QPStatePoly>>,
    pub report: ReducibilityReport,
    /// Highest order solved so far.
    pub order: u32,
    /// Labels of the appended free slave frequencies.
    pub free_labels: Vec<String>,
    /// Terms resonant only through a free slave frequency (secular), left out of `H`.
    pub secular_dropped: usize,
    /// Slaves whose free response is not quasi-periodic (non-zero real part) and was dropped.
    pub unrepresented_transients: Vec<usize>,
}

impl ManifoldMap {
    pub fn slave_dim(&self) -> usize {
        self.terms.values().next().map_or(0, Vec::len)
    }

    pub fn h(&self, k: u32, m: u32) -> Option<&[QPStatePoly]> {
        self.terms.get(&(k, m)).map(Vec::as_slice)
    }

    /// Sum of all solved families.
    pub fn slave_map(&self) -> Result<Vec<QPStatePoly>> {
        let mut it = self.terms.values();
        let Some(first) = it.next() else {
            return Ok(Vec::new());
        };
        let mut out = first.clone();
        for hs in it {
            for (o, h) in out.iter_mut().zip(hs) {
                *o = o.add(h)?;
            }
        }
        Ok(out)
    }
}

/// Incremental solver for the invariance equation
/// `dH/dt + dH/dz_r (Jr z_r + wr(z_r, H) + Fr) = Js H + ws(z_r, H) + Fs`.
///
/// Orders are tracked with a bookkeeping variable `e` appended to the masters:
/// `h_km` is stored as `h_km(z_r, t) e^(m-k)`, so a monomial's total degree is its
/// order `m`. Nonlinear terms of degree `d` are then automatically `O(epsilon^(d-1))`
/// and forcing enters as `e F`.
pub struct ManifoldSolver {
    basis: Arc<FrequencyBasis>,
    parametric_dim: usize,
    r: usize,
    /// Master eigenvalues followed by a zero weight for `e`.
    weights: Vec<Complex64>,
    js: Vec<Complex64>,
    wr: Vec<QPStatePoly>,
    ws: Vec<QPStatePoly>,
    fr: Vec<QPStatePoly>,
    fs: Vec<QPStatePoly>,
    max_order: u32,
    trunc: u32,
    tol: f64,
    /// Free-frequency label index and sign per slave (`None` if not representable).
    free: Vec<Option<(usize, i32)>>,
    initial: Option<Vec<Complex64>>,
    /// Solved families in the `r + 1` graded variables.
    solved: BTreeMap<(u32, u32), Vec<QPStatePoly>>,
    map: ManifoldMap,
}

impl ManifoldSolver {
    pub fn new(part: &PartitionedSystem, cfg: &ManifoldConfig) -> Result<Self> {
        if !(1..=DEFAULT_MAX_ORDER).contains(&cfg.max_order) {
            return Err(Error::InvalidInput(alloc::format!(
                "manifold order must be between 1 and {DEFAULT_MAX_ORDER}, got {}",
                cfg.max_order
            )));
        }
        let r = part.r();
        let s = part.s();
        if let Some(z) = &cfg.slave_initial {
            if z.len() != s {
                return Err(Error::Dim { expected: s, got: z.len() });
            }
        }
        let scale = part
            .jr
            .iter()
            .chain(&part.js)
            .map(|l| l.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = cfg.tol.unwrap_or(DEFAULT_RELATIVE_TOL * scale);

        let mut free = alloc::vec![None; s];
        let mut unrepresented = Vec::new();
        let mut labels: Vec<(String, f64)> = Vec::new();
        if cfg.transient == TransientMode::Retain {
            for (j, l) in part.js.iter().enumerate() {
                if l.re.abs() > 1e-9 * scale || l.im.abs() <= 1e-9 * scale {
                    unrepresented.push(j);
                    continue;
                }
                let nu = l.im.abs();
                let slot = match labels.iter().position(|(_, w)| (w - nu).abs() <= 1e-9 * scale) {
                    Some(k) => k,
                    None => {
                        labels.push((alloc::format!("nu_{j}"), nu));
                        labels.len() - 1
                    }
                };
                free[j] = Some((part.basis.dim() + slot, if l.im > 0.0 { 1 } else { -1 }));
            }
        }
        let extra: Vec<(&str, f64)> = labels.iter().map(|(l, w)| (l.as_str(), *w)).collect();
        let basis = if extra.is_empty() {
            part.basis.clone()
        } else {
            part.basis.extended(&extra)?
        };

        let trunc = part.wr.first().or(part.ws.first()).map_or(crate::qpalgebra::DEFAULT_TRUNC_ORDER, |p| p.trunc_order());
        let nv = r + 1;
        let lift = |p: &QPStatePoly| p.embed(&basis).map(|q| q.with_limits(cfg.max_order, trunc));
        let wr = part.wr.iter().map(lift).collect::<Result<Vec<_>>>()?;
        let ws = part.ws.iter().map(lift).collect::<Result<Vec<_>>>()?;
        let forcing = |f: &QPSeries| -> Result<QPStatePoly> {
            let mut p = QPStatePoly::zero(&basis, nv, cfg.max_order, trunc);
            let f = f.embed(&basis)?.truncated(trunc);
            if !f.is_zero() {
                p.add_term(StateMonomial::var(nv, r), f)?;
            }
            Ok(p)
        };
        let fr = part.fr.iter().map(forcing).collect::<Result<Vec<_>>>()?;
        let fs = part.fs.iter().map(forcing).collect::<Result<Vec<_>>>()?;
        let mut weights = part.jr.clone();
        weights.push(Complex64::new(0.0, 0.0));

        Ok(Self {
            basis: basis.clone(),
            parametric_dim: part.parametric_dim,
            r,
            weights,
            js: part.js.clone(),
            wr,
            ws,
            fr,
            fs,
            max_order: cfg.max_order,
            trunc,
            tol,
            free,
            initial: cfg.slave_initial.clone(),
            solved: BTreeMap::new(),
            map: ManifoldMap {
                basis,
                terms: BTreeMap::new(),
                report: ReducibilityReport {
                    checks: Vec::new(),
                    tolerance: tol,
                },
                order: 0,
                free_labels: labels.into_iter().map(|(l, _)| l).collect(),
                secular_dropped: 0,
                unrepresented_transients: unrepresented,
            },
        })
    }

    /// `h01`: forced slave response (`Fs` only).
    pub fn solve_h01(&mut self) -> Result<()> {
        self.solve_through(1)
    }

    /// `h22`, `h12`, `h02` (order `epsilon`).
    pub fn solve_order1(&mut self) -> Result<()> {
        self.solve_through(2)
    }

    /// `h33`, `h23`, `h13`, `h03` (order `epsilon^2`).
    pub fn solve_order2(&mut self) -> Result<()> {
        self.solve_through(3)
    }

    fn solve_through(&mut self, m: u32) -> Result<()> {
        if m > self.max_order {
            return Err(Error::InvalidInput(alloc::format!(
                "order {m} exceeds the configured maximum {}",
                self.max_order
            )));
        }
        while self.map.order < m {
            self.solve_order(self.map.order + 1)?;
        }
        Ok(())
    }

    pub fn map(&self) -> &ManifoldMap {
        &self.map
    }

    pub fn into_map(self) -> ManifoldMap {
        self.map
    }

    fn nv(&self) -> usize {
        self.r + 1
    }

    fn zero(&self) -> QPStatePoly {
        QPStatePoly::zero(&self.basis, self.nv(), self.max_order, self.trunc)
    }

    /// Sum of all families solved so far, in graded variables.
    fn h_total(&self) -> Result<Vec<QPStatePoly>> {
        let mut out: Vec<QPStatePoly> = (0..self.js.len()).map(|_| self.zero()).collect();
        for hs in self.solved.values() {
            for (o, h) in out.iter_mut().zip(hs) {
                *o = o.add(h)?;
            }
        }
        Ok(out)
    }

    /// Images of `[z_r, z_s]` with `z_s` replaced by the current `H`.
    fn images(&self, h: &[QPStatePoly]) -> Vec<QPStatePoly> {
        let nv = self.nv();
        (0..self.r)
            .map(|k| QPStatePoly::var(&self.basis, nv, k, self.max_order, self.trunc))
            .chain(h.iter().cloned())
            .collect()
    }

    /// `sum_l dA/dz_l * b_l` over the masters.
    fn master_jacobian_apply(&self, a: &QPStatePoly, b: &[QPStatePoly]) -> Result<QPStatePoly> {
        let mut acc = self.zero();
        for (l, bl) in b.iter().enumerate() {
            if bl.is_zero() {
                continue;
            }
            let d = a.deriv(l);
            if !d.is_zero() {
                acc = acc.add(&d.mul(bl)?)?;
            }
        }
        Ok(acc)
    }

    fn master_degree(&self, m: &StateMonomial) -> u32 {
        m.degree() - m.exponents()[self.r] as u32
    }

    fn solve_order(&mut self, m: u32) -> Result<()> {
        let h_low = self.h_total()?;
        let images = self.images(&h_low);
        let ws_sub: Vec<QPStatePoly> = self.ws.iter().map(|p| p.compose(&images)).collect::<Result<_>>()?;
        let wr_sub: Vec<QPStatePoly> = self.wr.iter().map(|p| p.compose(&images)).collect::<Result<_>>()?;
        let mut rhs = Vec::with_capacity(self.js.len());
        for (j, h) in h_low.iter().enumerate() {
            let mut r = ws_sub[j].homogeneous(m);
            if m == 1 {
                r = r.add(&self.fs[j])?;
            }
            let transport = self.master_jacobian_apply(h, &wr_sub)?.homogeneous(m);
            rhs.push(r.sub(&transport)?);
        }

        let mut above: Vec<QPStatePoly> = (0..self.js.len()).map(|_| self.zero()).collect();
        for k in (0..=m).rev() {
            let mut family = Vec::with_capacity(self.js.len());
            for j in 0..self.js.len() {
                let src = rhs[j]
                    .filter(|mono| self.master_degree(mono) == k)
                    .sub(&self.master_jacobian_apply(&above[j], &self.fr)?)?;
                family.push(self.solve_family(j, k, m, &src)?);
            }
            if let Some(v) = self.map.report.checks.iter().find(|c| c.status == CheckStatus::Violated) {
                let v = Box::new(Violation {
                    check: v.clone(),
                    tolerance: self.tol,
                });
                return Err(if v.check.condition == Condition::LinearResonance {
                    Error::LinearResonance(v)
                } else {
                    Error::ReducibilityViolation(v)
                });
            }
            if k == 0 && m == 1 {
                self.add_free_response(&mut family)?;
            }
            if family.iter().any(|p| !p.is_zero()) {
                self.map.terms.insert((k, m), family.iter().map(|p| self.ungrade(p)).collect::<Result<_>>()?);
            }
            above = family.clone();
            self.solved.insert((k, m), family);
        }
        self.map.order = m;
        Ok(())
    }

    /// Divides every source coefficient by its divisor, logging each check.
    fn solve_family(&mut self, j: usize, k: u32, m: u32, src: &QPStatePoly) -> Result<QPStatePoly> {
        let mut out = self.zero();
        for (mono, series) in src.iter() {
            let mut terms: Vec<(FreqIndex, Complex64)> = Vec::new();
            for (p, c) in series.iter() {
                let free_part = p[self.basis.dim() - self.map.free_labels.len()..].iter().any(|&x| x != 0);
                let forced = p[self.parametric_dim..].iter().any(|&x| x != 0);
                let divisor = Complex64::new(0.0, self.basis.frequency(p)) + mono.weight(&self.weights) - self.js[j];
                if free_part && divisor.norm() < self.tol {
                    // Secular interaction of the free slave response with itself.
                    self.map.secular_dropped += 1;
                    continue;
                }
                let condition = Condition::classify(k, m, forced).ok_or_else(|| {
                    Error::InvalidInput(alloc::format!("no solvability condition for degree {k} at order {m}"))
                })?;
                let status = if divisor.norm() < self.tol {
                    CheckStatus::Violated
                } else {
                    CheckStatus::Clear
                };
                self.map.report.checks.push(ReducibilityCheck {
                    condition,
                    scope: if condition.is_parametric_only() {
                        Scope::Parametric
                    } else {
                        Scope::Extended
                    },
                    slave: j,
                    monomial: StateMonomial::new(&mono.exponents()[..self.r]),
                    index: p.clone(),
                    order: m,
                    divisor,
                    status,
                });
                if status == CheckStatus::Clear {
                    terms.push((p.clone(), c / divisor));
                }
            }
            if !terms.is_empty() {
                let s = QPSeries::from_terms(&self.basis, self.trunc, terms, false)?;
                out.add_term(mono.clone(), s)?;
            }
        }
        Ok(out)
    }

    /// `h01_j += (z_s0_j - h01_j(0)) exp(lambda_j t)`.
    fn add_free_response(&mut self, family: &mut [QPStatePoly]) -> Result<()> {
        let e = StateMonomial::var(self.nv(), self.r);
        for (j, h) in family.iter_mut().enumerate() {
            let Some((label, sign)) = self.free[j] else {
                continue;
            };
            let particular0: Complex64 = h.coeff(&e).map_or(Complex64::new(0.0, 0.0), |s| s.eval(0.0));
            let amp = self.slave_initial(j) - particular0;
            if amp.norm() == 0.0 {
                continue;
            }
            let s = QPSeries::from_terms(&self.basis, self.trunc, [(self.basis.unit_index(label, sign), amp)], false)?;
            h.add_term(e.clone(), s)?;
        }
        Ok(())
    }

    fn slave_initial(&self, j: usize) -> Complex64 {
        self.initial.as_ref().map_or(Complex64::new(0.0, 0.0), |z| z[j])
    }

    /// Sets `e = 1`, leaving a polynomial in the masters only.
    fn ungrade(&self, p: &QPStatePoly) -> Result<QPStatePoly> {
        let mut out = QPStatePoly::zero(&self.basis, self.r, self.max_order, self.trunc);
        for (mono, s) in p.iter() {
            out.add_term(StateMonomial::new(&mono.exponents()[..self.r]), s.clone())?;
        }
        Ok(out)
    }
}

/// Solves the manifold through `cfg.max_order`.
pub fn solve_manifold(part: &PartitionedSystem, cfg: &ManifoldConfig) -> Result<ManifoldMap> {
    let mut solver = ManifoldSolver::new(part, cfg)?;
    solver.solve_through(cfg.max_order)?;
    Ok(solver.into_map())
}

/// Substitutes `z_s = H(z_r, t)` into the master equations.
pub fn reduce_manifold(part: &PartitionedSystem, map: &ManifoldMap) -> Result<ReducedModel> {
    let mut h = map.slave_map()?;
    if h.is_empty() {
        let trunc = part.wr.first().map_or(crate::qpalgebra::DEFAULT_TRUNC_ORDER, |p| p.trunc_order());
        h = (0..part.s())
            .map(|_| QPStatePoly::zero(&map.basis, part.r(), DEFAULT_MAX_ORDER, trunc))
            .collect();
    }
    reduce_with_map(part, h, Provenance::Manifold)
}
