//! Stage orchestration: analyze → transform → reduce → simulate → compare.

use std::path::PathBuf;

use log::info;
use nalgebra::DVector;
use num_complex::Complex64;
use qpreduce_core::augmentation::{augment, modal_split, AugmentedSystem, Spectrum};
use qpreduce_core::lp_transform::{assemble_q, invert_direct, invert_znn, LPTransform, SampledInverse, ZnnConfig};
use qpreduce_core::normal_form::{normal_form_iterate, Classification, NormalForm, NormalFormConfig};
use qpreduce_core::qpalgebra::{QPSeries, QPStatePoly};
use qpreduce_core::reduction::{
    default_masters, partition, recover_states, reduce_linear, reduce_manifold, solve_manifold, CheckStatus, Condition,
    ManifoldConfig, ManifoldMap, PartitionedSystem, QPSystem, ReducedModel, TransformConfig, TransformedSystem,
};
use qpreduce_core::simkit::{integrate_strided, rms, Trajectory};
use serde::Serialize;

use crate::config::{sha256_hex, SystemConfig};
use crate::error::{CliError, Result};
use crate::io::{write_json, Table};
use crate::spectral::{compare as compare_trajectories, ComparisonReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `[re, im]` pair.
pub type C = [f64; 2];

fn c(z: Complex64) -> C {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Manifold,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Manifold => "manifold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceDoc {
    pub order: u32,
    pub component: usize,
    pub monomial: Vec<u8>,
    pub index: Vec<i32>,
    pub divisor: C,
    pub class: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisDoc {
    pub frequencies: Vec<(String, f64)>,
    /// Eigenvalues of the constant part of the physical block.
    pub eigenvalues: Vec<C>,
    pub jbar: Vec<C>,
    pub resonance_tolerance: f64,
    pub resonances: Vec<ResonanceDoc>,
    pub orbit_constants: Vec<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesTermDoc {
    pub index: Vec<i32>,
    pub value: C,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpDoc {
    pub trunc_order: u32,
    pub q0_error: f64,
    /// Row-major entries of `Qt(t)`, each a list of Fourier terms.
    pub q: Vec<Vec<Vec<SeriesTermDoc>>>,
    pub modal: Vec<Vec<C>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseDoc {
    pub samples: usize,
    pub t_end: f64,
    pub gamma: f64,
    pub direct_max_residual: f64,
    pub znn_max_residual: f64,
    /// Largest `|W_znn - W_direct|_inf` over samples with `t >= 0.1`.
    pub znn_vs_direct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: &'static str,
    pub checks: usize,
    pub violated: usize,
    pub min_divisor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDoc {
    pub tolerance: f64,
    pub clear: bool,
    pub checks: usize,
    pub min_divisor: Option<f64>,
    pub conditions: Vec<ConditionSummary>,
    pub free_frequencies: Vec<String>,
    pub secular_terms_dropped: usize,
    pub unrepresented_transients: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyTermDoc {
    pub monomial: Vec<u8>,
    pub terms: Vec<SeriesTermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDoc {
    pub method: Method,
    pub masters: Vec<usize>,
    pub slaves: Vec<usize>,
    pub frequencies: Vec<(String, f64)>,
    pub jr: Vec<C>,
    pub nonlinear: Vec<Vec<PolyTermDoc>>,
    pub forcing: Vec<Vec<SeriesTermDoc>>,
    pub slave_map: Vec<Vec<PolyTermDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonDoc {
    pub linear: ComparisonReport,
    pub manifold: ComparisonReport,
    pub reference_rms: Vec<f64>,
}

/// Everything a run produced, plus a record of each stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunArtifact {
    pub tool_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp: Option<LpDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_inverse: Option<InverseDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reducibility: Option<ReportDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_model: Option<ModelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonDoc>,
}

impl RunArtifact {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            command: command.into(),
            config_hash: config_hash.into(),
            stages: Vec::new(),
            analysis: None,
            lp: None,
            sampled_inverse: None,
            reducibility: None,
            reduced_model: None,
            comparison: None,
        }
    }

    /// Runs one stage and records its outcome.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        info!("stage {name}");
        let out = f();
        self.stages.push(StageRecord {
            stage: name.into(),
            ok: out.is_ok(),
            error: out.as_ref().err().map(|e| e.to_string()),
            exit_code: out.as_ref().err().map(CliError::exit_code),
        });
        out
    }

    /// The error report: stage records only.
    pub fn failure_report(&self) -> Self {
        let mut r = Self::new(&self.command, &self.config_hash);
        r.stages = self.stages.clone();
        r
    }
}

/// Files a successful run emits, held until the run completes.
#[derive(Debug, Default)]
pub struct Outputs {
    pub tables: Vec<(String, Table)>,
}

impl Outputs {
    fn add(&mut self, name: &str, t: Table) {
        self.tables.push((name.into(), t));
    }
}

fn series_doc(s: &QPSeries) -> Vec<SeriesTermDoc> {
    s.iter()
        .map(|(p, v)| SeriesTermDoc {
            index: p.to_vec(),
            value: c(*v),
        })
        .collect()
}

fn poly_doc(p: &QPStatePoly) -> Vec<PolyTermDoc> {
    p.iter()
        .map(|(m, s)| PolyTermDoc {
            monomial: m.exponents().to_vec(),
            terms: series_doc(s),
        })
        .collect()
}

/// Intermediate results shared by the commands.
pub struct Analyzed {
    pub system: QPSystem,
    pub aug: AugmentedSystem,
    pub spec: Spectrum,
    pub nf: NormalForm,
}

pub fn analyze(cfg: &SystemConfig) -> Result<Analyzed> {
    let system = cfg.system()?;
    let aug = augment(&system.linear);
    let spec = modal_split(&aug.bbar0, aug.physical_dim)?;
    let nf_cfg = NormalFormConfig {
        max_order: cfg.solver.normal_form_order,
        tol: cfg.solver.normal_form_tol,
    };
    let nf = normal_form_iterate(&aug, &spec, &nf_cfg)?;
    Ok(Analyzed { system, aug, spec, nf })
}

pub fn analysis_doc(cfg: &SystemConfig, a: &Analyzed) -> AnalysisDoc {
    let class = |k: Classification| match k {
        Classification::Exact => "exact",
        Classification::Near => "near",
        Classification::Clear => "clear",
    };
    AnalysisDoc {
        frequencies: cfg
            .frequencies
            .iter()
            .chain(&cfg.forcing_frequencies)
            .map(|f| (f.label.clone(), f.omega))
            .collect(),
        eigenvalues: a.spec.physical_modes().map(|k| c(a.spec.eigenvalues[k])).collect(),
        jbar: a.nf.jbar.diag.iter().map(|&z| c(z)).collect(),
        resonance_tolerance: a.nf.report.tolerance,
        resonances: a
            .nf
            .report
            .resonant()
            .map(|e| ResonanceDoc {
                order: e.order,
                component: e.component,
                monomial: e.monomial.exponents().to_vec(),
                index: e.index.to_vec(),
                divisor: c(e.divisor),
                class: class(e.class),
            })
            .collect(),
        orbit_constants: a.nf.orbit_constants.iter().map(|&z| c(z)).collect(),
    }
}

pub fn lp_transform(cfg: &SystemConfig, a: &Analyzed) -> Result<LPTransform> {
    Ok(assemble_q(&a.nf, &a.aug, &a.spec, a.system.linear.basis(), cfg.solver.trunc_order)?)
}

pub fn lp_doc(lp: &LPTransform, trunc_order: u32) -> LpDoc {
    let q = lp.q();
    LpDoc {
        trunc_order,
        q0_error: lp.q0_error,
        q: (0..q.nrows())
            .map(|i| (0..q.ncols()).map(|j| series_doc(q.get(i, j))).collect())
            .collect(),
        modal: lp.modal().row_iter().map(|r| r.iter().map(|&z| c(z)).collect()).collect(),
    }
}

/// Direct and recurrent inverses of `Qt` on the configured grid.
pub fn sampled_inverses(cfg: &SystemConfig, lp: &LPTransform) -> Result<(SampledInverse, SampledInverse)> {
    let inv = &cfg.inverse;
    let grid: Vec<f64> = (0..inv.samples)
        .map(|i| inv.t_end * i as f64 / (inv.samples - 1) as f64)
        .collect();
    let direct = invert_direct(lp, &grid)?;
    let znn = invert_znn(lp, &ZnnConfig::new(inv.gamma, grid))?;
    Ok((direct, znn))
}

fn inverse_table(s: &SampledInverse) -> Table {
    let n = s.matrices.first().map_or(0, |m| m.nrows());
    let mut header = vec!["time".to_string()];
    for i in 0..n {
        for j in 0..n {
            header.push(format!("w{i}{j}"));
        }
    }
    header.push("residual".into());
    let mut t = Table::new(header);
    for ((time, m), r) in s.times.iter().zip(&s.matrices).zip(&s.residuals) {
        let mut row = vec![*time];
        for i in 0..n {
            for j in 0..n {
                row.push(m[(i, j)]);
            }
        }
        row.push(*r);
        t.push(row);
    }
    t
}

fn inverse_doc(cfg: &SystemConfig, direct: &SampledInverse, znn: &SampledInverse) -> InverseDoc {
    let gap = direct
        .times
        .iter()
        .zip(direct.matrices.iter().zip(&znn.matrices))
        .filter(|(t, _)| **t >= 0.1)
        .map(|(_, (a, b))| (a - b).abs().row_iter().map(|r| r.sum()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    InverseDoc {
        samples: cfg.inverse.samples,
        t_end: cfg.inverse.t_end,
        gamma: cfg.inverse.gamma,
        direct_max_residual: direct.max_residual(),
        znn_max_residual: znn.max_residual(),
        znn_vs_direct: gap,
    }
}

pub fn transform(cfg: &SystemConfig, a: &Analyzed, lp: &LPTransform) -> Result<TransformedSystem> {
    let tc = TransformConfig {
        trunc_order: cfg.solver.trunc_order,
        max_degree: cfg.solver.max_degree,
        torus_samples: cfg.solver.torus_samples,
    };
    Ok(qpreduce_core::reduction::transform_system(&a.system, lp, &tc)?)
}

/// Configured masters, or the modes nearest the lowest forcing frequency.
pub fn masters(cfg: &SystemConfig, ts: &TransformedSystem) -> Result<Vec<usize>> {
    if let Some(m) = &cfg.masters {
        return Ok(m.clone());
    }
    let omega = cfg
        .reference_frequency()
        .ok_or_else(|| CliError::Config("`masters` is required when there is no forcing frequency".into()))?;
    Ok(default_masters(&ts.jbar, omega))
}

/// Modal initial state `z(0) = P(0)^-1 x0`.
pub fn modal_initial(ts: &TransformedSystem, x0: &[f64]) -> Result<Vec<Complex64>> {
    let p0 = ts
        .p_at(0.0)
        .try_inverse()
        .ok_or_else(|| CliError::Core(qpreduce_core::Error::SingularSample { time: 0.0, condition: f64::INFINITY }))?;
    let x = DVector::from_iterator(x0.len(), x0.iter().map(|&v| Complex64::new(v, 0.0)));
    Ok((p0 * x).iter().copied().collect())
}

/// A reduced model together with what produced it.
pub struct Reduction {
    pub part: PartitionedSystem,
    pub model: ReducedModel,
    pub map: Option<ManifoldMap>,
    pub z0: Vec<Complex64>,
}

pub fn reduce(cfg: &SystemConfig, ts: &TransformedSystem, method: Method) -> Result<Reduction> {
    let part = partition(ts, &masters(cfg, ts)?)?;
    let z0 = modal_initial(ts, &cfg.initial_state)?;
    let (model, map) = match method {
        Method::Linear => (reduce_linear(&part)?, None),
        Method::Manifold => {
            let mc = ManifoldConfig {
                tol: cfg.solver.manifold_tol,
                max_order: cfg.solver.manifold_order,
                transient: cfg.solver.transient.into(),
                slave_initial: Some(part.slaves.iter().map(|&k| z0[k]).collect()),
            };
            let map = solve_manifold(&part, &mc)?;
            (reduce_manifold(&part, &map)?, Some(map))
        }
    };
    Ok(Reduction { part, model, map, z0 })
}

pub fn report_doc(map: &ManifoldMap) -> ReportDoc {
    let rep = &map.report;
    ReportDoc {
        tolerance: rep.tolerance,
        clear: rep.is_clear(),
        checks: rep.checks.len(),
        min_divisor: rep.min_divisor(),
        conditions: Condition::ALL
            .iter()
            .map(|&cond| {
                let sel = || rep.checks.iter().filter(move |ch| ch.condition == cond);
                ConditionSummary {
                    condition: cond.id(),
                    checks: sel().count(),
                    violated: sel().filter(|ch| ch.status == CheckStatus::Violated).count(),
                    min_divisor: sel().map(|ch| ch.divisor.norm()).reduce(f64::min),
                }
            })
            .collect(),
        free_frequencies: map.free_labels.clone(),
        secular_terms_dropped: map.secular_dropped,
        unrepresented_transients: map.unrepresented_transients.clone(),
    }
}

/// One row per checked divisor; the condition is its position in [`Condition::ALL`].
fn divisor_table(map: &ManifoldMap) -> Table {
    let mut t = Table::new(["condition", "slave", "order", "degree", "divisor_re", "divisor_im", "divisor_abs", "violated"]);
    for ch in &map.report.checks {
        let code = Condition::ALL.iter().position(|&k| k == ch.condition).unwrap_or(0);
        t.push(vec![
            code as f64,
            ch.slave as f64,
            ch.order as f64,
            ch.monomial.degree() as f64,
            ch.divisor.re,
            ch.divisor.im,
            ch.divisor.norm(),
            (ch.status == CheckStatus::Violated) as u8 as f64,
        ]);
    }
    t
}

pub fn model_doc(method: Method, m: &ReducedModel) -> ModelDoc {
    ModelDoc {
        method,
        masters: m.masters.clone(),
        slaves: m.slaves.clone(),
        frequencies: m
            .basis
            .labels()
            .iter()
            .cloned()
            .zip(m.basis.omegas().iter().copied())
            .collect(),
        jr: m.jr.iter().map(|&z| c(z)).collect(),
        nonlinear: m.wbar.iter().map(poly_doc).collect(),
        forcing: m.fr.iter().map(series_doc).collect(),
        slave_map: m.slave_map.iter().map(poly_doc).collect(),
    }
}

pub fn simulate_full(cfg: &SystemConfig, sys: &QPSystem) -> Result<Trajectory<f64>> {
    let s = &cfg.simulation;
    Ok(integrate_strided(sys, &cfg.initial_state, 0.0, s.t_end, s.step, s.stride, "full")?)
}

/// Integrates the reduced model from the master part of `z(0)` and maps back to physical states.
pub fn simulate_reduced(cfg: &SystemConfig, ts: &TransformedSystem, red: &Reduction, label: &str) -> Result<Trajectory<f64>> {
    let s = &cfg.simulation;
    let zr0: Vec<Complex64> = red.part.masters.iter().map(|&k| red.z0[k]).collect();
    let z = integrate_strided(&red.model.compile(0.0), &zr0, 0.0, s.t_end, s.step, s.stride, label)?;
    Ok(recover_states(&ts.p, &red.model, &z)?)
}

fn trajectory_table(tr: &Trajectory<f64>, prefix: &str) -> Table {
    let mut t = Table::new(std::iter::once("time".to_string()).chain((0..tr.dim).map(|k| format!("{prefix}x{k}"))));
    for i in 0..tr.len() {
        t.push(std::iter::once(tr.time(i)).chain(tr.state(i).iter().copied()).collect());
    }
    t
}

/// Command-line level request.
#[derive(Debug, Clone)]
pub struct Request {
    pub config: PathBuf,
    pub out: PathBuf,
    pub method: Method,
    pub masters: Option<Vec<usize>>,
    pub tolerances: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Lp,
    Reduce,
    Simulate,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Lp => "lp",
            Command::Reduce => "reduce",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
        }
    }

    fn artifact_name(self) -> &'static str {
        match self {
            Command::Analyze => "analysis.json",
            Command::Compare => "summary.json",
            _ => "run.json",
        }
    }
}

/// Runs a command, writing its artifact (or only the error report on failure) under `req.out`.
pub fn run(cmd: Command, req: &Request) -> Result<RunArtifact> {
    let mut art = RunArtifact::new(cmd.name(), "");
    let mut out = Outputs::default();
    let result = execute(cmd, req, &mut art, &mut out);
    let report = req.out.join(cmd.artifact_name());
    match result {
        Ok(()) => {
            remove_stale(&req.out.join("error.json"))?;
            for (name, table) in &out.tables {
                table.write(&req.out.join(name))?;
            }
            write_json(&report, &art)?;
            Ok(art)
        }
        Err(e) => {
            remove_stale(&report)?;
            write_json(&req.out.join("error.json"), &art.failure_report())?;
            Err(e)
        }
    }
}

/// Removes an artifact left by an earlier run so it cannot be mistaken for this one's.
fn remove_stale(path: &std::path::Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(CliError::io(path, e)),
        _ => Ok(()),
    }
}

fn load(req: &Request, art: &mut RunArtifact) -> Result<SystemConfig> {
    let bytes = art.stage("read-config", || std::fs::read(&req.config).map_err(|e| CliError::io(&req.config, e)))?;
    art.config_hash = sha256_hex(&bytes);
    info!("config sha256 {}", art.config_hash);
    art.stage("config", || {
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
        let mut cfg = SystemConfig::from_json(text)?;
        cfg.apply_tolerances(&req.tolerances)?;
        if let Some(m) = &req.masters {
            cfg.masters = Some(m.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    })
}

fn execute(cmd: Command, req: &Request, art: &mut RunArtifact, out: &mut Outputs) -> Result<()> {
    let cfg = load(req, art)?;
    if cmd == Command::Simulate {
        let sys = art.stage("system", || cfg.system())?;
        let full = art.stage("simulate", || simulate_full(&cfg, &sys))?;
        out.add("trajectory_full.csv", trajectory_table(&full, ""));
        return Ok(());
    }
    let a = art.stage("analyze", || analyze(&cfg))?;
    art.analysis = Some(analysis_doc(&cfg, &a));
    if cmd == Command::Analyze {
        return Ok(());
    }
    let lp = art.stage("lp", || lp_transform(&cfg, &a))?;
    art.lp = Some(lp_doc(&lp, cfg.solver.trunc_order));
    if cmd == Command::Lp {
        let (direct, znn) = art.stage("inverse", || sampled_inverses(&cfg, &lp))?;
        art.sampled_inverse = Some(inverse_doc(&cfg, &direct, &znn));
        out.add("inverse_direct.csv", inverse_table(&direct));
        out.add("inverse_znn.csv", inverse_table(&znn));
        return Ok(());
    }
    let ts = art.stage("transform", || transform(&cfg, &a, &lp))?;
    if cmd == Command::Reduce {
        let red = art.stage(&format!("reduce-{}", req.method.name()), || reduce(&cfg, &ts, req.method))?;
        if let Some(map) = &red.map {
            art.reducibility = Some(report_doc(map));
            out.add("divisors.csv", divisor_table(map));
        }
        art.reduced_model = Some(model_doc(req.method, &red.model));
        return Ok(());
    }

    let full = art.stage("simulate-full", || simulate_full(&cfg, &a.system))?;
    let lin = art.stage("reduce-linear", || reduce(&cfg, &ts, Method::Linear))?;
    let man = art.stage("reduce-manifold", || reduce(&cfg, &ts, Method::Manifold))?;
    if let Some(map) = &man.map {
        art.reducibility = Some(report_doc(map));
    }
    art.reduced_model = Some(model_doc(Method::Manifold, &man.model));
    let xl = art.stage("simulate-linear", || simulate_reduced(&cfg, &ts, &lin, "linear"))?;
    let xm = art.stage("simulate-manifold", || simulate_reduced(&cfg, &ts, &man, "manifold"))?;
    let states: Vec<usize> = (0..full.dim).collect();
    let (cl, cm) = art.stage("compare", || {
        Ok((
            compare_trajectories(&full, &xl, &states, &cfg.psd)?,
            compare_trajectories(&full, &xm, &states, &cfg.psd)?,
        ))
    })?;
    art.comparison = Some(ComparisonDoc {
        linear: cl,
        manifold: cm,
        reference_rms: states.iter().map(|&k| rms(&full.component(k))).collect(),
    });
    let runs = [("full", &full), ("linear", &xl), ("manifold", &xm)];
    out.add("time_trace.csv", combined_table(&runs));
    out.add("phase_plane.csv", phase_table(&runs));
    out.add("psd.csv", art.stage("psd", || psd_table(&cfg, &runs))?);
    Ok(())
}

fn combined_table(runs: &[(&str, &Trajectory<f64>)]) -> Table {
    let dim = runs[0].1.dim;
    let len = runs.iter().map(|(_, t)| t.len()).min().unwrap_or(0);
    let mut header = vec!["time".to_string()];
    for (name, _) in runs {
        header.extend((0..dim).map(|k| format!("{name}_x{k}")));
    }
    let mut t = Table::new(header);
    for i in 0..len {
        let mut row = vec![runs[0].1.time(i)];
        for (_, tr) in runs {
            row.extend_from_slice(tr.state(i));
        }
        t.push(row);
    }
    t
}

/// Displacement/velocity pairs `(x_{2k}, x_{2k+1})` of every run.
fn phase_table(runs: &[(&str, &Trajectory<f64>)]) -> Table {
    let pairs = runs[0].1.dim / 2;
    let len = runs.iter().map(|(_, t)| t.len()).min().unwrap_or(0);
    let mut header = Vec::new();
    for (name, _) in runs {
        for k in 0..pairs {
            header.push(format!("{name}_q{k}"));
            header.push(format!("{name}_dq{k}"));
        }
    }
    let mut t = Table::new(header);
    for i in 0..len {
        let mut row = Vec::new();
        for (_, tr) in runs {
            row.extend_from_slice(&tr.state(i)[..2 * pairs]);
        }
        t.push(row);
    }
    t
}

fn psd_table(cfg: &SystemConfig, runs: &[(&str, &Trajectory<f64>)]) -> Result<Table> {
    let dim = runs[0].1.dim;
    let mut header = vec!["frequency_hz".to_string()];
    let mut cols = Vec::new();
    let mut freqs = Vec::new();
    for (name, tr) in runs {
        for k in 0..dim {
            let psd = cfg.psd.psd(&tr.component(k), tr.dt)?;
            header.push(format!("{name}_x{k}"));
            freqs = psd.frequencies;
            cols.push(psd.density);
        }
    }
    let mut t = Table::new(header);
    for (i, f) in freqs.iter().enumerate() {
        t.push(std::iter::once(*f).chain(cols.iter().map(|c| c[i])).collect());
    }
    Ok(t)
}
