//! Fixed-step RK4 integration and trajectory error metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default integration step (s).
pub const DEFAULT_STEP: f64 = 1e-3;

/// Scalar type a state vector is made of.
pub trait State: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {
    fn is_finite(self) -> bool;
}

impl State for f64 {
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl State for Complex64 {
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Right-hand side `dx/dt = f(t, x)`.
pub trait VectorField<S: State> {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, x: &[S], dx: &mut [S]);
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<S: State, F: Fn(f64, &[S], &mut [S])> VectorField<S> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[S], dx: &mut [S]) {
        (self.f)(t, x, dx)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub system: String,
    pub integrator: String,
    pub step: f64,
}

/// States sampled on a uniform time grid (row-major, `dim` values per sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub t0: f64,
    pub dt: f64,
    pub dim: usize,
    pub data: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S: State> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn state(&self, i: usize) -> &[S] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// One component as a signal.
    pub fn component(&self, k: usize) -> Vec<S> {
        (0..self.len()).map(|i| self.data[i * self.dim + k]).collect()
    }

    /// Applies `f` to every sample, producing a trajectory of dimension `dim`.
    pub fn map<T: State>(&self, dim: usize, mut f: impl FnMut(f64, &[S], &mut [T])) -> Trajectory<T> {
        let mut data = alloc::vec![T::default(); dim * self.len()];
        for i in 0..self.len() {
            f(self.time(i), self.state(i), &mut data[i * dim..(i + 1) * dim]);
        }
        Trajectory {
            t0: self.t0,
            dt: self.dt,
            dim,
            data,
            meta: self.meta.clone(),
        }
    }
}

/// Reusable RK4 stage buffers.
pub struct Rk4<S> {
    k1: Vec<S>,
    k2: Vec<S>,
    k3: Vec<S>,
    k4: Vec<S>,
    tmp: Vec<S>,
}

impl<S: State> Rk4<S> {
    pub fn new(dim: usize) -> Self {
        let z = alloc::vec![S::default(); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `x` from `t` to `t + h` in place.
    pub fn step<F: VectorField<S> + ?Sized>(&mut self, f: &F, t: f64, h: f64, x: &mut [S]) {
        let n = x.len();
        f.eval(t, x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + self.k1[i] * (0.5 * h);
        }
        f.eval(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + self.k2[i] * (0.5 * h);
        }
        f.eval(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + self.k3[i] * h;
        }
        f.eval(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            x[i] = x[i] + (self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i]) * (h / 6.0);
        }
    }
}

/// Integrates with classical RK4 at a fixed step, recording every `stride`-th state.
///
/// The number of steps is `round((t1 - t0) / step)`.
pub fn integrate_strided<S: State, F: VectorField<S> + ?Sized>(
    f: &F,
    x0: &[S],
    t0: f64,
    t1: f64,
    step: f64,
    stride: usize,
    system: &str,
) -> Result<Trajectory<S>> {
    if !(step > 0.0) || !(t1 > t0) || stride == 0 {
        return Err(Error::InvalidInput("integration needs step > 0, t1 > t0, stride > 0".into()));
    }
    if x0.len() != f.dim() {
        return Err(Error::Dim {
            expected: f.dim(),
            got: x0.len(),
        });
    }
    let steps = libm::round((t1 - t0) / step) as usize;
    let mut x = x0.to_vec();
    let mut rk = Rk4::new(x.len());
    let mut data = Vec::with_capacity((steps / stride + 1) * x.len());
    data.extend_from_slice(&x);
    for n in 0..steps {
        let t = t0 + n as f64 * step;
        rk.step(f, t, step, &mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp(t + step));
        }
        if (n + 1) % stride == 0 {
            data.extend_from_slice(&x);
        }
    }
    Ok(Trajectory {
        t0,
        dt: step * stride as f64,
        dim: x.len(),
        data,
        meta: TrajectoryMeta {
            system: system.into(),
            integrator: "rk4".into(),
            step,
        },
    })
}

/// Integrates and records every step.
pub fn integrate<S: State, F: VectorField<S> + ?Sized>(
    f: &F,
    x0: &[S],
    t_span: (f64, f64),
    step: f64,
) -> Result<Trajectory<S>> {
    integrate_strided(f, x0, t_span.0, t_span.1, step, 1, "")
}

/// Root-mean-square of a signal.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    libm::sqrt(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

/// Root-mean-square difference of two equally long signals.
pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n as f64)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
