//! Truncated multi-frequency Fourier series and polynomials with series coefficients.

mod basis;
mod compiled;
mod matrix;
mod poly;
mod series;

pub use basis::{commensurate_pair, same_basis, FreqIndex, FrequencyBasis, COMMENSURABILITY_SEARCH, DEFAULT_INCOMMENSURABILITY_TOL};
pub use compiled::CompiledPolys;
pub use matrix::SeriesMatrix;
pub use poly::{poly_apply, poly_apply_vec, poly_substitute, QPStatePoly, StateMonomial, DEFAULT_MAX_DEGREE};
pub use series::{series_ddt, series_mul, QPSeries, DEFAULT_TRUNC_ORDER, PURGE_THRESHOLD};

#[allow(unused_imports)]
pub(crate) use basis::{index_add, index_neg, index_norm};
#[allow(unused_imports)]
pub(crate) use series::{Coeffs, Phasors};
