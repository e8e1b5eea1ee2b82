//! Order reduction of nonlinear quasi-periodic systems.
//!
//! The crate is `no_std` (with `alloc`). It covers the series algebra, state
//! augmentation, normal forms, the Lyapunov–Perron transformation and its
//! inverse, master/slave reduction, and fixed-step integration.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod qpalgebra;
pub mod reduction;

pub use error::{Error, Result};
pub mod augmentation;
pub mod simkit;
pub mod normal_form;
pub mod lp_transform;
