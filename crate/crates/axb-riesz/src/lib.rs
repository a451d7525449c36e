//! Kernels, operator-valued symbols and multiscale models for Riesz
//! transforms on the ax+b group ℝⁿ⋊ℝ.

pub mod autodiff;
pub mod error;
pub mod group_geometry;
pub mod haar_model;
pub mod multiplier_ops;
pub mod quadrature;
pub mod registry;
pub mod report;
pub mod riesz_kernels;
pub mod schrodinger;
pub mod special_kernels;

pub use error::{Error, Result};
