//! Operator-valued Fourier multipliers on functions of u.

pub mod model;
pub mod operator;
pub mod representation;
pub mod sweep;
pub mod symbol;
pub mod weights;

pub use operator::{
    build_multiplier_operator, domination_ratio, multiplier_forms, scaling_covariance_check, schur_bound, schur_bound_with_test,
    weighted_opnorm, weighted_opnorm_with, IntegralOperator1D, MultiplierForm, MultiplierSpec, PowerConfig, UGrid,
};
pub use symbol::{symbol, symbol_s, SymbolFunction};
pub use weights::{a2_characteristic, weight_families, MuckenhouptWeight, WeightFamily, WeightKind};
