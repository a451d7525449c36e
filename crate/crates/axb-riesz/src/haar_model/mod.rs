//! Haar-like decompositions, the coefficient envelope and the discrete flow model.

pub mod basis;
pub mod discrete;
pub mod flow;
pub mod key_sum;

pub use basis::{
    haar_coefficients, haar_pairing, test_profiles, DyadicFamily, HaarLikeFunction, HaarPartition, TestProfile,
};
pub use discrete::{atom, discrete_t, l1_mass};
pub use flow::{weak_norm_exact, weak_ratio, FlowSum, StepFunction, Superlevel};
pub use key_sum::{empirical_constant, finite_sum_trial, key_sum, key_trial, key_trials, random_haar_family};
