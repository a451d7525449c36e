use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use crate::suites::SuiteError;

/// Flags shared by every suite; each suite reads the ones it needs.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct RunConfig {
    /// Dimension of ℝⁿ.
    #[arg(long)]
    pub n: Option<usize>,
    /// Riesz index (0 for the u-direction).
    #[arg(long)]
    pub j: Option<usize>,
    /// Derivative order of the profile.
    #[arg(long)]
    pub k: Option<usize>,
    /// Multi-index with 0/1 entries, comma separated.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Frequency vector, comma separated.
    #[arg(long)]
    pub xi: Option<String>,
    /// Lebesgue exponents, comma separated.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Grid points (u-grid for operators, s-grid for the Schrödinger model).
    #[arg(long = "grid-nu")]
    pub grid_nu: Option<usize>,
    /// Total length of the u- or s-interval.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Overrides the suite's main tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV destination; the JSON summary goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Kernel or operator variant.
    #[arg(long)]
    pub variant: Option<String>,
    /// Sweep ξ over {2^-3, …, 2^3} times unit directions.
    #[arg(long = "xi-sweep")]
    pub xi_sweep: bool,
    /// Largest U of the Hardy sweep.
    #[arg(long = "Umax")]
    pub u_max: Option<f64>,
}

fn list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, SuiteError> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| SuiteError::Usage(format!("--{flag}: cannot parse `{t}`"))))
        .collect()
}

impl RunConfig {
    pub fn seed(&self) -> Result<u64, SuiteError> {
        self.seed.ok_or_else(|| SuiteError::Usage("this suite is randomized: pass --seed".into()))
    }

    pub fn alpha(&self, n: usize) -> Result<Vec<u8>, SuiteError> {
        match &self.alpha {
            None => Ok(vec![0; n]),
            Some(s) => {
                let a: Vec<u8> = list("alpha", s)?;
                if a.len() != n || a.iter().any(|v| *v > 1) {
                    return Err(SuiteError::Usage(format!("--alpha needs {n} entries in {{0,1}}")));
                }
                Ok(a)
            }
        }
    }

    pub fn xi(&self, n: usize) -> Result<Vec<f64>, SuiteError> {
        match &self.xi {
            None => Ok((0..n).map(|a| if a == 0 { 1.0 } else { 0.0 }).collect()),
            Some(s) => {
                let v: Vec<f64> = list("xi", s)?;
                if v.len() != n {
                    return Err(SuiteError::Usage(format!("--xi needs {n} entries")));
                }
                Ok(v)
            }
        }
    }

    pub fn p_list(&self, default: &[f64]) -> Result<Vec<f64>, SuiteError> {
        match &self.p {
            None => Ok(default.to_vec()),
            Some(s) => {
                let v: Vec<f64> = list("p", s)?;
                if v.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
                    return Err(SuiteError::Usage("--p values must lie in (1, ∞)".into()));
                }
                Ok(v)
            }
        }
    }
}
