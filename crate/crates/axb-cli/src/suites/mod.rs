use std::sync::OnceLock;

use axb_riesz::registry::{Named, Registry};
use axb_riesz::report::Table;
use serde_json::{Map, Value};

use crate::config::RunConfig;

mod haar;
mod hardy;
mod kernels;
mod opnorms;
mod profiles;
mod schrodinger;
mod weak11;

#[derive(Debug)]
pub enum SuiteError {
    Usage(String),
    Failed(String),
}

impl From<axb_riesz::Error> for SuiteError {
    fn from(e: axb_riesz::Error) -> Self {
        SuiteError::Failed(e.to_string())
    }
}

pub struct SuiteOutput {
    pub table: Table,
    pub pass: bool,
    pub metrics: Map<String, Value>,
}

pub trait Suite: Named + Send + Sync {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError>;
}

pub fn suites() -> &'static Registry<dyn Suite> {
    static REG: OnceLock<Registry<dyn Suite>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn Suite> = Registry::new();
        r.register(Box::new(profiles::Profiles));
        r.register(Box::new(kernels::Kernels));
        r.register(Box::new(opnorms::Opnorms));
        r.register(Box::new(haar::Haar));
        r.register(Box::new(weak11::Weak11));
        r.register(Box::new(schrodinger::Schrodinger));
        r.register(Box::new(hardy::Hardy));
        r
    })
}

pub fn metric(m: &mut Map<String, Value>, key: &str, v: impl Into<Value>) {
    m.insert(key.to_string(), v.into());
}

/// Finite floats as JSON numbers, the rest as strings.
pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

pub fn dimension(cfg: &RunConfig, lo: usize, hi: usize) -> Result<Option<usize>, SuiteError> {
    match cfg.n {
        Some(n) if !(lo..=hi).contains(&n) => Err(SuiteError::Usage(format!("n out of supported range {lo}..{hi} (got {n})"))),
        other => Ok(other),
    }
}
