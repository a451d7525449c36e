use axb_riesz::registry::Named;
use axb_riesz::report::{num, Table};
use axb_riesz::special_kernels::{asymptotic_leading, local_delta, phi_xm1, Regime};
use serde_json::Map;

use super::{dimension, float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Profiles;

impl Named for Profiles {
    fn name(&self) -> &str {
        "profiles"
    }
}

impl Suite for Profiles {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let ns: Vec<usize> = match dimension(cfg, 1, 6)? {
            Some(n) => vec![n],
            None => (1..=4).collect(),
        };
        let ks: Vec<usize> = match cfg.k {
            Some(k) if k > 4 => return Err(SuiteError::Usage(format!("k out of supported range 0..4 (got {k})"))),
            Some(k) => vec![k],
            None => (0..=2).collect(),
        };
        let mut table = Table::new(&[
            "n", "k", "X", "value", "leading_infinity", "leading_local", "regime", "rel_error", "bound", "pass",
        ]);
        let mut pass = true;
        let mut worst: f64 = 0.0;
        for &n in &ns {
            for &k in &ks {
                let far = [10.0f64, 20.0, 30.0].map(|l| (Regime::Infinity, l.exp() - 1.0));
                let near = [1e-2, 1e-3, 1e-4].map(|d| (Regime::Local, d));
                for (regime, xm1) in far.into_iter().chain(near) {
                    let x = 1.0 + xm1;
                    let value = phi_xm1(n, k, xm1)?;
                    let inf = asymptotic_leading(n, k, x, Regime::Infinity);
                    let loc = asymptotic_leading(n, k, x, Regime::Local);
                    let (lead, default_bound, label) = match regime {
                        Regime::Infinity => (inf, 3.0 / x.ln(), "infinity"),
                        Regime::Local => (loc, 5.0 * xm1.powf(local_delta(n, k)), "local"),
                    };
                    let err = (value / lead - 1.0).abs();
                    let bound = cfg.tol.unwrap_or(default_bound);
                    let ok = err <= bound;
                    pass &= ok;
                    worst = worst.max(err / bound);
                    table.push(vec![
                        n.to_string(),
                        k.to_string(),
                        num(x),
                        num(value),
                        num(inf),
                        num(loc),
                        label.into(),
                        num(err),
                        num(bound),
                        ok.to_string(),
                    ]);
                }
            }
        }
        let mut metrics = Map::new();
        metric(&mut metrics, "rows", table.rows.len());
        metric(&mut metrics, "worst_error_over_bound", float(worst));
        Ok(SuiteOutput { table, pass, metrics })
    }
}
