use axb_riesz::registry::Named;
use axb_riesz::report::{linear_fit, num, Table};
use axb_riesz::riesz_kernels::hardy_divergence;
use serde_json::Map;

use super::{dimension, float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Hardy;

impl Named for Hardy {
    fn name(&self) -> &str {
        "hardy"
    }
}

impl Suite for Hardy {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let n = dimension(cfg, 1, 2)?.unwrap_or(1);
        let j = cfg.j.unwrap_or(1);
        if j > n {
            return Err(SuiteError::Usage(format!("j must lie in 0..={n} (got {j})")));
        }
        let u_max = cfg.u_max.unwrap_or(64.0);
        if u_max < 8.0 {
            return Err(SuiteError::Usage("--Umax must be at least 8".into()));
        }
        let us: Vec<f64> = (2..).map(|e| 2f64.powi(e)).take_while(|u| *u <= u_max).collect();
        let mut table = Table::new(&["n", "j", "U", "mass", "log_U"]);
        let mut masses = Vec::new();
        for &u in &us {
            let m = hardy_divergence(n, j, u)?;
            masses.push(m);
            table.push(vec![n.to_string(), j.to_string(), num(u), num(m), num(u.ln())]);
        }
        let logs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
        let fit = linear_fit(&logs, &masses);
        let r2_min = cfg.tol.unwrap_or(0.99);
        let monotone = masses.windows(2).all(|w| w[1] >= w[0]);
        let pass = fit.slope > 0.0 && fit.r2 >= r2_min && monotone;
        let mut metrics = Map::new();
        metric(&mut metrics, "slope", float(fit.slope));
        metric(&mut metrics, "intercept", float(fit.intercept));
        metric(&mut metrics, "r2", float(fit.r2));
        metric(&mut metrics, "r2_min", float(r2_min));
        metric(&mut metrics, "monotone", monotone);
        Ok(SuiteOutput { table, pass, metrics })
    }
}
