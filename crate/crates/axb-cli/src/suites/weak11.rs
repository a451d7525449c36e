use axb_riesz::group_geometry::GridSpec;
use axb_riesz::haar_model::{atom, discrete_t, l1_mass, weak_ratio};
use axb_riesz::registry::Named;
use axb_riesz::report::{num, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Map;

use super::{dimension, float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Weak11;

impl Named for Weak11 {
    fn name(&self) -> &str {
        "weak11"
    }
}

/// x-grid, u-range and atom height per dimension.
fn layout(n: usize) -> Result<(GridSpec, f64), axb_riesz::Error> {
    match n {
        1 => Ok((GridSpec::cube(1, 128.0, 4097, 4.0, 7.0, 49)?, 5.0)),
        _ => Ok((GridSpec::cube(2, 32.0, 513, 2.0, 5.0, 25)?, 3.0)),
    }
}

fn ratio(j: usize, grid: &GridSpec, width: f64, h0: f64, mass: f64) -> Result<f64, axb_riesz::Error> {
    let f = atom(grid.clone(), width, h0, mass)?;
    weak_ratio(&discrete_t(j, &f)?, l1_mass(&f))
}

impl Suite for Weak11 {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let n = dimension(cfg, 1, 2)?.unwrap_or(1);
        let j = cfg.j.unwrap_or(1);
        if j == 0 || j > n {
            return Err(SuiteError::Usage(format!("j must lie in 1..={n} (got {j})")));
        }
        let seed = cfg.seed()?;
        let trials = cfg.trials.unwrap_or(20);
        let band = cfg.tol.unwrap_or(0.15);
        let (grid, h0) = layout(n)?;

        let draws: Vec<(f64, f64)> = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..trials).map(|_| (10f64.powf(rng.gen_range(-0.6..0.0)), 10f64.powf(rng.gen_range(-2.0..2.0)))).collect()
        };
        let ratios = draws
            .par_iter()
            .map(|&(w, m)| ratio(j, &grid, w, h0, m))
            .collect::<Result<Vec<f64>, _>>()?;
        let mut table = Table::new(&["trial", "width", "mass", "weak_ratio"]);
        for (t, ((w, m), r)) in draws.iter().zip(&ratios).enumerate() {
            table.push(vec![t.to_string(), num(*w), num(*m), num(*r)]);
        }
        let c_emp = ratios.iter().cloned().fold(0.0, f64::max);

        let wide = ratio(j, &grid, 1.0, h0, 1.0)?;
        let narrow = ratio(j, &grid, 0.25, h0, 1.0)?;
        let heavy = ratio(j, &grid, 1.0, h0, 100.0)?;
        let narrowing = (narrow / wide - 1.0).abs();
        let rescale = (heavy / wide - 1.0).abs();

        let mut metrics = Map::new();
        metric(&mut metrics, "C_emp", float(c_emp));
        metric(&mut metrics, "ratio_width_1", float(wide));
        metric(&mut metrics, "ratio_width_quarter", float(narrow));
        metric(&mut metrics, "ratio_mass_100", float(heavy));
        metric(&mut metrics, "narrowing_change", float(narrowing));
        metric(&mut metrics, "rescale_change", float(rescale));
        let pass = narrowing <= band && rescale <= band && c_emp.is_finite();
        Ok(SuiteOutput { table, pass, metrics })
    }
}
