use axb_riesz::registry::Named;
use axb_riesz::report::{num, Table};
use axb_riesz::schrodinger::{build_h, lp_norm_probe, probe_grid, probe_input, pythagoras_residual, riesz_operators};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

use super::{float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Schrodinger;

impl Named for Schrodinger {
    fn name(&self) -> &str {
        "schrodinger"
    }
}

const NORM_SLACK: f64 = 1e-10;

impl Suite for Schrodinger {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let seed = cfg.seed()?;
        let xi = match &cfg.xi {
            None => 1.0,
            Some(s) => s.trim().parse::<f64>().map_err(|_| SuiteError::Usage("--xi takes one number here".into()))?,
        };
        let ps = cfg.p_list(&[1.5, 2.0, 4.0, 8.0])?;
        let ns = cfg.grid_nu.unwrap_or(256);
        let extent = cfg.extent.unwrap_or(16.0);
        let trials = cfg.trials.unwrap_or(32);
        let stability = cfg.tol.unwrap_or(0.10);
        if extent < 16.0 {
            return Err(SuiteError::Usage("--extent must be at least 16".into()));
        }

        let mut table = Table::new(&["operator", "xi", "p", "ns", "extent", "probe_norm", "seed"]);
        let mut pythagoras: f64 = 0.0;
        let mut norms: Vec<f64> = Vec::new();
        let mut probes: Vec<Vec<[f64; 2]>> = Vec::new();
        // Mesh refinement, then a longer half-line at the finer mesh.
        for (e, n) in [(extent, ns), (extent, 2 * ns), (2.0 * extent, 4 * ns)] {
            let grid = probe_grid(e, n, xi).map_err(|e| SuiteError::Usage(e.to_string()))?;
            let h = build_h(&grid);
            let (rd, rp) = riesz_operators(&grid, &h)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes = grid.nodes();
            for _ in 0..8 {
                pythagoras = pythagoras.max(pythagoras_residual(&rd, &rp, &probe_input(&mut rng, &nodes))?);
            }
            norms.push(rd.norm2());
            norms.push(rp.norm2());
            let mut row = Vec::new();
            for &p in &ps {
                let pair = [lp_norm_probe(&rd, &grid, p, trials, seed)?, lp_norm_probe(&rp, &grid, p, trials, seed)?];
                for (label, v) in ["R_derivative", "R_potential"].iter().zip(pair) {
                    table.push(vec![
                        label.to_string(),
                        num(xi),
                        num(p),
                        n.to_string(),
                        num(e),
                        num(v),
                        seed.to_string(),
                    ]);
                }
                row.push(pair);
            }
            probes.push(row);
        }
        let drift = probes
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).flat_map(|(a, b)| (0..2).map(move |i| (b[i] / a[i] - 1.0).abs())))
            .fold(0.0, f64::max);
        let norm_max = norms.iter().cloned().fold(0.0, f64::max);

        let mut metrics = Map::new();
        metric(&mut metrics, "pythagoras_residual", float(pythagoras));
        metric(&mut metrics, "l2_norm_max", float(norm_max));
        metric(&mut metrics, "refinement_drift", float(drift));
        let pass = pythagoras <= 1e-10 && norm_max <= 1.0 + NORM_SLACK && drift <= stability;
        Ok(SuiteOutput { table, pass, metrics })
    }
}
