use axb_riesz::multiplier_ops::sweep::{
    aligned_grid, dyadic_xi_magnitudes, opnorm_sweep, unit_directions, weight_on, worst_band_ratio, worst_ray_ratio,
    SweepRow, WeightFrame,
};
use axb_riesz::multiplier_ops::{
    build_multiplier_operator, scaling_covariance_check, weight_families, weighted_opnorm, MultiplierSpec, UGrid,
};
use axb_riesz::registry::Named;
use axb_riesz::report::{num, Table};
use serde_json::Map;

use super::{dimension, float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Opnorms;

impl Named for Opnorms {
    fn name(&self) -> &str {
        "opnorms"
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
}

impl Suite for Opnorms {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let n = dimension(cfg, 1, 3)?.unwrap_or(1);
        let variant = cfg.variant.clone().unwrap_or_else(|| "Kj".into());
        let j = match variant.as_str() {
            "Kj" => cfg.j.unwrap_or(1),
            "K0" | "K0_tilde" => cfg.j.unwrap_or(0),
            other => return Err(SuiteError::Usage(format!("opnorms --variant must be K0, Kj or K0_tilde (got {other})"))),
        };
        let nu = cfg.grid_nu.unwrap_or(800);
        let extent = cfg.extent.unwrap_or(40.0);
        if nu < 16 || !(extent > 2.0) {
            return Err(SuiteError::Usage("need --grid-nu ≥ 16 and --extent > 2".into()));
        }
        let half = 0.5 * extent;
        let spec = MultiplierSpec::new(&variant, n, j, &cfg.alpha(n)?).map_err(|e| SuiteError::Usage(e.to_string()))?;
        let band_max = cfg.tol.unwrap_or(2.0);

        let rows: Vec<SweepRow> = if cfg.xi_sweep {
            opnorm_sweep(&variant, n, j, &unit_directions(n), &dyadic_xi_magnitudes(), half, nu, WeightFrame::Aligned)?
        } else {
            let xi = cfg.xi(n)?;
            let grid = aligned_grid(&xi, half, nu)?;
            let op = build_multiplier_operator(&spec, &xi, grid)?;
            weight_families()
                .list()
                .into_iter()
                .map(|wname| {
                    let w = weight_on(&weight_families().get(&wname)?.kind(), &grid, WeightFrame::Aligned)?;
                    let norm = weighted_opnorm(&op, &w)?;
                    Ok(SweepRow { variant: variant.clone(), j, alpha: spec.alpha.clone(), weight: wname, direction: 0, xi: xi.clone(), norm })
                })
                .collect::<Result<_, axb_riesz::Error>>()?
        };

        let mut table = Table::new(&["variant", "n", "j", "alpha", "xi", "weight", "a2", "norm", "grid_nu", "grid_extent"]);
        for r in &rows {
            let grid = aligned_grid(&r.xi, half, nu)?;
            let w = weight_on(&weight_families().get(&r.weight)?.kind(), &grid, WeightFrame::Aligned)?;
            table.push(vec![
                r.variant.clone(),
                n.to_string(),
                r.j.to_string(),
                join(&r.alpha),
                r.xi.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"),
                r.weight.clone(),
                num(w.a2_estimate),
                num(r.norm),
                nu.to_string(),
                num(extent),
            ]);
        }
        // Across directions the band is only comparable in one dimension: for
        // n > 1 the symbol can vanish along whole rays.
        let band = if n == 1 { worst_band_ratio(&rows) } else { worst_ray_ratio(&rows) };
        let grid = UGrid::new(-half, half, nu)?;
        let shift = 20.0 * grid.spacing();
        let xi0 = if cfg.xi_sweep { unit_directions(n)[0].clone() } else { cfg.xi(n)? };
        let covariance = scaling_covariance_check(&spec, &xi0, shift, grid)?;

        let mut metrics = Map::new();
        metric(&mut metrics, "band_ratio", float(band));
        metric(&mut metrics, "band_max", float(band_max));
        metric(&mut metrics, "covariance_residual", float(covariance));
        if cfg.xi_sweep {
            let physical =
                opnorm_sweep(&variant, n, j, &unit_directions(n), &dyadic_xi_magnitudes(), half, nu, WeightFrame::Physical)?;
            let physical_band = if n == 1 { worst_band_ratio(&physical) } else { worst_ray_ratio(&physical) };
            metric(&mut metrics, "physical_frame_band_ratio", float(physical_band));
        }
        let pass = band <= band_max && covariance <= 1e-10;
        Ok(SuiteOutput { table, pass, metrics })
    }
}
