use axb_riesz::haar_model::basis::{fit_envelope_constant, haar_coefficients, kappa_tail, reconstruction_l1_error, envelope_ratio};
use axb_riesz::haar_model::{empirical_constant, finite_sum_trial, haar_pairing, key_trials, test_profiles, DyadicFamily};
use axb_riesz::registry::Named;
use axb_riesz::report::{num, Table};
use serde_json::Map;

use super::{float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Haar;

impl Named for Haar {
    fn name(&self) -> &str {
        "haar"
    }
}

const EPS: f64 = 0.5;
const FIT_LEVELS: i32 = 4;
const CHECK_LEVELS: i32 = 8;
const SCALES: usize = 10;
const PER_SCALE: usize = 20;

impl Suite for Haar {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let seed = cfg.seed()?;
        let trials = cfg.trials.unwrap_or(100).max(2) as u64;
        let stability = cfg.tol.unwrap_or(0.10);
        let mut metrics = Map::new();

        let unit = DyadicFamily::interval(3, -2);
        let self_pairing = haar_pairing(unit, unit);
        metric(&mut metrics, "self_pairing", float(self_pairing));
        let mut pass = self_pairing == 1.0;

        let profiles = test_profiles();
        let names = profiles.list();
        let fit_maps = names
            .iter()
            .map(|name| Ok(haar_coefficients(profiles.get(name)?, FIT_LEVELS)))
            .collect::<Result<Vec<_>, axb_riesz::Error>>()?;
        let c_eps = fit_envelope_constant(EPS, &fit_maps.iter().collect::<Vec<_>>());
        let family = DyadicFamily::new(EPS, c_eps)?;
        metric(&mut metrics, "c_eps", float(c_eps));
        let mut envelope = Map::new();
        let mut reconstruction = Map::new();
        for name in &names {
            let rho = profiles.get(name)?;
            let coeffs = haar_coefficients(rho, CHECK_LEVELS);
            let ratio = envelope_ratio(&family, &coeffs);
            pass &= ratio <= 1.0;
            envelope.insert(name.clone(), float(ratio));
            let err = reconstruction_l1_error(rho, &coeffs, CHECK_LEVELS, 8.0);
            let tail = kappa_tail(&family, CHECK_LEVELS);
            pass &= err <= tail;
            reconstruction.insert(name.clone(), serde_json::json!({ "l1_error": float(err), "kappa_tail": float(tail) }));
        }
        metric(&mut metrics, "envelope_ratio", envelope);
        metric(&mut metrics, "reconstruction", reconstruction);

        let runs = key_trials(seed..seed + trials, SCALES, PER_SCALE, 1.0)?;
        let mut table = Table::new(&["seed", "scales", "total_l1", "C_emp"]);
        for t in &runs {
            table.push(vec![t.seed.to_string(), t.scales.to_string(), num(t.total_l1), num(t.ratio)]);
        }
        let half = runs.len() / 2;
        let c_emp = empirical_constant(&runs);
        let (first, second) = (empirical_constant(&runs[..half]), empirical_constant(&runs[half..]));
        let drift = (first - second).abs() / first.max(second);
        pass &= drift <= stability;
        metric(&mut metrics, "C_emp", float(c_emp));
        metric(&mut metrics, "C_emp_halves", vec![float(first), float(second)]);
        metric(&mut metrics, "C_emp_drift", float(drift));

        let mut finite = Map::new();
        for count in [2usize, 4, 8] {
            let mut worst: f64 = 0.0;
            for s in 0..trials {
                let t = finite_sum_trial(seed.wrapping_add(s), count)?;
                pass &= t.holds();
                worst = worst.max(t.sum_norm / (t.bound * t.norm_sum));
            }
            finite.insert(format!("N{count}"), float(worst));
        }
        metric(&mut metrics, "finite_sum_worst_fraction", finite);
        Ok(SuiteOutput { table, pass, metrics })
    }
}
