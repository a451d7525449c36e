use axb_riesz::group_geometry::GroupPoint;
use axb_riesz::registry::Named;
use axb_riesz::report::{linear_fit, num, Table};
use axb_riesz::riesz_kernels::{
    local_constant, local_main_term, remainder_integrability_check, riesz_kernel_with, sqrt_inv_kernel_at, KernelId,
    Variant,
};
use axb_riesz::special_kernels::phi_sources;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

use super::{dimension, float, metric, Suite, SuiteError, SuiteOutput};
use crate::config::RunConfig;

pub struct Kernels;

impl Named for Kernels {
    fn name(&self) -> &str {
        "kernels"
    }
}

const FD_STEP: f64 = 1e-5;

impl Suite for Kernels {
    fn run(&self, cfg: &RunConfig) -> Result<SuiteOutput, SuiteError> {
        let n = dimension(cfg, 1, 3)?;
        match cfg.variant.as_deref().unwrap_or("R") {
            "R" => identity_and_local(cfg, &n.map_or_else(|| vec![1, 2, 3], |n| vec![n])),
            "remainder" => remainder(cfg, &n.map_or_else(|| vec![1, 2], |n| vec![n])),
            other => Err(SuiteError::Usage(format!("kernels --variant must be R or remainder (got {other})"))),
        }
    }
}

/// Formula against a finite-difference `X_j`-derivative at random points, plus
/// the local remainder slopes.
fn identity_and_local(cfg: &RunConfig, ns: &[usize]) -> Result<SuiteOutput, SuiteError> {
    let seed = cfg.seed()?;
    let points = cfg.trials.unwrap_or(100);
    let tol = cfg.tol.unwrap_or(1e-3);
    let sources = phi_sources();
    let src = sources.get("direct")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["n", "j", "variant", "x1", "x2", "x3", "u", "value", "reference", "rel_error"]);
    let mut worst: f64 = 0.0;
    for &n in ns {
        if let Some(j) = cfg.j {
            if j == 0 || j > n {
                return Err(SuiteError::Usage(format!("j must lie in 1..={n} (got {j})")));
            }
        }
        for _ in 0..points {
            let j = cfg.j.unwrap_or_else(|| rng.gen_range(1..=n));
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if x[j - 1].abs() < 0.1 {
                x[j - 1] = 0.1f64.copysign(x[j - 1]);
            }
            let u = rng.gen_range(-2.0..2.0);
            let p = GroupPoint::new(x.clone(), u)?;
            let value = riesz_kernel_with(src, &KernelId::new(n, j, Variant::R)?, &p)?;
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[j - 1] += FD_STEP;
            minus[j - 1] -= FD_STEP;
            let reference = u.exp()
                * (sqrt_inv_kernel_at(src, &GroupPoint::new(plus, u)?)? - sqrt_inv_kernel_at(src, &GroupPoint::new(minus, u)?)?)
                / (2.0 * FD_STEP);
            let err = (value - reference).abs() / value.abs();
            worst = worst.max(err);
            let coord = |a: usize| x.get(a).map_or(String::new(), |v| num(*v));
            table.push(vec![
                n.to_string(),
                j.to_string(),
                "R".into(),
                coord(0),
                coord(1),
                coord(2),
                num(u),
                num(value),
                num(reference),
                num(err),
            ]);
        }
    }
    let mut metrics = Map::new();
    metric(&mut metrics, "fd_worst_rel_error", float(worst));
    metric(&mut metrics, "fd_tol", float(tol));
    let mut pass = worst <= tol;
    let mut slopes = Map::new();
    for &n in ns {
        for j in 0..=n {
            let slope = local_remainder_slope(n, j)?;
            pass &= slope >= -(n as f64) - 0.1;
            slopes.insert(format!("n{n}_j{j}"), float(slope));
        }
    }
    metric(&mut metrics, "local_remainder_slopes", slopes);
    Ok(SuiteOutput { table, pass, metrics })
}

/// Log-log slope of `|k_{R_j} + c K_j⁰|` over `R = 2^{−4} … 2^{−12}`.
pub fn local_remainder_slope(n: usize, j: usize) -> Result<f64, SuiteError> {
    let c = local_constant(n);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for m in 4..=12 {
        let r = 2f64.powi(-m);
        let x = vec![r * 0.6 / (n as f64).sqrt(); n];
        let p = GroupPoint::new(x, r * 0.8)?;
        let k = axb_riesz::riesz_kernels::riesz_kernel(&KernelId::new(n, j, Variant::R)?, &p)?;
        xs.push(r.ln());
        ys.push((k + c * local_main_term(n, j, &p)?).abs().ln());
    }
    Ok(linear_fit(&xs, &ys).slope)
}

/// Remainder integrals over `U ∈ {4, 8, 16, 32}` and their increment ratios.
fn remainder(cfg: &RunConfig, ns: &[usize]) -> Result<SuiteOutput, SuiteError> {
    let factor = cfg.tol.unwrap_or(1.5);
    let sources = phi_sources();
    let src = sources.get("tabulated")?;
    let mut table = Table::new(&["n", "j", "U", "integral", "increment", "increment_ratio"]);
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for &n in ns {
        let js: Vec<usize> = match cfg.j {
            Some(j) if j > n => return Err(SuiteError::Usage(format!("j must lie in 0..={n} (got {j})"))),
            Some(j) => vec![j],
            None => vec![0, 1],
        };
        for j in js {
            let vals: Vec<f64> =
                [4.0, 8.0, 16.0, 32.0].iter().map(|u| remainder_integrability_check(src, n, j, *u)).collect::<Result<_, _>>()?;
            let mut prev_inc: Option<f64> = None;
            for (i, u) in [4.0f64, 8.0, 16.0, 32.0].iter().enumerate() {
                let inc = (i > 0).then(|| (vals[i] - vals[i - 1]).abs());
                let ratio = match (prev_inc, inc) {
                    (Some(a), Some(b)) => Some(a / b),
                    _ => None,
                };
                if let Some(r) = ratio {
                    pass &= r >= factor;
                    worst = worst.min(r);
                }
                prev_inc = inc;
                table.push(vec![
                    n.to_string(),
                    j.to_string(),
                    num(*u),
                    num(vals[i]),
                    inc.map_or(String::new(), num),
                    ratio.map_or(String::new(), num),
                ]);
            }
        }
    }
    let mut metrics = Map::new();
    metric(&mut metrics, "min_increment_ratio", float(worst));
    metric(&mut metrics, "required_ratio", float(factor));
    Ok(SuiteOutput { table, pass, metrics })
}
