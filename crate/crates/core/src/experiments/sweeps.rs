use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    adapt_beamwidth, alpha_sum_star, alpha_tradeoff_star, check_grid, operating_point, time_sharing_point,
    SweepMetadata, SweepResult, SweepRow,
};
use crate::channel::derive_link_budget;
use crate::config::SystemConfig;
use crate::error::{Error, Result};

fn row(index: usize, value: f64, case: &str, point: Option<super::OperatingPoint>) -> SweepRow {
    SweepRow {
        index,
        value,
        case: case.to_string(),
        point,
        note: None,
        w_r: None,
        g_r: None,
    }
}

fn collect(parameter: &str, cfg: &SystemConfig, grid: &[f64], rows: Vec<Result<Vec<SweepRow>>>) -> Result<SweepResult> {
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    Ok(SweepResult {
        parameter: parameter.to_string(),
        grid: grid.to_vec(),
        rows,
        metadata: SweepMetadata::new(cfg, None),
    })
}

/// MC-SC and time-sharing operating points for every `α` of the grid.
pub fn feasibility_region(cfg: &SystemConfig, alpha_grid: &[f64]) -> Result<SweepResult> {
    check_grid("alpha", alpha_grid)?;
    let budget = derive_link_budget(cfg)?;
    let rows: Vec<Result<Vec<SweepRow>>> = alpha_grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mc = operating_point(cfg, &budget, a)?;
            let ts = time_sharing_point(cfg, &budget, a).point;
            Ok(vec![row(i, a, "mcsc", Some(mc)), row(i, a, "time_sharing", Some(ts))])
        })
        .collect();
    collect("alpha", cfg, alpha_grid, rows)
}

/// Operating points at `α = 0`, `α_T*` and `α = 1` for one configuration.
fn three_alpha_rows(cfg: &SystemConfig, index: usize, value: f64) -> Result<Vec<SweepRow>> {
    let budget = derive_link_budget(cfg)?;
    let a_sum = alpha_sum_star(cfg)?;
    let a_t = alpha_tradeoff_star(cfg, &a_sum)?;
    let mut rows = Vec::with_capacity(3);
    for (case, a) in [("alpha_0", 0.0), ("alpha_t", a_t.alpha), ("alpha_1", 1.0)] {
        rows.push(row(index, value, case, Some(operating_point(cfg, &budget, a)?)));
    }
    Ok(rows)
}

/// Sweep of the direct-path blockage probability.
pub fn blockage_sweep(cfg: &SystemConfig, q_d_grid: &[f64]) -> Result<SweepResult> {
    check_grid("q_d", q_d_grid)?;
    let rows = q_d_grid
        .par_iter()
        .enumerate()
        .map(|(i, &q)| {
            let mut c = cfg.clone();
            c.q_d = q;
            c.validate()?;
            three_alpha_rows(&c, i, q)
        })
        .collect();
    collect("q_d", cfg, q_d_grid, rows)
}

/// Sweep of the pointing-error scale with `σ_md = σ`, `σ_mr = 2σ`.
pub fn misalignment_sweep(cfg: &SystemConfig, sigma_grid: &[f64]) -> Result<SweepResult> {
    check_grid("sigma_m", sigma_grid)?;
    let rows = sigma_grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| three_alpha_rows(&cfg.with_misalignment(s), i, s))
        .collect();
    collect("sigma_m", cfg, sigma_grid, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictHcOptions {
    /// Smallest HC fraction the application requires.
    pub alpha_min: f64,
    /// HC outage probability held by adapting the reflected beam.
    pub target: f64,
}

impl Default for StrictHcOptions {
    fn default() -> Self {
        Self { alpha_min: 0.3, target: 0.05 }
    }
}

/// Misalignment sweep with the reflected beam adapted to hold `P_out,h` at the
/// target. Per point: time sharing at `α_min`, MC-SC at `max(α_min, α_sum*)` and
/// `α = 1`. Points where the target cannot be met are kept with no operating point.
pub fn strict_hc_sweep(cfg: &SystemConfig, sigma_grid: &[f64], opts: StrictHcOptions) -> Result<SweepResult> {
    check_grid("sigma_m", sigma_grid)?;
    let cases = ["time_sharing", "mcsc", "alpha_1"];
    let rows = sigma_grid
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut c = cfg.with_misalignment(s);
            let beam = match adapt_beamwidth(&c, opts.target) {
                Ok(b) => b,
                Err(Error::Infeasible(msg)) => {
                    return Ok(cases
                        .iter()
                        .map(|case| SweepRow {
                            note: Some(msg.clone()),
                            ..row(i, s, case, None)
                        })
                        .collect());
                }
                Err(e) => return Err(e),
            };
            c.w_r = beam.w_r;
            let budget = derive_link_budget(&c)?;
            let a_mc = opts.alpha_min.max(alpha_sum_star(&c)?.alpha);
            let points = [
                time_sharing_point(&c, &budget, opts.alpha_min).point,
                operating_point(&c, &budget, a_mc)?,
                operating_point(&c, &budget, 1.0)?,
            ];
            Ok(cases
                .iter()
                .zip(points)
                .map(|(case, p)| SweepRow {
                    w_r: Some(beam.w_r),
                    g_r: Some(beam.g_r),
                    ..row(i, s, case, Some(p))
                })
                .collect())
        })
        .collect();
    collect("sigma_m", cfg, sigma_grid, rows)
}
