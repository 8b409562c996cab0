use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_grid, time_sharing_plan, time_sharing_point, SweepMetadata};
use crate::channel::derive_link_budget;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::optimizer::solve_zero_load;
use crate::queueing::{average_series, simulate_plan, stability_from_series, QueueSummary, TransmissionPlan};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Mcsc,
    TimeSharing,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Mcsc => "mcsc",
            Scheme::TimeSharing => "time_sharing",
        }
    }
}

/// Replication-averaged queue statistics at one `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint {
    pub alpha: f64,
    /// Analytic `Ā_max` of the scheme at this `α`.
    pub a_max: f64,
    pub tau_h: Option<f64>,
    pub tau_l: Option<f64>,
    pub tau: Option<f64>,
    pub peak_h: Option<f64>,
    pub peak_l: Option<f64>,
    /// Fraction of slots in which each class was decoded.
    pub decode_h: f64,
    pub decode_l: f64,
    pub slope_h: f64,
    pub slope_l: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySweep {
    pub scheme: Scheme,
    pub grid: Vec<f64>,
    pub points: Vec<DelayPoint>,
    pub n_slots: usize,
    pub reps: usize,
    /// Smallest `α` of the grid with an unstable verdict.
    pub instability_onset: Option<f64>,
    /// `α` with the smallest overall delay among stable points.
    pub delay_minimum: Option<f64>,
    pub metadata: SweepMetadata,
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = xs.collect();
    v.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Queue simulation at the fixed load `cfg.a_bar` for every `α` of the grid, with
/// `reps` independent replications of `n_slots` slots each. Replication `r` at
/// grid index `i` uses stream `job_index(i, r)` of `seed`.
pub fn delay_sweep(
    cfg: &SystemConfig,
    alpha_grid: &[f64],
    scheme: Scheme,
    n_slots: usize,
    reps: usize,
    seed: u64,
) -> Result<DelaySweep> {
    check_grid("alpha", alpha_grid)?;
    if reps == 0 {
        return Err(Error::Config("at least one replication is required".into()));
    }
    let budget = derive_link_budget(cfg)?;
    let points = alpha_grid
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let c = cfg.with_alpha(alpha);
            let (plan, a_max) = match scheme {
                Scheme::Mcsc => {
                    let s = solve_zero_load(&c, &budget, alpha)?;
                    (TransmissionPlan::from_solve(&s), s.objective)
                }
                Scheme::TimeSharing => {
                    let ts = time_sharing_point(&c, &budget, alpha);
                    (time_sharing_plan(&ts), ts.point.a_max)
                }
            };
            let runs: Vec<(QueueSummary, Vec<f64>, Vec<f64>)> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut g = rng::stream(seed, rng::job_index(i, r));
                    let t = simulate_plan(&c, &budget, &plan, n_slots, &mut g);
                    (t.summary(), t.q_h, t.q_l)
                })
                .collect();
            let q_h = average_series(runs.iter().map(|r| r.1.as_slice()));
            let q_l = average_series(runs.iter().map(|r| r.2.as_slice()));
            let v = stability_from_series(&q_h, &q_l, c.a_bar)?;
            let n = runs.len() as f64;
            Ok(DelayPoint {
                alpha,
                a_max,
                tau_h: mean_opt(runs.iter().map(|r| r.0.tau_h)),
                tau_l: mean_opt(runs.iter().map(|r| r.0.tau_l)),
                tau: mean_opt(runs.iter().map(|r| r.0.tau)),
                peak_h: mean_opt(runs.iter().map(|r| r.0.peak_h)),
                peak_l: mean_opt(runs.iter().map(|r| r.0.peak_l)),
                decode_h: runs.iter().map(|r| 1.0 - r.0.outage_h).sum::<f64>() / n,
                decode_l: runs.iter().map(|r| 1.0 - r.0.outage_l).sum::<f64>() / n,
                slope_h: v.slope_h,
                slope_l: v.slope_l,
                stable: v.stable(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let instability_onset = points.iter().find(|p| !p.stable).map(|p| p.alpha);
    let delay_minimum = points
        .iter()
        .filter(|p| p.stable)
        .filter_map(|p| p.tau.map(|t| (p.alpha, t)))
        .fold(None, |best: Option<(f64, f64)>, (a, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((a, t)),
        })
        .map(|(a, _)| a);
    Ok(DelaySweep {
        scheme,
        grid: alpha_grid.to_vec(),
        points,
        n_slots,
        reps,
        instability_onset,
        delay_minimum,
        metadata: SweepMetadata::new(cfg, Some(seed)),
    })
}
