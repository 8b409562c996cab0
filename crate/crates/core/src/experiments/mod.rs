//! Sweep drivers: feasibility region, the α optima, blockage and misalignment
//! sweeps, beamwidth adaptation under an HC outage target, the time-sharing
//! baseline and queueing-delay sweeps.
//!
//! Every driver evaluates its grid points as independent jobs on the rayon pool and
//! returns them in grid order.

mod baseline;
mod beam;
mod delay;
mod sweeps;

pub use baseline::{time_sharing_plan, time_sharing_point, TimeSharing};
pub use beam::{adapt_beamwidth, BeamAdaptation};
pub use delay::{delay_sweep, DelayPoint, DelaySweep, Scheme};
pub use sweeps::{blockage_sweep, feasibility_region, misalignment_sweep, strict_hc_sweep, StrictHcOptions};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{derive_link_budget, LinkBudget};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::mcsc::{outage_probs, PowerAllocation};
use crate::optimizer::solve_zero_load;
use crate::search::{scan_then_refine, Maximum};

/// Points of the coarse α pre-scan.
pub const ALPHA_SCAN_POINTS: usize = 21;
/// Points of the fallback α grid when the pre-scan is not unimodal.
pub const ALPHA_FINE_POINTS: usize = 1001;
pub const ALPHA_TOL: f64 = 1e-3;

/// Maximum sustainable load of one scheme at one `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub alpha: f64,
    /// `Ā_max`, packets/slot.
    pub a_max: f64,
    /// `Ā_max·M/(T·B)`, bit/s/Hz.
    pub throughput_total: f64,
    /// `α·throughput_total`.
    pub throughput_hc: f64,
    pub p_out_h: f64,
    pub p_out_l: f64,
    /// Target rates, bit/s.
    pub r_h: f64,
    pub r_l: f64,
    /// Powers; for time sharing, the powers of the respective phases.
    pub p: PowerAllocation,
}

impl OperatingPoint {
    pub fn new(cfg: &SystemConfig, budget: &LinkBudget, alpha: f64, a_max: f64, r_h: f64, r_l: f64, p: PowerAllocation) -> Self {
        let o = outage_probs(cfg, budget);
        let throughput_total = a_max * cfg.spectral_efficiency_per_packet();
        Self {
            alpha,
            a_max,
            throughput_total,
            throughput_hc: alpha * throughput_total,
            p_out_h: o.p_out_h,
            p_out_l: o.p_out_l,
            r_h,
            r_l,
            p,
        }
    }
}

/// MC-SC operating point at `α`.
pub fn operating_point(cfg: &SystemConfig, budget: &LinkBudget, alpha: f64) -> Result<OperatingPoint> {
    let s = solve_zero_load(cfg, budget, alpha)?;
    Ok(OperatingPoint::new(cfg, budget, alpha, s.objective, s.rates.r_h, s.rates.r_l, s.p))
}

/// Result of a one-dimensional α search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaOptimum {
    pub alpha: f64,
    /// Value of the searched criterion at `alpha`.
    pub value: f64,
    pub evaluations: usize,
}

impl From<Maximum<f64>> for AlphaOptimum {
    fn from(m: Maximum<f64>) -> Self {
        Self { alpha: m.x, value: m.score, evaluations: m.evaluations }
    }
}

/// Golden-section search for the maximiser of `f` on `[lo, hi]` after a 21-point
/// pre-scan, falling back to a 1001-point grid when the pre-scan is not unimodal.
/// Ties resolve to the smallest `α`.
pub fn argmax_alpha<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64) -> AlphaOptimum {
    scan_then_refine(f, lo, hi, ALPHA_SCAN_POINTS, ALPHA_FINE_POINTS, ALPHA_TOL).into()
}

/// Unwraps `r`, keeping the first error and returning NaN in its place so a search
/// can finish before the error is reported.
fn record_error(slot: &mut Option<crate::Error>, r: Result<f64>) -> f64 {
    r.unwrap_or_else(|e| {
        slot.get_or_insert(e);
        f64::NAN
    })
}

/// `α` maximising the total sustainable load `Ā_max(α)`.
pub fn alpha_sum_star(cfg: &SystemConfig) -> Result<AlphaOptimum> {
    let budget = derive_link_budget(cfg)?;
    let mut err = None;
    let m = argmax_alpha(|a| record_error(&mut err, solve_zero_load(cfg, &budget, a).map(|s| s.objective)), 0.0, 1.0);
    err.map_or(Ok(m), Err)
}

/// Tradeoff criterion `A(α)/A(α_sum) + α·A(α)/A(1)`.
pub fn tradeoff_criterion(a_alpha: f64, alpha: f64, a_sum: f64, a_one: f64) -> f64 {
    a_alpha / a_sum + alpha * a_alpha / a_one
}

/// `α` in `[α_sum*, 1]` maximising [`tradeoff_criterion`].
pub fn alpha_tradeoff_star(cfg: &SystemConfig, alpha_sum: &AlphaOptimum) -> Result<AlphaOptimum> {
    let budget = derive_link_budget(cfg)?;
    let a_one = solve_zero_load(cfg, &budget, 1.0)?.objective;
    let a_sum = alpha_sum.value;
    let mut err = None;
    let m = argmax_alpha(
        |a| {
            let v = solve_zero_load(cfg, &budget, a).map(|s| tradeoff_criterion(s.objective, a, a_sum, a_one));
            record_error(&mut err, v)
        },
        alpha_sum.alpha,
        1.0,
    );
    err.map_or(Ok(m), Err)
}

/// Hex SHA-256 of the canonical `key = value` form of a configuration.
pub fn config_hash(cfg: &SystemConfig) -> String {
    let digest = Sha256::digest(cfg.to_kv_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub seed: Option<u64>,
    pub config_hash: String,
    pub version: String,
}

impl SweepMetadata {
    pub fn new(cfg: &SystemConfig, seed: Option<u64>) -> Self {
        Self {
            seed,
            config_hash: config_hash(cfg),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// One evaluated case at one grid value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    /// Which evaluation this is, e.g. `alpha_0`, `alpha_t`, `time_sharing`.
    pub case: String,
    /// `None` when the case is infeasible at this grid value.
    pub point: Option<OperatingPoint>,
    pub note: Option<String>,
    /// Reflected-beam radius and gain in effect, for sweeps that adapt them.
    pub w_r: Option<f64>,
    pub g_r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: String,
    pub grid: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Rows of one case, in grid order.
    pub fn case(&self, case: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.case == case).collect()
    }
}

/// `start:step:end` inclusive grid; the end point is kept when it lies within
/// rounding of the last step.
pub fn range_grid(start: f64, step: f64, end: f64) -> Vec<f64> {
    assert!(step > 0.0 && end >= start);
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).map(|x| (x * 1e12).round() / 1e12).collect()
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(crate::Error::Config(format!("{name} grid must be non-empty and strictly increasing")));
    }
    Ok(())
}
