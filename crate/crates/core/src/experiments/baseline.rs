//! Time-sharing baseline: HC and LC are sent in disjoint fractions of each slot.
//!
//! In the HC phase the whole power budget is split between the direct and RIS paths
//! to maximise the worst-case HC SINR; in the LC phase the whole budget goes to the
//! direct path. The HC fraction `λ` equalises `s_h/α` and `s_l/(1−α)`, which gives
//!
//! ```text
//! λ = α·s_l / ((1−α)·s_h + α·s_l),    Ā_max = s_h·s_l / ((1−α)·s_h + α·s_l)
//! ```
//!
//! with `s_h`, `s_l` the packets per slot each class would get with the full slot.

use serde::{Deserialize, Serialize};

use super::OperatingPoint;
use crate::channel::LinkBudget;
use crate::config::SystemConfig;
use crate::mcsc::{PowerAllocation, RateTargets};
use crate::optimizer::Problem;
use crate::queueing::TransmissionPlan;
use crate::search::golden_section_max;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSharing {
    pub point: OperatingPoint,
    pub lambda: f64,
    /// Full-slot service rates `s_h`, `s_l`, packets/slot.
    pub s_h: f64,
    pub s_l: f64,
    pub p_hc: PowerAllocation,
    pub p_lc: PowerAllocation,
    pub rates: RateTargets,
}

pub fn time_sharing_point(cfg: &SystemConfig, budget: &LinkBudget, alpha: f64) -> TimeSharing {
    let prob = Problem::new(&cfg.with_alpha(alpha), budget);
    let p_max = cfg.p_max;
    let hc_phase = |share_d: f64| PowerAllocation::new(share_d * p_max, (1.0 - share_d) * p_max, 0.0, 0.0);
    let best = golden_section_max(|s| prob.sinr_bounds(&hc_phase(s)).hc_min(), 0.0, 1.0, 1e-12);
    let p_hc = hc_phase(best.x);
    let p_lc = PowerAllocation::new(0.0, 0.0, p_max, 0.0);
    let rates = RateTargets::from_sinr(budget.bandwidth, best.score, prob.sinr_bounds(&p_lc).lc);

    let s_h = prob.k_h * rates.r_h;
    let s_l = prob.k_l * rates.r_l;
    let denom = (1.0 - alpha) * s_h + alpha * s_l;
    let (lambda, a_max) = if alpha <= 0.0 {
        (0.0, s_l)
    } else if alpha >= 1.0 {
        (1.0, s_h)
    } else if denom > 0.0 {
        (alpha * s_l / denom, s_h * s_l / denom)
    } else {
        (alpha, 0.0)
    };
    let p = PowerAllocation::new(p_hc.p_h_d, p_hc.p_h_r, p_max, 0.0);
    TimeSharing {
        point: OperatingPoint::new(cfg, budget, alpha, a_max, rates.r_h, rates.r_l, p),
        lambda,
        s_h,
        s_l,
        p_hc,
        p_lc,
        rates,
    }
}

pub fn time_sharing_plan(ts: &TimeSharing) -> TransmissionPlan {
    TransmissionPlan::TimeSharing {
        p_hc: ts.p_hc,
        p_lc: ts.p_lc,
        rates: ts.rates,
        lambda: ts.lambda,
    }
}
