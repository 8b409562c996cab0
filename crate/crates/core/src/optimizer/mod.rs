//! Max-min stability-gap power allocation.
//!
//! For a power allocation `p` the robust HC rate is the worst case over the blockage
//! states `(0,1)`, `(1,0)`, `(1,1)` of `B·log2(1+Γ_h)` evaluated at the half-power
//! fading values, and the LC rate is `B·log2(1+Γ_l)` on the unblocked direct path.
//! The stability gaps are
//!
//! ```text
//! δ_h = [(1−P_out,h)·(T/M)·R_h − α·Ā]/α,   δ_l = [(1−P_out,l)·(T/M)·R_l − (1−α)·Ā]/(1−α)
//! ```
//!
//! and the optimizer maximises `min(δ_h, δ_l)` over `p ≥ 0`, `Σp ≤ P_max`. Both gaps
//! subtract the same `Ā`, so the optimal `p` does not depend on the arrival rate.

mod check;
mod oracle;
mod sca;
mod subproblem;

pub use check::{oracle_check, random_config, OracleCase, GRID_TOL, ORACLE_GRID, TRACE_SLACK};
pub use oracle::{grid_oracle, grid_oracle_full_simplex, level_set_oracle};
pub use sca::{default_init, max_arrival_rate, sca_solve, sca_solve_traced, solve_zero_load, IterationRecord, ScaOptions};
pub use subproblem::{solve_subproblem, surrogate_sinr, update_mu, QuadTransformState};

use serde::{Deserialize, Serialize};

use crate::channel::{BlockageState, LinkBudget};
use crate::config::SystemConfig;
use crate::mcsc::{outage_probs, shannon_rate, OutageProbs, PowerAllocation, RateTargets};

/// Worst-case SINRs at the half-power fading point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustSinrBounds {
    /// `Γ_h` in the states `(0,1)`, `(1,0)`, `(1,1)`, in that order.
    pub hc: [f64; 3],
    /// `Γ_l` with only the direct path up.
    pub lc: f64,
}

impl RobustSinrBounds {
    pub fn new(p: &PowerAllocation, budget: &LinkBudget) -> Self {
        let h = budget.threshold_gain_d();
        let g = budget.threshold_gain_r();
        let s2 = budget.sigma_n2;
        let hc = BlockageState::HC_ROBUST.map(|beta| {
            let (h, g) = (beta.beta_d() * h, beta.beta_r() * g);
            (h * p.p_h_d + g * p.p_h_r) / (h * p.p_l_d + g * p.p_l_r + s2)
        });
        Self { hc, lc: h * p.p_l_d / s2 }
    }

    /// The binding HC bound.
    pub fn hc_min(&self) -> f64 {
        self.hc.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Robust HC rate, bit/s.
pub fn hc_service_rate(p: &PowerAllocation, budget: &LinkBudget) -> f64 {
    shannon_rate(budget.bandwidth, RobustSinrBounds::new(p, budget).hc_min())
}

/// LC rate on the unblocked direct path, bit/s.
pub fn lc_service_rate(p: &PowerAllocation, budget: &LinkBudget) -> f64 {
    shannon_rate(budget.bandwidth, RobustSinrBounds::new(p, budget).lc)
}

/// `(δ_h, δ_l)` in packets/slot. A class that receives no traffic (`α = 0` for HC,
/// `α = 1` for LC) gets an infinite gap.
pub fn stability_gaps(rates: &RateTargets, cfg: &SystemConfig, outage: &OutageProbs) -> (f64, f64) {
    let k = cfg.packets_per_bit_rate();
    let a = cfg.alpha;
    let d_h = if a > 0.0 {
        ((1.0 - outage.p_out_h) * k * rates.r_h - a * cfg.a_bar) / a
    } else {
        f64::INFINITY
    };
    let d_l = if a < 1.0 {
        ((1.0 - outage.p_out_l) * k * rates.r_l - (1.0 - a) * cfg.a_bar) / (1.0 - a)
    } else {
        f64::INFINITY
    };
    (d_h, d_l)
}

/// Everything the allocation problem needs, with the constants folded.
#[derive(Clone, Debug)]
pub struct Problem {
    /// `|h|²` and `|g|²` at the half-power fading point.
    pub h_th: f64,
    pub g_th: f64,
    pub sigma_n2: f64,
    pub bandwidth: f64,
    pub p_max: f64,
    pub alpha: f64,
    pub a_bar: f64,
    pub outage: OutageProbs,
    /// Served packets per slot per bit/s of rate, `(1−P_out)·T/M`, per class.
    pub k_h: f64,
    pub k_l: f64,
}

impl Problem {
    pub fn new(cfg: &SystemConfig, budget: &LinkBudget) -> Self {
        let outage = outage_probs(cfg, budget);
        let k = cfg.packets_per_bit_rate();
        Self {
            h_th: budget.threshold_gain_d(),
            g_th: budget.threshold_gain_r(),
            sigma_n2: budget.sigma_n2,
            bandwidth: budget.bandwidth,
            p_max: cfg.p_max,
            alpha: cfg.alpha,
            a_bar: cfg.a_bar,
            outage,
            k_h: (1.0 - outage.p_out_h) * k,
            k_l: (1.0 - outage.p_out_l) * k,
        }
    }

    /// `min(s_h/α, s_l/(1−α))` for served packet rates `s_h`, `s_l`; terms for
    /// classes without traffic are dropped.
    pub fn weighted_service(&self, s_h: f64, s_l: f64) -> f64 {
        let a = self.alpha;
        let h = if a > 0.0 { s_h / a } else { f64::INFINITY };
        let l = if a < 1.0 { s_l / (1.0 - a) } else { f64::INFINITY };
        h.min(l)
    }

    /// Weighted service level of the rate pair `(R_h, R_l)`, packets/slot.
    pub fn weighted_service_of_rates(&self, r_h: f64, r_l: f64) -> f64 {
        self.weighted_service(self.k_h * r_h, self.k_l * r_l)
    }

    pub fn rates(&self, p: &PowerAllocation) -> RateTargets {
        let b = self.sinr_bounds(p);
        RateTargets::from_sinr(self.bandwidth, b.hc_min(), b.lc)
    }

    pub fn sinr_bounds(&self, p: &PowerAllocation) -> RobustSinrBounds {
        let (h, g, s2) = (self.h_th, self.g_th, self.sigma_n2);
        let hc = [
            g * p.p_h_r / (g * p.p_l_r + s2),
            h * p.p_h_d / (h * p.p_l_d + s2),
            (h * p.p_h_d + g * p.p_h_r) / (h * p.p_l_d + g * p.p_l_r + s2),
        ];
        RobustSinrBounds { hc, lc: h * p.p_l_d / s2 }
    }

    pub fn gaps(&self, rates: &RateTargets) -> (f64, f64) {
        let a = self.alpha;
        let d_h = if a > 0.0 {
            (self.k_h * rates.r_h - a * self.a_bar) / a
        } else {
            f64::INFINITY
        };
        let d_l = if a < 1.0 {
            (self.k_l * rates.r_l - (1.0 - a) * self.a_bar) / (1.0 - a)
        } else {
            f64::INFINITY
        };
        (d_h, d_l)
    }

    /// Objective `min(δ_h, δ_l)` at `p`, with the robust rates.
    pub fn evaluate(&self, p: &PowerAllocation) -> (f64, RateTargets) {
        let rates = self.rates(p);
        (self.weighted_service_of_rates(rates.r_h, rates.r_l) - self.a_bar, rates)
    }

    pub fn result(&self, p: PowerAllocation, iterations: usize, converged: bool, objective_trace: Vec<f64>) -> SolveResult {
        let (objective, rates) = self.evaluate(&p);
        let (delta_h, delta_l) = self.gaps(&rates);
        SolveResult {
            p,
            rates,
            delta_h,
            delta_l,
            objective,
            iterations,
            converged,
            objective_trace,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub p: PowerAllocation,
    pub rates: RateTargets,
    /// Stability gaps, packets/slot; infinite for a class without traffic.
    pub delta_h: f64,
    pub delta_l: f64,
    /// `min(δ_h, δ_l)`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each outer iteration, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

impl SolveResult {
    /// Largest arrival rate this allocation stabilises, packets/slot.
    pub fn weighted_service(&self, a_bar: f64) -> f64 {
        self.objective + a_bar
    }
}
