//! Quadratic-transform surrogate and its maximisation for fixed auxiliaries.
//!
//! Each SINR constraint `γ ≤ S(p)/(I(p)+σ²)` is replaced by
//! `γ ≤ 2μ√S(p) − μ²(I(p)+σ²)`, which is concave in `p` and tight at
//! `μ* = √S/(I+σ²)`. For fixed `μ` the objective is then a concave function of `p`,
//! maximised over the simplex `Σp = P_max`, `p_l_r = 0` by nested golden-section
//! search (outer coordinate `p_h_d`, inner `p_h_r`).
//!
//! The rate map `log2(1+γ)` is continued linearly below `γ = 0` during the search.
//! The continuation is concave and strictly increasing, so it has the same maximiser
//! as the clamped rate wherever that maximiser is not flat, and it keeps a gradient
//! towards feasibility when every bound is negative.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{Problem, SolveResult};
use crate::channel::LinkBudget;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::mcsc::{PowerAllocation, RateTargets};
use crate::search::golden_section_max;

/// Golden-section tolerance in units of `P_max`.
const SHARE_TOL: f64 = 1e-12;

/// Auxiliary variables of the quadratic transform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadTransformState {
    /// `μ_h` for the blockage states `(0,1)`, `(1,0)`, `(1,1)`.
    pub mu_h: [f64; 3],
    pub mu_l: f64,
}

impl QuadTransformState {
    pub fn as_array(&self) -> [f64; 4] {
        [self.mu_h[0], self.mu_h[1], self.mu_h[2], self.mu_l]
    }
}

/// Signal and interference powers `(S, I)` of the three HC bounds and the LC bound.
fn signal_interference(prob: &Problem, p: &PowerAllocation) -> [(f64, f64); 4] {
    let (h, g) = (prob.h_th, prob.g_th);
    [
        (g * p.p_h_r, g * p.p_l_r),
        (h * p.p_h_d, h * p.p_l_d),
        (h * p.p_h_d + g * p.p_h_r, h * p.p_l_d + g * p.p_l_r),
        (h * p.p_l_d, 0.0),
    ]
}

impl Problem {
    /// Closed-form optimal auxiliaries at `p`.
    pub fn update_mu(&self, p: &PowerAllocation) -> QuadTransformState {
        let si = signal_interference(self, p);
        let mu = |(s, i): (f64, f64)| s.sqrt() / (i + self.sigma_n2);
        QuadTransformState {
            mu_h: [mu(si[0]), mu(si[1]), mu(si[2])],
            mu_l: mu(si[3]),
        }
    }

    /// Surrogate SINR bounds `2μ√S − μ²(I+σ²)`, unclamped.
    pub fn surrogate_sinr(&self, mu: &QuadTransformState, p: &PowerAllocation) -> ([f64; 3], f64) {
        let si = signal_interference(self, p);
        let m = mu.as_array();
        let b = |k: usize| 2.0 * m[k] * si[k].0.sqrt() - m[k] * m[k] * (si[k].1 + self.sigma_n2);
        ([b(0), b(1), b(2)], b(3))
    }

    /// Surrogate score `(weighted service, R_h)` with the linear continuation of the
    /// rate below zero SINR.
    fn surrogate_score(&self, mu: &QuadTransformState, p: &PowerAllocation) -> (f64, f64) {
        let (hc, lc) = self.surrogate_sinr(mu, p);
        let gamma_h = hc[0].min(hc[1]).min(hc[2]);
        let r_h = self.bandwidth * extended_log2_1p(gamma_h);
        let r_l = self.bandwidth * extended_log2_1p(lc);
        (self.weighted_service_of_rates(r_h, r_l), r_h)
    }

    /// Maximiser of the surrogate on the simplex and its score.
    pub(crate) fn maximize_surrogate(&self, mu: &QuadTransformState) -> (PowerAllocation, (f64, f64)) {
        let at = |x: f64, y: f64| PowerAllocation::from_shares(self.p_max, x, y);
        let inner = |x: f64| {
            let m = golden_section_max(|y| self.surrogate_score(mu, &at(x, y)), 0.0, 1.0 - x, SHARE_TOL);
            (m.score, m.x)
        };
        let outer = golden_section_max(|x| inner(x).0, 0.0, 1.0, SHARE_TOL);
        let (score, y) = inner(outer.x);
        (at(outer.x, y), score)
    }

    pub(crate) fn surrogate_score_at(&self, mu: &QuadTransformState, p: &PowerAllocation) -> (f64, f64) {
        self.surrogate_score(mu, p)
    }
}

/// `log2(1+γ)` for `γ ≥ 0`, continued with slope `1/ln 2` below zero.
fn extended_log2_1p(gamma: f64) -> f64 {
    if gamma >= 0.0 {
        gamma.ln_1p() / LN_2
    } else {
        gamma / LN_2
    }
}

pub fn update_mu(p: &PowerAllocation, cfg: &SystemConfig, budget: &LinkBudget) -> QuadTransformState {
    Problem::new(cfg, budget).update_mu(p)
}

pub fn surrogate_sinr(
    mu: &QuadTransformState,
    p: &PowerAllocation,
    cfg: &SystemConfig,
    budget: &LinkBudget,
) -> ([f64; 3], f64) {
    Problem::new(cfg, budget).surrogate_sinr(mu, p)
}

/// Maximises the fixed-`μ` surrogate. The returned rates and gaps are those of the
/// surrogate (negative bounds clamped to zero); `objective` is the surrogate objective.
pub fn solve_subproblem(mu: &QuadTransformState, cfg: &SystemConfig, budget: &LinkBudget) -> Result<SolveResult> {
    let prob = Problem::new(cfg, budget);
    let (p, _) = prob.maximize_surrogate(mu);
    let (hc, lc) = prob.surrogate_sinr(mu, &p);
    let gamma_h = hc[0].min(hc[1]).min(hc[2]).max(0.0);
    let gamma_l = lc.max(0.0);
    let rates = RateTargets::from_sinr(prob.bandwidth, gamma_h, gamma_l);
    let objective = prob.weighted_service_of_rates(rates.r_h, rates.r_l) - prob.a_bar;
    if objective.is_nan() {
        return Err(Error::NonConvergence {
            context: "surrogate maximisation",
            best: Box::new(p),
        });
    }
    let (delta_h, delta_l) = prob.gaps(&rates);
    Ok(SolveResult {
        p,
        rates,
        delta_h,
        delta_l,
        objective,
        iterations: 1,
        converged: true,
        objective_trace: vec![objective],
    })
}
