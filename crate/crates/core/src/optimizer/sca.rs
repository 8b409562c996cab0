//! Successive convex approximation: alternate the closed-form `μ` update with the
//! fixed-`μ` surrogate maximisation until the objective settles.

use serde::{Deserialize, Serialize};

use super::{Problem, QuadTransformState, SolveResult};
use crate::channel::LinkBudget;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::mcsc::PowerAllocation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaOptions {
    /// Stop when the objective changes by at most `tol` relative to the weighted
    /// service level `objective + Ā`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 200 }
    }
}

/// One line of the `--trace` output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub mu: QuadTransformState,
    pub p: PowerAllocation,
}

/// `(P_max/3, P_max/3, P_max/3, 0)`.
pub fn default_init(p_max: f64) -> PowerAllocation {
    let third = p_max / 3.0;
    PowerAllocation::new(third, third, third, 0.0)
}

pub fn sca_solve(
    cfg: &SystemConfig,
    budget: &LinkBudget,
    init: PowerAllocation,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    sca_solve_traced(cfg, budget, init, ScaOptions { tol, max_iter }, &mut |_| {})
}

pub fn sca_solve_traced(
    cfg: &SystemConfig,
    budget: &LinkBudget,
    init: PowerAllocation,
    opts: ScaOptions,
    on_iteration: &mut dyn FnMut(&IterationRecord),
) -> Result<SolveResult> {
    if !init.is_feasible(cfg.p_max) {
        return Err(Error::Config(format!(
            "initial allocation {init:?} violates the power budget {}",
            cfg.p_max
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("SCA tolerance must be positive, got {}", opts.tol)));
    }
    let prob = Problem::new(cfg, budget);
    let mut p = init;
    let (mut objective, _) = prob.evaluate(&p);
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iter {
        iterations = it;
        let mu = prob.update_mu(&p);
        let (candidate, score) = prob.maximize_surrogate(&mu);
        // keep the incumbent unless the surrogate strictly improves
        if score > prob.surrogate_score_at(&mu, &p) {
            p = candidate;
        }
        let (next, _) = prob.evaluate(&p);
        if next.is_nan() {
            return Err(Error::NonConvergence {
                context: "SCA outer loop",
                best: Box::new(p),
            });
        }
        trace.push(next);
        on_iteration(&IterationRecord {
            iteration: it,
            objective: next,
            mu,
            p,
        });
        let settled = (next - objective).abs() <= opts.tol * (next + prob.a_bar).abs();
        objective = next;
        if settled {
            converged = true;
            break;
        }
    }
    Ok(prob.result(p, iterations, converged, trace))
}

/// SCA run at zero load: `objective` is then the weighted service level, i.e. the
/// largest arrival rate both queues can sustain at the given `α`.
pub fn solve_zero_load(cfg: &SystemConfig, budget: &LinkBudget, alpha: f64) -> Result<SolveResult> {
    let mut c = cfg.with_alpha(alpha);
    c.a_bar = 0.0;
    let o = ScaOptions::default();
    sca_solve(&c, budget, default_init(c.p_max), o.tol, o.max_iter)
}

/// `Ā_max(α)`, packets/slot.
pub fn max_arrival_rate(cfg: &SystemConfig, budget: &LinkBudget, alpha: f64) -> Result<f64> {
    Ok(solve_zero_load(cfg, budget, alpha)?.objective)
}
