//! Randomised comparison of the SCA solver against the grid and exact oracles.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_init, grid_oracle, level_set_oracle, sca_solve, ScaOptions};
use crate::channel::derive_link_budget;
use crate::config::{dbm_to_watts, SystemConfig};
use crate::error::Result;
use crate::rng;

/// Grid points per axis of the reference search.
pub const ORACLE_GRID: usize = 500;
/// `|SCA − grid| ≤ GRID_TOL·(1 + |grid|)`.
pub const GRID_TOL: f64 = 1e-3;
/// Allowed decrease between consecutive SCA objectives.
pub const TRACE_SLACK: f64 = 1e-8;

/// Defaults perturbed within ranges where every quantity stays physical.
pub fn random_config<R: Rng + ?Sized>(rng: &mut R) -> SystemConfig {
    let sigma = rng.random_range(0.02..0.15);
    SystemConfig {
        p_max: dbm_to_watts(rng.random_range(0.0..20.0)),
        d_bu: rng.random_range(8.0..25.0),
        d_br: rng.random_range(8.0..25.0),
        d_ru: rng.random_range(2.0..10.0),
        q_d: rng.random_range(0.0..0.6),
        q_r: rng.random_range(0.0..0.6),
        w_r: rng.random_range(0.3..1.5),
        alpha: rng.random_range(0.0..=1.0),
        a_bar: rng.random_range(0.0..1000.0),
        ..SystemConfig::default().with_misalignment(sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub index: usize,
    pub config: SystemConfig,
    pub sca: f64,
    pub grid: f64,
    /// Level-set optimum.
    pub exact: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest decrease between consecutive SCA objectives (0 when monotone).
    pub max_trace_drop: f64,
}

impl OracleCase {
    pub fn grid_ok(&self) -> bool {
        (self.sca - self.grid).abs() <= GRID_TOL * (1.0 + self.grid.abs())
    }

    pub fn trace_ok(&self) -> bool {
        self.max_trace_drop <= TRACE_SLACK
    }

    pub fn passed(&self) -> bool {
        self.converged && self.grid_ok() && self.trace_ok()
    }
}

/// Runs `n` random configurations; case `i` is drawn from stream `i` of `seed`.
pub fn oracle_check(n: usize, seed: u64) -> Result<Vec<OracleCase>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let cfg = random_config(&mut rng::stream(seed, i as u64));
            let budget = derive_link_budget(&cfg)?;
            let o = ScaOptions::default();
            let s = sca_solve(&cfg, &budget, default_init(cfg.p_max), o.tol, o.max_iter)?;
            let grid = grid_oracle(&cfg, &budget, ORACLE_GRID);
            let exact = level_set_oracle(&cfg, &budget);
            let max_trace_drop = s.objective_trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            Ok(OracleCase {
                index: i,
                config: cfg,
                sca: s.objective,
                grid: grid.objective,
                exact: exact.objective,
                iterations: s.iterations,
                converged: s.converged,
                max_trace_drop,
            })
        })
        .collect()
}
