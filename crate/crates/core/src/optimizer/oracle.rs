//! Reference solutions for testing the SCA solver.
//!
//! [`grid_oracle`] enumerates a barycentric grid of the simplex and evaluates the
//! original objective. [`level_set_oracle`] is exact up to bisection accuracy: every
//! constraint `Γ ≥ γ` is a half-plane in `p`, so the set of allocations reaching a
//! service level `w` is a convex polygon, and the optimum is the largest `w` for
//! which that polygon is non-empty.

use rayon::prelude::*;

use super::{Problem, SolveResult};
use crate::channel::LinkBudget;
use crate::config::SystemConfig;
use crate::mcsc::PowerAllocation;

type Score = (f64, f64);

/// Deterministic "better" with index tie-break: higher objective, then higher
/// `R_h`, then lower grid index.
fn better(a: &(Score, usize), b: &(Score, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn score(prob: &Problem, p: &PowerAllocation) -> Score {
    let (obj, rates) = prob.evaluate(p);
    (obj, rates.r_h)
}

/// Exhaustive search over `{p ≥ 0, Σp = P_max, p_l_r = 0}` on an `n × n`
/// barycentric grid.
pub fn grid_oracle(cfg: &SystemConfig, budget: &LinkBudget, n: usize) -> SolveResult {
    assert!(n >= 1);
    let prob = Problem::new(cfg, budget);
    let nf = n as f64;
    let at = |i: usize, j: usize| PowerAllocation::from_shares(prob.p_max, i as f64 / nf, j as f64 / nf);
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row_best: Option<(Score, usize)> = None;
            for j in 0..=(n - i) {
                let cand = (score(&prob, &at(i, j)), i * (n + 1) + j);
                if row_best.as_ref().is_none_or(|b| better(&cand, b)) {
                    row_best = Some(cand);
                }
            }
            row_best.expect("non-empty row")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("non-empty grid");
    let (i, j) = (best.1 / (n + 1), best.1 % (n + 1));
    let points = (n + 1) * (n + 2) / 2;
    let r = prob.result(at(i, j), points, true, Vec::new());
    SolveResult {
        objective_trace: vec![r.objective],
        ..r
    }
}

/// Exhaustive search over the full 3-simplex `{p ≥ 0, Σp = P_max}`, including
/// `p_l_r`, with step `P_max/n`.
pub fn grid_oracle_full_simplex(cfg: &SystemConfig, budget: &LinkBudget, n: usize) -> SolveResult {
    assert!(n >= 1);
    let prob = Problem::new(cfg, budget);
    let nf = n as f64;
    let at = |i: usize, j: usize, k: usize| {
        let l = n - i - j - k;
        let s = prob.p_max / nf;
        PowerAllocation::new(i as f64 * s, j as f64 * s, k as f64 * s, l as f64 * s)
    };
    let idx = |i: usize, j: usize, k: usize| (i * (n + 1) + j) * (n + 1) + k;
    let best = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut row_best: Option<(Score, usize)> = None;
            for j in 0..=(n - i) {
                for k in 0..=(n - i - j) {
                    let cand = (score(&prob, &at(i, j, k)), idx(i, j, k));
                    if row_best.as_ref().is_none_or(|b| better(&cand, b)) {
                        row_best = Some(cand);
                    }
                }
            }
            row_best.expect("non-empty row")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("non-empty grid");
    let k = best.1 % (n + 1);
    let j = (best.1 / (n + 1)) % (n + 1);
    let i = best.1 / ((n + 1) * (n + 1));
    let r = prob.result(at(i, j, k), 0, true, Vec::new());
    SolveResult {
        objective_trace: vec![r.objective],
        ..r
    }
}

type Point = (f64, f64);

/// Keeps the part of a convex polygon where `a·u + b·v + c ≥ 0`.
fn clip(poly: &[Point], (a, b, c): (f64, f64, f64)) -> Vec<Point> {
    let side = |p: &Point| a * p.0 + b * p.1 + c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let cur = poly[k];
        let next = poly[(k + 1) % poly.len()];
        let (sc, sn) = (side(&cur), side(&next));
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push((cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1)));
        }
    }
    out
}

/// Minimum SINR needed for class weight `weight`, rate-to-service factor `k` and
/// level `w`: `2^{weight·w/(k·B)} − 1`.
fn required_sinr(weight: f64, w: f64, k: f64, bandwidth: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    (std::f64::consts::LN_2 * weight * w / (k * bandwidth)).exp_m1()
}

/// Allocations (as shares `u = p_h_d/P`, `v = p_h_r/P`) reaching service level `w`.
fn level_set(prob: &Problem, w: f64) -> Vec<Point> {
    let h = prob.h_th * prob.p_max / prob.sigma_n2;
    let g = prob.g_th * prob.p_max / prob.sigma_n2;
    let mut poly = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    let a = prob.alpha;
    if a > 0.0 {
        let gh = required_sinr(a, w, prob.k_h, prob.bandwidth);
        // interference-plus-noise on the direct path: h·(1−u−v) + 1
        poly = clip(&poly, (0.0, g, -gh));
        poly = clip(&poly, (h + gh * h, gh * h, -gh * (h + 1.0)));
        poly = clip(&poly, (h + gh * h, g + gh * h, -gh * (h + 1.0)));
    }
    if a < 1.0 && !poly.is_empty() {
        let gl = required_sinr(1.0 - a, w, prob.k_l, prob.bandwidth);
        poly = clip(&poly, (-h, -h, h - gl));
    }
    poly
}

/// Exact optimum of the allocation problem on the simplex with `p_l_r = 0`, by
/// bisection on the service level. Returns the centroid of the final level set.
pub fn level_set_oracle(cfg: &SystemConfig, budget: &LinkBudget) -> SolveResult {
    let prob = Problem::new(cfg, budget);
    let h = prob.h_th * prob.p_max / prob.sigma_n2;
    let g = prob.g_th * prob.p_max / prob.sigma_n2;
    let log2_1p = |x: f64| x.ln_1p() / std::f64::consts::LN_2;
    let mut hi = f64::INFINITY;
    if prob.alpha > 0.0 {
        hi = hi.min(prob.k_h * prob.bandwidth * log2_1p(h + g) / prob.alpha);
    }
    if prob.alpha < 1.0 {
        hi = hi.min(prob.k_l * prob.bandwidth * log2_1p(h) / (1.0 - prob.alpha));
    }
    let mut lo = 0.0;
    let mut best = level_set(&prob, lo);
    if hi > 0.0 && !level_set(&prob, hi).is_empty() {
        lo = hi;
        best = level_set(&prob, hi);
    }
    let mut iterations = 0;
    while hi - lo > 1e-15 * hi && iterations < 300 {
        let mid = 0.5 * (lo + hi);
        let poly = level_set(&prob, mid);
        if poly.is_empty() {
            hi = mid;
        } else {
            lo = mid;
            best = poly;
        }
        iterations += 1;
    }
    let n = best.len() as f64;
    let (u, v) = best.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0 / n, s.1 + p.1 / n));
    let p = PowerAllocation::from_shares(prob.p_max, u, v);
    let r = prob.result(p, iterations, true, Vec::new());
    SolveResult {
        objective_trace: vec![r.objective],
        ..r
    }
}
