//! Slot-level simulation of the HC and LC buffers.
//!
//! Each slot serves the backlog left from the previous slot, then adds the new
//! arrivals:
//!
//! ```text
//! Q_h(t) = [Q_h(t−1) − ξ_h·(T/M)·R_h]⁺ + α·A(t)
//! Q_l(t) = [Q_l(t−1) − ξ_l·(T/M)·R_l]⁺ + (1−α)·A(t)
//! ```
//!
//! Delays follow Little's law from the backlog that remains after service,
//! `[Q(t−1) − ξ·(T/M)·R]⁺`, i.e. the packets that actually wait for a later slot.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{sample_blockage, sample_pointing_error, BlockageState, LinkBudget, PointingError};
use crate::config::{ArrivalSplit, SystemConfig};
use crate::error::{Error, Result};
use crate::mcsc::{decode, PowerAllocation, RateTargets};
use crate::optimizer::SolveResult;
use crate::rng::{self, SimRng};

/// Fraction of the trace discarded before averaging.
pub const WARMUP_FRACTION: f64 = 0.1;
/// Shortest trace for which [`stability_diagnostic`] gives a verdict.
pub const MIN_DIAGNOSTIC_SLOTS: usize = 100;
/// Number of windows the second half of a trace is cut into for the slope fit.
const DIAGNOSTIC_WINDOWS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub q_h: f64,
    pub q_l: f64,
}

/// Queue update with separate arrivals and per-slot service amounts (packets).
/// Returns the new state and the post-service backlog.
pub fn step_split(
    state: &QueueState,
    arrivals: (f64, f64),
    xi: (bool, bool),
    service: (f64, f64),
) -> (QueueState, QueueState) {
    let served = |q: f64, ok: bool, s: f64| if ok { (q - s).max(0.0) } else { q };
    let backlog = QueueState {
        q_h: served(state.q_h, xi.0, service.0),
        q_l: served(state.q_l, xi.1, service.1),
    };
    let next = QueueState {
        q_h: backlog.q_h + arrivals.0,
        q_l: backlog.q_l + arrivals.1,
    };
    (next, backlog)
}

/// One slot of the recursion with fluid arrivals `α·A(t)`, `(1−α)·A(t)` and service
/// `(T/M)·R`.
pub fn step(state: &QueueState, arrivals: f64, xi: (bool, bool), rates: &RateTargets, cfg: &SystemConfig) -> QueueState {
    let k = cfg.packets_per_bit_rate();
    step_split(
        state,
        (cfg.alpha * arrivals, (1.0 - cfg.alpha) * arrivals),
        xi,
        (k * rates.r_h, k * rates.r_l),
    )
    .0
}

/// How the BS transmits in every slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum TransmissionPlan {
    /// Both messages superimposed for the whole slot.
    Superposition { p: PowerAllocation, rates: RateTargets },
    /// HC alone for a fraction `lambda` of the slot with `p_hc`, then LC alone with
    /// `p_lc`.
    TimeSharing {
        p_hc: PowerAllocation,
        p_lc: PowerAllocation,
        rates: RateTargets,
        lambda: f64,
    },
}

impl TransmissionPlan {
    pub fn from_solve(solve: &SolveResult) -> Self {
        TransmissionPlan::Superposition {
            p: solve.p,
            rates: solve.rates,
        }
    }

    /// Service per successful slot, packets, for each class.
    pub fn service(&self, cfg: &SystemConfig) -> (f64, f64) {
        let k = cfg.packets_per_bit_rate();
        match self {
            TransmissionPlan::Superposition { rates, .. } => (k * rates.r_h, k * rates.r_l),
            TransmissionPlan::TimeSharing { rates, lambda, .. } => {
                (lambda * k * rates.r_h, (1.0 - lambda) * k * rates.r_l)
            }
        }
    }

    fn decode(&self, budget: &LinkBudget, beta: BlockageState, eps: &PointingError) -> (bool, bool) {
        match self {
            TransmissionPlan::Superposition { p, rates } => decode(budget, beta, eps, p, rates),
            TransmissionPlan::TimeSharing { p_hc, p_lc, rates, lambda } => {
                let xi_h = *lambda > 0.0 && decode(budget, beta, eps, p_hc, &RateTargets::new(rates.r_h, 0.0)).0;
                let xi_l = *lambda < 1.0 && decode(budget, beta, eps, p_lc, &RateTargets::new(0.0, rates.r_l)).1;
                (xi_h, xi_l)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueTrace {
    pub alpha: f64,
    pub a_bar: f64,
    pub arrivals: Vec<f64>,
    /// `Q(t)` after the arrivals of slot `t`.
    pub q_h: Vec<f64>,
    pub q_l: Vec<f64>,
    /// Backlog left after the service of slot `t`, before its arrivals.
    pub backlog_h: Vec<f64>,
    pub backlog_l: Vec<f64>,
    pub xi_h: Vec<bool>,
    pub xi_l: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueSummary {
    pub slots: usize,
    pub warmup: usize,
    pub mean_q_h: f64,
    pub mean_q_l: f64,
    pub mean_backlog_h: f64,
    pub mean_backlog_l: f64,
    /// Little's-law delays in slots; `None` for a class without traffic.
    pub tau_h: Option<f64>,
    pub tau_l: Option<f64>,
    /// Delay over both classes, `(mean backlog_h + mean backlog_l)/Ā`.
    pub tau: Option<f64>,
    /// `max_t Q_h(t)/(α·Ā)` and `max_t Q_l(t)/((1−α)·Ā)` over the full trace.
    pub peak_h: Option<f64>,
    pub peak_l: Option<f64>,
    /// Fraction of slots in which the class was not decoded.
    pub outage_h: f64,
    pub outage_l: f64,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

impl QueueTrace {
    pub fn len(&self) -> usize {
        self.q_h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_h.is_empty()
    }

    pub fn warmup(&self) -> usize {
        (self.len() as f64 * WARMUP_FRACTION).floor() as usize
    }

    pub fn summary(&self) -> QueueSummary {
        let w = self.warmup();
        let (rate_h, rate_l) = (self.alpha * self.a_bar, (1.0 - self.alpha) * self.a_bar);
        let mean_backlog_h = mean(&self.backlog_h[w..]);
        let mean_backlog_l = mean(&self.backlog_l[w..]);
        let max = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
        let frac_fail = |xs: &[bool]| {
            let tail = &xs[w..];
            if tail.is_empty() {
                0.0
            } else {
                tail.iter().filter(|x| !**x).count() as f64 / tail.len() as f64
            }
        };
        QueueSummary {
            slots: self.len(),
            warmup: w,
            mean_q_h: mean(&self.q_h[w..]),
            mean_q_l: mean(&self.q_l[w..]),
            mean_backlog_h,
            mean_backlog_l,
            tau_h: ratio(mean_backlog_h, rate_h),
            tau_l: ratio(mean_backlog_l, rate_l),
            tau: ratio(mean_backlog_h + mean_backlog_l, self.a_bar),
            peak_h: ratio(max(&self.q_h), rate_h),
            peak_l: ratio(max(&self.q_l), rate_l),
            outage_h: frac_fail(&self.xi_h),
            outage_l: frac_fail(&self.xi_l),
        }
    }
}

fn sample_arrivals(a_bar: f64, rng: &mut SimRng) -> f64 {
    if a_bar > 0.0 {
        Poisson::new(a_bar).expect("positive Poisson mean").sample(rng)
    } else {
        0.0
    }
}

fn split_arrivals(cfg: &SystemConfig, a: f64, rng: &mut SimRng) -> (f64, f64) {
    match cfg.arrival_split {
        ArrivalSplit::Fluid => (cfg.alpha * a, (1.0 - cfg.alpha) * a),
        ArrivalSplit::Binomial => {
            let n = a as u64;
            let h = Binomial::new(n, cfg.alpha).expect("α in [0, 1]").sample(rng) as f64;
            (h, a - h)
        }
    }
}

/// Runs the recursion for `n_slots` slots, drawing per slot `A(t)`, the optional
/// binomial split, `β_d`, `β_r`, `ε_d`, `ε_r`, in that order.
pub fn simulate_plan(
    cfg: &SystemConfig,
    budget: &LinkBudget,
    plan: &TransmissionPlan,
    n_slots: usize,
    rng: &mut SimRng,
) -> QueueTrace {
    let service = plan.service(cfg);
    let mut state = QueueState::default();
    let mut trace = QueueTrace {
        alpha: cfg.alpha,
        a_bar: cfg.a_bar,
        arrivals: Vec::with_capacity(n_slots),
        q_h: Vec::with_capacity(n_slots),
        q_l: Vec::with_capacity(n_slots),
        backlog_h: Vec::with_capacity(n_slots),
        backlog_l: Vec::with_capacity(n_slots),
        xi_h: Vec::with_capacity(n_slots),
        xi_l: Vec::with_capacity(n_slots),
    };
    for _ in 0..n_slots {
        let a = sample_arrivals(cfg.a_bar, rng);
        let split = split_arrivals(cfg, a, rng);
        let beta = sample_blockage(cfg, rng);
        let eps = sample_pointing_error(cfg, rng);
        let xi = plan.decode(budget, beta, &eps);
        let (next, backlog) = step_split(&state, split, xi, service);
        state = next;
        trace.arrivals.push(a);
        trace.q_h.push(state.q_h);
        trace.q_l.push(state.q_l);
        trace.backlog_h.push(backlog.q_h);
        trace.backlog_l.push(backlog.q_l);
        trace.xi_h.push(xi.0);
        trace.xi_l.push(xi.1);
    }
    trace
}

/// Simulates the superposition plan of `solve` with a generator seeded by `seed`.
pub fn simulate(cfg: &SystemConfig, budget: &LinkBudget, solve: &SolveResult, n_slots: usize, seed: u64) -> QueueTrace {
    let mut r = rng::seeded(seed);
    simulate_plan(cfg, budget, &TransmissionPlan::from_solve(solve), n_slots, &mut r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub hc_stable: bool,
    pub lc_stable: bool,
    /// Fitted growth of the windowed mean queue, packets/slot.
    pub slope_h: f64,
    pub slope_l: f64,
    pub slope_tol: f64,
}

impl StabilityVerdict {
    pub fn stable(&self) -> bool {
        self.hc_stable && self.lc_stable
    }
}

/// Least-squares slope of the windowed means of the second half of `series`.
pub fn tail_slope(series: &[f64]) -> Result<f64> {
    if series.len() < MIN_DIAGNOSTIC_SLOTS {
        return Err(Error::InsufficientData {
            len: series.len(),
            min: MIN_DIAGNOSTIC_SLOTS,
        });
    }
    let start = series.len() / 2;
    let tail = &series[start..];
    let width = (tail.len() / DIAGNOSTIC_WINDOWS).max(1);
    let points: Vec<(f64, f64)> = tail
        .chunks_exact(width)
        .enumerate()
        .map(|(k, c)| ((k as f64 + 0.5) * width as f64, mean(c)))
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(if sxx > 0.0 { sxy / sxx } else { 0.0 })
}

/// Verdict from (possibly replication-averaged) queue series.
pub fn stability_from_series(q_h: &[f64], q_l: &[f64], a_bar: f64) -> Result<StabilityVerdict> {
    let slope_h = tail_slope(q_h)?;
    let slope_l = tail_slope(q_l)?;
    let slope_tol = 1e-3 * a_bar;
    Ok(StabilityVerdict {
        hc_stable: slope_h <= slope_tol,
        lc_stable: slope_l <= slope_tol,
        slope_h,
        slope_l,
        slope_tol,
    })
}

/// Heuristic mean-rate-stability verdict: a queue is unstable if its windowed mean
/// over the second half of the trace grows faster than `10⁻³·Ā` packets/slot.
pub fn stability_diagnostic(trace: &QueueTrace) -> Result<StabilityVerdict> {
    stability_from_series(&trace.q_h, &trace.q_l, trace.a_bar)
}

/// Slot-wise mean of several equally long series.
pub fn average_series<'a>(series: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    let mut count = 0usize;
    for s in series {
        if acc.is_empty() {
            acc = s.to_vec();
        } else {
            assert_eq!(acc.len(), s.len(), "series lengths differ");
            acc.iter_mut().zip(s).for_each(|(a, x)| *a += x);
        }
        count += 1;
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    acc
}

/// Empirical decode probabilities of a plan from `n` independent channel draws.
pub fn decode_rates(cfg: &SystemConfig, budget: &LinkBudget, plan: &TransmissionPlan, n: usize, rng: &mut impl Rng) -> (f64, f64) {
    let (mut h, mut l) = (0usize, 0usize);
    for _ in 0..n {
        let beta = sample_blockage(cfg, rng);
        let eps = sample_pointing_error(cfg, rng);
        let xi = plan.decode(budget, beta, &eps);
        h += usize::from(xi.0);
        l += usize::from(xi.1);
    }
    (h as f64 / n as f64, l as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::derive_link_budget;
    use crate::optimizer::solve_zero_load;

    #[test]
    fn step_examples() {
        let s = QueueState { q_h: 10.0, q_l: 0.0 };
        let (n, _) = step_split(&s, (2.0, 0.0), (true, true), (5.0, 0.0));
        assert_eq!(n.q_h, 7.0);
        let s = QueueState { q_h: 3.0, q_l: 0.0 };
        assert_eq!(step_split(&s, (0.0, 0.0), (true, true), (5.0, 0.0)).0.q_h, 0.0);
        let s = QueueState { q_h: 4.0, q_l: 6.0 };
        let (n, b) = step_split(&s, (1.5, 2.5), (false, false), (5.0, 5.0));
        assert_eq!((n.q_h, n.q_l), (5.5, 8.5));
        assert_eq!((b.q_h, b.q_l), (4.0, 6.0));
    }

    #[test]
    fn step_uses_fluid_split_and_rates() {
        let cfg = SystemConfig::default().with_alpha(0.25);
        let k = cfg.packets_per_bit_rate();
        let rates = RateTargets::new(20.0 / k, 30.0 / k);
        let s = QueueState { q_h: 50.0, q_l: 10.0 };
        let n = step(&s, 100.0, (true, true), &rates, &cfg);
        assert!((n.q_h - (50.0 - 20.0 + 25.0)).abs() < 1e-9);
        assert!((n.q_l - 75.0).abs() < 1e-9);
    }

    fn table1_solve(alpha: f64) -> (SystemConfig, LinkBudget, SolveResult) {
        let cfg = SystemConfig::default().with_alpha(alpha);
        let b = derive_link_budget(&cfg).unwrap();
        let s = solve_zero_load(&cfg, &b, alpha).unwrap();
        (cfg, b, s)
    }

    #[test]
    fn zero_arrivals_give_zero_trace() {
        let (mut cfg, b, s) = table1_solve(0.5);
        cfg.a_bar = 0.0;
        let t = simulate(&cfg, &b, &s, 500, 3);
        assert!(t.q_h.iter().chain(&t.q_l).all(|q| *q == 0.0));
        let v = stability_diagnostic(&t).unwrap();
        assert!(v.stable());
        assert_eq!(t.summary().tau, None);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (cfg, b, s) = table1_solve(0.3);
        assert_eq!(simulate(&cfg, &b, &s, 2000, 11), simulate(&cfg, &b, &s, 2000, 11));
        assert_ne!(simulate(&cfg, &b, &s, 2000, 11), simulate(&cfg, &b, &s, 2000, 12));
    }

    #[test]
    fn short_trace_is_rejected() {
        let (cfg, b, s) = table1_solve(0.3);
        let t = simulate(&cfg, &b, &s, 99, 1);
        assert!(matches!(stability_diagnostic(&t), Err(Error::InsufficientData { len: 99, .. })));
    }

    #[test]
    fn feasible_point_is_stable_and_overload_is_not() {
        let (cfg, b, s) = table1_solve(0.3);
        let w = s.objective;
        let mut c = cfg.clone();
        c.a_bar = 0.8 * w;
        let v = stability_diagnostic(&simulate(&c, &b, &s, 10_000, 5)).unwrap();
        assert!(v.stable(), "{v:?}");
        c.a_bar = 1.2 * w;
        let v = stability_diagnostic(&simulate(&c, &b, &s, 10_000, 5)).unwrap();
        assert!(!v.stable(), "{v:?}");
    }

    #[test]
    fn always_decoded_fast_service_has_short_delay() {
        let mut cfg = SystemConfig::default().with_alpha(0.5);
        cfg.q_d = 0.0;
        cfg.q_r = 0.0;
        cfg.sigma_md = 1e-9;
        cfg.sigma_mr = 1e-9;
        cfg.a_bar = 100.0;
        let b = derive_link_budget(&cfg).unwrap();
        let s = solve_zero_load(&cfg, &b, 0.5).unwrap();
        let t = simulate(&cfg, &b, &s, 10_000, 9);
        assert!(t.xi_h.iter().all(|x| *x) && t.xi_l.iter().all(|x| *x));
        let sum = t.summary();
        assert!(sum.tau_h.unwrap() <= 1.5 && sum.tau_l.unwrap() <= 1.5, "{sum:?}");
        let early = mean(&t.q_h[..5000]);
        let late = mean(&t.q_h[5000..]);
        assert!(late < early + 0.05 * cfg.a_bar);
    }

    #[test]
    fn binomial_split_conserves_arrivals() {
        let (mut cfg, b, s) = table1_solve(0.3);
        cfg.arrival_split = ArrivalSplit::Binomial;
        let t = simulate(&cfg, &b, &s, 300, 4);
        assert_eq!(t.q_h[0] + t.q_l[0], t.arrivals[0]);
        assert_eq!(t.q_h[0].fract(), 0.0);
        let share = t.q_h[0] / t.arrivals[0];
        assert!((share - 0.3).abs() < 0.1, "{share}");
    }

    #[test]
    fn slope_fit() {
        let line: Vec<f64> = (0..1000).map(|i| 2.0 * i as f64).collect();
        assert!((tail_slope(&line).unwrap() - 2.0).abs() < 1e-9);
        let flat = vec![5.0; 1000];
        assert_eq!(tail_slope(&flat).unwrap(), 0.0);
    }

    #[test]
    fn averaging() {
        let a = [1.0, 2.0];
        let b = [3.0, 6.0];
        assert_eq!(average_series([&a[..], &b[..]]), vec![2.0, 4.0]);
    }
}
