//! Superposition-coding signal model: SINRs, decode indicators and outage probabilities.
//!
//! The BS sends `x_d = √p_h_d·s_h + √p_l_d·s_l` on the direct path and
//! `x_r = √p_h_r·s_h + √p_l_r·s_l` towards the RIS. The UE decodes the HC message
//! first, treating the LC message as noise, then cancels it and decodes LC.

use serde::{Deserialize, Serialize};

use crate::channel::{channel_gains, fading_pair, half_power_factor, BlockageState, LinkBudget, PointingError};
use crate::config::SystemConfig;

/// Transmit powers of the HC and LC messages on both paths, W.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p_h_d: f64,
    pub p_h_r: f64,
    pub p_l_d: f64,
    pub p_l_r: f64,
}

impl PowerAllocation {
    pub const ZERO: PowerAllocation = PowerAllocation { p_h_d: 0.0, p_h_r: 0.0, p_l_d: 0.0, p_l_r: 0.0 };

    pub fn new(p_h_d: f64, p_h_r: f64, p_l_d: f64, p_l_r: f64) -> Self {
        Self { p_h_d, p_h_r, p_l_d, p_l_r }
    }

    /// Allocation on the simplex `Σp = p_max`, `p_l_r = 0`, given the shares of
    /// `p_h_d` and `p_h_r`.
    pub fn from_shares(p_max: f64, share_h_d: f64, share_h_r: f64) -> Self {
        let share_l_d = (1.0 - share_h_d - share_h_r).max(0.0);
        Self::new(p_max * share_h_d, p_max * share_h_r, p_max * share_l_d, 0.0)
    }

    pub fn total(&self) -> f64 {
        self.p_h_d + self.p_h_r + self.p_l_d + self.p_l_r
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_h_d, self.p_h_r, self.p_l_d, self.p_l_r]
    }

    pub fn is_feasible(&self, p_max: f64) -> bool {
        self.as_array().iter().all(|p| *p >= 0.0) && self.total() <= p_max * (1.0 + 1e-12)
    }
}

/// Target rates, bit/s, with the optional SINR bounds they were derived from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateTargets {
    pub r_h: f64,
    pub r_l: f64,
    pub gamma_h: Option<f64>,
    pub gamma_l: Option<f64>,
}

impl RateTargets {
    pub fn new(r_h: f64, r_l: f64) -> Self {
        Self { r_h, r_l, gamma_h: None, gamma_l: None }
    }

    /// Targets tight at the given SINR bounds.
    pub fn from_sinr(bandwidth: f64, gamma_h: f64, gamma_l: f64) -> Self {
        Self {
            r_h: shannon_rate(bandwidth, gamma_h),
            r_l: shannon_rate(bandwidth, gamma_l),
            gamma_h: Some(gamma_h),
            gamma_l: Some(gamma_l),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageProbs {
    pub p_out_h: f64,
    pub p_out_l: f64,
}

/// `B·log2(1+γ)`.
pub fn shannon_rate(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * sinr.ln_1p() / std::f64::consts::LN_2
}

/// HC SINR from power gains `|h|²`, `|g|²`.
pub fn sinr_hc_from_gains(h2: f64, g2: f64, p: &PowerAllocation, sigma_n2: f64) -> f64 {
    (h2 * p.p_h_d + g2 * p.p_h_r) / (h2 * p.p_l_d + g2 * p.p_l_r + sigma_n2)
}

/// LC SNR after HC cancellation from power gains `|h|²`, `|g|²`.
pub fn snr_lc_from_gains(h2: f64, g2: f64, p: &PowerAllocation, sigma_n2: f64) -> f64 {
    (h2 * p.p_l_d + g2 * p.p_l_r) / sigma_n2
}

pub fn sinr_hc(budget: &LinkBudget, beta: BlockageState, rho_d: f64, rho_r: f64, p: &PowerAllocation) -> f64 {
    let (h2, g2) = channel_gains(budget, beta, rho_d, rho_r);
    sinr_hc_from_gains(h2, g2, p, budget.sigma_n2)
}

pub fn snr_lc(budget: &LinkBudget, beta: BlockageState, rho_d: f64, rho_r: f64, p: &PowerAllocation) -> f64 {
    let (h2, g2) = channel_gains(budget, beta, rho_d, rho_r);
    snr_lc_from_gains(h2, g2, p, budget.sigma_n2)
}

/// Decode outcome `(ξ_h, ξ_l)` for one channel realization. LC succeeds only if HC
/// was decoded (and cancelled) first.
pub fn decode(
    budget: &LinkBudget,
    beta: BlockageState,
    eps: &PointingError,
    p: &PowerAllocation,
    targets: &RateTargets,
) -> (bool, bool) {
    let (rho_d, rho_r) = fading_pair(budget, eps);
    let (h2, g2) = channel_gains(budget, beta, rho_d, rho_r);
    let r_h = shannon_rate(budget.bandwidth, sinr_hc_from_gains(h2, g2, p, budget.sigma_n2));
    let xi_h = r_h >= targets.r_h;
    if !xi_h {
        return (false, false);
    }
    let r_l = shannon_rate(budget.bandwidth, snr_lc_from_gains(h2, g2, p, budget.sigma_n2));
    (true, r_l >= targets.r_l)
}

/// Half-power pointing-error thresholds `(ε_th,d, ε_th,r)`, m.
pub fn epsilon_threshold(budget: &LinkBudget) -> (f64, f64) {
    let k = half_power_factor();
    (k * budget.w_eq_d, k * budget.w_eq_r)
}

/// Outage probabilities under the per-path approximation: a path is usable when it
/// is unblocked and its pointing error stays below the half-power threshold. LC only
/// rides the direct path; HC is lost only if both paths are unusable.
pub fn outage_probs(cfg: &SystemConfig, budget: &LinkBudget) -> OutageProbs {
    outage_from_factors(cfg.q_d, cfg.q_r, budget.q_md, budget.q_mr)
}

pub fn outage_from_factors(q_d: f64, q_r: f64, q_md: f64, q_mr: f64) -> OutageProbs {
    let p_out_l = 1.0 - (1.0 - q_d) * (1.0 - q_md);
    let p_out_h = p_out_l * (1.0 - (1.0 - q_r) * (1.0 - q_mr));
    OutageProbs { p_out_h, p_out_l }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_link_budget, fading_coefficient, sample_blockage, sample_pointing_error};
    use crate::rng;

    fn table1() -> (SystemConfig, LinkBudget) {
        let cfg = SystemConfig::default();
        let b = derive_link_budget(&cfg).unwrap();
        (cfg, b)
    }

    const BOTH: BlockageState = BlockageState::new(true, true);

    #[test]
    fn no_interference_reduces_to_snr() {
        let (_, b) = table1();
        let p = PowerAllocation::new(3e-3, 7e-3, 0.0, 0.0);
        let (rd, rr) = (b.peak_d, b.peak_ris_path());
        let s = sinr_hc(&b, BOTH, rd, rr, &p);
        let h2 = b.eta_d * b.eta_d * rd;
        let g2 = b.eta_r * b.eta_r * rr;
        assert_eq!(s, (h2 * 3e-3 + g2 * 7e-3) / b.sigma_n2);
        assert_eq!(sinr_hc(&b, BlockageState::new(false, false), rd, rr, &p), 0.0);
    }

    #[test]
    fn sinr_matches_script() {
        // independent numpy evaluation at default config, threshold fading, β = (1,1),
        // p = (2, 3, 4, 1) mW
        let (_, b) = table1();
        let p = PowerAllocation::new(2e-3, 3e-3, 4e-3, 1e-3);
        let s = sinr_hc(&b, BOTH, b.rho_th_d, b.rho_th_r, &p);
        let l = snr_lc(&b, BOTH, b.rho_th_d, b.rho_th_r, &p);
        assert!((s / 0.534_172_733_040_425_8 - 1.0).abs() < 1e-9, "{s}");
        assert!((l / 39.715_190_533_572_59 - 1.0).abs() < 1e-9, "{l}");
    }

    #[test]
    fn lc_snr_zero_cases() {
        let (_, b) = table1();
        let p = PowerAllocation::new(1e-3, 1e-3, 0.0, 0.0);
        assert_eq!(snr_lc(&b, BOTH, b.peak_d, b.peak_ris_path(), &p), 0.0);
        let q = PowerAllocation::new(1e-3, 1e-3, 5e-3, 0.0);
        assert_eq!(snr_lc(&b, BlockageState::new(false, true), b.peak_d, b.peak_ris_path(), &q), 0.0);
    }

    #[test]
    fn decode_cases() {
        let (_, b) = table1();
        let p = PowerAllocation::new(3e-3, 3e-3, 4e-3, 0.0);
        let zero = RateTargets::new(0.0, 0.0);
        for beta in BlockageState::HC_ROBUST {
            assert_eq!(decode(&b, beta, &PointingError::ALIGNED, &p, &zero), (true, true));
        }
        let some = RateTargets::new(1e9, 1e9);
        assert_eq!(
            decode(&b, BlockageState::new(false, false), &PointingError::ALIGNED, &p, &some),
            (false, false)
        );

        let rh = shannon_rate(b.bandwidth, sinr_hc(&b, BOTH, b.peak_d, b.peak_ris_path(), &p));
        let rl = shannon_rate(b.bandwidth, snr_lc(&b, BOTH, b.peak_d, b.peak_ris_path(), &p));
        let t = RateTargets::new(rh, rl * 1.01);
        assert_eq!(decode(&b, BOTH, &PointingError::ALIGNED, &p, &t), (true, false));
        let t = RateTargets::new(rh * 1.01, rl * 0.5);
        assert_eq!(decode(&b, BOTH, &PointingError::ALIGNED, &p, &t), (false, false));
    }

    #[test]
    fn threshold_values() {
        let (_, b) = table1();
        let (ed, _) = epsilon_threshold(&b);
        assert!((0.346_573_590_279_972_6f64.sqrt() * 0.4244 - 0.2499).abs() < 1e-4);
        assert!((ed - 0.346_573_590_279_972_6f64.sqrt() * b.w_eq_d).abs() < 1e-15);
        let rho = fading_coefficient(ed, b.peak_d, b.w_eq_d);
        assert!((rho - b.peak_d / 2.0).abs() <= 1e-12 * b.peak_d);
    }

    #[test]
    fn outage_cases() {
        let o = outage_from_factors(0.3, 0.1, 0.0, 0.0);
        assert!((o.p_out_l - 0.3).abs() < 1e-15);
        assert!((o.p_out_h - 0.03).abs() < 1e-15);
        let o = outage_from_factors(0.3, 0.1, 1.0, 1.0);
        assert_eq!((o.p_out_h, o.p_out_l), (1.0, 1.0));
    }

    #[test]
    fn outage_factorisation_exact() {
        let (cfg, b) = table1();
        let o = outage_probs(&cfg, &b);
        assert_eq!(o.p_out_h, o.p_out_l * (1.0 - (1.0 - cfg.q_r) * (1.0 - b.q_mr)));
        assert!(o.p_out_h <= o.p_out_l);
    }

    #[test]
    fn outage_matches_monte_carlo_of_path_availability() {
        let (cfg, b) = table1();
        let o = outage_probs(&cfg, &b);
        let (ed, er) = epsilon_threshold(&b);
        let mut r = rng::seeded(2024);
        let n = 1_000_000;
        let (mut out_l, mut out_h) = (0usize, 0usize);
        for _ in 0..n {
            let beta = sample_blockage(&cfg, &mut r);
            let eps = sample_pointing_error(&cfg, &mut r);
            let d_ok = beta.direct && eps.eps_d <= ed;
            let r_ok = beta.ris && eps.eps_r <= er;
            out_l += usize::from(!d_ok);
            out_h += usize::from(!d_ok && !r_ok);
        }
        for (count, p) in [(out_l, o.p_out_l), (out_h, o.p_out_h)] {
            let est = count as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((est - p).abs() <= 3.0 * sigma, "{est} vs {p}");
        }
    }

    #[test]
    fn hc_decode_rule_at_threshold_rates_matches_outage() {
        // HC on the direct path alone or on the RIS path alone, targets at each
        // path's threshold rate: "usable" in the half-power sense.
        let (cfg, b) = table1();
        let o = outage_probs(&cfg, &b);
        let pd = PowerAllocation::new(cfg.p_max, 0.0, 0.0, 0.0);
        let pr = PowerAllocation::new(0.0, cfg.p_max, 0.0, 0.0);
        let td = RateTargets::new(
            shannon_rate(b.bandwidth, sinr_hc(&b, BlockageState::new(true, false), b.rho_th_d, 0.0, &pd)),
            0.0,
        );
        let tr = RateTargets::new(
            shannon_rate(b.bandwidth, sinr_hc(&b, BlockageState::new(false, true), 0.0, b.rho_th_r, &pr)),
            0.0,
        );
        let mut r = rng::seeded(77);
        let n = 400_000;
        let mut lost = 0usize;
        for _ in 0..n {
            let beta = sample_blockage(&cfg, &mut r);
            let eps = sample_pointing_error(&cfg, &mut r);
            let via_d = decode(&b, beta, &eps, &pd, &td).0;
            let via_r = decode(&b, beta, &eps, &pr, &tr).0;
            lost += usize::from(!via_d && !via_r);
        }
        let est = lost as f64 / n as f64;
        let sigma = (o.p_out_h * (1.0 - o.p_out_h) / n as f64).sqrt();
        assert!((est - o.p_out_h).abs() <= 3.0 * sigma, "{est} vs {}", o.p_out_h);
    }
}
