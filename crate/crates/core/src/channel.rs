//! Link budget of the direct BS–UE path and the BS–RIS–UE path, plus sampling of
//! blockage and pointing errors.
//!
//! Both paths use the Gaussian-beam misalignment model: a beam of radius `w` at the
//! receiver, collected by an aperture of radius `a`, delivers a peak fraction
//! `A = erf(v)²` with `v = √π·a/(√2·w)`, and a radial pointing error `ε` reduces it to
//! `ρ = A·exp(−2ε²/w_eq²)` where `w_eq² = w²·√π·erf(v)/(2v·e^{−v²})`.
//!
//! `erf` is `libm::erf` (the FreeBSD/musl implementation, correct to within one ulp
//! over the whole real line, including the small-argument branch used when `v → 0`).

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Pointing error at which the collected power drops to half its peak, in units of `w_eq`.
pub fn half_power_factor() -> f64 {
    // √(ln √2)
    (0.5 * LN_2).sqrt()
}

/// Peak collected fraction and equivalent width of one Gaussian beam/aperture pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamCollection {
    pub peak_fraction: f64,
    pub equivalent_width: f64,
}

/// `v = √π·a/(√2·w)`.
pub fn beam_ratio(aperture_radius: f64, beam_radius: f64) -> f64 {
    PI.sqrt() * aperture_radius / (2f64.sqrt() * beam_radius)
}

/// `w_eq²/w² = √π·erf(v)/(2v·e^{−v²})`, evaluated as `exp(ln(√π·erf(v)/(2v)) + v²)`
/// so that large `v` does not underflow the denominator.
pub fn equivalent_width_factor(v: f64) -> f64 {
    if v == 0.0 {
        return 1.0;
    }
    (PI.sqrt() * libm::erf(v) / (2.0 * v)).ln().exp() * (v * v).exp()
}

pub fn beam_collection(aperture_radius: f64, beam_radius: f64) -> BeamCollection {
    let v = beam_ratio(aperture_radius, beam_radius);
    let erf_v = libm::erf(v);
    BeamCollection {
        peak_fraction: erf_v * erf_v,
        equivalent_width: beam_radius * equivalent_width_factor(v).sqrt(),
    }
}

/// Beam radius at distance `d` of an antenna with linear gain `g`, from `G = 8d²/w²`.
pub fn beam_radius_from_gain(distance: f64, gain: f64) -> f64 {
    8f64.sqrt() * distance / gain.sqrt()
}

/// Gain of a Gaussian beam with radius `w` at distance `d`.
pub fn gain_from_beam_radius(distance: f64, beam_radius: f64) -> f64 {
    8.0 * distance * distance / (beam_radius * beam_radius)
}

/// Effective aperture radius of an antenna with linear gain `g`.
pub fn aperture_radius(gain: f64, frequency: f64) -> f64 {
    SPEED_OF_LIGHT * gain.sqrt() / (2.0 * PI * frequency)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Amplitude path gain of the direct path.
    pub eta_d: f64,
    /// Amplitude path gain of the RIS path.
    pub eta_r: f64,
    /// Direct-beam radius at the UE, m.
    pub w_d: f64,
    /// BS-beam radius on the RIS surface, m.
    pub w_ris: f64,
    pub aperture_ue: f64,
    pub aperture_ris: f64,
    /// Peak fraction collected by the UE on the direct path (`A_d`).
    pub peak_d: f64,
    /// Peak fraction collected by the UE from the reflected beam (`A_r`).
    pub peak_r: f64,
    /// Fraction of the BS beam collected by the RIS (`A_RIS`).
    pub peak_ris: f64,
    pub w_eq_d: f64,
    pub w_eq_r: f64,
    /// Misalignment shape parameters `w_eq/(2σ_m)`.
    pub gamma_ma_d: f64,
    pub gamma_ma_r: f64,
    /// Probability that misalignment alone drops a path below half power.
    pub q_md: f64,
    pub q_mr: f64,
    /// Half-power fading values `A_d/2` and `A_RIS·A_r/2`.
    pub rho_th_d: f64,
    pub rho_th_r: f64,
    /// Gain of the RIS-reflected beam, linear.
    pub g_r: f64,
    /// Noise power `N0·B`, W.
    pub sigma_n2: f64,
    pub bandwidth: f64,
}

impl LinkBudget {
    /// Peak fading of the RIS path, `A_RIS·A_r`.
    pub fn peak_ris_path(&self) -> f64 {
        self.peak_ris * self.peak_r
    }

    /// `|h|²` at the half-power fading point with the path unblocked.
    pub fn threshold_gain_d(&self) -> f64 {
        self.eta_d * self.eta_d * self.rho_th_d
    }

    /// `|g|²` at the half-power fading point with the path unblocked.
    pub fn threshold_gain_r(&self) -> f64 {
        self.eta_r * self.eta_r * self.rho_th_r
    }
}

pub fn derive_link_budget(cfg: &SystemConfig) -> Result<LinkBudget> {
    cfg.validate()?;
    let f = cfg.frequency;
    let lambda = cfg.wavelength();
    let g_r = gain_from_beam_radius(cfg.d_ru, cfg.w_r);

    let eta_d = (cfg.g_b * cfg.g_u).sqrt() * SPEED_OF_LIGHT / (4.0 * PI * f * cfg.d_bu)
        * (-0.5 * cfg.k_a * cfg.d_bu).exp();
    let eta_r = (cfg.g_b * g_r * cfg.g_u).sqrt() * SPEED_OF_LIGHT
        / (4.0 * PI * f * cfg.d_br * cfg.d_ru)
        * (-0.5 * cfg.k_a * (cfg.d_br + cfg.d_ru)).exp();

    let w_d = beam_radius_from_gain(cfg.d_bu, cfg.g_b);
    let w_ris = beam_radius_from_gain(cfg.d_br, cfg.g_b);
    let aperture_ue = aperture_radius(cfg.g_u, f);
    let aperture_ris = lambda / 4.0 * (cfg.n_r as f64).sqrt();

    let direct = beam_collection(aperture_ue, w_d);
    let reflected = beam_collection(aperture_ue, cfg.w_r);
    let ris = beam_collection(aperture_ris, w_ris);

    let gamma_ma_d = direct.equivalent_width / (2.0 * cfg.sigma_md);
    let gamma_ma_r = reflected.equivalent_width / (2.0 * cfg.sigma_mr);

    Ok(LinkBudget {
        eta_d,
        eta_r,
        w_d,
        w_ris,
        aperture_ue,
        aperture_ris,
        peak_d: direct.peak_fraction,
        peak_r: reflected.peak_fraction,
        peak_ris: ris.peak_fraction,
        w_eq_d: direct.equivalent_width,
        w_eq_r: reflected.equivalent_width,
        gamma_ma_d,
        gamma_ma_r,
        q_md: misdetection_probability(gamma_ma_d),
        q_mr: misdetection_probability(gamma_ma_r),
        rho_th_d: direct.peak_fraction / 2.0,
        rho_th_r: ris.peak_fraction * reflected.peak_fraction / 2.0,
        g_r,
        sigma_n2: cfg.noise_power(),
        bandwidth: cfg.bandwidth,
    })
}

/// `(1/2)^(γ²)`, the fading CDF evaluated at half the peak.
pub fn misdetection_probability(gamma_ma: f64) -> f64 {
    0.5f64.powf(gamma_ma * gamma_ma)
}

fn check_fading_domain(x: f64, peak: f64, gamma_ma: f64) -> Result<()> {
    if !(gamma_ma > 0.0) {
        return Err(Error::Domain {
            what: "misalignment shape parameter",
            value: gamma_ma,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if !(0.0..=peak).contains(&x) {
        return Err(Error::Domain {
            what: "misalignment fading value",
            value: x,
            lo: 0.0,
            hi: peak,
        });
    }
    Ok(())
}

/// Density of the misalignment fading `ρ` on `[0, A]`.
pub fn misalignment_pdf(x: f64, peak: f64, gamma_ma: f64) -> Result<f64> {
    check_fading_domain(x, peak, gamma_ma)?;
    let g2 = gamma_ma * gamma_ma;
    Ok(g2 / peak.powf(g2) * x.powf(g2 - 1.0))
}

/// Distribution function of the misalignment fading `ρ` on `[0, A]`.
pub fn misalignment_cdf(x: f64, peak: f64, gamma_ma: f64) -> Result<f64> {
    check_fading_domain(x, peak, gamma_ma)?;
    Ok((x / peak).powf(gamma_ma * gamma_ma))
}

/// Fraction of power collected at radial displacement `eps`.
pub fn fading_coefficient(eps: f64, peak: f64, w_eq: f64) -> f64 {
    peak * (-2.0 * eps * eps / (w_eq * w_eq)).exp()
}

/// Availability of the two paths in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockageState {
    pub direct: bool,
    pub ris: bool,
}

impl BlockageState {
    pub const ALL: [BlockageState; 4] = [
        BlockageState::new(false, false),
        BlockageState::new(false, true),
        BlockageState::new(true, false),
        BlockageState::new(true, true),
    ];

    /// States in which at least one path is up: `(0,1)`, `(1,0)`, `(1,1)`.
    pub const HC_ROBUST: [BlockageState; 3] = [
        BlockageState::new(false, true),
        BlockageState::new(true, false),
        BlockageState::new(true, true),
    ];

    pub const fn new(direct: bool, ris: bool) -> Self {
        Self { direct, ris }
    }

    pub fn beta_d(&self) -> f64 {
        if self.direct {
            1.0
        } else {
            0.0
        }
    }

    pub fn beta_r(&self) -> f64 {
        if self.ris {
            1.0
        } else {
            0.0
        }
    }
}

/// Radial pointing-error displacements of the direct and reflected beams, m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointingError {
    pub eps_d: f64,
    pub eps_r: f64,
}

impl PointingError {
    pub const ALIGNED: PointingError = PointingError { eps_d: 0.0, eps_r: 0.0 };
}

pub fn sample_blockage<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> BlockageState {
    let direct = rng.random::<f64>() >= cfg.q_d;
    let ris = rng.random::<f64>() >= cfg.q_r;
    BlockageState { direct, ris }
}

/// Rayleigh variate with scale `sigma` by inversion.
pub fn sample_rayleigh<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    sigma * (-2.0 * (1.0 - u).ln()).sqrt()
}

pub fn sample_pointing_error<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> PointingError {
    let eps_d = sample_rayleigh(cfg.sigma_md, rng);
    let eps_r = sample_rayleigh(cfg.sigma_mr, rng);
    PointingError { eps_d, eps_r }
}

/// Misalignment fading of both paths for a given pointing error.
pub fn fading_pair(budget: &LinkBudget, eps: &PointingError) -> (f64, f64) {
    (
        fading_coefficient(eps.eps_d, budget.peak_d, budget.w_eq_d),
        fading_coefficient(eps.eps_r, budget.peak_ris_path(), budget.w_eq_r),
    )
}

/// Power gains `(|h|², |g|²)`.
pub fn channel_gains(budget: &LinkBudget, beta: BlockageState, rho_d: f64, rho_r: f64) -> (f64, f64) {
    (
        beta.beta_d() * budget.eta_d * budget.eta_d * rho_d,
        beta.beta_r() * budget.eta_r * budget.eta_r * rho_r,
    )
}
