//! Reflected-beam width that holds the HC outage probability at a target.
//!
//! The target fixes the RIS-path misdetection probability `q_mr`, hence the shape
//! parameter `γ_r = √log2(1/q_mr)` and the equivalent width `w_eq,r = 2σ_mr·γ_r`.
//! `w_eq(w_r)` is not monotone: it diverges for very narrow beams (large `v`) and
//! has a single minimum near the UE aperture size. The search runs on the increasing
//! branch above that minimum, so the widest-gain admissible beam is returned.

use serde::{Deserialize, Serialize};

use crate::channel::{aperture_radius, beam_collection, derive_link_budget, gain_from_beam_radius};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::search::golden_section_max;

/// Beam-radius search interval, m.
pub const W_R_RANGE: (f64, f64) = (1e-4, 10.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamAdaptation {
    pub w_r: f64,
    pub g_r: f64,
    /// RIS-path misdetection probability at `w_r`.
    pub q_mr: f64,
    /// HC outage probability at `w_r`.
    pub p_out_h: f64,
}

fn finish(cfg: &SystemConfig, w_r: f64) -> Result<BeamAdaptation> {
    let mut c = cfg.clone();
    c.w_r = w_r;
    let b = derive_link_budget(&c)?;
    let o = crate::mcsc::outage_probs(&c, &b);
    Ok(BeamAdaptation {
        w_r,
        g_r: gain_from_beam_radius(cfg.d_ru, w_r),
        q_mr: b.q_mr,
        p_out_h: o.p_out_h,
    })
}

pub fn adapt_beamwidth(cfg: &SystemConfig, target_p_out_h: f64) -> Result<BeamAdaptation> {
    if !(target_p_out_h > 0.0 && target_p_out_h <= 1.0) {
        return Err(Error::Domain {
            what: "HC outage target",
            value: target_p_out_h,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let budget = derive_link_budget(cfg)?;
    let a_u = aperture_radius(cfg.g_u, cfg.frequency);
    let w_eq = |w: f64| beam_collection(a_u, w).equivalent_width;
    let (lo, hi) = W_R_RANGE;
    let w_min = golden_section_max(|w| -w_eq(w), lo, hi, 1e-12).x;

    let p_out_l = 1.0 - (1.0 - cfg.q_d) * (1.0 - budget.q_md);
    let floor = p_out_l * cfg.q_r;
    if floor >= target_p_out_h {
        return Err(Error::Infeasible(format!(
            "RIS-path blockage alone gives P_out,h ≥ {floor:.6} (P_out,l = {p_out_l:.6}, q_r = {}), above the target {target_p_out_h}",
            cfg.q_r
        )));
    }
    // required RIS-path failure probability 1 − (1−q_r)(1−q_mr)
    let ris_fail = target_p_out_h / p_out_l;
    if ris_fail >= 1.0 {
        return finish(cfg, w_min);
    }
    let q_mr = 1.0 - (1.0 - ris_fail) / (1.0 - cfg.q_r);
    let target_w_eq = 2.0 * cfg.sigma_mr * (1.0 / q_mr).log2().sqrt();
    if w_eq(w_min) >= target_w_eq {
        return finish(cfg, w_min);
    }
    if w_eq(hi) < target_w_eq {
        return Err(Error::Infeasible(format!(
            "pointing error σ_mr = {} needs w_eq,r = {target_w_eq:.4} m, beyond a {hi} m reflected beam",
            cfg.sigma_mr
        )));
    }
    let (mut a, mut b) = (w_min, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if w_eq(m) < target_w_eq {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    finish(cfg, 0.5 * (a + b))
}
