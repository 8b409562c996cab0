//! Acceptance criteria, one test each. Every test prints a PASS/FAIL line with the
//! measured values before asserting.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mcsc_core::channel::{
    derive_link_budget, fading_pair, misalignment_cdf, sample_blockage, sample_pointing_error, LinkBudget,
};
use mcsc_core::experiments::{
    adapt_beamwidth, alpha_sum_star, alpha_tradeoff_star, blockage_sweep, delay_sweep, operating_point, range_grid,
    strict_hc_sweep, Scheme, StrictHcOptions,
};
use mcsc_core::mcsc::{epsilon_threshold, outage_probs, PowerAllocation};
use mcsc_core::optimizer::{default_init, random_config, sca_solve, surrogate_sinr, update_mu};
use mcsc_core::{rng, SystemConfig};
use rand::Rng;
use rayon::prelude::*;

fn report(criterion: u32, ok: bool, detail: String) {
    println!("criterion {criterion}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn table() -> (SystemConfig, LinkBudget) {
    let cfg = SystemConfig::default();
    let b = derive_link_budget(&cfg).unwrap();
    (cfg, b)
}

#[test]
fn criterion_1_feasibility_endpoints() {
    let start = Instant::now();
    let (cfg, b) = table();
    let t0 = operating_point(&cfg, &b, 0.0).unwrap().throughput_total;
    let t1 = operating_point(&cfg, &b, 1.0).unwrap().throughput_total;
    let dt = start.elapsed();
    let ok = within(t0, 4.4, 0.44) && within(t1, 2.8, 0.28) && dt < Duration::from_secs(5);
    report(1, ok, format!("α=0: {t0:.4} bit/s/Hz, α=1: {t1:.4} bit/s/Hz, {dt:.2?}"));
}

#[test]
fn criterion_2_tradeoff_anchors() {
    let start = Instant::now();
    let (cfg, b) = table();
    let sum = alpha_sum_star(&cfg).unwrap();
    let t = alpha_tradeoff_star(&cfg, &sum).unwrap();
    let p_sum = operating_point(&cfg, &b, sum.alpha).unwrap();
    let p_t = operating_point(&cfg, &b, t.alpha).unwrap();
    let hc_ratio = p_t.throughput_hc / p_sum.throughput_hc;
    let drop = 1.0 - p_t.throughput_total / p_sum.throughput_total;
    let dt = start.elapsed();
    let ok = within(sum.alpha, 0.28, 0.05)
        && within(t.alpha, 0.62, 0.07)
        && within(hc_ratio, 2.0, 0.2)
        && within(drop, 0.12, 0.05)
        && dt < Duration::from_secs(60);
    report(
        2,
        ok,
        format!(
            "α_sum*={:.4}, α_T*={:.4}, HC ratio {hc_ratio:.3}, total drop {:.2}%, {dt:.2?}",
            sum.alpha,
            t.alpha,
            100.0 * drop
        ),
    );
}

#[test]
fn criterion_3_blockage_sweep() {
    let cfg = SystemConfig::default();
    let r = blockage_sweep(&cfg, &[0.0, 0.5]).unwrap();
    let tp = |case: &str, i: usize| r.case(case)[i].point.as_ref().unwrap().throughput_total;
    let (lc0, lc5) = (tp("alpha_0", 0), tp("alpha_0", 1));
    let drop = 1.0 - tp("alpha_1", 1) / tp("alpha_1", 0);
    let ok = within(lc0, 6.3, 0.63) && within(lc5, 3.2, 0.32) && within(drop, 0.074, 0.03);
    report(
        3,
        ok,
        format!("α=0: {lc0:.4} (q_d=0), {lc5:.4} (q_d=0.5); α=1 drop {:.2}%", 100.0 * drop),
    );
}

#[test]
fn criterion_4_strict_hc() {
    let cfg = SystemConfig::default();
    let r = strict_hc_sweep(&cfg, &[0.14], StrictHcOptions::default()).unwrap();
    let tp = |case: &str| r.case(case)[0].point.as_ref().map(|p| p.throughput_total);
    let (mc, ts, one) = (tp("mcsc"), tp("time_sharing"), tp("alpha_1"));
    let (Some(mc), Some(ts), Some(one)) = (mc, ts, one) else {
        return report(4, false, format!("infeasible at σ_m = 0.14: {:?}", r.case("mcsc")[0].note));
    };
    let adapted = adapt_beamwidth(&cfg.with_misalignment(0.14), 0.05).unwrap();
    let mut c = cfg.with_misalignment(0.14);
    c.w_r = adapted.w_r;
    let p_out_h = outage_probs(&c, &derive_link_budget(&c).unwrap()).p_out_h;
    let round_trip = (p_out_h - 0.05).abs();
    let ok = mc >= 2.5 * one && mc >= 1.25 * ts && round_trip <= 1e-6;
    report(
        4,
        ok,
        format!(
            "MC-SC {mc:.4}, α=1 {one:.4} (×{:.3}), time sharing {ts:.4} (×{:.3}), w_r={:.5} m, round trip {round_trip:.2e}",
            mc / one,
            mc / ts,
            adapted.w_r
        ),
    );
}

#[test]
fn criterion_5_queueing() {
    let start = Instant::now();
    let cfg = SystemConfig::default();
    assert_eq!((cfg.a_bar, cfg.packet_size, cfg.slot_duration), (800.0, 5e6, 0.1));
    let grid = range_grid(0.0, 0.01, 1.0);
    let (slots, reps, seed) = (20_000, 20, 2024);
    let mc = delay_sweep(&cfg, &grid, Scheme::Mcsc, slots, reps, seed).unwrap();
    let ts = delay_sweep(&cfg, &grid, Scheme::TimeSharing, slots, reps, seed).unwrap();
    let tau_l0 = mc.points[0].tau_l.unwrap();
    let onset_mc = mc.instability_onset.unwrap_or(f64::NAN);
    let onset_ts = ts.instability_onset.unwrap_or(f64::NAN);
    let min = mc.delay_minimum.unwrap_or(f64::NAN);
    let dt = start.elapsed();
    let ok = within(tau_l0, 2.5, 0.5)
        && within(onset_mc, 0.63, 0.05)
        && within(onset_ts, 0.18, 0.05)
        && (0.30..=0.48).contains(&min)
        && dt < Duration::from_secs(600);
    report(
        5,
        ok,
        format!(
            "τ_l(0)={tau_l0:.3} slots, onset MC-SC {onset_mc}, time sharing {onset_ts}, delay minimum at α={min}, {dt:.2?}"
        ),
    );
}

/// Objective `min_k (1−P_out,k)(T/M)R_k/share_k − Ā` evaluated from the budget alone.
fn reference_objective(cfg: &SystemConfig, b: &LinkBudget, p: [f64; 4]) -> f64 {
    let (h, g, s2) = (b.threshold_gain_d(), b.threshold_gain_r(), b.sigma_n2);
    let hc = [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        .iter()
        .map(|&(bd, br)| (bd * h * p[0] + br * g * p[1]) / (bd * h * p[2] + br * g * p[3] + s2))
        .fold(f64::INFINITY, f64::min);
    let lc = h * p[2] / s2;
    let rate = |x: f64| b.bandwidth * (1.0 + x).log2();
    let p_out_l = 1.0 - (1.0 - cfg.q_d) * (1.0 - b.q_md);
    let p_out_h = p_out_l * (1.0 - (1.0 - cfg.q_r) * (1.0 - b.q_mr));
    let k = cfg.slot_duration / cfg.packet_size;
    let mut w = f64::INFINITY;
    if cfg.alpha > 0.0 {
        w = w.min((1.0 - p_out_h) * k * rate(hc) / cfg.alpha);
    }
    if cfg.alpha < 1.0 {
        w = w.min((1.0 - p_out_l) * k * rate(lc) / (1.0 - cfg.alpha));
    }
    w - cfg.a_bar
}

fn reference_grid(cfg: &SystemConfig, b: &LinkBudget, n: usize) -> f64 {
    (0..=n)
        .into_par_iter()
        .map(|i| {
            (0..=(n - i))
                .map(|j| {
                    let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                    let p = cfg.p_max;
                    reference_objective(cfg, b, [x * p, y * p, (1.0 - x - y).max(0.0) * p, 0.0])
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_6_oracle_equivalence() {
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    let mut worst_drop: f64 = 0.0;
    for i in 0..50 {
        let cfg = random_config(&mut rng::stream(7, i));
        let b = derive_link_budget(&cfg).unwrap();
        let s = sca_solve(&cfg, &b, default_init(cfg.p_max), 1e-6, 200).unwrap();
        let grid = reference_grid(&cfg, &b, 500);
        let gap = (s.objective - grid).abs() / (1.0 + grid.abs());
        let drop = s.objective_trace.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        worst_gap = worst_gap.max(gap);
        worst_drop = worst_drop.max(drop);
        if gap > 1e-3 || drop > 1e-8 {
            failures.push((i, s.objective, grid));
        }
    }
    report(
        6,
        failures.is_empty(),
        format!(
            "{} of 50 configs outside tolerance, worst |SCA−grid|/(1+|grid|) = {worst_gap:.3e}, worst trace decrease {worst_drop:.1e}; first failures (index, SCA, grid): {:?}",
            failures.len(),
            &failures[..failures.len().min(3)]
        ),
    );
}

#[test]
fn criterion_7_quadratic_transform_tightness() {
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let mut g = rng::stream(77, i);
        let cfg = random_config(&mut g);
        let b = derive_link_budget(&cfg).unwrap();
        let w: [f64; 4] = std::array::from_fn(|_| g.random_range(0.0..1.0));
        let scale = g.random_range(0.01..1.0) * cfg.p_max / w.iter().sum::<f64>();
        let p = PowerAllocation::new(w[0] * scale, w[1] * scale, w[2] * scale, w[3] * scale);
        let (h, gr, s2) = (b.threshold_gain_d(), b.threshold_gain_r(), b.sigma_n2);
        let exact_hc = [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
            .map(|(bd, br)| (bd * h * p.p_h_d + br * gr * p.p_h_r) / (bd * h * p.p_l_d + br * gr * p.p_l_r + s2));
        let exact_lc = h * p.p_l_d / s2;
        let (hc, lc) = surrogate_sinr(&update_mu(&p, &cfg, &b), &p, &cfg, &b);
        for (a, e) in hc.iter().zip(exact_hc).chain(std::iter::once((&lc, exact_lc))) {
            worst = worst.max((a - e).abs() / e.abs().max(1e-300));
        }
    }
    report(7, worst <= 1e-9, format!("worst relative error {worst:.3e} over 1000 pairs"));
}

/// Asymptotic Kolmogorov tail `P(K > λ)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let t = (-2.0 * k * k * lambda * lambda).exp();
            if k as u64 % 2 == 1 {
                t
            } else {
                -t
            }
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

#[test]
fn criterion_8_distribution_fidelity() {
    let (cfg, b) = table();
    let n = 100_000;
    let mut g = rng::seeded(8);
    let mut rho: Vec<f64> = (0..n).map(|_| fading_pair(&b, &sample_pointing_error(&cfg, &mut g)).0).collect();
    rho.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = rho
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = misalignment_cdf(x, b.peak_d, b.gamma_ma_d).unwrap();
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let p_value = kolmogorov_q((nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d);

    let (th_d, th_r) = epsilon_threshold(&b);
    let mut g = rng::seeded(9);
    let (mut up_d, mut up_r) = (0u64, 0u64);
    for _ in 0..n {
        let beta = sample_blockage(&cfg, &mut g);
        let eps = sample_pointing_error(&cfg, &mut g);
        up_d += u64::from(beta.direct && eps.eps_d <= th_d);
        up_r += u64::from(beta.ris && eps.eps_r <= th_r);
    }
    let z = |count: u64, p: f64| (count as f64 / nf - p).abs() / (p * (1.0 - p) / nf).sqrt();
    let z_d = z(up_d, (1.0 - cfg.q_d) * (1.0 - b.q_md));
    let z_r = z(up_r, (1.0 - cfg.q_r) * (1.0 - b.q_mr));
    let ok = p_value > 0.01 && z_d <= 3.0 && z_r <= 3.0;
    report(
        8,
        ok,
        format!("KS D={d:.5}, p={p_value:.3}; availability z-scores direct {z_d:.2}, RIS {z_r:.2}"),
    );
}

fn mcsc(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mcsc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run mcsc")
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: [&[&str]; 3] = [
        &["feasibility", "--alpha-grid", "0:0.1:1", "--out", "feas.csv"],
        &["queue-sim", "--alpha-grid", "0:0.2:0.8", "--slots", "3000", "--reps", "3", "--seed", "5", "--slot-trace", "--out", "queue.csv"],
        &["strict-hc", "--sigma-grid", "0.04:0.05:0.24", "--out", "strict.csv"],
    ];
    let mut mismatches = Vec::new();
    for args in runs {
        let out = *args.last().unwrap();
        assert!(mcsc(args, d).status.success(), "{args:?}");
        let manifest = Path::new(out).with_extension("manifest.json");
        let copies: Vec<String> = ["a", "b"].iter().map(|t| format!("{t}_{out}")).collect();
        for c in &copies {
            let r = mcsc(&["rerun", manifest.to_str().unwrap(), "--out", c], d);
            assert!(r.status.success(), "rerun {c}");
        }
        let files = std::iter::once(out.to_string()).chain(copies.iter().cloned());
        let bytes: Vec<Vec<u8>> = files.map(|f| std::fs::read(d.join(f)).unwrap()).collect();
        if bytes.iter().any(|b| b != &bytes[0]) {
            mismatches.push(out);
        }
        if out == "queue.csv" {
            let t: Vec<Vec<u8>> = ["queue", "a_queue", "b_queue"]
                .iter()
                .map(|s| std::fs::read(d.join(format!("{s}.trace.csv"))).unwrap())
                .collect();
            if t.iter().any(|b| b != &t[0]) {
                mismatches.push("queue.trace.csv");
            }
        }
    }
    report(9, mismatches.is_empty(), format!("3 experiments re-run twice from manifests, mismatches: {mismatches:?}"));
}
