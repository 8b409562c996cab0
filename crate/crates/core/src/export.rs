//! CSV writers. Floats use Rust's shortest round-trip formatting, missing values are
//! empty fields and quoting follows RFC 4180.

use std::io::Write;

use crate::error::Result;
use crate::experiments::{DelaySweep, OperatingPoint, SweepResult};
use crate::queueing::QueueTrace;

const POINT_FIELDS: [&str; 12] = [
    "alpha",
    "a_max",
    "throughput_total",
    "throughput_hc",
    "p_out_h",
    "p_out_l",
    "r_h",
    "r_l",
    "p_h_d",
    "p_h_r",
    "p_l_d",
    "p_l_r",
];

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn point_fields(p: Option<&OperatingPoint>) -> Vec<String> {
    match p {
        Some(p) => [
            p.alpha,
            p.a_max,
            p.throughput_total,
            p.throughput_hc,
            p.p_out_h,
            p.p_out_l,
            p.r_h,
            p.r_l,
            p.p.p_h_d,
            p.p.p_h_r,
            p.p.p_l_d,
            p.p.p_l_r,
        ]
        .into_iter()
        .map(num)
        .collect(),
        None => vec![String::new(); POINT_FIELDS.len()],
    }
}

/// Case names of a sweep in first-appearance order.
fn cases(sweep: &SweepResult) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for r in &sweep.rows {
        if !out.contains(&r.case.as_str()) {
            out.push(&r.case);
        }
    }
    out
}

/// One row per grid value: `index`, the swept parameter, then `{case}_{field}` for
/// every case, then `w_r`, `g_r` and `note`.
pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cases = cases(sweep);
    let mut header = vec!["index".to_string(), sweep.parameter.clone()];
    for c in &cases {
        header.extend(POINT_FIELDS.iter().map(|f| format!("{c}_{f}")));
    }
    header.extend(["w_r", "g_r", "note"].map(String::from));
    w.write_record(&header)?;

    for (i, &value) in sweep.grid.iter().enumerate() {
        let rows: Vec<_> = sweep.rows.iter().filter(|r| r.index == i).collect();
        let mut rec = vec![i.to_string(), num(value)];
        for c in &cases {
            let point = rows.iter().find(|r| r.case == *c).and_then(|r| r.point.as_ref());
            rec.extend(point_fields(point));
        }
        let first = rows.first();
        rec.push(opt(first.and_then(|r| r.w_r)));
        rec.push(opt(first.and_then(|r| r.g_r)));
        rec.push(rows.iter().find_map(|r| r.note.clone()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per `α`.
pub fn write_delay_csv<W: Write>(out: W, sweep: &DelaySweep) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha", "a_max", "tau_h", "tau_l", "tau", "peak_h", "peak_l", "decode_h", "decode_l", "slope_h", "slope_l",
        "stable",
    ])?;
    for p in &sweep.points {
        w.write_record([
            num(p.alpha),
            num(p.a_max),
            opt(p.tau_h),
            opt(p.tau_l),
            opt(p.tau),
            opt(p.peak_h),
            opt(p.peak_l),
            num(p.decode_h),
            num(p.decode_l),
            num(p.slope_h),
            num(p.slope_l),
            u8::from(p.stable).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-slot trace; `xi_*` are 0/1 decode indicators.
pub fn write_trace_csv<W: Write>(out: W, trace: &QueueTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "arrivals", "q_h", "q_l", "xi_h", "xi_l"])?;
    for t in 0..trace.len() {
        w.write_record([
            t.to_string(),
            num(trace.arrivals[t]),
            num(trace.q_h[t]),
            num(trace.q_l[t]),
            u8::from(trace.xi_h[t]).to_string(),
            u8::from(trace.xi_l[t]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
