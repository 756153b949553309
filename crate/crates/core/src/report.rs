//! Report encodings: per-interval CSV stream, JSON summary, and the
//! comparison / sweep tables. CSV uses Rust's shortest round-trip float
//! formatting so both encodings carry identical numeric content.

use crate::error::Result;
use crate::sim::{CompareReport, SimReport, TdpSweepRow};

pub const INTERVAL_CSV_HEADER: &str = "t_ms,duration_ms,state,core_freq_mhz,core_voltage_v,\
setpoint_v,gfx_freq_mhz,gfx_voltage_v,dynamic_w,leakage_w,graphics_w,uncore_w,total_w,violations";

/// Per-interval stream, one row per simulated interval.
pub fn interval_csv(report: &SimReport) -> String {
    let mut out = String::from(INTERVAL_CSV_HEADER);
    out.push('\n');
    for r in &report.intervals {
        let (core_f, core_v, sp, gfx_f, gfx_v) = match &r.operating_point {
            Some(op) => (
                op.core_freq_hz / 1e6,
                op.core_voltage_v,
                op.setpoint_v,
                op.graphics_freq_hz / 1e6,
                op.graphics_voltage_v,
            ),
            None => (0.0, 0.0, 0.0, 0.0, 0.0),
        };
        let violations = r
            .violations
            .iter()
            .map(|v| format!("{:?}:{}", v.limit, v.exceeded_by))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.t_s * 1e3,
            r.duration_s * 1e3,
            r.package_state,
            core_f,
            core_v,
            sp,
            gfx_f,
            gfx_v,
            r.power.dynamic_w,
            r.power.leakage_w,
            r.power.graphics_w,
            r.power.uncore_w,
            r.power.total_w,
            violations
        ));
    }
    out
}

/// Violations stream: `interval,limit,amount`.
pub fn violations_csv(report: &SimReport) -> String {
    let mut out = String::from("interval,limit,amount\n");
    for (i, r) in report.intervals.iter().enumerate() {
        for v in &r.violations {
            out.push_str(&format!("{},{:?},{}\n", i, v.limit, v.exceeded_by));
        }
    }
    out
}

pub fn report_json(report: &SimReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report).map_err(std::io::Error::other)?)
}

pub fn summary_json(report: &SimReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&report.aggregates).map_err(std::io::Error::other)?)
}

pub fn compare_json(report: &CompareReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report).map_err(std::io::Error::other)?)
}

/// Two-column metric table for the mode comparison.
pub fn compare_csv(report: &CompareReport) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("tdp_w,{}\n", report.tdp_w));
    out.push_str(&format!("perf_delta_pct,{}\n", report.perf_delta_pct));
    out.push_str(&format!("avg_power_delta_pct,{}\n", report.avg_power_delta_pct));
    out.push_str(&format!("normal_perf,{}\n", report.normal.performance_score));
    out.push_str(&format!("bypass_perf,{}\n", report.bypass.performance_score));
    out.push_str(&format!("normal_avg_power_w,{}\n", report.normal.average_power_w));
    out.push_str(&format!("bypass_avg_power_w,{}\n", report.bypass.average_power_w));
    for (state, delta) in &report.residency_delta {
        out.push_str(&format!("residency_delta_{state},{delta}\n"));
    }
    out
}

pub fn sweep_csv(rows: &[TdpSweepRow]) -> String {
    let mut out = String::from("tdp_w,base_delta_pct,rate_delta_pct\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.tdp_w, r.base_delta_pct, r.rate_delta_pct));
    }
    out
}

pub fn sweep_json(rows: &[TdpSweepRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows).map_err(std::io::Error::other)?)
}
