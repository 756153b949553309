//! Active/leakage power model and enforcement of the platform design
//! limits (TDP, TDC, EDC, Vmax, Vmin).

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vfmodel::VoltageLimits;

/// Per-core power model parameters. `cdyn_per_level_f[i]` is the dynamic
/// capacitance a core exercises at virus level i+1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorePowerParams {
    pub cdyn_per_level_f: Vec<f64>,
    pub ilkg_ref_a: f64,
    pub lkg_ref_v: f64,
    pub lkg_voltage_exponent: f64,
    /// Fraction of leakage that survives power gating.
    pub gated_residual_fraction: f64,
}

impl CorePowerParams {
    pub fn validate(&self) -> Result<()> {
        if self.cdyn_per_level_f.is_empty() {
            return Err(Error::model("need at least one cdyn level"));
        }
        for pair in self.cdyn_per_level_f.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::model("cdyn must be strictly increasing with level"));
            }
        }
        if self.cdyn_per_level_f[0] <= 0.0 {
            return Err(Error::model("cdyn must be > 0"));
        }
        if self.ilkg_ref_a < 0.0 || !self.lkg_ref_v.is_finite() || self.lkg_ref_v <= 0.0 {
            return Err(Error::model("leakage reference values out of range"));
        }
        if !(0.0..=1.0).contains(&self.gated_residual_fraction) {
            return Err(Error::model("gated residual fraction must be in [0, 1]"));
        }
        Ok(())
    }

    pub fn cdyn_for_level(&self, level_id: u8) -> Result<f64> {
        if level_id == 0 {
            return Err(Error::model("virus levels start at 1"));
        }
        self.cdyn_per_level_f
            .get(level_id as usize - 1)
            .copied()
            .ok_or_else(|| Error::model(format!("no cdyn entry for virus level {level_id}")))
    }

    /// Leakage current at voltage v: ilkg_ref * (v / v_ref) ^ exponent.
    pub fn ilkg_at(&self, v: f64) -> f64 {
        self.ilkg_ref_a * (v / self.lkg_ref_v).powf(self.lkg_voltage_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignLimits {
    pub tdp_w: f64,
    pub tdc_a: f64,
    pub edc_a: f64,
    pub vmax_v: f64,
    pub vmin_v: f64,
    /// Averaging window for the sustained-current (TDC) check.
    pub tdc_window_s: f64,
}

impl DesignLimits {
    pub fn validate(&self) -> Result<()> {
        if self.tdp_w <= 0.0 || self.tdc_a <= 0.0 || self.edc_a <= 0.0 {
            return Err(Error::model("design limits must be positive"));
        }
        if self.edc_a < self.tdc_a {
            return Err(Error::model("EDC must be >= TDC"));
        }
        if !self.tdc_window_s.is_finite() || self.tdc_window_s <= 0.0 {
            return Err(Error::model("tdc window must be > 0"));
        }
        self.voltage().validate()
    }

    pub fn voltage(&self) -> VoltageLimits {
        VoltageLimits { vmax_v: self.vmax_v, vmin_v: self.vmin_v }
    }
}

/// One core's slice of the power breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct CorePower {
    pub dynamic_w: f64,
    pub leakage_w: f64,
}

impl CorePower {
    pub fn total(&self) -> f64 {
        self.dynamic_w + self.leakage_w
    }
}

/// Dynamic + leakage power of one core at an operating point.
pub fn core_power(
    freq_hz: f64,
    v: f64,
    level_id: u8,
    active_fraction: f64,
    gated: bool,
    params: &CorePowerParams,
    limits: &DesignLimits,
) -> Result<CorePower> {
    if freq_hz < 0.0 {
        return Err(Error::model("frequency must be >= 0"));
    }
    if !(0.0..=1.0).contains(&active_fraction) {
        return Err(Error::model("active fraction must be in [0, 1]"));
    }
    if v < limits.vmin_v - 1e-12 || v > limits.vmax_v + 1e-12 {
        return Err(Error::model(format!(
            "core voltage {v:.4} V outside [{:.3}, {:.3}] V",
            limits.vmin_v, limits.vmax_v
        )));
    }
    let cdyn = params.cdyn_for_level(level_id)?;
    let dynamic_w = active_fraction * cdyn * v * v * freq_hz;
    let gate_scale = if gated { params.gated_residual_fraction } else { 1.0 };
    let leakage_w = params.ilkg_at(v) * v * gate_scale;
    Ok(CorePower { dynamic_w, leakage_w })
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PowerBreakdown {
    pub dynamic_w: f64,
    pub leakage_w: f64,
    pub per_core: Vec<CorePower>,
    pub graphics_w: f64,
    pub uncore_w: f64,
    pub total_w: f64,
}

impl PowerBreakdown {
    /// Assemble a breakdown from parts; the total is their sum.
    pub fn assemble(per_core: Vec<CorePower>, graphics_w: f64, uncore_w: f64) -> PowerBreakdown {
        let dynamic_w: f64 = per_core.iter().map(|c| c.dynamic_w).sum();
        let leakage_w: f64 = per_core.iter().map(|c| c.leakage_w).sum();
        PowerBreakdown {
            dynamic_w,
            leakage_w,
            per_core,
            graphics_w,
            uncore_w,
            total_w: dynamic_w + leakage_w + graphics_w + uncore_w,
        }
    }

    pub fn cores_w(&self) -> f64 {
        self.dynamic_w + self.leakage_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitKind {
    Tdp,
    Tdc,
    Edc,
    Vmax,
    Vmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitViolation {
    pub limit: LimitKind,
    pub exceeded_by: f64,
}

/// One violation per exceeded limit. TDC judges the sustained (windowed)
/// current, EDC the instantaneous interval current.
pub fn check_limits(
    breakdown: &PowerBreakdown,
    icc_sustained_a: f64,
    icc_instant_a: f64,
    v: f64,
    limits: &DesignLimits,
) -> Vec<LimitViolation> {
    let mut out = Vec::new();
    if breakdown.total_w > limits.tdp_w {
        out.push(LimitViolation { limit: LimitKind::Tdp, exceeded_by: breakdown.total_w - limits.tdp_w });
    }
    if icc_sustained_a > limits.tdc_a {
        out.push(LimitViolation { limit: LimitKind::Tdc, exceeded_by: icc_sustained_a - limits.tdc_a });
    }
    if icc_instant_a > limits.edc_a {
        out.push(LimitViolation { limit: LimitKind::Edc, exceeded_by: icc_instant_a - limits.edc_a });
    }
    if v > limits.vmax_v {
        out.push(LimitViolation { limit: LimitKind::Vmax, exceeded_by: v - limits.vmax_v });
    }
    if v < limits.vmin_v {
        out.push(LimitViolation { limit: LimitKind::Vmin, exceeded_by: limits.vmin_v - v });
    }
    out
}

/// Rolling current average over a fixed time window, for the TDC check.
#[derive(Debug, Clone, Default)]
pub struct CurrentWindow {
    window_s: f64,
    samples: VecDeque<(f64, f64)>,
    total_s: f64,
}

impl CurrentWindow {
    pub fn new(window_s: f64) -> CurrentWindow {
        CurrentWindow { window_s, samples: VecDeque::new(), total_s: 0.0 }
    }

    pub fn push(&mut self, duration_s: f64, current_a: f64) {
        self.samples.push_back((duration_s, current_a));
        self.total_s += duration_s;
        while let Some(&(d, _)) = self.samples.front() {
            if self.total_s - d >= self.window_s {
                self.samples.pop_front();
                self.total_s -= d;
            } else {
                break;
            }
        }
    }

    /// Duration-weighted average over the retained window.
    pub fn average(&self) -> f64 {
        if self.total_s == 0.0 {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|(d, a)| d * a).sum();
        sum / self.total_s
    }
}
