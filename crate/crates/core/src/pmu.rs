//! Power-management firmware logic: fuse-selected mode, power-budget
//! management between cores and graphics, and per-interval DVFS
//! operating-point selection.
//!
//! DVFS picks the highest quantized shared core frequency that fits
//! under Vmax with the mode's full guardband stack and whose predicted
//! core-domain power fits the allocated budget. The same predictor is
//! reused for interval accounting, so a selected point can never violate
//! the limits it was chosen under.

use serde::Serialize;

use crate::cstates::CoreCState;
use crate::error::{Error, Result};
use crate::guardband::GuardbandModel;
use crate::power::{core_power, CorePower, CorePowerParams, DesignLimits};
use crate::vfmodel::{quantize_down, VfCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PmuMode {
    Normal,
    Bypass,
}

impl PmuMode {
    pub fn label(&self) -> &'static str {
        match self {
            PmuMode::Normal => "normal",
            PmuMode::Bypass => "bypass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Segment {
    Mobile,
    Desktop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeResolution {
    pub mode: PmuMode,
    /// Set when the fuse picks a mode the segment was not productized
    /// with (bypass belongs to desktop packages, normal to mobile).
    pub segment_mismatch: bool,
}

/// Mode is burned into a silicon fuse: 1 selects bypass, 0 normal.
pub fn resolve_mode(fuse_bypass: bool, segment: Segment) -> ModeResolution {
    let mode = if fuse_bypass { PmuMode::Bypass } else { PmuMode::Normal };
    let expected = match segment {
        Segment::Desktop => PmuMode::Bypass,
        Segment::Mobile => PmuMode::Normal,
    };
    ModeResolution { mode, segment_mismatch: mode != expected }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetSplit {
    pub cores_w: f64,
    pub graphics_w: f64,
    pub uncore_reserve_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub split: BudgetSplit,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Demand {
    pub cpu_intensity: f64,
    pub gfx_intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PbmParams {
    pub uncore_reserve_w: f64,
    /// CPU cores' share of the compute budget under graphics-dominant
    /// load (midpoint of the productized 10-20% range).
    pub cpu_share_gfx_dominant: f64,
}

impl Default for PbmParams {
    fn default() -> Self {
        PbmParams { uncore_reserve_w: 2.0, cpu_share_gfx_dominant: 0.15 }
    }
}

/// Split the TDP budget between cores, graphics and the uncore reserve.
/// In bypass mode the leakage floor of idle ungated cores is charged to
/// the cores' side before the split, shrinking what graphics can get.
pub fn pbm_allocate(
    tdp_w: f64,
    demand: &Demand,
    mode: PmuMode,
    leakage_floor_w: f64,
    params: &PbmParams,
) -> Result<Allocation> {
    if !tdp_w.is_finite() || tdp_w <= 0.0 {
        return Err(Error::model("tdp must be > 0"));
    }
    for x in [demand.cpu_intensity, demand.gfx_intensity] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::model("demand intensities must be in [0, 1]"));
        }
    }
    let uncore = params.uncore_reserve_w.min(tdp_w);
    let compute = (tdp_w - uncore).max(0.0);
    let floor = match mode {
        PmuMode::Bypass => leakage_floor_w.max(0.0),
        PmuMode::Normal => 0.0,
    };
    if floor >= tdp_w {
        return Ok(Allocation {
            split: BudgetSplit { cores_w: compute, graphics_w: 0.0, uncore_reserve_w: uncore },
            degenerate: true,
        });
    }
    let (cores, graphics) = if demand.gfx_intensity > demand.cpu_intensity {
        let cores = (params.cpu_share_gfx_dominant * compute + floor).min(compute);
        (cores, compute - cores)
    } else {
        let gfx_floor =
            (demand.gfx_intensity * (1.0 - params.cpu_share_gfx_dominant) * compute).min(compute);
        (compute - gfx_floor, gfx_floor)
    };
    Ok(Allocation {
        split: BudgetSplit { cores_w: cores, graphics_w: graphics, uncore_reserve_w: uncore },
        degenerate: false,
    })
}

/// Graphics-domain model: its own V/F curve and dynamic capacitance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphicsParams {
    pub cdyn_f: f64,
    pub curve: VfCurve,
}

impl GraphicsParams {
    pub fn validate(&self) -> Result<()> {
        if !self.cdyn_f.is_finite() || self.cdyn_f <= 0.0 {
            return Err(Error::model("graphics cdyn must be > 0"));
        }
        self.curve.validate()
    }
}

/// Per-core demand for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreDemand {
    pub active_fraction: f64,
    pub virus_level: u8,
}

/// Interval activity the PMU makes decisions from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Activity {
    pub cores: Vec<CoreDemand>,
    pub graphics_load: f64,
}

impl Activity {
    pub fn active_count(&self) -> usize {
        self.cores.iter().filter(|c| c.active_fraction > 0.0).count()
    }

    pub fn max_core_fraction(&self) -> f64 {
        self.cores.iter().map(|c| c.active_fraction).fold(0.0, f64::max)
    }

    pub fn graphics_dominant(&self) -> bool {
        self.graphics_load > self.max_core_fraction()
    }
}

/// Everything dvfs_select needs from the platform, already resolved for
/// the mode under evaluation.
#[derive(Debug, Clone)]
pub struct DvfsInputs<'a> {
    pub curve: &'a VfCurve,
    pub guardband: &'a GuardbandModel,
    /// Droop current step as a fraction of the active level's virus
    /// current.
    pub droop_fraction: f64,
    pub limits: &'a DesignLimits,
    pub power: &'a CorePowerParams,
    pub graphics: &'a GraphicsParams,
    /// Peak impedance of this mode's network.
    pub z_peak_ohm: f64,
    pub reliability_adder_v: f64,
    /// Fraction of the guardband stack that remains as sustained
    /// overvoltage at the load under typical (below-virus) current.
    pub sustained_gb_fraction: f64,
}

/// Predicted core-domain state at a candidate frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreDomainPrediction {
    pub setpoint_v: f64,
    pub v_load_v: f64,
    pub per_core: Vec<CorePower>,
    pub total_w: f64,
    pub icc_a: f64,
}

/// Package virus level implied by the number of active cores, clamped to
/// the table (1 core -> level 1, 2 -> 2, 3+ -> top level for a 3-level
/// table).
pub fn package_virus_level(active_count: usize, n_levels: usize) -> u8 {
    active_count.clamp(1, n_levels.max(1)) as u8
}

/// Guardband model with the droop step resolved for the active level and
/// the mode's reliability adder applied.
fn effective_guardband(inputs: &DvfsInputs, level_id: u8) -> Result<GuardbandModel> {
    let icc = inputs.guardband.level(level_id)?.icc_virus_a;
    let mut gb = inputs.guardband.with_droop_delta_i(inputs.droop_fraction * icc);
    gb.reliability_adder_v = inputs.reliability_adder_v;
    Ok(gb)
}

/// Sustained load voltage and per-core power at a candidate frequency.
/// Below the virus current the load-line leaves part of the guardband as
/// extra voltage at the load; the sustained fraction models how much of
/// the stack the adaptive positioning fails to recover.
pub fn predict_core_domain(
    inputs: &DvfsInputs,
    activity: &Activity,
    mode: PmuMode,
    level_id: u8,
    freq_hz: f64,
) -> Result<CoreDomainPrediction> {
    let gb = effective_guardband(inputs, level_id)?;
    let vnom = inputs.curve.vnom_at(freq_hz)?;
    let vgb = gb.guardband_above(level_id, inputs.z_peak_ohm)?;
    let setpoint = vnom + vgb;
    let v = (vnom + inputs.sustained_gb_fraction * vgb)
        .clamp(inputs.limits.vmin_v, inputs.limits.vmax_v);

    let mut per_core = Vec::with_capacity(activity.cores.len());
    for core in &activity.cores {
        let gated = core.active_fraction == 0.0 && mode == PmuMode::Normal;
        per_core.push(core_power(
            freq_hz,
            v,
            core.virus_level.max(1),
            core.active_fraction,
            gated,
            inputs.power,
            inputs.limits,
        )?);
    }
    let total_w: f64 = per_core.iter().map(|c| c.total()).sum();
    let icc_a = if v > 0.0 { total_w / v } else { 0.0 };
    Ok(CoreDomainPrediction { setpoint_v: setpoint, v_load_v: v, per_core, total_w, icc_a })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreOpState {
    pub active: bool,
    pub c_state: CoreCState,
    pub voltage_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// Shared clock: all cores run the same frequency.
    pub core_freq_hz: f64,
    /// Sustained load voltage on the shared core rail.
    pub core_voltage_v: f64,
    /// VR setpoint backing it (vnom + full guardband stack).
    pub setpoint_v: f64,
    pub virus_level: u8,
    pub cores: Vec<CoreOpState>,
    pub graphics_freq_hz: f64,
    pub graphics_voltage_v: f64,
    pub degenerate: bool,
}

/// Pick the operating point for one interval within the allocated
/// budgets. Deterministic: a pure function of its inputs.
pub fn dvfs_select(
    inputs: &DvfsInputs,
    budget: &BudgetSplit,
    activity: &Activity,
    mode: PmuMode,
) -> Result<OperatingPoint> {
    inputs.curve.validate()?;
    inputs.power.validate()?;
    let n_levels = inputs.guardband.levels.len();
    let level_id = package_virus_level(activity.active_count(), n_levels);
    let gb = effective_guardband(inputs, level_id)?;
    let vgb = gb.guardband_above(level_id, inputs.z_peak_ohm)?;

    let bin = inputs.curve.bin_hz;
    let f_min = inputs.curve.min_freq_hz();
    let mut degenerate = false;

    let (core_freq, prediction) = if activity.active_count() == 0 {
        // Graphics-only interval: cores idle on the shared rail at the
        // most energy-efficient frequency Pn.
        let f = f_min;
        (f, predict_core_domain(inputs, activity, mode, level_id, f)?)
    } else if activity.graphics_dominant() {
        // The active core runs the graphics driver at Pn.
        let f = f_min;
        let pred = predict_core_domain(inputs, activity, mode, level_id, f)?;
        if pred.total_w > budget.cores_w {
            degenerate = true;
        }
        (f, pred)
    } else {
        let fmax = inputs.curve.fmax_under_vmax(vgb, &inputs.limits.voltage())?;
        if fmax.degenerate {
            degenerate = true;
        }
        let icc_cap = inputs.limits.tdc_a.min(inputs.limits.edc_a);
        let mut chosen: Option<(f64, CoreDomainPrediction)> = None;
        let mut f = fmax.freq_hz;
        while f >= f_min - 1e-6 {
            let fq = f.max(f_min);
            let pred = predict_core_domain(inputs, activity, mode, level_id, fq)?;
            if pred.total_w <= budget.cores_w && pred.icc_a <= icc_cap {
                chosen = Some((fq, pred));
                break;
            }
            if fq <= f_min {
                break;
            }
            f = quantize_down(fq - 0.5 * bin, bin).max(f_min);
        }
        match chosen {
            Some(pick) => pick,
            None => {
                degenerate = true;
                let f = f_min;
                (f, predict_core_domain(inputs, activity, mode, level_id, f)?)
            }
        }
    };

    // Graphics frequency: highest quantized point within its budget.
    let (gfx_freq, gfx_voltage) = if activity.graphics_load > 0.0 {
        let gcurve = &inputs.graphics.curve;
        let gbin = gcurve.bin_hz;
        let gmin = gcurve.min_freq_hz();
        let mut chosen = None;
        let mut f = quantize_down(gcurve.max_freq_hz(), gbin).max(gmin);
        loop {
            let v = gcurve.vnom_at(f)?;
            let p = activity.graphics_load * inputs.graphics.cdyn_f * v * v * f;
            if p <= budget.graphics_w {
                chosen = Some((f, v));
                break;
            }
            if f <= gmin {
                break;
            }
            f = quantize_down(f - 0.5 * gbin, gbin).max(gmin);
        }
        match chosen {
            Some(pick) => pick,
            None => {
                degenerate = true;
                (gmin, gcurve.vnom_at(gmin)?)
            }
        }
    } else {
        (0.0, 0.0)
    };

    let cores = activity
        .cores
        .iter()
        .map(|c| {
            let active = c.active_fraction > 0.0;
            CoreOpState {
                active,
                c_state: if active { CoreCState::CC0 } else { CoreCState::CC6 },
                voltage_v: if active || mode == PmuMode::Bypass {
                    prediction.v_load_v
                } else {
                    0.0
                },
            }
        })
        .collect();

    Ok(OperatingPoint {
        core_freq_hz: core_freq,
        core_voltage_v: prediction.v_load_v,
        setpoint_v: prediction.setpoint_v,
        virus_level: level_id,
        cores,
        graphics_freq_hz: gfx_freq,
        graphics_voltage_v: gfx_voltage,
        degenerate,
    })
}
