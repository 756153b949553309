//! Operating-voltage setpoint math: load-line, multi-level power-virus
//! table, AC droop guardband and reliability adders.
//!
//! The setpoint decomposes additively: the IR term compensates the
//! load-line drop at the level's virus current, the droop term covers
//! transients as peak impedance times the worst-case current step, and
//! the reliability adder covers lifetime stress in bypass mode. The
//! droop term is linear in peak impedance, so halving the impedance
//! halves that guardband component exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmu::PmuMode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadLine {
    pub r_ll_ohm: f64,
}

impl LoadLine {
    pub fn validate(&self) -> Result<()> {
        if !self.r_ll_ohm.is_finite() || self.r_ll_ohm <= 0.0 {
            return Err(Error::model("load-line resistance must be > 0"));
        }
        Ok(())
    }
}

/// Vcc_load = Vcc - R_LL * Icc, the voltage arriving at the load for a
/// given VR output voltage and current.
pub fn load_line_voltage(vcc_v: f64, icc_a: f64, ll: &LoadLine) -> Result<f64> {
    ll.validate()?;
    if !vcc_v.is_finite() || vcc_v <= 0.0 || icc_a < 0.0 {
        return Err(Error::model("load_line_voltage needs vcc > 0 and icc >= 0"));
    }
    let v = vcc_v - ll.r_ll_ohm * icc_a;
    if v <= 0.0 {
        return Err(Error::model(format!(
            "setpoint infeasible: load voltage {v:.4} V <= 0"
        )));
    }
    Ok(v)
}

/// One power-virus level: the worst-case current for a system state and
/// the guardband step added when entering this level from the one below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirusLevel {
    pub level_id: u8,
    pub icc_virus_a: f64,
    pub delta_v_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuardbandModel {
    pub load_line: LoadLine,
    /// Ordered by level_id, icc strictly increasing.
    pub levels: Vec<VirusLevel>,
    /// Worst-case current step for the AC droop term.
    pub droop_delta_i_a: f64,
    pub reliability_adder_v: f64,
}

impl GuardbandModel {
    pub fn validate(&self) -> Result<()> {
        self.load_line.validate()?;
        if self.levels.is_empty() {
            return Err(Error::model("guardband model needs at least one virus level"));
        }
        for pair in self.levels.windows(2) {
            if pair[1].level_id <= pair[0].level_id {
                return Err(Error::model("virus level ids must be strictly increasing"));
            }
            if pair[1].icc_virus_a <= pair[0].icc_virus_a {
                return Err(Error::model("icc_virus must be strictly increasing with level"));
            }
        }
        if self.levels.iter().any(|l| l.delta_v_v < 0.0 || l.icc_virus_a <= 0.0) {
            return Err(Error::model("virus levels need icc > 0 and delta_v >= 0"));
        }
        if self.droop_delta_i_a < 0.0 || self.reliability_adder_v < 0.0 {
            return Err(Error::model("droop step and reliability adder must be >= 0"));
        }
        Ok(())
    }

    pub fn level(&self, level_id: u8) -> Result<&VirusLevel> {
        self.levels
            .iter()
            .find(|l| l.level_id == level_id)
            .ok_or_else(|| Error::model(format!("unknown virus level {level_id}")))
    }

    /// Copy of this model with the droop current step replaced, used when
    /// the step is derived per level.
    pub fn with_droop_delta_i(&self, droop_delta_i_a: f64) -> GuardbandModel {
        GuardbandModel {
            droop_delta_i_a,
            ..self.clone()
        }
    }

    /// Total guardband stack above the minimum functional voltage for one
    /// virus level: IR term + droop term + reliability adder.
    pub fn guardband_above(&self, level_id: u8, z_peak_ohm: f64) -> Result<f64> {
        let level = self.level(level_id)?;
        if z_peak_ohm < 0.0 {
            return Err(Error::model("z_peak must be >= 0"));
        }
        Ok(self.load_line.r_ll_ohm * level.icc_virus_a
            + z_peak_ohm * self.droop_delta_i_a
            + self.reliability_adder_v)
    }

    /// VR voltage setpoint keeping the load above vcc_min under the
    /// level's power virus with droop and reliability margins. Whether the
    /// result exceeds Vmax is for the caller to judge (it may lower the
    /// frequency instead).
    pub fn vr_setpoint(&self, vcc_min_v: f64, level_id: u8, z_peak_ohm: f64) -> Result<f64> {
        if !vcc_min_v.is_finite() || vcc_min_v <= 0.0 {
            return Err(Error::model("vcc_min must be > 0"));
        }
        Ok(vcc_min_v + self.guardband_above(level_id, z_peak_ohm)?)
    }

    /// Signed guardband delta when moving between levels: sum of delta_v
    /// over the levels crossed, negated when descending.
    pub fn level_transition_delta(&self, from_id: u8, to_id: u8) -> Result<f64> {
        self.level(from_id)?;
        self.level(to_id)?;
        if from_id == to_id {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if from_id < to_id {
            (from_id, to_id, 1.0)
        } else {
            (to_id, from_id, -1.0)
        };
        let sum: f64 = self
            .levels
            .iter()
            .filter(|l| l.level_id > lo && l.level_id <= hi)
            .map(|l| l.delta_v_v)
            .sum();
        Ok(sign * sum)
    }
}

/// Additional reliability guardband required in bypass mode, linearly
/// interpolated between the 35 W and 91 W calibration points.
pub fn reliability_adder_for(tdp_w: f64, mode: PmuMode) -> Result<f64> {
    const TDP_LO: f64 = 35.0;
    const TDP_HI: f64 = 91.0;
    const ADDER_LO: f64 = 20e-3;
    const ADDER_HI: f64 = 5e-3;
    if !(TDP_LO..=TDP_HI).contains(&tdp_w) {
        return Err(Error::model(format!(
            "tdp {tdp_w} W outside supported range [{TDP_LO}, {TDP_HI}]"
        )));
    }
    match mode {
        PmuMode::Normal => Ok(0.0),
        PmuMode::Bypass => {
            let t = (tdp_w - TDP_LO) / (TDP_HI - TDP_LO);
            let adder = ADDER_LO + t * (ADDER_HI - ADDER_LO);
            Ok(adder.clamp(ADDER_HI, ADDER_LO))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> GuardbandModel {
        GuardbandModel {
            load_line: LoadLine { r_ll_ohm: 2e-3 },
            levels: vec![
                VirusLevel { level_id: 1, icc_virus_a: 55.0, delta_v_v: 110e-3 },
                VirusLevel { level_id: 2, icc_virus_a: 70.0, delta_v_v: 30e-3 },
                VirusLevel { level_id: 3, icc_virus_a: 100.0, delta_v_v: 60e-3 },
            ],
            droop_delta_i_a: 40.0,
            reliability_adder_v: 0.0,
        }
    }

    #[test]
    fn load_line_direct_evaluation() {
        let ll = LoadLine { r_ll_ohm: 2.0e-3 };
        let v = load_line_voltage(1.0, 50.0, &ll).unwrap();
        assert!((v - 0.9).abs() < 1e-12);
    }

    #[test]
    fn load_line_identity_at_zero_current() {
        let ll = LoadLine { r_ll_ohm: 2.0e-3 };
        let v = load_line_voltage(1.0, 0.0, &ll).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn load_line_upper_rll() {
        let ll = LoadLine { r_ll_ohm: 2.4e-3 };
        let v = load_line_voltage(1.1, 100.0, &ll).unwrap();
        assert!((v - 0.86).abs() < 1e-12);
    }

    #[test]
    fn load_line_infeasible_errors() {
        let ll = LoadLine { r_ll_ohm: 2.0e-3 };
        assert!(load_line_voltage(0.1, 100.0, &ll).is_err());
    }

    #[test]
    fn setpoint_ir_term_only() {
        let gb = GuardbandModel {
            load_line: LoadLine { r_ll_ohm: 2e-3 },
            levels: vec![VirusLevel { level_id: 1, icc_virus_a: 100.0, delta_v_v: 0.0 }],
            droop_delta_i_a: 0.0,
            reliability_adder_v: 0.0,
        };
        let v = gb.vr_setpoint(0.7, 1, 0.0).unwrap();
        assert!((v - 0.9).abs() < 1e-12);
    }

    #[test]
    fn droop_term_linear_in_z_peak() {
        let gb = model();
        let hi = gb.vr_setpoint(0.7, 3, 10e-3).unwrap();
        let lo = gb.vr_setpoint(0.7, 3, 5e-3).unwrap();
        assert!((hi - lo - 0.2).abs() < 1e-12);
    }

    #[test]
    fn transition_delta_matches_table() {
        let gb = model();
        let d = gb.level_transition_delta(1, 2).unwrap();
        assert!((d - 30e-3).abs() < 1e-15);
        assert_eq!(gb.level_transition_delta(2, 2).unwrap(), 0.0);
        let up = gb.level_transition_delta(1, 3).unwrap();
        let down = gb.level_transition_delta(3, 1).unwrap();
        assert!((up + down).abs() < 1e-15);
        assert!((up - 90e-3).abs() < 1e-15);
        assert!(gb.level_transition_delta(1, 9).is_err());
    }

    #[test]
    fn reliability_adder_endpoints() {
        assert!((reliability_adder_for(91.0, PmuMode::Bypass).unwrap() - 5e-3).abs() < 1e-12);
        assert!((reliability_adder_for(35.0, PmuMode::Bypass).unwrap() - 20e-3).abs() < 1e-12);
        assert_eq!(reliability_adder_for(65.0, PmuMode::Normal).unwrap(), 0.0);
        assert!(reliability_adder_for(20.0, PmuMode::Bypass).is_err());
        assert!(reliability_adder_for(120.0, PmuMode::Normal).is_err());
    }

    #[test]
    fn reliability_adder_non_increasing_in_tdp() {
        let mut prev = f64::INFINITY;
        for tdp in [35.0, 45.0, 55.0, 65.0, 78.0, 91.0] {
            let a = reliability_adder_for(tdp, PmuMode::Bypass).unwrap();
            assert!(a <= prev);
            prev = a;
        }
    }

    #[test]
    fn setpoint_round_trips_through_load_line() {
        // Backing the IR drop out of the setpoint at the virus current
        // recovers vcc_min plus the droop and reliability terms.
        let gb = model();
        let z_peak = 5e-3;
        for level in [1u8, 2, 3] {
            let icc = gb.level(level).unwrap().icc_virus_a;
            let sp = gb.vr_setpoint(0.7, level, z_peak).unwrap();
            let at_load = load_line_voltage(sp, icc, &gb.load_line).unwrap();
            let droop = z_peak * gb.droop_delta_i_a;
            assert!((at_load - droop - gb.reliability_adder_v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn setpoint_monotone_in_each_term() {
        let gb = model();
        let base = gb.vr_setpoint(0.7, 2, 5e-3).unwrap();
        assert!(gb.vr_setpoint(0.7, 3, 5e-3).unwrap() > base);
        assert!(gb.vr_setpoint(0.7, 2, 6e-3).unwrap() > base);
        assert!(gb.with_droop_delta_i(50.0).vr_setpoint(0.7, 2, 5e-3).unwrap() > base);
        let mut adder = gb.clone();
        adder.reliability_adder_v = 5e-3;
        assert!(adder.vr_setpoint(0.7, 2, 5e-3).unwrap() > base);
    }
}
