//! Electrical model of the power-delivery network.
//!
//! The network is a ladder seen from the die load node: the voltage
//! regulator's output resistance, an ordered chain of stages (board,
//! package, die), and the per-core branches carrying the power-gate,
//! die-grid resistance and MIM capacitance. Each stage shunts its
//! decoupling branch at the upstream node and then runs its series R/L
//! segment toward the die, so at high frequency a stage's capacitor
//! shorts out everything behind it.
//!
//! In the gated topology the load is observed at the first core branch;
//! the remaining branches are power-gated idle cores and do not load the
//! rail. Bypassing merges every branch into one parallel equivalent with
//! the gate resistance removed, which pools the MIM capacitance at the
//! shared load node.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// One ladder stage: series R/L toward the die plus a shunt decoupling
/// branch (C with ESR/ESL) at the stage's upstream node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdnStage {
    pub series_resistance_ohm: f64,
    pub series_inductance_h: f64,
    pub shunt_cap_f: f64,
    pub cap_esr_ohm: f64,
    pub cap_esl_h: f64,
}

impl PdnStage {
    fn validate(&self) -> Result<()> {
        let fields = [
            self.series_resistance_ohm,
            self.series_inductance_h,
            self.shunt_cap_f,
            self.cap_esr_ohm,
            self.cap_esl_h,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::model("pdn stage values must be finite and >= 0"));
        }
        if self.shunt_cap_f == 0.0 && (self.cap_esr_ohm != 0.0 || self.cap_esl_h != 0.0) {
            return Err(Error::model(
                "pdn stage with shunt_cap = 0 must have cap_esr = cap_esl = 0",
            ));
        }
        Ok(())
    }
}

/// Per-core branch hanging off the last ladder stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreBranch {
    pub gate_resistance_ohm: f64,
    pub die_grid_resistance_ohm: f64,
    pub mim_cap_f: f64,
    pub mim_esr_ohm: f64,
}

impl CoreBranch {
    fn validate(&self) -> Result<()> {
        let fields = [
            self.gate_resistance_ohm,
            self.die_grid_resistance_ohm,
            self.mim_cap_f,
            self.mim_esr_ohm,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::model("core branch values must be finite and >= 0"));
        }
        Ok(())
    }

    /// Series resistance from the rail to this core's load node.
    fn series_resistance(&self) -> f64 {
        self.gate_resistance_ohm + self.die_grid_resistance_ohm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Topology {
    Gated,
    Bypassed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdnNetwork {
    pub vr_output_resistance_ohm: f64,
    /// Ordered board -> package -> die.
    pub stages: Vec<PdnStage>,
    pub cores: Vec<CoreBranch>,
    pub topology: Topology,
}

impl PdnNetwork {
    pub fn validate(&self) -> Result<()> {
        if !self.vr_output_resistance_ohm.is_finite() || self.vr_output_resistance_ohm < 0.0 {
            return Err(Error::model("vr output resistance must be finite and >= 0"));
        }
        if self.stages.is_empty() {
            return Err(Error::model("pdn network needs at least one stage"));
        }
        if self.cores.is_empty() {
            return Err(Error::model("pdn network needs at least one core branch"));
        }
        for stage in &self.stages {
            stage.validate()?;
        }
        for core in &self.cores {
            core.validate()?;
        }
        match self.topology {
            Topology::Gated => {
                if self.cores.iter().any(|c| c.gate_resistance_ohm <= 0.0) {
                    return Err(Error::model(
                        "gated topology requires gate_resistance > 0 on every core branch",
                    ));
                }
            }
            Topology::Bypassed => {
                if self.cores.len() != 1 || self.cores[0].gate_resistance_ohm != 0.0 {
                    return Err(Error::model(
                        "bypassed topology must carry a single merged branch with zero gate resistance",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Merge the core branches into the single bypassed equivalent: gate
    /// resistances zeroed, grid resistances paralleled, MIM caps summed.
    pub fn bypass(&self) -> Result<PdnNetwork> {
        if self.topology == Topology::Bypassed {
            return Err(Error::model("network is already bypassed"));
        }
        self.validate()?;
        let merged = CoreBranch {
            gate_resistance_ohm: 0.0,
            die_grid_resistance_ohm: parallel_resistance(
                self.cores.iter().map(|c| c.die_grid_resistance_ohm),
            ),
            mim_cap_f: self.cores.iter().map(|c| c.mim_cap_f).sum(),
            mim_esr_ohm: parallel_resistance(self.cores.iter().map(|c| c.mim_esr_ohm)),
        };
        Ok(PdnNetwork {
            vr_output_resistance_ohm: self.vr_output_resistance_ohm,
            stages: self.stages.clone(),
            cores: vec![merged],
            topology: Topology::Bypassed,
        })
    }

    /// DC resistive path from the VR to the observed core load node.
    pub fn dc_resistance(&self) -> f64 {
        let stage_r: f64 = self.stages.iter().map(|s| s.series_resistance_ohm).sum();
        self.vr_output_resistance_ohm + stage_r + self.cores[0].series_resistance()
    }

    /// Driving-point impedance at the core load node, by complex ladder
    /// reduction from the VR side.
    pub fn impedance_at(&self, freq_hz: f64) -> Result<Complex64> {
        if !freq_hz.is_finite() || freq_hz <= 0.0 {
            return Err(Error::model(format!(
                "impedance frequency must be finite and > 0, got {freq_hz}"
            )));
        }
        self.validate()?;
        let jw = Complex64::new(0.0, TWO_PI * freq_hz);

        let mut z = Complex64::new(self.vr_output_resistance_ohm, 0.0);
        for stage in &self.stages {
            if stage.shunt_cap_f > 0.0 {
                let zc = Complex64::new(stage.cap_esr_ohm, 0.0)
                    + jw * stage.cap_esl_h
                    + (jw * stage.shunt_cap_f).inv();
                z = parallel(z, zc);
            }
            z += Complex64::new(stage.series_resistance_ohm, 0.0) + jw * stage.series_inductance_h;
        }

        let branch = &self.cores[0];
        z += Complex64::new(branch.series_resistance(), 0.0);
        if branch.mim_cap_f > 0.0 {
            let zmim = Complex64::new(branch.mim_esr_ohm, 0.0) + (jw * branch.mim_cap_f).inv();
            z = parallel(z, zmim);
        }

        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::model("network is singular at this frequency"));
        }
        if z.norm() == 0.0 && self.dc_resistance() == 0.0 {
            return Err(Error::model("network has all-zero elements"));
        }
        Ok(z)
    }

    pub fn impedance_sweep(
        &self,
        f_min_hz: f64,
        f_max_hz: f64,
        points: usize,
        spacing: SweepSpacing,
    ) -> Result<ImpedanceProfile> {
        if !f_min_hz.is_finite() || !f_max_hz.is_finite() || f_min_hz <= 0.0 || f_min_hz >= f_max_hz {
            return Err(Error::model(format!(
                "sweep bounds must satisfy 0 < f_min < f_max, got [{f_min_hz}, {f_max_hz}]"
            )));
        }
        if points < 2 {
            return Err(Error::model("sweep needs at least 2 points"));
        }
        let n = points as f64;
        let mut samples = Vec::with_capacity(points);
        for i in 0..points {
            let f = if i == 0 {
                f_min_hz
            } else if i == points - 1 {
                f_max_hz
            } else {
                match spacing {
                    SweepSpacing::Log => {
                        f_min_hz * (f_max_hz / f_min_hz).powf(i as f64 / (n - 1.0))
                    }
                    SweepSpacing::Linear => {
                        f_min_hz + (f_max_hz - f_min_hz) * i as f64 / (n - 1.0)
                    }
                }
            };
            let z = self.impedance_at(f)?;
            samples.push(ImpedanceSample {
                freq_hz: f,
                magnitude_ohm: z.norm(),
                phase_rad: z.arg(),
            });
        }
        Ok(ImpedanceProfile { samples })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepSpacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpedanceSample {
    pub freq_hz: f64,
    pub magnitude_ohm: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpedanceProfile {
    pub samples: Vec<ImpedanceSample>,
}

impl ImpedanceProfile {
    /// Sample with the maximal magnitude; ties break toward lower frequency.
    pub fn peak(&self) -> Result<ImpedanceSample> {
        let mut best: Option<ImpedanceSample> = None;
        for s in &self.samples {
            match best {
                Some(b) if s.magnitude_ohm <= b.magnitude_ohm => {}
                _ => best = Some(*s),
            }
        }
        best.ok_or_else(|| Error::model("peak of empty impedance profile"))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,mag_ohm,phase_rad\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.freq_hz, s.magnitude_ohm, s.phase_rad));
        }
        out
    }
}

fn parallel(a: Complex64, b: Complex64) -> Complex64 {
    let sum = a + b;
    if sum.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    a * b / sum
}

/// Parallel combination of resistances; any zero branch shorts the result.
fn parallel_resistance(values: impl Iterator<Item = f64>) -> f64 {
    let mut inv_sum = 0.0;
    for r in values {
        if r == 0.0 {
            return 0.0;
        }
        inv_sum += 1.0 / r;
    }
    if inv_sum == 0.0 {
        0.0
    } else {
        1.0 / inv_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stage_r(r: f64) -> PdnStage {
        PdnStage {
            series_resistance_ohm: r,
            series_inductance_h: 0.0,
            shunt_cap_f: 0.0,
            cap_esr_ohm: 0.0,
            cap_esl_h: 0.0,
        }
    }

    fn core(rpg: f64, grid: f64, mim: f64) -> CoreBranch {
        CoreBranch {
            gate_resistance_ohm: rpg,
            die_grid_resistance_ohm: grid,
            mim_cap_f: mim,
            mim_esr_ohm: 0.0,
        }
    }

    #[test]
    fn pure_resistive_network() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.0,
            stages: vec![stage_r(2e-3)],
            cores: vec![core(0.0, 0.0, 0.0)],
            topology: Topology::Bypassed,
        };
        let z = net.impedance_at(1e6).unwrap();
        assert!((z.norm() - 2e-3).abs() < 1e-12);
        assert!(z.arg().abs() < 1e-9);
    }

    #[test]
    fn shunt_cap_shorts_upstream_at_high_frequency() {
        // series R = 1 mOhm after an ideal 100 uF shunt: the cap shorts
        // everything behind it, leaving the series R.
        let net = PdnNetwork {
            vr_output_resistance_ohm: 5e-3,
            stages: vec![PdnStage {
                series_resistance_ohm: 1e-3,
                series_inductance_h: 0.0,
                shunt_cap_f: 100e-6,
                cap_esr_ohm: 0.0,
                cap_esl_h: 0.0,
            }],
            cores: vec![core(0.0, 0.0, 0.0)],
            topology: Topology::Bypassed,
        };
        let z = net.impedance_at(1e15).unwrap();
        assert!((z.norm() - 1e-3).abs() < 1e-9, "|Z| = {}", z.norm());
    }

    #[test]
    fn dc_resistance_series_sum() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.5e-3,
            stages: vec![stage_r(0.4e-3), stage_r(0.6e-3)],
            cores: vec![core(0.8e-3, 0.2e-3, 0.0), core(0.8e-3, 0.2e-3, 0.0)],
            topology: Topology::Gated,
        };
        assert!((net.dc_resistance() - 2.5e-3).abs() < 1e-15);
        let byp = net.bypass().unwrap();
        assert!((byp.dc_resistance() - 1.6e-3).abs() < 1e-15);
    }

    #[test]
    fn bypass_merges_equal_grids_in_parallel() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.0,
            stages: vec![stage_r(1e-3)],
            cores: vec![core(1e-3, 4e-3, 0.0); 4],
            topology: Topology::Gated,
        };
        let byp = net.bypass().unwrap();
        assert_eq!(byp.cores.len(), 1);
        assert_eq!(byp.cores[0].gate_resistance_ohm, 0.0);
        assert!((byp.cores[0].die_grid_resistance_ohm - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn bypass_sums_mim_caps() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.0,
            stages: vec![stage_r(1e-3)],
            cores: vec![core(1e-3, 1e-3, 10e-9), core(1e-3, 1e-3, 30e-9)],
            topology: Topology::Gated,
        };
        let byp = net.bypass().unwrap();
        assert!((byp.cores[0].mim_cap_f - 40e-9).abs() < 1e-18);
    }

    #[test]
    fn bypass_is_not_idempotent() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.0,
            stages: vec![stage_r(1e-3)],
            cores: vec![core(1e-3, 1e-3, 0.0)],
            topology: Topology::Gated,
        };
        let byp = net.bypass().unwrap();
        assert!(byp.bypass().is_err());
    }

    #[test]
    fn sweep_of_pure_r_network_is_flat() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 1e-3,
            stages: vec![stage_r(1e-3)],
            cores: vec![core(1e-3, 0.0, 0.0)],
            topology: Topology::Gated,
        };
        let profile = net.impedance_sweep(1e3, 1e9, 50, SweepSpacing::Log).unwrap();
        assert_eq!(profile.samples.len(), 50);
        for s in &profile.samples {
            assert!((s.magnitude_ohm - 3e-3).abs() < 1e-12);
        }
        // Constant profile peaks at the first sample (lowest frequency).
        let peak = profile.peak().unwrap();
        assert_eq!(peak.freq_hz, 1e3);
    }

    #[test]
    fn sweep_rejects_reversed_bounds() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 1e-3,
            stages: vec![stage_r(1e-3)],
            cores: vec![core(1e-3, 0.0, 0.0)],
            topology: Topology::Gated,
        };
        assert!(net.impedance_sweep(1e9, 1e3, 10, SweepSpacing::Log).is_err());
        assert!(net.impedance_sweep(1e3, 1e9, 1, SweepSpacing::Log).is_err());
    }

    #[test]
    fn peak_takes_direct_max() {
        let profile = ImpedanceProfile {
            samples: vec![
                ImpedanceSample { freq_hz: 1e3, magnitude_ohm: 1e-3, phase_rad: 0.0 },
                ImpedanceSample { freq_hz: 1e6, magnitude_ohm: 5e-3, phase_rad: 0.0 },
                ImpedanceSample { freq_hz: 1e9, magnitude_ohm: 2e-3, phase_rad: 0.0 },
            ],
        };
        let peak = profile.peak().unwrap();
        assert_eq!(peak.freq_hz, 1e6);
        assert_eq!(peak.magnitude_ohm, 5e-3);
    }

    #[test]
    fn peak_of_empty_profile_is_error() {
        let profile = ImpedanceProfile { samples: vec![] };
        assert!(profile.peak().is_err());
    }

    #[test]
    fn all_zero_network_is_singular() {
        let net = PdnNetwork {
            vr_output_resistance_ohm: 0.0,
            stages: vec![stage_r(0.0)],
            cores: vec![core(0.0, 0.0, 0.0)],
            topology: Topology::Bypassed,
        };
        assert!(net.impedance_at(1e6).is_err());
    }
}
