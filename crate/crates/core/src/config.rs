//! Platform configuration: one sectioned key/value file describing the
//! PDN, guardband table, V/F curve, power model, graphics domain and
//! C-state tables. The shipped reference calibration is embedded and
//! exposed through [`PlatformConfig::reference`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::cstates::{CStatePowerTable, LatencyTable, PackageCState};
use crate::error::{Error, Result};
use crate::guardband::{GuardbandModel, LoadLine, VirusLevel};
use crate::pdn::{CoreBranch, PdnNetwork, PdnStage, SweepSpacing, Topology};
use crate::pmu::{resolve_mode, GraphicsParams, ModeResolution, PbmParams, PmuMode, Segment};
use crate::power::{CorePowerParams, DesignLimits};
use crate::vfmodel::VfCurve;

pub const REFERENCE_CONFIG: &str = include_str!("../assets/reference.cfg");

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
    pub spacing: SweepSpacing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStateConfig {
    pub cap_desktop_normal: PackageCState,
    pub cap_desktop_bypass: PackageCState,
    pub cap_mobile: PackageCState,
    pub power_table: CStatePowerTable,
    pub latency: LatencyTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlatformConfig {
    pub segment: Segment,
    pub fuse_bypass: bool,
    pub tdp_w: f64,
    pub limits: DesignLimits,
    pub pbm: PbmParams,
    pub pdn_gated: PdnNetwork,
    pub pdn_bypassed: PdnNetwork,
    pub sweep: SweepSpec,
    pub z_peak_gated_ohm: f64,
    pub z_peak_bypassed_ohm: f64,
    pub guardband: GuardbandModel,
    pub droop_fraction: f64,
    /// Fraction of the guardband stack sustained as load overvoltage at
    /// typical current (adaptive positioning inefficiency).
    pub sustained_gb_fraction: f64,
    pub vcc_min_v: f64,
    pub curve: VfCurve,
    pub power: CorePowerParams,
    pub graphics: GraphicsParams,
    pub cstates: CStateConfig,
}

impl PlatformConfig {
    /// The shipped reference calibration.
    pub fn reference() -> PlatformConfig {
        PlatformConfig::parse(REFERENCE_CONFIG)
            .expect("embedded reference config must parse and validate")
    }

    pub fn load(path: &Path) -> Result<PlatformConfig> {
        let text = std::fs::read_to_string(path)?;
        PlatformConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<PlatformConfig> {
        let doc = Document::parse(text)?;

        let segment = match doc.get("platform", "segment")? {
            "mobile" => Segment::Mobile,
            "desktop" => Segment::Desktop,
            other => return Err(Error::config(format!("unknown segment '{other}'"))),
        };
        let fuse_bypass = doc.get_f64("platform", "fuse_bypass")? != 0.0;
        let tdp_w = doc.get_f64("platform", "tdp_w")?;
        let pbm = PbmParams {
            uncore_reserve_w: doc.get_f64("platform", "uncore_reserve_w")?,
            cpu_share_gfx_dominant: doc.get_f64("platform", "cpu_share_gfx_dominant")?,
        };

        let limits = DesignLimits {
            tdp_w,
            tdc_a: doc.get_f64("limits", "tdc_a")?,
            edc_a: doc.get_f64("limits", "edc_a")?,
            vmax_v: doc.get_f64("limits", "vmax_v")?,
            vmin_v: doc.get_f64("limits", "vmin_v")?,
            tdc_window_s: doc.get_f64("limits", "tdc_window_s")?,
        };
        limits.validate()?;

        let mut stages = Vec::new();
        for row in doc.repeated("pdn", "stage") {
            let v = parse_f64_list(row, 5, "pdn stage")?;
            stages.push(PdnStage {
                series_resistance_ohm: v[0],
                series_inductance_h: v[1],
                shunt_cap_f: v[2],
                cap_esr_ohm: v[3],
                cap_esl_h: v[4],
            });
        }
        let mut cores = Vec::new();
        for row in doc.repeated("pdn", "core") {
            let v = parse_f64_list(row, 4, "pdn core")?;
            cores.push(CoreBranch {
                gate_resistance_ohm: v[0],
                die_grid_resistance_ohm: v[1],
                mim_cap_f: v[2],
                mim_esr_ohm: v[3],
            });
        }
        // The file describes the physical (gated) network; the bypassed
        // variant is derived by merging the core branches.
        if let Ok(topology) = doc.get("pdn", "topology") {
            if topology != "gated" {
                return Err(Error::config(
                    "[pdn] topology must be 'gated'; the bypassed network is derived",
                ));
            }
        }
        let pdn_gated = PdnNetwork {
            vr_output_resistance_ohm: doc.get_f64("pdn", "vr_resistance_ohm")?,
            stages,
            cores,
            topology: Topology::Gated,
        };
        pdn_gated.validate()?;
        let pdn_bypassed = pdn_gated.bypass()?;

        let sweep = SweepSpec {
            f_min_hz: doc.get_f64("sweep", "f_min_hz")?,
            f_max_hz: doc.get_f64("sweep", "f_max_hz")?,
            points: doc.get_f64("sweep", "points")? as usize,
            spacing: match doc.get("sweep", "spacing")? {
                "log" => SweepSpacing::Log,
                "linear" => SweepSpacing::Linear,
                other => return Err(Error::config(format!("unknown sweep spacing '{other}'"))),
            },
        };

        let z_peak_gated_ohm = peak_of(&pdn_gated, &sweep)?;
        let z_peak_bypassed_ohm = peak_of(&pdn_bypassed, &sweep)?;

        let droop_fraction = doc.get_f64("guardband", "droop_fraction")?;
        let vcc_min_v = doc.get_f64("guardband", "vcc_min_v")?;
        let mut levels = Vec::new();
        for (i, row) in doc.repeated("guardband", "level").iter().enumerate() {
            let v = parse_f64_list(row, 2, "guardband level")?;
            levels.push(VirusLevel {
                level_id: (i + 1) as u8,
                icc_virus_a: v[0],
                delta_v_v: v[1] * 1e-3,
            });
        }
        let top_icc = levels.last().map(|l| l.icc_virus_a).unwrap_or(0.0);
        let guardband = GuardbandModel {
            load_line: LoadLine { r_ll_ohm: doc.get_f64("guardband", "r_ll_ohm")? },
            levels,
            droop_delta_i_a: droop_fraction * top_icc,
            reliability_adder_v: 0.0,
        };
        guardband.validate()?;
        if !(0.0..=1.0).contains(&droop_fraction) {
            return Err(Error::config("droop_fraction must be in [0, 1]"));
        }

        let curve = parse_curve(&doc, "vf_curve")?;
        curve.validate()?;
        if curve.points.iter().any(|(_, v)| *v < limits.vmin_v) {
            return Err(Error::config("vf curve voltages must be >= vmin"));
        }
        if crate::vfmodel::quantize_down(curve.max_freq_hz(), curve.bin_hz) < curve.min_freq_hz() {
            return Err(Error::config("vf curve range does not cover one frequency bin"));
        }

        let power = CorePowerParams {
            cdyn_per_level_f: doc
                .get("power", "cdyn_nf")?
                .split(',')
                .map(|s| s.trim().parse::<f64>().map(|v| v * 1e-9))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::config(format!("bad cdyn_nf list: {e}")))?,
            ilkg_ref_a: doc.get_f64("power", "ilkg_ref_a")?,
            lkg_ref_v: doc.get_f64("power", "lkg_ref_v")?,
            lkg_voltage_exponent: doc.get_f64("power", "lkg_exponent")?,
            gated_residual_fraction: doc.get_f64("power", "gated_residual")?,
        };
        power.validate()?;
        let sustained_gb_fraction = doc.get_f64("power", "sustained_gb_fraction")?;
        if !(0.0..=1.0).contains(&sustained_gb_fraction) {
            return Err(Error::config("sustained_gb_fraction must be in [0, 1]"));
        }

        let graphics = GraphicsParams {
            cdyn_f: doc.get_f64("graphics", "cdyn_nf")? * 1e-9,
            curve: parse_curve(&doc, "graphics")?,
        };
        graphics.validate()?;

        let mut normal_w = BTreeMap::new();
        let mut bypass_w = BTreeMap::new();
        for row in doc.repeated("cstates", "power") {
            let (state, rest) = split_state_row(row)?;
            let v = parse_f64_list(rest, 2, "cstates power")?;
            normal_w.insert(state, v[0]);
            bypass_w.insert(state, v[1]);
        }
        let power_table = CStatePowerTable { normal_w, bypass_w };
        power_table.validate()?;

        let c7n = power_table.normal_w.get(&PackageCState::C7).copied().unwrap_or(0.0);
        let c7b = power_table.bypass_w.get(&PackageCState::C7).copied().unwrap_or(0.0);
        if c7n <= 0.0 || c7b / c7n <= 3.0 {
            return Err(Error::config(format!(
                "bypass C7 power must exceed 3x normal C7 power (got {c7b} / {c7n})"
            )));
        }

        let mut entries_s = BTreeMap::new();
        for row in doc.repeated("cstates", "latency") {
            let (state, rest) = split_state_row(row)?;
            let v = parse_f64_list(rest, 2, "cstates latency")?;
            entries_s.insert(state, (v[0] * 1e-6, v[1] * 1e-6));
        }
        let latency = LatencyTable {
            entries_s,
            core_ungate_s: doc.get_f64("cstates", "ungate_ns")? * 1e-9,
        };
        latency.validate()?;

        let cstates = CStateConfig {
            cap_desktop_normal: doc.get("cstates", "cap_desktop_normal")?.parse()?,
            cap_desktop_bypass: doc.get("cstates", "cap_desktop_bypass")?.parse()?,
            cap_mobile: doc.get("cstates", "cap_mobile")?.parse()?,
            power_table,
            latency,
        };

        Ok(PlatformConfig {
            segment,
            fuse_bypass,
            tdp_w,
            limits,
            pbm,
            pdn_gated,
            pdn_bypassed,
            sweep,
            z_peak_gated_ohm,
            z_peak_bypassed_ohm,
            guardband,
            droop_fraction,
            sustained_gb_fraction,
            vcc_min_v,
            curve,
            power,
            graphics,
            cstates,
        })
    }

    pub fn resolve_mode(&self) -> ModeResolution {
        resolve_mode(self.fuse_bypass, self.segment)
    }

    pub fn with_tdp(&self, tdp_w: f64) -> Result<PlatformConfig> {
        if !tdp_w.is_finite() || tdp_w <= 0.0 {
            return Err(Error::config("tdp must be > 0"));
        }
        let mut cfg = self.clone();
        cfg.tdp_w = tdp_w;
        cfg.limits.tdp_w = tdp_w;
        Ok(cfg)
    }

    pub fn n_cores(&self) -> usize {
        self.pdn_gated.cores.len()
    }

    pub fn pdn(&self, mode: PmuMode) -> &PdnNetwork {
        match mode {
            PmuMode::Normal => &self.pdn_gated,
            PmuMode::Bypass => &self.pdn_bypassed,
        }
    }

    pub fn z_peak(&self, mode: PmuMode) -> f64 {
        match mode {
            PmuMode::Normal => self.z_peak_gated_ohm,
            PmuMode::Bypass => self.z_peak_bypassed_ohm,
        }
    }

    /// Deepest supported package C-state for the segment and mode.
    pub fn cstate_cap(&self, mode: PmuMode) -> PackageCState {
        match (self.segment, mode) {
            (Segment::Mobile, _) => self.cstates.cap_mobile,
            (Segment::Desktop, PmuMode::Normal) => self.cstates.cap_desktop_normal,
            (Segment::Desktop, PmuMode::Bypass) => self.cstates.cap_desktop_bypass,
        }
    }
}

fn peak_of(net: &PdnNetwork, sweep: &SweepSpec) -> Result<f64> {
    let profile = net.impedance_sweep(sweep.f_min_hz, sweep.f_max_hz, sweep.points, sweep.spacing)?;
    Ok(profile.peak()?.magnitude_ohm)
}

fn parse_curve(doc: &Document, section: &str) -> Result<VfCurve> {
    let mut points = Vec::new();
    for row in doc.repeated(section, "knot") {
        let v = parse_f64_list(row, 2, "curve knot")?;
        points.push((v[0] * 1e6, v[1] * 1e-3));
    }
    Ok(VfCurve { points, bin_hz: doc.get_f64(section, "bin_mhz")? * 1e6 })
}

fn split_state_row(row: &str) -> Result<(PackageCState, &str)> {
    let (state, rest) = row
        .split_once(',')
        .ok_or_else(|| Error::config(format!("expected 'state, ...' row, got '{row}'")))?;
    Ok((state.parse()?, rest))
}

fn parse_f64_list(row: &str, expect: usize, what: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        row.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| Error::config(format!("bad {what} row '{row}': {e}")))?;
    if values.len() != expect {
        return Err(Error::config(format!(
            "{what} row needs {expect} values, got {} in '{row}'",
            values.len()
        )));
    }
    Ok(values)
}

/// Sectioned key/value text. Keys may repeat within a section; order is
/// preserved.
struct Document {
    rows: Vec<(String, String, String)>,
}

impl Document {
    fn parse(text: &str) -> Result<Document> {
        let mut rows = Vec::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((head, _)) => head.trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(format!("line {}: unterminated section", lineno + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            if section.is_empty() {
                return Err(Error::config(format!("line {}: key outside any section", lineno + 1)));
            }
            rows.push((section.clone(), key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Document { rows })
    }

    fn get(&self, section: &str, key: &str) -> Result<&str> {
        self.rows
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
            .ok_or_else(|| Error::config(format!("missing [{section}] {key}")))
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<f64> {
        self.get(section, key)?
            .parse()
            .map_err(|e| Error::config(format!("[{section}] {key}: {e}")))
    }

    fn repeated(&self, section: &str, key: &str) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
            .collect()
    }
}
