//! Package C-state resolution, wake-up latencies, per-state power and
//! residency-weighted energy accounting.
//!
//! The resolution rules reduce the platform's entry conditions to a
//! boolean flag set:
//!
//! - C0: any core in CC0 or graphics in RC0
//! - C2: all cores >= CC3, graphics RC6, DRAM active
//! - C3: all cores >= CC3, graphics RC6, DRAM in self-refresh
//! - C6: all cores CC6, graphics RC6, DRAM in self-refresh
//! - C7: C6 and IO power-gated
//! - C8: C7 and the core VR may be switched off
//! - C9: C8 and display in PSR or off
//! - C10: C9 and all IPs off and display off
//!
//! The resolved state is the deepest whose conditions hold, clamped to
//! the platform's capability cap.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmu::PmuMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CoreCState {
    CC0,
    CC3,
    CC6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraphicsCState {
    RC0,
    RC6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DramState {
    Active,
    SelfRefresh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DisplayState {
    On,
    Psr,
    Off,
}

/// Component idle states the package resolution depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentStates {
    pub cores: Vec<CoreCState>,
    pub graphics: GraphicsCState,
    pub dram: DramState,
    pub io_power_gated: bool,
    pub core_vr_off_ok: bool,
    pub display: DisplayState,
    pub all_ips_off: bool,
}

impl ComponentStates {
    /// Deepest-idle component set: everything off, display off.
    pub fn deep_idle(n_cores: usize) -> ComponentStates {
        ComponentStates {
            cores: vec![CoreCState::CC6; n_cores],
            graphics: GraphicsCState::RC6,
            dram: DramState::SelfRefresh,
            io_power_gated: true,
            core_vr_off_ok: true,
            display: DisplayState::Off,
            all_ips_off: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PackageCState {
    C0,
    C2,
    C3,
    C6,
    C7,
    C8,
    C9,
    C10,
}

impl PackageCState {
    pub const ALL: [PackageCState; 8] = [
        PackageCState::C0,
        PackageCState::C2,
        PackageCState::C3,
        PackageCState::C6,
        PackageCState::C7,
        PackageCState::C8,
        PackageCState::C9,
        PackageCState::C10,
    ];

    /// Whether this state's full entry condition set holds.
    pub fn conditions_hold(&self, cs: &ComponentStates) -> bool {
        let all_cc3_or_deeper = cs.cores.iter().all(|c| *c >= CoreCState::CC3);
        let all_cc6 = cs.cores.iter().all(|c| *c == CoreCState::CC6);
        let gfx_idle = cs.graphics == GraphicsCState::RC6;
        match self {
            PackageCState::C0 => true,
            PackageCState::C2 => all_cc3_or_deeper && gfx_idle && cs.dram == DramState::Active,
            PackageCState::C3 => all_cc3_or_deeper && gfx_idle && cs.dram == DramState::SelfRefresh,
            PackageCState::C6 => all_cc6 && gfx_idle && cs.dram == DramState::SelfRefresh,
            PackageCState::C7 => PackageCState::C6.conditions_hold(cs) && cs.io_power_gated,
            PackageCState::C8 => PackageCState::C7.conditions_hold(cs) && cs.core_vr_off_ok,
            PackageCState::C9 => {
                PackageCState::C8.conditions_hold(cs) && cs.display != DisplayState::On
            }
            PackageCState::C10 => {
                PackageCState::C9.conditions_hold(cs)
                    && cs.all_ips_off
                    && cs.display == DisplayState::Off
            }
        }
    }
}

impl fmt::Display for PackageCState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PackageCState::C0 => "C0",
            PackageCState::C2 => "C2",
            PackageCState::C3 => "C3",
            PackageCState::C6 => "C6",
            PackageCState::C7 => "C7",
            PackageCState::C8 => "C8",
            PackageCState::C9 => "C9",
            PackageCState::C10 => "C10",
        };
        f.write_str(s)
    }
}

impl FromStr for PackageCState {
    type Err = Error;

    fn from_str(s: &str) -> Result<PackageCState> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C0" => Ok(PackageCState::C0),
            "C2" => Ok(PackageCState::C2),
            "C3" => Ok(PackageCState::C3),
            "C6" => Ok(PackageCState::C6),
            "C7" => Ok(PackageCState::C7),
            "C8" => Ok(PackageCState::C8),
            "C9" => Ok(PackageCState::C9),
            "C10" => Ok(PackageCState::C10),
            other => Err(Error::config(format!("unknown package C-state '{other}'"))),
        }
    }
}

/// Deepest package state whose conditions hold, clamped to the platform cap.
pub fn resolve_package_cstate(cs: &ComponentStates, platform_cap: PackageCState) -> PackageCState {
    let any_core_active = cs.cores.contains(&CoreCState::CC0);
    let gfx_active = cs.graphics == GraphicsCState::RC0;
    if any_core_active || gfx_active {
        return PackageCState::C0;
    }
    let mut deepest = PackageCState::C0;
    for state in PackageCState::ALL {
        if state.conditions_hold(cs) {
            deepest = state;
        }
    }
    deepest.min(platform_cap)
}

/// Per-mode package C-state power table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CStatePowerTable {
    pub normal_w: BTreeMap<PackageCState, f64>,
    pub bypass_w: BTreeMap<PackageCState, f64>,
}

impl CStatePowerTable {
    pub fn validate(&self) -> Result<()> {
        for (name, map) in [("normal", &self.normal_w), ("bypass", &self.bypass_w)] {
            if map.is_empty() {
                return Err(Error::config(format!("{name} c-state power table is empty")));
            }
            let mut prev: Option<f64> = None;
            for (state, w) in map {
                if *w < 0.0 {
                    return Err(Error::config(format!("{name} {state} power must be >= 0")));
                }
                if let Some(p) = prev {
                    if *w >= p {
                        return Err(Error::config(format!(
                            "{name} c-state power must strictly decrease with depth ({state})"
                        )));
                    }
                }
                prev = Some(*w);
            }
        }
        Ok(())
    }

    fn map(&self, mode: PmuMode) -> &BTreeMap<PackageCState, f64> {
        match mode {
            PmuMode::Normal => &self.normal_w,
            PmuMode::Bypass => &self.bypass_w,
        }
    }
}

pub fn cstate_power(state: PackageCState, mode: PmuMode, table: &CStatePowerTable) -> Result<f64> {
    table
        .map(mode)
        .get(&state)
        .copied()
        .ok_or_else(|| Error::config(format!("no {mode:?} power entry for package {state}")))
}

/// Entry/exit latencies per package state plus the core ungate latency
/// paid when waking power-gated cores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyTable {
    pub entries_s: BTreeMap<PackageCState, (f64, f64)>,
    pub core_ungate_s: f64,
}

impl LatencyTable {
    pub fn validate(&self) -> Result<()> {
        if self.core_ungate_s < 0.0 {
            return Err(Error::config("core ungate latency must be >= 0"));
        }
        let mut prev_exit = 0.0;
        for (state, (entry, exit)) in &self.entries_s {
            if *entry < 0.0 || *exit < 0.0 {
                return Err(Error::config(format!("negative latency for {state}")));
            }
            if *exit < prev_exit {
                return Err(Error::config(format!(
                    "exit latency of {state} must be >= shallower states"
                )));
            }
            prev_exit = *exit;
        }
        Ok(())
    }
}

/// Time to return to activity from a package state. Waking from C6 or
/// deeper in normal mode additionally pays the staggered core ungate
/// latency; bypass mode has no gates to reopen.
pub fn wake_cost(from: PackageCState, mode: PmuMode, table: &LatencyTable) -> Result<f64> {
    if from == PackageCState::C0 {
        return Ok(0.0);
    }
    let (_, exit) = table
        .entries_s
        .get(&from)
        .copied()
        .ok_or_else(|| Error::config(format!("no latency entry for package {from}")))?;
    let ungate = if mode == PmuMode::Normal && from >= PackageCState::C6 {
        table.core_ungate_s
    } else {
        0.0
    };
    Ok(exit + ungate)
}

/// Residency-weighted average power over a (state, duration) timeline.
/// Exit-latency slices are expected to be folded into the shallower
/// state's duration by the caller.
pub fn residency_average_power(
    timeline: &[(PackageCState, f64)],
    table: &CStatePowerTable,
    mode: PmuMode,
) -> Result<f64> {
    if timeline.is_empty() {
        return Err(Error::model("residency timeline is empty"));
    }
    let mut energy = 0.0;
    let mut time = 0.0;
    for (state, duration) in timeline {
        if !duration.is_finite() || *duration <= 0.0 {
            return Err(Error::model("residency durations must be > 0"));
        }
        energy += cstate_power(*state, mode, table)? * duration;
        time += duration;
    }
    Ok(energy / time)
}
