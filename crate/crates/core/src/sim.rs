//! Trace-driven engine composing all models per interval, workload
//! generators, and the mode-comparison experiments.
//!
//! Each interval either idles (resolving a package C-state and charging
//! its table power) or runs: budget allocation, DVFS selection, power
//! accounting and limit checks. Performance accrues per core as
//! duration / (w_cpu / f + w_mem), where the split between
//! frequency-scaled and frequency-independent time comes from the
//! core's memory fraction; graphics work accrues proportionally to the
//! achieved graphics frequency.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::PlatformConfig;
use crate::cstates::{
    cstate_power, resolve_package_cstate, wake_cost, ComponentStates, DisplayState, PackageCState,
};
use crate::error::{Error, Result};
use crate::guardband::reliability_adder_for;
use crate::pmu::{
    dvfs_select, pbm_allocate, Activity, CoreDemand, Demand, DvfsInputs, OperatingPoint, PmuMode,
};
use crate::power::{check_limits, CurrentWindow, LimitViolation, PowerBreakdown};

/// Per-core activity within one trace interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoreActivity {
    pub active_fraction: f64,
    pub virus_level: u8,
    /// Fraction of the core's time that does not scale with frequency.
    pub mem_fraction: f64,
}

impl CoreActivity {
    pub const IDLE: CoreActivity =
        CoreActivity { active_fraction: 0.0, virus_level: 1, mem_fraction: 0.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceInterval {
    pub duration_s: f64,
    pub cores: Vec<CoreActivity>,
    pub graphics_load: f64,
    /// Component idle states used when the interval is fully idle; deep
    /// idle is assumed when absent.
    pub idle_hint: Option<ComponentStates>,
}

impl TraceInterval {
    pub fn fully_idle(&self) -> bool {
        self.cores.iter().all(|c| c.active_fraction == 0.0) && self.graphics_load == 0.0
    }

    fn validate(&self, n_levels: usize) -> Result<()> {
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            return Err(Error::model("interval duration must be > 0"));
        }
        for c in &self.cores {
            if !(0.0..=1.0).contains(&c.active_fraction) || !(0.0..=1.0).contains(&c.mem_fraction)
            {
                return Err(Error::model("core fractions must be in [0, 1]"));
            }
            if c.active_fraction > 0.0 && (c.virus_level as usize) > n_levels {
                return Err(Error::model(format!(
                    "core virus level {} exceeds the {n_levels}-level table",
                    c.virus_level
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.graphics_load) {
            return Err(Error::model("graphics load must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Two-component time model of a workload: frequency-scaled work plus
/// frequency-independent (memory) time. For one second of wall time at
/// the reference frequency, `w_cpu` work units take `w_cpu / f` seconds
/// at frequency f and `w_mem_s` seconds stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkloadModel {
    pub w_cpu: f64,
    pub w_mem_s: f64,
}

impl WorkloadModel {
    /// Split one second of reference-frequency time by memory fraction.
    pub fn from_mem_fraction(mem_fraction: f64, f_ref_hz: f64) -> WorkloadModel {
        WorkloadModel { w_cpu: (1.0 - mem_fraction) * f_ref_hz, w_mem_s: mem_fraction }
    }

    /// Completion time of the unit of work at frequency f.
    pub fn time_at(&self, freq_hz: f64) -> f64 {
        self.w_cpu / freq_hz + self.w_mem_s
    }

    /// Work rate relative to the reference frequency.
    pub fn rate_at(&self, freq_hz: f64) -> f64 {
        1.0 / self.time_at(freq_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Trace {
    pub intervals: Vec<TraceInterval>,
}

impl Trace {
    /// Serialize as the external CSV trace format, one row per core per
    /// interval.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ms,core_id,active_frac,virus_level,mem_frac,gfx_load\n");
        let mut t_ms = 0.0;
        for interval in &self.intervals {
            for (id, core) in interval.cores.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t_ms,
                    id,
                    core.active_fraction,
                    core.virus_level,
                    core.mem_fraction,
                    interval.graphics_load
                ));
            }
            t_ms += interval.duration_s * 1e3;
        }
        out
    }

    /// Parse the external CSV trace format. Rows sharing a timestamp form
    /// one interval; interval duration is the gap to the next timestamp
    /// (1 ms for the last).
    pub fn from_csv(text: &str) -> Result<Trace> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::model("empty trace file"))?;
        if header.trim() != "t_ms,core_id,active_frac,virus_level,mem_frac,gfx_load" {
            return Err(Error::model(format!("unexpected trace header '{header}'")));
        }
        // (t_ms, core_id, activity, gfx)
        let mut rows: Vec<(f64, usize, CoreActivity, f64)> = Vec::new();
        let mut max_core = 0usize;
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(Error::model(format!("trace line {}: need 6 fields", lineno + 2)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|e| Error::model(format!("trace line {}: {e}", lineno + 2)))
            };
            let t_ms = parse(fields[0])?;
            let core_id = parse(fields[1])? as usize;
            max_core = max_core.max(core_id);
            rows.push((
                t_ms,
                core_id,
                CoreActivity {
                    active_fraction: parse(fields[2])?,
                    virus_level: parse(fields[3])? as u8,
                    mem_fraction: parse(fields[4])?,
                },
                parse(fields[5])?,
            ));
        }
        if rows.is_empty() {
            return Err(Error::model("trace has no rows"));
        }
        let n_cores = max_core + 1;
        let mut intervals: Vec<TraceInterval> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for (t_ms, core_id, activity, gfx) in rows {
            let is_new = times.last().is_none_or(|last| t_ms > *last);
            if is_new {
                times.push(t_ms);
                intervals.push(TraceInterval {
                    duration_s: 1e-3,
                    cores: vec![CoreActivity::IDLE; n_cores],
                    graphics_load: gfx,
                    idle_hint: None,
                });
            }
            let interval = intervals.last_mut().unwrap();
            if core_id >= interval.cores.len() {
                interval.cores.resize(n_cores, CoreActivity::IDLE);
            }
            interval.cores[core_id] = activity;
            interval.graphics_load = gfx;
        }
        for i in 0..intervals.len().saturating_sub(1) {
            let dt = (times[i + 1] - times[i]) * 1e-3;
            if dt > 0.0 {
                intervals[i].duration_s = dt;
            }
        }
        Ok(Trace { intervals })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRecord {
    pub t_s: f64,
    pub duration_s: f64,
    pub package_state: PackageCState,
    pub operating_point: Option<OperatingPoint>,
    pub power: PowerBreakdown,
    pub violations: Vec<LimitViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub performance_score: f64,
    pub cpu_score: f64,
    pub gfx_score: f64,
    pub average_power_w: f64,
    pub energy_j: f64,
    pub total_time_s: f64,
    /// Seconds per resolved package state.
    pub residency_s: BTreeMap<String, f64>,
    pub violation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub mode: String,
    pub tdp_w: f64,
    pub intervals: Vec<IntervalRecord>,
    pub aggregates: Aggregates,
}

impl SimReport {
    pub fn residency_fraction(&self, state: PackageCState) -> f64 {
        let t = self.aggregates.total_time_s;
        if t == 0.0 {
            return 0.0;
        }
        self.aggregates.residency_s.get(&state.to_string()).copied().unwrap_or(0.0) / t
    }

    /// Residency export: `state,seconds,fraction,avg_contribution_w`.
    pub fn residency_csv(&self) -> String {
        let mut out = String::from("state,seconds,fraction,avg_contribution_w\n");
        let total = self.aggregates.total_time_s.max(f64::MIN_POSITIVE);
        for (state, seconds) in &self.aggregates.residency_s {
            let energy: f64 = self
                .intervals
                .iter()
                .filter(|r| r.package_state.to_string() == *state)
                .map(|r| r.power.total_w * r.duration_s)
                .sum();
            out.push_str(&format!(
                "{},{},{},{}\n",
                state,
                seconds,
                seconds / total,
                energy / total
            ));
        }
        out
    }
}

/// Run one simulation in the platform's fused mode.
pub fn run(platform: &PlatformConfig, trace: &Trace) -> Result<SimReport> {
    run_mode(platform, platform.resolve_mode().mode, trace)
}

/// Run one simulation with an explicit mode override.
pub fn run_mode(platform: &PlatformConfig, mode: PmuMode, trace: &Trace) -> Result<SimReport> {
    if trace.intervals.is_empty() {
        return Err(Error::model("trace has no intervals"));
    }
    let n_levels = platform.power.cdyn_per_level_f.len();
    for interval in &trace.intervals {
        interval.validate(n_levels)?;
    }

    let adder = reliability_adder_for(platform.tdp_w, mode)?;
    let inputs = DvfsInputs {
        curve: &platform.curve,
        guardband: &platform.guardband,
        droop_fraction: platform.droop_fraction,
        limits: &platform.limits,
        power: &platform.power,
        graphics: &platform.graphics,
        z_peak_ohm: platform.z_peak(mode),
        reliability_adder_v: adder,
        sustained_gb_fraction: platform.sustained_gb_fraction,
    };
    let cap = platform.cstate_cap(mode);
    let f_ref = platform.curve.max_freq_hz();
    let gfx_ref = platform.graphics.curve.max_freq_hz();

    let mut records = Vec::with_capacity(trace.intervals.len());
    let mut residency: BTreeMap<String, f64> = BTreeMap::new();
    let mut window = CurrentWindow::new(platform.limits.tdc_window_s);
    let mut energy = 0.0;
    let mut cpu_score = 0.0;
    let mut gfx_score = 0.0;
    let mut violation_count = 0usize;
    let mut t_s = 0.0;
    let mut prev_state = PackageCState::C0;

    for interval in &trace.intervals {
        let duration = interval.duration_s;
        if interval.fully_idle() {
            let hint;
            let cs = match &interval.idle_hint {
                Some(h) => h,
                None => {
                    hint = ComponentStates::deep_idle(platform.n_cores());
                    &hint
                }
            };
            let state = resolve_package_cstate(cs, cap);
            let p = cstate_power(state, mode, &platform.cstates.power_table)?;
            // Idle platform power is carried on the uncore slot of the
            // breakdown; the cores are not individually modeled here.
            let power = PowerBreakdown::assemble(vec![], 0.0, p);
            window.push(duration, 0.0);
            energy += power.total_w * duration;
            *residency.entry(state.to_string()).or_insert(0.0) += duration;
            records.push(IntervalRecord {
                t_s,
                duration_s: duration,
                package_state: state,
                operating_point: None,
                power,
                violations: vec![],
            });
            prev_state = state;
            t_s += duration;
            continue;
        }

        // Wake cost on the idle -> active transition, charged as lost
        // active time at the interval start.
        let wake_s = if prev_state != PackageCState::C0 {
            wake_cost(prev_state, mode, &platform.cstates.latency)?
        } else {
            0.0
        };
        let effective_s = (duration - wake_s).max(0.0);

        let activity = Activity {
            cores: interval
                .cores
                .iter()
                .map(|c| CoreDemand {
                    active_fraction: c.active_fraction,
                    virus_level: c.virus_level,
                })
                .collect(),
            graphics_load: interval.graphics_load,
        };
        let demand = Demand {
            cpu_intensity: activity.max_core_fraction(),
            gfx_intensity: interval.graphics_load,
        };
        let idle_cores = interval.cores.iter().filter(|c| c.active_fraction == 0.0).count();
        let leakage_floor = match mode {
            PmuMode::Bypass => {
                let v = platform.limits.vmin_v;
                idle_cores as f64 * platform.power.ilkg_at(v) * v
            }
            PmuMode::Normal => 0.0,
        };
        let alloc = pbm_allocate(platform.tdp_w, &demand, mode, leakage_floor, &platform.pbm)?;
        let op = dvfs_select(&inputs, &alloc.split, &activity, mode)?;

        let pred = crate::pmu::predict_core_domain(
            &inputs,
            &activity,
            mode,
            op.virus_level,
            op.core_freq_hz,
        )?;
        let gfx_w = if op.graphics_freq_hz > 0.0 {
            interval.graphics_load
                * platform.graphics.cdyn_f
                * op.graphics_voltage_v
                * op.graphics_voltage_v
                * op.graphics_freq_hz
        } else {
            0.0
        };
        let power =
            PowerBreakdown::assemble(pred.per_core.clone(), gfx_w, platform.pbm.uncore_reserve_w);

        window.push(duration, pred.icc_a);
        let violations = check_limits(
            &power,
            window.average(),
            pred.icc_a,
            op.core_voltage_v,
            &platform.limits,
        );
        violation_count += violations.len();

        for core in &interval.cores {
            if core.active_fraction == 0.0 {
                continue;
            }
            // Rate normalized to 1.0 at the reference (top-knot) frequency,
            // scaled by how much of the interval the core actually works.
            let workload = WorkloadModel::from_mem_fraction(core.mem_fraction, f_ref);
            cpu_score += effective_s * core.active_fraction * workload.rate_at(op.core_freq_hz);
        }
        if interval.graphics_load > 0.0 && op.graphics_freq_hz > 0.0 {
            gfx_score += effective_s * interval.graphics_load * op.graphics_freq_hz / gfx_ref;
        }

        energy += power.total_w * duration;
        *residency.entry(PackageCState::C0.to_string()).or_insert(0.0) += duration;
        records.push(IntervalRecord {
            t_s,
            duration_s: duration,
            package_state: PackageCState::C0,
            operating_point: Some(op),
            power,
            violations,
        });
        prev_state = PackageCState::C0;
        t_s += duration;
    }

    let total_time_s = t_s;
    let aggregates = Aggregates {
        performance_score: cpu_score + gfx_score,
        cpu_score,
        gfx_score,
        average_power_w: energy / total_time_s,
        energy_j: energy,
        total_time_s,
        residency_s: residency,
        violation_count,
    };
    Ok(SimReport {
        mode: mode.label().to_string(),
        tdp_w: platform.tdp_w,
        intervals: records,
        aggregates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub tdp_w: f64,
    pub normal: Aggregates,
    pub bypass: Aggregates,
    /// (bypass - normal) / normal, in percent.
    pub perf_delta_pct: f64,
    pub avg_power_delta_pct: f64,
    /// Residency fraction deltas per package state (bypass - normal).
    pub residency_delta: BTreeMap<String, f64>,
}

/// Run both modes over the same trace and report deltas.
pub fn compare_modes(platform: &PlatformConfig, trace: &Trace) -> Result<CompareReport> {
    let normal = run_mode(platform, PmuMode::Normal, trace)?;
    let bypass = run_mode(platform, PmuMode::Bypass, trace)?;
    let pct = |b: f64, n: f64| if n == 0.0 { 0.0 } else { (b - n) / n * 100.0 };
    let mut residency_delta = BTreeMap::new();
    let states: std::collections::BTreeSet<&String> = normal
        .aggregates
        .residency_s
        .keys()
        .chain(bypass.aggregates.residency_s.keys())
        .collect();
    for state in states {
        let t = normal.aggregates.total_time_s;
        let n = normal.aggregates.residency_s.get(state).copied().unwrap_or(0.0) / t;
        let b = bypass.aggregates.residency_s.get(state).copied().unwrap_or(0.0)
            / bypass.aggregates.total_time_s;
        residency_delta.insert(state.clone(), b - n);
    }
    Ok(CompareReport {
        tdp_w: platform.tdp_w,
        perf_delta_pct: pct(
            bypass.aggregates.performance_score,
            normal.aggregates.performance_score,
        ),
        avg_power_delta_pct: pct(
            bypass.aggregates.average_power_w,
            normal.aggregates.average_power_w,
        ),
        normal: normal.aggregates,
        bypass: bypass.aggregates,
        residency_delta,
    })
}

/// One synthetic SPEC-like workload: a name and how much of its time
/// scales with core frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecWorkload {
    pub name: &'static str,
    pub mem_fraction: f64,
}

/// Synthetic 12-entry suite spanning the scalability spectrum from fully
/// frequency-bound to fully memory-bound.
pub const SPEC_SUITE: [SpecWorkload; 12] = [
    SpecWorkload { name: "syn.compute0", mem_fraction: 0.00 },
    SpecWorkload { name: "syn.compute1", mem_fraction: 0.02 },
    SpecWorkload { name: "syn.compute2", mem_fraction: 0.05 },
    SpecWorkload { name: "syn.compute3", mem_fraction: 0.10 },
    SpecWorkload { name: "syn.mixed0", mem_fraction: 0.15 },
    SpecWorkload { name: "syn.mixed1", mem_fraction: 0.22 },
    SpecWorkload { name: "syn.mixed2", mem_fraction: 0.30 },
    SpecWorkload { name: "syn.mixed3", mem_fraction: 0.40 },
    SpecWorkload { name: "syn.memory0", mem_fraction: 0.55 },
    SpecWorkload { name: "syn.memory1", mem_fraction: 0.70 },
    SpecWorkload { name: "syn.memory2", mem_fraction: 0.85 },
    SpecWorkload { name: "syn.memory3", mem_fraction: 1.00 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WorkloadKind {
    SpecBase,
    SpecRate,
    Graphics,
    EnergyStar,
    Rmt,
}

impl WorkloadKind {
    pub fn parse(s: &str) -> Result<WorkloadKind> {
        match s.to_ascii_lowercase().as_str() {
            "spec-base" | "spec_base" | "specbase" => Ok(WorkloadKind::SpecBase),
            "spec-rate" | "spec_rate" | "specrate" => Ok(WorkloadKind::SpecRate),
            "graphics" => Ok(WorkloadKind::Graphics),
            "energy-star" | "energy_star" | "energystar" => Ok(WorkloadKind::EnergyStar),
            "rmt" => Ok(WorkloadKind::Rmt),
            other => Err(Error::model(format!("unknown workload kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenParams {
    pub n_cores: usize,
    pub interval_s: f64,
    /// Intervals per suite entry (Spec kinds) or per cycle (idle kinds).
    pub block_intervals: usize,
    /// Cycles of the RMT / ENERGY STAR residency pattern.
    pub cycles: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { n_cores: 4, interval_s: 1e-3, block_intervals: 4, cycles: 5 }
    }
}

/// Deterministic split-mix generator for workload jitter.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_usize(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound.max(1) as u64) as usize
    }
}

/// ENERGY STAR-style residency mix over idle classes, mapped to
/// package-state-reachable idle hints: off and sleep reach the deepest
/// conditions, long idle keeps the display in self-refresh, short idle
/// keeps DRAM and the display active.
pub const ENERGY_STAR_MIX: [(IdleClass, f64); 4] = [
    (IdleClass::Off, 0.45),
    (IdleClass::Sleep, 0.05),
    (IdleClass::LongIdle, 0.25),
    (IdleClass::ShortIdle, 0.25),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IdleClass {
    Off,
    Sleep,
    LongIdle,
    ShortIdle,
}

impl IdleClass {
    pub fn component_states(&self, n_cores: usize) -> ComponentStates {
        let mut cs = ComponentStates::deep_idle(n_cores);
        match self {
            IdleClass::Off | IdleClass::Sleep => {}
            IdleClass::LongIdle => {
                cs.display = DisplayState::Psr;
                cs.all_ips_off = false;
            }
            IdleClass::ShortIdle => {
                cs.dram = crate::cstates::DramState::Active;
                cs.display = DisplayState::On;
                cs.all_ips_off = false;
                cs.core_vr_off_ok = false;
                cs.io_power_gated = false;
            }
        }
        cs
    }
}

/// Deterministic workload generator; `seed` only drives placement jitter.
pub fn gen_workload(kind: WorkloadKind, params: &GenParams, seed: u64) -> Trace {
    let mut rng = SplitMix64::new(seed);
    let n = params.n_cores;
    let mut intervals = Vec::new();
    match kind {
        WorkloadKind::SpecBase | WorkloadKind::SpecRate => {
            for entry in SPEC_SUITE {
                for _ in 0..params.block_intervals {
                    let mut cores = vec![CoreActivity::IDLE; n];
                    let activity = CoreActivity {
                        active_fraction: 1.0,
                        virus_level: 2,
                        mem_fraction: entry.mem_fraction,
                    };
                    match kind {
                        WorkloadKind::SpecBase => cores[0] = activity,
                        _ => cores.iter_mut().for_each(|c| *c = activity),
                    }
                    intervals.push(TraceInterval {
                        duration_s: params.interval_s,
                        cores,
                        graphics_load: 0.0,
                        idle_hint: None,
                    });
                }
            }
        }
        WorkloadKind::Graphics => {
            for _ in 0..params.block_intervals.max(1) * params.cycles.max(1) {
                let mut cores = vec![CoreActivity::IDLE; n];
                // One core runs the graphics driver; it is not part of the
                // scored work (FPS tracks the graphics engine).
                cores[0] =
                    CoreActivity { active_fraction: 0.1, virus_level: 1, mem_fraction: 1.0 };
                intervals.push(TraceInterval {
                    duration_s: params.interval_s,
                    cores,
                    graphics_load: 1.0,
                    idle_hint: None,
                });
            }
        }
        WorkloadKind::Rmt => {
            // Ready-mode: ~99% idle, ~1% active, exact per 100-interval
            // cycle; the active slot position jitters with the seed.
            for _ in 0..params.cycles.max(1) {
                let active_slot = rng.next_usize(100);
                for slot in 0..100 {
                    let mut cores = vec![CoreActivity::IDLE; n];
                    if slot == active_slot {
                        cores[0] = CoreActivity {
                            active_fraction: 0.6,
                            virus_level: 1,
                            mem_fraction: 0.5,
                        };
                    }
                    intervals.push(TraceInterval {
                        duration_s: params.interval_s,
                        cores: cores.clone(),
                        graphics_load: 0.0,
                        idle_hint: if slot == active_slot {
                            None
                        } else {
                            Some(ComponentStates::deep_idle(n))
                        },
                    });
                }
            }
        }
        WorkloadKind::EnergyStar => {
            let slots = 100usize;
            for _ in 0..params.cycles.max(1) {
                for (class, share) in ENERGY_STAR_MIX {
                    let count = (share * slots as f64).round() as usize;
                    for _ in 0..count {
                        intervals.push(TraceInterval {
                            duration_s: params.interval_s,
                            cores: vec![CoreActivity::IDLE; n],
                            graphics_load: 0.0,
                            idle_hint: Some(class.component_states(n)),
                        });
                    }
                }
            }
        }
    }
    Trace { intervals }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdpSweepRow {
    pub tdp_w: f64,
    pub base_delta_pct: f64,
    pub rate_delta_pct: f64,
}

/// Mean per-workload base and rate perf deltas at each TDP level.
pub fn tdp_sweep(
    platform: &PlatformConfig,
    tdps: &[f64],
    suite: &[SpecWorkload],
) -> Result<Vec<TdpSweepRow>> {
    if tdps.is_empty() || suite.is_empty() {
        return Err(Error::model("tdp sweep needs tdp levels and a suite"));
    }
    let mut rows = Vec::with_capacity(tdps.len());
    for &tdp in tdps {
        let cfg = platform.with_tdp(tdp)?;
        let mut deltas = [0.0f64; 2];
        for (slot, kind) in [WorkloadKind::SpecBase, WorkloadKind::SpecRate].iter().enumerate() {
            let mut sum = 0.0;
            for entry in suite {
                let trace = single_entry_trace(*kind, entry, cfg.n_cores());
                let report = compare_modes(&cfg, &trace)?;
                sum += report.perf_delta_pct;
            }
            deltas[slot] = sum / suite.len() as f64;
        }
        rows.push(TdpSweepRow { tdp_w: tdp, base_delta_pct: deltas[0], rate_delta_pct: deltas[1] });
    }
    Ok(rows)
}

fn single_entry_trace(kind: WorkloadKind, entry: &SpecWorkload, n_cores: usize) -> Trace {
    let activity = CoreActivity {
        active_fraction: 1.0,
        virus_level: 2,
        mem_fraction: entry.mem_fraction,
    };
    let mut cores = vec![CoreActivity::IDLE; n_cores];
    match kind {
        WorkloadKind::SpecBase => cores[0] = activity,
        _ => cores.iter_mut().for_each(|c| *c = activity),
    }
    let interval =
        TraceInterval { duration_s: 1e-3, cores, graphics_load: 0.0, idle_hint: None };
    Trace { intervals: vec![interval; 2] }
}
