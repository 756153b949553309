//! Consistency checks of the shipped reference calibration against the
//! values the model documentation pins.

use darksim_core::config::PlatformConfig;
use darksim_core::pmu::{pbm_allocate, Demand, PmuMode};
use darksim_core::sim::{compare_modes, CoreActivity, Trace, TraceInterval};

#[test]
fn virus_table_deltas_derive_from_load_line() {
    // delta_v(L) = r_ll * (icc(L) - icc(L-1)), with level 1 stepping up
    // from zero current.
    let cfg = PlatformConfig::reference();
    let r_ll = cfg.guardband.load_line.r_ll_ohm;
    let mut prev_icc = 0.0;
    for level in &cfg.guardband.levels {
        let expected = r_ll * (level.icc_virus_a - prev_icc);
        assert!(
            (level.delta_v_v - expected).abs() <= 1e-12 * expected,
            "level {}: delta_v {} vs derived {}",
            level.level_id,
            level.delta_v_v,
            expected
        );
        prev_icc = level.icc_virus_a;
    }
    // The documented 30 mV step between levels 1 and 2.
    let step = cfg.guardband.level_transition_delta(1, 2).unwrap();
    assert!((step - 30e-3).abs() < 1e-12);
}

#[test]
fn reference_curve_matches_documented_knots() {
    let cfg = PlatformConfig::reference();
    let expected = [(0.8e9, 0.70), (2.0e9, 0.82), (3.2e9, 0.98), (4.2e9, 1.12)];
    assert_eq!(cfg.curve.points.len(), expected.len());
    for ((f, v), (ef, ev)) in cfg.curve.points.iter().zip(expected) {
        assert!((f - ef).abs() < 1.0 && (v - ev).abs() < 1e-9);
    }
    assert_eq!(cfg.curve.bin_hz, 100e6);
}

#[test]
fn halving_the_droop_term_raises_fmax_by_at_least_one_bin() {
    let cfg = PlatformConfig::reference();
    let level = 1;
    let droop = cfg.droop_fraction * cfg.guardband.level(level).unwrap().icc_virus_a;
    let gb = cfg.guardband.with_droop_delta_i(droop);
    let z = cfg.z_peak_gated_ohm;
    let full = gb.guardband_above(level, z).unwrap();
    let halved = gb.guardband_above(level, z / 2.0).unwrap();
    let limits = cfg.limits.voltage();
    let f_full = cfg.curve.fmax_under_vmax(full, &limits).unwrap();
    let f_half = cfg.curve.fmax_under_vmax(halved, &limits).unwrap();
    assert!(
        f_half.freq_hz >= f_full.freq_hz + cfg.curve.bin_hz - 1.0,
        "halved-droop fmax {} vs full {}",
        f_half.freq_hz,
        f_full.freq_hz
    );
}

#[test]
fn pbm_reference_gives_cores_the_midpoint_share() {
    let cfg = PlatformConfig::reference().with_tdp(35.0).unwrap();
    let demand = Demand { cpu_intensity: 0.1, gfx_intensity: 1.0 };
    let alloc = pbm_allocate(cfg.tdp_w, &demand, PmuMode::Normal, 0.0, &cfg.pbm).unwrap();
    let compute = cfg.tdp_w - cfg.pbm.uncore_reserve_w;
    assert!((alloc.split.cores_w - 0.15 * compute).abs() < 1e-12);
}

#[test]
fn single_core_91w_mean_delta_in_band() {
    // Scalability-mixed single-core suite at the reference TDP.
    let cfg = PlatformConfig::reference();
    let mut sum = 0.0;
    let mut count = 0;
    for entry in darksim_core::sim::SPEC_SUITE {
        let mut cores = vec![CoreActivity::IDLE; cfg.n_cores()];
        cores[0] = CoreActivity {
            active_fraction: 1.0,
            virus_level: 2,
            mem_fraction: entry.mem_fraction,
        };
        let trace = Trace {
            intervals: vec![
                TraceInterval { duration_s: 1e-3, cores, graphics_load: 0.0, idle_hint: None };
                2
            ],
        };
        sum += compare_modes(&cfg, &trace).unwrap().perf_delta_pct;
        count += 1;
    }
    let mean = sum / count as f64;
    assert!((3.5..=6.0).contains(&mean), "91 W single-core suite mean {mean:.2}%");
}
