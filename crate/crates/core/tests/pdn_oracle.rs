//! PDN solver checks against the independent dense nodal oracle.

mod common;

use common::{mna_impedance, random_network_broad, random_network_envelope};
use darksim_core::config::PlatformConfig;
use darksim_core::pdn::SweepSpacing;
use darksim_core::sim::SplitMix64;

#[test]
fn ladder_matches_dense_nodal_solve() {
    let mut rng = SplitMix64::new(0xdead_beef);
    for i in 0..50 {
        let net = random_network_broad(&mut rng);
        for _ in 0..4 {
            let f = 1e3 * (1e9f64 / 1e3).powf(rng.next_f64());
            let ladder = net.impedance_at(f).unwrap();
            let dense = mna_impedance(&net, f);
            let err = (ladder - dense).norm() / dense.norm();
            assert!(err < 1e-9, "network {i}: rel err {err:.3e} at {f:.1} Hz");
        }
    }
}

#[test]
fn reference_network_matches_oracle() {
    let cfg = PlatformConfig::reference();
    for net in [&cfg.pdn_gated, &cfg.pdn_bypassed] {
        for f in [1.0, 1e3, 1e6, 50e6, 105e6, 1e9] {
            let ladder = net.impedance_at(f).unwrap();
            let dense = mna_impedance(net, f);
            let err = (ladder - dense).norm() / dense.norm();
            assert!(err < 1e-9, "rel err {err:.3e} at {f:.1} Hz");
        }
    }
}

#[test]
fn dc_limit_at_one_hertz() {
    // The 1 Hz magnitude converges to the DC resistive path.
    let cfg = PlatformConfig::reference();
    for net in [&cfg.pdn_gated, &cfg.pdn_bypassed] {
        let z = net.impedance_at(1.0).unwrap();
        let dc = net.dc_resistance();
        assert!((z.norm() - dc).abs() / dc < 1e-3, "1 Hz |Z| {} vs dc {dc}", z.norm());
    }
    let mut rng = SplitMix64::new(7);
    for _ in 0..20 {
        let net = random_network_envelope(&mut rng);
        let z = net.impedance_at(1.0).unwrap();
        let dc = net.dc_resistance();
        assert!((z.norm() - dc).abs() / dc < 1e-3);
    }
}

#[test]
fn reference_dc_cross_check_tight() {
    let cfg = PlatformConfig::reference();
    let z = cfg.pdn_gated.impedance_at(1.0).unwrap();
    let dc = cfg.pdn_gated.dc_resistance();
    assert!((z.norm() - dc).abs() / dc < 1e-3);
    // Calibration: the gated DC path realizes the 2.0 mohm load-line.
    assert!((dc - 2.0e-3).abs() < 1e-6);
}

#[test]
fn bypassed_impedance_dominated_by_gated() {
    let cfg = PlatformConfig::reference();
    let gated = cfg
        .pdn_gated
        .impedance_sweep(1e3, 1e9, 400, SweepSpacing::Log)
        .unwrap();
    let byp = cfg
        .pdn_bypassed
        .impedance_sweep(1e3, 1e9, 400, SweepSpacing::Log)
        .unwrap();
    for (g, b) in gated.samples.iter().zip(&byp.samples) {
        assert!(
            b.magnitude_ohm <= g.magnitude_ohm * (1.0 + 1e-12),
            "dominance violated at {} Hz: {} > {}",
            g.freq_hz,
            b.magnitude_ohm,
            g.magnitude_ohm
        );
    }

    let mut rng = SplitMix64::new(0x0bad_cafe);
    for i in 0..50 {
        let net = random_network_envelope(&mut rng);
        let byp = net.bypass().unwrap();
        let gs = net.impedance_sweep(1e3, 1e9, 100, SweepSpacing::Log).unwrap();
        let bs = byp.impedance_sweep(1e3, 1e9, 100, SweepSpacing::Log).unwrap();
        for (g, b) in gs.samples.iter().zip(&bs.samples) {
            assert!(
                b.magnitude_ohm <= g.magnitude_ohm * (1.0 + 1e-12),
                "network {i}: dominance violated at {} Hz",
                g.freq_hz
            );
        }
    }
}

#[test]
fn passivity_over_random_networks() {
    let mut rng = SplitMix64::new(0x5eed);
    for _ in 0..30 {
        let net = random_network_broad(&mut rng);
        for _ in 0..8 {
            let f = 1e2 * (1e10f64 / 1e2).powf(rng.next_f64());
            let z = net.impedance_at(f).unwrap();
            assert!(z.re >= -1e-15, "negative real part {} at {f} Hz", z.re);
        }
    }
}

#[test]
fn sweep_peak_matches_brute_force() {
    let cfg = PlatformConfig::reference();
    let coarse = cfg
        .pdn_gated
        .impedance_sweep(1e3, 1e9, 400, SweepSpacing::Log)
        .unwrap();
    let dense = cfg
        .pdn_gated
        .impedance_sweep(1e3, 1e9, 40_000, SweepSpacing::Log)
        .unwrap();
    let p_coarse = coarse.peak().unwrap();
    let p_dense = dense.peak().unwrap();
    // One coarse-grid bin: the log step between adjacent coarse samples.
    let step = (1e9f64 / 1e3).powf(1.0 / 399.0);
    assert!(
        p_dense.freq_hz / p_coarse.freq_hz <= step && p_coarse.freq_hz / p_dense.freq_hz <= step,
        "coarse peak {} Hz vs dense peak {} Hz",
        p_coarse.freq_hz,
        p_dense.freq_hz
    );
}

#[test]
fn reference_peak_ratio_near_two() {
    let cfg = PlatformConfig::reference();
    let ratio = cfg.z_peak_gated_ohm / cfg.z_peak_bypassed_ohm;
    assert!((1.8..=2.2).contains(&ratio), "peak ratio {ratio}");
}
