//! Shared test oracles: an independent dense complex nodal solve of the
//! PDN ladder, plus randomized network generators.

use num_complex::Complex64;

use darksim_core::pdn::{CoreBranch, PdnNetwork, PdnStage, Topology};
use darksim_core::sim::SplitMix64;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Driving-point impedance at the load node by assembling the full nodal
/// admittance matrix and solving it densely. Independent of the ladder
/// reduction in the crate: every element is stamped into Y, a 1 A source
/// is injected at the load, and Z is the resulting load-node voltage.
pub fn mna_impedance(net: &PdnNetwork, freq_hz: f64) -> Complex64 {
    let jw = Complex64::new(0.0, TWO_PI * freq_hz);
    let s = net.stages.len();
    let n = s + 2; // VR node, one node per stage boundary, load node
    let mut y = vec![Complex64::new(0.0, 0.0); n * n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];

    let stamp = |a: usize, b: Option<usize>, adm: Complex64, y: &mut Vec<Complex64>| {
        y[a * n + a] += adm;
        if let Some(b) = b {
            y[b * n + b] += adm;
            y[a * n + b] -= adm;
            y[b * n + a] -= adm;
        }
    };

    // VR output resistance from ground to node 0.
    assert!(net.vr_output_resistance_ohm > 0.0, "oracle needs vr resistance > 0");
    stamp(0, None, Complex64::new(1.0 / net.vr_output_resistance_ohm, 0.0), &mut y);

    for (k, stage) in net.stages.iter().enumerate() {
        if stage.shunt_cap_f > 0.0 {
            let z = Complex64::new(stage.cap_esr_ohm, 0.0)
                + jw * stage.cap_esl_h
                + (jw * stage.shunt_cap_f).inv();
            stamp(k, None, z.inv(), &mut y);
        }
        let z_series =
            Complex64::new(stage.series_resistance_ohm, 0.0) + jw * stage.series_inductance_h;
        assert!(z_series.norm() > 0.0, "oracle needs non-degenerate series elements");
        stamp(k, Some(k + 1), z_series.inv(), &mut y);
    }

    let branch = &net.cores[0];
    let r_branch = branch.gate_resistance_ohm + branch.die_grid_resistance_ohm;
    assert!(r_branch > 0.0, "oracle needs a resistive core branch");
    stamp(s, Some(s + 1), Complex64::new(1.0 / r_branch, 0.0), &mut y);
    if branch.mim_cap_f > 0.0 {
        let z = Complex64::new(branch.mim_esr_ohm, 0.0) + (jw * branch.mim_cap_f).inv();
        stamp(s + 1, None, z.inv(), &mut y);
    }

    rhs[s + 1] = Complex64::new(1.0, 0.0);
    let v = solve_dense(&mut y, &mut rhs, n);
    v[s + 1]
}

/// Gaussian elimination with partial pivoting on a dense complex system.
fn solve_dense(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> Vec<Complex64> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let mag = a[row * n + col].norm();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        assert!(best > 0.0, "singular oracle matrix");
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * x[k];
        }
        x[col] = sum / a[col * n + col];
    }
    x
}

fn log_uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.next_f64())
}

/// Broad random ladder for solver-equivalence and passivity checks.
pub fn random_network_broad(rng: &mut SplitMix64) -> PdnNetwork {
    let n_stages = 1 + rng.next_usize(8);
    let mut stages = Vec::with_capacity(n_stages);
    for _ in 0..n_stages {
        let with_cap = rng.next_f64() > 0.2;
        let (c, esr, esl) = if with_cap {
            (
                log_uniform(rng, 1e-9, 1e-3),
                log_uniform(rng, 5e-5, 2e-3),
                log_uniform(rng, 1e-13, 2e-9),
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        stages.push(PdnStage {
            series_resistance_ohm: log_uniform(rng, 5e-5, 1e-3),
            series_inductance_h: log_uniform(rng, 1e-13, 2e-9),
            shunt_cap_f: c,
            cap_esr_ohm: esr,
            cap_esl_h: esl,
        });
    }
    let n_cores = 1 + rng.next_usize(4);
    let core = CoreBranch {
        gate_resistance_ohm: log_uniform(rng, 2e-4, 1.5e-3),
        die_grid_resistance_ohm: log_uniform(rng, 5e-5, 5e-4),
        mim_cap_f: log_uniform(rng, 1e-8, 1e-6),
        mim_esr_ohm: log_uniform(rng, 2e-4, 2e-3),
    };
    PdnNetwork {
        vr_output_resistance_ohm: log_uniform(rng, 1e-4, 1e-3),
        stages,
        cores: vec![core; n_cores],
        topology: Topology::Gated,
    }
}

/// Random network inside the reference calibration's manufacturing
/// envelope (each element scaled by up to +/-5%), where the
/// bypass-dominance property is part of the model's operating contract.
/// Wider uncorrelated element spreads can re-tune the die-level
/// anti-resonance and locally invert the ordering.
pub fn random_network_envelope(rng: &mut SplitMix64) -> PdnNetwork {
    let mut spread = |nominal: f64| nominal * (0.95 + 0.10 * rng.next_f64());
    let stages = vec![
        PdnStage {
            series_resistance_ohm: spread(0.35e-3),
            series_inductance_h: spread(40e-12),
            shunt_cap_f: spread(1.2e-3),
            cap_esr_ohm: spread(0.25e-3),
            cap_esl_h: spread(2.5e-9),
        },
        PdnStage {
            series_resistance_ohm: spread(0.5e-3),
            series_inductance_h: spread(2.4e-12),
            shunt_cap_f: spread(24e-6),
            cap_esr_ohm: spread(0.7e-3),
            cap_esl_h: spread(2e-12),
        },
        PdnStage {
            series_resistance_ohm: spread(0.1e-3),
            series_inductance_h: spread(1.2e-12),
            shunt_cap_f: 0.0,
            cap_esr_ohm: 0.0,
            cap_esl_h: 0.0,
        },
    ];
    let core = CoreBranch {
        gate_resistance_ohm: spread(0.6e-3),
        die_grid_resistance_ohm: spread(0.2e-3),
        mim_cap_f: spread(0.4e-6),
        mim_esr_ohm: spread(0.8e-3),
    };
    PdnNetwork {
        vr_output_resistance_ohm: spread(0.25e-3),
        stages,
        cores: vec![core; 4],
        topology: Topology::Gated,
    }
}
