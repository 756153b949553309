//! Voltage/frequency curve, frequency quantization, and Fmax resolution
//! under the Vmax limit.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoltageLimits {
    pub vmax_v: f64,
    pub vmin_v: f64,
}

impl VoltageLimits {
    pub fn validate(&self) -> Result<()> {
        if !self.vmin_v.is_finite() || !self.vmax_v.is_finite() || self.vmin_v <= 0.0 || self.vmin_v >= self.vmax_v {
            return Err(Error::model("voltage limits need 0 < vmin < vmax"));
        }
        Ok(())
    }
}

/// Monotone frequency -> nominal-voltage curve, piecewise linear between
/// knots, with the platform's frequency quantization bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VfCurve {
    /// (freq_hz, vnom_v), frequencies strictly increasing, voltages
    /// non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub bin_hz: f64,
}

impl VfCurve {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::model("vf curve needs at least 2 knots"));
        }
        if !self.bin_hz.is_finite() || self.bin_hz <= 0.0 {
            return Err(Error::model("frequency bin must be > 0"));
        }
        for pair in self.points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::model("vf curve frequencies must be strictly increasing"));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::model("vf curve voltages must be non-decreasing"));
            }
        }
        if self.points.iter().any(|(f, v)| !f.is_finite() || !v.is_finite() || *f <= 0.0 || *v <= 0.0) {
            return Err(Error::model("vf curve knots must be positive"));
        }
        Ok(())
    }

    pub fn min_freq_hz(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_freq_hz(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Piecewise-linear nominal voltage at f; exact at knots, no
    /// extrapolation outside the curve range.
    pub fn vnom_at(&self, freq_hz: f64) -> Result<f64> {
        if freq_hz < self.min_freq_hz() || freq_hz > self.max_freq_hz() {
            return Err(Error::model(format!(
                "frequency {:.3} GHz outside curve range [{:.3}, {:.3}] GHz",
                freq_hz / 1e9,
                self.min_freq_hz() / 1e9,
                self.max_freq_hz() / 1e9
            )));
        }
        for pair in self.points.windows(2) {
            let (f0, v0) = pair[0];
            let (f1, v1) = pair[1];
            if freq_hz <= f1 {
                let t = (freq_hz - f0) / (f1 - f0);
                return Ok(v0 + t * (v1 - v0));
            }
        }
        Ok(self.points[self.points.len() - 1].1)
    }

    /// Largest bin-quantized frequency in the curve's range whose nominal
    /// voltage plus guardband fits under vmax. When even the curve minimum
    /// violates, returns the minimum flagged degenerate.
    pub fn fmax_under_vmax(&self, vgb_v: f64, limits: &VoltageLimits) -> Result<FmaxResult> {
        self.validate()?;
        limits.validate()?;
        if vgb_v < 0.0 {
            return Err(Error::model("guardband must be >= 0"));
        }
        let allow = limits.vmax_v - vgb_v;
        let f_min = self.min_freq_hz();
        if allow < self.points[0].1 {
            return Ok(FmaxResult { freq_hz: f_min, degenerate: true });
        }
        // Invert the curve analytically for the largest f with vnom <= allow.
        let f_exact = if allow >= self.points[self.points.len() - 1].1 {
            self.max_freq_hz()
        } else {
            let mut f = f_min;
            for pair in self.points.windows(2) {
                let (f0, v0) = pair[0];
                let (f1, v1) = pair[1];
                if allow >= v1 {
                    f = f1;
                } else if allow >= v0 {
                    f = if v1 > v0 { f0 + (allow - v0) / (v1 - v0) * (f1 - f0) } else { f1 };
                    break;
                } else {
                    break;
                }
            }
            f
        };
        let quantized = quantize_down(f_exact, self.bin_hz);
        if quantized < f_min {
            // Feasible but no bin multiple between the curve minimum and
            // f_exact; fall back to the (unaligned) minimum.
            return Ok(FmaxResult { freq_hz: f_min, degenerate: false });
        }
        Ok(FmaxResult { freq_hz: quantized, degenerate: false })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FmaxResult {
    pub freq_hz: f64,
    pub degenerate: bool,
}

/// Largest multiple of `bin` <= f. Values within 1e-9 relative of a bin
/// boundary snap to it to absorb float noise from curve inversion.
pub fn quantize_down(freq_hz: f64, bin_hz: f64) -> f64 {
    assert!(bin_hz > 0.0, "bin must be > 0");
    if freq_hz <= 0.0 {
        return 0.0;
    }
    let ratio = freq_hz / bin_hz;
    let nearest = ratio.round();
    let snapped = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    snapped * bin_hz
}
