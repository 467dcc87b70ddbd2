//! Analytic ground truth and the conventional power-times-time meter.

use crate::error::{Error, Result};

const JOULES_PER_KWH: f64 = 3.6e6;

/// `p·t` in kWh.
pub fn expected_energy(p_active_watts: f64, duration_s: f64) -> f64 {
    p_active_watts * duration_s / JOULES_PER_KWH
}

/// `V_rms · I_rms · cos φ`.
pub fn active_power(i_rms: f64, v_rms: f64, phase_rad: f64) -> f64 {
    v_rms * i_rms * phase_rad.cos()
}

/// Signed relative error in percent.
pub fn error_pct(expected_kwh: f64, simulated_kwh: f64) -> Result<f64> {
    if expected_kwh == 0.0 || !expected_kwh.is_finite() {
        return Err(Error::Config(format!(
            "relative error is undefined for expected energy {expected_kwh}"
        )));
    }
    Ok(100.0 * (simulated_kwh - expected_kwh) / expected_kwh)
}

/// Accumulator width of the naive integrator.
///
/// `Extended` is IEEE binary64 (53-bit significand); `Reduced` is binary32
/// (24-bit significand), the width of a typical single-precision MCU FPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulatorPrecision {
    Extended,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveMeterConfig {
    pub accumulator_precision: AccumulatorPrecision,
    /// Spacing of the power samples, seconds.
    pub dt: f64,
}

/// Running kWh register updated with `p·dt` per sample, the way a meter that
/// multiplies power by elapsed time would keep it.
pub fn naive_integrating_meter<I>(p_samples: I, cfg: NaiveMeterConfig) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::Config(format!(
            "naive meter dt must be positive, got {}",
            cfg.dt
        )));
    }
    let per_sample = cfg.dt / JOULES_PER_KWH;
    let kwh = match cfg.accumulator_precision {
        AccumulatorPrecision::Extended => p_samples
            .into_iter()
            .fold(0.0f64, |acc, p| acc + p * per_sample),
        AccumulatorPrecision::Reduced => {
            let per_sample = per_sample as f32;
            f64::from(
                p_samples
                    .into_iter()
                    .fold(0.0f32, |acc, p| acc + p as f32 * per_sample),
            )
        }
    };
    Ok(kwh)
}
