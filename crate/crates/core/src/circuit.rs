//! The energy circuit: attenuators, multiplier, `1/√2`, sample-and-hold,
//! low-pass filter, VCO, rectifier, switch and the BCD pulse register, wired
//! in that order and stepped at a fixed `dt`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bcd::Bcd32;
use crate::blocks::{self, CycleAverager, LowPass, SampleHold, Vco};
use crate::error::{Error, Result};

/// Every calibration constant, rate and limit of the circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Simulation step, seconds.
    pub dt: f64,
    pub line_freq_hz: f64,
    /// Current attenuator, volts per ampere (applied to the peak signal).
    pub gain_i: f64,
    /// Voltage attenuator, volts per volt (applied to the peak signal).
    pub gain_v: f64,
    /// Filter output regulation gain.
    pub k_cal: f64,
    /// Time constant of the smoothing stage, seconds.
    pub filter_tau: f64,
    pub sh_decimation: u32,
    pub vco_sensitivity_hz_per_v: f64,
    pub pulse_high_v: f64,
    pub pulses_per_kwh: u32,
    pub i_rms_limit: f64,
    pub v_rms_limit: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        let i_rms_limit = 40.0;
        let v_rms_limit = 240.0;
        let full_scale_v = 5.0;
        let gain_i = full_scale_v / (i_rms_limit * SQRT_2);
        let gain_v = full_scale_v / (v_rms_limit * SQRT_2);
        // Scaled product after 1/√2 has mean gain_i·gain_v·P/√2; regulate the
        // filter output to 1 V per kW (9.6 V at full scale).
        let k_cal = SQRT_2 / (1000.0 * gain_i * gain_v);
        Self {
            dt: 1e-4,
            line_freq_hz: 50.0,
            gain_i,
            gain_v,
            k_cal,
            filter_tau: 0.5,
            sh_decimation: 10,
            vco_sensitivity_hz_per_v: 1000.0 / 3600.0,
            pulse_high_v: 5.0,
            pulses_per_kwh: 1000,
            i_rms_limit,
            v_rms_limit,
        }
    }
}

/// Default configuration: 40 A / 240 V full scale, 1000 pulses per kWh.
pub fn default_params() -> CircuitParams {
    CircuitParams::default()
}

/// Relative tolerance of the calibration consistency check.
const CALIBRATION_RTOL: f64 = 1e-9;

impl CircuitParams {
    /// Filter output volts per kilowatt of active power in steady state.
    pub fn volts_per_kw(&self) -> f64 {
        1000.0 * self.k_cal * self.gain_i * self.gain_v / SQRT_2
    }

    /// Steady-state filter output for constant active power.
    pub fn steady_filter_output(&self, p_active_watts: f64) -> f64 {
        self.k_cal * self.gain_i * self.gain_v * p_active_watts / SQRT_2
    }

    /// Steady-state energy-pulse frequency for constant active power.
    pub fn pulse_frequency_hz(&self, p_active_watts: f64) -> f64 {
        self.vco_sensitivity_hz_per_v * self.steady_filter_output(p_active_watts).max(0.0)
    }

    /// Pulses per kWh implied by the gains, `k_cal` and VCO sensitivity.
    pub fn implied_pulses_per_kwh(&self) -> f64 {
        self.vco_sensitivity_hz_per_v * 3600.0 * self.volts_per_kw()
    }

    pub fn averaging_window_len(&self) -> usize {
        CycleAverager::window_len(self.line_freq_hz, self.dt)
    }

    /// Stepped time needed before the filter output is steady to well below
    /// one part in 10⁸.
    pub fn settle_time(&self) -> f64 {
        20.0 * self.filter_tau + 1.0 / self.line_freq_hz
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("line_freq_hz", self.line_freq_hz),
            ("gain_i", self.gain_i),
            ("gain_v", self.gain_v),
            ("k_cal", self.k_cal),
            ("filter_tau", self.filter_tau),
            ("vco_sensitivity_hz_per_v", self.vco_sensitivity_hz_per_v),
            ("pulse_high_v", self.pulse_high_v),
            ("i_rms_limit", self.i_rms_limit),
            ("v_rms_limit", self.v_rms_limit),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        if self.sh_decimation < 1 {
            return Err(Error::Config("sh_decimation must be at least 1".into()));
        }
        if self.pulses_per_kwh == 0 {
            return Err(Error::Config("pulses_per_kwh must be at least 1".into()));
        }
        let len = self.averaging_window_len();
        if len < blocks::MIN_WINDOW_LEN {
            return Err(Error::Config(format!(
                "one line period spans {len} steps; at least {} are required",
                blocks::MIN_WINDOW_LEN
            )));
        }
        let implied = self.implied_pulses_per_kwh();
        let target = f64::from(self.pulses_per_kwh);
        if ((implied - target) / target).abs() > CALIBRATION_RTOL {
            return Err(Error::Config(format!(
                "calibration mismatch: gains, k_cal and VCO sensitivity give {implied} pulses/kWh, \
                 pulses_per_kwh is {target}"
            )));
        }
        Ok(())
    }
}

/// Protection check on the RMS inputs; the limits themselves are allowed.
pub fn overload_check(i_rms: f64, v_rms: f64, params: &CircuitParams) -> bool {
    i_rms > params.i_rms_limit || v_rms > params.v_rms_limit
}

/// Energy as an integer number of milli-kWh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Energy {
    milli_kwh: u64,
}

impl Energy {
    pub fn from_milli_kwh(milli_kwh: u64) -> Self {
        Self { milli_kwh }
    }

    /// Readout of `pulse_count` through the `u/ppk` divider, truncated to
    /// whole milli-kWh.
    pub fn from_pulses(pulse_count: u64, pulses_per_kwh: u32) -> Self {
        let milli = u128::from(pulse_count) * 1000 / u128::from(pulses_per_kwh);
        Self {
            milli_kwh: milli as u64,
        }
    }

    pub fn milli_kwh(self) -> u64 {
        self.milli_kwh
    }

    pub fn kwh(self) -> f64 {
        self.milli_kwh as f64 / 1000.0
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{:03} KWh",
            self.milli_kwh / 1000,
            self.milli_kwh % 1000
        )
    }
}

/// `pulse_count / 1000` kWh, exact.
pub fn energy_kwh(pulse_count: u64) -> Energy {
    Energy::from_milli_kwh(pulse_count)
}

/// Fixed three decimals with the `KWh` suffix.
pub fn display_format(energy: Energy) -> String {
    energy.to_string()
}

/// The signals visible at the labelled points of the circuit for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOutputs {
    pub instantaneous_power: f64,
    pub instantaneous_active_power: f64,
    /// Filter output, volts.
    pub active_power_signal: f64,
    /// VCO sine.
    pub energy_signal: f64,
    /// 0 or `pulse_high_v`.
    pub energy_pulse: f64,
    pub pulse_emitted: bool,
}

/// Complete state of one meter.
///
/// The VCO starts half a cycle in, with the switch output low. A pulse is
/// counted on each rising edge, i.e. each time the VCO phase wraps, so the
/// register rounds the delivered cycles to the nearest whole pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Meter {
    params: CircuitParams,
    sh: SampleHold,
    filter: LowPass,
    vco: Vco,
    last_pulse_level: f64,
    pulses: Bcd32,
    overflowed: bool,
    tripped: bool,
    steps: u64,
    fast_seconds: f64,
}

impl Meter {
    pub fn new(params: CircuitParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            sh: SampleHold::new(params.sh_decimation)?,
            filter: LowPass::new(
                params.averaging_window_len(),
                params.dt,
                params.filter_tau,
                params.k_cal,
            )?,
            // f64 PI sits just below π where the sine is still positive.
            vco: Vco::with_phase(PI.next_up()),
            last_pulse_level: 0.0,
            pulses: Bcd32::ZERO,
            overflowed: false,
            tripped: false,
            steps: 0,
            fast_seconds: 0.0,
            params,
        })
    }

    pub fn params(&self) -> &CircuitParams {
        &self.params
    }

    /// Advances the full chain by one `dt` given the instantaneous (peak
    /// scale) current and voltage. A tripped meter emits nothing.
    #[inline]
    pub fn step(&mut self, i_sample: f64, v_sample: f64) -> StepOutputs {
        let p = &self.params;
        if self.tripped {
            self.steps += 1;
            return StepOutputs::default();
        }
        let i = blocks::gain(i_sample, p.gain_i);
        let v = blocks::gain(v_sample, p.gain_v);
        let instantaneous_power = blocks::multiply(i, v);
        let instantaneous_active_power = blocks::scale_inv_sqrt2(instantaneous_power);
        let held = self.sh.step(instantaneous_active_power);
        let active_power_signal = self.filter.step(held);
        let energy_signal = self.vco.step(
            active_power_signal.max(0.0),
            p.dt,
            p.vco_sensitivity_hz_per_v,
        );
        let energy_pulse = blocks::comparator(
            blocks::half_wave_rectify(energy_signal),
            0.0,
            p.pulse_high_v,
        );
        let pulse_emitted =
            blocks::rising_edge(self.last_pulse_level, energy_pulse, p.pulse_high_v);
        self.last_pulse_level = energy_pulse;
        if pulse_emitted {
            self.count_pulses(1);
        }
        self.steps += 1;
        StepOutputs {
            instantaneous_power,
            instantaneous_active_power,
            active_power_signal,
            energy_signal,
            energy_pulse,
            pulse_emitted,
        }
    }

    /// Fast-forwards a settled meter under constant active power.
    ///
    /// In steady state the VCO frequency is constant, so the phase advances
    /// by `2π·f·duration` in closed form; every whole cycle crossed is one
    /// pulse and the fractional phase carries over.
    pub fn advance_steady(&mut self, p_active_watts: f64, duration: f64) -> Result<()> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Config(format!(
                "fast-forward duration must be finite and non-negative, got {duration}"
            )));
        }
        if !(p_active_watts >= 0.0 && p_active_watts.is_finite()) {
            return Err(Error::Config(format!(
                "active power must be finite and non-negative, got {p_active_watts}"
            )));
        }
        if duration == 0.0 {
            return Ok(());
        }
        self.fast_seconds += duration;
        if self.tripped {
            return Ok(());
        }
        let cycles =
            self.vco.phase() / TAU + self.params.pulse_frequency_hz(p_active_watts) * duration;
        // Counts within calibration tolerance of a whole cycle land on it.
        let nearest = cycles.round();
        let whole = if (cycles - nearest).abs() <= CALIBRATION_RTOL * cycles.max(1.0) {
            nearest
        } else {
            cycles.floor()
        };
        self.vco = Vco::with_phase((cycles - whole).max(0.0) * TAU);
        self.last_pulse_level = blocks::comparator(
            blocks::half_wave_rectify(self.vco.output()),
            0.0,
            self.params.pulse_high_v,
        );
        self.count_pulses(whole as u64);
        Ok(())
    }

    fn count_pulses(&mut self, n: u64) {
        let step = if n == 1 {
            self.pulses.increment()
        } else {
            self.pulses.add_count(n)
        };
        self.pulses = step.reg;
        self.overflowed |= step.overflow;
    }

    /// Latches the protection trip; no pulses are produced afterwards.
    pub fn trip(&mut self) {
        self.tripped = true;
    }

    pub fn is_tripped(&self) -> bool {
        self.tripped
    }

    /// True once the pulse register has saturated.
    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn pulse_register(&self) -> Bcd32 {
        self.pulses
    }

    pub fn pulse_count(&self) -> u64 {
        u64::from(self.pulses.value())
    }

    pub fn energy(&self) -> Energy {
        Energy::from_pulses(self.pulse_count(), self.params.pulses_per_kwh)
    }

    /// Simulated time, seconds.
    pub fn t(&self) -> f64 {
        self.steps as f64 * self.params.dt + self.fast_seconds
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn filter(&self) -> &LowPass {
        &self.filter
    }

    pub fn sample_hold(&self) -> &SampleHold {
        &self.sh
    }

    pub fn vco(&self) -> &Vco {
        &self.vco
    }

    pub fn last_pulse_level(&self) -> f64 {
        self.last_pulse_level
    }
}
