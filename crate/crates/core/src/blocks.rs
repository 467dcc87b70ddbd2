//! Signal-chain primitives of the energy circuit.
//!
//! Each block is either a pure function of its input or a small struct that
//! owns exactly the state the block needs. Nothing here allocates after
//! construction, so a full chain can be stepped tens of millions of times per
//! simulated hour.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};

/// Minimum number of samples in one line period for the cycle averager.
pub const MIN_WINDOW_LEN: usize = 8;

/// `amplitude_peak · sin(2π·freq_hz·t + phase_rad)`.
#[inline]
pub fn sine_source(amplitude_peak: f64, freq_hz: f64, phase_rad: f64, t: f64) -> f64 {
    amplitude_peak * (TAU * freq_hz * t + phase_rad).sin()
}

/// Attenuator (`Gain`, `Gain 1`).
#[inline]
pub fn gain(x: f64, k: f64) -> f64 {
    k * x
}

/// Digital multiplier (`Product`).
#[inline]
pub fn multiply(a: f64, b: f64) -> f64 {
    a * b
}

/// The `u/sqrt 2` block.
#[inline]
pub fn scale_inv_sqrt2(x: f64) -> f64 {
    x * FRAC_1_SQRT_2
}

/// Removes the negative half-period of a signal.
#[inline]
pub fn half_wave_rectify(x: f64) -> f64 {
    x.max(0.0)
}

/// Electronic switch: `high_level` when `x` is strictly above `threshold`.
#[inline]
pub fn comparator(x: f64, threshold: f64, high_level: f64) -> f64 {
    if x > threshold {
        high_level
    } else {
        0.0
    }
}

/// True on a low-to-high transition of a two-level pulse signal.
#[inline]
pub fn rising_edge(previous: f64, current: f64, high_level: f64) -> bool {
    previous == 0.0 && current == high_level
}

/// Sample-and-hold latch triggered every `decimation` calls.
///
/// The first call after construction is a trigger instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleHold {
    held: f64,
    samples_since_trigger: u32,
    decimation: u32,
}

impl SampleHold {
    pub fn new(decimation: u32) -> Result<Self> {
        if decimation == 0 {
            return Err(Error::Config(
                "sample-and-hold decimation must be at least 1".into(),
            ));
        }
        Ok(Self {
            held: 0.0,
            samples_since_trigger: 0,
            decimation,
        })
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        if self.samples_since_trigger == 0 {
            self.held = x;
        }
        self.samples_since_trigger += 1;
        if self.samples_since_trigger == self.decimation {
            self.samples_since_trigger = 0;
        }
        self.held
    }

    pub fn held(&self) -> f64 {
        self.held
    }

    pub fn samples_since_trigger(&self) -> u32 {
        self.samples_since_trigger
    }
}

/// Moving average over exactly one line period.
///
/// Starts from an all-zero window, so the output ramps up over the first
/// period like a real filter powered on with empty memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleAverager {
    window: Vec<f64>,
    pos: usize,
    sum: f64,
}

impl CycleAverager {
    pub fn new(len: usize) -> Result<Self> {
        if len < MIN_WINDOW_LEN {
            return Err(Error::Config(format!(
                "averaging window of {len} samples is shorter than the minimum of {MIN_WINDOW_LEN}; \
                 reduce dt or the line frequency"
            )));
        }
        Ok(Self {
            window: vec![0.0; len],
            pos: 0,
            sum: 0.0,
        })
    }

    /// Window length covering one period of `line_freq_hz` at step `dt`.
    pub fn window_len(line_freq_hz: f64, dt: f64) -> usize {
        (1.0 / (line_freq_hz * dt)).round() as usize
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let oldest = std::mem::replace(&mut self.window[self.pos], x);
        self.sum += x - oldest;
        self.pos += 1;
        if self.pos == self.window.len() {
            self.pos = 0;
            // Resynchronize once per period so rounding in the running sum
            // cannot build up over long runs.
            self.sum = self.window.iter().sum();
        }
        self.mean()
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.sum / self.window.len() as f64
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Running sum as maintained incrementally.
    pub fn window_sum(&self) -> f64 {
        self.sum
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }
}

/// The circuit's low-pass filter: a one-period moving average cascaded with
/// a first-order smoother, followed by the calibration gain.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPass {
    averager: CycleAverager,
    smooth: f64,
    alpha: f64,
    k_cal: f64,
}

impl LowPass {
    pub fn new(window_len: usize, dt: f64, tau: f64, k_cal: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!(
                "filter time constant must be positive, got {tau}"
            )));
        }
        Ok(Self {
            averager: CycleAverager::new(window_len)?,
            smooth: 0.0,
            // Exact discretization of dy/dt = (x - y)/tau for piecewise
            // constant input; unit DC gain.
            alpha: -(-dt / tau).exp_m1(),
            k_cal,
        })
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let mean = self.averager.step(x);
        self.smooth += self.alpha * (mean - self.smooth);
        self.output()
    }

    #[inline]
    pub fn output(&self) -> f64 {
        self.k_cal * self.smooth
    }

    /// Output of the moving-average stage alone.
    pub fn cycle_mean(&self) -> f64 {
        self.averager.mean()
    }

    /// Smoother memory, before the calibration gain.
    pub fn smoothed(&self) -> f64 {
        self.smooth
    }

    pub fn averager(&self) -> &CycleAverager {
        &self.averager
    }
}

/// Phase-accumulator sine oscillator whose frequency tracks a control voltage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vco {
    phase: f64,
}

impl Vco {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts at `phase` (wrapped into `[0, 2π)`).
    pub fn with_phase(phase: f64) -> Self {
        Self {
            phase: wrap_phase(phase),
        }
    }

    /// Advances by `2π · sensitivity · max(v_ctrl, 0) · dt` and returns the
    /// sine of the new phase.
    #[inline]
    pub fn step(&mut self, v_ctrl: f64, dt: f64, sensitivity_hz_per_v: f64) -> f64 {
        let freq = sensitivity_hz_per_v * v_ctrl.max(0.0);
        self.phase = wrap_phase(self.phase + TAU * freq * dt);
        self.phase.sin()
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn output(&self) -> f64 {
        self.phase.sin()
    }
}

/// Wraps a phase into `[0, 2π)`.
#[inline]
pub fn wrap_phase(phase: f64) -> f64 {
    if (0.0..TAU).contains(&phase) {
        return phase;
    }
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for inputs just below a multiple.
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}
