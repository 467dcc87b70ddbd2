//! Scenario runner, table reproduction, signal traces and CSV emission.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Deserialize;

use crate::circuit::{overload_check, CircuitParams, Meter, StepOutputs};
use crate::error::{Error, Result};
use crate::oracle;

/// Runs longer than this switch to the closed-form steady-state path once the
/// filter has settled (unless traces are requested).
pub const FAST_PATH_THRESHOLD_S: f64 = 3600.0;

/// Default trace decimation: one point per 10 ms at the default `dt`.
pub const DEFAULT_TRACE_DECIMATION: usize = 100;

/// One experiment: ideal sinusoidal current and voltage held for a duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub i_rms: f64,
    pub v_rms: f64,
    /// Current lags voltage by this angle.
    pub phase_rad: f64,
    pub line_freq_hz: f64,
    pub duration_s: f64,
    pub label: String,
}

impl ScenarioSpec {
    /// In-phase scenario at 50 Hz with a generated label.
    pub fn new(i_rms: f64, v_rms: f64, duration_s: f64) -> Self {
        Self {
            i_rms,
            v_rms,
            phase_rad: 0.0,
            line_freq_hz: 50.0,
            duration_s,
            label: format!("{i_rms}A-{v_rms}V-{duration_s}s"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = phase_rad;
        self
    }

    pub fn with_line_freq(mut self, line_freq_hz: f64) -> Self {
        self.line_freq_hz = line_freq_hz;
        self
    }

    pub fn active_power(&self) -> f64 {
        oracle::active_power(self.i_rms, self.v_rms, self.phase_rad)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::Config(format!(
                "scenario '{}': {what}, got {v}",
                self.label
            )))
        };
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad("duration must be positive", self.duration_s);
        }
        if !(self.i_rms >= 0.0 && self.i_rms.is_finite()) {
            return bad("current must be non-negative", self.i_rms);
        }
        if !(self.v_rms >= 0.0 && self.v_rms.is_finite()) {
            return bad("voltage must be non-negative", self.v_rms);
        }
        if !(self.line_freq_hz > 0.0 && self.line_freq_hz.is_finite()) {
            return bad("line frequency must be positive", self.line_freq_hz);
        }
        if !self.phase_rad.is_finite() {
            return bad("phase must be finite", self.phase_rad);
        }
        Ok(())
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub spec: ScenarioSpec,
    pub pulse_count: u64,
    pub energy_expected_kwh: f64,
    pub energy_simulated_kwh: f64,
    pub error_pct: f64,
    pub tripped: bool,
    pub wall_time_s: f64,
}

/// Named signals of the circuit that can be traced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signal {
    InstantaneousPower,
    InstantaneousActivePower,
    ActivePowerSignal,
    /// Filter output normalized to its steady-state value.
    FilterResponse,
    EnergySignal,
    EnergyPulses,
}

impl Signal {
    pub const ALL: [Signal; 6] = [
        Signal::InstantaneousPower,
        Signal::InstantaneousActivePower,
        Signal::ActivePowerSignal,
        Signal::FilterResponse,
        Signal::EnergySignal,
        Signal::EnergyPulses,
    ];

    /// Identifier used on the command line and in file names.
    pub fn key(self) -> &'static str {
        match self {
            Signal::InstantaneousPower => "instantaneous_power",
            Signal::InstantaneousActivePower => "instantaneous_active_power",
            Signal::ActivePowerSignal => "active_power_signal",
            Signal::FilterResponse => "filter_response",
            Signal::EnergySignal => "energy_signal",
            Signal::EnergyPulses => "energy_pulses",
        }
    }

    /// Label as printed on the circuit diagram.
    pub fn title(self) -> &'static str {
        match self {
            Signal::InstantaneousPower => "Instantaneous Power",
            Signal::InstantaneousActivePower => "Instantaneous (Active) Power",
            Signal::ActivePowerSignal => "Active Power Signal",
            Signal::FilterResponse => "Filter Response",
            Signal::EnergySignal => "Energy Signal",
            Signal::EnergyPulses => "Energy Pulses",
        }
    }

    fn sample(self, out: &StepOutputs, steady_output: f64) -> f64 {
        match self {
            Signal::InstantaneousPower => out.instantaneous_power,
            Signal::InstantaneousActivePower => out.instantaneous_active_power,
            Signal::ActivePowerSignal => out.active_power_signal,
            Signal::FilterResponse if steady_output > 0.0 => {
                out.active_power_signal / steady_output
            }
            Signal::FilterResponse => out.active_power_signal,
            Signal::EnergySignal => out.energy_signal,
            Signal::EnergyPulses => out.energy_pulse,
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Signal::ALL
            .into_iter()
            .find(|sig| sig.key() == wanted)
            .ok_or_else(|| {
                let known: Vec<_> = Signal::ALL.iter().map(|s| s.key()).collect();
                Error::Config(format!(
                    "unknown signal '{s}'; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Recorded samples of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceBuffer {
    pub signal: Signal,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub decimation: usize,
}

impl TraceBuffer {
    pub fn new(signal: Signal, decimation: usize) -> Self {
        Self {
            signal,
            t: Vec::new(),
            values: Vec::new(),
            decimation,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub signals: Vec<Signal>,
    /// Record every `decimation`-th step; 1 is full rate.
    pub decimation: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            signals: Vec::new(),
            decimation: DEFAULT_TRACE_DECIMATION,
        }
    }
}

/// Runs one scenario without traces.
pub fn run_scenario(spec: &ScenarioSpec, params: &CircuitParams) -> Result<RunResult> {
    run_scenario_traced(spec, params, &TraceOptions::default()).map(|(row, _)| row)
}

/// Runs one scenario, recording the requested signals.
///
/// The meter is stepped at `params.dt`. When the run is longer than
/// [`FAST_PATH_THRESHOLD_S`] and no traces are requested, only the settling
/// interval is stepped and the remainder is fast-forwarded in closed form.
pub fn run_scenario_traced(
    spec: &ScenarioSpec,
    params: &CircuitParams,
    traces: &TraceOptions,
) -> Result<(RunResult, Vec<TraceBuffer>)> {
    spec.validate()?;
    if traces.decimation == 0 {
        return Err(Error::Config("trace decimation must be at least 1".into()));
    }
    let started = Instant::now();
    let params = CircuitParams {
        line_freq_hz: spec.line_freq_hz,
        ..params.clone()
    };
    let mut meter = Meter::new(params.clone())?;
    let p_active = spec.active_power();
    let mut buffers: Vec<TraceBuffer> = traces
        .signals
        .iter()
        .map(|&s| TraceBuffer::new(s, traces.decimation))
        .collect();

    if overload_check(spec.i_rms, spec.v_rms, &params) {
        meter.trip();
    } else {
        let total_steps = (spec.duration_s / params.dt).round() as u64;
        let fast = buffers.is_empty() && spec.duration_s > FAST_PATH_THRESHOLD_S;
        let stepped = if fast {
            ((params.settle_time() / params.dt).ceil() as u64).min(total_steps)
        } else {
            total_steps
        };
        let steady = params.steady_filter_output(p_active);
        let mut source = Source::new(spec, params.dt);
        for k in 0..stepped {
            let (i, v) = source.sample(k);
            let out = meter.step(i, v);
            if !buffers.is_empty() && k % traces.decimation as u64 == 0 {
                let t = k as f64 * params.dt;
                for buf in &mut buffers {
                    buf.t.push(t);
                    buf.values.push(buf.signal.sample(&out, steady));
                }
            }
        }
        if fast {
            let remaining = spec.duration_s - stepped as f64 * params.dt;
            meter.advance_steady(p_active.max(0.0), remaining.max(0.0))?;
        }
        if meter.overflowed() {
            return Err(Error::CounterOverflow);
        }
    }

    let pulse_count = meter.pulse_count();
    let energy_expected_kwh = oracle::expected_energy(p_active, spec.duration_s);
    let energy_simulated_kwh = meter.energy().kwh();
    let error_pct = if energy_expected_kwh == 0.0 {
        if energy_simulated_kwh == 0.0 {
            0.0
        } else {
            f64::NAN
        }
    } else {
        oracle::error_pct(energy_expected_kwh, energy_simulated_kwh)?
    };
    let row = RunResult {
        spec: spec.clone(),
        pulse_count,
        energy_expected_kwh,
        energy_simulated_kwh,
        error_pct,
        tripped: meter.is_tripped(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok((row, buffers))
}

/// Ideal sinusoidal current and voltage at instants `k·dt`.
struct Source {
    omega_dt: f64,
    i_peak: f64,
    v_peak: f64,
    cos_phase: f64,
    sin_phase: f64,
}

impl Source {
    fn new(spec: &ScenarioSpec, dt: f64) -> Self {
        Self {
            omega_dt: std::f64::consts::TAU * spec.line_freq_hz * dt,
            i_peak: spec.i_rms * SQRT_2,
            v_peak: spec.v_rms * SQRT_2,
            cos_phase: spec.phase_rad.cos(),
            sin_phase: spec.phase_rad.sin(),
        }
    }

    #[inline]
    fn sample(&mut self, k: u64) -> (f64, f64) {
        let (s, c) = (self.omega_dt * k as f64).sin_cos();
        // sin(θ - φ) expanded so one sin_cos serves both signals.
        let i = self.i_peak * (s * self.cos_phase - c * self.sin_phase);
        (i, self.v_peak * s)
    }
}

/// The three result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    /// 9.6 kW (40 A, 240 V) over durations from one minute to one day.
    T1,
    /// 220 V for one hour at twelve currents from 0.1 A to 40 A.
    T2,
    /// 220 V for one week at 1, 20 and 40 A.
    T3,
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" | "1" => Ok(TableId::T1),
            "t2" | "2" => Ok(TableId::T2),
            "t3" | "3" => Ok(TableId::T3),
            _ => Err(Error::Config(format!(
                "unknown table '{s}'; expected t1, t2 or t3"
            ))),
        }
    }
}

pub const T1_DURATIONS_S: [f64; 10] = [
    60.0, 1800.0, 3600.0, 7200.0, 10800.0, 14400.0, 21600.0, 28800.0, 43200.0, 86400.0,
];
pub const T2_CURRENTS_A: [f64; 12] = [
    0.1, 1.0, 2.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0,
];
pub const T3_CURRENTS_A: [f64; 3] = [1.0, 20.0, 40.0];
pub const WEEK_S: f64 = 604_800.0;

/// Row set of a table, in printed order.
pub fn table_scenarios(table: TableId) -> Vec<ScenarioSpec> {
    match table {
        TableId::T1 => T1_DURATIONS_S
            .iter()
            .map(|&d| ScenarioSpec::new(40.0, 240.0, d).with_label(format!("T1/{d}s")))
            .collect(),
        TableId::T2 => T2_CURRENTS_A
            .iter()
            .map(|&i| ScenarioSpec::new(i, 220.0, 3600.0).with_label(format!("T2/{i}A")))
            .collect(),
        TableId::T3 => T3_CURRENTS_A
            .iter()
            .map(|&i| ScenarioSpec::new(i, 220.0, WEEK_S).with_label(format!("T3/{i}A")))
            .collect(),
    }
}

pub fn run_table(table: TableId, params: &CircuitParams) -> Result<Vec<RunResult>> {
    run_many(&table_scenarios(table), params)
}

/// Runs independent scenarios on all available cores; output keeps input order.
pub fn run_many(specs: &[ScenarioSpec], params: &CircuitParams) -> Result<Vec<RunResult>> {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(specs.len());
    if workers <= 1 {
        return specs.iter().map(|s| run_scenario(s, params)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunResult>>>> =
        specs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(idx) else { break };
                let row = run_scenario(spec, params);
                *slots[idx].lock().expect("result slot poisoned") = Some(row);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("every scenario runs")
        })
        .collect()
}

pub const RESULTS_HEADER: [&str; 10] = [
    "label",
    "i_rms_a",
    "v_rms_v",
    "duration_s",
    "hours",
    "energy_expected_kwh",
    "energy_simulated_kwh",
    "error_pct",
    "pulse_count",
    "tripped",
];

/// Formats with `decimals` places, never printing a negative zero.
fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Shortest decimal with at most `max_decimals` places.
fn trimmed(x: f64, max_decimals: usize) -> String {
    let s = fixed(x, max_decimals);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn emit_results_csv<W: Write>(rows: &[RunResult], destination: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(destination);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            r.spec.label.clone(),
            r.spec.i_rms.to_string(),
            r.spec.v_rms.to_string(),
            r.spec.duration_s.to_string(),
            trimmed(r.spec.duration_s / 3600.0, 6),
            fixed(r.energy_expected_kwh, 3),
            fixed(r.energy_simulated_kwh, 3),
            fixed(r.error_pct, 3),
            r.pulse_count.to_string(),
            r.tripped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRecord {
    pub label: String,
    pub i_rms_a: f64,
    pub v_rms_v: f64,
    pub duration_s: f64,
    pub hours: f64,
    pub energy_expected_kwh: f64,
    pub energy_simulated_kwh: f64,
    pub error_pct: f64,
    pub pulse_count: u64,
    pub tripped: bool,
}

pub fn parse_results_csv<R: Read>(source: R) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_reader(source);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER) {
        return Err(Error::Config(format!(
            "unexpected results header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|rec| rec.map_err(Error::from))
        .collect()
}

/// Writes `# signal: <title>`, a `t_s,value` header and one line per sample.
pub fn emit_trace_csv<W: Write>(trace: &TraceBuffer, mut destination: W) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::Config(format!(
            "trace '{}' has no samples",
            trace.signal.key()
        )));
    }
    let mut out = String::with_capacity(32 * trace.len());
    out.push_str("# signal: ");
    out.push_str(trace.signal.title());
    out.push_str("\nt_s,value\n");
    for (t, v) in trace.t.iter().zip(&trace.values) {
        out.push_str(&trimmed(*t, 9));
        out.push(',');
        out.push_str(&v.to_string());
        out.push('\n');
    }
    destination.write_all(out.as_bytes())?;
    destination.flush()?;
    Ok(())
}
