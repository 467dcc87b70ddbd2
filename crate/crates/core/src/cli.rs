//! Command-line front end.
//!
//! Parameters are layered: built-in defaults, then an optional TOML file
//! (`--config`), then `--dt`, then each `--set key=value` in order.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::circuit::{default_params, CircuitParams};
use crate::error::{Error, Result};
use crate::harness::{
    self, emit_results_csv, emit_trace_csv, run_scenario, run_scenario_traced, ScenarioSpec,
    Signal, TableId, TraceOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_COUNTER_OVERFLOW: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "freqmeter",
    version,
    about = "Simulate a frequency-method energy meter and reproduce its error tables"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Output file (standard output when omitted). For `traces`, an existing
    /// directory receives one `<signal>.csv` per signal.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Override one circuit parameter; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Simulation step in seconds.
    #[arg(long, global = true, value_name = "SECONDS")]
    pub dt: Option<f64>,

    /// TOML file of circuit parameters (same keys as `params-dump`).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Run one scenario and print its result row.
    Scenario(ScenarioArgs),
    /// Reproduce one of the result tables.
    Table {
        #[arg(long, value_parser = parse_table_id)]
        id: TableId,
    },
    /// Record signal traces for one scenario.
    Traces {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated signal names.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_signal)]
        signals: Vec<Signal>,
        /// Keep every n-th step (1 is full rate).
        #[arg(long, default_value_t = harness::DEFAULT_TRACE_DECIMATION)]
        decimation: usize,
    },
    /// Print the effective circuit parameters as TOML.
    ParamsDump,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ScenarioArgs {
    /// RMS current, amperes.
    #[arg(long)]
    pub amps: f64,
    /// RMS voltage, volts.
    #[arg(long)]
    pub volts: f64,
    /// Duration, seconds.
    #[arg(long)]
    pub seconds: f64,
    /// Current lag behind voltage, radians.
    #[arg(long, default_value_t = 0.0)]
    pub phase: f64,
    /// Line frequency, Hz (defaults to the `line_freq_hz` parameter).
    #[arg(long)]
    pub freq: Option<f64>,
    #[arg(long)]
    pub label: Option<String>,
}

impl ScenarioArgs {
    fn to_spec(&self, params: &CircuitParams) -> ScenarioSpec {
        let spec = ScenarioSpec::new(self.amps, self.volts, self.seconds)
            .with_phase(self.phase)
            .with_line_freq(self.freq.unwrap_or(params.line_freq_hz));
        match &self.label {
            Some(label) => spec.with_label(label.clone()),
            None => spec,
        }
    }
}

fn parse_table_id(s: &str) -> std::result::Result<TableId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_signal(s: &str) -> std::result::Result<Signal, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    CliConfig::try_parse_from(argv)
}

/// Builds the effective parameters from the layered sources. Unknown keys are
/// rejected before anything runs.
pub fn load_params(
    config_file: Option<&Path>,
    dt: Option<f64>,
    overrides: &[String],
) -> Result<CircuitParams> {
    let mut table = match toml::Value::try_from(default_params()) {
        Ok(toml::Value::Table(t)) => t,
        _ => unreachable!("parameters serialize to a table"),
    };
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path)?;
        let file: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        for (key, value) in file {
            set_known(&mut table, &key, value, &path.display().to_string())?;
        }
    }
    if let Some(dt) = dt {
        table.insert("dt".into(), toml::Value::Float(dt));
    }
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{item}' is not KEY=VALUE")))?;
        let value = parse_value(raw.trim())
            .ok_or_else(|| Error::Config(format!("override '{item}': cannot parse value")))?;
        set_known(&mut table, key.trim(), value, "--set")?;
    }
    let params: CircuitParams = toml::Value::Table(table)
        .try_into()
        .map_err(|e| Error::Config(format!("invalid parameters: {e}")))?;
    params.validate()?;
    Ok(params)
}

fn set_known(table: &mut toml::Table, key: &str, value: toml::Value, origin: &str) -> Result<()> {
    match table.get_mut(key) {
        Some(slot) => {
            *slot = value;
            Ok(())
        }
        None => Err(Error::Config(format!(
            "{origin}: unknown parameter '{key}'"
        ))),
    }
}

fn parse_value(raw: &str) -> Option<toml::Value> {
    let doc: toml::Table = format!("v = {raw}").parse().ok()?;
    doc.get("v").cloned()
}

/// Executes a parsed command.
pub fn run(config: &CliConfig) -> Result<()> {
    let params = load_params(config.config.as_deref(), config.dt, &config.overrides)?;
    match &config.command {
        Command::Scenario(args) => {
            let row = run_scenario(&args.to_spec(&params), &params)?;
            emit_results_csv(&[row], open_output(config.out.as_deref())?)
        }
        Command::Table { id } => {
            let rows = harness::run_table(*id, &params)?;
            emit_results_csv(&rows, open_output(config.out.as_deref())?)
        }
        Command::Traces {
            scenario,
            signals,
            decimation,
        } => {
            let opts = TraceOptions {
                signals: signals.clone(),
                decimation: *decimation,
            };
            let (_, traces) = run_scenario_traced(&scenario.to_spec(&params), &params, &opts)?;
            match config.out.as_deref() {
                Some(dir) if dir.is_dir() => {
                    for trace in &traces {
                        let file = File::create(dir.join(format!("{}.csv", trace.signal.key())))?;
                        emit_trace_csv(trace, BufWriter::new(file))?;
                    }
                }
                out => {
                    let mut sink = open_output(out)?;
                    for trace in &traces {
                        emit_trace_csv(trace, &mut sink)?;
                    }
                }
            }
            Ok(())
        }
        Command::ParamsDump => {
            let text = toml::to_string(&params)
                .map_err(|e| Error::Config(format!("cannot serialize parameters: {e}")))?;
            let mut out = open_output(config.out.as_deref())?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::CounterOverflow => EXIT_COUNTER_OVERFLOW,
        Error::Io(_) => EXIT_IO,
        Error::Csv(e) if e.is_io_error() => EXIT_IO,
        Error::Csv(_) => EXIT_IO,
    }
}

/// Parses `argv`, runs, and returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("freqmeter: {e}");
            exit_code(&e)
        }
    }
}
