// Capture every circuit signal at full scale (40 A, 240 V) for plotting.
//
//     cargo run --release --example signal_traces [OUT_DIR] [SECONDS]
//
// Writes one `<signal>.csv` per signal into `OUT_DIR` (default: `traces`).

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use freqmeter::default_params;
use freqmeter::harness::{emit_trace_csv, run_scenario_traced, ScenarioSpec, Signal, TraceOptions};

fn main() -> freqmeter::Result<()> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "traces".into()));
    let seconds: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5.0);
    fs::create_dir_all(&out_dir)?;

    let opts = TraceOptions {
        signals: Signal::ALL.to_vec(),
        ..TraceOptions::default()
    };
    let spec = ScenarioSpec::new(40.0, 240.0, seconds);
    let (row, traces) = run_scenario_traced(&spec, &default_params(), &opts)?;
    for trace in &traces {
        let path = out_dir.join(format!("{}.csv", trace.signal.key()));
        emit_trace_csv(trace, BufWriter::new(File::create(&path)?))?;
        println!(
            "{:<32} {} points -> {}",
            trace.signal.title(),
            trace.len(),
            path.display()
        );
    }
    println!("{} pulses in {seconds} s", row.pulse_count);
    Ok(())
}
