// Meter one hour at 10 A / 230 V and print the register like the display.
//
//     cargo run --example quickstart

use freqmeter::harness::{run_scenario, ScenarioSpec};
use freqmeter::{default_params, Energy};

pub fn run_example() -> freqmeter::Result<()> {
    let params = default_params();
    let spec = ScenarioSpec::new(10.0, 230.0, 3600.0).with_label("kettle-hour");
    let row = run_scenario(&spec, &params)?;
    let display = Energy::from_pulses(row.pulse_count, params.pulses_per_kwh);
    println!("{}: {} pulses -> {display}", spec.label, row.pulse_count);
    println!(
        "expected {:.3} kWh, error {:+.3}%",
        row.energy_expected_kwh, row.error_pct
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqmeter::Result<()> {
    run_example()
}
