// A week at 9.6 kW: a single-precision power-times-time register against
// the pulse-counting meter.
//
//     cargo run --release --example conventional_drift

use freqmeter::default_params;
use freqmeter::harness::{run_scenario, ScenarioSpec};
use freqmeter::oracle::{
    error_pct, expected_energy, naive_integrating_meter, AccumulatorPrecision, NaiveMeterConfig,
};

pub fn run_example() -> freqmeter::Result<()> {
    let week = 604_800.0;
    let exact = expected_energy(9600.0, week);
    println!("expected              {exact:>12.3} kWh");
    for (name, precision) in [
        ("binary64 integrator", AccumulatorPrecision::Extended),
        ("binary32 integrator", AccumulatorPrecision::Reduced),
    ] {
        let cfg = NaiveMeterConfig {
            accumulator_precision: precision,
            dt: 1.0,
        };
        let kwh = naive_integrating_meter(std::iter::repeat_n(9600.0, week as usize), cfg)?;
        println!("{name}   {kwh:>12.3} kWh  {:+.4}%", error_pct(exact, kwh)?);
    }
    let row = run_scenario(&ScenarioSpec::new(40.0, 240.0, week), &default_params())?;
    println!(
        "pulse counter         {:>12.3} kWh  {:+.4}%",
        row.energy_simulated_kwh, row.error_pct
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqmeter::Result<()> {
    run_example()
}
