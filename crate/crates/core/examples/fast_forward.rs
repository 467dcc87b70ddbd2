// Compare the closed-form steady-state path with full stepping.
//
//     cargo run --release --example fast_forward

use std::f64::consts::SQRT_2;

use freqmeter::blocks::sine_source;
use freqmeter::{default_params, Meter};

pub fn run_example() -> freqmeter::Result<()> {
    let params = default_params();
    let (i_rms, v_rms, seconds) = (17.5, 230.0, 120.0);
    let mut stepped = Meter::new(params.clone())?;
    let settle = (params.settle_time() / params.dt).ceil() as u64;
    let total = settle + (seconds / params.dt).round() as u64;

    let mut fast = None;
    for k in 0..total {
        if k == settle {
            fast = Some(stepped.clone());
        }
        let t = k as f64 * params.dt;
        stepped.step(
            sine_source(i_rms * SQRT_2, params.line_freq_hz, 0.0, t),
            sine_source(v_rms * SQRT_2, params.line_freq_hz, 0.0, t),
        );
    }
    let mut fast = fast.expect("settle interval is shorter than the run");
    fast.advance_steady(i_rms * v_rms, seconds)?;

    println!(
        "stepped: {} pulses, fast-forward: {} pulses",
        stepped.pulse_count(),
        fast.pulse_count()
    );
    println!(
        "pulse rate {:.4} Hz",
        params.pulse_frequency_hz(i_rms * v_rms)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqmeter::Result<()> {
    run_example()
}
