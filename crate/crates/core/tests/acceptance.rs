//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p freqmeter --test acceptance -- --nocapture --test-threads 1`
//! to see them in order.

use std::f64::consts::{SQRT_2, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use freqmeter::bcd::{Bcd32, BCD_MAX};
use freqmeter::blocks::{sine_source, LowPass};
use freqmeter::circuit::{default_params, energy_kwh, Meter};
use freqmeter::harness::{
    parse_results_csv, run_scenario, run_table, ResultRecord, ScenarioSpec, TableId,
};
use freqmeter::oracle::{
    error_pct, expected_energy, naive_integrating_meter, AccumulatorPrecision, NaiveMeterConfig,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("AC-{id:02} {verdict} {name}: {detail}");
    assert!(pass, "AC-{id:02} {name} failed: {detail}");
}

fn freqmeter(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_freqmeter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_table_cli(id: &str, out: &Path) -> Vec<ResultRecord> {
    let out_str = out.to_str().unwrap();
    let status = freqmeter(&["table", "--id", id, "--out", out_str]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    parse_results_csv(std::fs::File::open(out).unwrap()).unwrap()
}

fn expected_column_matches(rows: &[ResultRecord], printed: &[f64]) -> bool {
    rows.len() == printed.len()
        && rows
            .iter()
            .zip(printed)
            .all(|(r, p)| (r.energy_expected_kwh - p).abs() < 1e-9)
}

#[test]
fn ac01_table1_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let rows = run_table_cli("t1", &dir.path().join("t1.csv"));
    let elapsed = started.elapsed().as_secs_f64();

    let printed = [0.16, 4.8, 9.6, 19.2, 28.8, 38.4, 57.6, 76.8, 115.2, 230.4];
    let band = |d: f64| match d {
        d if d <= 60.0 => 2.5,
        d if d <= 1800.0 => 0.3,
        d if d <= 14400.0 => 0.15,
        _ => 0.12,
    };
    let mut ok = expected_column_matches(&rows, &printed) && elapsed <= 120.0;
    let mut detail = Vec::new();
    for r in &rows {
        let within = r.error_pct.abs() <= band(r.duration_s);
        ok &= within;
        detail.push(format!("{}s:{:+.3}%", r.duration_s, r.error_pct));
    }
    report(
        1,
        "Table 1 (9.6 kW vs time)",
        ok,
        &format!("{} in {elapsed:.1}s", detail.join(" ")),
    );
}

#[test]
fn ac02_table2_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let rows = run_table_cli("t2", &dir.path().join("t2.csv"));
    let printed = [
        0.022, 0.22, 0.44, 1.1, 1.54, 2.2, 3.3, 4.4, 5.5, 6.6, 7.7, 8.8,
    ];
    let in_band = rows.iter().all(|r| (-0.5..=0.1).contains(&r.error_pct));
    let detail: Vec<_> = rows
        .iter()
        .map(|r| format!("{}A:{:+.3}%", r.i_rms_a, r.error_pct))
        .collect();
    report(
        2,
        "Table 2 (220 V, 1 h vs current)",
        in_band && expected_column_matches(&rows, &printed),
        &detail.join(" "),
    );
}

#[test]
fn ac03_table3_reproduction() {
    let rows = run_table(TableId::T3, &default_params()).unwrap();
    let errs: Vec<f64> = rows.iter().map(|r| r.error_pct).collect();
    let max = errs.iter().cloned().fold(f64::MIN, f64::max);
    let min = errs.iter().cloned().fold(f64::MAX, f64::min);
    let expected_ok = rows
        .iter()
        .zip([36.96, 739.2, 1478.4])
        .all(|(r, p)| (r.energy_expected_kwh - p).abs() < 1e-9);
    let pass =
        rows.len() == 3 && expected_ok && errs.iter().all(|e| e.abs() <= 0.15) && max - min <= 0.05;
    report(
        3,
        "Table 3 (220 V, one week)",
        pass,
        &format!("errors {errs:?}, spread {:.5} pp", max - min),
    );
}

#[test]
fn ac04_error_does_not_accumulate() {
    let rows = run_table(TableId::T1, &default_params()).unwrap();
    let long: Vec<_> = rows
        .iter()
        .filter(|r| r.spec.duration_s >= 1800.0)
        .collect();
    let mut pass = long.len() == 9;
    let mut detail = Vec::new();
    for pair in long.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let ok = b.error_pct.abs() <= a.error_pct.abs() + 0.01;
        pass &= ok;
        detail.push(format!(
            "{}->{}s {:.4}->{:.4}",
            a.spec.duration_s,
            b.spec.duration_s,
            a.error_pct.abs(),
            b.error_pct.abs()
        ));
    }
    report(4, "non-accumulation at 9.6 kW", pass, &detail.join(", "));
}

#[test]
fn ac05_quantization_and_calibration() {
    let mut exact = true;
    for n in 0..=10_000_000u64 {
        let e = energy_kwh(n);
        // Independent route: binary division then decimal rounding.
        exact &= e.milli_kwh() == n
            && e.kwh() == n as f64 / 1000.0
            && e.to_string() == format!("{:.3} KWh", n as f64 / 1000.0);
    }
    exact &= energy_kwh(23_589).to_string() == "23.589 KWh";

    let params = default_params();
    let (v_rms, i_rms) = (240.0, 1000.0 / 240.0);
    let mut meter = Meter::new(params.clone()).unwrap();
    let settle = (params.settle_time() / params.dt).ceil() as u64;
    let hour = (3600.0 / params.dt).round() as u64;
    let mut at_settle = 0;
    for k in 0..settle + hour {
        if k == settle {
            at_settle = meter.pulse_count();
        }
        let t = k as f64 * params.dt;
        meter.step(
            sine_source(i_rms * SQRT_2, 50.0, 0.0, t),
            sine_source(v_rms * SQRT_2, 50.0, 0.0, t),
        );
    }
    let pulses = meter.pulse_count() - at_settle;
    report(
        5,
        "integer-pulse readout and 1 kW calibration",
        exact && (998..=1002).contains(&pulses),
        &format!(
            "readout exact for 0..=1e7: {exact}; 1 kW for 1 h after settling: {pulses} pulses"
        ),
    );
}

/// BCD encoding built from the decimal string, independent of `Bcd32`.
fn bcd_oracle(n: u32) -> u32 {
    u32::from_str_radix(&n.to_string(), 16).unwrap()
}

#[test]
fn ac06_bcd_matches_shadow_counter() {
    let mut mismatches = 0u32;
    let mut reg = Bcd32::ZERO;
    for shadow in 1..=100_000u32 {
        reg = reg.increment().reg;
        mismatches += u32::from(reg.bits() != bcd_oracle(shadow));
    }
    let mut rng = StdRng::seed_from_u64(0x6263_6433);
    for _ in 0..100_000 {
        let start = rng.gen_range(0..BCD_MAX);
        let step = Bcd32::from_bits(bcd_oracle(start)).unwrap().increment();
        mismatches += u32::from(step.overflow || step.reg.bits() != bcd_oracle(start + 1));
    }
    let top = Bcd32::from_bits(bcd_oracle(BCD_MAX)).unwrap().increment();
    let saturates = top.overflow && top.reg.bits() == 0x9999_9999;
    report(
        6,
        "BCD register vs integer counter",
        mismatches == 0 && saturates,
        &format!("2e5 increments, {mismatches} mismatches; saturates with flag: {saturates}"),
    );
}

#[test]
fn ac07_fast_path_matches_stepping() {
    let params = default_params();
    let mut rng = StdRng::seed_from_u64(7);
    let settle = (params.settle_time() / params.dt).ceil() as u64;
    let mut worst = 0i64;
    let mut pairs = Vec::new();
    for _ in 0..20 {
        let p: f64 = rng.gen_range(50.0..9600.0);
        let secs: f64 = rng.gen_range(1.0..600.0);
        let i_rms = p / 240.0;
        let mut meter = Meter::new(params.clone()).unwrap();
        let drive = |meter: &mut Meter, from: u64, to: u64| {
            for k in from..to {
                let t = k as f64 * params.dt;
                meter.step(
                    sine_source(i_rms * SQRT_2, 50.0, 0.0, t),
                    sine_source(240.0 * SQRT_2, 50.0, 0.0, t),
                );
            }
        };
        drive(&mut meter, 0, settle);
        let mut fast = meter.clone();
        let n = (secs / params.dt).round() as u64;
        drive(&mut meter, settle, settle + n);
        fast.advance_steady(p, n as f64 * params.dt).unwrap();
        let diff = fast.pulse_count() as i64 - meter.pulse_count() as i64;
        worst = worst.max(diff.abs());
        pairs.push(format!("{p:.0}W/{secs:.0}s:{diff:+}"));
    }
    report(
        7,
        "fast path vs full stepping",
        worst <= 1,
        &format!("max |diff| {worst} over {}", pairs.join(" ")),
    );
}

#[test]
fn ac08_conventional_method_drifts() {
    let week = 604_800.0;
    let exact = expected_energy(9600.0, week);
    let cfg = NaiveMeterConfig {
        accumulator_precision: AccumulatorPrecision::Reduced,
        dt: 1.0,
    };
    let naive = naive_integrating_meter(std::iter::repeat_n(9600.0, week as usize), cfg).unwrap();
    let row = run_scenario(&ScenarioSpec::new(40.0, 240.0, week), &default_params()).unwrap();
    let naive_err = error_pct(exact, naive).unwrap();
    report(
        8,
        "conventional integrator vs frequency method",
        naive_err.abs() > row.error_pct.abs(),
        &format!(
            "expected {exact:.3} kWh; reduced-precision integrator {naive:.3} ({naive_err:+.4}%), \
             pulses {:.3} ({:+.6}%)",
            row.energy_simulated_kwh, row.error_pct
        ),
    );
}

#[test]
fn ac09_filter_recovers_dc() {
    let params = default_params();
    let mut rng = StdRng::seed_from_u64(9);
    let settle = (20.0 * params.filter_tau / params.dt) as u64 + 400;
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let offset: f64 = rng.gen_range(0.1..20.0);
        let amplitude: f64 = rng.gen_range(0.0..25.0);
        let phase: f64 = rng.gen_range(0.0..TAU);
        // Line frequency and the power ripple at twice it.
        let freq = params.line_freq_hz * f64::from(1 + trial % 2);
        let mut lp = LowPass::new(
            params.averaging_window_len(),
            params.dt,
            params.filter_tau,
            params.k_cal,
        )
        .unwrap();
        for k in 0..settle {
            lp.step(offset + sine_source(amplitude, freq, phase, k as f64 * params.dt));
        }
        let stage1 = (lp.cycle_mean() - offset).abs() / offset;
        let full = (lp.output() / params.k_cal - offset).abs() / offset;
        worst = worst.max(stage1).max(full);
    }
    report(
        9,
        "filter cycle-exactness",
        worst <= 1e-6,
        &format!("worst relative DC error {worst:.3e} over 10 trials"),
    );
}

#[test]
fn ac10_table_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run_table_cli("t1", &a);
    run_table_cli("t1", &b);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    report(
        10,
        "deterministic table output",
        !a.is_empty() && a == b,
        &format!("{} bytes, identical: {}", a.len(), a == b),
    );
}
