// The 8-digit BCD pulse register: carries, readout and saturation.
//
//     cargo run --example bcd_register

use freqmeter::bcd::Bcd32;
use freqmeter::circuit::energy_kwh;

pub fn run_example() -> freqmeter::Result<()> {
    for start in [9u32, 199, 9_999_999, 99_999_998] {
        let reg = Bcd32::from_value(start).expect("fits in 8 digits");
        let next = reg.increment();
        println!(
            "{reg} + 1 = {} (overflow: {}) -> {}",
            next.reg,
            next.overflow,
            energy_kwh(u64::from(next.reg.value()))
        );
    }
    let full = Bcd32::MAX.increment();
    println!("{} + 1 saturates: overflow = {}", Bcd32::MAX, full.overflow);
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqmeter::Result<()> {
    run_example()
}
