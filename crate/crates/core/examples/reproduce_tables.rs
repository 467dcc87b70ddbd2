// Reproduce all three result tables and write them as CSV.
//
//     cargo run --release --example reproduce_tables [OUT_DIR]
//
// Without `OUT_DIR` the tables go to standard output.

use std::fs::File;
use std::io;
use std::path::PathBuf;

use freqmeter::default_params;
use freqmeter::harness::{emit_results_csv, run_table, TableId};

fn main() -> freqmeter::Result<()> {
    let out_dir = std::env::args_os().nth(1).map(PathBuf::from);
    let params = default_params();
    for (name, id) in [
        ("t1", TableId::T1),
        ("t2", TableId::T2),
        ("t3", TableId::T3),
    ] {
        let rows = run_table(id, &params)?;
        let wall: f64 = rows.iter().map(|r| r.wall_time_s).sum();
        eprintln!("{name}: {} rows in {wall:.1}s", rows.len());
        match &out_dir {
            Some(dir) => emit_results_csv(&rows, File::create(dir.join(format!("{name}.csv")))?)?,
            None => emit_results_csv(&rows, io::stdout().lock())?,
        }
    }
    Ok(())
}
