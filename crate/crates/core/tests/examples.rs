//! Runs the quick examples so they cannot rot.

macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(quickstart, "quickstart.rs");
example!(fast_forward, "fast_forward.rs");
example!(conventional_drift, "conventional_drift.rs");
example!(bcd_register, "bcd_register.rs");

#[test]
fn quickstart_runs() {
    quickstart::run_example().unwrap();
}

#[test]
fn fast_forward_runs() {
    fast_forward::run_example().unwrap();
}

#[test]
fn conventional_drift_runs() {
    conventional_drift::run_example().unwrap();
}

#[test]
fn bcd_register_runs() {
    bcd_register::run_example().unwrap();
}
