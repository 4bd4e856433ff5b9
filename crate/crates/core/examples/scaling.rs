//! Wall time and peak resident memory against corpus size, with linear
//! fits. Keep the machine otherwise idle while it runs.
//!
//! cargo run --release --example scaling [-- WORKERS]

use std::time::Duration;

use litsynth::eval::{REFERENCE_TIME_MODEL, run_scaling, scaling_table};

fn main() -> litsynth::Result<()> {
    let workers = std::env::args().nth(1).and_then(|w| w.parse().ok()).unwrap_or(1);
    let dir = tempfile::tempdir().map_err(|e| litsynth::Error::io("<tempdir>", e))?;
    let report = run_scaling(&[50, 100, 200, 400], workers, 42, dir.path(), Duration::from_millis(20))?;
    print!("{}", scaling_table(&report));
    println!(
        "reference model for comparison: {:.2} min/paper + {:.1} min (hardware-specific, not a target)",
        REFERENCE_TIME_MODEL.slope, REFERENCE_TIME_MODEL.intercept
    );
    Ok(())
}
