//! Run a scenario file through the experiment runner, as the CLI does.
//!
//! cargo run --example run_scenario -- crates/core/examples/configs/tube.json /tmp/tube

use std::path::PathBuf;

use ringchain::runner::{run, ScenarioConfig};

fn main() -> ringchain::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/tube.json"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ringchain_example"));
    let cfg = ScenarioConfig::load(&config)?;
    let report = run(&cfg, &out, None)?;
    for a in &report.assertions {
        println!("{}", a.describe());
    }
    for t in &report.tables {
        println!(
            "table {} ({} rows): {}",
            t.name,
            t.rows.len(),
            t.columns.join(", ")
        );
    }
    println!("{} files in {}", report.files.len(), out.display());
    Ok(())
}
