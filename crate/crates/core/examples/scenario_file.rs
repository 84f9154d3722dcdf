//! Load a scenario from TOML, run it and write the metrics CSV.
//!
//! cargo run --example scenario_file -- scenarios/line.toml out.csv

use std::path::PathBuf;

use said_sim::metrics;
use said_sim::scenario::Scenario;
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/line.toml"));
    let sc = Scenario::load(&path)?;
    let o = run_scenario(&sc)?;
    let rows = metrics::records(&o);
    match args.next() {
        Some(out) => std::fs::write(&out, metrics::to_csv(&o, &rows))?,
        None => {
            for r in rows.iter().filter(|r| r.time == sc.duration_s) {
                println!("{:<24} {:<22} {}", r.entity, r.metric, r.value);
            }
        }
    }
    if !o.violations.is_empty() {
        anyhow::bail!("{} invariant violations, first: {}", o.violations.len(), o.violations[0]);
    }
    Ok(())
}
