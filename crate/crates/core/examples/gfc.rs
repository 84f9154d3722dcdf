//! Generic fairness configuration: per-group average over the fair share.

use said_sim::scenario::{gfc, Protocol};
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    for p in [Protocol::Said, Protocol::Icp] {
        let o = run_scenario(&gfc(p))?;
        println!("{p:?}");
        for (g, avg, ratio) in o.fairness() {
            println!("  group {g}: {avg:.3} Mbps, {ratio:.2} of fair");
        }
    }
    Ok(())
}
