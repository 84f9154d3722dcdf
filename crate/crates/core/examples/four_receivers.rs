//! Four receivers behind 1..4 Mbps branches under each protocol.

use said_sim::scenario::{tree4, Protocol};
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    for p in [Protocol::Said, Protocol::Icp, Protocol::Pgmcc] {
        let o = run_scenario(&tree4(p))?;
        let end = o.scenario.duration_s;
        let per: Vec<String> = ["C11", "C21", "C31", "C41"]
            .iter()
            .map(|c| format!("{c} {:.2}", o.receiver_mbps(c, 0.0, end)))
            .collect();
        println!("{p:?}: aggregate {:.2} Mbps ({})", o.aggregate_mbps(0.0, end), per.join(", "));
    }
    Ok(())
}
