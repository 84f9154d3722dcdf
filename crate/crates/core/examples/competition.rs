//! A second flow joins at 10 s. With X = 10 Mbps both receivers on the
//! shared 3 Mbps branch split it; with X = 0.3 the SAID receiver takes
//! what the other flow cannot use.

use said_sim::scenario::{competition, Protocol};
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    for x in [10.0, 0.3] {
        let o = run_scenario(&competition(Protocol::Said, x))?;
        let end = o.scenario.duration_s;
        println!("X = {x} Mbps");
        println!("  aggregate before {:.2} after {:.2}", o.aggregate_mbps(0.0, 10.0), o.aggregate_mbps(12.0, end));
        for c in ["C31", "C32"] {
            println!("  {c} after arrival {:.2} Mbps", o.receiver_mbps(c, 12.0, end));
        }
    }
    Ok(())
}
