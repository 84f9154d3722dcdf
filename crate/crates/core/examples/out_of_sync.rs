//! One provider, a 1 Mbps and a 2 Mbps receiver: ICP drifts out of sync and
//! the slow receiver misses the cache; SAID sends each packet once and
//! repairs the gaps afterwards.

use said_sim::scenario::{fig1, Protocol};
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    let icp = run_scenario(&fig1(Protocol::Icp))?;
    println!("ICP");
    for t in (0..30).step_by(3) {
        let t = t as f64;
        println!(
            "  t={t:>4.0}s C1 {:.2} C2 {:.2} Mbps",
            icp.receiver_mbps("C1", t, t + 1.0),
            icp.receiver_mbps("C2", t, t + 1.0)
        );
    }
    if let Some(r) = icp.receiver("C1").and_then(|r| r.app.as_icp()) {
        println!("  C1 cache hits {} of {}", r.metrics.cache_served, r.metrics.cache_served + r.metrics.provider_served);
    }

    let said = run_scenario(&fig1(Protocol::Said))?;
    let p = &said.flows[0].provider;
    println!("SAID");
    println!("  most sends of one segment in the first pass: {}", p.anp_tx.iter().max().unwrap_or(&0));
    for r in &said.flows[0].receivers {
        let s = r.app.as_said().expect("SAID receiver");
        println!(
            "  {} done at {:?} s, repairs from peers {} provider {}",
            r.node,
            r.app.completion().map(|t| t.as_secs_f64()),
            s.metrics.repairs_from_peers,
            s.metrics.repairs_from_provider
        );
    }
    Ok(())
}
