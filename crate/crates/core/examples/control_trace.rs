//! Window decisions of a 2 Mbps receiver before and after a competing flow
//! starts at 10 s.

use said_sim::scenario::fig7;
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    let o = run_scenario(&fig7())?;
    let r = o.receiver("C1").and_then(|r| r.app.as_said()).expect("SAID receiver C1");
    let mut last = None;
    for (t, d) in &r.metrics.decisions {
        // print only state changes and window moves
        let key = (d.to, d.window_after);
        if last == Some(key) {
            continue;
        }
        last = Some(key);
        println!(
            "{:>7.3}s mmpr {:>3} {} -> {} window {} -> {}",
            t.as_secs_f64(),
            if d.mmpr == said_sim::forwarding::MPR_INF { "-".to_string() } else { d.mmpr.to_string() },
            d.from,
            d.to,
            d.window_before,
            d.window_after
        );
    }
    for (t, b, a) in &r.metrics.halvings {
        println!("{:>7.3}s halved {b} -> {a}", t.as_secs_f64());
    }
    Ok(())
}
