//! Stall time of 3 Mbps video on the four-receiver tree for each repair
//! strategy.

use said_sim::scenario::streaming;
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    println!("{:<8} {:>8} {:>8} {:>8} {:>8}", "variant", "C1", "C2", "C3", "C4");
    for v in ["said", "said-s", "said-f", "pgmcc"] {
        let o = run_scenario(&streaming(v).expect("known variant"))?;
        let cells: Vec<String> = ["C1", "C2", "C3", "C4"]
            .iter()
            .map(|c| {
                let st = o.receiver(c).and_then(|r| r.app.as_said()).and_then(|s| s.stall_time());
                st.map_or("never".into(), |s| format!("{s:.2}"))
            })
            .collect();
        println!("{v:<8} {:>8} {:>8} {:>8} {:>8}", cells[0], cells[1], cells[2], cells[3]);
    }
    Ok(())
}
