//! Where does a cache of C packets keep a slow and a fast receiver together?

use said_sim::analysis::{self, rat, Grid, OracleMode, SyncParams};

fn main() -> anyhow::Result<()> {
    // 1 and 2 Mbps receivers, 50-packet cache, 8965-packet flow
    let p = SyncParams::new(rat(1, 1), rat(2, 1), 50, 8965)?;
    println!("in sync: {}", analysis::in_sync_predicate(&p));
    println!("max gap: {} packets", analysis::max_gap(1.0, 2.0, 8965));
    println!("oracle agrees: {}", analysis::gap_oracle(&p, OracleMode::SingleBranch) == analysis::in_sync_predicate(&p));

    for k in [1, 5, 20, 50] {
        let r = analysis::min_rate_ratio_tree(1, 160, k)?;
        println!("depth {k:>2}: slowest link must carry {:.2}% of the fastest", analysis::to_f64(&r) * 100.0);
    }

    let rows = analysis::sweep(&Grid::default());
    let inside = rows.iter().filter(|r| r.predicted).count();
    let bad = rows.iter().filter(|r| !r.agrees()).count();
    println!("grid: {} points, {inside} in sync, {bad} disagreements", rows.len());
    Ok(())
}
