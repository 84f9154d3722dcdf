//! Network load and completion time on seeded random trees.

use rayon::prelude::*;
use said_sim::scenario::{random_tree, Protocol};
use said_sim::world::run_scenario;

fn main() -> anyhow::Result<()> {
    let seeds = [7u64, 11, 23];
    let rows: Vec<_> = seeds
        .par_iter()
        .map(|&seed| {
            let r: anyhow::Result<Vec<(Protocol, u64, f64)>> = [Protocol::Said, Protocol::Icp, Protocol::Pgmcc]
                .into_iter()
                .map(|p| {
                    let o = run_scenario(&random_tree(p, 20, (1, 10), seed))?;
                    Ok((p, o.network_load_bits(), o.mean_completion_s()))
                })
                .collect();
            r.map(|v| (seed, v))
        })
        .collect::<anyhow::Result<_>>()?;
    for (seed, v) in rows {
        for (p, load, done) in v {
            println!("seed {seed:>2} {:<6} load {:>7.1} Mbit, mean completion {done:.2} s", format!("{p:?}"), load as f64 / 1e6);
        }
    }
    Ok(())
}
