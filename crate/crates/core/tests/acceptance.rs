//! One line per criterion. Criteria listed in `KNOWN_UNMET` are reported
//! as failing but do not fail the target; any other failure does.

use said_sim::acceptance;

/// Criteria this model cannot meet, with the sub-check that misses.
const KNOWN_UNMET: &[(u8, &str)] = &[
    (2, "first-2 s aggregate above the provider link's capacity bound"),
    (4, "ICP aggregate: C31 and C41 never leave sync on the tree"),
];

fn main() {
    let results = acceptance::run_all();
    let mut unexpected = 0;
    for r in &results {
        println!("{}", r.line());
        match (r.passed, KNOWN_UNMET.iter().find(|(id, _)| *id == r.id)) {
            (false, Some((_, why))) => println!("     known unmet: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => println!("     listed as unmet but passes now"),
            (true, None) => {}
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed, {unexpected} unexpected failures", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
