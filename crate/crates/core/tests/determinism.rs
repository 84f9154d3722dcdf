use sha2::{Digest, Sha256};

use said_sim::metrics;
use said_sim::scenario::builtin;
use said_sim::world::run_scenario;

fn csv(name: &str) -> String {
    let o = run_scenario(&builtin(name).unwrap()).unwrap();
    metrics::to_csv(&o, &metrics::records(&o))
}

fn sha(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["fig7", "tree4:pgmcc", "random-tree:icp:20:7"] {
        assert_eq!(csv(name), csv(name), "{name}");
    }
}

#[test]
fn seed_changes_the_run() {
    let mut a = builtin("random-tree:said:20:7").unwrap();
    a.duration_s = 10.0;
    let mut b = a.clone();
    b.seed += 1;
    let ra = run_scenario(&a).unwrap();
    let rb = run_scenario(&b).unwrap();
    assert_ne!(metrics::records(&ra), metrics::records(&rb));
}

#[test]
fn golden_fig7_metrics() {
    assert_eq!(sha(&csv("fig7")), GOLDEN_FIG7);
}

#[test]
fn golden_random_tree_topology() {
    assert_eq!(sha(&builtin("random-tree:said:20:7").unwrap().to_toml()), GOLDEN_TREE);
}

const GOLDEN_FIG7: &str = "a3d2083ba36df80d0674790ffb3c8fbe769ab86f66997e2805eeb0db48e5bfc6";
const GOLDEN_TREE: &str = "104b8b49de67f6b14fbac19c8ed98e53ee12181a0460aef0d6216d3ef10dfbe3";
