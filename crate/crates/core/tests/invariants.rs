use said_sim::acceptance::simulate;
use said_sim::scenario::{builtin, random_tree, Protocol, Role};
use said_sim::world::{run_scenario, Outcome};

fn said_receivers(o: &Outcome) -> impl Iterator<Item = &said_sim::receiver::SaidReceiver> {
    o.flows.iter().flat_map(|f| &f.receivers).filter_map(|r| r.app.as_said())
}

#[test]
fn checked_runs_are_clean() {
    for name in ["competition:said", "tree4:said", "dumbbell:0.3", "streaming:said", "tree4:pgmcc", "gfc:icp"] {
        let o = simulate(name).unwrap();
        assert!(o.violations.is_empty(), "{name}: {:?}", &o.violations[..o.violations.len().min(3)]);
    }
}

#[test]
fn every_decrease_halves_once() {
    for name in ["competition:said", "fig7", "tree4:said"] {
        let o = simulate(name).unwrap();
        for s in said_receivers(&o) {
            let w_min = s.cfg.params.w_min;
            for (t, b, a) in &s.metrics.halvings {
                assert_eq!(*a, (b / 2).max(w_min), "{name} at {t:?}");
            }
            for pair in s.metrics.halvings.windows(2) {
                let boundary = s.metrics.decisions.iter().any(|(t, _)| *t >= pair[0].0 && *t <= pair[1].0);
                assert!(boundary, "{name}: two decreases at {:?} and {:?} in one window", pair[0].0, pair[1].0);
            }
        }
    }
}

#[test]
fn repairs_fill_every_gap() {
    let o = simulate("fig1:said").unwrap();
    assert!(o.violations.is_empty(), "{:?}", o.violations.first());
    let size = o.scenario.flows[0].size_pkts;
    for r in &o.flows[0].receivers {
        let s = r.app.as_said().unwrap();
        assert_eq!(s.unrepaired(), 0, "{}", r.node);
        assert_eq!(r.app.received(), size, "{}", r.node);
        assert!(r.app.completion().is_some(), "{}", r.node);
    }
    let slow = o.receiver("C1").unwrap().app.as_said().unwrap();
    assert!(slow.repair.requested > 0);
}

#[test]
fn random_tree_smoke() {
    let said = simulate("random-tree:said:20:7").unwrap();
    let icp = simulate("random-tree:icp:20:7").unwrap();
    let pgmcc = simulate("random-tree:pgmcc:20:7").unwrap();
    for o in [&said, &icp, &pgmcc] {
        assert!(o.violations.is_empty(), "{:?}", o.violations.first());
    }
    assert!(said.network_load_bits() <= icp.network_load_bits());
    assert!(said.mean_completion_s() <= pgmcc.mean_completion_s());
    for r in said.flows[0].receivers.iter() {
        assert!(r.app.completion().is_some(), "{} unfinished", r.node);
    }
}

#[test]
fn random_tree_is_seeded() {
    let a = random_tree(Protocol::Said, 20, (1, 10), 7);
    let b = random_tree(Protocol::Said, 20, (1, 10), 7);
    assert_eq!(a.links, b.links);
    let c = random_tree(Protocol::Said, 20, (1, 10), 8);
    assert_ne!(a.links, c.links);
}

#[test]
fn single_receiver_tree_is_a_path() {
    let s = random_tree(Protocol::Said, 1, (1, 10), 3);
    let routers = s.nodes.iter().filter(|n| n.role == Role::Router).count();
    assert_eq!(routers, 1);
    let o = run_scenario(&s).unwrap();
    assert!(o.flows[0].receivers[0].app.completion().is_some());
}

#[test]
fn scenario_files_match_builtins() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for (file, name) in [
        ("tree4-said.toml", "tree4:said"),
        ("competition-said.toml", "competition:said"),
        ("dumbbell-0.3.toml", "dumbbell:0.3"),
        ("gfc-said.toml", "gfc:said"),
        ("fig7.toml", "fig7"),
        ("streaming-said.toml", "streaming:said"),
    ] {
        let loaded = said_sim::scenario::Scenario::load(&dir.join(file)).unwrap();
        assert_eq!(loaded, builtin(name).unwrap(), "{file}");
    }
}
