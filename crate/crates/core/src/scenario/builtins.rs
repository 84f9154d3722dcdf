use rand::Rng;

use super::config::*;
use crate::engine::rng_stream;

struct Builder {
    s: Scenario,
}

impl Builder {
    fn new(name: &str, duration_s: f64) -> Self {
        Builder {
            s: Scenario {
                name: name.into(),
                seed: 1,
                duration_s,
                metrics_bin_s: 0.5,
                checks: false,
                naming: NamingSpec::default(),
                defaults: Defaults::default(),
                nodes: Vec::new(),
                links: Vec::new(),
                flows: Vec::new(),
                fairness: None,
            },
        }
    }

    fn router(&mut self, id: &str, cache: usize) -> &mut Self {
        self.s.nodes.push(NodeSpec {
            id: id.into(),
            role: Role::Router,
            cache_pkts: Some(cache),
        });
        self
    }

    fn host(&mut self, id: &str) -> &mut Self {
        self.s.nodes.push(NodeSpec {
            id: id.into(),
            role: Role::Host,
            cache_pkts: None,
        });
        self
    }

    fn link(&mut self, a: &str, b: &str, mbps: f64) -> &mut Self {
        self.s.links.push(LinkSpec {
            a: a.into(),
            b: b.into(),
            mbps,
            latency_ms: None,
            queue_pkts: None,
            rem: None,
        });
        self
    }

    fn flow(&mut self, f: FlowSpec) -> &mut Self {
        self.s.flows.push(f);
        self
    }

    fn finish(mut self) -> Scenario {
        self.s.materialize();
        self.s
    }
}

fn flow(name: &str, provider: &str, size: u64, protocol: Protocol, receivers: &[&str]) -> FlowSpec {
    FlowSpec {
        name: name.into(),
        provider: provider.into(),
        size_pkts: size,
        protocol,
        mode: None,
        rate_mbps: None,
        start_s: 0.0,
        app: AppSpec::File,
        repair: None,
        receivers: receivers
            .iter()
            .map(|r| ReceiverSpec {
                node: (*r).into(),
                start_s: 0.0,
            })
            .collect(),
    }
}

fn protocol(s: &str) -> Option<Protocol> {
    match s {
        "said" => Some(Protocol::Said),
        "icp" => Some(Protocol::Icp),
        "pgmcc" => Some(Protocol::Pgmcc),
        _ => None,
    }
}

/// SAID sends at a fixed rate; the others use their own pacing.
fn paced(mut f: FlowSpec, rate: f64) -> FlowSpec {
    if f.protocol == Protocol::Said {
        f.rate_mbps = Some(rate);
        f.mode = Some(Mode::ConstantRate);
    }
    f
}

pub const BUILTIN_NAMES: &[&str] = &[
    "fig1:icp",
    "fig1:said",
    "tree4:said",
    "tree4:icp",
    "tree4:pgmcc",
    "competition:said",
    "competition:said:0.3",
    "dumbbell:0.3",
    "gfc:said",
    "gfc:icp",
    "fig7",
    "streaming:said",
    "streaming:said-s",
    "streaming:said-f",
    "streaming:pgmcc",
    "random-tree:said:20:7",
];

/// Resolve `name:arg:...`; `name(arg,...)` is accepted too.
pub fn builtin(spec: &str) -> Result<Scenario, ScenarioError> {
    let norm: String = spec
        .trim()
        .chars()
        .map(|c| if c == '(' || c == ',' { ':' } else { c })
        .filter(|c| *c != ')' && !c.is_whitespace())
        .collect();
    let parts: Vec<&str> = norm.split(':').collect();
    let unknown = || ScenarioError::UnknownBuiltin(spec.to_string());
    let arg = |i: usize| parts.get(i).copied();
    let num = |i: usize, d: f64| -> Result<f64, ScenarioError> {
        match arg(i) {
            None => Ok(d),
            Some(t) => t.parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(unknown),
        }
    };
    let s = match parts[0] {
        "fig1" => fig1(protocol(arg(1).unwrap_or("icp")).ok_or_else(unknown)?),
        "tree4" => tree4(protocol(arg(1).unwrap_or("said")).ok_or_else(unknown)?),
        "competition" => competition(protocol(arg(1).unwrap_or("said")).ok_or_else(unknown)?, num(2, 10.0)?),
        "dumbbell" => competition(Protocol::Said, num(1, 10.0)?),
        "gfc" => gfc(protocol(arg(1).unwrap_or("said")).ok_or_else(unknown)?),
        "fig7" => fig7(),
        "streaming" => streaming(arg(1).unwrap_or("said")).ok_or_else(unknown)?,
        "random-tree" => {
            let p = protocol(arg(1).unwrap_or("said")).ok_or_else(unknown)?;
            let n = arg(2).map_or(Ok(20), |t| t.parse::<usize>().map_err(|_| unknown()))?;
            let seed = arg(3).map_or(Ok(7), |t| t.parse::<u64>().map_err(|_| unknown()))?;
            if n == 0 {
                return Err(unknown());
            }
            random_tree(p, n, (1, 10), seed)
        }
        _ => return Err(unknown()),
    };
    s.validate()?;
    Ok(s)
}

/// One provider, one router, a slow and a fast receiver.
pub fn fig1(p: Protocol) -> Scenario {
    let duration = if p == Protocol::Said { 150.0 } else { 30.0 };
    let mut b = Builder::new(&format!("fig1-{p:?}").to_lowercase(), duration);
    b.host("P").router("R", 50).host("C1").host("C2");
    b.link("P", "R", 2.0).link("R", "C1", 1.0).link("R", "C2", 2.0);
    b.flow(paced(flow("/fig1/_v1", "P", 8965, p, &["C1", "C2"]), 2.0));
    b.finish()
}

/// Two-provider tree: R0 feeds R1 (R3, R4) and R2 (R5, R6, R7).
fn fig8_backbone(b: &mut Builder, cache: usize) {
    for r in ["R0", "R1", "R2", "R3", "R4", "R5", "R6", "R7"] {
        b.router(r, cache);
    }
    b.link("R0", "R1", 10.0).link("R0", "R2", 10.0);
    b.link("R1", "R3", 1.0).link("R1", "R4", 2.0);
    b.link("R2", "R5", 3.0).link("R2", "R6", 4.0).link("R2", "R7", 5.0);
}

fn leaf(b: &mut Builder, host: &str, router: &str, mbps: f64) {
    b.host(host);
    b.link(router, host, mbps);
}

/// Four receivers behind 1, 2, 3 and 4 Mbps branches; provider at 3 Mbps.
pub fn tree4(p: Protocol) -> Scenario {
    let mut b = Builder::new(&format!("tree4-{p:?}").to_lowercase(), 30.0);
    fig8_backbone(&mut b, 100);
    leaf(&mut b, "P1", "R0", 3.0);
    for (c, r) in [("C11", "R3"), ("C21", "R4"), ("C31", "R5"), ("C41", "R6")] {
        leaf(&mut b, c, r, 10.0);
    }
    let mut f = paced(flow("/p1/_v1", "P1", 9000, p, &["C11", "C21", "C31", "C41"]), 3.0);
    if p == Protocol::Said {
        f.repair = Some(RepairSpec::ProviderAfterFlow);
    }
    b.flow(f);
    b.finish()
}

/// The full tree with a second provider joining at 10 s; `x` sets R5–C32.
pub fn competition(p: Protocol, x: f64) -> Scenario {
    let mut b = Builder::new(&format!("competition-{p:?}-{x}").to_lowercase(), 30.0);
    fig8_backbone(&mut b, 100);
    leaf(&mut b, "P1", "R0", 3.0);
    leaf(&mut b, "P2", "R2", 3.0);
    for (c, r, bw) in [
        ("C11", "R3", 10.0),
        ("C21", "R4", 10.0),
        ("C31", "R5", 10.0),
        ("C32", "R5", x),
        ("C41", "R6", 10.0),
        ("C42", "R6", 10.0),
        ("C51", "R7", 10.0),
    ] {
        leaf(&mut b, c, r, bw);
    }
    let mut f1 = paced(flow("/p1/_v1", "P1", 9000, p, &["C11", "C21", "C31", "C41", "C51"]), 3.0);
    let mut f2 = paced(flow("/p2/_v1", "P2", 6000, p, &["C32", "C42"]), 3.0);
    f2.start_s = 10.0;
    for r in &mut f2.receivers {
        r.start_s = 10.0;
    }
    if p == Protocol::Said {
        f1.repair = Some(RepairSpec::ProviderAfterFlow);
        f2.repair = Some(RepairSpec::ProviderAfterFlow);
    }
    b.flow(f1).flow(f2);
    b.finish()
}

/// Chain R1..R5 (9, 27, 27, 18 Mbps) with six groups of unicast-like flows.
pub fn gfc(p: Protocol) -> Scenario {
    let mut b = Builder::new(&format!("gfc-{p:?}").to_lowercase(), 20.0);
    for r in ["R1", "R2", "R3", "R4", "R5"] {
        b.router(r, 50);
    }
    b.link("R1", "R2", 9.0).link("R2", "R3", 27.0).link("R3", "R4", 27.0).link("R4", "R5", 18.0);
    // group, count, ingress, egress, fair rate
    let groups = [
        ("A", 3, "R1", "R4", 1.0),
        ("B", 3, "R2", "R5", 2.0),
        ("C", 3, "R3", "R4", 6.0),
        ("D", 6, "R1", "R2", 1.0),
        ("E", 6, "R4", "R5", 2.0),
        ("F", 2, "R2", "R3", 9.0),
    ];
    let mut fair = Vec::new();
    for (g, n, src, dst, rate) in groups {
        let mut members = Vec::new();
        for i in 1..=n {
            let pid = format!("P{g}{i}");
            let cid = format!("C{g}{i}");
            leaf(&mut b, &pid, src, 100.0);
            leaf(&mut b, &cid, dst, 100.0);
            let mut f = paced(flow(&format!("/{}/_v1", pid.to_lowercase()), &pid, 60_000, p, &[&cid]), 27.0);
            f.repair = Some(RepairSpec::None);
            b.flow(f);
            members.push(cid);
        }
        fair.push(GroupSpec {
            name: g.into(),
            fair_mbps: rate,
            members,
        });
    }
    b.s.fairness = Some(FairnessSpec {
        warmup_s: 5.0,
        measure_s: 15.0,
        groups: fair,
    });
    b.finish()
}

/// A 2 Mbps flow to C1 over a 3 Mbps link, joined by a 3 Mbps flow to C2
/// at 10 s.
pub fn fig7() -> Scenario {
    let mut b = Builder::new("fig7", 25.0);
    b.router("R0", 50).router("R1", 50);
    leaf(&mut b, "P1", "R0", 10.0);
    leaf(&mut b, "P2", "R0", 10.0);
    b.link("R0", "R1", 3.0);
    leaf(&mut b, "C1", "R1", 10.0);
    leaf(&mut b, "C2", "R1", 10.0);
    let mut f1 = paced(flow("/p1/_v1", "P1", 5000, Protocol::Said, &["C1"]), 2.0);
    f1.repair = Some(RepairSpec::None);
    let mut f2 = paced(flow("/p2/_v1", "P2", 4500, Protocol::Said, &["C2"]), 3.0);
    f2.repair = Some(RepairSpec::None);
    f2.start_s = 10.0;
    f2.receivers[0].start_s = 10.0;
    b.flow(f1).flow(f2);
    b.finish()
}

/// 40 s of 3 Mbps video to the four-receiver tree, with peer links
/// between neighbouring edge routers.
pub fn streaming(variant: &str) -> Option<Scenario> {
    let (p, repair) = match variant {
        "said" => (Protocol::Said, RepairSpec::Peer),
        "said-s" => (Protocol::Said, RepairSpec::Provider),
        "said-f" => (Protocol::Said, RepairSpec::ProviderAfterFlow),
        "pgmcc" => (Protocol::Pgmcc, RepairSpec::Provider),
        "icp" => (Protocol::Icp, RepairSpec::None),
        _ => return None,
    };
    let mut b = Builder::new(&format!("streaming-{variant}"), 200.0);
    fig8_backbone(&mut b, 100);
    b.link("R3", "R4", 1.0).link("R4", "R5", 2.0).link("R5", "R6", 3.0).link("R6", "R7", 4.0);
    // stream paced at 3 Mbps; a 3 Mbps access link would leave repairs no room at all
    leaf(&mut b, "P1", "R0", 4.0);
    for (c, r) in [("C1", "R3"), ("C2", "R4"), ("C3", "R5"), ("C4", "R6")] {
        leaf(&mut b, c, r, 10.0);
    }
    let mut f = paced(flow("/video/_v1", "P1", 12_000, p, &["C1", "C2", "C3", "C4"]), 3.0);
    f.app = AppSpec::Streaming { playout_mbps: 3.0 };
    f.repair = Some(repair);
    b.flow(f);
    Some(b.finish())
}

/// Seeded random tree: routers hang off earlier routers, receivers off
/// random routers, every link drawn from `bw` Mbps.
pub fn random_tree(p: Protocol, n: usize, bw: (u32, u32), seed: u64) -> Scenario {
    let mut rng = rng_stream(seed, 0x7265_6574);
    let routers = n.div_ceil(2).max(1);
    let mut b = Builder::new(&format!("random-tree-{p:?}-{n}-{seed}").to_lowercase(), 120.0);
    b.s.seed = seed;
    for i in 0..routers {
        b.router(&format!("R{i}"), 50);
        if i > 0 {
            let parent = rng.gen_range(0..i);
            let mbps = rng.gen_range(bw.0..=bw.1) as f64;
            b.link(&format!("R{parent}"), &format!("R{i}"), mbps);
        }
    }
    leaf(&mut b, "P", "R0", bw.1 as f64);
    let mut names = Vec::new();
    for i in 0..n {
        let at = rng.gen_range(0..routers);
        let mbps = rng.gen_range(bw.0..=bw.1) as f64;
        let c = format!("C{i}");
        leaf(&mut b, &c, &format!("R{at}"), mbps);
        names.push(c);
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut f = flow("/rt/_v1", "P", 1000, p, &refs);
    if p == Protocol::Said {
        f.mode = Some(Mode::Acker);
    }
    b.flow(f);
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_builtin_resolves() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn parenthesized_arguments() {
        assert_eq!(builtin("dumbbell(0.3)").unwrap(), builtin("dumbbell:0.3").unwrap());
        assert!(builtin("fig9").is_err());
        assert!(builtin("tree4:tcp").is_err());
    }

    #[test]
    fn fig1_shape() {
        let s = builtin("fig1").unwrap();
        let bw: Vec<f64> = s.links.iter().map(|l| l.mbps).collect();
        assert_eq!(bw, vec![2.0, 1.0, 2.0]);
        assert_eq!(s.nodes[1].cache_pkts, Some(50));
        assert!(s.links.iter().all(|l| l.latency_ms == Some(2.0)));
        assert_eq!(s.flows[0].size_pkts, 8965);
    }

    #[test]
    fn gfc_groups() {
        let s = builtin("gfc").unwrap();
        let g = s.fairness.unwrap().groups;
        let sizes: Vec<(String, usize)> = g.iter().map(|g| (g.name.clone(), g.members.len())).collect();
        assert_eq!(
            sizes,
            [("A", 3), ("B", 3), ("C", 3), ("D", 6), ("E", 6), ("F", 2)]
                .map(|(a, b)| (a.to_string(), b))
                .to_vec()
        );
        let chain: Vec<f64> = s.links[..4].iter().map(|l| l.mbps).collect();
        assert_eq!(chain, vec![9.0, 27.0, 27.0, 18.0]);
    }

    #[test]
    fn dumbbell_sets_x() {
        let s = builtin("dumbbell(0.3)").unwrap();
        let l = s.links.iter().find(|l| l.b == "C32").unwrap();
        assert_eq!((l.a.as_str(), l.mbps), ("R5", 0.3));
    }

    #[test]
    fn random_tree_reproducible() {
        let a = random_tree(Protocol::Said, 20, (1, 10), 7);
        let b = random_tree(Protocol::Said, 20, (1, 10), 7);
        assert_eq!(a.links, b.links);
        let c = random_tree(Protocol::Said, 20, (1, 10), 8);
        assert_ne!(a.links, c.links);
        assert!(a.links.iter().all(|l| (1.0..=10.0).contains(&l.mbps)));
        a.validate().unwrap();
    }

    #[test]
    fn single_receiver_tree_is_a_path() {
        let s = random_tree(Protocol::Said, 1, (1, 10), 3);
        assert_eq!(s.nodes.iter().filter(|n| n.role == Role::Router).count(), 1);
        assert_eq!(s.links.len(), 2);
    }
}
