//! Runs a scenario: nodes, directed links and host applications driven by
//! one event queue.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::app::{AppCtx, NodeRole};
use crate::baselines::{IcpConfig, IcpReceiver};
use crate::engine::{rng_stream, Disposition, Link, LinkStats, RemParams, Scheduler, SimRng, SimTime};
use crate::forwarding::{
    checksum_for, FaceId, FaceInfo, NodeId, Packet, PacketKind, Router, RouterAction, RouterCounters,
};
use crate::naming::{parse_name, ContentName, FlowId};
use crate::provider::{AckerKind, AckerPolicy, ProviderApp, ProviderConfig, SendMode};
use crate::receiver::{
    AppKind, ReceiverConfig, ReceiverKind, RepairMode, SaidReceiver, StreamingAppConfig, WindowParams,
};
use crate::scenario::{AppSpec, Mode, Protocol, RepairSpec, Role, Scenario};

#[derive(Debug, Clone)]
pub enum ReceiverApp {
    Said(SaidReceiver),
    Icp(IcpReceiver),
}

#[derive(Debug, Clone)]
enum App {
    Provider(ProviderApp),
    Receiver(ReceiverApp),
}

impl App {
    fn start(&mut self, ctx: &mut AppCtx) {
        match self {
            App::Provider(p) => p.start(ctx),
            App::Receiver(ReceiverApp::Said(r)) => r.start(ctx),
            App::Receiver(ReceiverApp::Icp(r)) => r.start(ctx),
        }
    }

    fn on_packet(&mut self, ctx: &mut AppCtx, pkt: Packet) {
        match self {
            App::Provider(p) => p.on_packet(ctx, pkt),
            App::Receiver(ReceiverApp::Said(r)) => r.on_packet(ctx, pkt),
            App::Receiver(ReceiverApp::Icp(r)) => r.on_packet(ctx, pkt),
        }
    }

    fn on_timer(&mut self, ctx: &mut AppCtx, token: u64) {
        match self {
            App::Provider(p) => p.on_timer(ctx, token),
            App::Receiver(ReceiverApp::Said(r)) => r.on_timer(ctx, token),
            App::Receiver(ReceiverApp::Icp(r)) => r.on_timer(ctx, token),
        }
    }
}

impl ReceiverApp {
    pub fn goodput_bins(&self) -> &[u64] {
        match self {
            ReceiverApp::Said(r) => &r.metrics.goodput_bins,
            ReceiverApp::Icp(r) => &r.metrics.goodput_bins,
        }
    }

    pub fn completion(&self) -> Option<SimTime> {
        match self {
            ReceiverApp::Said(r) => r.metrics.completion,
            ReceiverApp::Icp(r) => r.metrics.completion,
        }
    }

    pub fn received(&self) -> u64 {
        match self {
            ReceiverApp::Said(r) => r.ledger.received_count,
            ReceiverApp::Icp(r) => r.ledger.received_count,
        }
    }

    pub fn as_said(&self) -> Option<&SaidReceiver> {
        match self {
            ReceiverApp::Said(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_icp(&self) -> Option<&IcpReceiver> {
        match self {
            ReceiverApp::Icp(r) => Some(r),
            _ => None,
        }
    }

    fn violations(&self) -> &[String] {
        match self {
            ReceiverApp::Said(r) => &r.metrics.violations,
            ReceiverApp::Icp(r) => &r.metrics.violations,
        }
    }
}

#[derive(Debug, Clone)]
enum Ev {
    TxDone(usize),
    Arrive { link: usize, pkt: Packet, queued: bool },
    Timer { node: NodeId, app: usize, token: u64 },
    Flush { node: NodeId, flow: ContentName },
    Start { node: NodeId, app: usize },
    Sample,
}

#[derive(Debug, Clone, Copy)]
struct LinkEnd {
    from: NodeId,
    to: NodeId,
    /// Face index at `to`.
    face_at_to: FaceId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub entity: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ReceiverOutcome {
    pub node: String,
    pub start: SimTime,
    pub app: ReceiverApp,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub name: String,
    pub protocol: Protocol,
    pub provider_node: String,
    pub provider: ProviderApp,
    pub receivers: Vec<ReceiverOutcome>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub scenario: Scenario,
    pub bin: SimTime,
    pub flows: Vec<FlowOutcome>,
    pub routers: Vec<(String, RouterCounters)>,
    /// Directed links as `a->b`.
    pub links: Vec<(String, LinkStats)>,
    pub samples: Vec<Sample>,
    pub violations: Vec<String>,
    pub events: u64,
    /// Data packets that reached a host with no app for their flow.
    pub stray: u64,
}

pub struct World {
    sc: Scenario,
    sched: Scheduler<Ev>,
    roles: Vec<NodeRole>,
    routers: Vec<Option<Router>>,
    links: Vec<Link<Packet>>,
    ends: Vec<LinkEnd>,
    rngs: Vec<SimRng>,
    /// Per node, per face: outgoing link index.
    out_link: Vec<Vec<usize>>,
    apps: Vec<Vec<App>>,
    app_by_flow: HashMap<(NodeId, ContentName), usize>,
    /// (flow index, provider node, provider app, receivers as (node, app))
    flow_apps: Vec<(NodeId, usize, Vec<(NodeId, usize)>)>,
    reach_cache: HashMap<NodeId, Vec<(NodeId, FaceId, u32)>>,
    bin: SimTime,
    samples: Vec<Sample>,
    events: u64,
    stray: u64,
    violations: Vec<String>,
}

fn mbps_to_bps(m: f64) -> u64 {
    (m * 1e6).round().max(1.0) as u64
}

impl World {
    pub fn new(sc: &Scenario) -> anyhow::Result<World> {
        let mut sc = sc.clone();
        sc.materialize();
        sc.validate()?;
        let n = sc.nodes.len();
        let idx: BTreeMap<String, usize> =
            sc.node_index().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let roles: Vec<NodeRole> = sc
            .nodes
            .iter()
            .map(|x| match x.role {
                Role::Router => NodeRole::Router,
                Role::Host => NodeRole::Host,
            })
            .collect();
        let mut faces: Vec<Vec<FaceInfo>> = vec![Vec::new(); n];
        let mut out_link: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut links = Vec::new();
        let mut ends = Vec::new();
        let mut rngs = Vec::new();
        for l in &sc.links {
            let (a, b) = (idx[l.a.as_str()] as NodeId, idx[l.b.as_str()] as NodeId);
            let q = l.queue_pkts.expect("materialized");
            let rem = l.rem.map_or(RemParams::for_capacity(q), |r| RemParams {
                min_th: r.min_th,
                max_th: r.max_th,
                max_p: r.max_p,
            });
            let lat = SimTime::from_secs_f64(l.latency_ms.expect("materialized") / 1000.0);
            let fa = faces[a as usize].len() as FaceId;
            let fb = faces[b as usize].len() as FaceId;
            faces[a as usize].push(FaceInfo {
                peer: b,
                peer_is_router: roles[b as usize] == NodeRole::Router,
            });
            faces[b as usize].push(FaceInfo {
                peer: a,
                peer_is_router: roles[a as usize] == NodeRole::Router,
            });
            for (from, to, face_at_to) in [(a, b, fb), (b, a, fa)] {
                out_link[from as usize].push(links.len());
                rngs.push(rng_stream(sc.seed, links.len() as u64 + 1));
                links.push(Link::new(mbps_to_bps(l.mbps), lat, q, rem));
                ends.push(LinkEnd { from, to, face_at_to });
            }
        }
        let routers = sc
            .nodes
            .iter()
            .enumerate()
            .map(|(i, x)| {
                (x.role == Role::Router).then(|| {
                    let mut r = Router::new(i as NodeId, faces[i].clone(), x.cache_pkts.unwrap_or(0));
                    r.checks = sc.checks;
                    r
                })
            })
            .collect();
        let bin = SimTime::from_secs_f64(sc.metrics_bin_s);
        let mut w = World {
            sched: Scheduler::new(),
            roles,
            routers,
            links,
            ends,
            rngs,
            out_link,
            apps: vec![Vec::new(); n],
            app_by_flow: HashMap::new(),
            flow_apps: Vec::new(),
            reach_cache: HashMap::new(),
            bin,
            samples: Vec::new(),
            events: 0,
            stray: 0,
            violations: Vec::new(),
            sc,
        };
        w.install_flows(&idx)?;
        Ok(w)
    }

    fn install_flows(&mut self, idx: &BTreeMap<String, usize>) -> anyhow::Result<()> {
        let sc = self.sc.clone();
        let chunk = sc.naming.chunk_size;
        let bits = sc.defaults.packet_bits;
        for (fi, f) in sc.flows.iter().enumerate() {
            let prefix = parse_name(&f.name)?;
            let flow = FlowId::new(prefix.clone(), f.size_pkts)?;
            let pnode = idx[&f.provider] as NodeId;
            self.install_static_routes(&prefix, pnode);
            let salt = checksum_for(sc.seed, fi as u64 + 1);
            let mode = match (f.protocol, f.mode.unwrap_or(Mode::Acker)) {
                (Protocol::Icp, _) => SendMode::Passive,
                (Protocol::Pgmcc, _) => SendMode::Acker(AckerKind::Pgmcc),
                (Protocol::Said, Mode::ConstantRate) => SendMode::ConstantRate {
                    rate_bps: mbps_to_bps(f.rate_mbps.unwrap_or(1.0)),
                },
                (Protocol::Said, Mode::Acker) => SendMode::Acker(AckerKind::Said(AckerPolicy::default())),
            };
            let start = SimTime::from_secs_f64(f.start_s);
            let pcfg = ProviderConfig {
                flow: flow.clone(),
                chunk_size: chunk,
                mode,
                start,
                data_bits: bits,
                stats_period: SimTime::from_secs_f64(sc.defaults.stats_period_s),
                salt,
                bin: self.bin,
                checks: sc.checks,
            };
            let pa = self.add_app(pnode, &prefix, App::Provider(ProviderApp::new(pnode, pcfg)))?;
            self.sched.schedule(start, Ev::Start { node: pnode, app: pa });
            let mut rx = Vec::new();
            for r in &f.receivers {
                let node = idx[&r.node] as NodeId;
                let rstart = SimTime::from_secs_f64(r.start_s.max(f.start_s));
                let app = match f.protocol {
                    Protocol::Icp => ReceiverApp::Icp(IcpReceiver::new(
                        node,
                        IcpConfig {
                            flow: flow.clone(),
                            provider: pnode,
                            chunk_size: chunk,
                            start: rstart,
                            w_init: 2.0,
                            data_bits: bits,
                            bin: self.bin,
                            checks: sc.checks,
                        },
                    )),
                    Protocol::Said | Protocol::Pgmcc => {
                        let repair = match f.repair.unwrap_or(RepairSpec::None) {
                            RepairSpec::None => RepairMode::None,
                            RepairSpec::ProviderAfterFlow => RepairMode::ProviderAfterFlow,
                            RepairSpec::Provider => RepairMode::Provider,
                            RepairSpec::Peer => RepairMode::Peer,
                        };
                        let app = match f.app {
                            AppSpec::File => AppKind::File,
                            AppSpec::Streaming { playout_mbps } => {
                                AppKind::Streaming(StreamingAppConfig::new(mbps_to_bps(playout_mbps), bits))
                            }
                        };
                        let kind = if f.protocol == Protocol::Said {
                            ReceiverKind::Said
                        } else {
                            ReceiverKind::Pgmcc
                        };
                        ReceiverApp::Said(SaidReceiver::new(
                            node,
                            ReceiverConfig {
                                flow: flow.clone(),
                                provider: pnode,
                                chunk_size: chunk,
                                start: rstart,
                                kind,
                                repair,
                                app,
                                params: WindowParams::default(),
                                data_bits: bits,
                                bin: self.bin,
                                idle_end: SimTime::from_secs_f64(sc.defaults.idle_end_s),
                                checks: sc.checks,
                            },
                        ))
                    }
                };
                let ai = self.add_app(node, &prefix, App::Receiver(app))?;
                self.sched.schedule(rstart, Ev::Start { node, app: ai });
                rx.push((node, ai));
            }
            self.flow_apps.push((pnode, pa, rx));
        }
        self.sched.schedule(SimTime::ZERO, Ev::Sample);
        Ok(())
    }

    fn add_app(&mut self, node: NodeId, prefix: &ContentName, app: App) -> anyhow::Result<usize> {
        let i = self.apps[node as usize].len();
        if self.app_by_flow.insert((node, prefix.clone()), i).is_some() {
            anyhow::bail!("node {} runs two apps for {prefix}", self.sc.nodes[node as usize].id);
        }
        self.apps[node as usize].push(app);
        Ok(i)
    }

    fn neighbors(&self, u: NodeId) -> impl Iterator<Item = (FaceId, NodeId)> + '_ {
        self.out_link[u as usize]
            .iter()
            .enumerate()
            .map(|(f, &l)| (f as FaceId, self.ends[l].to))
    }

    /// Shortest-path routes toward the provider at every router. Hosts
    /// other than the provider never carry transit traffic.
    fn install_static_routes(&mut self, prefix: &ContentName, provider: NodeId) {
        let n = self.roles.len();
        let mut dist = vec![u32::MAX; n];
        dist[provider as usize] = 0;
        let mut q = VecDeque::from([provider]);
        while let Some(u) = q.pop_front() {
            if u != provider && self.roles[u as usize] == NodeRole::Host {
                continue;
            }
            let du = dist[u as usize];
            let next: Vec<NodeId> = self.neighbors(u).map(|(_, v)| v).collect();
            for v in next {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    q.push_back(v);
                }
            }
        }
        for r in 0..n {
            if self.roles[r] != NodeRole::Router || dist[r] == u32::MAX {
                continue;
            }
            let best = self
                .neighbors(r as NodeId)
                .filter(|(_, v)| {
                    dist[*v as usize] + 1 == dist[r]
                        && (*v == provider || self.roles[*v as usize] == NodeRole::Router)
                })
                .min_by_key(|(_, v)| *v);
            if let Some((face, v)) = best {
                let router = self.routers[r].as_mut().expect("router");
                router.fib.add_static(prefix.clone(), face, v == provider);
            }
        }
    }

    /// Routers within the hop limit of `host`'s access router, each with the
    /// face leading back toward `host` and the distance to it.
    fn announce_reach(&mut self, host: NodeId) -> Vec<(NodeId, FaceId, u32)> {
        if let Some(v) = self.reach_cache.get(&host) {
            return v.clone();
        }
        let limit = self.sc.naming.repair_hop_limit.saturating_sub(1);
        let mut out = Vec::new();
        let Some((_, access)) = self.neighbors(host).next() else {
            return out;
        };
        let face_to_host = self
            .neighbors(access)
            .find(|(_, v)| *v == host)
            .map(|(f, _)| f)
            .expect("link is symmetric");
        let mut depth: HashMap<NodeId, u32> = HashMap::from([(access, 0)]);
        out.push((access, face_to_host, 1));
        let mut q = VecDeque::from([access]);
        while let Some(u) = q.pop_front() {
            let d = depth[&u];
            if d >= limit {
                continue;
            }
            let next: Vec<(FaceId, NodeId)> = self.neighbors(u).collect();
            for (_, v) in next {
                if self.roles[v as usize] != NodeRole::Router || depth.contains_key(&v) {
                    continue;
                }
                depth.insert(v, d + 1);
                let back = self
                    .neighbors(v)
                    .find(|(_, w)| *w == u)
                    .map(|(f, _)| f)
                    .expect("link is symmetric");
                out.push((v, back, d + 2));
                q.push_back(v);
            }
        }
        self.reach_cache.insert(host, out.clone());
        out
    }

    fn announce(&mut self, host: NodeId, prefix: ContentName) {
        for (r, face, dist) in self.announce_reach(host) {
            if let Some(router) = self.routers[r as usize].as_mut() {
                router.fib.add_repair(prefix.clone(), face, dist, host);
            }
        }
    }

    fn send(&mut self, node: NodeId, face: FaceId, pkt: Packet) {
        let now = self.sched.now();
        let l = self.out_link[node as usize][face as usize];
        if pkt.bypasses_queue() {
            let at = now + self.links[l].latency;
            self.sched.schedule(at, Ev::Arrive { link: l, pkt, queued: false });
            return;
        }
        let refund = pkt.data_info().is_some_and(|d| d.debited).then(|| pkt.name.flow_prefix());
        let link = &mut self.links[l];
        if let Disposition::Dropped = link.enqueue(pkt, now, &mut self.rngs[l]) {
            if let (Some(flow), Some(r)) = (refund, self.routers[node as usize].as_mut()) {
                let mut acts = Vec::new();
                r.refund(&flow, face, &mut acts);
                self.router_actions(node, acts);
            }
            return;
        }
        if let Some(done) = link.start_next(now) {
            self.sched.schedule(done, Ev::TxDone(l));
        }
    }

    fn run_app<F>(&mut self, node: NodeId, app: usize, f: F)
    where
        F: FnOnce(&mut App, &mut AppCtx),
    {
        let now = self.sched.now();
        let mut ctx = AppCtx::new(now, node, &self.roles);
        f(&mut self.apps[node as usize][app], &mut ctx);
        let out = std::mem::take(&mut ctx.out);
        let timers = std::mem::take(&mut ctx.timers);
        let ann = std::mem::take(&mut ctx.announcements);
        for a in ann {
            self.announce(node, a);
        }
        for p in out {
            self.send(node, 0, p);
        }
        for (at, token) in timers {
            self.sched.schedule(at, Ev::Timer { node, app, token });
        }
    }

    fn router_actions(&mut self, node: NodeId, acts: Vec<RouterAction>) {
        let now = self.sched.now();
        for a in acts {
            match a {
                RouterAction::Send { face, pkt } => self.send(node, face, pkt),
                RouterAction::ScheduleFlush { flow } => {
                    self.sched.schedule(now, Ev::Flush { node, flow });
                }
            }
        }
    }

    fn arrive(&mut self, node: NodeId, face: FaceId, pkt: Packet) {
        let now = self.sched.now();
        if let Some(r) = self.routers[node as usize].as_mut() {
            let mut acts = Vec::new();
            r.handle(now, pkt, face, &mut acts);
            self.router_actions(node, acts);
            return;
        }
        let key = (node, pkt.name.flow_prefix());
        match self.app_by_flow.get(&key).copied() {
            Some(app) => self.run_app(node, app, |a, ctx| a.on_packet(ctx, pkt)),
            None => {
                if matches!(pkt.kind, PacketKind::Data(_)) {
                    self.stray += 1;
                }
            }
        }
    }

    fn sample(&mut self) {
        let t = self.sched.now().as_secs_f64();
        let names: Vec<String> = self.sc.nodes.iter().map(|n| n.id.clone()).collect();
        for (fi, (pnode, pa, rx)) in self.flow_apps.iter().enumerate() {
            let fname = &self.sc.flows[fi].name;
            if let App::Provider(p) = &self.apps[*pnode as usize][*pa] {
                if matches!(p.cfg.mode, SendMode::Acker(_)) {
                    self.samples.push(Sample {
                        time: t,
                        entity: format!("{}:{fname}", names[*pnode as usize]),
                        metric: "cwnd".into(),
                        value: p.clock.cwnd,
                    });
                }
            }
            for (node, ai) in rx {
                let App::Receiver(ReceiverApp::Said(r)) = &self.apps[*node as usize][*ai] else {
                    continue;
                };
                if r.cfg.kind != ReceiverKind::Said {
                    continue;
                }
                let e = format!("{}:{fname}", names[*node as usize]);
                for (m, v) in [
                    ("window", r.window() as f64),
                    ("outstanding", r.outstanding as f64),
                    ("state", r.ctl.state.code() as f64),
                ] {
                    self.samples.push(Sample {
                        time: t,
                        entity: e.clone(),
                        metric: m.into(),
                        value: v,
                    });
                }
            }
        }
    }

    fn step(&mut self, ev: Ev) {
        self.events += 1;
        match ev {
            Ev::TxDone(l) => {
                let now = self.sched.now();
                let (pkt, _) = self.links[l].finish();
                let at = now + self.links[l].latency;
                self.sched.schedule(at, Ev::Arrive { link: l, pkt, queued: true });
                if let Some(done) = self.links[l].start_next(now) {
                    self.sched.schedule(done, Ev::TxDone(l));
                }
            }
            Ev::Arrive { link, pkt, queued } => {
                if queued {
                    self.links[link].delivered();
                }
                let e = self.ends[link];
                debug_assert_eq!(self.out_link[e.from as usize].contains(&link), true);
                self.arrive(e.to, e.face_at_to, pkt);
            }
            Ev::Timer { node, app, token } => self.run_app(node, app, |a, ctx| a.on_timer(ctx, token)),
            Ev::Start { node, app } => self.run_app(node, app, |a, ctx| a.start(ctx)),
            Ev::Flush { node, flow } => {
                let now = self.sched.now();
                let mut acts = Vec::new();
                if let Some(r) = self.routers[node as usize].as_mut() {
                    r.flush(now, &flow, &mut acts);
                }
                self.router_actions(node, acts);
            }
            Ev::Sample => {
                self.sample();
                let next = self.sched.now() + self.bin;
                self.sched.schedule(next, Ev::Sample);
            }
        }
    }

    /// Run to the configured duration.
    pub fn run(mut self) -> Outcome {
        let end = SimTime::from_secs_f64(self.sc.duration_s);
        while let Some((_, _, ev)) = self.sched.pop_until(end) {
            self.step(ev);
        }
        self.finish()
    }

    fn finish(self) -> Outcome {
        let names: Vec<String> = self.sc.nodes.iter().map(|n| n.id.clone()).collect();
        let mut violations = self.violations;
        let mut routers = Vec::new();
        for r in self.routers.iter().flatten() {
            violations.extend(r.violations.iter().cloned());
            routers.push((names[r.id as usize].clone(), r.counters));
        }
        let links = self
            .links
            .iter()
            .zip(&self.ends)
            .map(|(l, e)| (format!("{}->{}", names[e.from as usize], names[e.to as usize]), l.stats))
            .collect();
        let mut apps = self.apps;
        let mut flows = Vec::new();
        for (fi, (pnode, pa, rx)) in self.flow_apps.iter().enumerate() {
            let f = &self.sc.flows[fi];
            let App::Provider(provider) = apps[*pnode as usize][*pa].clone() else {
                unreachable!("provider slot")
            };
            let mut receivers = Vec::new();
            for (node, ai) in rx {
                let App::Receiver(app) = std::mem::replace(
                    &mut apps[*node as usize][*ai],
                    App::Provider(provider.clone()),
                ) else {
                    unreachable!("receiver slot")
                };
                violations.extend(app.violations().iter().cloned());
                let start = match &app {
                    ReceiverApp::Said(r) => r.cfg.start,
                    ReceiverApp::Icp(r) => r.cfg.start,
                };
                receivers.push(ReceiverOutcome {
                    node: names[*node as usize].clone(),
                    start,
                    app,
                });
            }
            flows.push(FlowOutcome {
                name: f.name.clone(),
                protocol: f.protocol,
                provider_node: names[*pnode as usize].clone(),
                provider,
                receivers,
            });
        }
        Outcome {
            bin: self.bin,
            scenario: self.sc,
            flows,
            routers,
            links,
            samples: self.samples,
            violations,
            events: self.events,
            stray: self.stray,
        }
    }
}

/// Build and run.
pub fn run_scenario(sc: &Scenario) -> anyhow::Result<Outcome> {
    Ok(World::new(sc)?.run())
}

impl Outcome {
    pub fn flow(&self, name: &str) -> Option<&FlowOutcome> {
        self.flows.iter().find(|f| f.name == name)
    }

    pub fn receiver(&self, node: &str) -> Option<&ReceiverOutcome> {
        self.flows.iter().flat_map(|f| &f.receivers).find(|r| r.node == node)
    }

    /// Mean goodput in Mbps of `bins` over `[t0, t1)`, whole bins only.
    pub fn mean_mbps(&self, bins: &[u64], t0: f64, t1: f64) -> f64 {
        let w = self.bin.as_secs_f64();
        let a = (t0 / w).round() as usize;
        let b = (t1 / w).round() as usize;
        if b <= a {
            return 0.0;
        }
        let bits: u64 = (a..b).map(|i| bins.get(i).copied().unwrap_or(0)).sum();
        bits as f64 / ((b - a) as f64 * w) / 1e6
    }

    pub fn receiver_mbps(&self, node: &str, t0: f64, t1: f64) -> f64 {
        self.receiver(node)
            .map_or(0.0, |r| self.mean_mbps(r.app.goodput_bins(), t0, t1))
    }

    /// Sum over all receivers of every flow.
    pub fn aggregate_mbps(&self, t0: f64, t1: f64) -> f64 {
        self.flows
            .iter()
            .flat_map(|f| &f.receivers)
            .map(|r| self.mean_mbps(r.app.goodput_bins(), t0, t1))
            .sum()
    }

    /// Bits carried by every link direction.
    pub fn network_load_bits(&self) -> u64 {
        self.links.iter().map(|(_, s)| s.bits_sent).sum()
    }

    /// Mean completion in seconds after each receiver's start; receivers
    /// that never finished count the full run.
    pub fn mean_completion_s(&self) -> f64 {
        let end = self.scenario.duration_s;
        let v: Vec<f64> = self
            .flows
            .iter()
            .flat_map(|f| &f.receivers)
            .map(|r| r.app.completion().map_or(end, |c| c.as_secs_f64()) - r.start.as_secs_f64())
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }

    /// Per-group measured mean over the fairness window divided by the fair
    /// rate.
    pub fn fairness(&self) -> Vec<(String, f64, f64)> {
        let Some(fs) = &self.scenario.fairness else {
            return Vec::new();
        };
        let (t0, t1) = (fs.warmup_s, fs.warmup_s + fs.measure_s);
        fs.groups
            .iter()
            .map(|g| {
                let avg = g.members.iter().map(|m| self.receiver_mbps(m, t0, t1)).sum::<f64>()
                    / g.members.len().max(1) as f64;
                (g.name.clone(), avg, avg / g.fair_mbps)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    const LINE: &str = r#"
        duration_s = 3
        checks = true
        nodes = [
            { id = "P", role = "host" },
            { id = "R1", role = "router" },
            { id = "R2", role = "router" },
            { id = "C", role = "host" },
        ]
        links = [
            { a = "P", b = "R1", mbps = 10 },
            { a = "R1", b = "R2", mbps = 1 },
            { a = "R2", b = "C", mbps = 10 },
        ]
        [[flows]]
        name = "/v/_v1"
        provider = "P"
        size_pkts = 200
        protocol = "said"
        rate_mbps = 0.5
        receivers = [{ node = "C" }]
    "#;

    #[test]
    fn slow_constant_flow_arrives_complete() {
        let s = Scenario::from_toml(LINE).unwrap();
        let o = run_scenario(&s).unwrap();
        assert!(o.violations.is_empty(), "{:?}", o.violations);
        let r = o.receiver("C").unwrap();
        // 0.5 Mbps for 3 s, less what was in flight at either end
        let got = r.app.received();
        assert!((146..=150).contains(&got), "{got}");
        assert!(o.flows[0].provider.anp_tx.iter().all(|&c| c <= 1));
    }

    #[test]
    fn icp_fetches_everything() {
        let s = Scenario::from_toml(&LINE.replace("protocol = \"said\"", "protocol = \"icp\"")).unwrap();
        let o = run_scenario(&s).unwrap();
        assert!(o.violations.is_empty(), "{:?}", o.violations);
        let r = o.receiver("C").unwrap();
        assert_eq!(r.app.received(), 200);
        assert!(r.app.completion().unwrap() < SimTime::from_secs(3));
    }
}
