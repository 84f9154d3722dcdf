use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::RemParams;
use crate::naming::{parse_name, NamingConfig};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("unknown builtin scenario {0:?}")]
    UnknownBuiltin(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Router,
    Host,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_pkts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemSpec {
    pub min_th: f64,
    pub max_th: f64,
    pub max_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub mbps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_pkts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rem: Option<RemSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Said,
    Icp,
    Pgmcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ConstantRate,
    Acker,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppSpec {
    File,
    Streaming { playout_mbps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairSpec {
    None,
    ProviderAfterFlow,
    Provider,
    Peer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSpec {
    pub node: String,
    #[serde(default)]
    pub start_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    /// Flow prefix, e.g. `/video/_v1`.
    pub name: String,
    pub provider: String,
    pub size_pkts: u64,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_mbps: Option<f64>,
    #[serde(default)]
    pub start_s: f64,
    #[serde(default = "default_app")]
    pub app: AppSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<RepairSpec>,
    pub receivers: Vec<ReceiverSpec>,
}

fn default_app() -> AppSpec {
    AppSpec::File
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub fair_mbps: f64,
    /// Receiver host ids.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairnessSpec {
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
    #[serde(default = "default_measure")]
    pub measure_s: f64,
    pub groups: Vec<GroupSpec>,
}

fn default_warmup() -> f64 {
    5.0
}

fn default_measure() -> f64 {
    15.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamingSpec {
    #[serde(default = "default_chunk")]
    pub chunk_size: u64,
    #[serde(default = "default_hops")]
    pub repair_hop_limit: u32,
}

fn default_chunk() -> u64 {
    100
}

fn default_hops() -> u32 {
    2
}

impl Default for NamingSpec {
    fn default() -> Self {
        NamingSpec {
            chunk_size: default_chunk(),
            repair_hop_limit: default_hops(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "default_queue")]
    pub queue_pkts: usize,
    #[serde(default = "default_cache")]
    pub cache_pkts: usize,
    #[serde(default = "default_latency")]
    pub latency_ms: f64,
    #[serde(default = "default_bits")]
    pub packet_bits: u64,
    #[serde(default = "default_stats")]
    pub stats_period_s: f64,
    #[serde(default = "default_idle")]
    pub idle_end_s: f64,
}

fn default_queue() -> usize {
    50
}
fn default_cache() -> usize {
    50
}
fn default_latency() -> f64 {
    2.0
}
fn default_bits() -> u64 {
    crate::forwarding::DATA_BITS_DEFAULT
}
fn default_stats() -> f64 {
    2.0
}
fn default_idle() -> f64 {
    2.0
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            queue_pkts: default_queue(),
            cache_pkts: default_cache(),
            latency_ms: default_latency(),
            packet_bits: default_bits(),
            stats_period_s: default_stats(),
            idle_end_s: default_idle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub duration_s: f64,
    #[serde(default = "default_bin")]
    pub metrics_bin_s: f64,
    /// Record per-hop PR on Data and check invariants while running.
    #[serde(default)]
    pub checks: bool,
    #[serde(default)]
    pub naming: NamingSpec,
    #[serde(default)]
    pub defaults: Defaults,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub flows: Vec<FlowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness: Option<FairnessSpec>,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_seed() -> u64 {
    1
}
fn default_bin() -> f64 {
    0.5
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.materialize();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Fill every optional field with its effective value so the echoed
    /// config is complete.
    pub fn materialize(&mut self) {
        let d = self.defaults.clone();
        for n in &mut self.nodes {
            if n.role == Role::Router && n.cache_pkts.is_none() {
                n.cache_pkts = Some(d.cache_pkts);
            }
        }
        for l in &mut self.links {
            l.latency_ms.get_or_insert(d.latency_ms);
            let q = *l.queue_pkts.get_or_insert(d.queue_pkts);
            if l.rem.is_none() {
                let r = RemParams::for_capacity(q);
                l.rem = Some(RemSpec {
                    min_th: r.min_th,
                    max_th: r.max_th,
                    max_p: r.max_p,
                });
            }
        }
        for f in &mut self.flows {
            f.mode.get_or_insert(match f.protocol {
                Protocol::Said => {
                    if f.rate_mbps.is_some() {
                        Mode::ConstantRate
                    } else {
                        Mode::Acker
                    }
                }
                Protocol::Icp => Mode::ConstantRate,
                Protocol::Pgmcc => Mode::Acker,
            });
            f.repair.get_or_insert(match f.protocol {
                Protocol::Said => RepairSpec::Peer,
                Protocol::Icp => RepairSpec::None,
                Protocol::Pgmcc => RepairSpec::Provider,
            });
        }
    }

    pub fn node_index(&self) -> BTreeMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }

    /// Report every violation at once.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut errs = Vec::new();
        if !(self.duration_s > 0.0) {
            errs.push(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.metrics_bin_s > 0.0) {
            errs.push(format!("metrics_bin_s must be positive, got {}", self.metrics_bin_s));
        }
        if NamingConfig::new(self.naming.chunk_size).is_err() {
            errs.push("naming.chunk_size must be positive".into());
        }
        if self.defaults.packet_bits == 0 {
            errs.push("defaults.packet_bits must be positive".into());
        }
        if self.nodes.is_empty() {
            errs.push("no nodes".into());
        }
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                errs.push(format!("duplicate node id {:?}", n.id));
            }
        }
        let idx = self.node_index();
        let role = |id: &str| idx.get(id).map(|&i| self.nodes[i].role);
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        let mut pairs = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            let mut ok = true;
            for end in [&l.a, &l.b] {
                if !idx.contains_key(end.as_str()) {
                    errs.push(format!("link {i}: unknown node {end:?}"));
                    ok = false;
                }
            }
            if !(l.mbps > 0.0) || !l.mbps.is_finite() {
                errs.push(format!("link {i} ({}-{}): non-positive bandwidth {}", l.a, l.b, l.mbps));
            }
            if l.latency_ms.is_some_and(|v| !(v >= 0.0)) {
                errs.push(format!("link {i} ({}-{}): negative latency", l.a, l.b));
            }
            if let Some(q) = l.queue_pkts {
                if q == 0 {
                    errs.push(format!("link {i} ({}-{}): queue must hold at least one packet", l.a, l.b));
                }
                if let Some(r) = l.rem {
                    let p = RemParams {
                        min_th: r.min_th,
                        max_th: r.max_th,
                        max_p: r.max_p,
                    };
                    if let Err(e) = p.validate(q) {
                        errs.push(format!("link {i} ({}-{}): {e}", l.a, l.b));
                    }
                }
            }
            if l.a == l.b {
                errs.push(format!("link {i}: self loop at {}", l.a));
                ok = false;
            }
            if ok {
                let (a, b) = (idx[l.a.as_str()], idx[l.b.as_str()]);
                if !pairs.insert((a.min(b), a.max(b))) {
                    errs.push(format!("link {i}: duplicate link {}-{}", l.a, l.b));
                }
                adj[a].push(b);
                adj[b].push(a);
                if role(&l.a) == Some(Role::Host) && role(&l.b) == Some(Role::Host) {
                    errs.push(format!("link {i}: hosts {} and {} must meet at a router", l.a, l.b));
                }
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.role == Role::Host && adj[i].len() != 1 {
                errs.push(format!("host {} needs exactly one link, has {}", n.id, adj[i].len()));
            }
        }
        if !self.nodes.is_empty() {
            let mut seen = vec![false; self.nodes.len()];
            let mut q = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        q.push_back(v);
                    }
                }
            }
            let cut: Vec<&str> = seen
                .iter()
                .enumerate()
                .filter(|(_, s)| !**s)
                .map(|(i, _)| self.nodes[i].id.as_str())
                .collect();
            if !cut.is_empty() {
                errs.push(format!("graph not connected; unreachable: {}", cut.join(", ")));
            }
        }
        let mut flow_names = BTreeSet::new();
        for f in &self.flows {
            match parse_name(&f.name) {
                Ok(n) if n.chunk().is_none() && n.segment().is_none() => {}
                Ok(_) => errs.push(format!("flow {}: name must be a flow prefix", f.name)),
                Err(e) => errs.push(format!("flow {}: {e}", f.name)),
            }
            if !flow_names.insert(f.name.as_str()) {
                errs.push(format!("duplicate flow {}", f.name));
            }
            if role(&f.provider) != Some(Role::Host) {
                errs.push(format!("flow {}: provider {:?} is not a host", f.name, f.provider));
            }
            if f.size_pkts == 0 {
                errs.push(format!("flow {}: size_pkts must be positive", f.name));
            }
            if f.receivers.is_empty() {
                errs.push(format!("flow {}: no receivers", f.name));
            }
            if !(f.start_s >= 0.0) {
                errs.push(format!("flow {}: negative start", f.name));
            }
            let mut rs = BTreeSet::new();
            for r in &f.receivers {
                if role(&r.node) != Some(Role::Host) {
                    errs.push(format!("flow {}: receiver {:?} is not a host", f.name, r.node));
                }
                if r.node == f.provider {
                    errs.push(format!("flow {}: provider cannot receive its own flow", f.name));
                }
                if !rs.insert(r.node.as_str()) {
                    errs.push(format!("flow {}: receiver {} listed twice", f.name, r.node));
                }
                if !(r.start_s >= 0.0) {
                    errs.push(format!("flow {}: receiver {} has negative start", f.name, r.node));
                }
            }
            let mode = f.mode.unwrap_or(Mode::Acker);
            match (f.protocol, mode) {
                (Protocol::Said, Mode::ConstantRate) => match f.rate_mbps {
                    Some(r) if r > 0.0 => {}
                    _ => errs.push(format!("flow {}: constant_rate needs a positive rate_mbps", f.name)),
                },
                (Protocol::Pgmcc, Mode::ConstantRate) => {
                    errs.push(format!("flow {}: pgmcc paces by ACKer, not a fixed rate", f.name))
                }
                _ => {}
            }
            if let AppSpec::Streaming { playout_mbps } = f.app {
                if !(playout_mbps > 0.0) {
                    errs.push(format!("flow {}: playout_mbps must be positive", f.name));
                }
            }
        }
        if let Some(fair) = &self.fairness {
            if !(fair.warmup_s >= 0.0 && fair.measure_s > 0.0) {
                errs.push("fairness window must be non-negative warmup and positive span".into());
            }
            let receivers: BTreeSet<&str> = self
                .flows
                .iter()
                .flat_map(|f| f.receivers.iter().map(|r| r.node.as_str()))
                .collect();
            for g in &fair.groups {
                if !(g.fair_mbps > 0.0) {
                    errs.push(format!("group {}: fair_mbps must be positive", g.name));
                }
                for m in &g.members {
                    if !receivers.contains(m.as_str()) {
                        errs.push(format!("group {}: {m} is not a receiver", g.name));
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
        duration_s = 5
        nodes = [
            { id = "P", role = "host" },
            { id = "R", role = "router" },
            { id = "C", role = "host" },
        ]
        links = [
            { a = "P", b = "R", mbps = 2 },
            { a = "R", b = "C", mbps = 1, latency_ms = 5 },
        ]
        [[flows]]
        name = "/v/_v1"
        provider = "P"
        size_pkts = 100
        protocol = "said"
        rate_mbps = 2
        receivers = [{ node = "C" }]
    "#;

    #[test]
    fn defaults_materialized() {
        let s = Scenario::from_toml(SMALL).unwrap();
        assert_eq!(s.nodes[1].cache_pkts, Some(50));
        assert_eq!(s.links[0].latency_ms, Some(2.0));
        assert_eq!(s.links[1].latency_ms, Some(5.0));
        assert_eq!(s.flows[0].mode, Some(Mode::ConstantRate));
        assert_eq!(s.flows[0].repair, Some(RepairSpec::Peer));
        // the echoed form reloads to the same thing
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn lists_every_violation() {
        let bad = SMALL
            .replace("mbps = 1,", "mbps = -1,")
            .replace("provider = \"P\"", "provider = \"Q\"")
            .replace("duration_s = 5", "duration_s = 0");
        let Err(ScenarioError::Invalid(v)) = Scenario::from_toml(&bad) else {
            panic!("expected validation failure")
        };
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(v.iter().any(|e| e.contains("bandwidth")));
        assert!(v.iter().any(|e| e.contains("\"Q\"")));
    }

    #[test]
    fn disconnected_graph_rejected() {
        let bad = SMALL.replace("{ a = \"R\", b = \"C\", mbps = 1, latency_ms = 5 },", "");
        let Err(ScenarioError::Invalid(v)) = Scenario::from_toml(&bad) else {
            panic!("expected validation failure")
        };
        assert!(v.iter().any(|e| e.contains("not connected")), "{v:?}");
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let bad = SMALL.replace("duration_s = 5", "duration_s = 5\nbogus = 1");
        assert!(matches!(Scenario::from_toml(&bad), Err(ScenarioError::Parse(_))));
    }
}
