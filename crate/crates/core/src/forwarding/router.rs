use std::collections::HashMap;

use super::{
    ContentStore, DataInfo, FaceId, Fib, InterestKind, NodeId, Packet, PacketKind, Pit, AckerTag,
    MPR_INF, SPECIFIC_LIFETIME,
};
use crate::engine::SimTime;
use crate::naming::ContentName;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceInfo {
    pub peer: NodeId,
    pub peer_is_router: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouterAction {
    Send { face: FaceId, pkt: Packet },
    /// Run [`Router::flush`] for this flow at the current instant.
    ScheduleFlush { flow: ContentName },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RouterCounters {
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub pit_aggregations: u64,
    pub unsolicited: u64,
    pub no_route: u64,
    pub anp_propagations: u64,
    pub data_forwarded: u64,
    /// PR given back after an egress drop.
    pub refunds: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Cached {
    segment: u64,
    checksum: u64,
    size_bits: u64,
}

/// An NDN-style forwarder with ANP pending-request counters.
#[derive(Debug, Clone)]
pub struct Router {
    pub id: NodeId,
    pub faces: Vec<FaceInfo>,
    pub fib: Fib,
    pub pit: Pit,
    cs: ContentStore<Cached>,
    /// Faces that ever asked for a flow; Triggers are flooded along them.
    members: HashMap<ContentName, Vec<FaceId>>,
    pub counters: RouterCounters,
    /// Record per-hop PR on Data and check flow balance.
    pub checks: bool,
    pub violations: Vec<String>,
}

impl Router {
    pub fn new(id: NodeId, faces: Vec<FaceInfo>, cache_pkts: usize) -> Self {
        Router {
            id,
            faces,
            fib: Fib::new(),
            pit: Pit::new(),
            cs: ContentStore::new(cache_pkts),
            members: HashMap::new(),
            counters: RouterCounters::default(),
            checks: false,
            violations: Vec::new(),
        }
    }

    pub fn cache_capacity(&self) -> usize {
        self.cs.capacity()
    }

    pub fn cs_contains(&self, name: &ContentName) -> bool {
        self.cs.contains(name)
    }

    pub fn handle(&mut self, now: SimTime, pkt: Packet, in_face: FaceId, out: &mut Vec<RouterAction>) {
        match &pkt.kind {
            PacketKind::Interest(k) => {
                let k = *k;
                self.on_interest(now, pkt, k, in_face, out)
            }
            PacketKind::Data(_) => self.on_data(now, pkt, in_face, out),
            PacketKind::Ack(_) => self.on_ack(pkt, in_face, out),
            PacketKind::Trigger { .. } => self.on_trigger(pkt, in_face, out),
        }
    }

    fn add_member(&mut self, flow: &ContentName, face: FaceId) {
        let m = self.members.entry(flow.clone()).or_default();
        if !m.contains(&face) {
            m.push(face);
            m.sort_unstable();
        }
    }

    /// Next hop toward the flow's producer, if it is another router.
    fn upstream_router(&self, flow: &ContentName) -> Option<FaceId> {
        let nh = self.fib.static_route(flow)?;
        match nh.origin {
            super::Origin::Static { to_producer: true } => None,
            _ if self.faces[nh.face as usize].peer_is_router => Some(nh.face),
            _ => None,
        }
    }

    fn on_interest(
        &mut self,
        now: SimTime,
        pkt: Packet,
        kind: InterestKind,
        in_face: FaceId,
        out: &mut Vec<RouterAction>,
    ) {
        let flow = pkt.name.flow_prefix();
        match kind {
            InterestKind::Anp { delta } => {
                self.add_member(&flow, in_face);
                let e = self.pit.entry(flow.clone());
                let f = e.face_mut(in_face);
                f.pr = (f.pr as i64 + delta).clamp(0, u32::MAX as i64 - 1) as u32;
                if delta > 0 {
                    f.requested_total += delta as u64;
                }
                if !e.flush_scheduled {
                    e.flush_scheduled = true;
                    out.push(RouterAction::ScheduleFlush { flow });
                }
            }
            InterestKind::Subscribe(on) => {
                self.add_member(&flow, in_face);
                let up = self.upstream_router(&flow);
                let id = self.id;
                let e = self.pit.entry(flow.clone());
                e.face_mut(in_face).forward_all = on;
                let want = e.any_forward_all();
                if want != e.upstream_subscribed {
                    e.upstream_subscribed = want;
                    if let Some(face) = up {
                        let p = Packet::interest(flow.clone(), InterestKind::Subscribe(want), id, now);
                        out.push(RouterAction::Send { face, pkt: p });
                    }
                }
                self.pit.maybe_remove(&flow, now);
            }
            InterestKind::Specific { provider_only } => {
                self.on_specific(now, pkt, flow, provider_only, in_face, out)
            }
        }
    }

    fn on_specific(
        &mut self,
        now: SimTime,
        pkt: Packet,
        flow: ContentName,
        provider_only: bool,
        in_face: FaceId,
        out: &mut Vec<RouterAction>,
    ) {
        let Some(seg) = pkt.name.segment() else {
            self.counters.no_route += 1;
            return;
        };
        if let Some(c) = self.cs.lookup(&pkt.name) {
            self.counters.cache_hits += 1;
            let info = DataInfo {
                segment: c.segment,
                anp_stream: false,
                mpr: MPR_INF,
                mark: false,
                acker: AckerTag::none(),
                checksum: c.checksum,
                source: self.id,
                pr_trace: self.checks.then(Vec::new),
                debited: false,
            };
            let data = Packet::data(pkt.name.clone(), info, c.size_bits, now);
            out.push(RouterAction::Send {
                face: in_face,
                pkt: data,
            });
            return;
        }
        self.counters.cache_misses += 1;
        let e = self.pit.entry(flow.clone());
        let f = e.face_mut(in_face);
        let retransmission = f.pending.get(&seg).is_some_and(|exp| *exp > now);
        f.pending.insert(seg, now + SPECIFIC_LIFETIME);
        let upstream_pending = e.upstream.get(&seg).is_some_and(|exp| *exp > now);
        if upstream_pending && !retransmission {
            self.counters.pit_aggregations += 1;
            return;
        }
        match self.fib.lookup(&pkt.name, Some(in_face), provider_only) {
            Some(nh) => {
                let e = self.pit.get_mut(&flow).expect("entry just created");
                e.upstream.insert(seg, now + SPECIFIC_LIFETIME);
                out.push(RouterAction::Send { face: nh.face, pkt });
            }
            None => {
                self.counters.no_route += 1;
                let e = self.pit.get_mut(&flow).expect("entry just created");
                e.face_mut(in_face).pending.remove(&seg);
                self.pit.maybe_remove(&flow, now);
            }
        }
    }

    /// Propagate the change in max-over-faces PR upstream.
    pub fn flush(&mut self, now: SimTime, flow: &ContentName, out: &mut Vec<RouterAction>) {
        let up = self.upstream_router(flow);
        let id = self.id;
        let Some(e) = self.pit.get_mut(flow) else {
            return;
        };
        e.flush_scheduled = false;
        let max = e.max_pr();
        if max != e.advertised_pr {
            let delta = max as i64 - e.advertised_pr as i64;
            e.advertised_pr = max;
            if let Some(face) = up {
                self.counters.anp_propagations += 1;
                let p = Packet::interest(flow.clone(), InterestKind::Anp { delta }, id, now);
                out.push(RouterAction::Send { face, pkt: p });
            }
        }
        self.pit.maybe_remove(flow, now);
    }

    fn on_data(&mut self, now: SimTime, pkt: Packet, in_face: FaceId, out: &mut Vec<RouterAction>) {
        let info = pkt.data_info().expect("data").clone();
        let seg = info.segment;
        self.cs.insert(
            pkt.name.clone(),
            Cached {
                segment: seg,
                checksum: info.checksum,
                size_bits: pkt.size_bits,
            },
        );
        let flow = pkt.name.flow_prefix();
        let checks = self.checks;
        let Some(e) = self.pit.get_mut(&flow) else {
            self.counters.unsolicited += 1;
            return;
        };
        e.purge_if_due(now);
        e.upstream.remove(&seg);
        if info.anp_stream {
            e.advertised_pr = e.advertised_pr.saturating_sub(1);
        }
        let mut sent = 0u64;
        let mut violations = Vec::new();
        for f in e.faces.iter_mut() {
            if f.face == in_face {
                continue;
            }
            let specific = f.pending.remove(&seg).is_some_and(|exp| exp > now);
            let mut copy_mpr = None;
            let mut debit = false;
            if specific {
                copy_mpr = Some(None);
            } else if info.anp_stream {
                if f.pr > 0 {
                    f.pr -= 1;
                    f.served_total += 1;
                    if checks && f.served_total > f.requested_total {
                        violations.push(format!(
                            "flow balance broken at node {} face {}: served {} > requested {}",
                            self.id, f.face, f.served_total, f.requested_total
                        ));
                    }
                    copy_mpr = Some(Some(f.pr));
                    debit = true;
                } else if f.forward_all {
                    copy_mpr = Some(Some(0));
                }
            }
            let Some(stamp) = copy_mpr else { continue };
            let mut c = pkt.clone();
            let d = c.data_info_mut().unwrap();
            d.debited = debit;
            if let Some(pr) = stamp {
                d.mpr = d.mpr.min(pr);
                if let Some(t) = d.pr_trace.as_mut() {
                    t.push(pr);
                }
            }
            sent += 1;
            out.push(RouterAction::Send { face: f.face, pkt: c });
        }
        self.violations.extend(violations);
        self.counters.data_forwarded += sent;
        if sent == 0 {
            self.counters.unsolicited += 1;
        }
        self.pit.maybe_remove(&flow, now);
    }

    /// Give back the PR a dropped copy consumed on `face`.
    pub fn refund(&mut self, flow: &ContentName, face: FaceId, out: &mut Vec<RouterAction>) {
        let Some(e) = self.pit.get_mut(flow) else {
            return;
        };
        let Some(f) = e.faces.iter_mut().find(|f| f.face == face) else {
            return;
        };
        f.pr += 1;
        f.served_total = f.served_total.saturating_sub(1);
        self.counters.refunds += 1;
        if !e.flush_scheduled {
            e.flush_scheduled = true;
            out.push(RouterAction::ScheduleFlush { flow: flow.clone() });
        }
    }

    fn on_ack(&mut self, pkt: Packet, in_face: FaceId, out: &mut Vec<RouterAction>) {
        match self.fib.lookup(&pkt.name.flow_prefix(), Some(in_face), true) {
            Some(nh) => out.push(RouterAction::Send { face: nh.face, pkt }),
            None => self.counters.no_route += 1,
        }
    }

    fn on_trigger(&mut self, pkt: Packet, in_face: FaceId, out: &mut Vec<RouterAction>) {
        let flow = pkt.name.flow_prefix();
        if let Some(m) = self.members.get(&flow) {
            for &face in m.iter().filter(|f| **f != in_face) {
                out.push(RouterAction::Send {
                    face,
                    pkt: pkt.clone(),
                });
            }
        }
    }
}

impl super::PitEntry {
    fn purge_if_due(&mut self, now: SimTime) {
        // cheap amortized cleanup of expired specific state
        if self.upstream.len() > 256 || self.faces.iter().any(|f| f.pending.len() > 256) {
            self.purge(now);
        }
    }
}
