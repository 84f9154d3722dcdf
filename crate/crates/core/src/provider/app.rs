use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;

use super::{acker_score, select_acker, AckClock, AckerPolicy, AckerStats};
use crate::app::AppCtx;
use crate::baselines::pgmcc_select;
use crate::engine::SimTime;
use crate::forwarding::{
    checksum_for, AckBody, AckerTag, DataInfo, InterestKind, NodeId, Packet, PacketKind, MPR_INF,
};
use crate::naming::FlowId;

const TOKEN_SEND: u64 = 1;
const TOKEN_STATS: u64 = 2;
const TOKEN_RTO: u64 = 3;
/// Until some receiver answers, the opening trigger is resent this often.
const FIRST_TRIGGER_RETRY: SimTime = SimTime::from_millis(100);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AckerKind {
    /// Rank-band election.
    Said(AckerPolicy),
    /// Slowest receiver paces the flow.
    Pgmcc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SendMode {
    ConstantRate { rate_bps: u64 },
    Acker(AckerKind),
    /// Only answers specific Interests.
    Passive,
}

#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub flow: FlowId,
    pub chunk_size: u64,
    pub mode: SendMode,
    pub start: SimTime,
    pub data_bits: u64,
    pub stats_period: SimTime,
    pub salt: u64,
    pub bin: SimTime,
    pub checks: bool,
}

#[derive(Debug, Clone)]
pub struct ProviderApp {
    pub cfg: ProviderConfig,
    pub id: NodeId,
    pub next_seg: u64,
    /// First-pass transmissions per segment.
    pub anp_tx: Vec<u32>,
    /// Transmissions answering specific Interests.
    pub repair_tx: Vec<u32>,
    pub retransmissions_seen: u64,
    pub clock: AckClock,
    current: Option<NodeId>,
    switching: Option<NodeId>,
    previous: Option<(NodeId, u64)>,
    period: Option<(u64, u64)>,
    round: Option<(u64, u64)>,
    replies: BTreeMap<NodeId, AckerStats>,
    known: BTreeSet<NodeId>,
    rto_timer: Option<SimTime>,
    pub elections: u64,
    pub acker_log: Vec<(SimTime, NodeId)>,
    pub sent_bits_bins: Vec<u64>,
    pub finished_at: Option<SimTime>,
}

impl ProviderApp {
    pub fn new(id: NodeId, cfg: ProviderConfig) -> Self {
        let f = cfg.flow.flow_size_pkts as usize;
        ProviderApp {
            id,
            next_seg: 0,
            anp_tx: vec![0; f],
            repair_tx: vec![0; f],
            retransmissions_seen: 0,
            clock: AckClock::new(2.0),
            current: None,
            switching: None,
            previous: None,
            period: None,
            round: None,
            replies: BTreeMap::new(),
            known: BTreeSet::new(),
            rto_timer: None,
            elections: 0,
            acker_log: Vec::new(),
            sent_bits_bins: Vec::new(),
            finished_at: None,
            cfg,
        }
    }

    pub fn current_acker(&self) -> Option<NodeId> {
        self.current
    }

    fn flow_size(&self) -> u64 {
        self.cfg.flow.flow_size_pkts
    }

    fn account(&mut self, now: SimTime) {
        let bin = (now.as_micros() / self.cfg.bin.as_micros().max(1)) as usize;
        if self.sent_bits_bins.len() <= bin {
            self.sent_bits_bins.resize(bin + 1, 0);
        }
        self.sent_bits_bins[bin] += self.cfg.data_bits;
    }

    fn data_packet(&self, seg: u64, anp_stream: bool, acker: AckerTag, now: SimTime) -> Packet {
        let name = self
            .cfg
            .flow
            .prefix
            .with_segment(seg, self.cfg.chunk_size)
            .expect("chunk size validated");
        let info = DataInfo {
            segment: seg,
            anp_stream,
            mpr: MPR_INF,
            mark: false,
            acker,
            checksum: checksum_for(self.cfg.salt, seg),
            source: self.id,
            pr_trace: self.cfg.checks.then(Vec::new),
            debited: false,
        };
        Packet::data(name, info, self.cfg.data_bits, now)
    }

    fn emit(&mut self, ctx: &mut AppCtx, tag: AckerTag) -> u64 {
        let seg = self.next_seg;
        self.next_seg += 1;
        self.anp_tx[seg as usize] += 1;
        let p = self.data_packet(seg, true, tag, ctx.now);
        ctx.send(p);
        self.account(ctx.now);
        self.period = Some(match self.period {
            None => (seg, seg),
            Some((a, _)) => (a, seg),
        });
        if self.next_seg == self.flow_size() {
            self.finished_at = Some(ctx.now);
        }
        seg
    }

    fn send_time(&self, k: u64, rate_bps: u64) -> SimTime {
        let us = k as u128 * self.cfg.data_bits as u128 * 1_000_000 / rate_bps as u128;
        self.cfg.start + SimTime(us as u64)
    }

    pub fn start(&mut self, ctx: &mut AppCtx) {
        match self.cfg.mode {
            SendMode::ConstantRate { .. } => ctx.timer(ctx.now, TOKEN_SEND),
            SendMode::Acker(_) => {
                self.emit(ctx, AckerTag::none());
                self.send_trigger(ctx);
                ctx.timer(ctx.now + FIRST_TRIGGER_RETRY, TOKEN_STATS);
            }
            SendMode::Passive => {}
        }
    }

    fn send_trigger(&mut self, ctx: &mut AppCtx) {
        let Some((a, b)) = self.period.take() else {
            return;
        };
        self.round = Some((a, b));
        self.replies.clear();
        let t = Packet::trigger(self.cfg.flow.prefix.clone(), a, b, self.id, ctx.now);
        ctx.send(t);
    }

    fn tag(&self) -> AckerTag {
        match (self.current, self.switching) {
            (Some(c), Some(n)) => AckerTag::dual(c, n),
            (Some(c), None) => AckerTag::single(c),
            _ => AckerTag::none(),
        }
    }

    fn pump(&mut self, ctx: &mut AppCtx) {
        if self.current.is_none() {
            return;
        }
        while self.next_seg < self.flow_size() && self.clock.can_send() {
            let tag = self.tag();
            let seg = self.emit(ctx, tag);
            self.clock.on_send(seg, ctx.now);
        }
        self.arm_rto(ctx);
    }

    fn arm_rto(&mut self, ctx: &mut AppCtx) {
        if self.rto_timer.is_none() {
            if let Some(d) = self.clock.deadline() {
                self.rto_timer = Some(d);
                ctx.timer(d, TOKEN_RTO);
            }
        }
    }

    fn elect(&mut self, ctx: &mut AppCtx, who: NodeId) {
        self.elections += 1;
        self.acker_log.push((ctx.now, who));
    }

    pub fn on_packet(&mut self, ctx: &mut AppCtx, pkt: Packet) {
        match pkt.kind {
            PacketKind::Interest(InterestKind::Specific { .. }) => {
                let Some(seg) = pkt.name.segment() else { return };
                if seg >= self.flow_size() {
                    return;
                }
                let i = seg as usize;
                if self.anp_tx[i] > 0 || self.repair_tx[i] > 0 {
                    self.retransmissions_seen += 1;
                }
                self.repair_tx[i] += 1;
                let p = self.data_packet(seg, false, AckerTag::none(), ctx.now);
                ctx.send(p);
                self.account(ctx.now);
            }
            PacketKind::Ack(AckBody::Stats(st)) => {
                let o = pkt.origin;
                self.known.insert(o);
                if self.round.is_some_and(|(a, _)| a == st.range_start) {
                    self.replies.insert(o, st);
                }
                if self.current.is_none() && matches!(self.cfg.mode, SendMode::Acker(_)) {
                    self.current = Some(o);
                    self.elect(ctx, o);
                    self.pump(ctx);
                }
            }
            PacketKind::Ack(AckBody::Data { segment, marked }) => {
                self.on_data_ack(ctx, pkt.origin, segment, marked)
            }
            _ => {}
        }
    }

    fn on_data_ack(&mut self, ctx: &mut AppCtx, o: NodeId, seg: u64, marked: bool) {
        let valid = if Some(o) == self.current {
            !matches!(self.previous, Some((_, s2)) if seg < s2)
        } else if let Some((old, s2)) = self.previous {
            o == old && seg < s2
        } else {
            false
        };
        if Some(o) == self.switching {
            // first word from the new ACKer: single-tag from here on
            let old = self.current.expect("switch without current ACKer");
            self.previous = Some((old, self.next_seg));
            self.current = Some(o);
            self.switching = None;
            self.acker_log.push((ctx.now, o));
            return;
        }
        if !valid {
            return;
        }
        self.clock.on_ack(seg, marked, ctx.now, self.next_seg);
        self.pump(ctx);
    }

    fn scores(&self) -> Vec<(NodeId, Ratio<i64>)> {
        self.known
            .iter()
            .map(|id| {
                let s = self
                    .replies
                    .get(id)
                    .map(|st| acker_score(st).value)
                    .unwrap_or_else(|| Ratio::from_integer(0));
                (*id, s)
            })
            .collect()
    }

    fn reelect(&mut self, ctx: &mut AppCtx) {
        let SendMode::Acker(kind) = self.cfg.mode else { return };
        if self.round.is_none() || self.switching.is_some() || self.known.is_empty() {
            return;
        }
        let Some(cur) = self.current else { return };
        let scores = self.scores();
        let next = match kind {
            AckerKind::Said(policy) => select_acker(&scores, &policy, Some(cur)),
            AckerKind::Pgmcc => pgmcc_select(&scores, Some(cur)),
        };
        if next != cur {
            self.switching = Some(next);
            self.elect(ctx, next);
        }
    }

    pub fn on_timer(&mut self, ctx: &mut AppCtx, token: u64) {
        match token {
            TOKEN_SEND => {
                let SendMode::ConstantRate { rate_bps } = self.cfg.mode else { return };
                if self.next_seg < self.flow_size() {
                    self.emit(ctx, AckerTag::none());
                }
                if self.next_seg < self.flow_size() {
                    let at = self.send_time(self.next_seg, rate_bps);
                    ctx.timer(at, TOKEN_SEND);
                }
            }
            TOKEN_STATS => {
                if self.current.is_none() {
                    // nobody answered the first trigger yet
                    if let Some((a, b)) = self.round {
                        let t = Packet::trigger(self.cfg.flow.prefix.clone(), a, b, self.id, ctx.now);
                        ctx.send(t);
                    }
                } else {
                    self.reelect(ctx);
                    self.send_trigger(ctx);
                }
                let done = self.next_seg >= self.flow_size() && self.clock.inflight() == 0;
                if self.current.is_none() {
                    ctx.timer(ctx.now + FIRST_TRIGGER_RETRY, TOKEN_STATS);
                } else if !done || self.period.is_some() {
                    ctx.timer(ctx.now + self.cfg.stats_period, TOKEN_STATS);
                }
            }
            TOKEN_RTO => {
                self.rto_timer = None;
                match self.clock.deadline() {
                    Some(d) if d > ctx.now => {
                        self.rto_timer = Some(d);
                        ctx.timer(d, TOKEN_RTO);
                    }
                    Some(_) => {
                        self.clock.on_timer(ctx.now, self.next_seg);
                        self.pump(ctx);
                    }
                    None => {}
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::NodeRole;
    use crate::naming::parse_name;

    fn cfg(mode: SendMode, f: u64) -> ProviderConfig {
        ProviderConfig {
            flow: FlowId::new(parse_name("/p/_v1").unwrap(), f).unwrap(),
            chunk_size: 100,
            mode,
            start: SimTime::ZERO,
            data_bits: 10_000,
            stats_period: SimTime::from_secs(2),
            salt: 1,
            bin: SimTime::from_millis(500),
            checks: false,
        }
    }

    #[test]
    fn constant_rate_spacing() {
        let mut p = ProviderApp::new(0, cfg(SendMode::ConstantRate { rate_bps: 3_000_000 }, 10));
        let roles = [NodeRole::Host];
        let mut ctx = AppCtx::new(SimTime::ZERO, 0, &roles);
        p.start(&mut ctx);
        let mut times = vec![];
        let mut pending = ctx.timers.clone();
        while let Some((t, tok)) = pending.pop() {
            let mut c = AppCtx::new(t, 0, &roles);
            p.on_timer(&mut c, tok);
            if !c.out.is_empty() {
                times.push(t.as_micros());
            }
            pending.extend(c.timers);
        }
        assert_eq!(times.len(), 10);
        // 10_000 bits at 3 Mbps is 3333.3 us, without drift
        assert_eq!(times[1], 3333);
        assert_eq!(times[3], 10_000);
        assert_eq!(times[9], 30_000);
        assert!(p.anp_tx.iter().all(|&c| c == 1));
    }

    #[test]
    fn first_replier_becomes_acker() {
        let mut p = ProviderApp::new(0, cfg(SendMode::Acker(AckerKind::Said(AckerPolicy::default())), 100));
        let roles = [NodeRole::Host; 10];
        let mut ctx = AppCtx::new(SimTime::ZERO, 0, &roles);
        p.start(&mut ctx);
        assert_eq!(ctx.out.len(), 2, "seg 0 then its trigger");
        let reply = |o| {
            Packet::ack(
                parse_name("/p/_v1").unwrap(),
                AckBody::Stats(AckerStats {
                    receive_pkt_count: 1,
                    mark_pkt_count: 0,
                    last_receive_id: 0,
                    range_start: 0,
                }),
                o,
                SimTime::ZERO,
            )
        };
        let mut ctx = AppCtx::new(SimTime::from_millis(10), 0, &roles);
        p.on_packet(&mut ctx, reply(7));
        p.on_packet(&mut ctx, reply(3));
        assert_eq!(p.current_acker(), Some(7));
        let tagged: Vec<_> = ctx.out.iter().filter_map(|p| p.data_info()).collect();
        assert_eq!(tagged.len(), 2);
        assert!(tagged.iter().all(|d| d.acker == AckerTag::single(7)));
    }

    #[test]
    fn repair_requests_counted_separately() {
        let mut p = ProviderApp::new(0, cfg(SendMode::Passive, 5));
        let roles = [NodeRole::Host];
        let name = parse_name("/p/_v1/_s3").unwrap();
        for _ in 0..2 {
            let mut ctx = AppCtx::new(SimTime::ZERO, 0, &roles);
            let i = Packet::interest(name.clone(), InterestKind::Specific { provider_only: false }, 9, SimTime::ZERO);
            p.on_packet(&mut ctx, i);
            assert_eq!(ctx.out.len(), 1);
        }
        assert_eq!(p.repair_tx[3], 2);
        assert_eq!(p.retransmissions_seen, 1);
        assert!(p.anp_tx.iter().all(|&c| c == 0));
    }
}
