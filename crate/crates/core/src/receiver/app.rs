use super::{
    Decision, Feed, Insert, ReceiveLedger, ReceiverControlState, RepairCtl, RepairMode,
    StreamingAppConfig, WindowParams, PROVIDER_ONLY_FROM,
};
use crate::app::AppCtx;
use crate::engine::SimTime;
use crate::forwarding::{
    AckBody, AckerTag, DataInfo, InterestKind, NodeId, Packet, PacketKind, MPR_INF,
};
use crate::naming::{chunk_of, FlowId};

const TOKEN_IDLE: u64 = 1;
const TOKEN_REPAIR: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    /// Window-controlled ANP requests.
    Said,
    /// Joins the multicast tree and takes whatever arrives.
    Pgmcc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AppKind {
    File,
    Streaming(StreamingAppConfig),
}

#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    pub flow: FlowId,
    pub provider: NodeId,
    pub chunk_size: u64,
    pub start: SimTime,
    pub kind: ReceiverKind,
    pub repair: RepairMode,
    pub app: AppKind,
    pub params: WindowParams,
    pub data_bits: u64,
    pub bin: SimTime,
    /// End of the first pass when nothing arrives for this long.
    pub idle_end: SimTime,
    pub checks: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ReceiverMetrics {
    /// Unique bits delivered per bin.
    pub goodput_bins: Vec<u64>,
    pub decisions: Vec<(SimTime, Decision)>,
    pub halvings: Vec<(SimTime, u32, u32)>,
    pub anp_received: u64,
    pub marks_seen: u64,
    pub duplicates: u64,
    pub repairs_from_provider: u64,
    pub repairs_from_peers: u64,
    pub repairs_from_cache: u64,
    pub repairs_served: u64,
    pub checksum_mismatches: u64,
    pub acks_sent: u64,
    pub completion: Option<SimTime>,
    pub first_pass_end: Option<SimTime>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SaidReceiver {
    pub cfg: ReceiverConfig,
    pub id: NodeId,
    pub ctl: ReceiverControlState,
    pub outstanding: u32,
    pub ledger: ReceiveLedger,
    pub repair: RepairCtl,
    checksums: Vec<u64>,
    pub anp_done: bool,
    last_anp: Option<SimTime>,
    idle_armed: bool,
    subscribed: bool,
    pub is_acker: bool,
    pub metrics: ReceiverMetrics,
}

impl SaidReceiver {
    pub fn new(id: NodeId, cfg: ReceiverConfig) -> Self {
        let f = cfg.flow.flow_size_pkts;
        SaidReceiver {
            id,
            ctl: ReceiverControlState::new(cfg.params),
            outstanding: 0,
            ledger: ReceiveLedger::new(f, cfg.chunk_size),
            repair: RepairCtl::default(),
            checksums: vec![0; f as usize],
            anp_done: false,
            last_anp: None,
            idle_armed: false,
            subscribed: false,
            is_acker: false,
            metrics: ReceiverMetrics::default(),
            cfg,
        }
    }

    pub fn window(&self) -> u32 {
        self.ctl.window
    }

    fn flow_size(&self) -> u64 {
        self.cfg.flow.flow_size_pkts
    }

    fn prefix(&self) -> &crate::naming::ContentName {
        &self.cfg.flow.prefix
    }

    pub fn start(&mut self, ctx: &mut AppCtx) {
        match self.cfg.kind {
            ReceiverKind::Said => {
                let w = self.ctl.window;
                self.request(ctx, w as i64);
            }
            ReceiverKind::Pgmcc => self.subscribe(ctx, true),
        }
    }

    fn request(&mut self, ctx: &mut AppCtx, delta: i64) {
        if delta == 0 {
            return;
        }
        self.outstanding = (self.outstanding as i64 + delta).max(0) as u32;
        if self.cfg.checks && delta > 0 && self.outstanding > self.ctl.window {
            self.metrics.violations.push(format!(
                "receiver {}: requested up to {} above window {}",
                self.id, self.outstanding, self.ctl.window
            ));
        }
        let p = Packet::interest(self.prefix().clone(), InterestKind::Anp { delta }, self.id, ctx.now);
        ctx.send(p);
    }

    fn subscribe(&mut self, ctx: &mut AppCtx, on: bool) {
        if self.subscribed == on {
            return;
        }
        self.subscribed = on;
        let p = Packet::interest(self.prefix().clone(), InterestKind::Subscribe(on), self.id, ctx.now);
        ctx.send(p);
    }

    fn account(&mut self, now: SimTime) {
        let bin = (now.as_micros() / self.cfg.bin.as_micros().max(1)) as usize;
        let b = &mut self.metrics.goodput_bins;
        if b.len() <= bin {
            b.resize(bin + 1, 0);
        }
        b[bin] += self.cfg.data_bits;
    }

    pub fn on_packet(&mut self, ctx: &mut AppCtx, pkt: Packet) {
        match &pkt.kind {
            PacketKind::Data(d) => {
                let d = d.clone();
                self.on_data(ctx, &pkt, d)
            }
            PacketKind::Trigger { start, end } => {
                let st = self.ledger.stats(*start, *end);
                let a = Packet::ack(self.prefix().clone(), AckBody::Stats(st), self.id, ctx.now);
                ctx.send(a);
            }
            PacketKind::Interest(InterestKind::Specific { .. }) => self.serve(ctx, &pkt),
            _ => {}
        }
    }

    /// Answer a peer's repair request from what we hold.
    fn serve(&mut self, ctx: &mut AppCtx, pkt: &Packet) {
        let Some(seg) = pkt.name.segment() else { return };
        if !self.ledger.has(seg) {
            return;
        }
        self.metrics.repairs_served += 1;
        let info = DataInfo {
            segment: seg,
            anp_stream: false,
            mpr: MPR_INF,
            mark: false,
            acker: AckerTag::none(),
            checksum: self.checksums[seg as usize],
            source: self.id,
            pr_trace: self.cfg.checks.then(Vec::new),
            debited: false,
        };
        ctx.send(Packet::data(pkt.name.clone(), info, self.cfg.data_bits, ctx.now));
    }

    fn on_data(&mut self, ctx: &mut AppCtx, pkt: &Packet, d: DataInfo) {
        let seg = d.segment;
        if self.cfg.checks {
            if let Some(t) = &d.pr_trace {
                let expect = t.iter().copied().min().unwrap_or(MPR_INF);
                if expect != d.mpr {
                    self.metrics.violations.push(format!(
                        "receiver {} seg {seg}: mpr {} but path minimum {expect}",
                        self.id, d.mpr
                    ));
                }
            }
            if pkt.name.segment() != Some(seg) {
                self.metrics.violations.push(format!("receiver {} seg {seg}: name mismatch", self.id));
            }
        }
        if d.anp_stream {
            self.on_anp(ctx, &d);
        } else {
            let was_requested = self.repair.on_data(seg, d.mark);
            if was_requested && !self.ledger.has(seg) {
                if d.source == self.cfg.provider {
                    self.metrics.repairs_from_provider += 1;
                } else if ctx.is_router(d.source) {
                    self.metrics.repairs_from_cache += 1;
                } else {
                    self.metrics.repairs_from_peers += 1;
                }
            }
        }
        self.store(ctx, &d);
        if seg + 1 == self.flow_size() && d.anp_stream {
            self.finish_anp(ctx);
        }
        self.schedule_repairs(ctx);
    }

    fn store(&mut self, ctx: &mut AppCtx, d: &DataInfo) {
        let seg = d.segment;
        match self.ledger.insert(seg, ctx.now, d.anp_stream, d.mark) {
            Insert::New { completed_chunk } => {
                self.checksums[seg as usize] = d.checksum;
                self.repair.forget(seg);
                self.account(ctx.now);
                if let Some(c) = completed_chunk {
                    if self.cfg.repair == RepairMode::Peer {
                        ctx.announce(self.prefix().with_chunk(c));
                    }
                }
                if self.ledger.is_complete() && self.metrics.completion.is_none() {
                    self.metrics.completion = Some(ctx.now);
                }
            }
            Insert::Duplicate => self.metrics.duplicates += 1,
            Insert::OutOfRange => {}
        }
    }

    fn on_anp(&mut self, ctx: &mut AppCtx, d: &DataInfo) {
        self.metrics.anp_received += 1;
        if d.mark {
            self.metrics.marks_seen += 1;
        }
        self.last_anp = Some(ctx.now);
        if !self.idle_armed && !self.anp_done {
            self.idle_armed = true;
            ctx.timer(ctx.now + self.cfg.idle_end, TOKEN_IDLE);
        }
        if d.acker.includes(self.id) {
            let body = AckBody::Data {
                segment: d.segment,
                marked: d.mark,
            };
            ctx.send(Packet::ack(self.prefix().clone(), body, self.id, ctx.now));
            self.metrics.acks_sent += 1;
            if !self.is_acker {
                self.is_acker = true;
                if self.cfg.kind == ReceiverKind::Said && !self.anp_done {
                    self.subscribe(ctx, true);
                }
            }
        } else if !d.acker.is_empty() && self.is_acker {
            self.is_acker = false;
            if self.cfg.kind == ReceiverKind::Said {
                self.subscribe(ctx, false);
            }
        }
        if self.cfg.kind != ReceiverKind::Said || self.anp_done {
            return;
        }
        self.outstanding = self.outstanding.saturating_sub(1);
        match self.ctl.record(d.mpr, d.mark) {
            Feed::Nothing => {}
            Feed::Halved { before, after } => self.metrics.halvings.push((ctx.now, before, after)),
            Feed::WindowEnd(dec) => self.metrics.decisions.push((ctx.now, dec)),
        }
        // after a decrease the excess drains instead of being withdrawn
        let delta = self.ctl.window as i64 - self.outstanding as i64;
        if delta > 0 {
            self.request(ctx, delta);
        }
    }

    fn finish_anp(&mut self, ctx: &mut AppCtx) {
        if self.anp_done {
            return;
        }
        self.anp_done = true;
        self.metrics.first_pass_end = Some(ctx.now);
        if self.outstanding > 0 {
            let w = -(self.outstanding as i64);
            self.request(ctx, w);
        }
        self.subscribe(ctx, false);
        self.ledger.close();
    }

    fn eligible_cutoff(&self) -> Option<u64> {
        match self.cfg.repair {
            RepairMode::None => None,
            RepairMode::ProviderAfterFlow => self.anp_done.then_some(u64::MAX),
            RepairMode::Provider => Some(u64::MAX),
            RepairMode::Peer => {
                if self.anp_done {
                    return Some(u64::MAX);
                }
                // wait until peers have likely finished the chunk
                let last = self.ledger.last_received_id()?;
                let c = last / self.cfg.chunk_size;
                Some((c.saturating_sub(1)) * self.cfg.chunk_size)
            }
        }
    }

    fn schedule_repairs(&mut self, ctx: &mut AppCtx) {
        let Some(cutoff) = self.eligible_cutoff() else { return };
        let mut cap = self.repair.capacity();
        if cap == 0 {
            return;
        }
        let mut picks = Vec::new();
        for &h in self.ledger.missing().iter() {
            if h >= cutoff || cap == 0 {
                break;
            }
            if self.repair.blocked(h) {
                continue;
            }
            picks.push(h);
            cap -= 1;
        }
        for h in picks {
            self.repair.issue(h, ctx.now);
            self.send_repair(ctx, h, 1);
        }
        self.arm_repair(ctx);
    }

    fn send_repair(&mut self, ctx: &mut AppCtx, seg: u64, attempt: u32) {
        let provider_only = self.cfg.repair != RepairMode::Peer || attempt >= PROVIDER_ONLY_FROM;
        let name = self
            .prefix()
            .with_segment(seg, self.cfg.chunk_size)
            .expect("chunk size validated");
        debug_assert_eq!(name.chunk(), chunk_of(seg, self.cfg.chunk_size).ok());
        let p = Packet::interest(name, InterestKind::Specific { provider_only }, self.id, ctx.now);
        ctx.send(p);
    }

    fn arm_repair(&mut self, ctx: &mut AppCtx) {
        if let Some(d) = self.repair.next_deadline() {
            if self.repair.timer_at.is_none_or(|t| d < t) {
                self.repair.timer_at = Some(d);
                ctx.timer(d, TOKEN_REPAIR);
            }
        }
    }

    pub fn on_timer(&mut self, ctx: &mut AppCtx, token: u64) {
        match token {
            TOKEN_IDLE => {
                self.idle_armed = false;
                if self.anp_done {
                    return;
                }
                let last = self.last_anp.unwrap_or(ctx.now);
                if ctx.now >= last + self.cfg.idle_end {
                    self.finish_anp(ctx);
                    self.schedule_repairs(ctx);
                } else {
                    self.idle_armed = true;
                    ctx.timer(last + self.cfg.idle_end, TOKEN_IDLE);
                }
            }
            TOKEN_REPAIR => {
                if self.repair.timer_at.is_some_and(|t| t <= ctx.now) {
                    self.repair.timer_at = None;
                    for (seg, attempt) in self.repair.expire(ctx.now) {
                        self.send_repair(ctx, seg, attempt);
                    }
                }
                self.schedule_repairs(ctx);
                self.arm_repair(ctx);
            }
            _ => {}
        }
    }

    /// Receiver gave up on these segments.
    pub fn unrepaired(&self) -> usize {
        self.repair.unrepaired.len()
    }

    pub fn stall_time(&self) -> Option<f64> {
        match self.cfg.app {
            AppKind::File => None,
            AppKind::Streaming(c) => super::stall_time(self.ledger.arrivals(), &c, self.cfg.start),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::NodeRole;
    use crate::forwarding::checksum_for;
    use crate::naming::parse_name;

    fn cfg(kind: ReceiverKind, repair: RepairMode, f: u64) -> ReceiverConfig {
        ReceiverConfig {
            flow: FlowId::new(parse_name("/v/_v1").unwrap(), f).unwrap(),
            provider: 0,
            chunk_size: 10,
            start: SimTime::ZERO,
            kind,
            repair,
            app: AppKind::File,
            params: WindowParams::default(),
            data_bits: 10_000,
            bin: SimTime::from_secs(1),
            idle_end: SimTime::from_secs(2),
            checks: true,
        }
    }

    fn anp_data(seg: u64, mpr: u32, mark: bool) -> Packet {
        let info = DataInfo {
            segment: seg,
            anp_stream: true,
            mpr,
            mark,
            acker: AckerTag::none(),
            checksum: checksum_for(1, seg),
            source: 0,
            pr_trace: None,
            debited: false,
        };
        Packet::data(parse_name("/v/_v1").unwrap().with_segment(seg, 10).unwrap(), info, 10_000, SimTime::ZERO)
    }

    fn deltas(ctx: &AppCtx) -> Vec<i64> {
        ctx.sent()
            .iter()
            .filter_map(|p| match p.kind {
                PacketKind::Interest(InterestKind::Anp { delta }) => Some(delta),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn keeps_window_outstanding() {
        let roles = [NodeRole::Host; 4];
        let mut r = SaidReceiver::new(3, cfg(ReceiverKind::Said, RepairMode::None, 100));
        let mut ctx = AppCtx::new(SimTime::ZERO, 3, &roles);
        r.start(&mut ctx);
        assert_eq!(deltas(&ctx), vec![2]);
        let mut ctx = AppCtx::new(SimTime::from_millis(10), 3, &roles);
        r.on_packet(&mut ctx, anp_data(0, 0, false));
        // one replacement request
        assert_eq!(deltas(&ctx), vec![1]);
        let mut ctx = AppCtx::new(SimTime::from_millis(20), 3, &roles);
        r.on_packet(&mut ctx, anp_data(1, 0, false));
        // window boundary with MMPR 0: grow to 3, so two more
        assert_eq!(r.window(), 3);
        assert_eq!(deltas(&ctx), vec![2]);
        assert_eq!(r.outstanding, 3);
    }

    #[test]
    fn mark_lets_excess_drain() {
        let roles = [NodeRole::Host; 4];
        let mut r = SaidReceiver::new(3, cfg(ReceiverKind::Said, RepairMode::None, 100));
        r.ctl.window = 8;
        r.outstanding = 8;
        let mut ctx = AppCtx::new(SimTime::from_millis(10), 3, &roles);
        r.on_packet(&mut ctx, anp_data(0, 2, true));
        assert_eq!(r.window(), 4);
        assert!(deltas(&ctx).is_empty());
        assert_eq!(r.outstanding, 7);
        assert_eq!(r.metrics.halvings.len(), 1);
        for seg in 1..4 {
            let mut ctx = AppCtx::new(SimTime::from_millis(10 + seg), 3, &roles);
            r.on_packet(&mut ctx, anp_data(seg, 2, false));
            assert!(deltas(&ctx).is_empty());
        }
        assert_eq!(r.outstanding, 4);
        let mut ctx = AppCtx::new(SimTime::from_millis(20), 3, &roles);
        r.on_packet(&mut ctx, anp_data(4, 2, false));
        // refill up to the window, which may have grown at the boundary
        assert!(r.window() >= 4);
        assert_eq!(deltas(&ctx), vec![r.window() as i64 - 3]);
    }

    #[test]
    fn provider_repair_requests_holes() {
        let roles = [NodeRole::Host; 4];
        let mut r = SaidReceiver::new(3, cfg(ReceiverKind::Said, RepairMode::Provider, 100));
        let mut ctx = AppCtx::new(SimTime::ZERO, 3, &roles);
        r.on_packet(&mut ctx, anp_data(4, 0, false));
        let asked: Vec<u64> = ctx
            .sent()
            .iter()
            .filter(|p| matches!(p.kind, PacketKind::Interest(InterestKind::Specific { .. })))
            .filter_map(|p| p.name.segment())
            .collect();
        assert_eq!(asked, vec![0, 1]);
    }

    #[test]
    fn last_segment_ends_first_pass() {
        let roles = [NodeRole::Host; 4];
        let mut r = SaidReceiver::new(3, cfg(ReceiverKind::Said, RepairMode::ProviderAfterFlow, 5));
        r.outstanding = 2;
        let mut ctx = AppCtx::new(SimTime::ZERO, 3, &roles);
        r.on_packet(&mut ctx, anp_data(4, 0, false));
        assert!(r.anp_done);
        assert_eq!(r.outstanding, 0);
        let specific = ctx
            .sent()
            .iter()
            .filter(|p| matches!(p.kind, PacketKind::Interest(InterestKind::Specific { .. })))
            .count();
        assert_eq!(specific, 2, "repair window starts at two");
    }

    #[test]
    fn peer_serves_held_segments() {
        let roles = [NodeRole::Host; 4];
        let mut r = SaidReceiver::new(3, cfg(ReceiverKind::Said, RepairMode::Peer, 100));
        let mut ctx = AppCtx::new(SimTime::ZERO, 3, &roles);
        r.on_packet(&mut ctx, anp_data(7, 0, false));
        let ask = |s: u64| {
            Packet::interest(
                parse_name("/v/_v1").unwrap().with_segment(s, 10).unwrap(),
                InterestKind::Specific { provider_only: false },
                2,
                SimTime::ZERO,
            )
        };
        let mut ctx = AppCtx::new(SimTime::ZERO, 3, &roles);
        r.on_packet(&mut ctx, ask(7));
        r.on_packet(&mut ctx, ask(8));
        assert_eq!(ctx.sent().len(), 1);
        assert_eq!(ctx.sent()[0].data_info().unwrap().checksum, checksum_for(1, 7));
    }
}
