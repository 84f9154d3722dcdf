use std::collections::BTreeMap;

use crate::app::AppCtx;
use crate::engine::SimTime;
use crate::forwarding::{InterestKind, NodeId, Packet, PacketKind};
use crate::naming::FlowId;
use crate::receiver::{Insert, ReceiveLedger};

const TOKEN_RTO: u64 = 1;
const RTO_MIN: SimTime = SimTime::from_millis(200);
const RTO_INIT: SimTime = SimTime::from_secs(1);
const RTO_MAX: SimTime = SimTime::from_secs(60);

#[derive(Debug, Clone)]
pub struct IcpConfig {
    pub flow: FlowId,
    pub provider: NodeId,
    pub chunk_size: u64,
    pub start: SimTime,
    pub w_init: f64,
    pub data_bits: u64,
    pub bin: SimTime,
    pub checks: bool,
}

#[derive(Debug, Clone, Default)]
pub struct IcpMetrics {
    pub goodput_bins: Vec<u64>,
    pub requests: u64,
    pub re_requests: u64,
    /// Data answered by a router's Content Store.
    pub cache_served: u64,
    pub provider_served: u64,
    pub halvings: u64,
    pub completion: Option<SimTime>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    sent: SimTime,
    first: bool,
    deadline: SimTime,
}

/// Receiver-driven, strictly in-sequence fetching with an AIMD window
/// that halves on REM marks.
#[derive(Debug, Clone)]
pub struct IcpReceiver {
    pub cfg: IcpConfig,
    pub id: NodeId,
    pub window: f64,
    next_to_request: u64,
    pending: BTreeMap<u64, Pending>,
    recover: Option<u64>,
    srtt: Option<f64>,
    rttvar: f64,
    rto: SimTime,
    timer_at: Option<SimTime>,
    pub ledger: ReceiveLedger,
    pub metrics: IcpMetrics,
}

impl IcpReceiver {
    pub fn new(id: NodeId, cfg: IcpConfig) -> Self {
        IcpReceiver {
            id,
            window: cfg.w_init.max(1.0),
            next_to_request: 0,
            pending: BTreeMap::new(),
            recover: None,
            srtt: None,
            rttvar: 0.0,
            rto: RTO_INIT,
            timer_at: None,
            ledger: ReceiveLedger::new(cfg.flow.flow_size_pkts, cfg.chunk_size),
            metrics: IcpMetrics::default(),
            cfg,
        }
    }

    /// Lowest segment not yet received.
    pub fn next_needed(&self) -> u64 {
        self.ledger
            .missing()
            .first()
            .copied()
            .unwrap_or_else(|| self.ledger.last_received_id().map_or(0, |l| l + 1))
    }

    /// Highest segment requested so far, plus one.
    pub fn frontier(&self) -> u64 {
        self.next_to_request
    }

    pub fn outstanding(&self) -> usize {
        self.pending.len()
    }

    pub fn rto(&self) -> SimTime {
        self.rto
    }

    pub fn start(&mut self, ctx: &mut AppCtx) {
        self.fill(ctx);
    }

    fn request(&mut self, ctx: &mut AppCtx, seg: u64) {
        let name = self
            .cfg
            .flow
            .prefix
            .with_segment(seg, self.cfg.chunk_size)
            .expect("chunk size validated");
        let p = Packet::interest(name, InterestKind::Specific { provider_only: false }, self.id, ctx.now);
        ctx.send(p);
        self.metrics.requests += 1;
    }

    fn fill(&mut self, ctx: &mut AppCtx) {
        let f = self.cfg.flow.flow_size_pkts;
        let w = self.window.floor().max(1.0) as usize;
        while self.pending.len() < w && self.next_to_request < f {
            let seg = self.next_to_request;
            self.next_to_request += 1;
            if self.ledger.has(seg) {
                continue;
            }
            if self.cfg.checks && seg > self.next_needed() {
                let unasked = self.ledger.missing().range(..seg).any(|s| !self.pending.contains_key(s));
                if unasked {
                    self.metrics
                        .violations
                        .push(format!("icp receiver {}: seg {seg} requested out of sequence", self.id));
                }
            }
            self.pending.insert(
                seg,
                Pending {
                    sent: ctx.now,
                    first: true,
                    deadline: ctx.now + self.rto,
                },
            );
            self.request(ctx, seg);
        }
        self.arm(ctx);
    }

    fn arm(&mut self, ctx: &mut AppCtx) {
        let Some(d) = self.pending.values().map(|p| p.deadline).min() else {
            return;
        };
        if self.timer_at.is_none_or(|t| d < t) {
            self.timer_at = Some(d);
            ctx.timer(d, TOKEN_RTO);
        }
    }

    fn sample_rtt(&mut self, rtt: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(rtt);
                self.rttvar = rtt / 2.0;
            }
            Some(s) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (s - rtt).abs();
                self.srtt = Some(0.875 * s + 0.125 * rtt);
            }
        }
        let s = self.srtt.expect("set above");
        self.rto = SimTime::from_secs_f64(2.0 * s).max(RTO_MIN);
    }

    pub fn on_packet(&mut self, ctx: &mut AppCtx, pkt: Packet) {
        let PacketKind::Data(d) = &pkt.kind else { return };
        let seg = d.segment;
        let Some(p) = self.pending.remove(&seg) else {
            return;
        };
        if p.first {
            self.sample_rtt((ctx.now - p.sent).as_secs_f64());
        }
        if ctx.is_router(d.source) {
            self.metrics.cache_served += 1;
        } else if d.source == self.cfg.provider {
            self.metrics.provider_served += 1;
        }
        if self.recover.is_some_and(|r| seg >= r) {
            self.recover = None;
        }
        if d.mark {
            if self.recover.is_none() {
                self.window = (self.window / 2.0).max(1.0);
                self.recover = Some(self.next_to_request);
                self.metrics.halvings += 1;
            }
        } else {
            self.window += 1.0 / self.window;
        }
        if let Insert::New { .. } = self.ledger.insert(seg, ctx.now, false, d.mark) {
            let bin = (ctx.now.as_micros() / self.cfg.bin.as_micros().max(1)) as usize;
            let b = &mut self.metrics.goodput_bins;
            if b.len() <= bin {
                b.resize(bin + 1, 0);
            }
            b[bin] += self.cfg.data_bits;
            if self.ledger.is_complete() && self.metrics.completion.is_none() {
                self.metrics.completion = Some(ctx.now);
            }
        }
        self.fill(ctx);
    }

    pub fn on_timer(&mut self, ctx: &mut AppCtx, token: u64) {
        if token != TOKEN_RTO || !self.timer_at.is_some_and(|t| t <= ctx.now) {
            return;
        }
        self.timer_at = None;
        let due: Vec<u64> = self
            .pending
            .iter()
            .filter(|(_, p)| p.deadline <= ctx.now)
            .map(|(s, _)| *s)
            .collect();
        if !due.is_empty() {
            self.rto = SimTime(self.rto.as_micros() * 2).min(RTO_MAX);
        }
        for seg in due {
            let p = self.pending.get_mut(&seg).expect("due segment pending");
            p.first = false;
            p.sent = ctx.now;
            p.deadline = ctx.now + self.rto;
            self.metrics.re_requests += 1;
            self.request(ctx, seg);
        }
        self.fill(ctx);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::NodeRole;
    use crate::forwarding::{AckerTag, DataInfo, MPR_INF};
    use crate::naming::parse_name;

    fn rx() -> IcpReceiver {
        IcpReceiver::new(
            2,
            IcpConfig {
                flow: FlowId::new(parse_name("/i/_v1").unwrap(), 1000).unwrap(),
                provider: 0,
                chunk_size: 100,
                start: SimTime::ZERO,
                w_init: 2.0,
                data_bits: 10_000,
                bin: SimTime::from_secs(1),
                checks: true,
            },
        )
    }

    fn data(seg: u64, mark: bool, source: NodeId) -> Packet {
        let info = DataInfo {
            segment: seg,
            anp_stream: false,
            mpr: MPR_INF,
            mark,
            acker: AckerTag::none(),
            checksum: 0,
            source,
            pr_trace: None,
            debited: false,
        };
        Packet::data(parse_name("/i/_v1").unwrap().with_segment(seg, 100).unwrap(), info, 10_000, SimTime::ZERO)
    }

    fn asked(ctx: &AppCtx) -> Vec<u64> {
        ctx.sent().iter().filter_map(|p| p.name.segment()).collect()
    }

    #[test]
    fn in_sequence_growth() {
        let roles = [NodeRole::Host, NodeRole::Router, NodeRole::Host];
        let mut r = rx();
        let mut ctx = AppCtx::new(SimTime::ZERO, 2, &roles);
        r.start(&mut ctx);
        assert_eq!(asked(&ctx), vec![0, 1]);
        let mut ctx = AppCtx::new(SimTime::from_millis(10), 2, &roles);
        r.on_packet(&mut ctx, data(0, false, 0));
        assert!((r.window - 2.5).abs() < 1e-12);
        assert_eq!(asked(&ctx), vec![2]);
        r.on_packet(&mut ctx, data(1, false, 1));
        assert_eq!(r.metrics.cache_served, 1);
        assert_eq!(r.outstanding(), r.window.floor() as usize);
        assert!(r.metrics.violations.is_empty());
    }

    #[test]
    fn mark_halves_once_per_window() {
        let roles = [NodeRole::Host; 3];
        let mut r = rx();
        r.window = 16.0;
        let mut ctx = AppCtx::new(SimTime::ZERO, 2, &roles);
        r.start(&mut ctx);
        let mut ctx = AppCtx::new(SimTime::from_millis(5), 2, &roles);
        r.on_packet(&mut ctx, data(0, true, 0));
        assert_eq!(r.window, 8.0);
        r.on_packet(&mut ctx, data(1, true, 0));
        assert_eq!(r.window, 8.0);
        assert_eq!(r.metrics.halvings, 1);
    }

    #[test]
    fn timeout_re_requests_with_backoff() {
        let roles = [NodeRole::Host; 3];
        let mut r = rx();
        let mut ctx = AppCtx::new(SimTime::ZERO, 2, &roles);
        r.start(&mut ctx);
        let (t, tok) = ctx.pending_timers()[0];
        assert_eq!(t, RTO_INIT);
        let mut ctx = AppCtx::new(t, 2, &roles);
        r.on_timer(&mut ctx, tok);
        assert_eq!(asked(&ctx), vec![0, 1]);
        assert_eq!(r.rto(), SimTime::from_secs(2));
        assert_eq!(r.metrics.re_requests, 2);
    }
}
