use std::collections::VecDeque;

use rand::Rng;

use super::{SimRng, SimTime};

/// What a link needs to know about a queued packet.
pub trait LinkPacket {
    fn size_bits(&self) -> u64;
    /// Zero-size control packets ride the FIFO but are never dropped or marked.
    fn is_droppable(&self) -> bool;
    fn set_mark(&mut self);
}

/// Random Early Marking thresholds, in packets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemParams {
    pub min_th: f64,
    pub max_th: f64,
    pub max_p: f64,
}

impl RemParams {
    /// `min_th = capacity/3`, `max_th = capacity`, `max_p = 0.1`.
    pub fn for_capacity(capacity: usize) -> Self {
        RemParams {
            min_th: capacity as f64 / 3.0,
            max_th: capacity as f64,
            max_p: 0.1,
        }
    }

    pub fn validate(&self, capacity: usize) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.max_p) {
            return Err(format!("max_p {} outside [0,1]", self.max_p));
        }
        if !(0.0 <= self.min_th && self.min_th <= self.max_th && self.max_th <= capacity as f64) {
            return Err(format!(
                "need 0 <= min_th ({}) <= max_th ({}) <= capacity ({capacity})",
                self.min_th, self.max_th
            ));
        }
        Ok(())
    }

    /// Mark probability at instantaneous queue length `q`.
    pub fn mark_probability(&self, q: usize) -> f64 {
        let q = q as f64;
        if q < self.min_th {
            0.0
        } else if q >= self.max_th {
            1.0
        } else {
            self.max_p * (q - self.min_th) / (self.max_th - self.min_th)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Accepted { marked: bool },
    Dropped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkStats {
    pub offered: u64,
    pub dropped: u64,
    pub marked: u64,
    pub delivered: u64,
    pub in_transit: u64,
    pub bits_sent: u64,
}

/// One direction of a point-to-point link: FIFO queue, serializer, propagation delay.
pub struct Link<P> {
    pub bandwidth_bps: u64,
    pub latency: SimTime,
    pub capacity: usize,
    pub rem: RemParams,
    queue: VecDeque<(P, SimTime)>,
    data_len: usize,
    busy: bool,
    tx_remainder: u64,
    pub stats: LinkStats,
}

impl<P: LinkPacket> Link<P> {
    pub fn new(bandwidth_bps: u64, latency: SimTime, capacity: usize, rem: RemParams) -> Self {
        assert!(bandwidth_bps > 0, "bandwidth must be positive");
        Link {
            bandwidth_bps,
            latency,
            capacity,
            rem,
            queue: VecDeque::new(),
            data_len: 0,
            busy: false,
            tx_remainder: 0,
            stats: LinkStats::default(),
        }
    }

    /// Droppable packets in the queue, including the one being serialized.
    pub fn queue_len(&self) -> usize {
        self.data_len
    }

    pub fn packets_queued(&self) -> usize {
        self.queue.len()
    }

    pub fn is_busy(&self) -> bool {
        self.busy
    }

    /// Admit `pkt` at time `now`. The caller must call [`Link::start_next`]
    /// when the link is idle.
    pub fn enqueue(&mut self, mut pkt: P, now: SimTime, rng: &mut SimRng) -> Disposition {
        self.stats.offered += 1;
        if !pkt.is_droppable() {
            self.queue.push_back((pkt, now));
            return Disposition::Accepted { marked: false };
        }
        let q = self.data_len;
        if q >= self.capacity {
            self.stats.dropped += 1;
            return Disposition::Dropped;
        }
        let p = self.rem.mark_probability(q);
        let marked = p > 0.0 && (p >= 1.0 || rng.gen::<f64>() < p);
        if marked {
            pkt.set_mark();
            self.stats.marked += 1;
        }
        self.data_len += 1;
        self.queue.push_back((pkt, now));
        Disposition::Accepted { marked }
    }

    /// Serialization time of `bits`, carrying the fractional microsecond
    /// remainder forward so the long-run rate is exact.
    fn tx_time(&mut self, bits: u64) -> SimTime {
        let num = bits as u128 * 1_000_000 + self.tx_remainder as u128;
        let bw = self.bandwidth_bps as u128;
        self.tx_remainder = (num % bw) as u64;
        SimTime((num / bw) as u64)
    }

    /// If idle and non-empty, begin serializing the head packet and return
    /// the time it finishes.
    pub fn start_next(&mut self, now: SimTime) -> Option<SimTime> {
        if self.busy {
            return None;
        }
        let bits = self.queue.front()?.0.size_bits();
        self.busy = true;
        Some(now + self.tx_time(bits))
    }

    /// Serialization of the head packet is complete. Returns it with its
    /// enqueue time; it reaches the far end at `now + latency`.
    pub fn finish(&mut self) -> (P, SimTime) {
        assert!(self.busy, "finish on idle link");
        self.busy = false;
        let (pkt, enq) = self.queue.pop_front().expect("busy link with empty queue");
        if pkt.is_droppable() {
            self.data_len -= 1;
        }
        self.stats.bits_sent += pkt.size_bits();
        self.stats.in_transit += 1;
        (pkt, enq)
    }

    /// The far end took delivery of a packet previously returned by `finish`.
    pub fn delivered(&mut self) {
        self.stats.in_transit -= 1;
        self.stats.delivered += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng_stream;

    #[derive(Debug, Clone, PartialEq)]
    struct P {
        id: u32,
        bits: u64,
        marked: bool,
    }

    impl LinkPacket for P {
        fn size_bits(&self) -> u64 {
            self.bits
        }
        fn is_droppable(&self) -> bool {
            self.bits > 0
        }
        fn set_mark(&mut self) {
            self.marked = true;
        }
    }

    fn pkt(id: u32) -> P {
        P {
            id,
            bits: 10_000,
            marked: false,
        }
    }

    fn link(cap: usize) -> Link<P> {
        Link::new(1_000_000, SimTime::from_millis(2), cap, RemParams::for_capacity(cap))
    }

    #[test]
    fn defaults() {
        let r = RemParams::for_capacity(48);
        assert_eq!((r.min_th, r.max_th, r.max_p), (16.0, 48.0, 0.1));
        assert_eq!(r.mark_probability(0), 0.0);
        assert_eq!(r.mark_probability(15), 0.0);
        assert_eq!(r.mark_probability(48), 1.0);
        assert!((r.mark_probability(32) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_never_marks() {
        let mut l = link(48);
        let mut rng = rng_stream(1, 0);
        for i in 0..10_000 {
            assert_eq!(
                l.enqueue(pkt(i), SimTime::ZERO, &mut rng),
                Disposition::Accepted { marked: false }
            );
            l.start_next(SimTime::ZERO);
            l.finish();
        }
    }

    #[test]
    fn full_queue_drops() {
        let mut l = link(3);
        let mut rng = rng_stream(1, 0);
        for i in 0..3 {
            assert!(matches!(
                l.enqueue(pkt(i), SimTime::ZERO, &mut rng),
                Disposition::Accepted { .. }
            ));
        }
        assert_eq!(l.enqueue(pkt(9), SimTime::ZERO, &mut rng), Disposition::Dropped);
        // zero-size control packets still ride along
        let ctl = P {
            id: 10,
            bits: 0,
            marked: false,
        };
        assert_eq!(
            l.enqueue(ctl, SimTime::ZERO, &mut rng),
            Disposition::Accepted { marked: false }
        );
        assert_eq!(l.queue_len(), 3);
        assert_eq!(l.packets_queued(), 4);
    }

    #[test]
    fn monte_carlo_mark_rate_at_midpoint() {
        // q held at (min_th + max_th)/2 = 32 with capacity 48
        let mut l = link(48);
        let mut rng = rng_stream(42, 7);
        for i in 0..32 {
            l.enqueue(pkt(i), SimTime::ZERO, &mut rng);
        }
        assert_eq!(l.queue_len(), 32);
        let trials = 100_000u32;
        let mut marks = 0u32;
        for i in 0..trials {
            if let Disposition::Accepted { marked: true } =
                l.enqueue(pkt(1000 + i), SimTime::ZERO, &mut rng)
            {
                marks += 1;
            }
            // remove the newcomer from the tail to hold q fixed
            l.queue.pop_back();
            l.data_len -= 1;
        }
        let p = 0.05f64;
        let n = trials as f64;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!(((marks as f64) - n * p).abs() <= 3.0 * sigma, "marks={marks}");
    }

    #[test]
    fn fifo_and_timing() {
        let mut l = link(10);
        let mut rng = rng_stream(1, 0);
        for i in 0..3 {
            l.enqueue(pkt(i), SimTime::ZERO, &mut rng);
        }
        let mut now = SimTime::ZERO;
        for i in 0..3 {
            let done = l.start_next(now).unwrap();
            assert_eq!(done, now + SimTime::from_millis(10));
            assert!(l.start_next(now).is_none());
            now = done;
            let (p, enq) = l.finish();
            assert_eq!(p.id, i);
            assert!(now + l.latency - enq >= l.latency + SimTime::from_millis(10));
        }
        assert!(l.start_next(now).is_none());
    }

    #[test]
    fn fractional_rate_is_exact() {
        let mut l: Link<P> = Link::new(3_000_000, SimTime::ZERO, 10, RemParams::for_capacity(10));
        let total: u64 = (0..300).map(|_| l.tx_time(10_000).as_micros()).sum();
        assert_eq!(total, 1_000_000);
    }
}
