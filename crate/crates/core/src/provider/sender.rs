use std::collections::BTreeMap;

use crate::engine::SimTime;

const MIN_RTO: f64 = 0.2;
const DUPTHRESH: u64 = 3;
const MAX_BACKOFF: u32 = 6;

/// What one acknowledgement did to the window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AckOutcome {
    pub lost: Vec<u64>,
    pub halved: bool,
}

/// Ack-clocked AIMD send window. Lost segments are forgotten, never resent.
#[derive(Debug, Clone)]
pub struct AckClock {
    pub cwnd: f64,
    inflight: BTreeMap<u64, SimTime>,
    srtt: Option<f64>,
    rttvar: f64,
    rto: f64,
    backoff: u32,
    /// No further decrease until a segment at or above this one is acked.
    recover: Option<u64>,
    pub halvings: u64,
    pub timeouts: u64,
}

impl Default for AckClock {
    fn default() -> Self {
        Self::new(2.0)
    }
}

impl AckClock {
    pub fn new(initial: f64) -> Self {
        AckClock {
            cwnd: initial,
            inflight: BTreeMap::new(),
            srtt: None,
            rttvar: 0.0,
            rto: 1.0,
            backoff: 0,
            recover: None,
            halvings: 0,
            timeouts: 0,
        }
    }

    pub fn inflight(&self) -> usize {
        self.inflight.len()
    }

    pub fn can_send(&self) -> bool {
        (self.inflight.len() as f64) < self.cwnd.floor().max(1.0)
    }

    pub fn on_send(&mut self, seg: u64, now: SimTime) {
        self.inflight.insert(seg, now);
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn rto(&self) -> SimTime {
        SimTime::from_secs_f64(self.rto * f64::from(1u32 << self.backoff))
    }

    /// When the oldest in-flight segment times out.
    pub fn deadline(&self) -> Option<SimTime> {
        self.inflight.values().min().map(|t| *t + self.rto())
    }

    fn decrease(&mut self, next_seg: u64) -> bool {
        if self.recover.is_some() {
            return false;
        }
        self.cwnd = (self.cwnd / 2.0).max(1.0);
        self.recover = Some(next_seg.saturating_sub(1));
        self.halvings += 1;
        true
    }

    pub fn on_ack(&mut self, seg: u64, marked: bool, now: SimTime, next_seg: u64) -> AckOutcome {
        let mut out = AckOutcome::default();
        let Some(sent) = self.inflight.remove(&seg) else {
            return out;
        };
        let sample = (now - sent).as_secs_f64();
        match self.srtt {
            None => {
                self.srtt = Some(sample);
                self.rttvar = sample / 2.0;
            }
            Some(s) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (s - sample).abs();
                self.srtt = Some(0.875 * s + 0.125 * sample);
            }
        }
        self.rto = (self.srtt.unwrap() + 4.0 * self.rttvar).max(MIN_RTO);
        self.backoff = 0;
        if self.recover.is_some_and(|r| seg > r) {
            self.recover = None;
        }
        out.lost = self
            .inflight
            .range(..seg.saturating_sub(DUPTHRESH - 1))
            .map(|(s, _)| *s)
            .collect();
        for s in &out.lost {
            self.inflight.remove(s);
        }
        if marked || !out.lost.is_empty() {
            out.halved = self.decrease(next_seg);
        } else {
            self.cwnd += 1.0 / self.cwnd;
        }
        out
    }

    /// Returns true if the retransmission timer really expired.
    pub fn on_timer(&mut self, now: SimTime, next_seg: u64) -> bool {
        match self.deadline() {
            Some(d) if d <= now => {
                self.inflight.clear();
                self.cwnd = 1.0;
                self.recover = Some(next_seg.saturating_sub(1));
                self.backoff = (self.backoff + 1).min(MAX_BACKOFF);
                self.timeouts += 1;
                true
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_increase() {
        let mut c = AckClock::new(4.0);
        let t = SimTime::from_millis(10);
        for s in 0..4 {
            c.on_send(s, SimTime::ZERO);
        }
        for s in 0..4 {
            c.on_ack(s, false, t, 4);
        }
        assert!(c.cwnd > 4.9 && c.cwnd < 5.0, "{}", c.cwnd);
    }

    #[test]
    fn halves_once_per_window() {
        let mut c = AckClock::new(16.0);
        for s in 0..16 {
            c.on_send(s, SimTime::ZERO);
        }
        let t = SimTime::from_millis(10);
        assert!(c.on_ack(0, true, t, 16).halved);
        assert_eq!(c.cwnd, 8.0);
        assert!(!c.on_ack(1, true, t, 16).halved);
        assert_eq!(c.cwnd, 8.0);
        c.on_send(16, t);
        assert!(c.on_ack(16, true, t, 17).halved);
        assert_eq!(c.cwnd, 4.0);
    }

    #[test]
    fn dupthresh_detects_loss() {
        let mut c = AckClock::new(8.0);
        for s in 0..8 {
            c.on_send(s, SimTime::ZERO);
        }
        let t = SimTime::from_millis(5);
        c.on_ack(1, false, t, 8);
        c.on_ack(2, false, t, 8);
        let o = c.on_ack(3, false, t, 8);
        assert_eq!(o.lost, vec![0]);
        assert!(o.halved);
    }

    #[test]
    fn timeout_resets_window() {
        let mut c = AckClock::new(8.0);
        c.on_send(0, SimTime::ZERO);
        assert!(!c.on_timer(SimTime::from_millis(100), 1));
        assert!(c.on_timer(SimTime::from_secs(1), 1));
        assert_eq!(c.cwnd, 1.0);
        assert_eq!(c.inflight(), 0);
    }
}
