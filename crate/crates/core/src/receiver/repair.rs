use std::collections::{BTreeMap, BTreeSet};

use crate::engine::SimTime;

pub const REPAIR_TIMEOUT: SimTime = SimTime::from_secs(4);
pub const MAX_REPAIR_ATTEMPTS: u32 = 5;
/// From this attempt on, repairs ignore peer routes.
pub const PROVIDER_ONLY_FROM: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    None,
    /// From the provider once the first pass is over.
    ProviderAfterFlow,
    /// From the provider while the first pass runs.
    Provider,
    /// Through hop-limited peer announcements, falling back to the provider.
    Peer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Try {
    attempt: u32,
    deadline: SimTime,
}

/// In-sequence AIMD window for repair Interests, with timeout backoff.
#[derive(Debug, Clone)]
pub struct RepairCtl {
    pub window: f64,
    inflight: BTreeMap<u64, Try>,
    guard: u64,
    pub requested: u64,
    pub unrepaired: BTreeSet<u64>,
    pub timer_at: Option<SimTime>,
}

impl Default for RepairCtl {
    fn default() -> Self {
        RepairCtl {
            window: 2.0,
            inflight: BTreeMap::new(),
            guard: 0,
            requested: 0,
            unrepaired: BTreeSet::new(),
            timer_at: None,
        }
    }
}

impl RepairCtl {
    pub fn capacity(&self) -> usize {
        (self.window.floor().max(1.0) as usize).saturating_sub(self.inflight.len())
    }

    pub fn in_flight(&self, seg: u64) -> bool {
        self.inflight.contains_key(&seg)
    }

    pub fn in_flight_count(&self) -> usize {
        self.inflight.len()
    }

    pub fn blocked(&self, seg: u64) -> bool {
        self.in_flight(seg) || self.unrepaired.contains(&seg)
    }

    /// Register attempt 1 for `seg`.
    pub fn issue(&mut self, seg: u64, now: SimTime) {
        self.requested += 1;
        self.inflight.insert(
            seg,
            Try {
                attempt: 1,
                deadline: now + REPAIR_TIMEOUT,
            },
        );
    }

    pub fn attempt(&self, seg: u64) -> Option<u32> {
        self.inflight.get(&seg).map(|t| t.attempt)
    }

    fn halve(&mut self) {
        if self.guard == 0 {
            self.window = (self.window / 2.0).max(1.0);
            self.guard = self.window.ceil() as u64;
        }
    }

    /// A repair Data arrived. Returns whether it was outstanding.
    pub fn on_data(&mut self, seg: u64, marked: bool) -> bool {
        let was = self.inflight.remove(&seg).is_some();
        if !was {
            return false;
        }
        if marked {
            self.halve();
        } else {
            self.window += 1.0 / self.window;
        }
        self.guard = self.guard.saturating_sub(1);
        was
    }

    /// The segment arrived some other way.
    pub fn forget(&mut self, seg: u64) {
        self.inflight.remove(&seg);
    }

    pub fn next_deadline(&self) -> Option<SimTime> {
        self.inflight.values().map(|t| t.deadline).min()
    }

    /// Expire overdue requests. Returns `(segment, attempt)` pairs to resend;
    /// segments past the attempt limit move to `unrepaired`.
    pub fn expire(&mut self, now: SimTime) -> Vec<(u64, u32)> {
        let due: Vec<u64> = self
            .inflight
            .iter()
            .filter(|(_, t)| t.deadline <= now)
            .map(|(s, _)| *s)
            .collect();
        if due.is_empty() {
            return Vec::new();
        }
        self.halve();
        let mut resend = Vec::new();
        for s in due {
            let t = self.inflight.get_mut(&s).unwrap();
            if t.attempt >= MAX_REPAIR_ATTEMPTS {
                self.inflight.remove(&s);
                self.unrepaired.insert(s);
                continue;
            }
            t.attempt += 1;
            let backoff = 1u64 << (t.attempt - 1);
            t.deadline = now + SimTime(REPAIR_TIMEOUT.as_micros() * backoff);
            self.requested += 1;
            resend.push((s, t.attempt));
        }
        resend
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_then_give_up() {
        let mut r = RepairCtl::default();
        r.issue(20, SimTime::ZERO);
        let mut now = SimTime::ZERO;
        let mut gaps = vec![];
        loop {
            let d = r.next_deadline();
            let Some(d) = d else { break };
            gaps.push((d - now).as_micros() / 1_000_000);
            now = d;
            r.expire(now);
        }
        assert_eq!(gaps, vec![4, 8, 16, 32, 64]);
        assert!(r.unrepaired.contains(&20));
    }

    #[test]
    fn aimd_on_marks() {
        let mut r = RepairCtl::default();
        for s in 0..2 {
            r.issue(s, SimTime::ZERO);
        }
        assert!(r.on_data(0, false));
        assert!((r.window - 2.5).abs() < 1e-12);
        assert!(r.on_data(1, true));
        assert!((r.window - 1.25).abs() < 1e-12);
        assert!(!r.on_data(1, true));
    }
}
