use std::collections::BTreeSet;

use crate::engine::SimTime;
use crate::provider::AckerStats;

const GOT: u8 = 1;
const VIA_ANP: u8 = 2;
const MARKED: u8 = 4;

/// What a receiver holds of one flow.
#[derive(Debug, Clone)]
pub struct ReceiveLedger {
    flags: Vec<u8>,
    arrival: Vec<Option<SimTime>>,
    /// Gaps below the highest segment seen.
    missing: BTreeSet<u64>,
    /// One past the highest segment seen.
    frontier: u64,
    pub received_count: u64,
    chunk_size: u64,
    chunk_fill: Vec<u32>,
}

impl ReceiveLedger {
    pub fn new(flow_size: u64, chunk_size: u64) -> Self {
        let chunks = flow_size.div_ceil(chunk_size) as usize;
        ReceiveLedger {
            flags: vec![0; flow_size as usize],
            arrival: vec![None; flow_size as usize],
            missing: BTreeSet::new(),
            frontier: 0,
            received_count: 0,
            chunk_size,
            chunk_fill: vec![0; chunks],
        }
    }

    pub fn flow_size(&self) -> u64 {
        self.flags.len() as u64
    }

    pub fn has(&self, seg: u64) -> bool {
        self.flags.get(seg as usize).is_some_and(|f| f & GOT != 0)
    }

    pub fn is_complete(&self) -> bool {
        self.received_count == self.flow_size()
    }

    pub fn last_received_id(&self) -> Option<u64> {
        self.frontier.checked_sub(1)
    }

    pub fn arrivals(&self) -> &[Option<SimTime>] {
        &self.arrival
    }

    /// Store `seg`. Reports the chunk it completed, if any.
    pub fn insert(&mut self, seg: u64, now: SimTime, via_anp: bool, marked: bool) -> Insert {
        let Some(f) = self.flags.get_mut(seg as usize) else {
            return Insert::OutOfRange;
        };
        if via_anp {
            *f |= VIA_ANP;
            if marked {
                *f |= MARKED;
            }
        }
        if *f & GOT != 0 {
            return Insert::Duplicate;
        }
        *f |= GOT;
        self.arrival[seg as usize] = Some(now);
        self.received_count += 1;
        if seg >= self.frontier {
            self.missing.extend(self.frontier..seg);
            self.frontier = seg + 1;
        } else {
            self.missing.remove(&seg);
        }
        let c = (seg / self.chunk_size) as usize;
        self.chunk_fill[c] += 1;
        let len = self.chunk_len(c as u64);
        Insert::New {
            completed_chunk: (self.chunk_fill[c] as u64 == len).then_some(c as u64),
        }
    }

    fn chunk_len(&self, c: u64) -> u64 {
        let start = c * self.chunk_size;
        (start + self.chunk_size).min(self.flow_size()) - start
    }

    /// Treat everything past the frontier as missing too.
    pub fn close(&mut self) {
        let f = self.flow_size();
        if self.frontier < f {
            for s in self.frontier..f {
                if !self.has(s) {
                    self.missing.insert(s);
                }
            }
            self.frontier = f;
        }
    }

    pub fn missing(&self) -> &BTreeSet<u64> {
        &self.missing
    }

    /// Statistics over ANP receptions in `[start, end]`.
    pub fn stats(&self, start: u64, end: u64) -> AckerStats {
        let mut s = AckerStats {
            range_start: start,
            last_receive_id: start,
            ..AckerStats::default()
        };
        let hi = end.min(self.flow_size().saturating_sub(1));
        for seg in start..=hi {
            let f = self.flags[seg as usize];
            if f & VIA_ANP != 0 {
                s.receive_pkt_count += 1;
                if f & MARKED != 0 {
                    s.mark_pkt_count += 1;
                }
                s.last_receive_id = seg;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    New { completed_chunk: Option<u64> },
    Duplicate,
    OutOfRange,
}

/// Which order repairs should go in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoleHorizon {
    /// Ascending.
    File,
    /// Holes in `[position, position + lookahead)` first, then ascending.
    Streaming { position: u64, lookahead: u64 },
}

/// Missing segments below the highest received one, in repair order.
pub fn detect_holes(ledger: &ReceiveLedger, horizon: HoleHorizon) -> Vec<u64> {
    prioritize(ledger.missing().iter().copied(), horizon)
}

pub fn prioritize(holes: impl Iterator<Item = u64>, horizon: HoleHorizon) -> Vec<u64> {
    match horizon {
        HoleHorizon::File => holes.collect(),
        HoleHorizon::Streaming {
            position,
            lookahead,
        } => {
            let (mut urgent, rest): (Vec<u64>, Vec<u64>) = holes
                .partition(|h| *h >= position && *h < position.saturating_add(lookahead));
            urgent.extend(rest);
            urgent
        }
    }
}
