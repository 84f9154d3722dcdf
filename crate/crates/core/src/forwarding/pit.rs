use std::collections::HashMap;

use super::FaceId;
use crate::engine::SimTime;
use crate::naming::ContentName;

/// Lifetime of a sequence-specific pending request.
pub const SPECIFIC_LIFETIME: SimTime = SimTime::from_secs(4);

/// Per-face state of one flow's PIT entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PitFace {
    pub face: FaceId,
    /// Outstanding "any next" requests.
    pub pr: u32,
    /// Forward every packet of the flow on this face.
    pub forward_all: bool,
    /// Pending specific segments with their expiry.
    pub pending: HashMap<u64, SimTime>,
    /// Cumulative positive PR increments.
    pub requested_total: u64,
    /// Cumulative ANP Data sent against PR.
    pub served_total: u64,
}

/// Pending-interest state for one flow prefix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PitEntry {
    pub faces: Vec<PitFace>,
    /// PR last propagated upstream, decremented by each ANP Data received.
    pub advertised_pr: u32,
    /// Specific segments already forwarded upstream, with expiry.
    pub upstream: HashMap<u64, SimTime>,
    pub upstream_subscribed: bool,
    pub flush_scheduled: bool,
}

impl PitEntry {
    pub fn face_mut(&mut self, face: FaceId) -> &mut PitFace {
        match self.faces.iter().position(|f| f.face == face) {
            Some(i) => &mut self.faces[i],
            None => {
                self.faces.push(PitFace {
                    face,
                    ..PitFace::default()
                });
                self.faces.last_mut().unwrap()
            }
        }
    }

    pub fn face(&self, face: FaceId) -> Option<&PitFace> {
        self.faces.iter().find(|f| f.face == face)
    }

    pub fn max_pr(&self) -> u32 {
        self.faces.iter().map(|f| f.pr).max().unwrap_or(0)
    }

    pub fn any_forward_all(&self) -> bool {
        self.faces.iter().any(|f| f.forward_all)
    }

    /// Drop expired specific pendings.
    pub fn purge(&mut self, now: SimTime) {
        for f in &mut self.faces {
            f.pending.retain(|_, exp| *exp > now);
        }
        self.upstream.retain(|_, exp| *exp > now);
    }

    /// Nothing pending at `now` and nothing left to propagate.
    pub fn is_drained(&self, now: SimTime) -> bool {
        self.advertised_pr == 0
            && !self.flush_scheduled
            && !self.upstream_subscribed
            && self.faces.iter().all(|f| f.pr == 0 && !f.forward_all)
            && self.upstream.values().all(|exp| *exp <= now)
            && self
                .faces
                .iter()
                .all(|f| f.pending.values().all(|exp| *exp <= now))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: HashMap<ContentName, PitEntry>,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, flow: &ContentName) -> Option<&PitEntry> {
        self.entries.get(flow)
    }

    pub fn get_mut(&mut self, flow: &ContentName) -> Option<&mut PitEntry> {
        self.entries.get_mut(flow)
    }

    pub fn entry(&mut self, flow: ContentName) -> &mut PitEntry {
        self.entries.entry(flow).or_default()
    }

    /// Remove the entry if it has drained.
    pub fn maybe_remove(&mut self, flow: &ContentName, now: SimTime) -> bool {
        if self.entries.get(flow).is_some_and(|e| e.is_drained(now)) {
            self.entries.remove(flow);
            return true;
        }
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContentName, &PitEntry)> {
        self.entries.iter()
    }
}
