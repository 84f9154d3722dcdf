//! Glue between host applications and the network runtime.

use crate::engine::SimTime;
use crate::forwarding::{NodeId, Packet};
use crate::naming::ContentName;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Router,
    Host,
}

/// Side effects requested by an application during one callback.
pub struct AppCtx<'a> {
    pub now: SimTime,
    pub host: NodeId,
    roles: &'a [NodeRole],
    pub(crate) out: Vec<Packet>,
    pub(crate) timers: Vec<(SimTime, u64)>,
    pub(crate) announcements: Vec<ContentName>,
}

impl<'a> AppCtx<'a> {
    pub fn new(now: SimTime, host: NodeId, roles: &'a [NodeRole]) -> Self {
        AppCtx {
            now,
            host,
            roles,
            out: Vec::new(),
            timers: Vec::new(),
            announcements: Vec::new(),
        }
    }

    pub fn send(&mut self, pkt: Packet) {
        self.out.push(pkt);
    }

    /// Call back `on_timer(token)` at `at`.
    pub fn timer(&mut self, at: SimTime, token: u64) {
        self.timers.push((at.max(self.now), token));
    }

    /// Flood a repair prefix announcement from this host.
    pub fn announce(&mut self, prefix: ContentName) {
        self.announcements.push(prefix);
    }

    pub fn is_router(&self, id: NodeId) -> bool {
        self.roles.get(id as usize) == Some(&NodeRole::Router)
    }

    pub fn sent(&self) -> &[Packet] {
        &self.out
    }

    pub fn pending_timers(&self) -> &[(SimTime, u64)] {
        &self.timers
    }

    pub fn announced(&self) -> &[ContentName] {
        &self.announcements
    }
}
