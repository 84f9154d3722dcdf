use crate::engine::{LinkPacket, SimTime};
use crate::naming::ContentName;
use crate::provider::AckerStats;

pub type NodeId = u32;
pub type FaceId = u32;

/// Infinite MPR, as stamped by the provider.
pub const MPR_INF: u32 = u32::MAX;

/// 1250-byte packets: 1 Mbps carries 100 packets per second.
pub const DATA_BITS_DEFAULT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterestKind {
    /// Sequence-specific request for `name`.
    Specific { provider_only: bool },
    /// Change in the number of outstanding "any next" requests on this face.
    Anp { delta: i64 },
    /// Ask routers to forward every packet of the flow on this face.
    Subscribe(bool),
}

/// Up to two receivers asked to acknowledge a Data packet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AckerTag(pub [Option<NodeId>; 2]);

impl AckerTag {
    pub fn none() -> Self {
        AckerTag([None, None])
    }

    pub fn single(id: NodeId) -> Self {
        AckerTag([Some(id), None])
    }

    pub fn dual(old: NodeId, new: NodeId) -> Self {
        AckerTag([Some(old), Some(new)])
    }

    pub fn includes(&self, id: NodeId) -> bool {
        self.0.contains(&Some(id))
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [None, None]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataInfo {
    pub segment: u64,
    /// True for the provider's single pass; false for repairs and cache replies.
    pub anp_stream: bool,
    pub mpr: u32,
    pub mark: bool,
    pub acker: AckerTag,
    pub checksum: u64,
    /// Node that emitted this copy: producer, peer receiver, or caching router.
    pub source: NodeId,
    /// Per-hop PR values, recorded only when invariant checks are on.
    pub pr_trace: Option<Vec<u32>>,
    /// Set on a router's copy that consumed one unit of the face's PR.
    pub debited: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AckBody {
    /// ACKer feedback for one Data packet.
    Data { segment: u64, marked: bool },
    /// Reply to a statistics trigger.
    Stats(AckerStats),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PacketKind {
    Interest(InterestKind),
    Data(DataInfo),
    Ack(AckBody),
    Trigger { start: u64, end: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub kind: PacketKind,
    pub name: ContentName,
    pub nonce: u64,
    pub size_bits: u64,
    /// Originating host for Interests and Acks.
    pub origin: NodeId,
    pub created: SimTime,
}

impl Packet {
    pub fn interest(name: ContentName, kind: InterestKind, origin: NodeId, now: SimTime) -> Self {
        Packet {
            kind: PacketKind::Interest(kind),
            name,
            nonce: 0,
            size_bits: 0,
            origin,
            created: now,
        }
    }

    pub fn data(name: ContentName, info: DataInfo, size_bits: u64, now: SimTime) -> Self {
        Packet {
            origin: info.source,
            kind: PacketKind::Data(info),
            name,
            nonce: 0,
            size_bits,
            created: now,
        }
    }

    pub fn ack(name: ContentName, body: AckBody, origin: NodeId, now: SimTime) -> Self {
        Packet {
            kind: PacketKind::Ack(body),
            name,
            nonce: 0,
            size_bits: 0,
            origin,
            created: now,
        }
    }

    pub fn trigger(name: ContentName, start: u64, end: u64, origin: NodeId, now: SimTime) -> Self {
        Packet {
            kind: PacketKind::Trigger { start, end },
            name,
            nonce: 0,
            size_bits: 0,
            origin,
            created: now,
        }
    }

    pub fn is_anp(&self) -> bool {
        matches!(self.kind, PacketKind::Interest(InterestKind::Anp { .. }))
    }

    /// Interests and Acks are latency-bearing but bandwidth-free.
    pub fn bypasses_queue(&self) -> bool {
        matches!(self.kind, PacketKind::Interest(_) | PacketKind::Ack(_))
    }

    pub fn data_info(&self) -> Option<&DataInfo> {
        match &self.kind {
            PacketKind::Data(d) => Some(d),
            _ => None,
        }
    }

    pub fn data_info_mut(&mut self) -> Option<&mut DataInfo> {
        match &mut self.kind {
            PacketKind::Data(d) => Some(d),
            _ => None,
        }
    }
}

impl LinkPacket for Packet {
    fn size_bits(&self) -> u64 {
        self.size_bits
    }

    fn is_droppable(&self) -> bool {
        matches!(self.kind, PacketKind::Data(_))
    }

    fn set_mark(&mut self) {
        if let PacketKind::Data(d) = &mut self.kind {
            d.mark = true;
        }
    }
}

/// Payload digest of segment `seg` of the flow whose salt is `flow_salt`.
pub fn checksum_for(flow_salt: u64, seg: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = flow_salt ^ seg.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
