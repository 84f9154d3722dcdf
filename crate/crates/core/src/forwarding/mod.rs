//! Per-node forwarding: packets, FIB, PIT, Content Store and the router logic.

mod cs;
mod fib;
mod packet;
mod pit;
mod router;

pub use cs::ContentStore;
pub use fib::{Fib, NextHop, Origin};
pub use packet::{
    checksum_for, AckBody, AckerTag, DataInfo, FaceId, InterestKind, NodeId, Packet, PacketKind,
    DATA_BITS_DEFAULT, MPR_INF,
};
pub use pit::{Pit, PitEntry, PitFace, SPECIFIC_LIFETIME};
pub use router::{FaceInfo, Router, RouterAction, RouterCounters};
