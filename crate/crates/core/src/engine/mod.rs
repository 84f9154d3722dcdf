//! Discrete-event core: fixed-point clock, ordered scheduler, links, RNG streams.

mod link;
mod rng;
mod scheduler;
mod time;

pub use link::{Disposition, Link, LinkPacket, LinkStats, RemParams};
pub use rng::{rng_stream, SimRng};
pub use scheduler::Scheduler;
pub use time::SimTime;
