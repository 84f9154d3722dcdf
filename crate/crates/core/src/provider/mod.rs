//! Provider side: constant-rate or ACKer-paced sending, trigger statistics,
//! ACKer scoring and election.

mod acker;
mod app;
mod sender;

pub use acker::{acker_score, rank, select_acker, AckerPolicy, AckerStats, Score};
pub use app::{AckerKind, ProviderApp, ProviderConfig, SendMode};
pub use sender::{AckClock, AckOutcome};
