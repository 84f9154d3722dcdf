//! Comparison transports: in-sequence receiver-driven fetching and
//! slowest-receiver pacing.

mod icp;
mod pgmcc;

pub use icp::{IcpConfig, IcpMetrics, IcpReceiver};
pub use pgmcc::{pgmcc_aggregate, pgmcc_rate, pgmcc_select};
