//! Receiver side: the ANP window controller, hole tracking, repairs and
//! playout accounting.

mod app;
mod ledger;
mod repair;
mod stall;
mod window;

pub use app::{AppKind, ReceiverConfig, ReceiverKind, ReceiverMetrics, SaidReceiver};
pub use ledger::{detect_holes, prioritize, HoleHorizon, Insert, ReceiveLedger};
pub use repair::{RepairCtl, RepairMode, MAX_REPAIR_ATTEMPTS, PROVIDER_ONLY_FROM, REPAIR_TIMEOUT};
pub use stall::{stall_time, StreamingAppConfig};
pub use window::{on_window_end, CtlState, Decision, Feed, ReceiverControlState, WindowParams};
