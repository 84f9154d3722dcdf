//! Discrete-event simulator for any-next-packet dissemination over an
//! NDN-style network, with in-sequence and slowest-receiver baselines and
//! a closed-form out-of-sync model.

pub mod analysis;
pub mod app;
pub mod baselines;
pub mod engine;
pub mod forwarding;
pub mod naming;
pub mod provider;
pub mod receiver;
pub mod scenario;
pub mod world;
pub mod metrics;
pub mod acceptance;
