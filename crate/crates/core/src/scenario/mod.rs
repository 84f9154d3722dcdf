//! Scenario files, built-in topologies and the random-tree generator.

mod builtins;
mod config;

pub use builtins::{builtin, competition, fig1, fig7, gfc, random_tree, streaming, tree4, BUILTIN_NAMES};
pub use config::{
    AppSpec, Defaults, FairnessSpec, FlowSpec, GroupSpec, LinkSpec, Mode, NamingSpec, NodeSpec, Protocol,
    ReceiverSpec, RemSpec, RepairSpec, Role, Scenario, ScenarioError,
};

/// `builtin:NAME` or a path to a TOML file.
pub fn resolve(spec: &str) -> Result<Scenario, ScenarioError> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => Scenario::load(std::path::Path::new(spec)),
    }
}
