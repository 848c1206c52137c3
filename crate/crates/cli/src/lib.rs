//! Scenario runner for TRS-assisted link simulations: TOML configs in,
//! CSV or JSON reports out.

pub mod config;
pub mod driver;
pub mod error;
pub mod report;

pub use config::{load_scenario, Format, ScenarioConfig};
pub use driver::{gamma_sweep, run_scenario, RunReport};
pub use error::ScenarioError;
