//! Slotted simulation and scheduling policies for age-of-information
//! minimization in multi-hop wireless networks.
//!
//! An [`Instance`] bundles a topology with per-edge reliabilities, a set of
//! flows and the interference-free actions. Policies implement
//! [`sim::Policy`] and are driven by [`sim::run_simulation`]:
//!
//! ```
//! use aoi_core::experiment::scenario::Scenario;
//! use aoi_core::policy::age_difference::AgeDifference;
//! use aoi_core::sim::{run_simulation, SimulationConfig};
//!
//! let instance = Scenario::UnicastLineSingle { n: 3, gamma: 1.0 }.build(0).unwrap();
//! let config = SimulationConfig::new(10_000, 7);
//! let run = run_simulation(&config, &instance, &mut AgeDifference, 7).unwrap();
//! assert!(run.metrics.total_cost < 3.0);
//! ```

pub mod action;
pub mod age;
pub mod channel;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod instance;
pub mod policy;
pub mod sim;
pub mod topology;

pub use error::{Error, Result};
pub use instance::{Instance, InstanceSpec, Pair};
pub use topology::NodeId;
