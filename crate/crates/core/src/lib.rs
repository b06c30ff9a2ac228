//! Multi-agent multi-armed bandits where agents stochastically observe
//! their neighbors' actions and rewards.
//!
//! Each agent runs a UCB rule whose exploration bonus is inflated by a
//! sublogarithmic term, observes each neighbor with a personal probability
//! (its *sociability*), and is ranked ahead of time by a performance measure
//! that combines its own sociability with that of its neighbors.
//!
//! * [`model`]: arms, observation network, agent statistics
//! * [`policy`]: the sampling rule
//! * [`sim`]: episode engine and Monte Carlo aggregation
//! * [`analysis`]: regret bounds, performance measure, validators
//! * [`scenario`]: scenario files, presets and experiment output

pub mod analysis;
pub mod error;
pub mod model;
pub mod policy;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use model::{AgentBeliefs, AgentId, ArmId, BanditInstance, ObservationNetwork};
pub use policy::{Inflation, PolicyConfig};
pub use scenario::{load_scenario, run_experiment, ScenarioConfig};
pub use sim::{run_episode, run_monte_carlo, MonteCarloSummary, RegretTrace};
