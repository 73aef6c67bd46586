//! Deterministic simulation of broadcasting on ad hoc multiple-access
//! channels under leaky-bucket adversarial injection.
//!
//! Stations are anonymous and start passive; an adversary of type `(rho, b)`
//! activates them by injecting packets. Three deterministic protocols are
//! provided: Counting-Backoff (a virtual stack, needs collision detection),
//! Quadruple-Round (full sensing, rate 3/8) and Queue-Backoff (adaptive, a
//! virtual queue, rate 1/2), plus an acknowledgment-based baseline.
//!
//! ```
//! use macsim::{run, AdversaryType, AlgorithmKind, Rate, RunConfig, StrategySpec};
//!
//! let adversary = AdversaryType::new(Rate::new(1, 2)?, 3)?;
//! let config = RunConfig::new(AlgorithmKind::QueueBackoff, adversary, StrategySpec::QueuePersistent)
//!     .horizon(1_000)
//!     .checked();
//! let out = run(config)?;
//! assert!(out.metrics.max_latency.unwrap() <= 8);
//! # Ok::<(), macsim::Error>(())
//! ```

pub mod adversary;
pub mod algorithms;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod explorer;
pub mod invariants;
pub mod model;
pub mod simulator;

pub use adversary::{BudgetState, InjectionDecision, ScriptEntry, Strategy, StrategySpec, Target};
pub use algorithms::{AlgorithmKind, JoinRule};
pub use bounds::{Bound, BoundReport};
pub use channel::ObservedFeedback;
pub use error::{Error, Result};
pub use model::{
    AdversaryType, ChannelMode, Control, Feedback, Message, PacketId, Rate, RunConfig, StationId,
};
pub use simulator::{compute_metrics, run, Metrics, RoundRecord, RunOutput, Simulation};
