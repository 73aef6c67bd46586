//! The leaky-bucket adversary: budget enforcement and injection strategies.
//!
//! Strategies are omniscient: they read the whole simulator state through
//! [`WorldView`] after the round's feedback is known and before the state
//! transitions run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AdversaryType, Feedback, Rate, StationId};

pub mod budget;
pub mod script;
pub mod strategies;

pub use budget::{first_violation, replay_through_bucket, validate_trace, BudgetState};
pub use script::{load_script, validate_script, ScriptEntry, ScriptTarget};
pub use strategies::{
    quadruple_worst_script, Bernoulli, NoInjection, QueuePersistent, RandomValid, Saturating,
    Scripted, StackPersistent,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Fresh,
    Station(StationId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InjectionDecision {
    pub target: Target,
    pub packets: u32,
}

impl InjectionDecision {
    pub fn fresh(packets: u32) -> Self {
        InjectionDecision {
            target: Target::Fresh,
            packets,
        }
    }

    pub fn into_station(station: StationId, packets: u32) -> Self {
        InjectionDecision {
            target: Target::Station(station),
            packets,
        }
    }
}

/// Read access to the simulator in the injection step of a round.
pub trait WorldView {
    /// The round being executed.
    fn round(&self) -> u64;

    fn adversary(&self) -> &AdversaryType;

    /// Feedback of the current round.
    fn feedback(&self) -> &Feedback;

    /// Stations that may receive packets this round with their pending packet
    /// counts, after the heard packet (if any) has been removed. A station
    /// whose last packet was just heard is passive and is left out.
    fn stations(&self) -> Vec<(StationId, usize)>;

    /// Packets pending across all stations.
    fn queued(&self) -> u64;

    /// Stations that will transmit next round if no packets are injected
    /// into already active stations in this one.
    fn predicted_transmitters(&self) -> Vec<StationId>;
}

pub trait Strategy: Send {
    fn next(&mut self, view: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision>;
}

/// Serializable strategy selection.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum StrategySpec {
    #[default]
    None,
    Saturating,
    StackPersistent,
    QueuePersistent,
    Scripted {
        script: Vec<ScriptEntry>,
    },
    Bernoulli {
        #[serde(default)]
        probability: Option<Rate>,
    },
    /// Random budget-valid schedules mixing fresh activations with
    /// injections into active stations; used for fuzzing.
    Random,
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::None => "none",
            StrategySpec::Saturating => "saturating",
            StrategySpec::StackPersistent => "stack-persistent",
            StrategySpec::QueuePersistent => "queue-persistent",
            StrategySpec::Scripted { .. } => "scripted",
            StrategySpec::Bernoulli { .. } => "bernoulli",
            StrategySpec::Random => "random",
        }
    }

    pub fn validate(&self, t: &AdversaryType) -> Result<()> {
        match self {
            StrategySpec::Scripted { script } => validate_script(script, t),
            StrategySpec::Bernoulli {
                probability: Some(p),
            } if *p > Rate::ONE => Err(Error::Config(format!(
                "bernoulli probability {p} exceeds 1"
            ))),
            _ => Ok(()),
        }
    }

    pub fn build(&self, t: &AdversaryType, seed: u64) -> Box<dyn Strategy> {
        match self {
            StrategySpec::None => Box::new(NoInjection),
            StrategySpec::Saturating => Box::new(Saturating),
            StrategySpec::StackPersistent => Box::new(StackPersistent),
            StrategySpec::QueuePersistent => Box::new(QueuePersistent),
            StrategySpec::Scripted { script } => Box::new(Scripted::new(script)),
            StrategySpec::Bernoulli { probability } => {
                Box::new(Bernoulli::new(probability.unwrap_or(t.rho), seed))
            }
            StrategySpec::Random => Box::new(RandomValid::new(t.k_activating, seed)),
        }
    }
}
