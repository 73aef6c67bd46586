use thiserror::Error;

use crate::invariants::InvariantFailure;
use crate::model::{AdversaryType, StationId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rate: {0}")]
    InvalidRate(String),

    #[error("invalid adversary type: {0}")]
    InvalidAdversary(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("round {round}: adversary requested {requested} packets but only {available} are within budget")]
    BudgetViolation {
        round: u64,
        requested: u64,
        available: u64,
    },

    #[error("schedule exceeds the budget of adversary {adversary} in rounds {start}..={end}")]
    WindowViolation {
        adversary: AdversaryType,
        start: u64,
        end: u64,
    },

    #[error("round {round}: {fresh} fresh stations activated, adversary is {limit}-activating")]
    ActivationLimit { round: u64, fresh: u32, limit: u32 },

    #[error("round {round}: injection targets station {station}, which is not active")]
    InactiveTarget { round: u64, station: StationId },

    #[error("simulation integrity: station {0} transmitted twice in one round")]
    DuplicateSender(StationId),

    #[error("{0}")]
    Invariant(Box<InvariantFailure>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
