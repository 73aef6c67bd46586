//! Station state machines behind a common per-round protocol contract.
//!
//! Every round runs in the same order for every station: decide whether to
//! transmit, receive the channel feedback, have packets injected, and make
//! the state transition. The simulator owns the packet queues; protocols
//! only see how many packets are pending, and a station with an empty queue
//! is never asked to transmit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ObservedFeedback;
use crate::error::{Error, Result};
use crate::model::{Control, StationId};

pub mod ack_persistent;
pub mod counting_backoff;
pub mod quadruple_round;
pub mod queue_backoff;

pub use ack_persistent::{AckPersistent, AckState};
pub use counting_backoff::{CountingBackoff, CountingBackoffState};
pub use quadruple_round::{PhaseRecord, PhaseState, QuadrupleController, QuadrupleRound};
pub use queue_backoff::{QueueBackoff, QueueBackoffState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    CountingBackoff,
    QueueBackoff,
    QuadrupleRound,
    AckPersistent,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::CountingBackoff,
        AlgorithmKind::QueueBackoff,
        AlgorithmKind::QuadrupleRound,
        AlgorithmKind::AckPersistent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::CountingBackoff => "counting-backoff",
            AlgorithmKind::QueueBackoff => "queue-backoff",
            AlgorithmKind::QuadrupleRound => "quadruple-round",
            AlgorithmKind::AckPersistent => "ack-persistent",
        }
    }

    /// Counting-Backoff tells silence from collision; Quadruple-Round's
    /// phase schedule branches on it too.
    pub fn requires_collision_detection(&self) -> bool {
        matches!(
            self,
            AlgorithmKind::CountingBackoff | AlgorithmKind::QuadrupleRound
        )
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, AlgorithmKind::QueueBackoff)
    }

    pub fn is_full_sensing(&self) -> bool {
        matches!(self, AlgorithmKind::QuadrupleRound)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// How a Queue-Backoff station waiting at position -1 joins the queue when
/// it hears a foreign message carrying `K > 0`.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum JoinRule {
    /// `position <- K - collision_count`; the over bit of the same message
    /// is not applied.
    Figure,
    /// `position <- K - (collision_count - 1)`; the over bit of the same
    /// message is not applied.
    Prose,
    /// `position <- K - (collision_count - 1)`, then the over bit of the
    /// same message is applied like for any other listener.
    #[default]
    Reconciled,
}

/// A decision to transmit the packet at the head of the station's queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub control: Option<Control>,
}

impl Transmission {
    pub const BARE: Transmission = Transmission { control: None };
}

/// Everything a station experiences in one round, handed to `transition`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StationEvent {
    pub observed: ObservedFeedback,
    pub transmitted: bool,
    /// The heard message was this station's own.
    pub own_heard: bool,
    pub injected: u32,
    /// Packets remain after dequeuing a heard packet and enqueuing injections.
    pub still_active: bool,
}

pub trait Protocol: Clone + fmt::Debug {
    type State: Clone + Default + fmt::Debug + PartialEq;

    fn kind(&self) -> AlgorithmKind;

    /// Called only for stations with at least one pending packet.
    fn decide(
        &self,
        station: StationId,
        state: &Self::State,
        pending: usize,
    ) -> Option<Transmission>;

    /// Called for stations that were active at the start of the round.
    fn transition(&self, state: &mut Self::State, event: &StationEvent);

    /// Full-sensing hook, run once per round with the public feedback.
    /// Returns the phase that ended in this round, if the algorithm has any.
    fn observe_round(&mut self, _observed: &ObservedFeedback) -> Result<Option<PhaseRecord>> {
        Ok(None)
    }
}
