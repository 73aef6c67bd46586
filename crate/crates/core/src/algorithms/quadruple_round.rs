//! Quadruple-Round: a non-adaptive full-sensing algorithm. Rounds are grouped
//! into segments of four; a phase verifies one segment by letting the
//! stations activated in it transmit according to a fixed schedule driven by
//! the public feedback.

use serde::{Deserialize, Serialize};

use crate::channel::ObservedFeedback;
use crate::error::{Error, Result};
use crate::model::StationId;

use super::{AlgorithmKind, Protocol, StationEvent, Transmission};

/// Rounds between a segment's first round and the earliest start of its phase.
pub const PHASE_START_DELAY: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseState {
    /// Waiting for the current segment to become old enough.
    Idle,
    IterationRound1,
    IterationRound2,
    RightPairRound3,
    RightPairRound4,
    LeftPairRound3,
    LeftPairRound4,
}

/// A completed phase, in rounds `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub segment: u64,
    pub start: u64,
    pub end: u64,
}

impl PhaseRecord {
    pub fn len(&self) -> u64 {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The schedule state shared by every station. It depends only on the
/// sequence of feedback, so every listener derives the same value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadrupleController {
    /// The round this state governs.
    pub round: u64,
    pub current_segment_index: u64,
    pub phase_state: PhaseState,
    pub phase_start_round: u64,
}

impl Default for QuadrupleController {
    fn default() -> Self {
        Self::new()
    }
}

/// Index of the segment containing `round` (rounds are numbered from 1).
pub fn segment_of(round: u64) -> u64 {
    (round - 1) / 4
}

pub fn segment_first_round(segment: u64) -> u64 {
    4 * segment + 1
}

impl QuadrupleController {
    pub fn new() -> Self {
        QuadrupleController {
            round: 1,
            current_segment_index: 0,
            phase_state: PhaseState::Idle,
            phase_start_round: 0,
        }
    }

    /// Advance past the current round given its feedback. Returns the phase
    /// that ended in this round, if any.
    pub fn step(&mut self, feedback: &ObservedFeedback) -> Result<Option<PhaseRecord>> {
        use ObservedFeedback::*;
        use PhaseState::*;

        let round = self.round;
        let mut ended = None;
        self.phase_state = match (self.phase_state, feedback) {
            (_, Void) => {
                return Err(Error::Config(
                    "quadruple-round requires collision detection".into(),
                ))
            }
            (Idle, _) => Idle,
            (IterationRound1, Silence) => {
                ended = Some(PhaseRecord {
                    segment: self.current_segment_index,
                    start: self.phase_start_round,
                    end: round,
                });
                self.current_segment_index += 1;
                Idle
            }
            (IterationRound1, Heard(_)) => IterationRound1,
            (IterationRound1, Collision) => IterationRound2,
            (IterationRound2, Silence) => RightPairRound3,
            (IterationRound2, Heard(_)) => IterationRound1,
            (IterationRound2, Collision) => LeftPairRound3,
            (RightPairRound3, _) => RightPairRound4,
            (LeftPairRound3, _) => LeftPairRound4,
            (RightPairRound4 | LeftPairRound4, _) => IterationRound1,
        };
        self.round = round + 1;
        if self.phase_state == Idle
            && self.round >= segment_first_round(self.current_segment_index) + PHASE_START_DELAY
        {
            self.phase_state = IterationRound1;
            self.phase_start_round = self.round;
        }
        Ok(ended)
    }

    /// Replays a feedback history from the start of an execution.
    pub fn replay<'a>(feedback: impl IntoIterator<Item = &'a ObservedFeedback>) -> Result<Self> {
        let mut c = QuadrupleController::new();
        for f in feedback {
            c.step(f)?;
        }
        Ok(c)
    }
}

/// Whether a station is scheduled in the round governed by `controller`.
pub fn decide(station: StationId, controller: &QuadrupleController) -> bool {
    let round = station.activation_round;
    if round == 0 || segment_of(round) != controller.current_segment_index {
        return false;
    }
    let offset = (round - 1) % 4;
    match controller.phase_state {
        PhaseState::Idle => false,
        PhaseState::IterationRound1 => true,
        PhaseState::IterationRound2 => offset < 2,
        PhaseState::RightPairRound3 => offset == 2,
        PhaseState::RightPairRound4 => offset == 3,
        PhaseState::LeftPairRound3 => offset == 0,
        PhaseState::LeftPairRound4 => offset == 1,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QuadrupleRound {
    pub controller: QuadrupleController,
}

/// Lengths of completed double phases (pairs of consecutive phases).
pub fn double_phase_lengths(phases: &[PhaseRecord]) -> Vec<u64> {
    phases
        .chunks_exact(2)
        .map(|pair| pair[0].len() + pair[1].len())
        .collect()
}

impl Protocol for QuadrupleRound {
    type State = ();

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::QuadrupleRound
    }

    fn decide(&self, station: StationId, _: &(), _: usize) -> Option<Transmission> {
        decide(station, &self.controller).then_some(Transmission::BARE)
    }

    fn transition(&self, _: &mut (), _: &StationEvent) {}

    fn observe_round(&mut self, observed: &ObservedFeedback) -> Result<Option<PhaseRecord>> {
        self.controller.step(observed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Message, PacketId};

    fn heard() -> ObservedFeedback {
        ObservedFeedback::Heard(Message {
            packet: PacketId {
                injection_round: 1,
                sequence_within_round: 0,
            },
            sender: StationId::new(1),
            control: None,
        })
    }

    fn at(phase_state: PhaseState) -> QuadrupleController {
        QuadrupleController {
            round: 5,
            current_segment_index: 0,
            phase_state,
            phase_start_round: 5,
        }
    }

    #[test]
    fn first_phase_waits_four_rounds() {
        let mut c = QuadrupleController::new();
        for _ in 1..=3 {
            c.step(&ObservedFeedback::Silence).unwrap();
            assert_eq!(c.phase_state, PhaseState::Idle);
        }
        c.step(&ObservedFeedback::Silence).unwrap();
        assert_eq!(c.round, 5);
        assert_eq!(c.phase_state, PhaseState::IterationRound1);
        assert_eq!(c.phase_start_round, 5);
    }

    #[test]
    fn iteration_round_one_branches() {
        let mut c = at(PhaseState::IterationRound1);
        let ended = c.step(&ObservedFeedback::Silence).unwrap();
        assert_eq!(
            ended,
            Some(PhaseRecord {
                segment: 0,
                start: 5,
                end: 5
            })
        );
        // segment 1 cannot start before round 9
        assert_eq!(c.current_segment_index, 1);
        assert_eq!(c.phase_state, PhaseState::Idle);

        let mut c = at(PhaseState::IterationRound1);
        c.step(&heard()).unwrap();
        assert_eq!(c.phase_state, PhaseState::IterationRound1);

        let mut c = at(PhaseState::IterationRound1);
        c.step(&ObservedFeedback::Collision).unwrap();
        assert_eq!(c.phase_state, PhaseState::IterationRound2);
    }

    #[test]
    fn iteration_round_two_branches() {
        let mut c = at(PhaseState::IterationRound2);
        c.step(&ObservedFeedback::Collision).unwrap();
        assert_eq!(c.phase_state, PhaseState::LeftPairRound3);
        c.step(&heard()).unwrap();
        assert_eq!(c.phase_state, PhaseState::LeftPairRound4);
        c.step(&heard()).unwrap();
        assert_eq!(c.phase_state, PhaseState::IterationRound1);

        let mut c = at(PhaseState::IterationRound2);
        c.step(&ObservedFeedback::Silence).unwrap();
        assert_eq!(c.phase_state, PhaseState::RightPairRound3);
        c.step(&heard()).unwrap();
        assert_eq!(c.phase_state, PhaseState::RightPairRound4);

        let mut c = at(PhaseState::IterationRound2);
        c.step(&heard()).unwrap();
        assert_eq!(c.phase_state, PhaseState::IterationRound1);
    }

    #[test]
    fn void_feedback_is_refused() {
        let mut c = at(PhaseState::IterationRound1);
        assert!(matches!(
            c.step(&ObservedFeedback::Void),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn schedule() {
        let c = at(PhaseState::RightPairRound3);
        assert!(decide(StationId::new(3), &c));
        assert!(!decide(StationId::new(4), &c));

        let c = at(PhaseState::IterationRound2);
        assert!(decide(StationId::new(1), &c));
        assert!(decide(StationId::new(2), &c));
        assert!(!decide(StationId::new(3), &c));

        let c = at(PhaseState::IterationRound1);
        assert!(decide(StationId::new(4), &c));
        assert!(!decide(StationId::new(5), &c));

        let c = at(PhaseState::LeftPairRound4);
        assert!(decide(StationId::new(2), &c));
        assert!(!decide(StationId::new(1), &c));
    }
}
