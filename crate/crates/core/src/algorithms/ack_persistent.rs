//! A deterministic acknowledgment-based protocol: transmit in every round
//! while active, forget everything whenever an own packet is heard.

use crate::channel::ObservedFeedback;
use crate::model::StationId;

use super::{AlgorithmKind, Protocol, StationEvent, Transmission};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AckState {
    /// Failed attempts since activation or the last heard packet.
    pub attempts: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AckPersistent;

impl Protocol for AckPersistent {
    type State = AckState;

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::AckPersistent
    }

    fn decide(&self, _: StationId, _: &AckState, _: usize) -> Option<Transmission> {
        Some(Transmission::BARE)
    }

    fn transition(&self, state: &mut AckState, event: &StationEvent) {
        if event.own_heard {
            *state = AckState::default();
        } else if event.transmitted && !matches!(event.observed, ObservedFeedback::Heard(_)) {
            state.attempts += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Message, PacketId};

    #[test]
    fn resets_on_own_heard() {
        let mut s = AckState { attempts: 7 };
        let own = ObservedFeedback::Heard(Message {
            packet: PacketId {
                injection_round: 1,
                sequence_within_round: 0,
            },
            sender: StationId::new(1),
            control: None,
        });
        AckPersistent.transition(
            &mut s,
            &StationEvent {
                observed: own,
                transmitted: true,
                own_heard: true,
                injected: 0,
                still_active: true,
            },
        );
        assert_eq!(s, AckState::default());
    }

    #[test]
    fn counts_failed_attempts() {
        let mut s = AckState::default();
        let ev = StationEvent {
            observed: ObservedFeedback::Collision,
            transmitted: true,
            own_heard: false,
            injected: 0,
            still_active: true,
        };
        AckPersistent.transition(&mut s, &ev);
        AckPersistent.transition(&mut s, &ev);
        assert_eq!(s.attempts, 2);
        assert!(AckPersistent.decide(StationId::new(1), &s, 1).is_some());
    }
}
