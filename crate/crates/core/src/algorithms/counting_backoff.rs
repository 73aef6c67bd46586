//! Counting-Backoff: active stations keep a virtual stack. A collision pushes
//! the newest station on top; the top station holds the channel while it has
//! packets.

use crate::channel::ObservedFeedback;
use crate::model::StationId;

use super::{AlgorithmKind, Protocol, StationEvent, Transmission};

/// Zero at activation and when passive; otherwise the position on the stack.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CountingBackoffState {
    pub backoff_counter: i64,
}

pub fn decide(state: &CountingBackoffState) -> bool {
    state.backoff_counter <= 1
}

pub fn transition(
    state: &mut CountingBackoffState,
    observed: &ObservedFeedback,
    own_heard: bool,
    still_active: bool,
) {
    match observed {
        ObservedFeedback::Collision => state.backoff_counter += 1,
        ObservedFeedback::Silence => state.backoff_counter -= 1,
        ObservedFeedback::Heard(_) if own_heard => {
            state.backoff_counter = if still_active { 1 } else { 0 };
        }
        // a foreign message leaves the stack untouched
        ObservedFeedback::Heard(_) => {}
        ObservedFeedback::Void => {
            debug_assert!(false, "counting-backoff runs only with collision detection")
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CountingBackoff;

impl Protocol for CountingBackoff {
    type State = CountingBackoffState;

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::CountingBackoff
    }

    fn decide(&self, _: StationId, state: &Self::State, _: usize) -> Option<Transmission> {
        decide(state).then_some(Transmission::BARE)
    }

    fn transition(&self, state: &mut Self::State, event: &StationEvent) {
        transition(state, &event.observed, event.own_heard, event.still_active);
    }
}
