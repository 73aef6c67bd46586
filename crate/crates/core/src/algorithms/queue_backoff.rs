//! Queue-Backoff: an adaptive algorithm keeping a virtual first-in-first-out
//! queue of stations. Messages carry the sender's `queue_size` and an over
//! bit on the sender's last packet.

use crate::channel::ObservedFeedback;
use crate::model::{Control, StationId};

use super::{AlgorithmKind, JoinRule, Protocol, StationEvent, Transmission};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QueueBackoffState {
    pub queue_size: i64,
    pub queue_position: i64,
    pub collision_count: i64,
}

pub fn decide(state: &QueueBackoffState) -> bool {
    (0..=1).contains(&state.queue_position)
}

pub fn control(state: &QueueBackoffState, pending: usize) -> Control {
    Control {
        queue_size: state.queue_size,
        over: pending == 1,
    }
}

/// One state transition of an active station. Void (no collision
/// detection) takes the collision branch.
pub fn transition(
    state: &mut QueueBackoffState,
    observed: &ObservedFeedback,
    own_heard: bool,
    still_active: bool,
    rule: JoinRule,
) {
    match observed {
        ObservedFeedback::Collision | ObservedFeedback::Void => {
            if state.queue_size > 0 {
                state.queue_size += 1;
            } else {
                state.queue_position = -1;
                state.collision_count += 1;
            }
        }
        ObservedFeedback::Heard(message) if !own_heard => {
            let Control {
                queue_size: k,
                over,
            } = message.control.unwrap_or(Control {
                queue_size: 0,
                over: false,
            });
            if k > 0 && state.queue_position == -1 {
                state.queue_size = k;
                match rule {
                    JoinRule::Figure => state.queue_position = k - state.collision_count,
                    JoinRule::Prose => state.queue_position = k - (state.collision_count - 1),
                    JoinRule::Reconciled => {
                        state.queue_position = k - (state.collision_count - 1);
                        if over {
                            state.queue_size -= 1;
                            state.queue_position -= 1;
                        }
                    }
                }
            } else if over {
                state.queue_size -= 1;
                state.queue_position -= 1;
            }
        }
        ObservedFeedback::Heard(_) => {
            if state.queue_size == 0 && still_active {
                state.queue_size = 1;
                state.queue_position = 1;
            }
        }
        ObservedFeedback::Silence => {}
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct QueueBackoff {
    pub rule: JoinRule,
}

impl QueueBackoff {
    pub fn new(rule: JoinRule) -> Self {
        QueueBackoff { rule }
    }
}

impl Protocol for QueueBackoff {
    type State = QueueBackoffState;

    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::QueueBackoff
    }

    fn decide(&self, _: StationId, state: &Self::State, pending: usize) -> Option<Transmission> {
        decide(state).then(|| Transmission {
            control: Some(control(state, pending)),
        })
    }

    fn transition(&self, state: &mut Self::State, event: &StationEvent) {
        transition(
            state,
            &event.observed,
            event.own_heard,
            event.still_active,
            self.rule,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Message, PacketId};

    fn st(queue_size: i64, queue_position: i64, collision_count: i64) -> QueueBackoffState {
        QueueBackoffState {
            queue_size,
            queue_position,
            collision_count,
        }
    }

    fn foreign(k: i64, over: bool) -> ObservedFeedback {
        ObservedFeedback::Heard(Message {
            packet: PacketId {
                injection_round: 1,
                sequence_within_round: 0,
            },
            sender: StationId::new(1),
            control: Some(Control {
                queue_size: k,
                over,
            }),
        })
    }

    #[test]
    fn decide_window() {
        assert!(decide(&st(0, 0, 0)));
        assert!(decide(&st(3, 1, 0)));
        assert!(!decide(&st(3, -1, 1)));
        assert!(!decide(&st(3, 2, 0)));
    }

    #[test]
    fn message_control_fields() {
        let q = QueueBackoff::default();
        let t = q.decide(StationId::new(2), &st(4, 1, 0), 1).unwrap();
        assert_eq!(
            t.control,
            Some(Control {
                queue_size: 4,
                over: true
            })
        );
        let t = q.decide(StationId::new(2), &st(0, 0, 0), 3).unwrap();
        assert_eq!(
            t.control,
            Some(Control {
                queue_size: 0,
                over: false
            })
        );
    }

    #[test]
    fn collision_branch() {
        let mut s = st(3, 2, 0);
        transition(
            &mut s,
            &ObservedFeedback::Collision,
            false,
            true,
            JoinRule::Figure,
        );
        assert_eq!(s, st(4, 2, 0));

        let mut s = st(0, 0, 1);
        transition(
            &mut s,
            &ObservedFeedback::Collision,
            false,
            true,
            JoinRule::Figure,
        );
        assert_eq!(s, st(0, -1, 2));

        // void is read as a collision by active stations
        let mut s = st(0, 0, 0);
        transition(
            &mut s,
            &ObservedFeedback::Void,
            false,
            true,
            JoinRule::Figure,
        );
        assert_eq!(s, st(0, -1, 1));
    }

    #[test]
    fn join_rules() {
        let mut s = st(0, -1, 2);
        transition(&mut s, &foreign(5, false), false, true, JoinRule::Figure);
        assert_eq!(s, st(5, 3, 2));

        let mut s = st(0, -1, 2);
        transition(&mut s, &foreign(5, false), false, true, JoinRule::Prose);
        assert_eq!(s, st(5, 4, 2));

        let mut s = st(0, -1, 2);
        transition(
            &mut s,
            &foreign(5, false),
            false,
            true,
            JoinRule::Reconciled,
        );
        assert_eq!(s, st(5, 4, 2));

        // with the over bit the join branch still wins for the literal rules
        let mut s = st(0, -1, 2);
        transition(&mut s, &foreign(5, true), false, true, JoinRule::Figure);
        assert_eq!(s, st(5, 3, 2));

        let mut s = st(0, -1, 2);
        transition(&mut s, &foreign(5, true), false, true, JoinRule::Reconciled);
        assert_eq!(s, st(4, 3, 2));
    }

    #[test]
    fn over_bit_and_own_message() {
        let mut s = st(4, 3, 0);
        transition(&mut s, &foreign(4, true), false, true, JoinRule::Figure);
        assert_eq!(s, st(3, 2, 0));

        let mut s = st(4, 3, 0);
        transition(&mut s, &foreign(4, false), false, true, JoinRule::Figure);
        assert_eq!(s, st(4, 3, 0));

        let mut s = st(0, 0, 0);
        transition(&mut s, &foreign(0, false), true, true, JoinRule::Figure);
        assert_eq!(s, st(1, 1, 0));

        let mut s = st(0, 0, 0);
        transition(&mut s, &foreign(0, true), true, false, JoinRule::Figure);
        assert_eq!(s, st(0, 0, 0));

        // front station keeps its place after its own message
        let mut s = st(3, 1, 0);
        transition(&mut s, &foreign(3, false), true, true, JoinRule::Figure);
        assert_eq!(s, st(3, 1, 0));
    }
}
