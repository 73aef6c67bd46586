//! Round resolution on a shared multiple-access channel.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelMode, Feedback, Message};

/// Feedback as perceived by a station. Without collision detection silence
/// and collision both collapse to `Void`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservedFeedback {
    Silence,
    Collision,
    Heard(Message),
    Void,
}

impl ObservedFeedback {
    pub fn heard(&self) -> Option<&Message> {
        match self {
            ObservedFeedback::Heard(m) => Some(m),
            _ => None,
        }
    }
}

pub fn resolve_round(transmissions: &[Message]) -> Result<Feedback> {
    // stations transmit in activation order, which makes duplicates adjacent
    let ordered = transmissions.windows(2).all(|w| w[0].sender < w[1].sender);
    if !ordered {
        let mut senders = HashSet::with_capacity(transmissions.len());
        if let Some(m) = transmissions.iter().find(|m| !senders.insert(m.sender)) {
            return Err(Error::DuplicateSender(m.sender));
        }
    }
    Ok(match transmissions {
        [] => Feedback::Silence,
        [m] => Feedback::Heard(*m),
        _ => Feedback::Collision,
    })
}

pub fn observe(feedback: &Feedback, mode: ChannelMode) -> ObservedFeedback {
    match (feedback, mode.collision_detection) {
        (Feedback::Heard(m), _) => ObservedFeedback::Heard(*m),
        (Feedback::Silence, true) => ObservedFeedback::Silence,
        (Feedback::Collision, true) => ObservedFeedback::Collision,
        (_, false) => ObservedFeedback::Void,
    }
}
