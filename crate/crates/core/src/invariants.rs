//! Global-view invariant checks, evaluated after every round when a run has
//! invariant checking enabled.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    AckPersistent, CountingBackoff, CountingBackoffState, PhaseRecord, PhaseState, Protocol,
    QuadrupleController, QuadrupleRound, QueueBackoff, QueueBackoffState,
};
use crate::channel::observe;
use crate::model::{ChannelMode, Feedback, StationId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantFailure {
    pub round: u64,
    pub invariant: String,
    pub detail: String,
    /// `station: state` lines for the stations involved, at the end of the round.
    pub snapshot: Vec<String>,
}

impl fmt::Display for InvariantFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "round {}: {} violated: {}",
            self.round, self.invariant, self.detail
        )?;
        for line in &self.snapshot {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvariantFailure {}

fn failure<S: fmt::Debug>(
    round: u64,
    invariant: &str,
    detail: String,
    stations: &[StationSnapshot<S>],
) -> InvariantFailure {
    InvariantFailure {
        round,
        invariant: invariant.to_owned(),
        detail,
        snapshot: stations
            .iter()
            .map(|s| format!("{}: {:?} pending={}", s.id, s.state, s.pending))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationSnapshot<S> {
    pub id: StationId,
    pub state: S,
    pub pending: usize,
}

/// One round seen from above.
#[derive(Clone, Debug)]
pub struct RoundAudit<S> {
    pub round: u64,
    pub mode: ChannelMode,
    pub feedback: Feedback,
    pub transmitters: Vec<StationId>,
    /// Stations active at the start of the round, before deciding.
    pub start: Vec<StationSnapshot<S>>,
    /// Stations active at the start of the round that are still active at
    /// its end, after their transitions. Ordered by activation.
    pub survivors: Vec<StationSnapshot<S>>,
    /// Stations activated in this round.
    pub fresh: Vec<StationId>,
    pub phase_ended: Option<PhaseRecord>,
}

/// Algorithm-specific invariants. The auditor carries whatever history a
/// check needs across rounds.
pub trait Audit: Protocol {
    type Auditor: Default + Clone + fmt::Debug + Send;

    fn audit(
        &self,
        auditor: &mut Self::Auditor,
        round: &RoundAudit<Self::State>,
    ) -> Result<(), InvariantFailure>;
}

/// Counting-Backoff's stack: the survivors' counters are distinct, lie in
/// `[1, k]` for `k` stations active at the start of the round, leave at most
/// the value 1 unassigned, and decrease with activation order.
pub fn check_stack(
    round: u64,
    k: usize,
    survivors: &[StationSnapshot<CountingBackoffState>],
) -> Result<(), InvariantFailure> {
    let counters: Vec<i64> = survivors.iter().map(|s| s.state.backoff_counter).collect();
    let name = "stack invariant";
    if let Some(c) = counters.iter().find(|&&c| c < 1 || c > k as i64) {
        return Err(failure(
            round,
            name,
            format!("counter {c} outside [1, {k}]"),
            survivors,
        ));
    }
    if counters.windows(2).any(|w| w[0] <= w[1]) {
        return Err(failure(
            round,
            name,
            "counters do not decrease with activation order".into(),
            survivors,
        ));
    }
    let n = counters.len() as i64;
    let lowest = counters.last().copied().unwrap_or(1);
    let highest = counters.first().copied().unwrap_or(0);
    // strictly decreasing, so contiguity follows from the end points
    if !(lowest == 1 || lowest == 2) || highest - lowest + 1 != n {
        return Err(failure(
            round,
            name,
            format!("counters are not 1..={n} or 2..={}", n + 1),
            survivors,
        ));
    }
    Ok(())
}

/// Queue-Backoff's queue-size and queue-position invariants over the
/// survivors of a round.
pub fn check_queue(
    round: u64,
    survivors: &[StationSnapshot<QueueBackoffState>],
) -> Result<(), InvariantFailure> {
    let active = survivors.len() as i64;
    if let Some(s) = survivors
        .iter()
        .find(|s| s.state.queue_size > 0 && s.state.queue_size != active)
    {
        return Err(failure(
            round,
            "queue-size invariant",
            format!(
                "station {} has queue_size {} with {active} active stations",
                s.id, s.state.queue_size
            ),
            survivors,
        ));
    }
    let positions: Vec<i64> = survivors
        .iter()
        .map(|s| s.state.queue_position)
        .filter(|&p| p > 0)
        .collect();
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(failure(
            round,
            "queue-position invariant",
            "positive positions are not distinct and increasing in activation order".into(),
            survivors,
        ));
    }
    Ok(())
}

/// When some station is at the front of the queue, exactly one queued
/// station transmits.
pub fn check_unique_transmitter(
    round: u64,
    start: &[StationSnapshot<QueueBackoffState>],
    transmitters: &[StationId],
) -> Result<(), InvariantFailure> {
    if !start.iter().any(|s| s.state.queue_position == 1) {
        return Ok(());
    }
    let queued_transmitters = start
        .iter()
        .filter(|s| s.state.queue_position >= 1 && transmitters.contains(&s.id))
        .count();
    if queued_transmitters != 1 {
        return Err(failure(
            round,
            "unique-transmitter property",
            format!("{queued_transmitters} queued stations transmitted"),
            start,
        ));
    }
    Ok(())
}

/// A double phase in which `served` packets were heard lasts at most
/// `2 * served + 2` rounds, and exactly 3 when one packet was heard.
pub fn check_double_phase(
    round: u64,
    first: &PhaseRecord,
    second: &PhaseRecord,
    served: u64,
) -> Result<(), InvariantFailure> {
    let len = first.len() + second.len();
    let ok = if served == 1 {
        len == 3
    } else {
        len <= 2 * served + 2
    };
    if ok {
        return Ok(());
    }
    Err(InvariantFailure {
        round,
        invariant: "double-phase bound".into(),
        detail: format!(
            "segments {}-{} served {served} packets in {len} rounds",
            first.segment, second.segment
        ),
        snapshot: vec![format!("{first:?}"), format!("{second:?}")],
    })
}

impl Audit for CountingBackoff {
    type Auditor = ();

    fn audit(
        &self,
        _: &mut (),
        r: &RoundAudit<CountingBackoffState>,
    ) -> Result<(), InvariantFailure> {
        check_stack(r.round, r.start.len(), &r.survivors)
    }
}

impl Audit for QueueBackoff {
    type Auditor = ();

    fn audit(&self, _: &mut (), r: &RoundAudit<QueueBackoffState>) -> Result<(), InvariantFailure> {
        check_unique_transmitter(r.round, &r.start, &r.transmitters)?;
        check_queue(r.round, &r.survivors)
    }
}

#[derive(Clone, Debug, Default)]
pub struct QuadrupleAuditor {
    /// Controller recomputed from the recorded feedback alone.
    shadow: QuadrupleController,
    heard_in_phase: u64,
    open_pair: Option<(PhaseRecord, u64)>,
}

impl Audit for QuadrupleRound {
    type Auditor = QuadrupleAuditor;

    fn audit(&self, a: &mut QuadrupleAuditor, r: &RoundAudit<()>) -> Result<(), InvariantFailure> {
        if a.shadow.phase_state != PhaseState::Idle && r.feedback.heard().is_some() {
            a.heard_in_phase += 1;
        }
        let ended = a
            .shadow
            .step(&observe(&r.feedback, r.mode))
            .map_err(|e| InvariantFailure {
                round: r.round,
                invariant: "full-sensing symmetry".into(),
                detail: e.to_string(),
                snapshot: Vec::new(),
            })?;
        if a.shadow != self.controller || ended != r.phase_ended {
            return Err(InvariantFailure {
                round: r.round,
                invariant: "full-sensing symmetry".into(),
                detail: "controller differs from the one replayed from feedback".into(),
                snapshot: vec![format!("{:?}", self.controller), format!("{:?}", a.shadow)],
            });
        }
        if let Some(phase) = ended {
            let served = std::mem::take(&mut a.heard_in_phase);
            if phase.segment % 2 == 0 {
                a.open_pair = Some((phase, served));
            } else if let Some((first, first_served)) = a.open_pair.take() {
                check_double_phase(r.round, &first, &phase, first_served + served)?;
            }
        }
        Ok(())
    }
}

impl Audit for AckPersistent {
    type Auditor = ();

    fn audit(
        &self,
        _: &mut (),
        _: &RoundAudit<crate::algorithms::AckState>,
    ) -> Result<(), InvariantFailure> {
        Ok(())
    }
}
