//! The lockstep execution engine.
//!
//! Each round: active stations decide, the channel resolves the
//! transmissions, the adversary injects, and every station that was active at
//! the start of the round makes its transition. Heard packets leave their
//! queue before injection; stations left without packets retire for good.

use std::collections::{BTreeMap, VecDeque};

use crate::adversary::{BudgetState, InjectionDecision, Strategy, Target, WorldView};
use crate::algorithms::{PhaseRecord, StationEvent};
use crate::channel::{observe, resolve_round, ObservedFeedback};
use crate::error::{Error, Result};
use crate::invariants::{Audit, InvariantFailure, RoundAudit, StationSnapshot};
use crate::model::{AdversaryType, ChannelMode, Feedback, Message, PacketId, StationId};

pub mod engine;
pub mod metrics;
pub mod trace;

pub use engine::{run, Engine, RunOutput, Simulation};
pub use metrics::{compute_metrics, Metrics, PacketRecord};
pub use trace::{
    feedback_string, injection_counts, to_script, write_csv, InjectionRecord, RoundRecord,
};

#[derive(Clone, Debug)]
pub struct Station<S> {
    pub id: StationId,
    pub state: S,
    pub queue: VecDeque<PacketId>,
}

#[derive(Clone, Debug)]
struct RoundContext {
    round: u64,
    feedback: Feedback,
    observed: ObservedFeedback,
    transmitters: Vec<StationId>,
}

#[derive(Clone, Debug)]
pub struct World<P: Audit> {
    pub protocol: P,
    adversary: AdversaryType,
    mode: ChannelMode,
    round: u64,
    stations: BTreeMap<StationId, Station<P::State>>,
    budget: BudgetState,
    trace: Vec<RoundRecord>,
    phases: Vec<PhaseRecord>,
    queued: u64,
    current: Option<RoundContext>,
    auditor: Option<P::Auditor>,
}

impl<P: Audit> World<P> {
    pub fn new(protocol: P, adversary: AdversaryType, mode: ChannelMode, checked: bool) -> Self {
        World {
            protocol,
            adversary,
            mode,
            round: 1,
            stations: BTreeMap::new(),
            budget: BudgetState::new(&adversary),
            trace: Vec::new(),
            phases: Vec::new(),
            queued: 0,
            current: None,
            auditor: checked.then(P::Auditor::default),
        }
    }

    /// The next round to execute.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn trace(&self) -> &[RoundRecord] {
        &self.trace
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        &self.phases
    }

    pub fn stations(&self) -> impl Iterator<Item = &Station<P::State>> {
        self.stations.values()
    }

    pub fn budget(&self) -> &BudgetState {
        &self.budget
    }

    pub fn into_parts(self) -> (Vec<RoundRecord>, Vec<PhaseRecord>) {
        (self.trace, self.phases)
    }

    /// Packets pending across all stations.
    pub fn queued(&self) -> u64 {
        self.queued
    }

    /// A copy of the current state with an empty history, for trying out
    /// continuations without copying the trace.
    pub fn fork(&self) -> Self {
        World {
            protocol: self.protocol.clone(),
            adversary: self.adversary,
            mode: self.mode,
            round: self.round,
            stations: self.stations.clone(),
            budget: self.budget.clone(),
            trace: Vec::new(),
            phases: Vec::new(),
            queued: self.queued,
            current: None,
            auditor: self.auditor.clone(),
        }
    }

    /// Continues this world with the state of a fork taken from it,
    /// appending the fork's history.
    pub fn adopt(&mut self, fork: World<P>) {
        let mut trace = std::mem::take(&mut self.trace);
        let mut phases = std::mem::take(&mut self.phases);
        trace.extend(fork.trace.iter().cloned());
        phases.extend(fork.phases.iter().copied());
        *self = World {
            trace,
            phases,
            ..fork
        };
    }

    /// Whether some station transmits in the current round. Injections made
    /// during the round cannot change this.
    pub fn has_scheduled_transmitter(&self) -> bool {
        self.stations.values().any(|s| {
            !s.queue.is_empty()
                && self
                    .protocol
                    .decide(s.id, &s.state, s.queue.len())
                    .is_some()
        })
    }

    fn snapshot(&self) -> Vec<StationSnapshot<P::State>> {
        self.stations
            .values()
            .map(|s| StationSnapshot {
                id: s.id,
                state: s.state.clone(),
                pending: s.queue.len(),
            })
            .collect()
    }

    pub fn step(&mut self, strategy: &mut dyn Strategy) -> Result<()> {
        let round = self.round;
        let start = self.auditor.as_ref().map(|_| self.snapshot());

        // (i) transmit
        let mut messages = Vec::new();
        for s in self.stations.values() {
            let Some(&packet) = s.queue.front() else {
                continue;
            };
            if let Some(t) = self.protocol.decide(s.id, &s.state, s.queue.len()) {
                messages.push(Message {
                    packet,
                    sender: s.id,
                    control: t.control,
                });
            }
        }
        let transmitters: Vec<StationId> = messages.iter().map(|m| m.sender).collect();

        // (ii) feedback
        let feedback = resolve_round(&messages)?;
        let observed = observe(&feedback, self.mode);
        let heard = feedback.heard().copied();
        if let Some(m) = heard {
            let sender = self.stations.get_mut(&m.sender).expect("sender is active");
            sender.queue.pop_front();
            self.queued -= 1;
        }

        // (iii) injection
        self.current = Some(RoundContext {
            round,
            feedback,
            observed,
            transmitters,
        });
        let decisions = strategy.next(&*self, &self.budget);
        let injections = self.inject(round, &decisions);
        let transmitters = self.current.take().expect("set above").transmitters;
        let injections = injections?;

        // (iv) transition; stations and transmitters are both in activation
        // order, so one pass matches them up
        let mut retired = Vec::new();
        let mut next_transmitter = transmitters.iter().peekable();
        for s in self.stations.values_mut() {
            let transmitted = next_transmitter.next_if_eq(&&s.id).is_some();
            if s.id.activation_round == round {
                continue;
            }
            let event = StationEvent {
                observed,
                transmitted,
                own_heard: heard.is_some_and(|m| m.sender == s.id),
                injected: injections
                    .iter()
                    .filter(|i| i.station == s.id)
                    .map(|i| i.packets)
                    .sum(),
                still_active: !s.queue.is_empty(),
            };
            self.protocol.transition(&mut s.state, &event);
            if s.queue.is_empty() {
                retired.push(s.id);
            }
        }
        for id in retired {
            self.stations.remove(&id);
        }
        let phase_ended = self.protocol.observe_round(&observed)?;
        self.phases.extend(phase_ended);
        self.budget.advance();

        let audited_transmitters = start.as_ref().map(|_| transmitters.clone());
        self.trace.push(RoundRecord {
            round,
            transmitters,
            feedback,
            injections: injections.clone(),
            heard_packet: heard.map(|m| m.packet),
            queued: self.queued,
        });

        if let (Some(start), Some(transmitters)) = (start, audited_transmitters) {
            self.audit(
                round,
                feedback,
                transmitters,
                start,
                &injections,
                phase_ended,
                &messages,
            )?;
        }
        self.round += 1;
        Ok(())
    }

    fn inject(
        &mut self,
        round: u64,
        decisions: &[InjectionDecision],
    ) -> Result<Vec<InjectionRecord>> {
        let total: u64 = decisions.iter().map(|d| u64::from(d.packets)).sum();
        let fresh = decisions
            .iter()
            .filter(|d| d.target == Target::Fresh)
            .count() as u32;
        if fresh > self.adversary.k_activating {
            return Err(Error::ActivationLimit {
                round,
                fresh,
                limit: self.adversary.k_activating,
            });
        }
        for d in decisions {
            if let Target::Station(id) = d.target {
                let pending = self.stations.get(&id).map_or(0, |s| s.queue.len());
                if pending == 0 || id.activation_round == round {
                    return Err(Error::InactiveTarget { round, station: id });
                }
            }
        }
        self.budget.spend(total)?;

        let mut records = Vec::with_capacity(decisions.len());
        let mut slot = 0;
        let mut sequence = 0;
        for d in decisions.iter().filter(|d| d.packets > 0) {
            let (id, is_fresh) = match d.target {
                Target::Fresh => {
                    let id = StationId {
                        activation_round: round,
                        slot,
                    };
                    slot += 1;
                    self.stations.insert(
                        id,
                        Station {
                            id,
                            state: P::State::default(),
                            queue: VecDeque::new(),
                        },
                    );
                    (id, true)
                }
                Target::Station(id) => (id, false),
            };
            let station = self.stations.get_mut(&id).expect("target exists");
            for _ in 0..d.packets {
                station.queue.push_back(PacketId {
                    injection_round: round,
                    sequence_within_round: sequence,
                });
                sequence += 1;
            }
            self.queued += u64::from(d.packets);
            records.push(InjectionRecord {
                station: id,
                packets: d.packets,
                fresh: is_fresh,
            });
        }
        Ok(records)
    }

    #[allow(clippy::too_many_arguments)]
    fn audit(
        &mut self,
        round: u64,
        feedback: Feedback,
        transmitters: Vec<StationId>,
        start: Vec<StationSnapshot<P::State>>,
        injections: &[InjectionRecord],
        phase_ended: Option<PhaseRecord>,
        messages: &[Message],
    ) -> Result<()> {
        let fail = |detail: String| {
            Error::Invariant(Box::new(InvariantFailure {
                round,
                invariant: "message and conservation checks".into(),
                detail,
                snapshot: Vec::new(),
            }))
        };
        if !self.protocol.kind().is_adaptive() && messages.iter().any(|m| m.control.is_some()) {
            return Err(fail("non-adaptive message carries control fields".into()));
        }
        let pending: u64 = self.stations.values().map(|s| s.queue.len() as u64).sum();
        if pending != self.queued || self.stations.values().any(|s| s.queue.is_empty()) {
            return Err(fail(format!(
                "{pending} packets pending, {} accounted, or an empty station is still active",
                self.queued
            )));
        }
        // the protocol invariants assume at most one activation per round
        if self.adversary.k_activating > 1 {
            return Ok(());
        }
        let survivors = self
            .snapshot()
            .into_iter()
            .filter(|s| s.id.activation_round < round)
            .collect();
        let audit = RoundAudit {
            round,
            mode: self.mode,
            feedback,
            transmitters,
            start,
            survivors,
            fresh: injections
                .iter()
                .filter(|i| i.fresh)
                .map(|i| i.station)
                .collect(),
            phase_ended,
        };
        let auditor = self.auditor.as_mut().expect("checks enabled");
        self.protocol
            .audit(auditor, &audit)
            .map_err(|f| Error::Invariant(Box::new(f)))
    }
}

impl<P: Audit> WorldView for World<P> {
    fn round(&self) -> u64 {
        self.round
    }

    fn adversary(&self) -> &AdversaryType {
        &self.adversary
    }

    fn feedback(&self) -> &Feedback {
        &self
            .current
            .as_ref()
            .expect("called during injection")
            .feedback
    }

    fn stations(&self) -> Vec<(StationId, usize)> {
        self.stations
            .values()
            .filter(|s| !s.queue.is_empty())
            .map(|s| (s.id, s.queue.len()))
            .collect()
    }

    fn queued(&self) -> u64 {
        self.queued
    }

    fn predicted_transmitters(&self) -> Vec<StationId> {
        let ctx = self.current.as_ref().expect("called during injection");
        let mut protocol = self.protocol.clone();
        if protocol.observe_round(&ctx.observed).is_err() {
            return Vec::new();
        }
        let own = ctx.feedback.heard().map(|m| m.sender);
        self.stations
            .values()
            .filter(|s| !s.queue.is_empty())
            .filter_map(|s| {
                let mut state = s.state.clone();
                if s.id.activation_round < ctx.round {
                    let event = StationEvent {
                        observed: ctx.observed,
                        transmitted: ctx.transmitters.binary_search(&s.id).is_ok(),
                        own_heard: own == Some(s.id),
                        injected: 0,
                        still_active: true,
                    };
                    self.protocol.transition(&mut state, &event);
                }
                protocol.decide(s.id, &state, s.queue.len()).map(|_| s.id)
            })
            .collect()
    }
}
