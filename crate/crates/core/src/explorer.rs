//! Runnable witnesses of the impossibility results: executions in which
//! packets are never heard or the backlog grows without bound.

use num_rational::Ratio;
use serde::Serialize;
use serde_json::json;

use crate::adversary::script::minimal_b;
use crate::adversary::{
    BudgetState, InjectionDecision, ScriptEntry, Scripted, Strategy, StrategySpec, WorldView,
};
use crate::algorithms::quadruple_round::double_phase_lengths;
use crate::algorithms::{
    AckPersistent, AlgorithmKind, CountingBackoff, QuadrupleRound, QueueBackoff,
};
use crate::error::{Error, Result};
use crate::invariants::Audit;
use crate::model::{AdversaryType, Feedback, Rate, RunConfig};
use crate::simulator::{compute_metrics, run, RoundRecord, RunOutput, Simulation, World};

/// The JSON verdict a demo prints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub demo: String,
    pub parameters: serde_json::Value,
    pub unheard: u64,
    pub void_rounds: u64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Demo {
    pub verdict: Verdict,
    pub trace: Vec<RoundRecord>,
}

fn verdict(demo: &str, parameters: serde_json::Value, out: &RunOutput, pass: bool) -> Verdict {
    Verdict {
        demo: demo.into(),
        parameters,
        unheard: out.metrics.unheard_count,
        void_rounds: out.metrics.void_rounds(),
        pass,
    }
}

/// Two stations activated in round 1 with one packet each, nothing else.
/// Anonymous deterministic stations in the same state act alike, so every
/// attempt collides.
pub fn demo_two_activating(algorithm: AlgorithmKind, horizon: u64) -> Result<Demo> {
    let t = AdversaryType::with_activation(Rate::new(1, 2)?, 2, 2)?;
    let script = vec![ScriptEntry::fresh(1, 1), ScriptEntry::fresh(1, 1)];
    let config = RunConfig::new(algorithm, t, StrategySpec::Scripted { script })
        .horizon(horizon)
        .checked();
    let out = run(config)?;
    let twins_agree = out.trace.iter().all(|r| r.transmitters.len() != 1);
    let pass = out.metrics.unheard_count == 2 && twins_agree;
    let params = json!({ "algorithm": algorithm, "horizon": horizon, "adversary": t.to_string() });
    Ok(Demo {
        verdict: verdict("two-activating", params, &out, pass),
        trace: out.trace,
    })
}

/// Two packets into a fresh station in round 1 and one into another in
/// round 2, against the acknowledgment-based protocol. Needs
/// `2 rho + b >= 3`.
pub fn demo_ack_unfair(rho: Rate, b: u32, horizon: u64) -> Result<Demo> {
    let t = AdversaryType::new(rho, b)?;
    if rho.times(2) + Ratio::from_integer(i64::from(b)) < Ratio::from_integer(3) {
        return Err(Error::Config(format!(
            "the construction needs 2 rho + b >= 3, got rho = {rho}, b = {b}"
        )));
    }
    let script = vec![ScriptEntry::fresh(1, 2), ScriptEntry::fresh(2, 1)];
    let config = RunConfig::new(
        AlgorithmKind::AckPersistent,
        t,
        StrategySpec::Scripted { script },
    )
    .horizon(horizon)
    .checked();
    let out = run(config)?;
    let first = out.metrics.per_packet.first().and_then(|p| p.heard_round);
    let pass = out.metrics.unheard_count == 2 && first == Some(2);
    let params = json!({ "rho": rho.to_string(), "b": b, "horizon": horizon });
    Ok(Demo {
        verdict: verdict("ack-unfair", params, &out, pass),
        trace: out.trace,
    })
}

/// The schedule starving the bottom of Counting-Backoff's stack at rate
/// 1/3: `b - 1` stations in the first rounds (two packets in the first),
/// then one station every third round.
pub fn one_third_script(b: u32, horizon: u64) -> Vec<ScriptEntry> {
    let b = u64::from(b);
    let mut script = vec![ScriptEntry::fresh(1, 2)];
    script.extend((2..b).map(|r| ScriptEntry::fresh(r, 1)));
    script.extend(
        (b + 2..=horizon)
            .step_by(3)
            .map(|r| ScriptEntry::fresh(r, 1)),
    );
    script
}

pub fn demo_counting_backoff_unfair_at_one_third(b: u32, horizon: u64) -> Result<Demo> {
    if b < 2 {
        return Err(Error::Config("the construction needs b > 1".into()));
    }
    let t = AdversaryType::new(Rate::new(1, 3)?, b)?;
    let script = one_third_script(b, horizon);
    let config = RunConfig::new(
        AlgorithmKind::CountingBackoff,
        t,
        StrategySpec::Scripted { script },
    )
    .horizon(horizon)
    .checked();
    let out = run(config)?;
    let bottom_unheard = out
        .metrics
        .per_packet
        .iter()
        .any(|p| p.station.activation_round == 1 && p.heard_round.is_none());
    let formed = u64::from(b).min(out.trace.len() as u64) as usize;
    let never_empty = out.trace[formed..].iter().all(|r| r.queued > 0);
    let pass = bottom_unheard && never_empty;
    let params = json!({ "b": b, "horizon": horizon, "adversary": t.to_string() });
    Ok(Demo {
        verdict: verdict("one-third-unfair", params, &out, pass),
        trace: out.trace,
    })
}

/// Result of the rate-1 prefix-extension construction.
#[derive(Clone, Debug)]
pub struct RateOneExecution {
    pub schedule: Vec<ScriptEntry>,
    pub trace: Vec<RoundRecord>,
    pub void_rounds: u64,
    /// `(last round, backlog)` at the end of every constructed prefix.
    pub prefixes: Vec<(u64, u64)>,
}

impl RateOneExecution {
    pub fn backlog(&self) -> u64 {
        self.trace.last().map_or(0, |r| r.queued)
    }

    pub fn backlog_at(&self, round: u64) -> u64 {
        self.trace.get(round as usize - 1).map_or(0, |r| r.queued)
    }

    pub fn backlog_non_decreasing(&self) -> bool {
        self.prefixes.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

/// One fresh one-packet station per round.
struct OnePerRound;

impl Strategy for OnePerRound {
    fn next(&mut self, _: &dyn WorldView, _: &BudgetState) -> Vec<InjectionDecision> {
        vec![InjectionDecision::fresh(1)]
    }
}

fn extend_rate_one<P: Audit>(mut committed: World<P>, horizon: u64) -> Result<RateOneExecution>
where
    P::State: Send,
{
    let mut schedule = Vec::new();
    let mut prefixes = Vec::new();
    while committed.round() <= horizon {
        let from = committed.round();
        if committed.has_scheduled_transmitter() {
            // only stations of the committed prefix transmit now, so the
            // one-round extension cannot need undoing
            committed.step(&mut OnePerRound)?;
            schedule.push(ScriptEntry::fresh(from, 1));
            prefixes.push((from, committed.queued()));
            continue;
        }
        let mut candidate = committed.fork();
        let mut found = None;
        while candidate.round() <= horizon {
            candidate.step(&mut OnePerRound)?;
            let last = candidate.trace().last().expect("stepped");
            if !last.transmitters.is_empty() {
                found = Some((last.round, last.feedback));
                break;
            }
        }
        let Some((until, feedback)) = found else {
            schedule.extend((from..candidate.round()).map(|r| ScriptEntry::fresh(r, 1)));
            committed.adopt(candidate);
            break;
        };
        match feedback {
            Feedback::Heard(m) if m.sender.activation_round >= from => {
                // the lone transmitter was activated by this extension: leave
                // it out and spend its packet on a two-packet station instead
                let dropped = m.sender.activation_round;
                let entries: Vec<ScriptEntry> = (from..=until)
                    .filter(|&r| r != dropped)
                    .map(|r| ScriptEntry::fresh(r, if r == until { 2 } else { 1 }))
                    .collect();
                let mut replay = committed.fork();
                let mut scripted = Scripted::new(&entries);
                while replay.round() <= until {
                    replay.step(&mut scripted)?;
                }
                schedule.extend(entries);
                committed.adopt(replay);
            }
            _ => {
                schedule.extend((from..=until).map(|r| ScriptEntry::fresh(r, 1)));
                committed.adopt(candidate);
            }
        }
        prefixes.push((until, committed.queued()));
    }
    let (trace, _) = committed.into_parts();
    let void_rounds = compute_metrics(&trace).void_rounds();
    Ok(RateOneExecution {
        schedule,
        trace,
        void_rounds,
        prefixes,
    })
}

/// Builds an execution against an adversary of type `(1, b)` that keeps
/// extending a prefix: one fresh station per round until somebody transmits;
/// a collision is kept, and a lone transmission by a station of the
/// extension is undone by not activating that station.
pub fn build_rate1_execution(
    algorithm: AlgorithmKind,
    b: u32,
    horizon: u64,
    checked: bool,
) -> Result<RateOneExecution> {
    let t = AdversaryType::new(Rate::ONE, b)?;
    let config = RunConfig::new(algorithm, t, StrategySpec::None).horizon(horizon);
    config.validate()?;
    let mode = config.channel_mode;
    match algorithm {
        AlgorithmKind::CountingBackoff => {
            extend_rate_one(World::new(CountingBackoff, t, mode, checked), horizon)
        }
        AlgorithmKind::QueueBackoff => extend_rate_one(
            World::new(QueueBackoff::default(), t, mode, checked),
            horizon,
        ),
        AlgorithmKind::QuadrupleRound => extend_rate_one(
            World::new(QuadrupleRound::default(), t, mode, checked),
            horizon,
        ),
        AlgorithmKind::AckPersistent => {
            extend_rate_one(World::new(AckPersistent, t, mode, checked), horizon)
        }
    }
}

/// Rate-one verdict: the backlog never shrinks between prefixes and is larger
/// at the horizon than at a tenth of it.
pub fn demo_rate_one(algorithm: AlgorithmKind, b: u32, horizon: u64) -> Result<Demo> {
    let exec = build_rate1_execution(algorithm, b, horizon, true)?;
    let earlier = exec.backlog_at((horizon / 10).max(1));
    let pass = exec.backlog_non_decreasing() && exec.backlog() > earlier;
    let verdict = Verdict {
        demo: "rate-one".into(),
        parameters: json!({
            "algorithm": algorithm,
            "b": b,
            "horizon": horizon,
            "backlog": exec.backlog(),
            "backlog_at_tenth": earlier,
        }),
        unheard: exec.backlog(),
        void_rounds: exec.void_rounds,
        pass,
    };
    Ok(Demo {
        verdict,
        trace: exec.trace,
    })
}

/// Packets for the station activated in each of the eight rounds of a
/// double segment; zero leaves the round without an activation.
pub type DoubleSegment = [u32; 8];

/// Populates the first double segment as given, injects nothing else, and
/// returns the length of the first double phase.
pub fn first_double_phase(segment: &DoubleSegment) -> Result<u64> {
    let script: Vec<ScriptEntry> = (1..)
        .zip(segment)
        .filter(|(_, &p)| p > 0)
        .map(|(r, &p)| ScriptEntry::fresh(r, p))
        .collect();
    let t = AdversaryType::new(Rate::ONE, minimal_b(&script, Rate::ONE))?;
    let packets: u64 = segment.iter().map(|&p| u64::from(p)).sum();
    let limit = 64 + 4 * packets;
    let config = RunConfig::new(
        AlgorithmKind::QuadrupleRound,
        t,
        StrategySpec::Scripted { script },
    )
    .horizon(limit)
    .checked();
    let mut sim = Simulation::new(config)?;
    while sim.phases().len() < 2 && (sim.trace().len() as u64) < limit {
        sim.step()?;
    }
    double_phase_lengths(sim.phases())
        .first()
        .copied()
        .ok_or_else(|| Error::Config(format!("double phase did not end within {limit} rounds")))
}

/// A double segment holding `k` packets whose double phase takes `2k + 2`
/// rounds: two stations with `k / 2` packets each at the start of the first
/// segment, or for odd `k` a one-packet first station and two stations of
/// `(k - 1) / 2` packets in the right pair.
pub fn slowest_double_segment(k: u32) -> DoubleSegment {
    let i = k / 2;
    let mut segment = [0; 8];
    if k % 2 == 0 {
        segment[0] = i;
        segment[1] = i;
    } else {
        segment[0] = 1;
        segment[2] = i;
        segment[3] = i;
    }
    segment
}
