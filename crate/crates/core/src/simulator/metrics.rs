//! Latency and occupancy measurements derived from a trace.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{Feedback, PacketId, StationId};

use super::trace::RoundRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub packet: PacketId,
    pub station: StationId,
    pub heard_round: Option<u64>,
}

impl PacketRecord {
    pub fn latency(&self) -> Option<u64> {
        self.heard_round.map(|h| h - self.packet.injection_round)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// Largest latency among heard packets; unheard packets do not count.
    pub max_latency: Option<u64>,
    pub max_queued: u64,
    pub unheard_count: u64,
    pub rounds: u64,
    pub injected: u64,
    pub heard: u64,
    pub silent_rounds: u64,
    pub collision_rounds: u64,
    pub heard_rounds: u64,
    pub per_packet: Vec<PacketRecord>,
    /// Packets pending at the end of each round.
    pub queued: Vec<u64>,
}

impl Metrics {
    pub fn void_rounds(&self) -> u64 {
        self.silent_rounds + self.collision_rounds
    }

    pub fn unheard(&self) -> impl Iterator<Item = &PacketRecord> {
        self.per_packet.iter().filter(|p| p.heard_round.is_none())
    }
}

pub fn compute_metrics(trace: &[RoundRecord]) -> Metrics {
    let mut m = Metrics {
        rounds: trace.len() as u64,
        ..Metrics::default()
    };
    let mut index: HashMap<PacketId, usize> = HashMap::new();
    for rec in trace {
        match rec.feedback {
            Feedback::Silence => m.silent_rounds += 1,
            Feedback::Collision => m.collision_rounds += 1,
            Feedback::Heard(_) => m.heard_rounds += 1,
        }
        if let Some(p) = rec.heard_packet {
            let i = index[&p];
            m.per_packet[i].heard_round = Some(rec.round);
            m.heard += 1;
        }
        let mut seq = 0;
        for inj in &rec.injections {
            for _ in 0..inj.packets {
                let packet = PacketId {
                    injection_round: rec.round,
                    sequence_within_round: seq,
                };
                seq += 1;
                index.insert(packet, m.per_packet.len());
                m.per_packet.push(PacketRecord {
                    packet,
                    station: inj.station,
                    heard_round: None,
                });
            }
        }
        m.injected += rec.injected();
        let queued = m.injected - m.heard;
        m.queued.push(queued);
        m.max_queued = m.max_queued.max(queued);
    }
    m.max_latency = m.per_packet.iter().filter_map(PacketRecord::latency).max();
    m.unheard_count = m.injected - m.heard;
    m
}
