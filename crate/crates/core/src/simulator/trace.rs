//! Per-round execution records and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::adversary::{ScriptEntry, ScriptTarget};
use crate::error::{Error, Result};
use crate::model::{Feedback, PacketId, StationId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionRecord {
    pub station: StationId,
    pub packets: u32,
    pub fresh: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub transmitters: Vec<StationId>,
    pub feedback: Feedback,
    pub injections: Vec<InjectionRecord>,
    pub heard_packet: Option<PacketId>,
    /// Packets pending in all stations at the end of the round.
    pub queued: u64,
}

impl RoundRecord {
    pub fn injected(&self) -> u64 {
        self.injections.iter().map(|i| u64::from(i.packets)).sum()
    }

    pub fn fresh_stations(&self) -> usize {
        self.injections.iter().filter(|i| i.fresh).count()
    }
}

/// Packets injected per round, from round 1.
pub fn injection_counts(trace: &[RoundRecord]) -> Vec<u64> {
    trace.iter().map(RoundRecord::injected).collect()
}

/// The trace's injections as a script that reproduces them. Fails if a
/// packet went to a station that is not the first activated in its round,
/// since scripts cannot name those.
pub fn to_script(trace: &[RoundRecord]) -> Result<Vec<ScriptEntry>> {
    let mut script = Vec::new();
    for rec in trace {
        for inj in &rec.injections {
            let station = if inj.fresh {
                ScriptTarget::Fresh
            } else if inj.station.slot == 0 {
                ScriptTarget::Active(inj.station.activation_round)
            } else {
                return Err(Error::Config(format!(
                    "round {}: injection into station {} cannot be scripted",
                    rec.round, inj.station
                )));
            };
            script.push(ScriptEntry {
                round: rec.round,
                station,
                packets: inj.packets,
            });
        }
    }
    Ok(script)
}

#[derive(Serialize)]
struct CsvRow {
    round: u64,
    feedback: char,
    transmitters: String,
    heard_packet: String,
    injections: String,
}

fn join<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(";")
}

/// Writes `round,feedback,transmitters,heard_packet,injections`. Transmitters
/// are `;`-joined station names; injections are `station:packets`, with a
/// trailing `*` marking a fresh activation.
pub fn write_csv<W: Write>(trace: &[RoundRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in trace {
        w.serialize(CsvRow {
            round: rec.round,
            feedback: rec.feedback.code(),
            transmitters: join(&rec.transmitters, |s| s.to_string()),
            heard_packet: rec.heard_packet.map(|p| p.to_string()).unwrap_or_default(),
            injections: join(&rec.injections, |i| {
                format!(
                    "{}:{}{}",
                    i.station,
                    i.packets,
                    if i.fresh { "*" } else { "" }
                )
            }),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Rounds rendered as `S`, `C` or `H`.
pub fn feedback_string(trace: &[RoundRecord]) -> String {
    trace.iter().map(|r| r.feedback.code()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Message;

    #[test]
    fn csv_layout() {
        let p = PacketId {
            injection_round: 1,
            sequence_within_round: 0,
        };
        let trace = vec![
            RoundRecord {
                round: 1,
                transmitters: vec![],
                feedback: Feedback::Silence,
                injections: vec![InjectionRecord {
                    station: StationId::new(1),
                    packets: 2,
                    fresh: true,
                }],
                heard_packet: None,
                queued: 2,
            },
            RoundRecord {
                round: 2,
                transmitters: vec![StationId::new(1)],
                feedback: Feedback::Heard(Message {
                    packet: p,
                    sender: StationId::new(1),
                    control: None,
                }),
                injections: vec![],
                heard_packet: Some(p),
                queued: 1,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&trace, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "round,feedback,transmitters,heard_packet,injections\n1,S,,,1:2*\n2,H,1,1.0,\n"
        );
        assert_eq!(feedback_string(&trace), "SH");
        assert_eq!(to_script(&trace).unwrap(), vec![ScriptEntry::fresh(1, 2)]);
    }
}
