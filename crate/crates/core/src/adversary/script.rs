//! Explicit injection schedules, loaded from JSON arrays of
//! `{round, station: "fresh" | activation_round, packets}`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{AdversaryType, Rate};

use super::budget::first_violation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScriptTarget {
    Fresh,
    /// The station activated in this round (its first slot).
    Active(u64),
}

impl fmt::Display for ScriptTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptTarget::Fresh => f.write_str("fresh"),
            ScriptTarget::Active(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for ScriptTarget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScriptTarget::Fresh => s.serialize_str("fresh"),
            ScriptTarget::Active(r) => s.serialize_u64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for ScriptTarget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Round(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Round(r) => Ok(ScriptTarget::Active(r)),
            Raw::Word(w) if w == "fresh" => Ok(ScriptTarget::Fresh),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "station must be \"fresh\" or an activation round, got {w:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub round: u64,
    pub station: ScriptTarget,
    pub packets: u32,
}

impl ScriptEntry {
    pub fn fresh(round: u64, packets: u32) -> Self {
        ScriptEntry {
            round,
            station: ScriptTarget::Fresh,
            packets,
        }
    }

    pub fn into_station(round: u64, activation_round: u64, packets: u32) -> Self {
        ScriptEntry {
            round,
            station: ScriptTarget::Active(activation_round),
            packets,
        }
    }
}

pub fn load_script(path: &Path) -> Result<Vec<ScriptEntry>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Per-round packet totals, indexed from round 1, padded to `len`.
pub fn per_round_counts(script: &[ScriptEntry], len: usize) -> Vec<u64> {
    let last = script.iter().map(|e| e.round as usize).max().unwrap_or(0);
    let mut counts = vec![0u64; len.max(last)];
    for e in script {
        counts[e.round as usize - 1] += u64::from(e.packets);
    }
    counts
}

/// Rejects scripts that could not be replayed under `t`: bad rounds or
/// packet counts, too many fresh stations in a round, targets that are not
/// activated earlier, or any window over budget.
pub fn validate_script(script: &[ScriptEntry], t: &AdversaryType) -> Result<()> {
    let mut fresh_per_round: BTreeMap<u64, u32> = BTreeMap::new();
    for e in script {
        if e.round == 0 {
            return Err(Error::Config("script rounds start at 1".into()));
        }
        if e.packets == 0 {
            return Err(Error::Config(format!(
                "script entry in round {} injects no packets",
                e.round
            )));
        }
        match e.station {
            ScriptTarget::Fresh => *fresh_per_round.entry(e.round).or_default() += 1,
            ScriptTarget::Active(a) => {
                let activated = script
                    .iter()
                    .any(|f| f.round == a && f.station == ScriptTarget::Fresh);
                if a > e.round || !activated {
                    return Err(Error::Config(format!(
                        "script entry in round {} targets station {a}, which the script never activates before it",
                        e.round
                    )));
                }
            }
        }
    }
    if let Some((&round, &fresh)) = fresh_per_round.iter().find(|(_, &n)| n > t.k_activating) {
        return Err(Error::ActivationLimit {
            round,
            fresh,
            limit: t.k_activating,
        });
    }
    let counts = per_round_counts(script, 0);
    if let Some((start, end)) = first_violation(&counts, t) {
        return Err(Error::WindowViolation {
            adversary: *t,
            start,
            end,
        });
    }
    Ok(())
}

/// Smallest burstiness `b >= 1` whose window budget at rate `rho` admits
/// the script's per-round totals.
pub fn minimal_b(script: &[ScriptEntry], rho: Rate) -> u32 {
    let counts = per_round_counts(script, 0);
    let (p, q) = (i128::from(rho.numerator()), i128::from(rho.denominator()));
    let mut need = 1i128;
    for start in 0..counts.len() {
        let mut sum = 0i128;
        for (len, &c) in counts[start..].iter().enumerate() {
            sum += i128::from(c);
            // b >= sum - rho * len, rounded up
            let excess = sum * q - p * (len as i128 + 1);
            need = need.max(Integer::div_ceil(&excess, &q));
        }
    }
    need as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text =
            r#"[{"round":1,"station":"fresh","packets":2},{"round":3,"station":1,"packets":1}]"#;
        let s: Vec<ScriptEntry> = serde_json::from_str(text).unwrap();
        assert_eq!(
            s,
            vec![ScriptEntry::fresh(1, 2), ScriptEntry::into_station(3, 1, 1)]
        );
        assert_eq!(serde_json::to_string(&s).unwrap(), text);
        assert!(serde_json::from_str::<Vec<ScriptEntry>>(
            r#"[{"round":1,"station":"old","packets":2}]"#
        )
        .is_err());
    }

    #[test]
    fn validation() {
        let t = AdversaryType::new(Rate::new(1, 2).unwrap(), 2).unwrap();
        assert!(validate_script(&[ScriptEntry::fresh(1, 2), ScriptEntry::fresh(2, 1)], &t).is_ok());
        assert!(validate_script(&[ScriptEntry::fresh(1, 3)], &t).is_err());
        assert!(matches!(
            validate_script(&[ScriptEntry::fresh(1, 1), ScriptEntry::fresh(1, 1)], &t),
            Err(Error::ActivationLimit { .. })
        ));
        assert!(validate_script(&[ScriptEntry::into_station(2, 1, 1)], &t).is_err());
        assert!(validate_script(&[ScriptEntry::fresh(0, 1)], &t).is_err());
    }
}
