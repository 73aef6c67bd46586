//! Injection strategies. Each one only asks for what the bucket allows, so
//! the simulator's budget check never fires for them; scripted schedules
//! are validated before the run instead.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AdversaryType, Rate, StationId};

use super::budget::BudgetState;
use super::script::{ScriptEntry, ScriptTarget};
use super::{InjectionDecision, Strategy, Target, WorldView};

#[derive(Clone, Copy, Debug, Default)]
pub struct NoInjection;

impl Strategy for NoInjection {
    fn next(&mut self, _: &dyn WorldView, _: &BudgetState) -> Vec<InjectionDecision> {
        Vec::new()
    }
}

/// Spends every whole token on one fresh station each round.
#[derive(Clone, Copy, Debug, Default)]
pub struct Saturating;

impl Strategy for Saturating {
    fn next(&mut self, _: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision> {
        match budget.available() {
            0 => Vec::new(),
            n => vec![InjectionDecision::fresh(n as u32)],
        }
    }
}

/// Worst case for Counting-Backoff. An empty system is restarted with a
/// two-packet station; otherwise a one-packet station is activated whenever
/// some station is about to transmit, so that its first attempt collides and
/// it is pushed on top of the stack.
#[derive(Clone, Copy, Debug, Default)]
pub struct StackPersistent;

impl Strategy for StackPersistent {
    fn next(&mut self, view: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision> {
        let t = view.adversary();
        if view.queued() == 0 {
            if budget.available() < 2 {
                return Vec::new();
            }
            // wait for enough budget to follow up with a second station,
            // unless waiting cannot help
            let cap = t.rho.as_ratio() + Ratio::from_integer(i64::from(t.b));
            let after = budget.tokens() - Ratio::from_integer(2) + t.rho.as_ratio();
            if after >= Ratio::from_integer(1) || budget.tokens() == cap {
                return vec![InjectionDecision::fresh(2)];
            }
            return Vec::new();
        }
        if budget.available() >= 1 && !view.predicted_transmitters().is_empty() {
            return vec![InjectionDecision::fresh(1)];
        }
        Vec::new()
    }
}

/// Worst case for Queue-Backoff: two packets into a fresh station when the
/// system is empty, then one fresh station per round as often as the budget
/// allows.
#[derive(Clone, Copy, Debug, Default)]
pub struct QueuePersistent;

impl Strategy for QueuePersistent {
    fn next(&mut self, view: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision> {
        let available = budget.available();
        if view.queued() == 0 && available >= 2 {
            vec![InjectionDecision::fresh(2)]
        } else if available >= 1 {
            vec![InjectionDecision::fresh(1)]
        } else {
            Vec::new()
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Scripted {
    by_round: BTreeMap<u64, Vec<InjectionDecision>>,
}

impl Scripted {
    pub fn new(script: &[ScriptEntry]) -> Self {
        let mut by_round: BTreeMap<u64, Vec<InjectionDecision>> = BTreeMap::new();
        for e in script {
            let target = match e.station {
                ScriptTarget::Fresh => Target::Fresh,
                ScriptTarget::Active(r) => Target::Station(StationId::new(r)),
            };
            by_round
                .entry(e.round)
                .or_default()
                .push(InjectionDecision {
                    target,
                    packets: e.packets,
                });
        }
        Scripted { by_round }
    }
}

impl Strategy for Scripted {
    fn next(&mut self, view: &dyn WorldView, _: &BudgetState) -> Vec<InjectionDecision> {
        self.by_round.remove(&view.round()).unwrap_or_default()
    }
}

/// One packet into a fresh station with the given probability, whenever a
/// whole token is available.
#[derive(Clone, Debug)]
pub struct Bernoulli {
    probability: Rate,
    rng: ChaCha8Rng,
}

impl Bernoulli {
    pub fn new(probability: Rate, seed: u64) -> Self {
        Bernoulli {
            probability,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Strategy for Bernoulli {
    fn next(&mut self, _: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision> {
        let p = self.probability;
        let hit = self
            .rng
            .gen_ratio(p.numerator() as u32, p.denominator() as u32);
        if hit && budget.available() >= 1 {
            vec![InjectionDecision::fresh(1)]
        } else {
            Vec::new()
        }
    }
}

/// Random budget-valid injections, split between fresh stations and stations
/// that are already active.
#[derive(Clone, Debug)]
pub struct RandomValid {
    k_activating: u32,
    rng: ChaCha8Rng,
}

impl RandomValid {
    pub fn new(k_activating: u32, seed: u64) -> Self {
        RandomValid {
            k_activating,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Strategy for RandomValid {
    fn next(&mut self, view: &dyn WorldView, budget: &BudgetState) -> Vec<InjectionDecision> {
        let available = budget.available();
        if available == 0 || self.rng.gen_bool(0.5) {
            return Vec::new();
        }
        let total = self.rng.gen_range(1..=available) as u32;
        let first = self.rng.gen_range(1..=total);
        let stations = view.stations();
        let mut fresh = 0;
        let mut out: Vec<InjectionDecision> = Vec::new();
        for packets in [first, total - first] {
            if packets == 0 {
                continue;
            }
            let want_fresh = stations.is_empty() || self.rng.gen_bool(0.6);
            let target = if want_fresh && fresh < self.k_activating {
                fresh += 1;
                Target::Fresh
            } else if !stations.is_empty() {
                Target::Station(stations[self.rng.gen_range(0..stations.len())].0)
            } else {
                // no room for another fresh station and nobody to join
                out[0].packets += packets;
                continue;
            };
            out.push(InjectionDecision { target, packets });
        }
        out
    }
}

/// A schedule aimed at long Quadruple-Round phases: the whole burst in the
/// first two rounds, then stations at the first, third and fourth round of
/// every double segment whenever the bucket allows.
pub fn quadruple_worst_script(t: &AdversaryType, horizon: u64) -> Vec<ScriptEntry> {
    let mut bucket = BudgetState::new(t);
    let mut script = Vec::new();
    let b = u64::from(t.b);
    for round in 1..=horizon {
        let want = match round {
            1 => b.div_ceil(2),
            2 => b / 2,
            _ if matches!((round - 1) % 8, 0 | 2 | 3) => 1,
            _ => 0,
        };
        let n = want.min(bucket.available());
        if n > 0 {
            script.push(ScriptEntry::fresh(round, n as u32));
            bucket.spend(n).expect("within availability");
        }
        bucket.advance();
    }
    script
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{script::per_round_counts, validate_trace};

    #[test]
    fn quadruple_worst_script_is_budget_valid() {
        for b in 1..=6 {
            let t = AdversaryType::new(Rate::new(3, 8).unwrap(), b).unwrap();
            let s = quadruple_worst_script(&t, 400);
            assert!(validate_trace(&per_round_counts(&s, 400), &t));
            assert_eq!(s[0], ScriptEntry::fresh(1, b.div_ceil(2)));
        }
    }
}
