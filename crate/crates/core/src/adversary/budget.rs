//! Token-bucket enforcement of the leaky-bucket injection constraint, and the
//! brute-force window oracle it is checked against.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AdversaryType;

/// Tokens available to the adversary in the current round. A round may spend
/// up to `floor(tokens)`; `advance` refills by `rho` at the end of the round,
/// capped at `rho + b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetState {
    tokens: Ratio<i64>,
    cap: Ratio<i64>,
    rho: Ratio<i64>,
    round: u64,
}

impl BudgetState {
    /// The bucket as it stands in round 1.
    pub fn new(t: &AdversaryType) -> Self {
        let cap = t.rho.as_ratio() + Ratio::from_integer(i64::from(t.b));
        BudgetState {
            tokens: cap,
            cap,
            rho: t.rho.as_ratio(),
            round: 1,
        }
    }

    pub fn tokens(&self) -> Ratio<i64> {
        self.tokens
    }

    /// Whole packets that may still be injected this round.
    pub fn available(&self) -> u64 {
        self.tokens.floor().to_integer().max(0) as u64
    }

    /// Round number the bucket is currently accounting for.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn spend(&mut self, n: u64) -> Result<()> {
        if n > self.available() {
            return Err(Error::BudgetViolation {
                round: self.round(),
                requested: n,
                available: self.available(),
            });
        }
        self.tokens -= Ratio::from_integer(n as i64);
        Ok(())
    }

    /// Closes the current round and refills the bucket for the next one.
    pub fn advance(&mut self) {
        self.round += 1;
        self.tokens = (self.tokens + self.rho).min(self.cap);
    }

    /// Tokens the next round would start with if nothing more is spent now.
    pub fn tokens_next_round(&self) -> Ratio<i64> {
        (self.tokens + self.rho).min(self.cap)
    }
}

/// Checks every contiguous window of a per-round injection schedule against
/// `floor(rho * len + b)`, independently of the bucket.
pub fn validate_trace(injections: &[u64], t: &AdversaryType) -> bool {
    first_violation(injections, t).is_none()
}

/// The first window `(start, end)` (1-based, inclusive) that carries more
/// packets than allowed.
///
/// A window `(s, e]` fits iff `q * packets - p * len <= q * b`, so with
/// `w(e) = q * S(e) - p * e` over prefix sums `S` the heaviest window ending
/// at `e` starts after the prefix minimising `w`.
pub fn first_violation(injections: &[u64], t: &AdversaryType) -> Option<(u64, u64)> {
    let (p, q) = (
        i128::from(t.rho.numerator()),
        i128::from(t.rho.denominator()),
    );
    let limit = i128::from(t.b) * q;
    let mut weights = Vec::with_capacity(injections.len() + 1);
    weights.push(0i128);
    let mut lightest = 0i128;
    for (i, &n) in injections.iter().enumerate() {
        let w = weights[i] + q * i128::from(n) - p;
        weights.push(w);
        if w - lightest > limit {
            let end = i + 1;
            let start = (0..end)
                .find(|&s| w - weights[s] > limit)
                .expect("a violating start");
            return Some((start as u64 + 1, end as u64));
        }
        lightest = lightest.min(w);
    }
    None
}

/// Feeds a schedule through a fresh bucket; fails at the first overspend.
pub fn replay_through_bucket(injections: &[u64], t: &AdversaryType) -> Result<BudgetState> {
    let mut bucket = BudgetState::new(t);
    for &n in injections {
        bucket.spend(n)?;
        bucket.advance();
    }
    Ok(bucket)
}
