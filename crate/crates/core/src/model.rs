//! Shared domain types: exact rates, adversary parameters, station and
//! packet identities, channel messages and run configuration.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adversary::StrategySpec;
use crate::algorithms::{AlgorithmKind, JoinRule};
use crate::error::{Error, Result};

/// A non-negative exact rational, always kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rate(Ratio<i64>);

impl Rate {
    pub const ZERO: Rate = Rate(Ratio::new_raw(0, 1));
    pub const ONE: Rate = Rate(Ratio::new_raw(1, 1));

    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidRate(format!(
                "{numerator}/{denominator}: zero denominator"
            )));
        }
        let value = Ratio::new(numerator, denominator);
        if value < Ratio::from_integer(0) {
            return Err(Error::InvalidRate(format!(
                "{numerator}/{denominator}: negative value"
            )));
        }
        Ok(Rate(value))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> Ratio<i64> {
        self.0
    }

    /// `n * self`, exact.
    pub fn times(&self, n: i64) -> Ratio<i64> {
        self.0 * Ratio::from_integer(n)
    }

    /// Lossy, for display only.
    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rate({self})")
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

impl FromStr for Rate {
    type Err = Error;

    /// Accepts `p/q` or a bare integer `p`. Decimal notation is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('.') || s.contains('e') || s.contains('E') {
            return Err(Error::InvalidRate(format!(
                "{s:?}: decimal input is not accepted, write the rate as p/q"
            )));
        }
        let parse = |part: &str| {
            part.trim()
                .parse::<i64>()
                .map_err(|e| Error::InvalidRate(format!("{s:?}: {e}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rate::new(parse(n)?, parse(d)?),
            None => Rate::new(parse(s)?, 1),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_k_activating() -> u32 {
    1
}

/// Leaky-bucket adversary of type `(rho, b)`, optionally allowed to activate
/// more than one fresh station per round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryType {
    pub rho: Rate,
    pub b: u32,
    #[serde(default = "default_k_activating")]
    pub k_activating: u32,
}

impl AdversaryType {
    pub fn new(rho: Rate, b: u32) -> Result<Self> {
        Self::with_activation(rho, b, 1)
    }

    pub fn with_activation(rho: Rate, b: u32, k_activating: u32) -> Result<Self> {
        let t = AdversaryType {
            rho,
            b,
            k_activating,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho == Rate::ZERO || self.rho > Rate::ONE {
            return Err(Error::InvalidAdversary(format!(
                "rate {} outside (0, 1]",
                self.rho
            )));
        }
        if self.b < 1 {
            return Err(Error::InvalidAdversary("b must be at least 1".into()));
        }
        if self.k_activating < 1 {
            return Err(Error::InvalidAdversary(
                "k_activating must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Largest number of packets injectable in a single round: `floor(rho + b)`.
    pub fn burstiness(&self) -> u64 {
        let cap = self.rho.as_ratio() + Ratio::from_integer(i64::from(self.b));
        cap.floor().to_integer() as u64
    }

    /// `floor(rho * len + b)`: the packet allowance of any window of `len` rounds.
    pub fn window_allowance(&self, len: u64) -> u64 {
        let num = i128::from(self.rho.numerator()) * i128::from(len)
            + i128::from(self.b) * i128::from(self.rho.denominator());
        Integer::div_floor(&num, &i128::from(self.rho.denominator())) as u64
    }
}

impl fmt::Display for AdversaryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.rho, self.b)?;
        if self.k_activating != 1 {
            write!(f, " {}-activating", self.k_activating)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelMode {
    pub collision_detection: bool,
}

impl ChannelMode {
    pub const WITH_CD: ChannelMode = ChannelMode {
        collision_detection: true,
    };
    pub const WITHOUT_CD: ChannelMode = ChannelMode {
        collision_detection: false,
    };
}

impl Default for ChannelMode {
    fn default() -> Self {
        ChannelMode::WITH_CD
    }
}

/// A station is named by the round in which it was activated. `slot`
/// separates stations activated in the same round, which only a
/// k-activating adversary with k > 1 can do.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StationId {
    pub activation_round: u64,
    #[serde(default)]
    pub slot: u32,
}

impl StationId {
    pub fn new(activation_round: u64) -> Self {
        StationId {
            activation_round,
            slot: 0,
        }
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slot == 0 {
            write!(f, "{}", self.activation_round)
        } else {
            write!(f, "{}.{}", self.activation_round, self.slot)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PacketId {
    pub injection_round: u64,
    pub sequence_within_round: u32,
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.injection_round, self.sequence_within_round)
    }
}

/// Control bits attached by adaptive algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub queue_size: i64,
    /// Set when the carried packet is the sender's last queued packet.
    pub over: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub packet: PacketId,
    pub sender: StationId,
    pub control: Option<Control>,
}

/// What the channel produced in a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feedback {
    Silence,
    Collision,
    Heard(Message),
}

impl Feedback {
    pub fn code(&self) -> char {
        match self {
            Feedback::Silence => 'S',
            Feedback::Collision => 'C',
            Feedback::Heard(_) => 'H',
        }
    }

    pub fn heard(&self) -> Option<&Message> {
        match self {
            Feedback::Heard(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_void(&self) -> bool {
        !matches!(self, Feedback::Heard(_))
    }
}

fn default_horizon() -> u64 {
    10_000
}

/// Everything needed to reproduce one execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub adversary_type: AdversaryType,
    pub strategy: StrategySpec,
    #[serde(default)]
    pub channel_mode: ChannelMode,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub invariant_checks: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub join_rule: JoinRule,
}

impl RunConfig {
    pub fn new(
        algorithm: AlgorithmKind,
        adversary_type: AdversaryType,
        strategy: StrategySpec,
    ) -> Self {
        RunConfig {
            algorithm,
            adversary_type,
            strategy,
            channel_mode: ChannelMode::default(),
            horizon: default_horizon(),
            invariant_checks: false,
            seed: 0,
            join_rule: JoinRule::default(),
        }
    }

    pub fn horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn checked(mut self) -> Self {
        self.invariant_checks = true;
        self
    }

    pub fn mode(mut self, mode: ChannelMode) -> Self {
        self.channel_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.adversary_type.validate()?;
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if !self.channel_mode.collision_detection && self.algorithm.requires_collision_detection() {
            return Err(Error::Config(format!(
                "{} requires a channel with collision detection",
                self.algorithm
            )));
        }
        self.strategy.validate(&self.adversary_type)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
