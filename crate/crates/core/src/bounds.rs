//! Closed-form latency and queue bounds, and comparison of measured runs
//! against them. All arithmetic is exact.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::algorithms::AlgorithmKind;
use crate::error::{Error, Result};
use crate::model::{AdversaryType, Rate};
use crate::simulator::Metrics;

/// Additive constant of the Quadruple-Round queue bound `b + C`: the largest
/// excess over `b` seen across saturating, worst-case and random schedules
/// for `b` in `1..=6`.
pub const QUADRUPLE_QUEUE_SLACK: i64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Finite(Ratio<i64>),
    Infinite,
}

impl Bound {
    pub fn int(n: i64) -> Self {
        Bound::Finite(Ratio::from_integer(n))
    }

    /// `measured <= ceil(bound)`; an infinite bound admits everything.
    pub fn admits(&self, measured: u64) -> bool {
        match self {
            Bound::Infinite => true,
            Bound::Finite(r) => i128::from(measured) <= i128::from(r.ceil().to_integer()),
        }
    }

    pub fn ceil(&self) -> Option<i64> {
        match self {
            Bound::Infinite => None,
            Bound::Finite(r) => Some(r.ceil().to_integer()),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Infinite => f.write_str("inf"),
            Bound::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Bound::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub latency: Bound,
    pub queue: Bound,
    /// A second queue figure reported alongside the enforced one.
    pub queue_informational: Option<Bound>,
}

impl Bounds {
    const UNBOUNDED: Bounds = Bounds {
        latency: Bound::Infinite,
        queue: Bound::Infinite,
        queue_informational: None,
    };
}

fn ratio(r: Rate) -> Ratio<i64> {
    r.as_ratio()
}

/// `(3b - 3) / (1 - 3 rho)` latency and `(3b - 5) / 2` queue for
/// `rho < 1/3`; `(3b - 7) / 4` is reported as the informational queue
/// figure. Unbounded from `rho = 1/3` on.
pub fn counting_backoff_bounds(rho: Rate, b: u32) -> Result<Bounds> {
    if b < 2 {
        return Err(Error::Config(
            "counting-backoff bounds need b of at least 2".into(),
        ));
    }
    if ratio(rho) >= Ratio::new(1, 3) {
        return Ok(Bounds::UNBOUNDED);
    }
    let b = i64::from(b);
    Ok(Bounds {
        latency: Bound::Finite(
            Ratio::from_integer(3 * b - 3) / (Ratio::from_integer(1) - ratio(rho) * 3),
        ),
        queue: Bound::Finite(Ratio::new(3 * b - 5, 2)),
        queue_informational: Some(Bound::Finite(Ratio::new(3 * b - 7, 4))),
    })
}

/// `2b + 4` latency and `b + C` queue for rates up to 3/8.
pub fn quadruple_bounds(rho: Rate, b: u32) -> Bounds {
    if ratio(rho) > Ratio::new(3, 8) {
        return Bounds::UNBOUNDED;
    }
    let b = i64::from(b);
    Bounds {
        latency: Bound::int(2 * b + 4),
        queue: Bound::int(b + QUADRUPLE_QUEUE_SLACK),
        queue_informational: None,
    }
}

/// `4b - 4` latency and `2b - 3` queue for rates up to 1/2.
pub fn queue_backoff_bounds(rho: Rate, b: u32) -> Result<Bounds> {
    if b < 2 {
        return Err(Error::Config(
            "queue-backoff bounds need b of at least 2".into(),
        ));
    }
    if ratio(rho) > Ratio::new(1, 2) {
        return Ok(Bounds::UNBOUNDED);
    }
    let b = i64::from(b);
    Ok(Bounds {
        latency: Bound::int(4 * b - 4),
        queue: Bound::int(2 * b - 3),
        queue_informational: None,
    })
}

pub fn bounds_for(algorithm: AlgorithmKind, t: &AdversaryType) -> Result<Bounds> {
    match algorithm {
        AlgorithmKind::CountingBackoff => counting_backoff_bounds(t.rho, t.b),
        AlgorithmKind::QuadrupleRound => Ok(quadruple_bounds(t.rho, t.b)),
        AlgorithmKind::QueueBackoff => queue_backoff_bounds(t.rho, t.b),
        AlgorithmKind::AckPersistent => Ok(Bounds::UNBOUNDED),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub algorithm: AlgorithmKind,
    pub adversary_type: AdversaryType,
    pub bound_latency: Bound,
    pub bound_queue: Bound,
    pub bound_queue_informational: Option<Bound>,
    pub measured_latency: Option<u64>,
    pub measured_queue: u64,
    /// Packets still queued at the horizon; excluded from latency.
    pub unheard: u64,
    pub latency_satisfied: bool,
    pub queue_satisfied: bool,
    pub satisfied: bool,
}

pub fn compare(
    algorithm: AlgorithmKind,
    t: &AdversaryType,
    metrics: &Metrics,
    bounds: &Bounds,
) -> BoundReport {
    let latency_satisfied = bounds.latency.admits(metrics.max_latency.unwrap_or(0));
    let queue_satisfied = bounds.queue.admits(metrics.max_queued);
    BoundReport {
        algorithm,
        adversary_type: *t,
        bound_latency: bounds.latency,
        bound_queue: bounds.queue,
        bound_queue_informational: bounds.queue_informational,
        measured_latency: metrics.max_latency,
        measured_queue: metrics.max_queued,
        unheard: metrics.unheard_count,
        latency_satisfied,
        queue_satisfied,
        satisfied: latency_satisfied && queue_satisfied,
    }
}

/// Fixed-width text table, one report per row.
pub fn render_table(reports: &[BoundReport]) -> String {
    let mut out = format!(
        "{:<18} {:>8} {:>3} {:>9} {:>9} {:>7} {:>7} {:>8} {}\n",
        "algorithm", "rho", "b", "latency", "bound", "queue", "bound", "unheard", "ok"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<18} {:>8} {:>3} {:>9} {:>9} {:>7} {:>7} {:>8} {}\n",
            r.algorithm.name(),
            r.adversary_type.rho.to_string(),
            r.adversary_type.b,
            r.measured_latency
                .map_or_else(|| "-".to_string(), |l| l.to_string()),
            r.bound_latency.to_string(),
            r.measured_queue,
            r.bound_queue.to_string(),
            r.unheard,
            if r.satisfied { "yes" } else { "NO" }
        ));
    }
    out
}
