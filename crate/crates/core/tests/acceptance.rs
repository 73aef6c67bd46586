//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use macsim::adversary::script::minimal_b;
use macsim::adversary::{quadruple_worst_script, replay_through_bucket, ScriptEntry};
use macsim::bounds::{
    counting_backoff_bounds, quadruple_bounds, queue_backoff_bounds, Bound, QUADRUPLE_QUEUE_SLACK,
};
use macsim::explorer::{
    build_rate1_execution, demo_ack_unfair, demo_counting_backoff_unfair_at_one_third,
    demo_two_activating, first_double_phase, slowest_double_segment, DoubleSegment,
};
use macsim::model::ChannelMode;
use macsim::{run, AdversaryType, AlgorithmKind, Rate, RunConfig, RunOutput, StrategySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LONG_HORIZON: u64 = 100_000;
const DOUBLE_SEGMENT_CONFIGS: usize = 10_000;
const FUZZED_SCHEDULES_PER_ALGORITHM: u64 = 1_000;
const BUCKET_SCHEDULES: u64 = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        if failures.is_empty() {
            Outcome {
                pass: true,
                detail: summary,
            }
        } else {
            Outcome {
                pass: false,
                detail: format!("{summary}; {}", failures.join("; ")),
            }
        }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn rate(p: i64, q: i64) -> Rate {
    Rate::new(p, q).unwrap()
}

fn checked_run(
    algorithm: AlgorithmKind,
    t: AdversaryType,
    strategy: StrategySpec,
    horizon: u64,
) -> macsim::Result<RunOutput> {
    run(RunConfig::new(algorithm, t, strategy)
        .horizon(horizon)
        .checked())
}

const DOUBLE_SEGMENT_SCRIPTS: [(&str, [u64; 2]); 4] = [
    (
        include_str!("../scripts/double_segment_example1.json"),
        [3, 6],
    ),
    (
        include_str!("../scripts/double_segment_example2.json"),
        [8, 10],
    ),
    (
        include_str!("../scripts/double_segment_example3.json"),
        [12, 14],
    ),
    (
        include_str!("../scripts/double_segment_example4.json"),
        [16, 18],
    ),
];

fn golden_double_phases() -> Outcome {
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for (i, (text, expected)) in DOUBLE_SEGMENT_SCRIPTS.iter().enumerate() {
        let script: Vec<ScriptEntry> = serde_json::from_str(text).unwrap();
        let t = AdversaryType::new(Rate::ONE, minimal_b(&script, Rate::ONE)).unwrap();
        let out = match checked_run(
            AlgorithmKind::QuadrupleRound,
            t,
            StrategySpec::Scripted { script },
            80,
        ) {
            Ok(out) => out,
            Err(e) => {
                failures.push(format!("example {}: {e}", i + 1));
                continue;
            }
        };
        let lengths = out.double_phase_lengths();
        let got = [
            lengths.first().copied().unwrap_or(0),
            lengths.get(1).copied().unwrap_or(0),
        ];
        seen.push(format!("{got:?}"));
        if got != *expected {
            failures.push(format!("example {}: {got:?} != {expected:?}", i + 1));
        }
    }
    Outcome::new(failures, format!("double phases {}", seen.join(" ")))
}

fn counting_backoff_bounds_hold() -> Outcome {
    let mut failures = Vec::new();
    let mut informational = Vec::new();
    for (p, q) in [(1, 6), (1, 5), (1, 4), (3, 10)] {
        for b in [2, 3, 4, 6] {
            let t = AdversaryType::new(rate(p, q), b).unwrap();
            let bounds = counting_backoff_bounds(t.rho, b).unwrap();
            let out = match checked_run(
                AlgorithmKind::CountingBackoff,
                t,
                StrategySpec::StackPersistent,
                LONG_HORIZON,
            ) {
                Ok(out) => out,
                Err(e) => {
                    failures.push(format!("{t}: {e}"));
                    continue;
                }
            };
            let latency = out.metrics.max_latency.unwrap_or(0);
            let queue = out.metrics.max_queued;
            if !bounds.latency.admits(latency) {
                failures.push(format!("{t}: latency {latency} > {}", bounds.latency));
            }
            if !bounds.queue.admits(queue) {
                failures.push(format!("{t}: queue {queue} > {}", bounds.queue));
            }
            if let Some(info) = bounds.queue_informational.filter(|i| !i.admits(queue)) {
                informational.push(format!("{t}: {queue} > {info}"));
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "16 cells; informational queue figure exceeded in {} cells",
            informational.len()
        ),
    )
}

fn counting_backoff_unfair_at_one_third() -> Outcome {
    let demo = demo_counting_backoff_unfair_at_one_third(3, 10_000).unwrap();
    let mut failures = Vec::new();
    if !demo.verdict.pass {
        failures.push("bottom packet heard or stack emptied".into());
    }
    // steady state: each block of three rounds has one collision, one heard
    // message and one silence
    let periodic = demo.trace[100..].chunks_exact(3).all(|block| {
        let mut codes: Vec<char> = block.iter().map(|r| r.feedback.code()).collect();
        codes.sort_unstable();
        codes == ['C', 'H', 'S']
    });
    if !periodic {
        failures.push("steady state is not collision/heard/silence per three rounds".into());
    }
    Outcome::new(failures, format!("unheard {}", demo.verdict.unheard))
}

fn quadruple_bounds_hold() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = (0, 0);
    for b in 1..=6 {
        let t = AdversaryType::new(rate(3, 8), b).unwrap();
        let bounds = quadruple_bounds(t.rho, b);
        let strategies = [
            StrategySpec::Saturating,
            StrategySpec::Scripted {
                script: quadruple_worst_script(&t, LONG_HORIZON),
            },
        ];
        for strategy in strategies {
            let name = strategy.name();
            let out = match checked_run(AlgorithmKind::QuadrupleRound, t, strategy, LONG_HORIZON) {
                Ok(out) => out,
                Err(e) => {
                    failures.push(format!("{t} {name}: {e}"));
                    continue;
                }
            };
            let latency = out.metrics.max_latency.unwrap_or(0);
            let queue = out.metrics.max_queued;
            worst.0 = worst.0.max(latency as i64 - 2 * i64::from(b));
            worst.1 = worst.1.max(queue as i64 - i64::from(b));
            if !bounds.latency.admits(latency) {
                failures.push(format!(
                    "{t} {name}: latency {latency} > {}",
                    bounds.latency
                ));
            }
            if !bounds.queue.admits(queue) {
                failures.push(format!("{t} {name}: queue {queue} > {}", bounds.queue));
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "max latency 2b+{}, max queue b+{} (C = {QUADRUPLE_QUEUE_SLACK})",
            worst.0, worst.1
        ),
    )
}

fn random_double_segment(rng: &mut ChaCha8Rng, k: u32) -> DoubleSegment {
    let mut segment = [0; 8];
    if k == 0 {
        return segment;
    }
    let stations = rng.gen_range(1..=k.min(8)) as usize;
    let mut rounds: Vec<usize> = (0..8).collect();
    for i in 0..stations {
        let j = rng.gen_range(i..8);
        rounds.swap(i, j);
    }
    for &r in &rounds[..stations] {
        segment[r] = 1;
    }
    for _ in stations as u32..k {
        segment[rounds[rng.gen_range(0..stations)]] += 1;
    }
    segment
}

fn double_phase_property() -> Outcome {
    const KS: [u32; 8] = [0, 2, 3, 4, 5, 6, 7, 8];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for _ in 0..DOUBLE_SEGMENT_CONFIGS {
        let k = KS[rng.gen_range(0..KS.len())];
        let segment = random_double_segment(&mut rng, k);
        match first_double_phase(&segment) {
            Ok(len) if len <= u64::from(2 * k + 2) => {}
            Ok(len) => failures.push(format!("{segment:?}: {len} > {}", 2 * k + 2)),
            Err(e) => failures.push(format!("{segment:?}: {e}")),
        }
        if failures.len() > 5 {
            break;
        }
    }
    for k in KS {
        let segment = slowest_double_segment(k);
        match first_double_phase(&segment) {
            Ok(len) if len == u64::from(2 * k + 2) => {}
            other => failures.push(format!("slowest k={k}: {other:?}")),
        }
    }
    for r in 0..8 {
        let mut segment = [0; 8];
        segment[r] = 1;
        match first_double_phase(&segment) {
            Ok(3) => {}
            other => failures.push(format!("one packet in round {}: {other:?}", r + 1)),
        }
    }
    Outcome::new(
        failures,
        format!("{DOUBLE_SEGMENT_CONFIGS} random configurations"),
    )
}

fn queue_backoff_bounds_hold() -> Outcome {
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for collision_detection in [true, false] {
        for b in 2..=6 {
            let t = AdversaryType::new(rate(1, 2), b).unwrap();
            let bounds = queue_backoff_bounds(t.rho, b).unwrap();
            let config = RunConfig::new(
                AlgorithmKind::QueueBackoff,
                t,
                StrategySpec::QueuePersistent,
            )
            .horizon(LONG_HORIZON)
            .mode(ChannelMode {
                collision_detection,
            })
            .checked();
            let mode = if collision_detection { "cd" } else { "no-cd" };
            let out = match run(config) {
                Ok(out) => out,
                Err(e) => {
                    failures.push(format!("b={b} {mode}: {e}"));
                    continue;
                }
            };
            let latency = out.metrics.max_latency.unwrap_or(0);
            let queue = out.metrics.max_queued;
            seen.push(format!("b={b} {mode} ({latency}, {queue})"));
            if Bound::int(latency as i64) != bounds.latency {
                failures.push(format!(
                    "b={b} {mode}: latency {latency} != {}",
                    bounds.latency
                ));
            }
            if !bounds.queue.admits(queue) {
                failures.push(format!("b={b} {mode}: queue {queue} > {}", bounds.queue));
            }
        }
    }
    Outcome::new(failures, format!("(latency, queue): {}", seen.join(", ")))
}

fn fuzzed_invariants() -> Outcome {
    let rates = [(1, 8), (1, 4), (1, 3), (3, 8), (1, 2), (3, 4), (1, 1)];
    let mut failures = Vec::new();
    let mut rounds = 0;
    for algorithm in AlgorithmKind::ALL {
        for seed in 0..FUZZED_SCHEDULES_PER_ALGORITHM {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (p, q) = rates[rng.gen_range(0..rates.len())];
            let t = AdversaryType::new(rate(p, q), rng.gen_range(1..=5)).unwrap();
            let collision_detection = algorithm.requires_collision_detection() || rng.gen_bool(0.5);
            let mut config = RunConfig::new(algorithm, t, StrategySpec::Random)
                .horizon(300)
                .mode(ChannelMode {
                    collision_detection,
                })
                .checked();
            config.seed = seed;
            match run(config) {
                Ok(out) => rounds += out.trace.len(),
                Err(e) => failures.push(format!("{algorithm} seed {seed}: {e}")),
            }
        }
    }
    Outcome::new(
        failures,
        format!(
            "{} schedules, {rounds} checked rounds",
            4 * FUZZED_SCHEDULES_PER_ALGORITHM
        ),
    )
}

fn impossibility_demos() -> Outcome {
    let mut failures = Vec::new();
    for algorithm in [
        AlgorithmKind::CountingBackoff,
        AlgorithmKind::QueueBackoff,
        AlgorithmKind::QuadrupleRound,
    ] {
        let demo = demo_two_activating(algorithm, 1_000).unwrap();
        if demo.verdict.unheard != 2 || !demo.verdict.pass {
            failures.push(format!(
                "two-activating {algorithm}: {} unheard",
                demo.verdict.unheard
            ));
        }
    }
    let ack = demo_ack_unfair(rate(1, 2), 2, 1_000).unwrap();
    if ack.verdict.unheard != 2 || !ack.verdict.pass {
        failures.push(format!("ack-unfair: {} unheard", ack.verdict.unheard));
    }
    let backlogs = std::thread::scope(|s| {
        let handles: Vec<_> = AlgorithmKind::ALL
            .iter()
            .map(|&algorithm| {
                s.spawn(move || {
                    (
                        algorithm,
                        build_rate1_execution(algorithm, 1, 10_000, false),
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap())
            .collect::<Vec<_>>()
    });
    let mut seen = Vec::new();
    for (algorithm, exec) in backlogs {
        match exec {
            Ok(exec) => {
                let (early, late) = (exec.backlog_at(1_000), exec.backlog());
                seen.push(format!("{algorithm} {early}->{late}"));
                if !exec.backlog_non_decreasing() || late <= early {
                    failures.push(format!("rate-one {algorithm}: backlog {early} -> {late}"));
                }
            }
            Err(e) => failures.push(format!("rate-one {algorithm}: {e}")),
        }
    }
    Outcome::new(failures, format!("rate-one backlog {}", seen.join(", ")))
}

/// Every window `[s, e]` holds at most `floor(rho (e - s + 1) + b)` packets.
fn brute_force_admits(counts: &[u64], p: i64, q: i64, b: u32) -> bool {
    let (p, q, b) = (i128::from(p), i128::from(q), i128::from(b));
    (0..counts.len()).all(|s| {
        (s..counts.len()).all(|e| {
            let sum: i128 = counts[s..=e].iter().map(|&c| i128::from(c)).sum();
            sum * q <= p * (e - s + 1) as i128 + b * q
        })
    })
}

fn bucket_matches_windows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let (mut accepted, mut rejected) = (0, 0);
    for _ in 0..BUCKET_SCHEDULES {
        let p = rng.gen_range(1..=8);
        let b = rng.gen_range(1..=8);
        let t = AdversaryType::new(rate(p, 8), b).unwrap();
        let len = rng.gen_range(1..=40);
        let density = rng.gen_range(0.05..0.6);
        let counts: Vec<u64> = (0..len)
            .map(|_| {
                if rng.gen_bool(density) {
                    rng.gen_range(1..=u64::from(b) + 1)
                } else {
                    0
                }
            })
            .collect();
        let bucket = replay_through_bucket(&counts, &t).is_ok();
        let oracle = brute_force_admits(&counts, p, 8, b);
        if oracle {
            accepted += 1;
        } else {
            rejected += 1;
        }
        if bucket != oracle && failures.len() < 5 {
            failures.push(format!("{t} {counts:?}: bucket {bucket}, windows {oracle}"));
        }
    }
    Outcome::new(
        failures,
        format!("{accepted} admitted, {rejected} rejected"),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "double-segment golden traces",
            limit: Duration::from_secs(1),
            run: golden_double_phases,
        },
        Criterion {
            id: 2,
            name: "counting-backoff latency and queue bounds",
            limit: Duration::from_secs(10),
            run: counting_backoff_bounds_hold,
        },
        Criterion {
            id: 3,
            name: "counting-backoff unfair at rate 1/3",
            limit: Duration::from_secs(1),
            run: counting_backoff_unfair_at_one_third,
        },
        Criterion {
            id: 4,
            name: "quadruple-round latency and queue bounds",
            limit: Duration::from_secs(10),
            run: quadruple_bounds_hold,
        },
        Criterion {
            id: 5,
            name: "quadruple-round double-phase lengths",
            limit: Duration::from_secs(5),
            run: double_phase_property,
        },
        Criterion {
            id: 6,
            name: "queue-backoff latency and queue bounds",
            limit: Duration::from_secs(10),
            run: queue_backoff_bounds_hold,
        },
        Criterion {
            id: 7,
            name: "invariants on fuzzed schedules",
            limit: Duration::from_secs(60),
            run: fuzzed_invariants,
        },
        Criterion {
            id: 8,
            name: "impossibility demonstrations",
            limit: Duration::from_secs(10),
            run: impossibility_demos,
        },
        Criterion {
            id: 9,
            name: "token bucket against window oracle",
            limit: Duration::from_secs(30),
            run: bucket_matches_windows,
        },
    ];
    let mut all = true;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = outcome.pass && in_time;
        all &= pass;
        println!(
            "criterion {} {} {}: {} [{:.2}s of {}s{}]",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            outcome.detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time" },
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
