//! Type-erased runs driven by a [`RunConfig`].

use crate::adversary::Strategy;
use crate::algorithms::quadruple_round::double_phase_lengths;
use crate::algorithms::{
    AckPersistent, AlgorithmKind, CountingBackoff, PhaseRecord, QuadrupleRound, QueueBackoff,
};
use crate::error::Result;
use crate::invariants::Audit;
use crate::model::RunConfig;

use super::metrics::{compute_metrics, Metrics};
use super::trace::RoundRecord;
use super::World;

/// A world with its algorithm erased.
pub trait Engine: Send {
    fn step(&mut self, strategy: &mut dyn Strategy) -> Result<()>;
    /// The next round to execute.
    fn round(&self) -> u64;
    fn trace(&self) -> &[RoundRecord];
    fn phases(&self) -> &[PhaseRecord];
    fn active_stations(&self) -> usize;
    fn clone_box(&self) -> Box<dyn Engine>;
    fn into_parts(self: Box<Self>) -> (Vec<RoundRecord>, Vec<PhaseRecord>);
}

impl<P> Engine for World<P>
where
    P: Audit + Send + 'static,
    P::State: Send,
{
    fn step(&mut self, strategy: &mut dyn Strategy) -> Result<()> {
        World::step(self, strategy)
    }

    fn round(&self) -> u64 {
        World::round(self)
    }

    fn trace(&self) -> &[RoundRecord] {
        World::trace(self)
    }

    fn phases(&self) -> &[PhaseRecord] {
        World::phases(self)
    }

    fn active_stations(&self) -> usize {
        self.stations().count()
    }

    fn clone_box(&self) -> Box<dyn Engine> {
        Box::new(self.clone())
    }

    fn into_parts(self: Box<Self>) -> (Vec<RoundRecord>, Vec<PhaseRecord>) {
        World::into_parts(*self)
    }
}

/// A fresh world for the configured algorithm, channel and adversary.
pub fn new_engine(config: &RunConfig) -> Box<dyn Engine> {
    let (t, mode, checked) = (
        config.adversary_type,
        config.channel_mode,
        config.invariant_checks,
    );
    match config.algorithm {
        AlgorithmKind::CountingBackoff => Box::new(World::new(CountingBackoff, t, mode, checked)),
        AlgorithmKind::QueueBackoff => Box::new(World::new(
            QueueBackoff::new(config.join_rule),
            t,
            mode,
            checked,
        )),
        AlgorithmKind::QuadrupleRound => {
            Box::new(World::new(QuadrupleRound::default(), t, mode, checked))
        }
        AlgorithmKind::AckPersistent => Box::new(World::new(AckPersistent, t, mode, checked)),
    }
}

pub struct Simulation {
    pub config: RunConfig,
    engine: Box<dyn Engine>,
    strategy: Box<dyn Strategy>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let strategy = config.strategy.build(&config.adversary_type, config.seed);
        Ok(Self::assemble(config, strategy))
    }

    /// A run driven by a strategy that is not expressible in the config.
    /// The config's own strategy entry is ignored.
    pub fn with_strategy(config: RunConfig, strategy: Box<dyn Strategy>) -> Result<Self> {
        let mut probe = config.clone();
        probe.strategy = Default::default();
        probe.validate()?;
        Ok(Self::assemble(config, strategy))
    }

    fn assemble(config: RunConfig, strategy: Box<dyn Strategy>) -> Self {
        Simulation {
            engine: new_engine(&config),
            config,
            strategy,
        }
    }

    pub fn step(&mut self) -> Result<()> {
        self.engine.step(self.strategy.as_mut())
    }

    /// Runs until `round` rounds have been executed.
    pub fn run_until(&mut self, round: u64) -> Result<()> {
        while self.engine.round() <= round {
            self.step()?;
        }
        Ok(())
    }

    pub fn run_to_horizon(&mut self) -> Result<()> {
        self.run_until(self.config.horizon)
    }

    pub fn trace(&self) -> &[RoundRecord] {
        self.engine.trace()
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        self.engine.phases()
    }

    pub fn active_stations(&self) -> usize {
        self.engine.active_stations()
    }

    pub fn finish(self) -> RunOutput {
        let (trace, phases) = self.engine.into_parts();
        RunOutput {
            metrics: compute_metrics(&trace),
            config: self.config,
            trace,
            phases,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub trace: Vec<RoundRecord>,
    pub phases: Vec<PhaseRecord>,
    pub metrics: Metrics,
}

impl RunOutput {
    pub fn double_phase_lengths(&self) -> Vec<u64> {
        double_phase_lengths(&self.phases)
    }
}

/// Runs `config` to its horizon.
pub fn run(config: RunConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_horizon()?;
    Ok(sim.finish())
}
