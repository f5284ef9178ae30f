//! Sequential prediction: a forecaster and an adversary alternate for `T`
//! rounds, and calibration measures are scaled by `T` on the resulting
//! transcript.
//!
//! Both sides see only the history of past rounds. The threshold adversary
//! additionally holds a replica of a deterministic forecaster so it can
//! anticipate the next prediction.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basic::{binned_ece, ece, ece_q};
use crate::decision::cdl;
use crate::error::{Error, Result};
use crate::joint::{Atom, EmpiricalJoint};
use crate::weighted::smce;

/// One round: prediction and outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Round {
    pub p: f64,
    pub y: u8,
}

/// Rounds played so far.
pub type History = [Round];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Transcript {
    rounds: Vec<Round>,
}

impl Transcript {
    pub fn new(rounds: Vec<Round>) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::EmptyInput);
        }
        for r in &rounds {
            if !(r.p.is_finite() && (0.0..=1.0).contains(&r.p)) {
                return Err(Error::PredictionOutOfRange(r.p));
            }
            if r.y > 1 {
                return Err(Error::InvalidLabel(f64::from(r.y)));
            }
        }
        Ok(Self { rounds })
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Uniform joint over the first `t` rounds.
    pub fn prefix_joint(&self, t: usize) -> EmpiricalJoint {
        let t = t.clamp(1, self.rounds.len());
        let w = 1.0 / t as f64;
        EmpiricalJoint::from_atoms(
            self.rounds[..t].iter().map(|r| Atom::new(r.p, r.y, w)).collect(),
        )
        .expect("validated rounds")
    }

    /// Uniform joint over all rounds.
    pub fn joint(&self) -> EmpiricalJoint {
        self.prefix_joint(self.rounds.len())
    }
}

pub trait Forecaster {
    fn name(&self) -> String;
    /// Prediction for the next round. Deterministic forecasters ignore `rng`.
    fn predict(&self, history: &History, rng: &mut ChaCha8Rng) -> f64;
    fn is_randomized(&self) -> bool;
    fn clone_box(&self) -> Box<dyn Forecaster>;
}

pub trait Adversary {
    fn name(&self) -> String;
    /// Outcome of the next round, chosen from the history alone.
    fn respond(&mut self, history: &History, rng: &mut ChaCha8Rng) -> Result<u8>;
    /// Called once before the episode with the opposing forecaster.
    fn bind(&mut self, _forecaster: &dyn Forecaster) -> Result<()> {
        Ok(())
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")))
    }
}

/// Always predicts `c`.
#[derive(Debug, Clone)]
pub struct Constant(f64);

impl Constant {
    pub fn new(c: f64) -> Result<Self> {
        check_unit("constant prediction", c)?;
        Ok(Self(c))
    }
}

impl Forecaster for Constant {
    fn name(&self) -> String {
        format!("constant:{}", self.0)
    }
    fn predict(&self, _: &History, _: &mut ChaCha8Rng) -> f64 {
        self.0
    }
    fn is_randomized(&self) -> bool {
        false
    }
    fn clone_box(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

/// `(a + sum y) / (a + b + t - 1)`: the posterior mean under a Beta(a, b) prior.
#[derive(Debug, Clone)]
pub struct RunningMean {
    a: f64,
    b: f64,
}

impl RunningMean {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0 && (a + b).is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "running mean prior ({a}, {b}) needs a, b >= 0 and a + b > 0"
            )));
        }
        Ok(Self { a, b })
    }

    fn mean(&self, history: &History) -> f64 {
        let ones = history.iter().filter(|r| r.y == 1).count() as f64;
        ((self.a + ones) / (self.a + self.b + history.len() as f64)).clamp(0.0, 1.0)
    }
}

impl Forecaster for RunningMean {
    fn name(&self) -> String {
        format!("running_mean:{}:{}", self.a, self.b)
    }
    fn predict(&self, history: &History, _: &mut ChaCha8Rng) -> f64 {
        self.mean(history)
    }
    fn is_randomized(&self) -> bool {
        false
    }
    fn clone_box(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

/// Running mean rounded at random to one of the two nearest points of the
/// `1/m` grid, so that the rounding is unbiased.
#[derive(Debug, Clone)]
pub struct GridRandom {
    m: usize,
    base: RunningMean,
}

impl GridRandom {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_prior(m, 1.0, 1.0)
    }

    pub fn with_prior(m: usize, a: f64, b: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        Ok(Self {
            m,
            base: RunningMean::new(a, b)?,
        })
    }
}

impl Forecaster for GridRandom {
    fn name(&self) -> String {
        format!("grid_random:{}", self.m)
    }
    fn predict(&self, history: &History, rng: &mut ChaCha8Rng) -> f64 {
        let scaled = self.base.mean(history) * self.m as f64;
        let lower = scaled.floor();
        let up = rng.random::<f64>() < scaled - lower;
        let k = if up { lower + 1.0 } else { lower };
        (k / self.m as f64).min(1.0)
    }
    fn is_randomized(&self) -> bool {
        true
    }
    fn clone_box(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

/// Plays the same outcome every round.
#[derive(Debug, Clone)]
pub struct Fixed(pub u8);

impl Adversary for Fixed {
    fn name(&self) -> String {
        if self.0 == 1 { "ones" } else { "zeros" }.into()
    }
    fn respond(&mut self, _: &History, _: &mut ChaCha8Rng) -> Result<u8> {
        Ok(self.0)
    }
}

/// Independent Bernoulli(q) outcomes from the adversary's own stream.
#[derive(Debug, Clone)]
pub struct Bernoulli(f64);

impl Bernoulli {
    pub fn new(q: f64) -> Result<Self> {
        check_unit("Bernoulli parameter", q)?;
        Ok(Self(q))
    }
}

impl Adversary for Bernoulli {
    fn name(&self) -> String {
        format!("bernoulli:{}", self.0)
    }
    fn respond(&mut self, _: &History, rng: &mut ChaCha8Rng) -> Result<u8> {
        Ok(u8::from(rng.random::<f64>() < self.0))
    }
}

/// 1, 0, 1, 0, ...
#[derive(Debug, Clone)]
pub struct Alternating;

impl Adversary for Alternating {
    fn name(&self) -> String {
        "alternating".into()
    }
    fn respond(&mut self, history: &History, _: &mut ChaCha8Rng) -> Result<u8> {
        Ok(u8::from(history.len().is_multiple_of(2)))
    }
}

/// Replays a deterministic forecaster on the history and plays 1 exactly
/// when the anticipated prediction is below 1/2.
#[derive(Default)]
pub struct Threshold {
    replica: Option<Box<dyn Forecaster>>,
}

impl Threshold {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Adversary for Threshold {
    fn name(&self) -> String {
        "threshold".into()
    }

    fn bind(&mut self, forecaster: &dyn Forecaster) -> Result<()> {
        if forecaster.is_randomized() {
            return Err(Error::Contract(format!(
                "threshold adversary needs a deterministic forecaster, got {}",
                forecaster.name()
            )));
        }
        self.replica = Some(forecaster.clone_box());
        Ok(())
    }

    fn respond(&mut self, history: &History, _: &mut ChaCha8Rng) -> Result<u8> {
        let replica = self
            .replica
            .as_ref()
            .ok_or_else(|| Error::Contract("threshold adversary was never bound".into()))?;
        // deterministic forecasters ignore the stream
        let p = replica.predict(history, &mut ChaCha8Rng::seed_from_u64(0));
        Ok(u8::from(p < 0.5))
    }
}

/// Plays `rounds` rounds. Forecaster and adversary draw from separate streams
/// split off one seeded generator.
pub fn run(
    forecaster: &dyn Forecaster,
    adversary: &mut dyn Adversary,
    rounds: usize,
    seed: u64,
) -> Result<Transcript> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("need at least one round".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut forecaster_rng = ChaCha8Rng::from_rng(&mut master);
    let mut adversary_rng = ChaCha8Rng::from_rng(&mut master);
    adversary.bind(forecaster)?;
    let mut history: Vec<Round> = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let p = forecaster.predict(&history, &mut forecaster_rng);
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::StrategyOutOfRange(p));
        }
        let y = adversary.respond(&history, &mut adversary_rng)?;
        if y > 1 {
            return Err(Error::StrategyOutOfRange(f64::from(y)));
        }
        history.push(Round { p, y });
    }
    Transcript::new(history)
}

/// Measures available on transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceMeasure {
    Ece,
    Ece2,
    Smce,
    Cdl,
    Binned(usize),
}

impl SequenceMeasure {
    /// The measure on a distribution, before scaling by `T`.
    pub fn evaluate(&self, joint: &EmpiricalJoint) -> Result<f64> {
        match *self {
            Self::Ece => Ok(ece(joint)),
            Self::Ece2 => ece_q(joint, 2.0),
            Self::Smce => Ok(smce(joint)),
            Self::Cdl => Ok(cdl(joint)),
            Self::Binned(b) => binned_ece(joint, b),
        }
    }
}

impl FromStr for SequenceMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ece" => Ok(Self::Ece),
            "ece2" => Ok(Self::Ece2),
            "smce" => Ok(Self::Smce),
            "cdl" => Ok(Self::Cdl),
            _ => match s.strip_prefix("binned:").map(str::parse::<usize>) {
                Some(Ok(b)) if b > 0 => Ok(Self::Binned(b)),
                _ => Err(Error::UnknownMeasure(s.to_string())),
            },
        }
    }
}

impl fmt::Display for SequenceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ece => f.write_str("ece"),
            Self::Ece2 => f.write_str("ece2"),
            Self::Smce => f.write_str("smce"),
            Self::Cdl => f.write_str("cdl"),
            Self::Binned(b) => write!(f, "binned:{b}"),
        }
    }
}

/// `T` times the measure of the uniform joint over the transcript.
pub fn sequence_measure(transcript: &Transcript, measure: SequenceMeasure) -> Result<f64> {
    Ok(transcript.len() as f64 * measure.evaluate(&transcript.joint())?)
}

/// Default stride for prefix curves: about a hundred points per episode.
pub fn default_stride(rounds: usize) -> usize {
    (rounds / 100).max(1)
}

/// `(t, t * measure(first t rounds))` at every `stride`-th round and at the end.
pub fn prefix_curve(
    transcript: &Transcript,
    measure: SequenceMeasure,
    stride: usize,
) -> Result<Vec<(usize, f64)>> {
    let stride = stride.max(1);
    let n = transcript.len();
    let mut ts: Vec<usize> = (stride..=n).step_by(stride).collect();
    if ts.last() != Some(&n) {
        ts.push(n);
    }
    ts.into_iter()
        .map(|t| Ok((t, t as f64 * measure.evaluate(&transcript.prefix_joint(t))?)))
        .collect()
}

/// Parses `constant:<c>`, `running_mean[:<a>:<b>]` or `grid_random:<m>`.
pub fn parse_forecaster(spec: &str) -> Result<Box<dyn Forecaster>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad number `{s}` in `{spec}`")))
    };
    match parts.as_slice() {
        ["constant", c] => Ok(Box::new(Constant::new(num(c)?)?)),
        ["running_mean"] => Ok(Box::new(RunningMean::new(1.0, 1.0)?)),
        ["running_mean", a, b] => Ok(Box::new(RunningMean::new(num(a)?, num(b)?)?)),
        ["grid_random", m] => {
            let m = m
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad grid size in `{spec}`")))?;
            Ok(Box::new(GridRandom::new(m)?))
        }
        _ => Err(Error::InvalidParameter(format!("unknown forecaster `{spec}`"))),
    }
}

/// Parses `ones`, `zeros`, `bernoulli:<q>`, `threshold` or `alternating`.
pub fn parse_adversary(spec: &str) -> Result<Box<dyn Adversary>> {
    match spec.split(':').collect::<Vec<_>>().as_slice() {
        ["ones"] => Ok(Box::new(Fixed(1))),
        ["zeros"] => Ok(Box::new(Fixed(0))),
        ["threshold"] => Ok(Box::new(Threshold::new())),
        ["alternating"] => Ok(Box::new(Alternating)),
        ["bernoulli", q] => {
            let q = q
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number in `{spec}`")))?;
            Ok(Box::new(Bernoulli::new(q)?))
        }
        _ => Err(Error::InvalidParameter(format!("unknown adversary `{spec}`"))),
    }
}
