//! The embedded jump chain of a spatial birth-and-death process.
//!
//! From state `η` the chain kills `x ∈ η` with probability `d(x, η) / (B+D)(η)`
//! and otherwise adds a point drawn from `b(·, η) / B(η)`. Every step changes
//! the configuration by exactly one point.

use std::fmt;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{ConfigError, Configuration, Point, RhoBall};
use crate::rate_models::{total_rate, RateError, RateModel, Region};
use crate::stats::{run_with_workers, wilson_interval, Estimate, StreamSeed, Z_95};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("point {0:?} is not in the configuration")]
    NotAMember(Point),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("replaying the trajectory diverged at step {0}")]
    ReplayMismatch(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    Birth(Point),
    Death(Point),
}

impl EventKind {
    pub fn point(&self) -> &Point {
        match self {
            EventKind::Birth(p) | EventKind::Death(p) => p,
        }
    }

    pub fn is_birth(&self) -> bool {
        matches!(self, EventKind::Birth(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEvent {
    /// Index of the state produced by this event (1 for the first step).
    pub step_index: usize,
    pub kind: EventKind,
}

/// Sets of Lebesgue-Poisson measure zero whose nullity is certain analytically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "predicate", rename_all = "snake_case")]
pub enum NullPredicate {
    /// Some point sits exactly at `point`.
    ExactPoint { point: Point },
    /// Some point has coordinate `axis` exactly equal to `offset`.
    OnHyperplane { axis: usize, offset: f64 },
    /// Two points are exactly at Euclidean distance one.
    UnitDistancePair,
}

impl NullPredicate {
    pub fn holds(&self, eta: &Configuration) -> bool {
        match self {
            NullPredicate::ExactPoint { point } => eta.contains(point),
            NullPredicate::OnHyperplane { axis, offset } => eta
                .iter()
                .any(|p| p.coords().get(*axis).is_some_and(|c| c == offset)),
            NullPredicate::UnitDistancePair => {
                let pts = eta.points();
                (0..pts.len()).any(|i| (i + 1..pts.len()).any(|j| pts[i].distance(&pts[j]) == 1.0))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            NullPredicate::ExactPoint { point } => format!("exact_point{point:?}"),
            NullPredicate::OnHyperplane { axis, offset } => {
                format!("hyperplane[x{axis}={offset:?}]")
            }
            NullPredicate::UnitDistancePair => "unit_distance_pair".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetPiece {
    /// `{∅}`.
    Empty,
    Ball {
        ball: RhoBall,
    },
    Null {
        null: NullPredicate,
    },
    /// Every configuration.
    Any,
}

impl TargetPiece {
    pub fn contains(&self, eta: &Configuration) -> bool {
        match self {
            TargetPiece::Empty => eta.is_empty(),
            TargetPiece::Ball { ball } => ball.contains(eta),
            TargetPiece::Null { null } => null.holds(eta),
            TargetPiece::Any => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TargetPiece::Empty => "{∅}".into(),
            TargetPiece::Ball { ball } => format!("B_rho({},{:?})", ball.center(), ball.radius()),
            TargetPiece::Null { null } => null.label(),
            TargetPiece::Any => "any".into(),
        }
    }
}

/// A finite union of target pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetSet {
    pub pieces: Vec<TargetPiece>,
}

impl TargetSet {
    pub fn new(pieces: Vec<TargetPiece>) -> Self {
        TargetSet { pieces }
    }

    pub fn single(piece: TargetPiece) -> Self {
        TargetSet {
            pieces: vec![piece],
        }
    }

    pub fn empty_config() -> Self {
        Self::single(TargetPiece::Empty)
    }

    pub fn ball(ball: RhoBall) -> Self {
        Self::single(TargetPiece::Ball { ball })
    }

    pub fn null(null: NullPredicate) -> Self {
        Self::single(TargetPiece::Null { null })
    }

    pub fn contains(&self, eta: &Configuration) -> bool {
        self.pieces.iter().any(|p| p.contains(eta))
    }

    pub fn label(&self) -> String {
        let labels: Vec<String> = self.pieces.iter().map(TargetPiece::label).collect();
        labels.join(" ∪ ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalReason {
    HitTarget,
    MaxSteps,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminalReason::HitTarget => write!(f, "hit_target"),
            TerminalReason::MaxSteps => write!(f, "max_steps"),
        }
    }
}

/// A recorded run: the initial state, the event list and the RNG stream.
/// Intermediate states are rebuilt from the events on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: Configuration,
    pub events: Vec<ChainEvent>,
    pub seed: StreamSeed,
    pub terminal_reason: TerminalReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// All states `ξ_0, ..., ξ_n`.
    pub fn states(&self) -> Result<Vec<Configuration>, ChainError> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut state = self.initial.clone();
        out.push(state.clone());
        for ev in &self.events {
            apply_event(&mut state, &ev.kind)
                .map_err(|_| ChainError::ReplayMismatch(ev.step_index))?;
            out.push(state.clone());
        }
        Ok(out)
    }

    pub fn final_state(&self) -> Result<Configuration, ChainError> {
        let mut state = self.initial.clone();
        for ev in &self.events {
            apply_event(&mut state, &ev.kind)
                .map_err(|_| ChainError::ReplayMismatch(ev.step_index))?;
        }
        Ok(state)
    }

    /// CSV dump, one event per line: `step,kind,x0,...,x{d-1}`.
    pub fn to_csv(&self) -> String {
        let d = self
            .events
            .first()
            .map(|e| e.kind.point().dim())
            .or(self.initial.dim())
            .unwrap_or(0);
        let mut out = String::from("step,kind");
        for i in 0..d {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for ev in &self.events {
            let kind = if ev.kind.is_birth() { "birth" } else { "death" };
            out.push_str(&format!("{},{kind}", ev.step_index));
            for c in ev.kind.point().coords() {
                out.push_str(&format!(",{c:?}"));
            }
            out.push('\n');
        }
        out
    }
}

fn apply_event(state: &mut Configuration, kind: &EventKind) -> Result<(), ()> {
    match kind {
        EventKind::Birth(p) => match state.insert(p.clone()) {
            Ok(true) => Ok(()),
            _ => Err(()),
        },
        EventKind::Death(p) => {
            if state.remove(p) {
                Ok(())
            } else {
                Err(())
            }
        }
    }
}

/// Advances `state` by one step of the chain, in place.
pub fn step_in_place<M: RateModel + ?Sized>(
    state: &mut Configuration,
    model: &M,
    rng: &mut dyn RngCore,
) -> Result<EventKind, ChainError> {
    let deaths = model.death_rates(state);
    let death_total: f64 = deaths.iter().sum();
    let total = model.total_birth_mass(state) + death_total;
    if !(total > 0.0 && total.is_finite()) {
        return Err(RateError::Degenerate(state.to_string()).into());
    }
    let u = rng.random::<f64>() * total;
    if u < death_total {
        let mut acc = 0.0;
        let mut victim = deaths.iter().rposition(|&d| d > 0.0).unwrap_or(0);
        for (i, d) in deaths.iter().enumerate() {
            acc += d;
            if u < acc {
                victim = i;
                break;
            }
        }
        let p = state.points()[victim].clone();
        state.remove(&p);
        Ok(EventKind::Death(p))
    } else {
        loop {
            let x = model.sample_birth_location(state, rng);
            // a birth on an existing point has probability zero; redraw
            if state.insert(x.clone())? {
                return Ok(EventKind::Birth(x));
            }
        }
    }
}

/// One step of the chain from `eta`.
pub fn step<M: RateModel + ?Sized>(
    eta: &Configuration,
    model: &M,
    step_index: usize,
    rng: &mut dyn RngCore,
) -> Result<(Configuration, ChainEvent), ChainError> {
    let mut next = eta.clone();
    let kind = step_in_place(&mut next, model, rng)?;
    Ok((next, ChainEvent { step_index, kind }))
}

/// `Q(η, {η \ {x}})`.
pub fn death_probability<M: RateModel + ?Sized>(
    eta: &Configuration,
    x: &Point,
    model: &M,
) -> Result<f64, ChainError> {
    if !eta.contains(x) {
        return Err(ChainError::NotAMember(x.clone()));
    }
    Ok(model.death_rate(x, eta) / total_rate(model, eta)?)
}

/// `Q(η, {η ∪ {x} : x ∈ U})`, with the numerical error of `∫_U b` when it is estimated.
pub fn birth_probability_region<M: RateModel + ?Sized>(
    eta: &Configuration,
    region: &Region,
    model: &M,
    rng: &mut dyn RngCore,
) -> Result<Estimate, ChainError> {
    let total = total_rate(model, eta)?;
    let mass = model.birth_mass_in(eta, region, rng)?;
    Ok(Estimate {
        value: mass.value / total,
        std_error: mass.std_error / total,
        samples: mass.samples,
    })
}

/// Runs the chain until it enters `target` at some step `n >= 1` or
/// `max_steps` steps have been taken. The initial state never counts as a hit.
pub fn simulate<M: RateModel + ?Sized>(
    initial: &Configuration,
    model: &M,
    target: &TargetSet,
    max_steps: usize,
    seed: StreamSeed,
) -> Result<Trajectory, ChainError> {
    if max_steps == 0 {
        return Err(ChainError::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let mut rng = seed.rng();
    let mut state = initial.clone();
    let mut events = Vec::new();
    let mut terminal_reason = TerminalReason::MaxSteps;
    for n in 1..=max_steps {
        let kind = step_in_place(&mut state, model, &mut rng)?;
        events.push(ChainEvent {
            step_index: n,
            kind,
        });
        if target.contains(&state) {
            terminal_reason = TerminalReason::HitTarget;
            break;
        }
    }
    Ok(Trajectory {
        initial: initial.clone(),
        events,
        seed,
        terminal_reason,
    })
}

/// Re-runs a trajectory from its seed and checks that the same events come out.
pub fn replay<M: RateModel + ?Sized>(
    trajectory: &Trajectory,
    model: &M,
    target: &TargetSet,
) -> Result<Configuration, ChainError> {
    let again = simulate(
        &trajectory.initial,
        model,
        target,
        trajectory.events.len().max(1),
        trajectory.seed,
    )?;
    if let Some(i) = again
        .events
        .iter()
        .zip(&trajectory.events)
        .position(|(a, b)| a != b)
    {
        return Err(ChainError::ReplayMismatch(i + 1));
    }
    if again.events.len() != trajectory.events.len() {
        return Err(ChainError::ReplayMismatch(
            again.events.len().min(trajectory.events.len()),
        ));
    }
    again.final_state()
}

/// Step at which the chain first enters `target` (within `max_steps`), without
/// recording events.
pub fn first_hit<M: RateModel + ?Sized>(
    initial: &Configuration,
    model: &M,
    target: &TargetSet,
    max_steps: usize,
    seed: StreamSeed,
) -> Result<Option<usize>, ChainError> {
    let mut rng = seed.rng();
    let mut state = initial.clone();
    for n in 1..=max_steps {
        step_in_place(&mut state, model, &mut rng)?;
        if target.contains(&state) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingEstimate {
    pub hits: u64,
    pub replicas: u64,
    pub max_steps: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Replica indices that hit, capped at a few for reporting.
    pub first_hit_replicas: Vec<u64>,
}

const HIT_EXAMPLES: usize = 8;

/// Fraction of `replicas` independent runs that enter `target` within
/// `max_steps` steps, with a Wilson 95% interval. Replica `i` uses stream `i`
/// of `master_seed`, so the result does not depend on `workers`.
pub fn hitting_estimate<M: RateModel + ?Sized>(
    initial: &Configuration,
    target: &TargetSet,
    model: &M,
    max_steps: usize,
    replicas: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<HittingEstimate, ChainError> {
    if max_steps == 0 || replicas == 0 {
        return Err(ChainError::InvalidArgument(
            "max_steps and replicas must be at least 1".into(),
        ));
    }
    let outcomes: Vec<bool> = run_with_workers(workers, || {
        (0..replicas)
            .into_par_iter()
            .map(|i| {
                first_hit(
                    initial,
                    model,
                    target,
                    max_steps,
                    StreamSeed::new(master_seed, i),
                )
                .map(|h| h.is_some())
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let hits = outcomes.iter().filter(|&&h| h).count() as u64;
    let first_hit_replicas = outcomes
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .take(HIT_EXAMPLES)
        .map(|(i, _)| i as u64)
        .collect();
    let (ci_low, ci_high) = wilson_interval(hits, replicas, Z_95);
    Ok(HittingEstimate {
        hits,
        replicas,
        max_steps,
        estimate: hits as f64 / replicas as f64,
        ci_low,
        ci_high,
        first_hit_replicas,
    })
}
