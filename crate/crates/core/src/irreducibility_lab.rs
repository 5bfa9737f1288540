//! Experiments that exercise both directions of the hitting characterization:
//! the chain reaches every λ-positive target from every start, and it does not
//! reach the λ-null ones.
//!
//! Every case runs on its own seed derived from the report's master seed, so a
//! single row can be re-run from the CSV alone.

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config_space::{Configuration, Point, RhoBall};
use crate::embedded_chain::{
    hitting_estimate, simulate, ChainError, HittingEstimate, NullPredicate, TargetPiece, TargetSet,
    Trajectory,
};
use crate::lebesgue_poisson::{
    lp_measure_estimate, sample_poisson_config, BoxRegion, MeasureError,
};
use crate::path_machinery::{build_path, corridor_prob_lower_bound, PathError};
use crate::rate_models::RateModel;
use crate::stats::{derive_seed, run_with_workers, StreamSeed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("target {0} is not certified to have positive Lebesgue-Poisson measure")]
    NotPositive(String),
    #[error("target {0} is not in the curated library of λ-null predicates")]
    NotNull(String),
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: usize,
    pub start: String,
    pub target: String,
    pub max_steps: usize,
    pub replicas: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub certified_bound: Option<f64>,
    pub verdict: Verdict,
    /// Master seed of the case: replica `i` ran on stream `i` of it.
    pub case_seed: u64,
}

impl ReportRow {
    fn from_estimate(
        case: usize,
        start: &Configuration,
        target: String,
        est: &HittingEstimate,
        certified_bound: Option<f64>,
        verdict: Verdict,
        case_seed: u64,
    ) -> Self {
        ReportRow {
            case,
            start: start.to_string(),
            target,
            max_steps: est.max_steps,
            replicas: est.replicas,
            hits: est.hits,
            estimate: est.estimate,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            certified_bound,
            verdict,
            case_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub model_fingerprint: String,
    pub master_seed: u64,
    pub rows: Vec<ReportRow>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    /// Trajectories that contradict the expected outcome, for replay.
    pub failures: Vec<Trajectory>,
}

pub const CSV_HEADER: [&str; 14] = [
    "experiment",
    "case",
    "start",
    "target",
    "max_steps",
    "replicas",
    "hits",
    "estimate",
    "ci_low",
    "ci_high",
    "certified_bound",
    "verdict",
    "case_seed",
    "model",
];

impl ExperimentReport {
    fn new(
        experiment: &str,
        model: &dyn RateModel,
        master_seed: u64,
        rows: Vec<ReportRow>,
    ) -> Self {
        let verdict = Verdict::from_bool(rows.iter().all(|r| r.verdict.passed()));
        ExperimentReport {
            experiment: experiment.to_string(),
            model_fingerprint: fingerprint_hash(model),
            master_seed,
            rows,
            verdict,
            notes: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn write_csv_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        for r in &self.rows {
            w.write_record([
                self.experiment.clone(),
                r.case.to_string(),
                r.start.clone(),
                r.target.clone(),
                r.max_steps.to_string(),
                r.replicas.to_string(),
                r.hits.to_string(),
                format!("{:?}", r.estimate),
                format!("{:?}", r.ci_low),
                format!("{:?}", r.ci_high),
                r.certified_bound
                    .map(|b| format!("{b:?}"))
                    .unwrap_or_default(),
                r.verdict.to_string(),
                r.case_seed.to_string(),
                self.model_fingerprint.clone(),
            ])?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        reports_to_csv(std::slice::from_ref(self))
    }

    /// Human-readable summary block.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {} ({} cases, model {}, seed {})\n",
            self.experiment,
            self.verdict,
            self.rows.len(),
            self.model_fingerprint,
            self.master_seed
        );
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        for r in self.rows.iter().filter(|r| !r.verdict.passed()) {
            out.push_str(&format!(
                "  FAIL case {}: start {} target {} hits {}/{}\n",
                r.case, r.start, r.target, r.hits, r.replicas
            ));
        }
        out
    }
}

/// All rows of several reports in one CSV document.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        r.write_csv_rows(&mut w).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Short stable hash of the model's parameters.
pub fn fingerprint_hash(model: &dyn RateModel) -> String {
    let digest = Sha256::digest(model.fingerprint().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn bounding_window(ball: &RhoBall) -> Result<BoxRegion, MeasureError> {
    let d = ball.center().dim().expect("ball centers are nonempty");
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in ball.center() {
        for (i, c) in p.coords().iter().enumerate() {
            lo[i] = lo[i].min(c - ball.radius());
            hi[i] = hi[i].max(c + ball.radius());
        }
    }
    BoxRegion::from_bounds(&lo, &hi)
}

const POSITIVITY_SAMPLES: u64 = 50_000;

/// Certifies `λ(target) > 0`: exact for `{∅}`, by Monte Carlo for balls.
pub fn certify_positive(piece: &TargetPiece, seed: StreamSeed) -> Result<f64, LabError> {
    match piece {
        TargetPiece::Empty => Ok(1.0),
        TargetPiece::Any => Ok(f64::INFINITY),
        TargetPiece::Ball { ball } => {
            let window = bounding_window(ball)?;
            let mut rng = seed.rng();
            let est = lp_measure_estimate(
                ball.layer(),
                &window,
                |c| ball.contains(c),
                POSITIVITY_SAMPLES,
                &mut rng,
            )?;
            if est.value > 0.0 {
                Ok(est.value)
            } else {
                Err(LabError::NotPositive(piece.label()))
            }
        }
        TargetPiece::Null { .. } => Err(LabError::NotPositive(piece.label())),
    }
}

/// Irreducibility direction: every (start, target) pair must record at least
/// one hit, i.e. a Wilson 95% lower bound above zero.
#[allow(clippy::too_many_arguments)]
pub fn positive_measure_experiment<M: RateModel>(
    model: &M,
    targets: &[TargetPiece],
    starts: &[Configuration],
    max_steps: usize,
    replicas: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<ExperimentReport, LabError> {
    let mut notes = Vec::new();
    for (j, t) in targets.iter().enumerate() {
        let mass = certify_positive(
            t,
            StreamSeed::new(derive_seed(master_seed, u64::MAX), j as u64),
        )?;
        notes.push(format!("λ({}) ≈ {mass:?}", t.label()));
    }
    let cases: Vec<(usize, &Configuration, &TargetPiece)> = starts
        .iter()
        .flat_map(|s| targets.iter().map(move |t| (s, t)))
        .enumerate()
        .map(|(i, (s, t))| (i, s, t))
        .collect();
    let rows = run_with_workers(workers, || {
        cases
            .par_iter()
            .map(|&(case, start, piece)| {
                let case_seed = derive_seed(master_seed, case as u64);
                let target = TargetSet::single(piece.clone());
                let est =
                    hitting_estimate(start, &target, model, max_steps, replicas, case_seed, None)?;
                let verdict = Verdict::from_bool(est.ci_low > 0.0);
                Ok(ReportRow::from_estimate(
                    case,
                    start,
                    piece.label(),
                    &est,
                    None,
                    verdict,
                    case_seed,
                ))
            })
            .collect::<Result<Vec<_>, LabError>>()
    })?;
    let mut report = ExperimentReport::new("positive_measure", model, master_seed, rows);
    report.notes = notes;
    Ok(report)
}

/// Maximality direction, by simulation: no trajectory may enter a null target.
pub fn null_set_experiment<M: RateModel>(
    model: &M,
    null_targets: &[NullPredicate],
    starts: &[Configuration],
    max_steps: usize,
    replicas: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<ExperimentReport, LabError> {
    let cases: Vec<(usize, &Configuration, &NullPredicate)> = starts
        .iter()
        .flat_map(|s| null_targets.iter().map(move |t| (s, t)))
        .enumerate()
        .map(|(i, (s, t))| (i, s, t))
        .collect();
    let results = run_with_workers(workers, || {
        cases
            .par_iter()
            .map(|&(case, start, pred)| {
                let case_seed = derive_seed(master_seed, case as u64);
                let target = TargetSet::null(pred.clone());
                let est =
                    hitting_estimate(start, &target, model, max_steps, replicas, case_seed, None)?;
                let failure = match est.first_hit_replicas.first() {
                    Some(&i) => Some(simulate(
                        start,
                        model,
                        &target,
                        max_steps,
                        StreamSeed::new(case_seed, i),
                    )?),
                    None => None,
                };
                let verdict = Verdict::from_bool(est.hits == 0);
                let row = ReportRow::from_estimate(
                    case,
                    start,
                    pred.label(),
                    &est,
                    None,
                    verdict,
                    case_seed,
                );
                Ok((row, failure))
            })
            .collect::<Result<Vec<_>, LabError>>()
    })?;
    let (rows, failures): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut report = ExperimentReport::new("null_set", model, master_seed, rows);
    report.failures = failures.into_iter().flatten().collect();
    if null_targets.is_empty() {
        report.notes.push("no null targets: vacuous pass".into());
    }
    Ok(report)
}

/// Whether `Q(η, A) > 0` for `A = {ζ : predicate(ζ)}`, decided analytically.
///
/// A death reaches `A` iff removing some point with positive death rate leaves
/// a configuration satisfying the predicate. Births are absolutely continuous,
/// and adding a point only creates a new witness on a Lebesgue-null set of
/// locations, so a birth reaches `A` with positive probability iff `η` already
/// satisfies the predicate and `B(η) > 0`.
pub fn one_step_reaches<M: RateModel + ?Sized>(
    model: &M,
    eta: &Configuration,
    predicate: &NullPredicate,
) -> bool {
    let by_birth = predicate.holds(eta) && model.total_birth_mass(eta) > 0.0;
    by_birth
        || eta
            .iter()
            .zip(model.death_rates(eta))
            .any(|(x, d)| d > 0.0 && predicate.holds(&eta.without(x)))
}

/// Checks `λ{η : Q(η, A) > 0} = 0` on sampled states: each state is classified
/// by [`one_step_reaches`], and any positive state fails the experiment.
pub fn one_step_null_preservation<M: RateModel>(
    model: &M,
    target: &TargetSet,
    states: &[Configuration],
    master_seed: u64,
) -> Result<ExperimentReport, LabError> {
    let predicates = target
        .pieces
        .iter()
        .map(|p| match p {
            TargetPiece::Null { null } => Ok(null),
            other => Err(LabError::NotNull(other.label())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (case, pred) in predicates.into_iter().enumerate() {
        let positive: Vec<usize> = states
            .par_iter()
            .enumerate()
            .filter(|(_, s)| one_step_reaches(model, s, pred))
            .map(|(i, _)| i)
            .collect();
        for &i in positive.iter().take(4) {
            notes.push(format!(
                "{}: Q(η, A) > 0 at state {}",
                pred.label(),
                states[i]
            ));
        }
        let n = states.len() as u64;
        let hits = positive.len() as u64;
        rows.push(ReportRow {
            case,
            start: format!("{n} sampled states"),
            target: pred.label(),
            max_steps: 1,
            replicas: n,
            hits,
            estimate: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
            ci_low: 0.0,
            ci_high: 0.0,
            certified_bound: None,
            verdict: Verdict::from_bool(hits == 0),
            case_seed: master_seed,
        });
    }
    let mut report = ExperimentReport::new("one_step_null", model, master_seed, rows);
    report.notes = notes;
    Ok(report)
}

/// Poisson draws used as generic (λ-typical) states.
pub fn poisson_states(
    count: usize,
    intensity: f64,
    window: &BoxRegion,
    rng: &mut dyn RngCore,
) -> Result<Vec<Configuration>, LabError> {
    (0..count)
        .map(|_| sample_poisson_config(intensity, window, rng).map_err(LabError::from))
        .collect()
}

/// End-to-end run of the constructive argument: build a path from `∅` to
/// `beta`, certify a corridor bound for it, then estimate the probability of
/// entering `B_ρ(beta, a)` from `∅` within `m + 2|beta| + n_extra` steps.
///
/// The corridor radius is `a` when `a < r/4`, otherwise `r/8`; the corridor
/// ball is then inside the target ball, so the bound still applies.
pub fn theorem_pipeline<M: RateModel>(
    model: &M,
    beta: &Configuration,
    a: f64,
    n_extra: usize,
    replicas: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<ExperimentReport, LabError> {
    if beta.is_empty() {
        return Err(LabError::InvalidArgument("beta must be nonempty".into()));
    }
    let k = model.constants();
    let path = build_path(beta, k.r, &k.x_empty);
    let corridor = if a < k.r / 4.0 { a } else { k.r / 8.0 };
    let bound = corridor_prob_lower_bound(&path, corridor, model)?;
    let ball =
        RhoBall::new(beta.clone(), a).map_err(|e| LabError::InvalidArgument(e.to_string()))?;
    let steps = path.len() + 2 * beta.len() + n_extra;
    let case_seed = derive_seed(master_seed, 0);
    let empty = Configuration::empty();
    let est = hitting_estimate(
        &empty,
        &TargetSet::ball(ball.clone()),
        model,
        steps,
        replicas,
        case_seed,
        workers,
    )?;
    let verdict = Verdict::from_bool(est.ci_high >= bound && est.ci_low > 0.0);
    let row = ReportRow::from_estimate(
        0,
        &empty,
        TargetPiece::Ball { ball }.label(),
        &est,
        Some(bound),
        verdict,
        case_seed,
    );
    let mut report = ExperimentReport::new("theorem_pipeline", model, master_seed, vec![row]);
    report.notes.push(format!(
        "path length {} to {}, corridor radius {corridor:?}",
        path.len(),
        beta
    ));
    Ok(report)
}

/// Extinction reachability: the chain started at `start` must reach `∅`.
pub fn extinction_experiment<M: RateModel>(
    model: &M,
    start: &Configuration,
    max_steps: usize,
    replicas: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<ExperimentReport, LabError> {
    let case_seed = derive_seed(master_seed, 0);
    let est = hitting_estimate(
        start,
        &TargetSet::empty_config(),
        model,
        max_steps,
        replicas,
        case_seed,
        workers,
    )?;
    let verdict = Verdict::from_bool(est.hits > 0);
    let row = ReportRow::from_estimate(0, start, "{∅}".into(), &est, None, verdict, case_seed);
    Ok(ExperimentReport::new(
        "extinction",
        model,
        master_seed,
        vec![row],
    ))
}

/// Sizes of the default lab suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSettings {
    pub positive_max_steps: usize,
    pub positive_replicas: u64,
    pub poisson_starts: usize,
    pub poisson_intensity: f64,
    pub null_max_steps: usize,
    /// Null-set trajectories per predicate, split evenly across the starts.
    pub null_trajectories: u64,
    pub one_step_states: usize,
    pub pipeline_extra_steps: usize,
    pub pipeline_replicas: u64,
    pub extinction_start_size: usize,
    pub extinction_max_steps: usize,
    pub extinction_replicas: u64,
}

impl Default for LabSettings {
    fn default() -> Self {
        LabSettings {
            positive_max_steps: 1_000,
            positive_replicas: 10_000,
            poisson_starts: 3,
            poisson_intensity: 1.0,
            null_max_steps: 100,
            null_trajectories: 100_000,
            one_step_states: 10_000,
            pipeline_extra_steps: 20,
            pipeline_replicas: 10_000,
            extinction_start_size: 5,
            extinction_max_steps: 10_000,
            extinction_replicas: 1_000,
        }
    }
}

fn offset(base: &Point, delta: &[f64]) -> Point {
    let coords = base
        .coords()
        .iter()
        .enumerate()
        .map(|(i, c)| c + delta.get(i).copied().unwrap_or(0.0))
        .collect();
    Point::new(coords).expect("finite offset")
}

/// The default start states, targets and null predicates for a model.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultSuite {
    pub starts: Vec<Configuration>,
    pub positive_targets: Vec<TargetPiece>,
    pub null_predicates: Vec<NullPredicate>,
    /// A state containing the exact-point witness plus one extra point.
    pub witness_state: Configuration,
    pub pipeline_betas: Vec<Configuration>,
    pub extinction_start: Configuration,
}

pub fn default_suite(
    model: &dyn RateModel,
    settings: &LabSettings,
    master_seed: u64,
) -> Result<DefaultSuite, LabError> {
    let k = model.constants();
    let (x0, r) = (&k.x_empty, k.r);
    let d = k.dim;
    let at = |delta: &[f64]| offset(x0, delta);
    let cfg = |pts: Vec<Point>| Configuration::new(pts).expect("distinct default points");

    let window = BoxRegion::from_bounds(
        &x0.coords().iter().map(|c| c - 1.5 * r).collect::<Vec<_>>(),
        &x0.coords().iter().map(|c| c + 1.5 * r).collect::<Vec<_>>(),
    )?;
    let mut rng = StreamSeed::new(derive_seed(master_seed, 0xC0FFEE), 0).rng();
    let mut starts = vec![Configuration::empty(), cfg(vec![at(&[0.3 * r, 0.1 * r])])];
    starts.extend(poisson_states(
        settings.poisson_starts,
        settings.poisson_intensity,
        &window,
        &mut rng,
    )?);

    let quarter = r / 4.0;
    let ball = |pts: Vec<Point>| TargetPiece::Ball {
        ball: RhoBall::new(cfg(pts), quarter).expect("positive radius"),
    };
    let positive_targets = vec![
        TargetPiece::Empty,
        ball(vec![x0.clone()]),
        ball(vec![at(&[-0.3 * r, 0.0]), at(&[0.3 * r, 0.1 * r])]),
        ball(vec![
            at(&[0.0, 0.4 * r]),
            at(&[-0.35 * r, -0.2 * r]),
            at(&[0.35 * r, -0.2 * r]),
        ]),
    ];

    let mut unit = vec![0.0; d];
    unit[0] = 1.0;
    let exact = at(&unit);
    let null_predicates = vec![
        NullPredicate::ExactPoint {
            point: exact.clone(),
        },
        NullPredicate::UnitDistancePair,
        NullPredicate::OnHyperplane {
            axis: 0,
            offset: x0.coords()[0] + 0.7 * r,
        },
    ];
    let witness_state = cfg(vec![exact, at(&[0.2 * r, 0.2 * r])]);

    let pipeline_betas = vec![
        cfg(vec![x0.clone()]),
        cfg(vec![at(&[-r / 6.0, 0.0]), at(&[r / 6.0, 0.0])]),
    ];
    let extinction_start = cfg((0..settings.extinction_start_size)
        .map(|i| {
            let t = i as f64 / settings.extinction_start_size as f64;
            if d == 1 {
                // a circle collapses in one dimension
                at(&[0.8 * r * (t - 0.5)])
            } else {
                let angle = t * std::f64::consts::TAU;
                at(&[0.4 * r * angle.cos(), 0.4 * r * angle.sin()])
            }
        })
        .collect());
    Ok(DefaultSuite {
        starts,
        positive_targets,
        null_predicates,
        witness_state,
        pipeline_betas,
        extinction_start,
    })
}

/// Runs the full suite: positive-measure hits, null-set avoidance, one-step
/// null preservation (with a detector sanity row), the constructive pipeline
/// and extinction.
pub fn run_lab_suite<M: RateModel>(
    model: &M,
    settings: &LabSettings,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<ExperimentReport>, LabError> {
    let suite = default_suite(model, settings, master_seed)?;
    let seed = |i: u64| derive_seed(master_seed, i);
    let mut reports = Vec::new();

    reports.push(positive_measure_experiment(
        model,
        &suite.positive_targets,
        &suite.starts,
        settings.positive_max_steps,
        settings.positive_replicas,
        seed(1),
        workers,
    )?);

    // ∅ and the Poisson draws are λ-generic starts; the hand-placed singleton is skipped
    let null_starts: Vec<Configuration> = suite
        .starts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 1)
        .map(|(_, s)| s.clone())
        .collect();
    let per_start = settings
        .null_trajectories
        .div_ceil(null_starts.len() as u64);
    reports.push(null_set_experiment(
        model,
        &suite.null_predicates,
        &null_starts,
        settings.null_max_steps,
        per_start,
        seed(2),
        workers,
    )?);

    let k = model.constants();
    let window = BoxRegion::from_bounds(
        &k.x_empty
            .coords()
            .iter()
            .map(|c| c - 1.5 * k.r)
            .collect::<Vec<_>>(),
        &k.x_empty
            .coords()
            .iter()
            .map(|c| c + 1.5 * k.r)
            .collect::<Vec<_>>(),
    )?;
    let mut rng = StreamSeed::new(seed(3), 0).rng();
    let states = poisson_states(
        settings.one_step_states,
        settings.poisson_intensity,
        &window,
        &mut rng,
    )?;
    let null_target = TargetSet::new(
        suite
            .null_predicates
            .iter()
            .map(|n| TargetPiece::Null { null: n.clone() })
            .collect(),
    );
    reports.push(one_step_null_preservation(
        model,
        &null_target,
        &states,
        seed(3),
    )?);

    // detector sanity: the witness state must be flagged
    let exact = TargetSet::single(TargetPiece::Null {
        null: suite.null_predicates[0].clone(),
    });
    let mut sanity = one_step_null_preservation(
        model,
        &exact,
        std::slice::from_ref(&suite.witness_state),
        seed(4),
    )?;
    sanity.experiment = "one_step_detector_sanity".into();
    for row in &mut sanity.rows {
        row.verdict = Verdict::from_bool(row.hits == 1);
    }
    sanity.verdict = Verdict::from_bool(sanity.rows.iter().all(|r| r.verdict.passed()));
    reports.push(sanity);

    for (i, beta) in suite.pipeline_betas.iter().enumerate() {
        let mut r = theorem_pipeline(
            model,
            beta,
            k.r / 4.0,
            settings.pipeline_extra_steps,
            settings.pipeline_replicas,
            seed(10 + i as u64),
            workers,
        )?;
        r.experiment = format!("theorem_pipeline_{i}");
        reports.push(r);
    }

    reports.push(extinction_experiment(
        model,
        &suite.extinction_start,
        settings.extinction_max_steps,
        settings.extinction_replicas,
        seed(5),
        workers,
    )?);
    Ok(reports)
}
