//! Command-line front end.
//!
//! Every run is determined by one JSON config document plus the flags. All
//! randomness derives from the config's `seed` (or `--seed`), and every table
//! is written as CSV into the output directory.
//!
//! Exit codes: 0 success, 1 an experiment verdict is FAIL, 2 bad input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config_space::{distance_rho, Configuration, Point};
use crate::embedded_chain::{hitting_estimate, simulate, TargetPiece, TargetSet};
use crate::irreducibility_lab::{reports_to_csv, run_lab_suite, LabSettings};
use crate::lebesgue_poisson::{
    lp_measure_estimate_parallel, lp_measure_exact, BoxRegion, LayerSet, LayerShape,
};
use crate::path_machinery::{build_path, corridor_prob_lower_bound, path_length_bound};
use crate::rate_models::{
    default_trial_states, validate_conditions, ContactModel, ContactParams, ModelSpec, RateModel,
    ValidationOptions,
};
use crate::stats::{derive_seed, StreamSeed};

#[derive(Debug, Parser)]
#[command(name = "sbd", version, about = "Spatial birth-death chain experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Caps concurrent replicas; defaults to available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run even if the model fails the rate-condition checks.
    #[arg(long, global = true)]
    pub skip_validation: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One trajectory of the embedded chain.
    Simulate,
    /// Hitting-probability estimate with a 95% interval.
    Hitprob,
    /// Constructive path from ∅ with its length and corridor bounds.
    Path,
    /// Checks the four rate conditions on sampled states.
    Validate,
    /// Exact and Monte Carlo Lebesgue-Poisson measures.
    Measure,
    /// Bottleneck distance between two configuration files.
    Metric { a: PathBuf, b: PathBuf },
    /// The full irreducibility experiment suite.
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub initial: Configuration,
    pub max_steps: usize,
    /// Stop at the first step inside this set; empty means run to `max_steps`.
    pub target: TargetSet,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            initial: Configuration::empty(),
            max_steps: 200,
            target: TargetSet::new(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HitprobSection {
    pub initial: Configuration,
    pub target: TargetSet,
    pub max_steps: usize,
    pub replicas: u64,
}

impl Default for HitprobSection {
    fn default() -> Self {
        HitprobSection {
            initial: Configuration::empty(),
            target: TargetSet::empty_config(),
            max_steps: 1_000,
            replicas: 10_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSection {
    /// Defaults to `{x_∅ + 0.6 r e_1, x_∅ - 0.4 r e_1}`.
    pub eta: Option<Configuration>,
    /// Corridor radius; defaults to `r/8`.
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub per_size: usize,
    pub max_size: usize,
    pub probes_per_state: usize,
    pub death_margin: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        let o = ValidationOptions::default();
        ValidateSection {
            per_size: 4,
            max_size: o.max_size,
            probes_per_state: o.probes_per_state,
            death_margin: o.death_margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    /// Defaults to a small catalogue around `x_∅`.
    pub sets: Option<Vec<LayerSet>>,
    pub samples: u64,
    /// A set passes when the estimate is within this many standard errors of
    /// the exact value.
    pub tolerance_se: f64,
}

impl Default for MeasureSection {
    fn default() -> Self {
        MeasureSection {
            sets: None,
            samples: 100_000,
            tolerance_se: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub dimension: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
    pub simulate: SimulateSection,
    pub hitprob: HitprobSection,
    pub path: PathSection,
    pub validate: ValidateSection,
    pub measure: MeasureSection,
    pub lab: LabSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelSpec::Contact(ContactParams::default_2d()),
            dimension: 2,
            seed: 20_240_601,
            output_dir: PathBuf::from("sbd-out"),
            workers: None,
            simulate: SimulateSection::default(),
            hitprob: HitprobSection::default(),
            path: PathSection::default(),
            validate: ValidateSection::default(),
            measure: MeasureSection::default(),
            lab: LabSettings::default(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad input file, or a model rejected by validation.
    Input(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

pub fn load_config(path: Option<&FsPath>) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = match path {
        None => ExperimentConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
    };
    let ModelSpec::Contact(params) = &config.model;
    if params.dim != config.dimension {
        return Err(CliError::Input(format!(
            "dimension {} does not match model dimension {}",
            config.dimension, params.dim
        )));
    }
    Ok(config)
}

fn check_dim(what: &str, c: &Configuration, d: usize) -> Result<(), CliError> {
    match c.dim() {
        Some(k) if k != d => Err(CliError::Input(format!(
            "{what} has dimension {k}, expected {d}"
        ))),
        _ => Ok(()),
    }
}

fn check_target_dim(what: &str, t: &TargetSet, d: usize) -> Result<(), CliError> {
    for p in &t.pieces {
        if let TargetPiece::Ball { ball } = p {
            check_dim(what, ball.center(), d)?;
        }
    }
    Ok(())
}

fn write_artifact(dir: &FsPath, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn shifted(base: &Point, axis0: f64) -> Point {
    let mut c = base.coords().to_vec();
    c[0] += axis0;
    Point::new(c).expect("finite shift")
}

fn default_measure_sets(model: &ContactModel) -> Result<Vec<LayerSet>, CliError> {
    let k = model.constants();
    let x0 = k.x_empty.coords();
    let cube = |shift: f64, side: f64| {
        BoxRegion::from_bounds(
            &x0.iter().map(|c| c + shift).collect::<Vec<_>>(),
            &x0.iter().map(|c| c + shift + side).collect::<Vec<_>>(),
        )
    };
    let unit = cube(0.0, 1.0).map_err(input)?;
    let sets = vec![
        LayerSet::new(0, LayerShape::EmptySingleton),
        LayerSet::new(
            1,
            LayerShape::AllInRegion {
                region: unit.clone(),
            },
        ),
        LayerSet::new(
            2,
            LayerShape::AllInRegion {
                region: unit.clone(),
            },
        ),
        LayerSet::new(3, LayerShape::AllInRegion { region: unit }),
        LayerSet::new(
            2,
            LayerShape::ProductOfDisjointBoxes {
                boxes: vec![
                    cube(0.0, 0.5).map_err(input)?,
                    cube(1.0, 0.5).map_err(input)?,
                ],
            },
        ),
    ];
    sets.into_iter().map(|s| s.map_err(input)).collect()
}

/// Smallest box containing every configuration of `set` (any box for `{∅}`).
pub fn measure_window(set: &LayerSet, dim: usize) -> Result<BoxRegion, CliError> {
    let hull = |boxes: &[(Vec<f64>, Vec<f64>)]| {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for (l, h) in boxes {
            for i in 0..dim {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        BoxRegion::from_bounds(&lo, &hi).map_err(input)
    };
    match set.shape() {
        LayerShape::EmptySingleton => BoxRegion::cube(dim, 1.0).map_err(input),
        LayerShape::AllInRegion { region } => Ok(region.clone()),
        LayerShape::ProductOfDisjointBoxes { boxes } => hull(
            &boxes
                .iter()
                .map(|b| (b.lower().coords().to_vec(), b.upper().coords().to_vec()))
                .collect::<Vec<_>>(),
        ),
        LayerShape::Ball { ball } => hull(
            &ball
                .center()
                .iter()
                .map(|p| {
                    let c = p.coords();
                    (
                        c.iter().map(|x| x - ball.radius()).collect(),
                        c.iter().map(|x| x + ball.radius()).collect(),
                    )
                })
                .collect::<Vec<_>>(),
        ),
    }
}

fn validation_options(s: &ValidateSection) -> ValidationOptions {
    ValidationOptions {
        max_size: s.max_size,
        probes_per_state: s.probes_per_state,
        death_margin: s.death_margin,
    }
}

fn run_validation(
    model: &ContactModel,
    s: &ValidateSection,
    seed: u64,
) -> crate::rate_models::ConditionReport {
    let mut rng = StreamSeed::new(derive_seed(seed, 0x5A11D), 0).rng();
    let states = default_trial_states(model.constants(), s.per_size, s.max_size, &mut rng);
    validate_conditions(model, &states, &validation_options(s), &mut rng)
}

/// Result of a successful run: whether every verdict passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::Metric { a, b } = &cli.command {
        return run_metric(a, b);
    }
    let mut config = load_config(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    if config.workers == Some(0) {
        return Err(CliError::Input("workers must be at least 1".into()));
    }
    let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let model = config.model.build().map_err(input)?;
    let d = config.dimension;

    if let Command::Validate = cli.command {
        let report = run_validation(&model, &config.validate, config.seed);
        let path = write_artifact(&out, "validation.csv", &report.to_csv())?;
        print!("{}", report.to_csv());
        println!("evidence: {}", report.evidence);
        println!("wrote {}", path.display());
        return Ok(if report.all_passed() {
            Outcome::Pass
        } else {
            Outcome::Fail
        });
    }
    if !cli.skip_validation {
        let report = run_validation(&model, &config.validate, config.seed);
        if !report.all_passed() {
            let failed: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} ({})", c.condition, c.detail))
                .collect();
            return Err(CliError::Input(format!(
                "model fails rate conditions: {}; use --skip-validation to run anyway",
                failed.join("; ")
            )));
        }
    }

    match &cli.command {
        Command::Simulate => {
            let s = &config.simulate;
            check_dim("simulate.initial", &s.initial, d)?;
            check_target_dim("simulate.target", &s.target, d)?;
            let traj = simulate(
                &s.initial,
                &model,
                &s.target,
                s.max_steps,
                StreamSeed::new(config.seed, 0),
            )
            .map_err(input)?;
            let path = write_artifact(&out, "trajectory.csv", &traj.to_csv())?;
            let last = traj.final_state().map_err(input)?;
            println!(
                "simulate: {} steps, terminal {:?}, final size {}",
                traj.len(),
                traj.terminal_reason,
                last.len()
            );
            println!("wrote {}", path.display());
            Ok(Outcome::Pass)
        }
        Command::Hitprob => {
            let s = &config.hitprob;
            check_dim("hitprob.initial", &s.initial, d)?;
            check_target_dim("hitprob.target", &s.target, d)?;
            let est = hitting_estimate(
                &s.initial,
                &s.target,
                &model,
                s.max_steps,
                s.replicas,
                derive_seed(config.seed, 1),
                config.workers,
            )
            .map_err(input)?;
            let csv = format!(
                "initial,target,max_steps,replicas,hits,estimate,ci_low,ci_high\n\"{}\",\"{}\",{},{},{},{:?},{:?},{:?}\n",
                s.initial, s.target.label(), est.max_steps, est.replicas, est.hits, est.estimate, est.ci_low, est.ci_high
            );
            let path = write_artifact(&out, "hitprob.csv", &csv)?;
            println!(
                "hitprob: {}/{} hits, estimate {:?}, 95% CI [{:?}, {:?}]",
                est.hits, est.replicas, est.estimate, est.ci_low, est.ci_high
            );
            println!("wrote {}", path.display());
            Ok(Outcome::Pass)
        }
        Command::Path => {
            let k = model.constants();
            let eta = match &config.path.eta {
                Some(e) => e.clone(),
                None => Configuration::new(vec![
                    shifted(&k.x_empty, 0.6 * k.r),
                    shifted(&k.x_empty, -0.4 * k.r),
                ])
                .map_err(input)?,
            };
            check_dim("path.eta", &eta, d)?;
            let a = config.path.a.unwrap_or(k.r / 8.0);
            let path = build_path(&eta, k.r, &k.x_empty);
            let bound = path_length_bound(&eta, k.r, &k.x_empty);
            let corridor = corridor_prob_lower_bound(&path, a, &model).map_err(input)?;
            let mut csv = String::from("vertex,size,configuration\n");
            for (i, v) in path.vertices.iter().enumerate() {
                csv.push_str(&format!("{i},{},\"{v}\"\n", v.len()));
            }
            let file = write_artifact(&out, "path.csv", &csv)?;
            let ok = path.is_valid() && path.len() <= bound;
            println!(
                "path: length {} (bound {bound}), valid {}, corridor bound {corridor:?} at a = {a:?}",
                path.len(),
                path.is_valid()
            );
            println!("wrote {}", file.display());
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Measure => {
            let s = &config.measure;
            let sets = match &s.sets {
                Some(v) => v.clone(),
                None => default_measure_sets(&model)?,
            };
            let workers = config.workers.unwrap_or(8);
            let mut csv = String::from("set,layer,exact,estimate,std_error,z,verdict\n");
            let mut all_ok = true;
            for (i, set) in sets.iter().enumerate() {
                let window = measure_window(set, d)?;
                let est = lp_measure_estimate_parallel(
                    set.layer(),
                    &window,
                    |c| set.contains(c),
                    s.samples,
                    derive_seed(config.seed, 100 + i as u64),
                    workers,
                )
                .map_err(input)?;
                let exact = lp_measure_exact(set).ok();
                let z = exact.map(|e| est.z_score(e));
                let ok = z.is_none_or(|z| z.abs() <= s.tolerance_se);
                all_ok &= ok;
                let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
                csv.push_str(&format!(
                    "{i},{},{},{:?},{:?},{},{}\n",
                    set.layer(),
                    opt(exact),
                    est.value,
                    est.std_error,
                    opt(z),
                    if ok { "PASS" } else { "FAIL" }
                ));
            }
            let file = write_artifact(&out, "measure.csv", &csv)?;
            print!("{csv}");
            println!("wrote {}", file.display());
            Ok(if all_ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Lab => {
            let reports =
                run_lab_suite(&model, &config.lab, config.seed, config.workers).map_err(input)?;
            let file = write_artifact(&out, "lab.csv", &reports_to_csv(&reports))?;
            for r in &reports {
                print!("{}", r.summary());
                for (j, t) in r.failures.iter().enumerate() {
                    let f = write_artifact(
                        &out,
                        &format!("failure_{}_{j}.csv", r.experiment),
                        &t.to_csv(),
                    )?;
                    println!("  counterexample trajectory: {}", f.display());
                }
            }
            let ok = reports.iter().all(|r| r.passed());
            println!("lab: {}", if ok { "PASS" } else { "FAIL" });
            println!("wrote {}", file.display());
            Ok(if ok { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Validate | Command::Metric { .. } => unreachable!("handled above"),
    }
}

fn read_configuration(path: &FsPath) -> Result<Configuration, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run_metric(a: &FsPath, b: &FsPath) -> Result<Outcome, CliError> {
    let (x, y) = (read_configuration(a)?, read_configuration(b)?);
    if let (Some(p), Some(q)) = (x.dim(), y.dim()) {
        if p != q {
            return Err(CliError::Input(format!("dimensions differ: {p} vs {q}")));
        }
    }
    println!("{:?}", distance_rho(&x, &y));
    Ok(Outcome::Pass)
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("sbd: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let c = ExperimentConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.dimension, 2);
    }

    #[test]
    fn unknown_model_is_rejected() {
        let r: Result<ExperimentConfig, _> =
            serde_json::from_str(r#"{"model": {"name": "voter", "params": {}}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"dimension": 3}"#).unwrap();
        assert!(matches!(load_config(Some(&p)), Err(CliError::Input(_))));
    }

    #[test]
    fn windows_cover_their_sets() {
        let b = BoxRegion::from_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let c = BoxRegion::from_bounds(&[2.0, -1.0], &[3.0, 0.0]).unwrap();
        let set =
            LayerSet::new(2, LayerShape::ProductOfDisjointBoxes { boxes: vec![b, c] }).unwrap();
        let w = measure_window(&set, 2).unwrap();
        assert_eq!(w.lower().coords(), &[0.0, -1.0]);
        assert_eq!(w.upper().coords(), &[3.0, 1.0]);
    }
}
