//! Acceptance gate: runs every criterion at its stated size and tolerance,
//! prints one PASS/FAIL line per criterion, and exits nonzero on any failure.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{brute_force_rho, length_bound, path_is_valid, poisson_pmf, random_config};
use rand::{Rng, RngCore};
use sbd_core::config_space::{distance_rho, in_ball, Configuration, Point, RhoBall};
use sbd_core::embedded_chain::{
    birth_probability_region, death_probability, simulate, step, TargetPiece, TargetSet,
};
use sbd_core::geometry::sample_in_ball;
use sbd_core::irreducibility_lab::{
    default_suite, extinction_experiment, null_set_experiment, one_step_null_preservation,
    poisson_states, positive_measure_experiment, LabSettings,
};
use sbd_core::lebesgue_poisson::{
    lp_measure_estimate, lp_measure_exact, sample_poisson_config, BoxRegion, LayerSet, LayerShape,
};
use sbd_core::path_machinery::{build_path, corridor_prob_lower_bound, follows_corridor, Path};
use sbd_core::rate_models::{ContactModel, ContactParams, RateModel, Region};
use sbd_core::stats::{
    chi_square_critical, chi_square_statistic, wilson_interval, StreamSeed, Z_95,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn model() -> ContactModel {
    ContactModel::new(ContactParams::default_2d()).unwrap()
}

fn within_time(started: Instant, limit: Duration, detail: String) -> Outcome {
    let t = started.elapsed();
    if t < limit {
        Ok(format!("{detail}; {:.1} s", t.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}; took {:.1} s, limit {} s",
            t.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn metric_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = StreamSeed::new(1001, 0).rng();
    let mut mismatches = 0;
    for i in 0..500 {
        let d = 1 + i % 3;
        let n = rng.random_range(0..=7);
        let a = random_config(&mut rng, n, d, 2.0);
        let b = random_config(&mut rng, n, d, 2.0);
        if distance_rho(&a, &b) != brute_force_rho(&a, &b) {
            mismatches += 1;
        }
    }
    let detail = format!("500 pairs, {mismatches} mismatches");
    if mismatches > 0 {
        return Err(detail);
    }
    within_time(started, Duration::from_secs(10), detail)
}

fn metric_axioms() -> Outcome {
    let mut rng = StreamSeed::new(1002, 0).rng();
    let mut worst_sym = 0.0f64;
    let mut worst_tri = f64::NEG_INFINITY;
    for i in 0..1000 {
        let d = 1 + i % 3;
        let n = rng.random_range(1..=7);
        let (a, b, c) = (
            random_config(&mut rng, n, d, 2.0),
            random_config(&mut rng, n, d, 2.0),
            random_config(&mut rng, n, d, 2.0),
        );
        let (ab, bc, ac) = (
            distance_rho(&a, &b),
            distance_rho(&b, &c),
            distance_rho(&a, &c),
        );
        worst_sym = worst_sym.max((ab - distance_rho(&b, &a)).abs());
        worst_tri = worst_tri.max(ac - ab - bc);
    }
    let detail =
        format!("1000 triples, max asymmetry {worst_sym:e}, max triangle excess {worst_tri:e}");
    if worst_sym <= 1e-12 && worst_tri <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lp_consistency() -> Outcome {
    let started = Instant::now();
    let bx = |lo: &[f64], hi: &[f64]| BoxRegion::from_bounds(lo, hi).unwrap();
    let all =
        |n: usize, b: BoxRegion| LayerSet::new(n, LayerShape::AllInRegion { region: b }).unwrap();
    let prod = |b: Vec<BoxRegion>| {
        LayerSet::new(b.len(), LayerShape::ProductOfDisjointBoxes { boxes: b }).unwrap()
    };
    // (set, sampling window)
    let mut cases: Vec<(LayerSet, BoxRegion)> = vec![
        (LayerSet::empty_singleton(), bx(&[0.0], &[1.0])),
        (LayerSet::empty_singleton(), bx(&[0.0, 0.0], &[1.0, 1.0])),
    ];
    for d in 1..=3usize {
        let unit = bx(&vec![0.0; d], &vec![1.0; d]);
        let wide = bx(&vec![-0.5; d], &vec![1.5; d]);
        for n in 1..=3 {
            cases.push((all(n, unit.clone()), wide.clone()));
        }
    }
    cases.push((all(2, bx(&[0.0], &[3.0])), bx(&[0.0], &[3.0])));
    cases.push((
        all(3, bx(&[0.0, 0.0], &[2.0, 0.5])),
        bx(&[0.0, 0.0], &[2.0, 1.0]),
    ));
    cases.push((
        all(1, bx(&[0.2, 0.1, 0.0], &[0.7, 0.4, 1.0])),
        bx(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]),
    ));
    cases.push((prod(vec![bx(&[0.0], &[0.5])]), bx(&[0.0], &[2.0])));
    cases.push((
        prod(vec![bx(&[0.0], &[0.5]), bx(&[1.0], &[2.0])]),
        bx(&[0.0], &[2.0]),
    ));
    cases.push((
        prod(vec![
            bx(&[0.0], &[0.4]),
            bx(&[0.5], &[1.0]),
            bx(&[1.5], &[2.0]),
        ]),
        bx(&[0.0], &[2.0]),
    ));
    cases.push((
        prod(vec![
            bx(&[0.0, 0.0], &[1.0, 1.0]),
            bx(&[1.0, 0.0], &[2.0, 0.5]),
        ]),
        bx(&[0.0, 0.0], &[2.0, 1.0]),
    ));
    cases.push((
        prod(vec![
            bx(&[0.0, 0.0], &[0.5, 0.5]),
            bx(&[0.5, 0.5], &[1.0, 1.0]),
            bx(&[0.0, 0.5], &[0.5, 1.0]),
        ]),
        bx(&[0.0, 0.0], &[1.0, 1.0]),
    ));
    cases.push((
        prod(vec![
            bx(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]),
            bx(&[1.0, 0.0, 0.0], &[1.5, 1.0, 1.0]),
        ]),
        bx(&[0.0, 0.0, 0.0], &[1.5, 1.0, 1.0]),
    ));
    assert_eq!(cases.len(), 20);

    let mut worst = 0.0f64;
    for (i, (set, window)) in cases.iter().enumerate() {
        let mut rng = StreamSeed::new(1003, i as u64).rng();
        let est = lp_measure_estimate(set.layer(), window, |c| set.contains(c), 100_000, &mut rng)
            .map_err(|e| e.to_string())?;
        let exact = lp_measure_exact(set).map_err(|e| e.to_string())?;
        let z = est.z_score(exact).abs();
        worst = worst.max(z);
        if z > 4.0 {
            return Err(format!(
                "set {i}: estimate {} vs exact {exact} ({z:.2} SE)",
                est.value
            ));
        }
    }

    // ball example: one point within 0.1 of each center, two ways to assign
    let oracle = 2.0 * (2.0 * 0.1f64) * (2.0 * 0.1) / 2.0;
    let ball = RhoBall::new(Configuration::from_coords([[0.25], [0.75]]).unwrap(), 0.1).unwrap();
    let mut rng = StreamSeed::new(1003, 99).rng();
    let est = lp_measure_estimate(
        2,
        &bx(&[0.0], &[1.0]),
        |c| in_ball(c, &ball),
        100_000,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let zb = est.z_score(oracle).abs();
    let detail = format!(
        "20 sets, worst {worst:.2} SE; ball example {:.5} vs {oracle} ({zb:.2} SE)",
        est.value
    );
    if zb > 3.0 {
        return Err(detail);
    }
    within_time(started, Duration::from_secs(60), detail)
}

fn kernel_normalization() -> Outcome {
    let m = model();
    let mut rng = StreamSeed::new(1004, 0).rng();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(0..=20);
        let eta = random_config(&mut rng, n, 2, 1.5);
        let deaths: f64 = eta
            .iter()
            .map(|x| death_probability(&eta, x, &m).unwrap())
            .sum();
        let births = birth_probability_region(&eta, &Region::Everywhere, &m, &mut rng)
            .map_err(|e| e.to_string())?;
        worst = worst.max((deaths + births.value - 1.0).abs());
    }
    let detail = format!("100 states, max |sum - 1| = {worst:e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sampler_fidelity() -> Outcome {
    let m = model();
    let p = ContactParams::default_2d();
    let eta = Configuration::from_coords([[0.2, -0.1]]).unwrap();
    let pi = std::f64::consts::PI;
    let b = p.c_imm * pi * p.r_empty.powi(2) + p.c_b * pi * p.r.powi(2);
    let q = p.delta / (p.delta + b);
    let n = 100_000u64;
    let mut rng = StreamSeed::new(1005, 0).rng();
    let mut deaths = 0u64;
    for i in 0..n {
        let (_, ev) = step(&eta, &m, i as usize, &mut rng).map_err(|e| e.to_string())?;
        deaths += u64::from(!ev.kind.is_birth());
    }
    let freq = deaths as f64 / n as f64;
    let sigmas = (freq - q).abs() / (q * (1.0 - q) / n as f64).sqrt();

    let window = BoxRegion::from_bounds(&[0.0, 0.0], &[2.0, 1.5]).unwrap();
    let z = 2.0;
    let mean = z * window.volume();
    let draws = 20_000usize;
    let top = 14u64;
    let mut observed = vec![0u64; top as usize + 1];
    let mut rng = StreamSeed::new(1005, 1).rng();
    for _ in 0..draws {
        let k = sample_poisson_config(z, &window, &mut rng)
            .map_err(|e| e.to_string())?
            .len() as u64;
        observed[k.min(top) as usize] += 1;
    }
    let mut expected: Vec<f64> = (0..top)
        .map(|k| poisson_pmf(mean, k) * draws as f64)
        .collect();
    let head: f64 = expected.iter().sum();
    expected.push(draws as f64 - head);
    let stat = chi_square_statistic(&observed, &expected);
    let crit = chi_square_critical(observed.len() - 1, 0.01);
    let detail = format!(
        "death freq {freq:.5} vs {q:.5} ({sigmas:.2} sigma); Poisson chi-square {stat:.2} < {crit:.2}"
    );
    if sigmas <= 4.0 && stat < crit {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn path_construction() -> Outcome {
    let mut rng = StreamSeed::new(1006, 0).rng();
    let r = 1.0;
    let mut failures = 0;
    for i in 0..200 {
        let d = 1 + i % 3;
        let n = rng.random_range(0..=8);
        let eta = random_config(&mut rng, n, d, 3.0);
        let x0 = Point::origin(d);
        let path = build_path(&eta, r, &x0);
        let ok = path.is_valid()
            && path_is_valid(&path.vertices, r, &x0)
            && path.vertices.first() == Some(&Configuration::empty())
            && path.last() == Some(&eta)
            && path.len() <= length_bound(&eta, r, &x0);
        failures += usize::from(!ok);
    }
    let detail = format!("200 configurations, {failures} failures");
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// A random valid path from `∅` with `len` steps.
fn random_path(len: usize, m: &ContactModel, rng: &mut dyn RngCore) -> Path {
    let k = m.constants();
    let mut current = Configuration::empty();
    let mut vertices = vec![current.clone()];
    while vertices.len() <= len {
        if current.is_empty() {
            current.insert(k.x_empty.clone()).unwrap();
        } else if rng.random::<f64>() < 0.6 {
            let anchor = current.points()[rng.random_range(0..current.len())].clone();
            let x = sample_in_ball(&anchor, k.r / 2.0, rng);
            if !current.insert(x).unwrap() {
                continue;
            }
        } else {
            let victim = current.points()[rng.random_range(0..current.len())].clone();
            current.remove(&victim);
        }
        vertices.push(current.clone());
    }
    Path::new(vertices, k.r, k.x_empty.clone())
}

fn corridor_bound() -> Outcome {
    let started = Instant::now();
    let m = model();
    let a = m.constants().r / 8.0;
    let mut rng = StreamSeed::new(1007, 0).rng();
    let never = TargetSet::new(Vec::new());
    let replicas = 100_000u64;
    let mut lines = Vec::new();
    for j in 0..20u64 {
        let len = rng.random_range(1..=6);
        let path = random_path(len, &m, &mut rng);
        let bound = corridor_prob_lower_bound(&path, a, &m).map_err(|e| e.to_string())?;
        let mut inside = 0u64;
        for i in 0..replicas {
            let t = simulate(
                &Configuration::empty(),
                &m,
                &never,
                len,
                StreamSeed::new(1007 + j, i),
            )
            .map_err(|e| e.to_string())?;
            inside += u64::from(follows_corridor(&path, &t.states().unwrap(), a));
        }
        let (_, hi) = wilson_interval(inside, replicas, Z_95);
        if !(bound > 0.0 && bound <= hi) {
            return Err(format!(
                "path {j} (length {len}): bound {bound:e} vs upper {hi:e}"
            ));
        }
        lines.push(format!("{bound:.1e}<={hi:.1e}"));
    }
    within_time(
        started,
        Duration::from_secs(300),
        format!("20 paths, bound <= upper CI each [{}]", lines.join(" ")),
    )
}

fn positive_measure() -> Outcome {
    let m = model();
    let settings = LabSettings::default();
    let suite = default_suite(&m, &settings, 1008).map_err(|e| e.to_string())?;
    assert_eq!(suite.starts.len(), 5);
    assert_eq!(suite.positive_targets.len(), 4);
    assert!(suite.positive_targets.contains(&TargetPiece::Empty));
    let r = positive_measure_experiment(
        &m,
        &suite.positive_targets,
        &suite.starts,
        1_000,
        10_000,
        1008,
        None,
    )
    .map_err(|e| e.to_string())?;
    let min_low = r
        .rows
        .iter()
        .map(|row| row.ci_low)
        .fold(f64::INFINITY, f64::min);
    let detail = format!(
        "{} pairs, smallest Wilson lower bound {min_low:.4}",
        r.rows.len()
    );
    if r.passed() && r.rows.len() == 20 {
        Ok(detail)
    } else {
        Err(format!("{detail}\n{}", r.summary()))
    }
}

fn null_sets() -> Outcome {
    let m = model();
    let settings = LabSettings::default();
    let suite = default_suite(&m, &settings, 1009).map_err(|e| e.to_string())?;
    // ∅ and the Poisson draws; the hand-placed singleton is not a λ-generic start
    let starts: Vec<Configuration> = suite
        .starts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 1)
        .map(|(_, s)| s.clone())
        .collect();
    let per_start = 100_000 / starts.len() as u64;
    let r = null_set_experiment(
        &m,
        &suite.null_predicates,
        &starts,
        100,
        per_start,
        1009,
        None,
    )
    .map_err(|e| e.to_string())?;
    let trajectories: u64 = r.rows.iter().map(|row| row.replicas).sum();
    let hits: u64 = r.rows.iter().map(|row| row.hits).sum();

    let k = m.constants();
    let window = BoxRegion::from_bounds(
        &k.x_empty
            .coords()
            .iter()
            .map(|c| c - 1.5)
            .collect::<Vec<_>>(),
        &k.x_empty
            .coords()
            .iter()
            .map(|c| c + 1.5)
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let mut rng = StreamSeed::new(1009, 1).rng();
    let states = poisson_states(10_000, 1.0, &window, &mut rng).map_err(|e| e.to_string())?;
    let all_null = TargetSet::new(
        suite
            .null_predicates
            .iter()
            .map(|n| TargetPiece::Null { null: n.clone() })
            .collect(),
    );
    let one_step =
        one_step_null_preservation(&m, &all_null, &states, 1009).map_err(|e| e.to_string())?;
    let positive: u64 = one_step.rows.iter().map(|row| row.hits).sum();

    let exact = TargetSet::single(TargetPiece::Null {
        null: suite.null_predicates[0].clone(),
    });
    let sanity =
        one_step_null_preservation(&m, &exact, std::slice::from_ref(&suite.witness_state), 1009)
            .map_err(|e| e.to_string())?;
    let detected = sanity.rows[0].hits == 1;

    let detail = format!(
        "{hits} hits over {trajectories} trajectories ({} predicates); {positive} of {} states with Q>0; witness detected: {detected}",
        suite.null_predicates.len(),
        states.len()
    );
    if hits == 0 && trajectories >= 300_000 && positive == 0 && detected {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn extinction() -> Outcome {
    let m = model();
    let suite = default_suite(&m, &LabSettings::default(), 1010).map_err(|e| e.to_string())?;
    assert_eq!(suite.extinction_start.len(), 5);
    let r = extinction_experiment(&m, &suite.extinction_start, 10_000, 1_000, 1010, None)
        .map_err(|e| e.to_string())?;
    let row = &r.rows[0];
    let detail = format!(
        "{} of {} replicas reached the empty state",
        row.hits, row.replicas
    );
    if r.passed() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |out: &str| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_sbd"))
            .args(["lab", "--seed", "1011", "--out", out])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!("lab exited with {:?}", o.status.code()));
        }
        std::fs::read(dir.path().join(out).join("lab.csv")).map_err(|e| e.to_string())
    };
    let (a, b) = (run("first")?, run("second")?);
    let detail = format!("two default lab runs, {} and {} bytes", a.len(), b.len());
    if a == b {
        Ok(detail)
    } else {
        Err(format!("{detail}, contents differ"))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("metric oracle equivalence", metric_oracle),
        ("metric axioms", metric_axioms),
        ("Lebesgue-Poisson consistency", lp_consistency),
        ("kernel normalization", kernel_normalization),
        ("sampler fidelity", sampler_fidelity),
        ("path construction", path_construction),
        ("corridor bound", corridor_bound),
        ("positive-measure targets are hit", positive_measure),
        ("null targets are never hit", null_sets),
        ("extinction is reachable", extinction),
        ("lab determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
