//! Birth and death rates.
//!
//! A [`RateModel`] supplies the birth intensity `b(x, η)`, the death rate
//! `d(x, η)`, the exact total birth mass `B(η) = ∫ b(x, η) dx` and a sampler
//! for the normalized birth density. The built-in [`ContactModel`] has
//! closed forms for all of these.
//!
//! The four regularity conditions on a model (sublinear birth mass, locally
//! bounded death, death bounded below, birth bounded below near existing points
//! and on the immigration ball) quantify over infinitely many states, so
//! [`validate_conditions`] only reports sampled evidence.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{Configuration, Point};
use crate::geometry::{ball_intersection_volume, ball_volume, sample_in_ball};
use crate::lebesgue_poisson::BoxRegion;
use crate::stats::Estimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("jump rate (B+D) is zero at state {0}; the model is degenerate there")]
    Degenerate(String),
    #[error("model cannot integrate its birth rate over this region")]
    UnsupportedRegion,
    #[error("unknown model '{0}'")]
    UnknownModel(String),
}

/// Constants a model declares for the regularity conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub dim: usize,
    /// Interaction radius `r`.
    pub r: f64,
    /// Birth mass growth: `B(η) <= c1 |η| + c2`.
    pub c1: f64,
    pub c2: f64,
    /// Lower bound on `b` near existing points and on the immigration ball.
    pub c3: f64,
    /// Center `x_∅` of the immigration ball `B_∅`.
    pub x_empty: Point,
    pub r_empty: f64,
}

/// A region of `R^d` over which birth mass can be integrated.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Everywhere,
    Box(BoxRegion),
    Ball { center: Point, radius: f64 },
}

pub trait RateModel: Send + Sync {
    fn constants(&self) -> &ModelConstants;

    fn dim(&self) -> usize {
        self.constants().dim
    }

    fn birth_rate(&self, x: &Point, eta: &Configuration) -> f64;

    /// Death rate of `x`, which must be a point of `eta`.
    fn death_rate(&self, x: &Point, eta: &Configuration) -> f64;

    /// Death rates of every point of `eta`, in canonical order.
    fn death_rates(&self, eta: &Configuration) -> Vec<f64> {
        eta.iter().map(|x| self.death_rate(x, eta)).collect()
    }

    /// Exact `∫ b(x, η) dx`.
    fn total_birth_mass(&self, eta: &Configuration) -> f64;

    /// A point with density `b(·, η) / B(η)`. Requires `B(η) > 0`.
    fn sample_birth_location(&self, eta: &Configuration, rng: &mut dyn RngCore) -> Point;

    /// `inf { d(x, η) : η, x ∈ η }`.
    fn death_rate_inf(&self) -> f64;

    /// `sup { (B + D)(η) : |η| <= max_size }`.
    fn jump_rate_sup(&self, max_size: usize) -> f64;

    /// `∫_U b(x, η) dx`, exact when possible, otherwise a Monte Carlo estimate.
    fn birth_mass_in(
        &self,
        _eta: &Configuration,
        _region: &Region,
        _rng: &mut dyn RngCore,
    ) -> Result<Estimate, RateError> {
        Err(RateError::UnsupportedRegion)
    }

    /// Stable textual identity of the model and its parameters.
    fn fingerprint(&self) -> String;
}

/// `(B + D)(η)`, the total jump rate.
pub fn total_rate<M: RateModel + ?Sized>(model: &M, eta: &Configuration) -> Result<f64, RateError> {
    let rate = model.total_birth_mass(eta) + model.death_rates(eta).iter().sum::<f64>();
    if rate > 0.0 && rate.is_finite() {
        Ok(rate)
    } else {
        Err(RateError::Degenerate(eta.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams {
    pub dim: usize,
    /// Immigration intensity on `B_∅`.
    pub c_imm: f64,
    /// Birth intensity contributed by each point within `r`.
    pub c_b: f64,
    pub r: f64,
    /// Baseline death rate.
    pub delta: f64,
    /// Extra death rate per neighbor within `r`.
    pub gamma: f64,
    pub x_empty: Point,
    pub r_empty: f64,
    /// Declared `c3`; defaults to `0.99 * min(c_imm, c_b)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
}

impl ContactParams {
    /// The reference two-dimensional model: subcritical, small populations,
    /// frequent extinctions.
    pub fn default_2d() -> Self {
        ContactParams {
            dim: 2,
            c_imm: 1.0,
            c_b: 0.25,
            r: 1.0,
            delta: 1.0,
            gamma: 0.1,
            x_empty: Point::origin(2),
            r_empty: 0.5,
            c3: None,
        }
    }
}

/// Contact-type model with always-on immigration.
///
/// `b(x, η) = c_imm 1[|x - x_∅| <= r_∅] + c_b #{y ∈ η : |x - y| <= r}` and
/// `d(x, η) = δ + γ #{y ∈ η \ {x} : |x - y| <= r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactModel {
    params: ContactParams,
    constants: ModelConstants,
    immigration_mass: f64,
    neighbor_mass: f64,
}

impl ContactModel {
    /// Checks parameter sanity only. Whether the regularity conditions hold is
    /// the job of [`validate_conditions`], so e.g. `delta = 0` is accepted here.
    pub fn new(params: ContactParams) -> Result<Self, RateError> {
        let bad = |m: &str| Err(RateError::InvalidParameter(m.to_string()));
        if params.dim == 0 {
            return bad("dim must be at least 1");
        }
        if params.x_empty.dim() != params.dim {
            return bad("x_empty dimension differs from dim");
        }
        for (name, v) in [
            ("c_imm", params.c_imm),
            ("c_b", params.c_b),
            ("delta", params.delta),
            ("gamma", params.gamma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be finite and nonnegative"));
            }
        }
        for (name, v) in [("r", params.r), ("r_empty", params.r_empty)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive and finite"));
            }
        }
        let c3 = params.c3.unwrap_or(0.99 * params.c_imm.min(params.c_b));
        if !(c3.is_finite() && c3 >= 0.0) {
            return bad("c3 must be finite and nonnegative");
        }
        let d = params.dim;
        let immigration_mass = params.c_imm * ball_volume(d, params.r_empty);
        let neighbor_mass = params.c_b * ball_volume(d, params.r);
        let constants = ModelConstants {
            dim: d,
            r: params.r,
            c1: neighbor_mass,
            c2: immigration_mass,
            c3,
            x_empty: params.x_empty.clone(),
            r_empty: params.r_empty,
        };
        Ok(ContactModel {
            params,
            constants,
            immigration_mass,
            neighbor_mass,
        })
    }

    pub fn params(&self) -> &ContactParams {
        &self.params
    }

    fn neighbors(&self, x: &Point, eta: &Configuration) -> usize {
        eta.iter()
            .filter(|y| x.distance(y) <= self.params.r)
            .count()
    }
}

impl fmt::Display for ContactModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "contact{}",
            serde_json::to_string(&self.params).unwrap_or_default()
        )
    }
}

impl RateModel for ContactModel {
    fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    fn birth_rate(&self, x: &Point, eta: &Configuration) -> f64 {
        let p = &self.params;
        let imm = if x.distance(&p.x_empty) <= p.r_empty {
            p.c_imm
        } else {
            0.0
        };
        imm + p.c_b * self.neighbors(x, eta) as f64
    }

    fn death_rate(&self, x: &Point, eta: &Configuration) -> f64 {
        // x itself is at distance 0 and is not a neighbor
        let nbrs = self
            .neighbors(x, eta)
            .saturating_sub(usize::from(eta.contains(x)));
        self.params.delta + self.params.gamma * nbrs as f64
    }

    fn death_rates(&self, eta: &Configuration) -> Vec<f64> {
        let p = &self.params;
        if p.gamma == 0.0 {
            return vec![p.delta; eta.len()];
        }
        let pts = eta.points();
        let mut counts = vec![0usize; pts.len()];
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i].distance(&pts[j]) <= p.r {
                    counts[i] += 1;
                    counts[j] += 1;
                }
            }
        }
        counts
            .into_iter()
            .map(|c| p.delta + p.gamma * c as f64)
            .collect()
    }

    fn total_birth_mass(&self, eta: &Configuration) -> f64 {
        self.immigration_mass + eta.len() as f64 * self.neighbor_mass
    }

    fn sample_birth_location(&self, eta: &Configuration, rng: &mut dyn RngCore) -> Point {
        let total = self.total_birth_mass(eta);
        let u = rng.random::<f64>() * total;
        if u < self.immigration_mass || eta.is_empty() {
            return sample_in_ball(&self.params.x_empty, self.params.r_empty, rng);
        }
        let idx = (((u - self.immigration_mass) / self.neighbor_mass) as usize).min(eta.len() - 1);
        sample_in_ball(&eta.points()[idx], self.params.r, rng)
    }

    fn death_rate_inf(&self) -> f64 {
        self.params.delta
    }

    fn jump_rate_sup(&self, max_size: usize) -> f64 {
        // attained by max_size points packed within r of each other
        let n = max_size as f64;
        let deaths = n * (self.params.delta + self.params.gamma * (n - 1.0).max(0.0));
        self.immigration_mass + n * self.neighbor_mass + deaths
    }

    fn birth_mass_in(
        &self,
        eta: &Configuration,
        region: &Region,
        rng: &mut dyn RngCore,
    ) -> Result<Estimate, RateError> {
        let p = &self.params;
        match region {
            Region::Everywhere => Ok(Estimate::exact(self.total_birth_mass(eta))),
            Region::Ball { center, radius } => {
                if center.dim() != p.dim {
                    return Err(RateError::InvalidParameter("region dimension".into()));
                }
                let d = p.dim;
                let imm = p.c_imm
                    * ball_intersection_volume(d, p.r_empty, *radius, center.distance(&p.x_empty));
                let nbr: f64 = eta
                    .iter()
                    .map(|y| ball_intersection_volume(d, p.r, *radius, center.distance(y)))
                    .sum();
                Ok(Estimate::exact(imm + p.c_b * nbr))
            }
            Region::Box(bx) if p.dim == 1 => {
                let (lo, hi) = (bx.lower().coords()[0], bx.upper().coords()[0]);
                let overlap = |c: f64, rad: f64| (hi.min(c + rad) - lo.max(c - rad)).max(0.0);
                let imm = p.c_imm * overlap(p.x_empty.coords()[0], p.r_empty);
                let nbr: f64 = eta.iter().map(|y| overlap(y.coords()[0], p.r)).sum();
                Ok(Estimate::exact(imm + p.c_b * nbr))
            }
            Region::Box(bx) => {
                if bx.dim() != p.dim {
                    return Err(RateError::InvalidParameter("region dimension".into()));
                }
                const SAMPLES: u64 = 100_000;
                let vol = bx.volume();
                let (mut sum, mut sum_sq) = (0.0, 0.0);
                for _ in 0..SAMPLES {
                    let b = self.birth_rate(&bx.sample_uniform(rng), eta);
                    sum += b;
                    sum_sq += b * b;
                }
                let m = SAMPLES as f64;
                let mean = sum / m;
                let var = ((sum_sq / m - mean * mean) * m / (m - 1.0)).max(0.0);
                Ok(Estimate {
                    value: vol * mean,
                    std_error: vol * (var / m).sqrt(),
                    samples: SAMPLES,
                })
            }
        }
    }

    fn fingerprint(&self) -> String {
        self.to_string()
    }
}

/// Model block of an experiment configuration: a name plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    Contact(ContactParams),
}

impl ModelSpec {
    pub fn build(&self) -> Result<ContactModel, RateError> {
        match self {
            ModelSpec::Contact(p) => ContactModel::new(p.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    SublinearGrowth,
    LocallyBoundedDeath,
    DeathBoundedBelow,
    BirthBoundedBelow,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::SublinearGrowth => 1,
            Condition::LocallyBoundedDeath => 2,
            Condition::DeathBoundedBelow => 3,
            Condition::BirthBoundedBelow => 4,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::SublinearGrowth => "sublinear_growth",
            Condition::LocallyBoundedDeath => "locally_bounded_death",
            Condition::DeathBoundedBelow => "death_bounded_below",
            Condition::BirthBoundedBelow => "birth_bounded_below",
        };
        write!(f, "{}:{name}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub passed: bool,
    /// The extreme value observed: worst slack for 1, max death rate for 2,
    /// min death rate for 3, min probed birth rate for 4.
    pub witness: f64,
    pub detail: String,
}

/// Per-condition verdicts. A pass means "no counterexample among the sampled
/// states and probes", never a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
    pub states_checked: usize,
    pub probes_per_state: usize,
    pub evidence: String,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, c: Condition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|x| x.condition == c)
            .expect("every condition is reported")
    }

    /// CSV rows `condition,verdict,witness`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,verdict,witness\n");
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{},{verdict},{:?}\n", c.condition, c.witness));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    /// Largest state size considered for the local death bound.
    pub max_size: usize,
    pub probes_per_state: usize,
    /// Condition 3 requires the minimum death rate to be at least this.
    pub death_margin: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            max_size: 20,
            probes_per_state: 16,
            death_margin: 1e-9,
        }
    }
}

pub fn validate_conditions<M: RateModel + ?Sized>(
    model: &M,
    trial_states: &[Configuration],
    options: &ValidationOptions,
    rng: &mut dyn RngCore,
) -> ConditionReport {
    let k = model.constants();
    let states: Vec<&Configuration> = trial_states
        .iter()
        .filter(|s| s.len() <= options.max_size)
        .collect();

    // 1: B(η) <= c1 |η| + c2
    let mut worst_slack = f64::INFINITY;
    for s in &states {
        let slack = k.c1 * s.len() as f64 + k.c2 - model.total_birth_mass(s);
        worst_slack = worst_slack.min(slack);
    }
    let c1_ok = k.c1 > 0.0 && k.c2 > 0.0;
    let growth = ConditionCheck {
        condition: Condition::SublinearGrowth,
        passed: c1_ok && worst_slack >= -1e-12 * (1.0 + worst_slack.abs()),
        witness: worst_slack,
        detail: format!("c1={:?} c2={:?}; min of c1|η|+c2-B(η)", k.c1, k.c2),
    };

    // 2 and 3: death rates
    let (mut d_max, mut d_min) = (0.0f64, f64::INFINITY);
    for s in &states {
        for d in model.death_rates(s) {
            d_max = d_max.max(d);
            d_min = d_min.min(d);
        }
    }
    let nonempty = states.iter().any(|s| !s.is_empty());
    let bounded = ConditionCheck {
        condition: Condition::LocallyBoundedDeath,
        passed: d_max.is_finite(),
        witness: d_max,
        detail: format!("max d over sampled states with |η| <= {}", options.max_size),
    };
    let below = ConditionCheck {
        condition: Condition::DeathBoundedBelow,
        passed: nonempty && d_min >= options.death_margin && d_min > 0.0,
        witness: if nonempty { d_min } else { f64::NAN },
        detail: format!(
            "min d over sampled states; margin {:?}",
            options.death_margin
        ),
    };

    // 4: probes near existing points, and on B_∅ at the empty state
    let mut b_min = f64::INFINITY;
    let mut probes = 0usize;
    let empty = Configuration::empty();
    for _ in 0..options.probes_per_state.max(1) {
        let x = sample_in_ball(&k.x_empty, k.r_empty, rng);
        b_min = b_min.min(model.birth_rate(&x, &empty));
        probes += 1;
    }
    for s in states.iter().filter(|s| !s.is_empty()) {
        for _ in 0..options.probes_per_state {
            let y = &s.points()[rng.random_range(0..s.len())];
            let x = sample_in_ball(y, k.r, rng);
            b_min = b_min.min(model.birth_rate(&x, s));
            probes += 1;
        }
    }
    let birth = ConditionCheck {
        condition: Condition::BirthBoundedBelow,
        passed: k.c3 > 0.0 && b_min > k.c3,
        witness: b_min,
        detail: format!("c3={:?}; min b over {probes} probes", k.c3),
    };

    ConditionReport {
        checks: vec![growth, bounded, below, birth],
        states_checked: states.len(),
        probes_per_state: options.probes_per_state,
        evidence: "sampled".into(),
    }
}

/// Trial states for [`validate_conditions`]: the empty state, scattered states
/// of every size up to `max_size`, and tightly packed clusters (which maximize
/// neighbor-dependent rates).
pub fn default_trial_states(
    constants: &ModelConstants,
    per_size: usize,
    max_size: usize,
    rng: &mut dyn RngCore,
) -> Vec<Configuration> {
    let d = constants.dim;
    let spread = 3.0 * constants.r.max(constants.r_empty);
    let mut states = vec![Configuration::empty()];
    for n in 1..=max_size {
        for rep in 0..per_size {
            let scale = if rep % 2 == 0 {
                spread
            } else {
                constants.r / 4.0
            };
            let mut s = Configuration::empty();
            while s.len() < n {
                let coords = constants
                    .x_empty
                    .coords()
                    .iter()
                    .map(|c| c + scale * rng.random_range(-1.0..1.0))
                    .collect();
                s.insert(Point::from_raw(coords)).expect("same dimension");
            }
            debug_assert_eq!(s.dim(), Some(d));
            states.push(s);
        }
    }
    states
}
