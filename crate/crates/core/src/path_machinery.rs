//! Paths of configurations and the probability bounds along them.
//!
//! A path changes one point per step. A new point must land within `r/2` of a
//! point already present, and the only way out of `∅` is to `{x_∅}`. Any
//! configuration can be reached from `∅` along such a path ([`build_path`]),
//! and the chain follows a path inside radius-`a` corridors with probability at
//! least `c̄^length` ([`corridor_prob_lower_bound`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{rho_within, unit_ball_volume, Configuration, Point};
use crate::rate_models::RateModel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("corridor radius must satisfy 0 < a < r/4 (a = {a}, r = {r})")]
    BadCorridorRadius { a: f64, r: f64 },
    #[error("invalid path: {0}")]
    Invalid(PathViolation),
    #[error("path has no vertices")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// `|ζ_k △ ζ_{k+1}| != 1`.
    NotOneChange,
    /// A new point is farther than `r/2` from every old point.
    BirthTooFar,
    /// The step out of `∅` is not to `{x_∅}`.
    BadExitFromEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathViolation {
    /// Index of the offending vertex (the later vertex of the bad step).
    pub index: usize,
    pub kind: ViolationKind,
}

impl std::fmt::Display for PathViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} at vertex {}", self.kind, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub vertices: Vec<Configuration>,
    pub r: f64,
    pub x_empty: Point,
}

impl Path {
    pub fn new(vertices: Vec<Configuration>, r: f64, x_empty: Point) -> Self {
        Path {
            vertices,
            r,
            x_empty,
        }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last(&self) -> Option<&Configuration> {
        self.vertices.last()
    }

    pub fn max_vertex_size(&self) -> usize {
        self.vertices
            .iter()
            .map(Configuration::len)
            .max()
            .unwrap_or(0)
    }

    /// Checks every step; reports the first violation.
    pub fn validate(&self) -> Result<(), PathError> {
        if self.vertices.is_empty() {
            return Err(PathError::Empty);
        }
        for (k, w) in self.vertices.windows(2).enumerate() {
            let (from, to) = (&w[0], &w[1]);
            let violation = |kind| Err(PathError::Invalid(PathViolation { index: k + 1, kind }));
            if crate::config_space::symmetric_difference_size(from, to) != 1 {
                return violation(ViolationKind::NotOneChange);
            }
            if to.len() < from.len() {
                continue;
            }
            let new_point = to
                .iter()
                .find(|p| !from.contains(p))
                .expect("a birth adds exactly one point");
            if from.is_empty() {
                if *new_point != self.x_empty {
                    return violation(ViolationKind::BadExitFromEmpty);
                }
            } else if !from.iter().any(|y| new_point.distance(y) <= self.r / 2.0) {
                return violation(ViolationKind::BirthTooFar);
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// One vertex per line, each a JSON list of points.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// `2 (Σ_{x∈η} ⌈4 |x - x_∅| / r⌉ + |η|)`.
pub fn path_length_bound(eta: &Configuration, r: f64, x_empty: &Point) -> usize {
    let hops: usize = eta.iter().map(|x| hop_count(x, x_empty, r)).sum();
    2 * (hops + eta.len())
}

fn hop_count(x: &Point, from: &Point, r: f64) -> usize {
    (4.0 * x.distance(from) / r).ceil() as usize
}

/// A path from `∅` to `eta`.
///
/// Grows a scaffold from `x_∅` toward each target point in hops of at most
/// `r/4` (every hop starts from a point that stays present), then deletes the
/// scaffold points that are not in `eta`, newest first.
pub fn build_path(eta: &Configuration, r: f64, x_empty: &Point) -> Path {
    let mut vertices = vec![Configuration::empty()];
    if eta.is_empty() {
        return Path::new(vertices, r, x_empty.clone());
    }
    let mut current = Configuration::empty();
    let mut created: Vec<Point> = Vec::new();
    let mut add = |p: Point, current: &mut Configuration, vertices: &mut Vec<Configuration>| {
        if current
            .insert(p.clone())
            .expect("points share the dimension")
        {
            created.push(p);
            vertices.push(current.clone());
        }
    };
    add(x_empty.clone(), &mut current, &mut vertices);
    for x in eta {
        let hops = hop_count(x, x_empty, r);
        for i in 1..=hops {
            let waypoint = if i == hops {
                x.clone()
            } else {
                let t = i as f64 / hops as f64;
                let coords = x_empty
                    .coords()
                    .iter()
                    .zip(x.coords())
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                Point::new(coords).expect("interpolated point is finite")
            };
            add(waypoint, &mut current, &mut vertices);
        }
    }
    for p in created.iter().rev() {
        if !eta.contains(p) {
            current.remove(p);
            vertices.push(current.clone());
        }
    }
    debug_assert_eq!(&current, eta);
    Path::new(vertices, r, x_empty.clone())
}

/// One-step lower bound `c̄` on staying in the corridor, for states of size at
/// most `max_size`: `min(c3 v_d min(a, r_∅)^d, inf d) / sup (B+D)`.
///
/// The birth branch uses `min(a, r_∅)` because the step out of `∅` only has
/// `b > c3` on the immigration ball.
pub fn corridor_step_bound<M: RateModel + ?Sized>(
    model: &M,
    a: f64,
    max_size: usize,
) -> Result<f64, PathError> {
    let k = model.constants();
    if !(a > 0.0 && a < k.r / 4.0) {
        return Err(PathError::BadCorridorRadius { a, r: k.r });
    }
    let sup = model.jump_rate_sup(max_size);
    let birth = k.c3 * unit_ball_volume(k.dim) * a.min(k.r_empty).powi(k.dim as i32);
    let death = model.death_rate_inf();
    Ok(birth.min(death) / sup)
}

/// Certified lower bound `c̄^n` on `Q^n(∅, B_ρ(η_n, a))` for a valid path from
/// `∅` of length `n`, with `c̄` taken over states no larger than the largest vertex.
pub fn corridor_prob_lower_bound<M: RateModel + ?Sized>(
    path: &Path,
    a: f64,
    model: &M,
) -> Result<f64, PathError> {
    path.validate()?;
    let step = corridor_step_bound(model, a, path.max_vertex_size())?;
    Ok(step.powi(path.len() as i32))
}

/// Whether `states[k]` lies in `B_ρ(vertex_k, a)` for every `k` (with `{∅}`
/// standing in for the ball around the empty vertex).
pub fn follows_corridor(path: &Path, states: &[Configuration], a: f64) -> bool {
    path.vertices
        .iter()
        .zip(states)
        .all(|(v, s)| rho_within(v, s, a))
}
