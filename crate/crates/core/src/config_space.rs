//! Finite point configurations in `R^d` and the bottleneck metric between them.
//!
//! A [`Configuration`] is a finite set of pairwise distinct points, stored in
//! lexicographic order so that equal sets compare equal and serialize
//! identically. Configurations with the same number of points form a *layer*;
//! the bottleneck distance [`distance_rho`] is a metric on each layer.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("point has a non-finite coordinate: {0:?}")]
    NonFinite(Vec<f64>),
    #[error("point has zero coordinates")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate point {0:?}; configuration points must be distinct")]
    Duplicate(Vec<f64>),
    #[error("rho-ball needs a nonempty center")]
    EmptyBallCenter,
    #[error("rho-ball radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

/// A point of `R^d`. Coordinates are finite; `-0.0` is stored as `0.0` so that
/// ordering and equality agree.
#[derive(Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, ConfigError> {
        if coords.is_empty() {
            return Err(ConfigError::ZeroDimension);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(ConfigError::NonFinite(coords));
        }
        let coords = coords.into_iter().map(|c| c + 0.0).collect();
        Ok(Point(coords))
    }

    /// The origin of `R^d`.
    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Point) -> f64 {
        euclidean(&self.0, &other.0)
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords.into_iter().map(|c| c + 0.0).collect())
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Eq for Point {}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

/// A finite set of distinct points, kept in lexicographic order.
///
/// The empty configuration carries no dimension; every nonempty configuration
/// has all its points in the same `R^d`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Configuration {
    points: Vec<Point>,
}

impl std::hash::Hash for Point {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for c in &self.0 {
            c.to_bits().hash(state);
        }
    }
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration { points: Vec::new() }
    }

    /// Builds a configuration from points in any order; rejects duplicates and
    /// mixed dimensions.
    pub fn new(points: Vec<Point>) -> Result<Self, ConfigError> {
        sym_project(points)
    }

    /// Convenience constructor from raw coordinate vectors.
    pub fn from_coords<I, V>(coords: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = V>,
        V: Into<Vec<f64>>,
    {
        let pts = coords
            .into_iter()
            .map(|c| Point::new(c.into()))
            .collect::<Result<Vec<_>, _>>()?;
        sym_project(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the ambient space, `None` for the empty configuration.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Point::dim)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// Adds `p`; returns false (and leaves the set unchanged) if it is already present.
    pub fn insert(&mut self, p: Point) -> Result<bool, ConfigError> {
        if let Some(d) = self.dim() {
            if d != p.dim() {
                return Err(ConfigError::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
        }
        match self.points.binary_search(&p) {
            Ok(_) => Ok(false),
            Err(i) => {
                self.points.insert(i, p);
                Ok(true)
            }
        }
    }

    /// Removes `p`; returns whether it was present.
    pub fn remove(&mut self, p: &Point) -> bool {
        match self.points.binary_search(p) {
            Ok(i) => {
                self.points.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, p: Point) -> Result<Self, ConfigError> {
        let mut next = self.clone();
        if !next.insert(p.clone())? {
            return Err(ConfigError::Duplicate(p.0));
        }
        Ok(next)
    }

    pub fn without(&self, p: &Point) -> Self {
        let mut next = self.clone();
        next.remove(p);
        next
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points.iter()).finish()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // JSON list of coordinate lists; shortest round-trip float formatting.
        write!(f, "[")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, c) in p.0.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c:?}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pts = Vec::<Point>::deserialize(d)?;
        sym_project(pts).map_err(serde::de::Error::custom)
    }
}

/// Forgets the order of a tuple of distinct points.
pub fn sym_project(mut tuple: Vec<Point>) -> Result<Configuration, ConfigError> {
    if let Some(first) = tuple.first() {
        let d = first.dim();
        if let Some(bad) = tuple.iter().find(|p| p.dim() != d) {
            return Err(ConfigError::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
    }
    tuple.sort_unstable();
    if let Some(w) = tuple.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConfigError::Duplicate(w[0].0.clone()));
    }
    Ok(Configuration { points: tuple })
}

/// Size of the symmetric difference under exact point equality.
pub fn symmetric_difference_size(eta: &Configuration, zeta: &Configuration) -> usize {
    let (a, b) = (&eta.points, &zeta.points);
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be at least 1");
    // v_d = v_{d-2} * 2 pi / d with v_0 = 1, v_1 = 2.
    let (mut v, start) = if d.is_multiple_of(2) {
        (1.0, 2)
    } else {
        (2.0, 3)
    };
    let mut k = start;
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Tests whether a perfect matching exists between the two point lists using
/// only pairs at distance `<= threshold`. Kuhn's augmenting paths.
fn perfect_matching_within(dist: &[f64], n: usize, threshold: f64) -> bool {
    fn augment(
        u: usize,
        n: usize,
        dist: &[f64],
        threshold: f64,
        seen: &mut [bool],
        match_right: &mut [usize],
    ) -> bool {
        for v in 0..n {
            if seen[v] || dist[u * n + v] > threshold {
                continue;
            }
            seen[v] = true;
            if match_right[v] == usize::MAX
                || augment(match_right[v], n, dist, threshold, seen, match_right)
            {
                match_right[v] = u;
                return true;
            }
        }
        false
    }

    let mut match_right = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for u in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        if !augment(u, n, dist, threshold, &mut seen, &mut match_right) {
            return false;
        }
    }
    true
}

fn distance_matrix(eta: &Configuration, zeta: &Configuration) -> Vec<f64> {
    let n = eta.len();
    let mut dist = Vec::with_capacity(n * n);
    for x in &eta.points {
        for y in &zeta.points {
            dist.push(x.distance(y));
        }
    }
    dist
}

/// Bottleneck distance: the minimum over bijections of the largest displacement.
///
/// Returns `0` for two empty configurations and `+inf` when the sizes differ.
/// The value is always one of the pairwise point distances; it is found by
/// binary search over the sorted candidates with a matching feasibility test.
pub fn distance_rho(eta: &Configuration, zeta: &Configuration) -> f64 {
    let n = eta.len();
    if n != zeta.len() {
        return f64::INFINITY;
    }
    match n {
        0 => return 0.0,
        1 => return eta.points[0].distance(&zeta.points[0]),
        _ => {}
    }
    let dist = distance_matrix(eta, zeta);
    let mut candidates = dist.clone();
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();

    // Lower bound: every row and column must be covered.
    let row_min = (0..n)
        .map(|i| {
            dist[i * n..(i + 1) * n]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let col_min = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| dist[i * n + j])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let floor = row_min.max(col_min);

    let mut lo = candidates.partition_point(|&c| c < floor);
    let mut hi = candidates.len() - 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if perfect_matching_within(&dist, n, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// `true` iff `distance_rho(eta, zeta) <= a`, decided with a single matching test.
pub fn rho_within(eta: &Configuration, zeta: &Configuration, a: f64) -> bool {
    let n = eta.len();
    if n != zeta.len() {
        return false;
    }
    match n {
        0 => return true,
        1 => return eta.points[0].distance(&zeta.points[0]) <= a,
        _ => {}
    }
    let dist = distance_matrix(eta, zeta);
    perfect_matching_within(&dist, n, a)
}

/// The closed ball `{ zeta : |zeta| = |center|, rho(center, zeta) <= radius }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RhoBallRaw", into = "RhoBallRaw")]
pub struct RhoBall {
    center: Configuration,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct RhoBallRaw {
    center: Configuration,
    radius: f64,
}

impl TryFrom<RhoBallRaw> for RhoBall {
    type Error = ConfigError;
    fn try_from(raw: RhoBallRaw) -> Result<Self, Self::Error> {
        RhoBall::new(raw.center, raw.radius)
    }
}

impl From<RhoBall> for RhoBallRaw {
    fn from(b: RhoBall) -> Self {
        RhoBallRaw {
            center: b.center,
            radius: b.radius,
        }
    }
}

impl RhoBall {
    pub fn new(center: Configuration, radius: f64) -> Result<Self, ConfigError> {
        if center.is_empty() {
            return Err(ConfigError::EmptyBallCenter);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ConfigError::BadRadius(radius));
        }
        Ok(RhoBall { center, radius })
    }

    pub fn center(&self) -> &Configuration {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn layer(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, zeta: &Configuration) -> bool {
        in_ball(zeta, self)
    }
}

pub fn in_ball(zeta: &Configuration, ball: &RhoBall) -> bool {
    rho_within(&ball.center, zeta, ball.radius)
}
