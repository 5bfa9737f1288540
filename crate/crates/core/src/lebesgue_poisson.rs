//! The Lebesgue-Poisson measure on finite configurations.
//!
//! On layer `n` the measure is the image of `n`-fold Lebesgue measure under
//! [`sym_project`](crate::config_space::sym_project), weighted by `1/n!`; the
//! empty configuration has mass one. The full measure is infinite, so it is
//! only ever evaluated on bounded sets: exactly on boxes and products of
//! disjoint boxes, and by Monte Carlo on anything described by a predicate.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{ConfigError, Configuration, Point, RhoBall};
use crate::stats::{Estimate, StreamSeed};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("box corners must satisfy lower < upper in every coordinate")]
    DegenerateBox,
    #[error("box corner dimensions differ ({0} vs {1})")]
    BoxDimension(usize, usize),
    #[error("layer set is inconsistent: {0}")]
    InvalidLayerSet(String),
    #[error("rho-ball sets have no closed-form measure; use lp_measure_estimate")]
    UnsupportedExact,
    #[error("intensity must be positive and finite, got {0}")]
    BadIntensity(f64),
    #[error("need at least one sample")]
    NoSamples,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxRaw", into = "BoxRaw")]
pub struct BoxRegion {
    lower: Point,
    upper: Point,
}

#[derive(Serialize, Deserialize)]
struct BoxRaw {
    lower: Point,
    upper: Point,
}

impl TryFrom<BoxRaw> for BoxRegion {
    type Error = MeasureError;
    fn try_from(raw: BoxRaw) -> Result<Self, Self::Error> {
        BoxRegion::new(raw.lower, raw.upper)
    }
}

impl From<BoxRegion> for BoxRaw {
    fn from(b: BoxRegion) -> Self {
        BoxRaw {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl BoxRegion {
    pub fn new(lower: Point, upper: Point) -> Result<Self, MeasureError> {
        if lower.dim() != upper.dim() {
            return Err(MeasureError::BoxDimension(lower.dim(), upper.dim()));
        }
        if lower
            .coords()
            .iter()
            .zip(upper.coords())
            .any(|(l, u)| l >= u)
        {
            return Err(MeasureError::DegenerateBox);
        }
        Ok(BoxRegion { lower, upper })
    }

    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self, MeasureError> {
        BoxRegion::new(Point::new(lower.to_vec())?, Point::new(upper.to_vec())?)
    }

    /// The cube `[0, side]^d`.
    pub fn cube(d: usize, side: f64) -> Result<Self, MeasureError> {
        BoxRegion::from_bounds(&vec![0.0; d], &vec![side; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(self.lower.coords().iter().zip(self.upper.coords()))
                .all(|(c, (l, u))| *l <= *c && *c <= *u)
    }

    /// Whether the interiors intersect.
    pub fn overlaps(&self, other: &BoxRegion) -> bool {
        (0..self.dim()).all(|i| {
            self.lower.coords()[i] < other.upper.coords()[i]
                && other.lower.coords()[i] < self.upper.coords()[i]
        })
    }

    pub fn sample_uniform(&self, rng: &mut dyn RngCore) -> Point {
        let coords = self
            .lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect();
        Point::from_raw(coords)
    }
}

/// Shape of a measurable subset of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerShape {
    /// All configurations of the layer with every point in the region.
    AllInRegion {
        region: BoxRegion,
    },
    /// Configurations with exactly one point in each of pairwise disjoint boxes.
    ProductOfDisjointBoxes {
        boxes: Vec<BoxRegion>,
    },
    Ball {
        ball: RhoBall,
    },
    /// `{∅}`.
    EmptySingleton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerSetRaw", into = "LayerSetRaw")]
pub struct LayerSet {
    layer: usize,
    shape: LayerShape,
}

#[derive(Serialize, Deserialize)]
struct LayerSetRaw {
    layer: usize,
    shape: LayerShape,
}

impl TryFrom<LayerSetRaw> for LayerSet {
    type Error = MeasureError;
    fn try_from(raw: LayerSetRaw) -> Result<Self, Self::Error> {
        LayerSet::new(raw.layer, raw.shape)
    }
}

impl From<LayerSet> for LayerSetRaw {
    fn from(s: LayerSet) -> Self {
        LayerSetRaw {
            layer: s.layer,
            shape: s.shape,
        }
    }
}

impl LayerSet {
    pub fn new(layer: usize, shape: LayerShape) -> Result<Self, MeasureError> {
        let bad = |msg: String| Err(MeasureError::InvalidLayerSet(msg));
        match &shape {
            LayerShape::EmptySingleton if layer != 0 => {
                return bad(format!("{{∅}} lives on layer 0, not {layer}"))
            }
            LayerShape::Ball { ball } if ball.layer() != layer => {
                return bad(format!(
                    "ball center has {} points but layer is {layer}",
                    ball.layer()
                ))
            }
            LayerShape::ProductOfDisjointBoxes { boxes } => {
                if boxes.len() != layer {
                    return bad(format!("{} boxes for layer {layer}", boxes.len()));
                }
                if let Some(b) = boxes.iter().skip(1).find(|b| b.dim() != boxes[0].dim()) {
                    return Err(MeasureError::BoxDimension(boxes[0].dim(), b.dim()));
                }
                for (i, a) in boxes.iter().enumerate() {
                    if boxes[i + 1..].iter().any(|b| a.overlaps(b)) {
                        return bad("product boxes must be pairwise disjoint".into());
                    }
                }
            }
            _ => {}
        }
        Ok(LayerSet { layer, shape })
    }

    pub fn empty_singleton() -> Self {
        LayerSet {
            layer: 0,
            shape: LayerShape::EmptySingleton,
        }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn shape(&self) -> &LayerShape {
        &self.shape
    }

    pub fn contains(&self, eta: &Configuration) -> bool {
        if eta.len() != self.layer {
            return false;
        }
        match &self.shape {
            LayerShape::EmptySingleton => eta.is_empty(),
            LayerShape::AllInRegion { region } => eta.iter().all(|p| region.contains(p)),
            LayerShape::ProductOfDisjointBoxes { boxes } => {
                // Closed boxes may share faces; a point on a shared face is a
                // λ-null event, so matching boxes greedily in order is enough.
                let mut used = vec![false; boxes.len()];
                eta.iter().all(|p| {
                    match boxes
                        .iter()
                        .enumerate()
                        .find(|(i, b)| !used[*i] && b.contains(p))
                    {
                        Some((i, _)) => {
                            used[i] = true;
                            true
                        }
                        None => false,
                    }
                })
            }
            LayerShape::Ball { ball } => ball.contains(eta),
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `vol^n / n!`: the measure of layer `n` restricted to a region of volume `vol`.
pub fn layer_mass(volume: f64, n: usize) -> f64 {
    volume.powi(n as i32) / factorial(n)
}

/// Exact Lebesgue-Poisson measure of a box-shaped set.
pub fn lp_measure_exact(set: &LayerSet) -> Result<f64, MeasureError> {
    match &set.shape {
        LayerShape::EmptySingleton => Ok(1.0),
        LayerShape::AllInRegion { region } => Ok(layer_mass(region.volume(), set.layer)),
        // n! orderings of the tuple cancel the 1/n! weight
        LayerShape::ProductOfDisjointBoxes { boxes } => {
            Ok(boxes.iter().map(BoxRegion::volume).product())
        }
        LayerShape::Ball { .. } => Err(MeasureError::UnsupportedExact),
    }
}

/// Ordered-tuple Lebesgue measure of `sym^{-1}(A)`; equals `n! λ(A)`.
pub fn tuple_measure_exact(set: &LayerSet) -> Result<f64, MeasureError> {
    Ok(lp_measure_exact(set)? * factorial(set.layer))
}

fn uniform_configuration(
    n: usize,
    window: &BoxRegion,
    rng: &mut dyn RngCore,
) -> Option<Configuration> {
    let pts: Vec<Point> = (0..n).map(|_| window.sample_uniform(rng)).collect();
    // coinciding draws are a probability-zero event; they count as misses
    Configuration::new(pts).ok()
}

/// Monte Carlo estimate of `λ(A ∩ {η ⊂ window, |η| = n})` for `A` given by `predicate`.
pub fn lp_measure_estimate<F>(
    layer: usize,
    window: &BoxRegion,
    predicate: F,
    samples: u64,
    rng: &mut dyn RngCore,
) -> Result<Estimate, MeasureError>
where
    F: Fn(&Configuration) -> bool,
{
    if samples == 0 {
        return Err(MeasureError::NoSamples);
    }
    if layer == 0 {
        let v = if predicate(&Configuration::empty()) {
            1.0
        } else {
            0.0
        };
        return Ok(Estimate {
            value: v,
            std_error: 0.0,
            samples,
        });
    }
    let hits = (0..samples)
        .filter(|_| uniform_configuration(layer, window, rng).is_some_and(|c| predicate(&c)))
        .count() as u64;
    Ok(Estimate::from_bernoulli(
        hits,
        samples,
        layer_mass(window.volume(), layer),
    ))
}

/// Parallel form of [`lp_measure_estimate`]: the samples are split into
/// `workers` chunks, each on its own stream of `master_seed`, and the chunk
/// estimates are merged by sample-weighted averaging.
pub fn lp_measure_estimate_parallel<F>(
    layer: usize,
    window: &BoxRegion,
    predicate: F,
    samples: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Estimate, MeasureError>
where
    F: Fn(&Configuration) -> bool + Sync,
{
    if samples == 0 {
        return Err(MeasureError::NoSamples);
    }
    let workers = (workers.max(1) as u64).min(samples);
    let chunks: Vec<(u64, u64)> = (0..workers)
        .map(|w| {
            let size = samples / workers + u64::from(w < samples % workers);
            (w, size)
        })
        .collect();
    let parts = chunks
        .par_iter()
        .map(|&(w, size)| {
            let mut rng = StreamSeed::new(master_seed, w).rng();
            lp_measure_estimate(layer, window, &predicate, size, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_estimates(&parts))
}

/// Sample-weighted average of independent estimates of the same quantity.
pub fn merge_estimates(parts: &[Estimate]) -> Estimate {
    let total: u64 = parts.iter().map(|e| e.samples).sum();
    let t = total as f64;
    let value = parts.iter().map(|e| e.value * e.samples as f64 / t).sum();
    let var: f64 = parts
        .iter()
        .map(|e| (e.samples as f64 / t).powi(2) * e.std_error * e.std_error)
        .sum();
    Estimate {
        value,
        std_error: var.sqrt(),
        samples: total,
    }
}

/// Draws a Poisson point process of intensity `intensity` on `window`.
pub fn sample_poisson_config(
    intensity: f64,
    window: &BoxRegion,
    rng: &mut dyn RngCore,
) -> Result<Configuration, MeasureError> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(MeasureError::BadIntensity(intensity));
    }
    let mean = intensity * window.volume();
    let count = Poisson::new(mean)
        .map_err(|_| MeasureError::BadIntensity(intensity))?
        .sample(rng) as usize;
    let mut config = Configuration::empty();
    while config.len() < count {
        config.insert(window.sample_uniform(rng))?;
    }
    Ok(config)
}
